//! Discrete-time brute force over a parameter-free automaton.
//!
//! Time advances in unit steps. Each layer is first closed under zero-time
//! edges, then delayed by one unit. Clock values are capped one above the
//! largest constant, which preserves the truth of every constraint.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::model::{Guard, Lhs, Pta};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("model still has parameters: {0}")]
    Parametric(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub location: usize,
    pub clocks: Vec<u64>,
    pub visited_private: bool,
}

/// Durations of runs reaching the final location for the first time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Durations {
    pub private: BTreeSet<u64>,
    pub public: BTreeSet<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    PrivateOnly,
    PublicOnly,
    Both,
    Neither,
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::PrivateOnly => "private-only",
            Visibility::PublicOnly => "public-only",
            Visibility::Both => "both",
            Visibility::Neither => "neither",
        })
    }
}

fn max_constant(ta: &Pta) -> u64 {
    ta.locations
        .iter()
        .map(|l| &l.invariant)
        .chain(ta.edges.iter().map(|e| &e.guard))
        .flat_map(|g| g.conjuncts.iter())
        .map(|c| c.rhs.constant.unsigned_abs())
        .max()
        .unwrap_or(0)
}

struct Compiled<'a> {
    ta: &'a Pta,
    cap: u64,
    fin: usize,
    private: Option<usize>,
}

impl Compiled<'_> {
    fn holds(&self, g: &Guard, clocks: &[u64]) -> bool {
        g.conjuncts.iter().all(|c| {
            let lhs = match &c.lhs {
                Lhs::Clock(x) => clocks[self.ta.clocks.iter().position(|y| y == x).expect("declared clock")] as i64,
                Lhs::Const(k) => *k,
                Lhs::Param(_) => unreachable!("checked parameter-free"),
            };
            c.cmp.holds(lhs, c.rhs.constant)
        })
    }

    fn index(&self, name: &str) -> usize {
        self.ta.locations.iter().position(|l| l.name == name).expect("validated model")
    }

    fn visit(&self, loc: usize) -> bool {
        Some(loc) == self.private
    }
}

/// Enumerates private and public durations up to `bound` time units.
pub fn enumerate_durations(ta: &Pta, bound: u64) -> Result<Durations, OracleError> {
    enumerate_durations_with_cap(ta, bound, max_constant(ta) + 1)
}

/// As [`enumerate_durations`] with an explicit clock cap (at least the
/// default one for the result to be exact).
pub fn enumerate_durations_with_cap(ta: &Pta, bound: u64, cap: u64) -> Result<Durations, OracleError> {
    if !ta.params.is_empty() {
        return Err(OracleError::Parametric(ta.params.join(",")));
    }
    let fin = ta.locations.iter().position(|l| l.is_final).expect("validated model");
    let c = Compiled { ta, cap, fin, private: ta.locations.iter().position(|l| l.private) };
    let mut out = Durations::default();
    let init = c.index(&ta.init().name);
    let zero = vec![0u64; ta.clocks.len()];
    if !c.holds(&ta.locations[init].invariant, &zero) {
        return Ok(out);
    }
    let mut layer: Vec<Configuration> =
        vec![Configuration { location: init, clocks: zero, visited_private: c.visit(init) }];
    for t in 0..=bound {
        let closed = close(&c, layer, t, &mut out);
        if t == bound {
            break;
        }
        layer = delay(&c, closed);
        if layer.is_empty() {
            break;
        }
    }
    Ok(out)
}

fn record(out: &mut Durations, t: u64, private: bool) {
    if private {
        out.private.insert(t);
    } else {
        out.public.insert(t);
    }
}

/// Zero-time closure of a layer; arrivals in the final location are
/// recorded and not expanded.
fn close(c: &Compiled, layer: Vec<Configuration>, t: u64, out: &mut Durations) -> Vec<Configuration> {
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut queue: VecDeque<Configuration> = VecDeque::new();
    for s in layer {
        if seen.insert(s.clone()) {
            queue.push_back(s);
        }
    }
    let mut kept = Vec::new();
    while let Some(s) = queue.pop_front() {
        if s.location == c.fin {
            record(out, t, s.visited_private);
            continue;
        }
        let src = &c.ta.locations[s.location].name;
        for e in c.ta.edges.iter().filter(|e| &e.source == src) {
            if !c.holds(&e.guard, &s.clocks) {
                continue;
            }
            let target = c.index(&e.target);
            let mut clocks = s.clocks.clone();
            for (i, x) in c.ta.clocks.iter().enumerate() {
                if e.resets_clock(x) {
                    clocks[i] = 0;
                }
            }
            if !c.holds(&c.ta.locations[target].invariant, &clocks) {
                continue;
            }
            let n = Configuration { location: target, clocks, visited_private: s.visited_private || c.visit(target) };
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
        kept.push(s);
    }
    kept
}

fn delay(c: &Compiled, layer: Vec<Configuration>) -> Vec<Configuration> {
    let mut next = Vec::new();
    let mut seen = HashSet::new();
    for s in layer {
        let loc = &c.ta.locations[s.location];
        if loc.urgent {
            continue;
        }
        let clocks: Vec<u64> = s.clocks.iter().map(|v| (v + 1).min(c.cap)).collect();
        if !c.holds(&loc.invariant, &clocks) {
            continue;
        }
        let n = Configuration { location: s.location, clocks, visited_private: s.visited_private };
        if seen.insert(n.clone()) {
            next.push(n);
        }
    }
    next
}

/// Visibility class of every duration up to `bound`.
pub fn check_opacity_concrete(ta: &Pta, bound: u64) -> Result<Vec<(u64, Visibility)>, OracleError> {
    let d = enumerate_durations(ta, bound)?;
    Ok((0..=bound)
        .map(|t| {
            let v = match (d.private.contains(&t), d.public.contains(&t)) {
                (true, true) => Visibility::Both,
                (true, false) => Visibility::PrivateOnly,
                (false, true) => Visibility::PublicOnly,
                (false, false) => Visibility::Neither,
            };
            (t, v)
        })
        .collect())
}

pub fn to_csv(table: &[(u64, Visibility)]) -> String {
    let mut s = String::from("duration,visibility\n");
    for (t, v) in table {
        s.push_str(&format!("{t},{v}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_model, substitute, Valuation};

    const RUNNING: &str = "pta running\nparams p1 p2\nclocks x\nloc l0 init invariant x <= 3\nloc lpriv private invariant x <= p2\nloc lf final\nedge l0 -> lpriv when x >= p1\nedge l0 -> lf\nedge lpriv -> lf\n";
    const SELF_LOOP: &str = "pta self_loop\nparams p q\nclocks x\nloc l0 init invariant x <= p\nloc l1 final\nedge l0 -> l0 when x = p reset x\nedge l0 -> l1 when x >= q\n";

    fn ta(src: &str, v: &[(&str, u64)]) -> Pta {
        let v: Valuation = v.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        substitute(&parse_model(src).unwrap(), &v).unwrap()
    }

    #[test]
    fn running_durations() {
        let d = enumerate_durations(&ta(RUNNING, &[("p1", 1), ("p2", 4)]), 10).unwrap();
        assert_eq!(d.private, BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(d.public, BTreeSet::from([0, 1, 2, 3]));
        let table = check_opacity_concrete(&ta(RUNNING, &[("p1", 1), ("p2", 4)]), 6).unwrap();
        assert_eq!(table[0].1, Visibility::PublicOnly);
        assert!(table[1..4].iter().all(|(_, v)| *v == Visibility::Both));
        assert_eq!(table[4].1, Visibility::PrivateOnly);
        assert_eq!(table[5].1, Visibility::Neither);
        assert!(to_csv(&table).starts_with("duration,visibility\n0,public-only\n1,both\n"));
    }

    #[test]
    fn self_loop_durations() {
        let d = enumerate_durations(&ta(SELF_LOOP, &[("p", 3), ("q", 2)]), 20).unwrap();
        let want: BTreeSet<u64> = (0..=20).filter(|t| *t >= 2 && t % 3 != 1).collect();
        assert_eq!(d.public, want);
        assert!(d.private.is_empty());
    }

    #[test]
    fn unreachable_final() {
        let t = parse_model("clocks x\nloc a init\nloc f final\n").unwrap();
        assert_eq!(enumerate_durations(&t, 5).unwrap(), Durations::default());
        assert!(check_opacity_concrete(&t, 3).unwrap().iter().all(|(_, v)| *v == Visibility::Neither));
    }

    #[test]
    fn symmetric_branches() {
        let t = parse_model(
            "clocks x\nloc a init invariant x <= 2\nloc s private invariant x <= 2\nloc f final\nedge a -> s\nedge a -> f\nedge s -> f\n",
        )
        .unwrap();
        let table = check_opacity_concrete(&t, 4).unwrap();
        assert!(table.iter().all(|(t, v)| if *t <= 2 { *v == Visibility::Both } else { *v == Visibility::Neither }));
    }

    #[test]
    fn larger_cap_changes_nothing() {
        let t = ta(SELF_LOOP, &[("p", 2), ("q", 1)]);
        assert_eq!(enumerate_durations(&t, 25).unwrap(), enumerate_durations_with_cap(&t, 25, 50).unwrap());
    }

    #[test]
    fn rejects_parameters() {
        assert!(enumerate_durations(&parse_model(SELF_LOOP).unwrap(), 3).is_err());
    }
}
