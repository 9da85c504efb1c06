#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use etopacity::arith::PeriodicSet;
use etopacity::geometry::{rat, rat_frac, Constraint, LinExpr, Polyhedron, Rational, Rel};
use etopacity::model::{double_system, parse_model, substitute, Pta, Valuation};
use etopacity::opacity::{CheckMode, ExactAnalysis};
use etopacity::oracle::enumerate_durations;
use etopacity::zonegraph::ExplorationBudget;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn load(name: &str) -> Pta {
    let path = models_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The one-clock models under `models/corpus`, sorted by file name.
pub fn corpus() -> Vec<(String, Pta)> {
    let mut names: Vec<String> = std::fs::read_dir(models_dir().join("corpus"))
        .expect("corpus directory")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".pta"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), load(&format!("corpus/{n}")))).collect()
}

/// Every valuation of `params` in `[0, max]`.
pub fn grid(params: &[String], max: u64) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for p in params {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.insert(p.clone(), x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn upto(s: &PeriodicSet, bound: u64) -> BTreeSet<u64> {
    s.elements_upto(bound)
}

/// Compares the exact duration sets and verdicts of a model with the
/// discrete oracle on the doubled instantiated model, at every valuation
/// of the grid. Returns the number of valuations checked.
pub fn cross_validate(name: &str, pta: &Pta, max: u64, bound: u64) -> Result<usize, String> {
    let exact = ExactAnalysis::new(pta, ExplorationBudget::default()).map_err(|e| format!("{name}: {e}"))?;
    let vals = grid(&pta.params, max);
    for v in &vals {
        let concrete = double_system(&substitute(pta, v).unwrap());
        let o = enumerate_durations(&concrete, bound).map_err(|e| format!("{name}: {e}"))?;
        let (private, public) = exact.durations(v).map_err(|e| format!("{name} {v:?}: {e}"))?;
        if upto(&private, bound) != o.private {
            return Err(format!("{name} {v:?}: private {:?} vs oracle {:?}", upto(&private, bound), o.private));
        }
        if upto(&public, bound) != o.public {
            return Err(format!("{name} {v:?}: public {:?} vs oracle {:?}", upto(&public, bound), o.public));
        }
        let exist = exact.check(v, CheckMode::Exist).unwrap().opaque;
        let full = exact.check(v, CheckMode::Full).unwrap().opaque;
        let o_exist = o.private.intersection(&o.public).next().is_some();
        let o_full = o.private == o.public;
        if (exist, full) != (o_exist, o_full) {
            return Err(format!("{name} {v:?}: verdicts ({exist}, {full}) vs oracle ({o_exist}, {o_full})"));
        }
    }
    Ok(vals.len())
}

pub const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone)]
pub struct RandPoly {
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl RandPoly {
    pub fn build(&self) -> Polyhedron {
        Polyhedron::new(&self.vars, &self.constraints).unwrap()
    }

    pub fn holds(&self, pt: &BTreeMap<String, Rational>) -> bool {
        self.constraints.iter().all(|c| c.holds(pt))
    }
}

fn constraint(vars: usize) -> impl Strategy<Value = Constraint> {
    (prop::collection::vec(-4i64..=4, vars), -16i64..=16, 0..3u8).prop_map(move |(cs, k, rel)| {
        let mut e = LinExpr::int(k);
        for (c, v) in cs.iter().zip(VARS) {
            e.add_term(&rat(*c), v);
        }
        let rel = [Rel::Lt, Rel::Le, Rel::Eq][rel as usize];
        // equalities are rare in practice and make most grids empty
        let rel = if rel == Rel::Eq && k % 3 != 0 { Rel::Le } else { rel };
        Constraint { expr: e, rel }
    })
}

pub fn poly_on(n: usize) -> impl Strategy<Value = RandPoly> {
    prop::collection::vec(constraint(n), 1..=4).prop_map(move |constraints| RandPoly {
        vars: VARS[..n].iter().map(|s| s.to_string()).collect(),
        constraints,
    })
}

pub fn rand_poly() -> impl Strategy<Value = RandPoly> {
    (1usize..=3).prop_flat_map(poly_on)
}

pub fn poly_pair() -> impl Strategy<Value = (RandPoly, RandPoly)> {
    (1usize..=3).prop_flat_map(|n| (poly_on(n), poly_on(n)))
}

/// Grid points with denominator 2 in `[0, 8]^n`.
pub fn half_grid(vars: &[String]) -> Vec<BTreeMap<String, Rational>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|pt| {
                (0..=16).map(move |k| {
                    let mut q = pt.clone();
                    q.insert(v.clone(), rat_frac(k, 2));
                    q
                })
            })
            .collect();
    }
    out
}

/// Is there a real `t` (with `t >= 0` when `nonneg`) such that the point
/// `pt + t * dir` satisfies every constraint?
pub fn exists_along(cs: &[Constraint], pt: &BTreeMap<String, Rational>, dir: &BTreeMap<String, Rational>, nonneg: bool) -> bool {
    let mut lo: Option<(Rational, bool)> = if nonneg { Some((Rational::zero(), false)) } else { None };
    let mut hi: Option<(Rational, bool)> = None;
    for c in cs {
        let b = c.expr.eval(pt);
        let a: Rational = dir.iter().map(|(v, k)| c.expr.coeff(v) * k).sum();
        if a.is_zero() {
            let ok = match c.rel {
                Rel::Lt => b.is_negative(),
                Rel::Le => !b.is_positive(),
                Rel::Eq => b.is_zero(),
            };
            if !ok {
                return false;
            }
            continue;
        }
        // a t + b rel 0
        let t = -b / &a;
        let strict = c.rel == Rel::Lt;
        let tighten_hi = |hi: &mut Option<(Rational, bool)>| {
            if hi.as_ref().is_none_or(|(h, s)| t < *h || (t == *h && strict && !s)) {
                *hi = Some((t.clone(), strict));
            }
        };
        let tighten_lo = |lo: &mut Option<(Rational, bool)>| {
            if lo.as_ref().is_none_or(|(l, s)| t > *l || (t == *l && strict && !s)) {
                *lo = Some((t.clone(), strict));
            }
        };
        match c.rel {
            Rel::Eq => {
                tighten_hi(&mut hi);
                tighten_lo(&mut lo);
            }
            _ if a.is_positive() => tighten_hi(&mut hi),
            _ => tighten_lo(&mut lo),
        }
    }
    match (lo, hi) {
        (Some((l, ls)), Some((h, hs))) => l < h || (l == h && !ls && !hs),
        _ => true,
    }
}

/// Enumerated membership in `[0, 200]` for the periodic-set properties.
pub const HORIZON: u64 = 200;

pub fn enumerate(s: &PeriodicSet) -> BTreeSet<u64> {
    s.elements_upto(HORIZON)
}

pub fn periodic() -> impl Strategy<Value = PeriodicSet> {
    prop_oneof![
        prop::collection::btree_set(0u64..30, 0..6).prop_map(PeriodicSet::finite),
        (0u64..12, 0u64..12).prop_map(|(b, c)| PeriodicSet::interval(b, c)),
        (0u64..12, 1u64..7, any::<u8>()).prop_map(|(t, p, mask)| {
            let pre = mask as u64 ^ 0x5a;
            PeriodicSet::from_fn(t, p, move |x| if x < t { (pre >> (x % 8)) & 1 == 1 } else { (mask >> ((x - t) % p)) & 1 == 1 })
        }),
    ]
}

/// Least fixpoint of `{0} ∪ (S + X)` restricted to `[0, HORIZON]`.
pub fn brute_star(s: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut reach = vec![false; HORIZON as usize + 1];
    reach[0] = true;
    for n in 1..=HORIZON {
        reach[n as usize] = s.iter().any(|&a| a >= 1 && a <= n && reach[(n - a) as usize]);
    }
    (0..=HORIZON).filter(|&n| reach[n as usize]).collect()
}

pub fn brute_sum(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> BTreeSet<u64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x + y)).filter(|&s| s <= HORIZON).collect()
}
