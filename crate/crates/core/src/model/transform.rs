use std::collections::{BTreeMap, BTreeSet};

use super::{Cmp, Edge, Guard, Inequality, LinearTerm, Lhs, Location, ModelError, Pta, Valuation};

/// Absolute-time clock added by [`build_pet_target`].
pub const ABS_CLOCK: &str = "x_abs";
/// Duration parameter added by the PET constructions.
pub const DURATION: &str = "d";

fn subst_term(t: &LinearTerm, v: &Valuation) -> Result<LinearTerm, ModelError> {
    let mut c = t.constant;
    for (p, k) in &t.coeffs {
        let val = v.get(p).ok_or_else(|| ModelError::MissingParameter(p.clone()))?;
        c += k * (*val as i64);
    }
    Ok(LinearTerm::constant(c))
}

fn subst_guard(g: &Guard, v: &Valuation) -> Result<Guard, ModelError> {
    let conjuncts = g
        .conjuncts
        .iter()
        .map(|c| {
            let lhs = match &c.lhs {
                Lhs::Param(p) => Lhs::Const(*v.get(p).ok_or_else(|| ModelError::MissingParameter(p.clone()))? as i64),
                other => other.clone(),
            };
            Ok(Inequality { lhs, cmp: c.cmp, rhs: subst_term(&c.rhs, v)? })
        })
        .collect::<Result<_, ModelError>>()?;
    Ok(Guard { conjuncts })
}

/// Replaces every parameter by its value; the result has no parameters.
pub fn substitute(pta: &Pta, v: &Valuation) -> Result<Pta, ModelError> {
    for p in &pta.params {
        if !v.contains_key(p) {
            return Err(ModelError::MissingParameter(p.clone()));
        }
    }
    let mut out = pta.clone();
    out.params.clear();
    for l in &mut out.locations {
        l.invariant = subst_guard(&l.invariant, v)?;
    }
    for e in &mut out.edges {
        e.guard = subst_guard(&e.guard, v)?;
    }
    Ok(out)
}

fn claim(pta: &Pta, name: &str) -> Result<(), ModelError> {
    if pta.is_clock(name) || pta.is_param(name) || pta.location(name).is_some() {
        return Err(ModelError::NameClash(name.to_string()));
    }
    Ok(())
}

fn abs_eq_d() -> Inequality {
    Inequality::clock(ABS_CLOCK, Cmp::Eq, LinearTerm::param(DURATION))
}

/// A′: fresh clock `x_abs` and parameter `d`, urgent final location without
/// outgoing edges, `x_abs = d` on every edge into it.
pub fn build_pet_target(pta: &Pta) -> Result<Pta, ModelError> {
    claim(pta, ABS_CLOCK)?;
    claim(pta, DURATION)?;
    let mut out = pta.clone();
    out.clocks.push(ABS_CLOCK.to_string());
    out.params.push(DURATION.to_string());
    let f = pta.final_location().name.clone();
    out.edges.retain(|e| e.source != f);
    for e in &mut out.edges {
        if e.target == f {
            e.guard = e.guard.and(abs_eq_d());
        }
    }
    for l in &mut out.locations {
        if l.name == f {
            l.urgent = true;
            // the empty run has no incoming edge to carry the guard
            if l.init {
                l.invariant = l.invariant.and(abs_eq_d());
            }
        }
    }
    Ok(out)
}

/// Runs that visit the private location before reaching the final one,
/// with the visited flag encoded by location doubling.
pub fn build_private_projection(pta: &Pta) -> Result<Pta, ModelError> {
    let privloc = pta.private_location().ok_or(ModelError::NoPrivate)?.name.clone();
    let fin = pta.final_location().name.clone();
    let mut taken = BTreeSet::new();
    let seen: BTreeMap<String, String> = pta
        .locations
        .iter()
        .map(|l| {
            let n = pta.fresh_name(&format!("{}_seen", l.name), &taken);
            taken.insert(n.clone());
            (l.name.clone(), n)
        })
        .collect();
    let copy = |name: &str, b: bool| if b { seen[name].clone() } else { name.to_string() };

    let mut locations = Vec::new();
    for b in [false, true] {
        for l in &pta.locations {
            let mut c = l.clone();
            c.name = copy(&l.name, b);
            c.init = l.init && (b == (l.name == privloc));
            c.private = l.private && b;
            c.is_final = l.is_final && b;
            locations.push(c);
        }
    }
    let mut edges = Vec::new();
    for b in [false, true] {
        for e in &pta.edges {
            // runs stop at their first arrival in the final location
            if e.source == fin {
                continue;
            }
            let nb = b || e.target == privloc;
            if e.target == fin && !nb {
                continue;
            }
            let mut c = e.clone();
            c.source = copy(&e.source, b);
            c.target = copy(&e.target, nb);
            edges.push(c);
        }
    }
    let out = Pta { name: pta.name.clone(), params: pta.params.clone(), clocks: pta.clocks.clone(), locations, edges };
    Ok(out.prune_unreachable())
}

/// Runs that avoid the private location: it is cut off from the graph.
pub fn build_public_projection(pta: &Pta) -> Result<Pta, ModelError> {
    let privloc = pta.private_location().ok_or(ModelError::NoPrivate)?.name.clone();
    let mut out = pta.clone();
    out.edges.retain(|e| e.source != privloc && e.target != privloc);
    let mut keep = true;
    for l in &mut out.locations {
        if l.name == privloc {
            l.private = false;
            keep = l.init || l.is_final;
            if l.init && l.is_final {
                // the empty run visits the private location
                l.invariant = Guard {
                    conjuncts: vec![Inequality { lhs: Lhs::Const(0), cmp: Cmp::Lt, rhs: LinearTerm::constant(0) }],
                };
            }
        }
    }
    if !keep {
        out.locations.retain(|l| l.name != privloc);
    }
    Ok(out)
}

fn require_one_clock(pta: &Pta) -> Result<&str, ModelError> {
    if pta.clocks.len() != 1 {
        return Err(ModelError::ClockCount { expected: 1, found: pta.clocks.len() });
    }
    Ok(&pta.clocks[0])
}

/// Final-reset pairs, in location order.
pub fn compute_frp(pta: &Pta) -> Result<Vec<(String, String)>, ModelError> {
    let x = require_one_clock(pta)?;
    let reset_into = |l: &str| pta.edges.iter().any(|e| e.target == l && e.resets_clock(x));
    let init = &pta.init().name;
    let fin = &pta.final_location().name;
    let mut out = Vec::new();
    for li in &pta.locations {
        let left = &li.name == init || (&li.name != fin && reset_into(&li.name));
        if !left {
            continue;
        }
        for lj in &pta.locations {
            if &lj.name == fin || reset_into(&lj.name) {
                out.push((li.name.clone(), lj.name.clone()));
            }
        }
    }
    Ok(out)
}

/// `c ⋈ rhs` with a constant left-hand side that holds for every
/// non-negative parameter valuation.
fn param_tautology(c: &Inequality) -> bool {
    let Lhs::Const(k) = c.lhs else { return false };
    let all = |pos: bool| c.rhs.coeffs.values().all(|&a| if pos { a >= 0 } else { a <= 0 });
    let r = c.rhs.constant;
    match c.cmp {
        Cmp::Le => all(true) && k <= r,
        Cmp::Lt => all(true) && k < r,
        Cmp::Ge => all(false) && k >= r,
        Cmp::Gt => all(false) && k > r,
        Cmp::Eq => c.rhs.is_constant() && k == r,
    }
}

/// `I[x := 0]` as constraints over parameters only.
fn at_zero(inv: &Guard) -> Vec<Inequality> {
    inv.conjuncts
        .iter()
        .map(|c| match c.lhs {
            Lhs::Clock(_) => Inequality { lhs: Lhs::Const(0), cmp: c.cmp, rhs: c.rhs.clone() },
            _ => c.clone(),
        })
        .filter(|c| !param_tautology(c))
        .collect()
}

/// A(ℓi, ℓj): the reset-free automaton of the runs from `li` (clock zero)
/// to `lj` whose only reset is on the last edge. Arrival in `lj` happens
/// with `x = d`; the invariant of `lj` is checked at the reset value
/// through a guard on the formerly resetting edges.
pub fn build_resetfree(pta: &Pta, li: &str, lj: &str) -> Result<Pta, ModelError> {
    let x = require_one_clock(pta)?.to_string();
    if !compute_frp(pta)?.iter().any(|(a, b)| a == li && b == lj) {
        return Err(ModelError::NotFrp(li.to_string(), lj.to_string()));
    }
    claim(pta, DURATION)?;
    let fin = pta.final_location().name.clone();
    let dup = pta.fresh_name(&format!("{lj}_dup"), &BTreeSet::new());
    let lj_loc = pta.location(lj).expect("pair locations exist");
    let entry_guard = at_zero(&lj_loc.invariant);
    let x_eq_d = Inequality::clock(&x, Cmp::Eq, LinearTerm::param(DURATION));

    let mut locations: Vec<Location> = Vec::new();
    for l in &pta.locations {
        let mut c = Location { name: l.name.clone(), invariant: l.invariant.clone(), urgent: l.urgent, ..Default::default() };
        if l.name == lj {
            c.invariant = Guard::default();
            c.urgent = true;
            c.is_final = true;
        }
        locations.push(c);
    }
    let mut d = Location { name: dup.clone(), invariant: lj_loc.invariant.clone(), urgent: lj_loc.urgent, ..Default::default() };
    if lj == fin {
        d.urgent = true;
    }
    let pos = pta.locations.iter().position(|l| l.name == lj).expect("present");
    locations.insert(pos + 1, d);
    let init = if li != lj { li.to_string() } else { dup.clone() };
    for l in &mut locations {
        l.init = l.name == init;
    }

    let mut edges = Vec::new();
    for e in &pta.edges {
        let resets = e.resets_clock(&x);
        let mut c = e.clone();
        if e.target == lj && !resets {
            c.target = dup.clone();
        }
        if e.source == lj {
            if lj == fin {
                continue;
            }
            c.source = dup.clone();
        }
        if c.source == fin {
            continue;
        }
        if c.target == lj {
            c.resets.clear();
            for g in &entry_guard {
                c.guard = c.guard.and(g.clone());
            }
            c.guard = c.guard.and(x_eq_d.clone());
        } else if resets {
            continue;
        }
        edges.push(c);
    }
    if lj == fin {
        let mut eps = Edge::new(&dup, lj);
        eps.guard = Guard { conjuncts: vec![x_eq_d] };
        edges.push(eps);
    }
    let mut params = pta.params.clone();
    params.push(DURATION.to_string());
    Ok(Pta { name: format!("{}_{li}_{lj}", pta.name), params, clocks: pta.clocks.clone(), locations, edges })
}

fn double_ineq(c: &Inequality) -> Inequality {
    match c.lhs {
        Lhs::Clock(_) => {
            let t = c.rhs.scaled(2);
            let (cmp, rhs) = match c.cmp {
                Cmp::Lt => (Cmp::Le, t.offset(-1)),
                Cmp::Gt => (Cmp::Ge, t.offset(1)),
                other => (other, t),
            };
            Inequality { lhs: c.lhs.clone(), cmp, rhs }
        }
        // parameters keep their values; integrality makes strictness free
        _ => match c.cmp {
            Cmp::Lt => Inequality { lhs: c.lhs.clone(), cmp: Cmp::Le, rhs: c.rhs.offset(-1) },
            Cmp::Gt => Inequality { lhs: c.lhs.clone(), cmp: Cmp::Ge, rhs: c.rhs.offset(1) },
            _ => c.clone(),
        },
    }
}

/// Clock constraints scaled by 2 with strict bounds tightened, so that every
/// constraint is non-strict and integer durations of the result cover the
/// half-integer durations of the original.
pub fn double_system(pta: &Pta) -> Pta {
    let mut out = pta.clone();
    let dbl = |g: &Guard| Guard { conjuncts: g.conjuncts.iter().map(double_ineq).collect() };
    for l in &mut out.locations {
        l.invariant = dbl(&l.invariant);
    }
    for e in &mut out.edges {
        e.guard = dbl(&e.guard);
    }
    out
}

fn rename_clocks(g: &Guard, map: &BTreeMap<String, String>) -> Guard {
    Guard {
        conjuncts: g
            .conjuncts
            .iter()
            .map(|c| match &c.lhs {
                Lhs::Clock(x) => Inequality { lhs: Lhs::Clock(map[x].clone()), cmp: c.cmp, rhs: c.rhs.clone() },
                _ => c.clone(),
            })
            .collect(),
    }
}

fn suffixed(pta: &Pta, suffix: &str, taken: &mut BTreeSet<String>) -> (Pta, BTreeMap<String, String>) {
    let mut map = BTreeMap::new();
    for x in &pta.clocks {
        let n = pta.fresh_name(&format!("{x}{suffix}"), taken);
        taken.insert(n.clone());
        map.insert(x.clone(), n);
    }
    let mut out = pta.clone();
    out.clocks = pta.clocks.iter().map(|x| map[x].clone()).collect();
    for l in &mut out.locations {
        l.invariant = rename_clocks(&l.invariant, &map);
    }
    for e in &mut out.edges {
        e.guard = rename_clocks(&e.guard, &map);
        e.resets = e.resets.iter().map(|r| map[r].clone()).collect();
        e.resets.sort();
    }
    (out, map)
}

/// Product of the private projection (clocks suffixed `_1`) and the public
/// projection (clocks `_2`) sharing the parameter; both copies enter their
/// final location together through a synchronized `fin` edge.
pub fn build_self_composition(pta: &Pta) -> Result<Pta, ModelError> {
    if pta.params.len() > 1 {
        return Err(ModelError::ParamCount { expected: 1, found: pta.params.len() });
    }
    let mut taken = BTreeSet::new();
    let (a, _) = suffixed(&build_private_projection(pta)?, "_1", &mut taken);
    let (b, _) = suffixed(&build_public_projection(pta)?, "_2", &mut taken);
    let fa = a.final_location().name.clone();
    let fb = b.final_location().name.clone();
    let pname = |x: &str, y: &str| format!("{x}__{y}");

    let mut locations = Vec::new();
    for la in &a.locations {
        for lb in &b.locations {
            let mut inv = la.invariant.clone();
            inv.conjuncts.extend(lb.invariant.conjuncts.iter().cloned());
            locations.push(Location {
                name: pname(&la.name, &lb.name),
                invariant: inv,
                urgent: la.urgent || lb.urgent,
                init: la.init && lb.init,
                private: false,
                is_final: la.is_final && lb.is_final,
            });
        }
    }
    let mut edges = Vec::new();
    for la in &a.locations {
        for lb in &b.locations {
            if la.name == fa || lb.name == fb {
                continue;
            }
            let here = pname(&la.name, &lb.name);
            for e in a.edges.iter().filter(|e| e.source == la.name && e.target != fa) {
                let mut c = e.clone();
                c.source = here.clone();
                c.target = pname(&e.target, &lb.name);
                edges.push(c);
            }
            for e in b.edges.iter().filter(|e| e.source == lb.name && e.target != fb) {
                let mut c = e.clone();
                c.source = here.clone();
                c.target = pname(&la.name, &e.target);
                edges.push(c);
            }
            for e1 in a.edges.iter().filter(|e| e.source == la.name && e.target == fa) {
                for e2 in b.edges.iter().filter(|e| e.source == lb.name && e.target == fb) {
                    let mut guard = e1.guard.clone();
                    guard.conjuncts.extend(e2.guard.conjuncts.iter().cloned());
                    let mut resets: Vec<String> = e1.resets.iter().chain(&e2.resets).cloned().collect();
                    resets.sort();
                    edges.push(Edge {
                        source: here.clone(),
                        guard,
                        action: Some("fin".to_string()),
                        resets,
                        target: pname(&fa, &fb),
                    });
                }
            }
        }
    }
    let mut clocks = a.clocks.clone();
    clocks.extend(b.clocks.iter().cloned());
    let out = Pta { name: format!("{}_selfcomp", pta.name), params: pta.params.clone(), clocks, locations, edges };
    Ok(out.prune_unreachable())
}
