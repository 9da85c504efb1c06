//! Parametric zone graph and reachability synthesis.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::geometry::{Constraint, GeometryError, LinExpr, PolySet, Polyhedron};
use crate::model::{Cmp, Guard, Inequality, LinearTerm, Lhs, Pta};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZoneError {
    #[error("initial zone is empty (inconsistent invariant)")]
    EmptyInitial,
    #[error("unknown target location `{0}`")]
    UnknownTarget(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExplorationBudget {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for ExplorationBudget {
    fn default() -> Self {
        ExplorationBudget { max_states: 10_000, max_depth: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    BudgetExhausted,
}

impl Status {
    pub fn and(self, other: Status) -> Status {
        if self == Status::Complete && other == Status::Complete {
            Status::Complete
        } else {
            Status::BudgetExhausted
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicState {
    pub location: String,
    pub zone: Polyhedron,
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    /// Over the parameters of the model, in declaration order.
    pub set: PolySet,
    pub status: Status,
    pub explored: usize,
}

/// Explored part of the zone graph: states and `(from, edge index, to)`.
#[derive(Debug, Clone, Default)]
pub struct ZoneGraph {
    pub states: Vec<SymbolicState>,
    pub transitions: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    pub subsumption: bool,
    pub record_graph: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { subsumption: true, record_graph: false }
    }
}

/// Clocks followed by parameters.
pub fn zone_vars(pta: &Pta) -> Vec<String> {
    pta.clocks.iter().chain(&pta.params).cloned().collect()
}

fn term_expr(t: &LinearTerm) -> LinExpr {
    let mut e = LinExpr::int(t.constant);
    for (p, c) in &t.coeffs {
        e = e.plus(&LinExpr::term(crate::geometry::rat(*c), p));
    }
    e
}

pub fn inequality_constraint(c: &Inequality) -> Constraint {
    let lhs = match &c.lhs {
        Lhs::Clock(x) | Lhs::Param(x) => LinExpr::var(x),
        Lhs::Const(k) => LinExpr::int(*k),
    };
    let rhs = term_expr(&c.rhs);
    match c.cmp {
        Cmp::Lt => Constraint::lt(lhs, rhs),
        Cmp::Le => Constraint::le(lhs, rhs),
        Cmp::Eq => Constraint::eq(lhs, rhs),
        Cmp::Ge => Constraint::ge(lhs, rhs),
        Cmp::Gt => Constraint::gt(lhs, rhs),
    }
}

pub fn guard_constraints(g: &Guard) -> Vec<Constraint> {
    g.conjuncts.iter().map(inequality_constraint).collect()
}

pub fn initial_state(pta: &Pta) -> Result<SymbolicState, ZoneError> {
    let vars = zone_vars(pta);
    let init = pta.init();
    let zeros: Vec<Constraint> = pta.clocks.iter().map(|x| Constraint::eq(LinExpr::var(x), LinExpr::int(0))).collect();
    let inv = guard_constraints(&init.invariant);
    let mut z = Polyhedron::new(&vars, &zeros)?.constrain(&inv)?;
    if !init.urgent {
        z = z.time_elapse(&pta.clocks)?.constrain(&inv)?;
    }
    if z.is_empty() {
        return Err(ZoneError::EmptyInitial);
    }
    Ok(SymbolicState { location: init.name.clone(), zone: z })
}

/// One successor per enabled edge, with the index of the edge.
pub fn successors(pta: &Pta, s: &SymbolicState) -> Result<Vec<(usize, SymbolicState)>, ZoneError> {
    let mut out = Vec::new();
    for (i, e) in pta.edges.iter().enumerate().filter(|(_, e)| e.source == s.location) {
        let g = s.zone.constrain(&guard_constraints(&e.guard))?;
        if g.is_empty() {
            continue;
        }
        let target = pta.location(&e.target).expect("validated model");
        let inv = guard_constraints(&target.invariant);
        let mut z = g.reset_clocks(&e.resets)?.constrain(&inv)?;
        if !target.urgent && !z.is_empty() {
            z = z.time_elapse(&pta.clocks)?.constrain(&inv)?;
        }
        if !z.is_empty() {
            out.push((i, SymbolicState { location: target.name.clone(), zone: z }));
        }
    }
    Ok(out)
}

pub fn ef_synth(pta: &Pta, targets: &[String], budget: ExplorationBudget) -> Result<SynthResult, ZoneError> {
    Ok(ef_synth_with(pta, targets, budget, SynthOptions::default())?.0)
}

/// Breadth-first exploration. Target states contribute their projection on
/// the parameters and are not expanded.
pub fn ef_synth_with(
    pta: &Pta,
    targets: &[String],
    budget: ExplorationBudget,
    opts: SynthOptions,
) -> Result<(SynthResult, ZoneGraph), ZoneError> {
    for t in targets {
        if pta.location(t).is_none() {
            return Err(ZoneError::UnknownTarget(t.clone()));
        }
    }
    let mut graph = ZoneGraph::default();
    let mut found: Vec<Polyhedron> = Vec::new();
    let init = match initial_state(pta) {
        Ok(s) => s,
        Err(ZoneError::EmptyInitial) => {
            let r = SynthResult { set: PolySet::empty(&pta.params), status: Status::Complete, explored: 0 };
            return Ok((r, graph));
        }
        Err(e) => return Err(e),
    };
    let mut visited: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut store: Vec<SymbolicState> = Vec::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut status = Status::Complete;

    let mut admit = |s: SymbolicState, store: &mut Vec<SymbolicState>| -> Result<Option<usize>, ZoneError> {
        let slot = visited.entry(s.location.clone()).or_default();
        for &j in slot.iter() {
            let old = &store[j].zone;
            let dup = if opts.subsumption { old.includes(&s.zone)? } else { old.same_set(&s.zone)? };
            if dup {
                return Ok(None);
            }
        }
        store.push(s);
        slot.push(store.len() - 1);
        Ok(Some(store.len() - 1))
    };

    let i0 = admit(init, &mut store)?.expect("first state");
    queue.push_back((i0, 0));
    while let Some((i, depth)) = queue.pop_front() {
        let s = store[i].clone();
        if targets.contains(&s.location) {
            found.push(s.zone.project(&pta.params)?);
            continue;
        }
        for (edge, n) in successors(pta, &s)? {
            if depth >= budget.max_depth || store.len() >= budget.max_states {
                status = Status::BudgetExhausted;
                break;
            }
            if let Some(j) = admit(n, &mut store)? {
                if opts.record_graph {
                    graph.transitions.push((i, edge, j));
                }
                queue.push_back((j, depth + 1));
            }
        }
        if status == Status::BudgetExhausted {
            break;
        }
    }
    let explored = store.len();
    if opts.record_graph {
        graph.states = store;
    }
    let set = PolySet::new(&pta.params, found)?;
    Ok((SynthResult { set, status, explored }, graph))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of an explored zone graph.
pub fn to_dot(graph: &ZoneGraph, name: &str) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", escape(name));
    for (i, s) in graph.states.iter().enumerate() {
        out.push_str(&format!("  s{i} [label=\"{}\\n{}\"];\n", escape(&s.location), escape(&s.zone.to_string())));
    }
    for (a, e, b) in &graph.transitions {
        out.push_str(&format!("  s{a} -> s{b} [label=\"e{e}\"];\n"));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Constraint as C, LinExpr as E};
    use crate::model::{build_pet_target, build_resetfree, parse_model};

    const RUNNING: &str = "pta running\nparams p1 p2\nclocks x\nloc l0 init invariant x <= 3\nloc lpriv private invariant x <= p2\nloc lf final\nedge l0 -> lpriv when x >= p1\nedge l0 -> lf\nedge lpriv -> lf\n";
    const SELF_LOOP: &str = "pta self_loop\nparams p q\nclocks x\nloc l0 init invariant x <= p\nloc l1 final\nedge l0 -> l0 when x = p reset x\nedge l0 -> l1 when x >= q\n";

    fn v(n: &str) -> E {
        E::var(n)
    }

    #[test]
    fn initial_states() {
        let a = parse_model(RUNNING).unwrap();
        let s = initial_state(&a).unwrap();
        let want = Polyhedron::new(&zone_vars(&a), &[C::le(v("x"), E::int(3))]).unwrap();
        assert!(s.zone.same_set(&want).unwrap());

        let b = build_pet_target(&parse_model(SELF_LOOP).unwrap()).unwrap();
        let s = initial_state(&b).unwrap();
        let want = Polyhedron::new(&zone_vars(&b), &[C::le(v("x"), v("p")), C::eq(v("x_abs"), v("x"))]).unwrap();
        assert!(s.zone.same_set(&want).unwrap());

        let u = parse_model("clocks x\nloc a init urgent final\n").unwrap();
        let s = initial_state(&u).unwrap();
        assert!(s.zone.same_set(&Polyhedron::new(&["x"], &[C::eq(v("x"), E::int(0))]).unwrap()).unwrap());
    }

    #[test]
    fn self_loop_successors() {
        let b = build_pet_target(&parse_model(SELF_LOOP).unwrap()).unwrap();
        let s0 = initial_state(&b).unwrap();
        let succ = successors(&b, &s0).unwrap();
        assert_eq!(succ.len(), 2);
        let vars = zone_vars(&b);
        let loop_z = Polyhedron::new(&vars, &[C::le(v("x"), v("p")), C::eq(v("x_abs"), v("x").plus(&v("p")))]).unwrap();
        assert_eq!(succ[0].1.location, "l0");
        assert!(succ[0].1.zone.same_set(&loop_z).unwrap());
        let exit = Polyhedron::new(
            &vars,
            &[C::le(v("q"), v("x")), C::le(v("x"), v("p")), C::eq(v("x_abs"), v("d")), C::eq(v("d"), v("x"))],
        )
        .unwrap();
        assert_eq!(succ[1].1.location, "l1");
        assert!(succ[1].1.zone.same_set(&exit).unwrap());
    }

    #[test]
    fn no_successor_past_invariant() {
        let a = parse_model("clocks x\nloc a init invariant x <= 3\nloc b final\nedge a -> b when x >= 5\n").unwrap();
        assert!(successors(&a, &initial_state(&a).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn zone_automaton_labels() {
        let b = parse_model(SELF_LOOP).unwrap();
        let vars = ["p", "q", "d"];
        let r = ef_synth(&build_resetfree(&b, "l0", "l0").unwrap(), &["l0".into()], ExplorationBudget::default()).unwrap();
        assert_eq!(r.status, Status::Complete);
        let want = PolySet::from_polyhedron(Polyhedron::new(&vars, &[C::eq(v("d"), v("p"))]).unwrap());
        assert!(r.set.equal(&want).unwrap());
        let r = ef_synth(&build_resetfree(&b, "l0", "l1").unwrap(), &["l1".into()], ExplorationBudget::default()).unwrap();
        let want = PolySet::from_polyhedron(
            Polyhedron::new(&vars, &[C::le(v("q"), v("d")), C::le(v("d"), v("p"))]).unwrap(),
        );
        assert!(r.set.equal(&want).unwrap());
    }

    #[test]
    fn diverging_chain_exhausts_budget() {
        let b = build_pet_target(&parse_model(SELF_LOOP).unwrap()).unwrap();
        let r = ef_synth(&b, &["l1".into()], ExplorationBudget { max_states: 40, max_depth: 256 }).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
        let r = ef_synth(&b, &["l1".into()], ExplorationBudget { max_states: 10_000, max_depth: 12 }).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
    }

    #[test]
    fn states_respect_invariants_and_dot() {
        let a = build_pet_target(&parse_model(RUNNING).unwrap()).unwrap();
        let opts = SynthOptions { subsumption: true, record_graph: true };
        let (r, g) = ef_synth_with(&a, &["lf".into()], ExplorationBudget::default(), opts).unwrap();
        assert_eq!(r.status, Status::Complete);
        for s in &g.states {
            let inv = Polyhedron::new(&zone_vars(&a), &guard_constraints(&a.location(&s.location).unwrap().invariant))
                .unwrap();
            assert!(inv.includes(&s.zone).unwrap());
        }
        let dot = to_dot(&g, &a.name);
        assert!(dot.starts_with("digraph \"running\""));
        assert_eq!(dot.matches(" -> ").count(), g.transitions.len());
    }
}
