use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::PolySet;
use crate::model::{build_resetfree, compute_frp, Pta, DURATION};
use crate::zonegraph::{ef_synth, ExplorationBudget, Status};

use super::expr::ZoneExpr;
use super::PetError;

/// Finite automaton over locations whose transitions carry the durations
/// of reset-free segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneAutomaton {
    pub states: Vec<String>,
    pub initial: String,
    pub final_state: String,
    /// Variables of the labels: the parameters then `d`.
    pub vars: Vec<String>,
    pub transitions: Vec<(String, String, PolySet)>,
}

impl ZoneAutomaton {
    pub fn label(&self, from: &str, to: &str) -> Option<&PolySet> {
        self.transitions.iter().find(|(a, b, _)| a == from && b == to).map(|(_, _, z)| z)
    }

    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph zones {\n  rankdir=LR;\n  __init [shape=point];\n");
        for s in &self.states {
            let shape = if *s == self.final_state { "doublecircle" } else { "circle" };
            out.push_str(&format!("  \"{}\" [shape={shape}];\n", esc(s)));
        }
        out.push_str(&format!("  __init -> \"{}\";\n", esc(&self.initial)));
        for (a, b, z) in &self.transitions {
            out.push_str(&format!("  \"{}\" -> \"{}\" [label=\"{}\"];\n", esc(a), esc(b), esc(&z.to_string())));
        }
        out.push_str("}\n");
        out
    }
}

/// One transition per final-reset pair with a non-empty synthesis result.
pub fn build_zone_automaton(pta: &Pta, budget: ExplorationBudget) -> Result<ZoneAutomaton, PetError> {
    if pta.clocks.len() != 1 {
        return Err(PetError::ClockCount(pta.clocks.len()));
    }
    let frp = compute_frp(pta)?;
    let mut vars = pta.params.clone();
    vars.push(DURATION.to_string());
    let mut transitions = Vec::new();
    for (li, lj) in frp {
        let sub = build_resetfree(pta, &li, &lj)?;
        let r = ef_synth(&sub, std::slice::from_ref(&lj), budget)?;
        if r.status != Status::Complete {
            return Err(PetError::SubSynthesisExhausted(li, lj));
        }
        if !r.set.is_empty() {
            transitions.push((li, lj, r.set));
        }
    }
    Ok(ZoneAutomaton {
        states: pta.locations.iter().map(|l| l.name.clone()).collect(),
        initial: pta.init().name.clone(),
        final_state: pta.final_location().name.clone(),
        vars,
        transitions,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Start,
    State(String),
    Accept,
}

/// Regular expression of the label language from the initial to the final
/// state, by state elimination. The next state eliminated is the one with
/// the fewest outgoing transitions (self-loops excluded), ties by name.
pub fn regex_extract(za: &ZoneAutomaton) -> ZoneExpr {
    let mut edges: BTreeMap<(Node, Node), ZoneExpr> = BTreeMap::new();
    let add = |edges: &mut BTreeMap<(Node, Node), ZoneExpr>, a: Node, b: Node, e: ZoneExpr| {
        let cur = edges.remove(&(a.clone(), b.clone()));
        let next = match cur {
            Some(c) => ZoneExpr::union(c, e),
            None => e,
        };
        if !next.is_zero() {
            edges.insert((a, b), next);
        }
    };
    add(&mut edges, Node::Start, Node::State(za.initial.clone()), ZoneExpr::One);
    add(&mut edges, Node::State(za.final_state.clone()), Node::Accept, ZoneExpr::One);
    for (a, b, z) in &za.transitions {
        // runs end at their first arrival in the final state
        if *a == za.final_state {
            continue;
        }
        add(&mut edges, Node::State(a.clone()), Node::State(b.clone()), ZoneExpr::Atom(z.clone()));
    }
    let mut remaining: BTreeSet<String> = za.states.iter().cloned().collect();
    while !remaining.is_empty() {
        let q = remaining
            .iter()
            .min_by_key(|s| {
                let n = Node::State((*s).clone());
                let out = edges.keys().filter(|(a, b)| *a == n && *b != n).count();
                (out, (*s).clone())
            })
            .expect("non-empty")
            .clone();
        remaining.remove(&q);
        let n = Node::State(q);
        let self_loop = edges.remove(&(n.clone(), n.clone()));
        let ins: Vec<(Node, ZoneExpr)> =
            edges.iter().filter(|((_, b), _)| *b == n).map(|((a, _), e)| (a.clone(), e.clone())).collect();
        let outs: Vec<(Node, ZoneExpr)> =
            edges.iter().filter(|((a, _), _)| *a == n).map(|((_, b), e)| (b.clone(), e.clone())).collect();
        edges.retain(|(a, b), _| *a != n && *b != n);
        let mid = self_loop.map_or(ZoneExpr::One, ZoneExpr::star);
        for (p, ein) in &ins {
            for (r, eout) in &outs {
                let e = ZoneExpr::concat(ZoneExpr::concat(ein.clone(), mid.clone()), eout.clone());
                add(&mut edges, p.clone(), r.clone(), e);
            }
        }
    }
    edges.remove(&(Node::Start, Node::Accept)).unwrap_or_else(|| ZoneExpr::Atom(PolySet::empty(&za.vars)))
}
