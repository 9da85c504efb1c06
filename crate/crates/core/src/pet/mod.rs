//! Parametric execution times: zone-graph semi-algorithm for any number of
//! clocks, and the exact construction for one clock through the automaton
//! of the zones.

mod automaton;
mod expr;
mod normal;

use crate::geometry::{GeometryError, PolySet};
use crate::model::{build_pet_target, ModelError, Pta};
use crate::zonegraph::{ef_synth, ExplorationBudget, Status, ZoneError};

pub use automaton::{build_zone_automaton, regex_extract, ZoneAutomaton};
pub use expr::{bar_concat, bar_concat_poly, bar_union, d_zero, ZoneExpr};
pub(crate) use expr::d_interval;
pub use normal::{evaluate_at, normalize, normalize_with_cap, NormalTerm, MAX_TERMS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PetError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Zone(#[from] ZoneError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("the exact method needs exactly one clock, found {0}")]
    ClockCount(usize),
    #[error("synthesis of segment ({0}, {1}) exhausted its budget")]
    SubSynthesisExhausted(String, String),
    #[error("normal form exceeds {0} terms")]
    TooManyTerms(usize),
    #[error("strict loop constraint {0} (double the model first)")]
    StrictLoop(String),
    #[error("non-integral interval end in {0} (double the model first)")]
    NonIntegral(String),
    #[error("zone without duration variable")]
    NoDuration,
    #[error("valuation misses parameter `{0}`")]
    MissingParameter(String),
    #[error("unexpected variable `{0}` in a duration zone")]
    UnexpectedVariable(String),
}

/// Durations by reachability synthesis on the PET target construction.
pub fn pet_semialg(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), PetError> {
    let target = build_pet_target(pta)?;
    let r = ef_synth(&target, &[target.final_location().name.clone()], budget)?;
    Ok((r.set, r.status))
}

/// Exact one-clock pipeline: automaton of the zones, expression, normal form.
#[derive(Debug, Clone)]
pub struct ZonePet {
    pub automaton: ZoneAutomaton,
    pub expr: ZoneExpr,
    pub terms: Vec<NormalTerm>,
}

pub fn pet_zones(pta: &Pta, budget: ExplorationBudget) -> Result<ZonePet, PetError> {
    let automaton = build_zone_automaton(pta, budget)?;
    let expr = regex_extract(&automaton);
    let terms = normalize(&expr, &automaton.vars)?;
    Ok(ZonePet { automaton, expr, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Constraint as C, LinExpr as E, Polyhedron};
    use crate::model::{build_private_projection, build_public_projection, parse_model};

    const RUNNING: &str = "pta running\nparams p1 p2\nclocks x\nloc l0 init invariant x <= 3\nloc lpriv private invariant x <= p2\nloc lf final\nedge l0 -> lpriv when x >= p1\nedge l0 -> lf\nedge lpriv -> lf\n";
    const SELF_LOOP: &str = "pta self_loop\nparams p q\nclocks x\nloc l0 init invariant x <= p\nloc l1 final\nedge l0 -> l0 when x = p reset x\nedge l0 -> l1 when x >= q\n";

    fn v(n: &str) -> E {
        E::var(n)
    }

    fn poly(cs: &[C]) -> Polyhedron {
        Polyhedron::new(&["p1", "p2", "d"], cs).unwrap()
    }

    #[test]
    fn running_pet() {
        let a = parse_model(RUNNING).unwrap();
        let (s, st) = pet_semialg(&a, ExplorationBudget::default()).unwrap();
        assert_eq!(st, Status::Complete);
        let want = PolySet::new(
            &["p1", "p2", "d"],
            vec![
                poly(&[C::le(v("d"), E::int(3))]),
                poly(&[C::le(v("p1"), E::int(3)), C::le(v("p1"), v("d")), C::le(v("d"), v("p2"))]),
            ],
        )
        .unwrap();
        assert!(s.equal(&want).unwrap(), "{s}");

        let (s, _) = pet_semialg(&build_private_projection(&a).unwrap(), ExplorationBudget::default()).unwrap();
        let want = PolySet::from_polyhedron(poly(&[C::le(v("p1"), E::int(3)), C::le(v("p1"), v("d")), C::le(v("d"), v("p2"))]));
        assert!(s.equal(&want).unwrap(), "{s}");
        let (s, _) = pet_semialg(&build_public_projection(&a).unwrap(), ExplorationBudget::default()).unwrap();
        assert!(s.equal(&PolySet::from_polyhedron(poly(&[C::le(v("d"), E::int(3))]))).unwrap(), "{s}");
    }

    #[test]
    fn self_loop_semialg_diverges() {
        let small = ExplorationBudget { max_states: 200, max_depth: 50 };
        let (_, st) = pet_semialg(&parse_model(SELF_LOOP).unwrap(), small).unwrap();
        assert_eq!(st, Status::BudgetExhausted);
    }
}
