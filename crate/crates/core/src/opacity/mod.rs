//! Execution-time opacity: synthesis of opaque valuations and durations,
//! checks at one valuation, and bounded emptiness verdicts.

mod bounded;
mod check;

use serde::Serialize;

use crate::arith::ArithError;
use crate::geometry::{GeometryError, PolySet};
use crate::model::{build_private_projection, build_public_projection, ModelError, Pta};
use crate::pet::{pet_semialg, PetError};
use crate::zonegraph::{ExplorationBudget, Status};

pub use bounded::{bounded, BoundedProblem, BoundedVerdict, Verdict};
pub use check::{check_valuation, CheckMode, CheckResult, ExactAnalysis, HalfDuration, Route, Side};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpacityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pet(#[from] PetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("duration synthesis of the instantiated model did not complete within the budget")]
    Incomplete,
    #[error("bounded analysis needs a one-clock model, found {0} clocks")]
    ClockCount(usize),
}

/// Durations of the private and public projections.
#[derive(Debug, Clone)]
pub struct Pets {
    pub private: PolySet,
    pub public: PolySet,
    pub status: Status,
}

pub fn pets(pta: &Pta, budget: ExplorationBudget) -> Result<Pets, OpacityError> {
    let (private, s1) = pet_semialg(&build_private_projection(pta)?, budget)?;
    let (public, s2) = pet_semialg(&build_public_projection(pta)?, budget)?;
    Ok(Pets { private, public, status: s1.and(s2) })
}

fn params_of(set: &PolySet) -> Vec<String> {
    set.vars().iter().filter(|v| *v != crate::model::DURATION).cloned().collect()
}

impl Pets {
    pub fn d_eos(&self) -> Result<PolySet, OpacityError> {
        Ok(self.private.intersect(&self.public)?)
    }

    pub fn diff(&self) -> Result<PolySet, OpacityError> {
        let both = self.d_eos()?;
        Ok(self.private.union(&self.public)?.difference(&both)?)
    }

    /// Opaque pairs whose valuation has no duration on one side only.
    pub fn d_fos(&self) -> Result<PolySet, OpacityError> {
        let eos = self.d_eos()?;
        let params = params_of(&eos);
        let leaky = self.diff()?.project(&params)?.extend_vars(eos.vars())?;
        Ok(eos.difference(&leaky)?)
    }

    pub fn eos(&self) -> Result<PolySet, OpacityError> {
        let eos = self.d_eos()?;
        Ok(eos.project(&params_of(&eos))?)
    }

    pub fn fos(&self) -> Result<PolySet, OpacityError> {
        let fos = self.d_fos()?;
        Ok(fos.project(&params_of(&fos))?)
    }
}

pub fn d_eos(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
    let p = pets(pta, budget)?;
    Ok((p.d_eos()?, p.status))
}

pub fn diff_set(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
    let p = pets(pta, budget)?;
    Ok((p.diff()?, p.status))
}

pub fn d_fos(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
    let p = pets(pta, budget)?;
    Ok((p.d_fos()?, p.status))
}

pub fn eos_synth(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
    let p = pets(pta, budget)?;
    Ok((p.eos()?, p.status))
}

pub fn fos_synth(pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
    let p = pets(pta, budget)?;
    Ok((p.fos()?, p.status))
}

/// Machine-readable result of one analysis.
#[derive(Debug, Clone, Serialize)]
pub struct OpacityReport {
    pub problem: String,
    pub status: String,
    pub result: serde_json::Value,
    pub timings: Option<serde_json::Value>,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Complete => "complete",
        Status::BudgetExhausted => "budget_exhausted",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Constraint as C, LinExpr as E, Polyhedron};
    use crate::model::parse_model;

    const RUNNING: &str = "pta running\nparams p1 p2\nclocks x\nloc l0 init invariant x <= 3\nloc lpriv private invariant x <= p2\nloc lf final\nedge l0 -> lpriv when x >= p1\nedge l0 -> lf\nedge lpriv -> lf\n";

    fn v(n: &str) -> E {
        E::var(n)
    }

    fn set(vars: &[&str], cs: &[C]) -> PolySet {
        PolySet::from_polyhedron(Polyhedron::new(vars, cs).unwrap())
    }

    const PD: [&str; 3] = ["p1", "p2", "d"];

    #[test]
    fn running_synthesis() {
        let p = pets(&parse_model(RUNNING).unwrap(), ExplorationBudget::default()).unwrap();
        assert_eq!(p.status, Status::Complete);
        let eos = set(&PD, &[C::le(v("p1"), v("d")), C::le(v("d"), v("p2")), C::le(v("d"), E::int(3))]);
        assert!(p.d_eos().unwrap().equal(&eos).unwrap());
        let diff = PolySet::new(
            &PD,
            vec![
                Polyhedron::new(&PD, &[C::le(v("p1"), E::int(3)), C::lt(E::int(3), v("d")), C::le(v("d"), v("p2"))]).unwrap(),
                Polyhedron::new(&PD, &[C::le(v("d"), E::int(3)), C::lt(v("p2"), v("d"))]).unwrap(),
                Polyhedron::new(&PD, &[C::le(v("d"), E::int(3)), C::lt(v("d"), v("p1"))]).unwrap(),
            ],
        )
        .unwrap();
        assert!(p.diff().unwrap().equal(&diff).unwrap(), "{}", p.diff().unwrap());
        let dfos = set(&PD, &[C::eq(v("p1"), E::int(0)), C::le(v("d"), v("p2")), C::eq(v("p2"), E::int(3))]);
        assert!(p.d_fos().unwrap().equal(&dfos).unwrap(), "{}", p.d_fos().unwrap());
        let eos_p = set(&["p1", "p2"], &[C::le(v("p1"), v("p2")), C::le(v("p1"), E::int(3))]);
        assert!(p.eos().unwrap().equal(&eos_p).unwrap());
        let fos = set(&["p1", "p2"], &[C::eq(v("p1"), E::int(0)), C::eq(v("p2"), E::int(3))]);
        assert!(p.fos().unwrap().equal(&fos).unwrap());
    }

    #[test]
    fn unreachable_private() {
        let src = "params p\nclocks x\nloc a init invariant x <= 2\nloc s private\nloc f final\nedge a -> f\nedge a -> s when x >= 5\nedge s -> f\n";
        let (eos, st) = eos_synth(&parse_model(src).unwrap(), ExplorationBudget::default()).unwrap();
        assert_eq!(st, Status::Complete);
        assert!(eos.is_empty());
    }
}
