use serde::Serialize;

use crate::geometry::display_rational;
use crate::model::{Pta, Valuation};
use crate::zonegraph::ExplorationBudget;

use super::check::{CheckMode, ExactAnalysis};
use super::OpacityError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundedProblem {
    /// Is some valuation ∃-opaque?
    Eoe,
    /// Is some valuation fully opaque?
    Foe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NonEmpty,
    EmptyUpToBound,
}

/// Outcome of checking every integer valuation with parameters up to
/// `bound`. Sound for each valuation checked; says nothing beyond the bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundedVerdict {
    pub problem: BoundedProblem,
    pub verdict: Verdict,
    pub witness: Option<Valuation>,
    /// Least opaque duration of the witness (∃-opacity only).
    pub duration: Option<String>,
    pub bound: u64,
    pub checked: usize,
    /// For one parameter: value from which the duration sets follow a
    /// single affine pattern.
    pub threshold: Option<u64>,
}

fn grid(params: &[String], pmax: u64) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for p in params {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=pmax).map(move |x| {
                    let mut w = v.clone();
                    w.insert(p.clone(), x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Witness selection: least duration, then first valuation in
/// lexicographic order of the declared parameters.
pub fn bounded(pta: &Pta, problem: BoundedProblem, pmax: u64, jobs: usize, budget: ExplorationBudget) -> Result<BoundedVerdict, OpacityError> {
    if pta.clocks.len() != 1 {
        return Err(OpacityError::ClockCount(pta.clocks.len()));
    }
    let exact = ExactAnalysis::new(pta, budget)?;
    let mode = match problem {
        BoundedProblem::Eoe => CheckMode::Exist,
        BoundedProblem::Foe => CheckMode::Full,
    };
    let vals = grid(&pta.params, pmax);
    let jobs = jobs.clamp(1, vals.len().max(1));
    let chunk = vals.len().div_ceil(jobs).max(1);
    let found = std::thread::scope(|s| {
        let handles: Vec<_> = vals
            .chunks(chunk)
            .enumerate()
            .map(|(c, vs)| {
                let exact = &exact;
                s.spawn(move || -> Result<Vec<_>, OpacityError> {
                    let mut hits = Vec::new();
                    for (i, v) in vs.iter().enumerate() {
                        let r = exact.check(v, mode)?;
                        if r.opaque {
                            let key = if mode == CheckMode::Exist { r.duration.clone() } else { None };
                            hits.push((key, c * chunk + i));
                        }
                    }
                    Ok(hits)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect::<Result<Vec<_>, _>>()
    })?;
    let best = found.into_iter().flatten().min();
    let threshold = exact.threshold().ok().flatten();
    Ok(BoundedVerdict {
        problem,
        verdict: if best.is_some() { Verdict::NonEmpty } else { Verdict::EmptyUpToBound },
        duration: best.as_ref().and_then(|(d, _)| d.as_ref().map(display_rational)),
        witness: best.map(|(_, i)| vals[i].clone()),
        bound: pmax,
        checked: vals.len(),
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const RUNNING: &str = "pta running\nparams p1 p2\nclocks x\nloc l0 init invariant x <= 3\nloc lpriv private invariant x <= p2\nloc lf final\nedge l0 -> lpriv when x >= p1\nedge l0 -> lf\nedge lpriv -> lf\n";

    fn val(a: u64, b: u64) -> Valuation {
        [("p1".to_string(), a), ("p2".to_string(), b)].into()
    }

    #[test]
    fn running_bounded() {
        let a = parse_model(RUNNING).unwrap();
        let b = ExplorationBudget::default();
        let foe = bounded(&a, BoundedProblem::Foe, 5, 3, b).unwrap();
        assert_eq!(foe.verdict, Verdict::NonEmpty);
        assert_eq!(foe.witness, Some(val(0, 3)));
        assert_eq!(foe.checked, 36);
        let eoe = bounded(&a, BoundedProblem::Eoe, 5, 1, b).unwrap();
        assert_eq!(eoe.witness, Some(val(0, 0)));
        assert_eq!(eoe.duration.as_deref(), Some("0"));
        assert_eq!(bounded(&a, BoundedProblem::Foe, 5, 1, b).unwrap(), foe);
    }

    #[test]
    fn disjoint_durations_empty() {
        let src = "params p\nclocks x\nloc a init invariant x <= 1\nloc s private invariant x <= 5\nloc f final\nedge a -> s when x >= 1\nedge s -> f when x >= 4\nedge a -> f\n";
        let r = bounded(&parse_model(src).unwrap(), BoundedProblem::Eoe, 4, 2, ExplorationBudget::default()).unwrap();
        assert_eq!(r.verdict, Verdict::EmptyUpToBound);
        assert_eq!(r.witness, None);
        assert_eq!(r.threshold, Some(0));
    }
}
