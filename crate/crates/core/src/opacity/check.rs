use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::{to_lpsl, PeriodicSet};
use crate::geometry::{display_rational, rat, rat_frac, PolySet, Rational};
use crate::model::{build_private_projection, build_public_projection, double_system, substitute, Pta, Valuation};
use crate::pet::{d_interval, evaluate_at, pet_zones, PetError, ZonePet};
use crate::zonegraph::{ExplorationBudget, Status};

use super::{pets, OpacityError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exist,
    Full,
}

/// Duration counted in half time units, as produced by the doubled model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfDuration(pub u64);

impl HalfDuration {
    pub fn value(self) -> Rational {
        rat_frac(self.0 as i64, 2)
    }
}

impl fmt::Display for HalfDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_rational(&self.value()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    PrivateOnly,
    PublicOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// One clock: zone-automaton expressions of the doubled model.
    Exact,
    /// Duration polyhedra of the instantiated model.
    Polyhedral,
}

/// Verdict at one valuation. `duration` is the least opaque duration for
/// `exist` and the least duration on one side only for `full`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub mode: CheckMode,
    pub opaque: bool,
    pub duration: Option<Rational>,
    pub side: Option<Side>,
    pub route: Route,
}

impl Serialize for CheckResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            mode: CheckMode,
            opaque: bool,
            duration: Option<String>,
            side: Option<Side>,
            route: &'a Route,
        }
        Out {
            mode: self.mode,
            opaque: self.opaque,
            duration: self.duration.as_ref().map(display_rational),
            side: self.side,
            route: &self.route,
        }
        .serialize(s)
    }
}

/// Exact duration sets of a one-clock model: normal forms of the private
/// and public projections of its doubled version, computed once and
/// evaluated at any valuation.
#[derive(Debug, Clone)]
pub struct ExactAnalysis {
    pub params: Vec<String>,
    pub private: ZonePet,
    pub public: ZonePet,
}

impl ExactAnalysis {
    pub fn new(pta: &Pta, budget: ExplorationBudget) -> Result<Self, OpacityError> {
        if pta.clocks.len() != 1 {
            return Err(PetError::ClockCount(pta.clocks.len()).into());
        }
        let private = pet_zones(&double_system(&build_private_projection(pta)?), budget)?;
        let public = pet_zones(&double_system(&build_public_projection(pta)?), budget)?;
        Ok(ExactAnalysis { params: pta.params.clone(), private, public })
    }

    /// Private and public durations at `v`, in half time units.
    pub fn durations(&self, v: &Valuation) -> Result<(PeriodicSet, PeriodicSet), OpacityError> {
        Ok((evaluate_at(&self.private.terms, v)?, evaluate_at(&self.public.terms, v)?))
    }

    pub fn check(&self, v: &Valuation, mode: CheckMode) -> Result<CheckResult, OpacityError> {
        let (private, public) = self.durations(v)?;
        let half = |x: u64| Some(HalfDuration(x).value());
        Ok(match mode {
            CheckMode::Exist => {
                let w = private.intersect_nonempty(&public);
                CheckResult { mode, opaque: w.is_some(), duration: w.and_then(half), side: None, route: Route::Exact }
            }
            CheckMode::Full => match private.first_difference(&public) {
                None => CheckResult { mode, opaque: true, duration: None, side: None, route: Route::Exact },
                Some((x, in_private)) => CheckResult {
                    mode,
                    opaque: false,
                    duration: half(x),
                    side: Some(if in_private { Side::PrivateOnly } else { Side::PublicOnly }),
                    route: Route::Exact,
                },
            },
        })
    }

    /// Parameter value from which the duration sets of both projections
    /// follow one affine pattern; single-parameter models only.
    pub fn threshold(&self) -> Result<Option<u64>, OpacityError> {
        let [p] = self.params.as_slice() else { return Ok(None) };
        let a = to_lpsl(&self.private.terms, p)?;
        let b = to_lpsl(&self.public.terms, p)?;
        Ok(Some(a.threshold.max(b.threshold)))
    }
}

/// Least point of `s` (over `d` only) if attained, otherwise a point close
/// to the infimum.
fn sample(s: &PolySet) -> Result<Option<Rational>, OpacityError> {
    let mut best: Option<Rational> = None;
    for p in s.disjuncts() {
        let Some(iv) = d_interval(p, &[], &Valuation::new())? else { continue };
        let x = if !iv.lo_strict {
            iv.lo.clone()
        } else {
            let step = match &iv.hi {
                Some(h) => ((h - &iv.lo) / rat(2)).min(rat_frac(1, 2)),
                None => rat_frac(1, 2),
            };
            &iv.lo + step
        };
        if best.as_ref().is_none_or(|b| x < *b) {
            best = Some(x);
        }
    }
    Ok(best)
}

fn check_polyhedral(pta: &Pta, v: &Valuation, mode: CheckMode, budget: ExplorationBudget) -> Result<CheckResult, OpacityError> {
    let p = pets(&substitute(pta, v)?, budget)?;
    if p.status != Status::Complete {
        return Err(OpacityError::Incomplete);
    }
    Ok(match mode {
        CheckMode::Exist => {
            let both = p.d_eos()?;
            CheckResult { mode, opaque: !both.is_empty(), duration: sample(&both)?, side: None, route: Route::Polyhedral }
        }
        CheckMode::Full => {
            let diff = p.diff()?;
            let duration = sample(&diff)?;
            let side = match &duration {
                None => None,
                Some(x) => {
                    let point = [(crate::model::DURATION.to_string(), x.clone())].into();
                    Some(if p.private.contains(&point)? { Side::PrivateOnly } else { Side::PublicOnly })
                }
            };
            CheckResult { mode, opaque: duration.is_none(), duration, side, route: Route::Polyhedral }
        }
    })
}

/// Opacity of the model at `v`: exact for one clock, otherwise through the
/// duration polyhedra of the instantiated model when their synthesis
/// completes.
pub fn check_valuation(pta: &Pta, v: &Valuation, mode: CheckMode, budget: ExplorationBudget) -> Result<CheckResult, OpacityError> {
    if pta.clocks.len() == 1 {
        return ExactAnalysis::new(pta, budget)?.check(v, mode);
    }
    check_polyhedral(pta, v, mode, budget)
}
