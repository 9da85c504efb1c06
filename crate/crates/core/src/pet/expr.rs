use std::fmt;

use crate::arith::PeriodicSet;
use crate::geometry::{Constraint, LinExpr, PolySet, Polyhedron};
use crate::model::{Valuation, DURATION};

use super::PetError;

/// Regular expression over parametric zones (sets over P ∪ {d}).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZoneExpr {
    Atom(PolySet),
    /// The neutral element `{d = 0}`.
    One,
    Concat(Box<ZoneExpr>, Box<ZoneExpr>),
    Union(Box<ZoneExpr>, Box<ZoneExpr>),
    Star(Box<ZoneExpr>),
}

impl ZoneExpr {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZoneExpr::Atom(s) if s.is_empty())
    }

    pub fn concat(a: ZoneExpr, b: ZoneExpr) -> ZoneExpr {
        match (a, b) {
            (a, _) if a.is_zero() => a,
            (_, b) if b.is_zero() => b,
            (ZoneExpr::One, b) => b,
            (a, ZoneExpr::One) => a,
            (a, b) => ZoneExpr::Concat(Box::new(a), Box::new(b)),
        }
    }

    pub fn union(a: ZoneExpr, b: ZoneExpr) -> ZoneExpr {
        match (a, b) {
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) if a == b => a,
            (a, b) => ZoneExpr::Union(Box::new(a), Box::new(b)),
        }
    }

    pub fn star(a: ZoneExpr) -> ZoneExpr {
        match a {
            a if a.is_zero() => ZoneExpr::One,
            ZoneExpr::One => ZoneExpr::One,
            s @ ZoneExpr::Star(_) => s,
            a => ZoneExpr::Star(Box::new(a)),
        }
    }

    /// Duration set at `v` computed on the tree itself, without normal form.
    pub fn evaluate_at(&self, params: &[String], v: &Valuation) -> Result<PeriodicSet, PetError> {
        Ok(match self {
            ZoneExpr::One => PeriodicSet::singleton(0),
            ZoneExpr::Atom(s) => {
                let mut acc = PeriodicSet::empty();
                for p in s.disjuncts() {
                    if let Some(iv) = d_interval(p, params, v)? {
                        acc = acc.union(&iv.points());
                    }
                }
                acc
            }
            ZoneExpr::Concat(a, b) => a.evaluate_at(params, v)?.sum(&b.evaluate_at(params, v)?),
            ZoneExpr::Union(a, b) => a.evaluate_at(params, v)?.union(&b.evaluate_at(params, v)?),
            ZoneExpr::Star(a) => a.evaluate_at(params, v)?.star(),
        })
    }

    /// Parenthesized text form; atoms are JSON, `{d = 0}` for the neutral
    /// element.
    pub fn emit(&self, vars: &[String]) -> String {
        match self {
            ZoneExpr::Atom(s) => serde_json::to_string(s).expect("serializable"),
            ZoneExpr::One => serde_json::to_string(&PolySet::from_polyhedron(d_zero(vars))).expect("serializable"),
            ZoneExpr::Concat(a, b) => format!("({} . {})", a.emit(vars), b.emit(vars)),
            ZoneExpr::Union(a, b) => format!("({} + {})", a.emit(vars), b.emit(vars)),
            ZoneExpr::Star(a) => format!("({})*", a.emit(vars)),
        }
    }
}

impl fmt::Display for ZoneExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneExpr::Atom(s) => write!(f, "[{s}]"),
            ZoneExpr::One => write!(f, "[d = 0]"),
            ZoneExpr::Concat(a, b) => write!(f, "({a} . {b})"),
            ZoneExpr::Union(a, b) => write!(f, "({a} + {b})"),
            ZoneExpr::Star(a) => write!(f, "({a})*"),
        }
    }
}

pub fn d_zero(vars: &[String]) -> Polyhedron {
    Polyhedron::new(vars, &[Constraint::eq(LinExpr::var(DURATION), LinExpr::int(0))]).expect("d is a variable")
}

const D1: &str = "d#1";
const D2: &str = "d#2";

/// Sum of durations under common parameter values: the set of `(v, d1 + d2)`
/// with `(v, d1) ∈ a` and `(v, d2) ∈ b`, computed by exact projection.
pub fn bar_concat_poly(a: &Polyhedron, b: &Polyhedron) -> Result<Polyhedron, PetError> {
    let vars: Vec<String> = a.vars().to_vec();
    if !vars.iter().any(|v| v == DURATION) {
        return Err(PetError::NoDuration);
    }
    let mut wide = vars.clone();
    wide.push(D1.into());
    wide.push(D2.into());
    let x = a.rename_var(DURATION, D1)?.extend_vars(&wide)?;
    let y = b.rename_var(DURATION, D2)?.extend_vars(&wide)?;
    let sum = Constraint::eq(LinExpr::var(DURATION), LinExpr::var(D1).plus(&LinExpr::var(D2)));
    Ok(x.intersect(&y)?.constrain(&[sum])?.project(&vars)?)
}

pub fn bar_concat(a: &PolySet, b: &PolySet) -> Result<PolySet, PetError> {
    let mut out = Vec::new();
    for x in a.disjuncts() {
        for y in b.disjuncts() {
            out.push(bar_concat_poly(x, y)?);
        }
    }
    Ok(PolySet::new(a.vars(), out)?)
}

pub fn bar_union(a: &PolySet, b: &PolySet) -> Result<PolySet, PetError> {
    Ok(a.union(b)?)
}

/// Bounds of `d` once the parameters are fixed: `(lower, lower strict,
/// upper, upper strict)`, `None` for no upper bound.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DInterval {
    pub lo: crate::geometry::Rational,
    pub lo_strict: bool,
    pub hi: Option<crate::geometry::Rational>,
    pub hi_strict: bool,
}

impl DInterval {
    pub fn is_strict(&self) -> bool {
        self.lo_strict || self.hi_strict
    }

    pub fn integral(&self) -> bool {
        self.lo.is_integer() && self.hi.as_ref().is_none_or(|h| h.is_integer())
    }

    /// Integer lower and upper ends (`None` upper for unbounded), or `None`
    /// when no integer lies inside.
    pub fn integer_ends(&self) -> Option<(u64, Option<u64>)> {
        use num_traits::ToPrimitive;
        let lo = if self.lo_strict { self.lo.floor() + crate::geometry::rat(1) } else { self.lo.ceil() };
        let lo = lo.to_integer().to_i64()?.max(0) as u64;
        match &self.hi {
            None => Some((lo, None)),
            Some(h) => {
                let hi = if self.hi_strict { h.ceil() - crate::geometry::rat(1) } else { h.floor() };
                let hi = hi.to_integer().to_i64()?;
                if hi < lo as i64 {
                    None
                } else {
                    Some((lo, Some(hi as u64)))
                }
            }
        }
    }

    pub fn points(&self) -> PeriodicSet {
        match self.integer_ends() {
            None => PeriodicSet::empty(),
            Some((lo, None)) => PeriodicSet::from(lo),
            Some((lo, Some(hi))) => PeriodicSet::interval(lo, hi),
        }
    }
}

/// Interval of `d` in `p` at the parameter values `v`; `None` when the
/// parameter rows fail or the interval is empty.
pub(crate) fn d_interval(p: &Polyhedron, params: &[String], v: &Valuation) -> Result<Option<DInterval>, PetError> {
    use crate::geometry::{rat, Rational, Rel};
    use num_traits::{Signed, Zero};
    if p.is_empty() {
        return Ok(None);
    }
    let mut lo = Rational::zero();
    let mut lo_strict = false;
    let mut hi: Option<Rational> = None;
    let mut hi_strict = false;
    for c in p.constraints() {
        let mut rest = c.expr.constant.clone();
        let mut k = Rational::zero();
        for (var, a) in &c.expr.coeffs {
            if var == DURATION {
                k = a.clone();
            } else if params.contains(var) {
                let val = v.get(var).ok_or_else(|| PetError::MissingParameter(var.clone()))?;
                rest += a * rat(*val as i64);
            } else {
                return Err(PetError::UnexpectedVariable(var.clone()));
            }
        }
        if k.is_zero() {
            let ok = match c.rel {
                Rel::Lt => rest.is_negative(),
                Rel::Le => !rest.is_positive(),
                Rel::Eq => rest.is_zero(),
            };
            if !ok {
                return Ok(None);
            }
            continue;
        }
        // k·d + rest REL 0
        let bound = -rest / &k;
        let upper = k.is_positive();
        let strict = c.rel == Rel::Lt;
        let mut tighten_hi = |b: Rational, s: bool| match &hi {
            Some(h) if *h < b || (*h == b && (hi_strict || !s)) => {}
            _ => {
                hi = Some(b);
                hi_strict = s;
            }
        };
        match c.rel {
            Rel::Eq => {
                tighten_hi(bound.clone(), false);
                if bound > lo || (bound == lo && !lo_strict) {
                    lo = bound;
                    lo_strict = false;
                }
            }
            _ if upper => tighten_hi(bound, strict),
            _ => {
                if bound > lo || (bound == lo && strict) {
                    lo = bound;
                    lo_strict = strict;
                }
            }
        }
    }
    if let Some(h) = &hi {
        if *h < lo || (*h == lo && (lo_strict || hi_strict)) {
            return Ok(None);
        }
    }
    Ok(Some(DInterval { lo, lo_strict, hi, hi_strict }))
}
