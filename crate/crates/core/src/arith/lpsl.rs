use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::geometry::{rat, Polyhedron, Rational, Rel};
use crate::model::{Valuation, DURATION};
use crate::pet::{evaluate_at, NormalTerm};

use super::{interval_star, interval_star_unbounded, ArithError, PeriodicSet};

/// `slope·p + offset` over the shifted parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Affine {
    pub slope: u64,
    pub offset: u64,
}

impl Affine {
    pub fn at(&self, p: u64) -> u64 {
        self.slope * p + self.offset
    }
}

/// Interval `[lower, upper]`; no upper bound means unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpSlInterval {
    pub lower: Affine,
    pub upper: Option<Affine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpSlTerm {
    pub base: LpSlInterval,
    pub loops: Vec<LpSlInterval>,
}

/// Linear parametric semilinear set over one parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpSlSet {
    pub param: String,
    pub terms: Vec<LpSlTerm>,
}

impl LpSlSet {
    /// Durations at shifted parameter value `p`.
    pub fn evaluate(&self, p: u64) -> PeriodicSet {
        let mut acc = PeriodicSet::empty();
        for t in &self.terms {
            let lo = t.base.lower.at(p);
            let mut s = match t.base.upper {
                Some(u) if u.at(p) < lo => continue,
                Some(u) => PeriodicSet::interval(lo, u.at(p)),
                None => PeriodicSet::from(lo),
            };
            for l in &t.loops {
                let b = l.lower.at(p);
                s = s.sum(&match l.upper {
                    Some(u) => interval_star(b, u.at(p)),
                    None => interval_star_unbounded(b),
                });
            }
            acc = acc.union(&s);
        }
        acc
    }
}

/// `set` describes parameter values `threshold + p'`; values below the
/// threshold are listed with their concrete duration sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LpSlResult {
    pub set: LpSlSet,
    pub threshold: u64,
    pub low_valuations: Vec<(u64, PeriodicSet)>,
}

impl LpSlResult {
    pub fn evaluate(&self, p: u64) -> PeriodicSet {
        if p < self.threshold {
            return self.low_valuations[p as usize].1.clone();
        }
        self.set.evaluate(p - self.threshold)
    }
}

/// Rational affine function of the parameter.
#[derive(Debug, Clone, PartialEq)]
struct Line {
    slope: Rational,
    offset: Rational,
}

impl Line {
    fn at(&self, p: &Rational) -> Rational {
        &self.slope * p + &self.offset
    }
}

fn nat(r: &Rational) -> u64 {
    if r.is_negative() {
        0
    } else {
        r.to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

fn ceil(r: &Rational) -> u64 {
    nat(&r.ceil())
}

fn floor_plus_one(r: &Rational) -> u64 {
    if r.is_negative() {
        0
    } else {
        nat(&r.floor()) + 1
    }
}

fn crossing(a: &Line, b: &Line) -> Option<Rational> {
    (a.slope != b.slope).then(|| (&b.offset - &a.offset) / (&a.slope - &b.slope))
}

struct Bounds {
    lowers: Vec<Line>,
    uppers: Vec<Line>,
}

fn d_bounds(p: &Polyhedron, param: &str) -> Result<Bounds, ArithError> {
    let mut b = Bounds { lowers: vec![Line { slope: rat(0), offset: rat(0) }], uppers: Vec::new() };
    for c in p.constraints() {
        if c.rel == Rel::Lt {
            return Err(ArithError::StrictRow(c.to_string()));
        }
        let k = c.expr.coeff(DURATION);
        if k.is_zero() {
            continue;
        }
        if c.expr.coeffs.keys().any(|v| v != DURATION && v != param) {
            return Err(ArithError::Shape(c.to_string()));
        }
        // k·d + a·p + c ⋈ 0
        let line = Line { slope: -c.expr.coeff(param) / &k, offset: -&c.expr.constant / &k };
        if c.rel == Rel::Eq || k.is_negative() {
            b.lowers.push(line.clone());
        }
        if c.rel == Rel::Eq || k.is_positive() {
            b.uppers.push(line);
        }
    }
    Ok(b)
}

/// Least value from which every row of `p` (over the parameter only) has a
/// constant truth value, and that value.
fn param_rows(p: &Polyhedron, param: &str) -> (u64, bool) {
    let mut m = 0;
    let mut keep = !p.is_empty();
    for c in p.constraints() {
        let a = c.expr.coeff(param);
        if a.is_zero() {
            continue;
        }
        let t = -&c.expr.constant / &a;
        // p ≥ t (or >) eventually holds; p ≤ t, p < t and p = t eventually fail
        let (from, holds) = match (c.rel, a.is_negative()) {
            (Rel::Le, true) => (ceil(&t), true),
            (Rel::Lt, true) => (floor_plus_one(&t), true),
            (Rel::Lt, false) => (ceil(&t), false),
            _ => (floor_plus_one(&t), false),
        };
        m = m.max(from);
        keep &= holds;
    }
    (m, keep)
}

/// Least value from which the dominant bounds and the emptiness of the
/// interval no longer change.
fn bounds_threshold(b: &Bounds) -> u64 {
    let mut m = 0;
    for group in [&b.lowers, &b.uppers] {
        for (i, x) in group.iter().enumerate() {
            for y in &group[i + 1..] {
                if let Some(t) = crossing(x, y) {
                    m = m.max(ceil(&t));
                }
            }
        }
    }
    for lo in &b.lowers {
        for up in &b.uppers {
            if let Some(t) = crossing(lo, up) {
                // non-empty from t on if the upper bound grows faster
                m = m.max(if up.slope > lo.slope { ceil(&t) } else { floor_plus_one(&t) });
            }
        }
    }
    m
}

fn shifted(l: &Line, m: u64, what: &str) -> Result<Affine, ArithError> {
    let offset = l.at(&rat(m as i64));
    let ok = |r: &Rational| r.is_integer() && !r.is_negative();
    if !ok(&l.slope) || !ok(&offset) {
        return Err(ArithError::NonNatural(format!("{what}: {}·p + {}", l.slope, offset)));
    }
    Ok(Affine { slope: nat(&l.slope), offset: nat(&offset) })
}

/// Interval of the dominant bounds at `p ≥ m`, or `None` when empty there.
fn resolve(b: &Bounds, m: u64, what: &str) -> Result<Option<LpSlInterval>, ArithError> {
    let at = rat(m as i64);
    // ties at m are broken by the slope, which decides beyond m
    let key = |l: &&Line| (l.at(&at), l.slope.clone());
    let lo = b.lowers.iter().max_by_key(key).expect("d >= 0 row");
    let up = b.uppers.iter().min_by_key(key);
    if up.is_some_and(|u| u.at(&at) < lo.at(&at)) {
        return Ok(None);
    }
    Ok(Some(LpSlInterval {
        lower: shifted(lo, m, what)?,
        upper: up.map(|u| shifted(u, m, what)).transpose()?,
    }))
}

/// LpSl form of single-parameter normal terms: a threshold `M` past which
/// every parameter row has a fixed truth value and every duration bound is
/// one affine function, the terms over `p - M`, and the concrete sets of
/// the valuations below `M`.
pub fn to_lpsl(terms: &[NormalTerm], param: &str) -> Result<LpSlResult, ArithError> {
    let mut m = 0;
    let mut parts = Vec::new();
    for t in terms {
        let vars = t.params_constraint.vars();
        if vars.len() != 1 || vars[0] != param {
            return Err(ArithError::ParamCount(vars.len()));
        }
        let (pm, keep) = param_rows(&t.params_constraint, param);
        m = m.max(pm);
        let base = d_bounds(&t.base, param)?;
        let loops = t.loops.iter().map(|l| d_bounds(l, param)).collect::<Result<Vec<_>, _>>()?;
        m = m.max(bounds_threshold(&base));
        for l in &loops {
            m = m.max(bounds_threshold(l));
        }
        parts.push((keep, base, loops));
    }
    let mut out = Vec::new();
    for (i, (keep, base, loops)) in parts.iter().enumerate() {
        if !keep {
            continue;
        }
        let Some(base) = resolve(base, m, &format!("term {i} base"))? else { continue };
        let mut ls = Vec::new();
        for (j, l) in loops.iter().enumerate() {
            if let Some(iv) = resolve(l, m, &format!("term {i} loop {j}"))? {
                ls.push(iv);
            }
        }
        out.push(LpSlTerm { base, loops: ls });
    }
    let low_valuations = (0..m)
        .map(|p| {
            let v: Valuation = [(param.to_string(), p)].into();
            Ok((p, evaluate_at(terms, &v)?))
        })
        .collect::<Result<_, ArithError>>()?;
    Ok(LpSlResult { set: LpSlSet { param: param.to_string(), terms: out }, threshold: m, low_valuations })
}
