//! Exact convex polyhedra over non-negative rational variables, and finite
//! unions of them.
//!
//! Every variable of a [`Polyhedron`] ranges over the non-negative rationals;
//! the bounds `v >= 0` are stored as ordinary rows when a polyhedron is
//! built and may later disappear as redundant.

mod polyhedron;
mod polyset;
mod row;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use polyhedron::Polyhedron;
pub use polyset::PolySet;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("variable sets differ: [{0}] vs [{1}]")]
    VariableMismatch(String, String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Relation of a normalized row `expr REL 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `num/den` with a positive denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Human form: `3`, `-1/2`.
pub fn display_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Affine expression `Σ coeffs[v]·v + constant` over named variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(name: &str) -> Self {
        Self::term(rat(1), name)
    }

    pub fn term(coeff: Rational, name: &str) -> Self {
        let mut e = Self::zero();
        if !coeff.is_zero() {
            e.coeffs.insert(name.to_string(), coeff);
        }
        e
    }

    pub fn constant(c: Rational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    pub fn coeff(&self, name: &str) -> Rational {
        self.coeffs.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, coeff: &Rational, name: &str) {
        let c = self.coeff(name) + coeff;
        if c.is_zero() {
            self.coeffs.remove(name);
        } else {
            self.coeffs.insert(name.to_string(), c);
        }
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(c, v);
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scale(&-rat(1)))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value under `point`; variables missing from `point` count as zero.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            if let Some(x) = point.get(v) {
                acc += c * x;
            }
        }
        acc
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", display_rational(&mag))?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", display_rational(&self.constant))?;
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", display_rational(&self.constant.abs()))?;
        }
        Ok(())
    }
}

/// `expr REL 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Constraint {
    pub fn lt(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint { expr: lhs.minus(&rhs), rel: Rel::Lt }
    }
    pub fn le(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint { expr: lhs.minus(&rhs), rel: Rel::Le }
    }
    pub fn eq(lhs: LinExpr, rhs: LinExpr) -> Self {
        Constraint { expr: lhs.minus(&rhs), rel: Rel::Eq }
    }
    pub fn ge(lhs: LinExpr, rhs: LinExpr) -> Self {
        Self::le(rhs, lhs)
    }
    pub fn gt(lhs: LinExpr, rhs: LinExpr) -> Self {
        Self::lt(rhs, lhs)
    }

    pub fn holds(&self, point: &BTreeMap<String, Rational>) -> bool {
        let v = self.expr.eval(point);
        match self.rel {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
        }
    }
}

impl fmt::Display for Constraint {
    /// Positive terms on the left, negated negative terms on the right.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut left = LinExpr::zero();
        let mut right = LinExpr::zero();
        for (v, c) in &self.expr.coeffs {
            if c.is_positive() {
                left.add_term(c, v);
            } else {
                right.add_term(&-c, v);
            }
        }
        let k = &self.expr.constant;
        if k.is_positive() {
            left.constant = k.clone();
        } else {
            right.constant = -k;
        }
        write!(f, "{left} {} {right}", self.rel.symbol())
    }
}
