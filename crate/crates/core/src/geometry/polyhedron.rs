use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::row::{self, Row};
use super::{format_rational, Constraint, GeometryError, LinExpr, Rational, Rel};

/// Convex polyhedron over non-negative rational variables, kept in
/// irredundant canonical form. The empty polyhedron is the single row `1 <= 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polyhedron {
    vars: Vec<String>,
    rows: Vec<Row>,
}

fn nonneg_rows(n: usize) -> impl Iterator<Item = Row> {
    (0..n).map(move |i| {
        let mut coeffs = vec![BigInt::zero(); n];
        coeffs[i] = -BigInt::one();
        Row { coeffs, constant: Rational::zero(), rel: Rel::Le }
    })
}

fn check_distinct(vars: &[String]) -> Result<(), GeometryError> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(GeometryError::VariableMismatch(vars.join(","), format!("duplicate {v}")));
        }
    }
    Ok(())
}

impl Polyhedron {
    pub(crate) fn from_rows(vars: Vec<String>, rows: Vec<Row>) -> Self {
        let n = vars.len();
        match row::canonicalize(rows) {
            Some(rows) => Polyhedron { vars, rows },
            None => Polyhedron { vars, rows: vec![Row::falsum(n)] },
        }
    }

    /// Polyhedron over `vars` (each implicitly `>= 0`) satisfying all of
    /// `constraints`.
    pub fn new<S: AsRef<str>>(vars: &[S], constraints: &[Constraint]) -> Result<Self, GeometryError> {
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        check_distinct(&vars)?;
        let mut rows: Vec<Row> = nonneg_rows(vars.len()).collect();
        for c in constraints {
            rows.push(to_row(&vars, c)?);
        }
        Ok(Self::from_rows(vars, rows))
    }

    pub fn universe<S: AsRef<str>>(vars: &[S]) -> Self {
        Self::new(vars, &[]).expect("distinct variables")
    }

    pub fn empty<S: AsRef<str>>(vars: &[S]) -> Self {
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        let n = vars.len();
        Polyhedron { vars, rows: vec![Row::falsum(n)] }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.len() == 1 && self.rows[0].is_falsum()
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.is_empty()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// The rows as named constraints, in canonical order.
    pub fn constraints(&self) -> Vec<Constraint> {
        self.rows.iter().map(|r| self.to_constraint(r)).collect()
    }

    fn to_constraint(&self, r: &Row) -> Constraint {
        let mut expr = LinExpr::constant(r.constant.clone());
        for (v, c) in self.vars.iter().zip(&r.coeffs) {
            if !c.is_zero() {
                expr.coeffs.insert(v.clone(), Rational::from_integer(c.clone()));
            }
        }
        Constraint { expr, rel: r.rel }
    }

    fn index(&self, name: &str) -> Result<usize, GeometryError> {
        self.vars.iter().position(|v| v == name).ok_or_else(|| GeometryError::UnknownVariable(name.to_string()))
    }

    fn same_vars(&self, other: &Polyhedron) -> Result<(), GeometryError> {
        if self.vars != other.vars {
            return Err(GeometryError::VariableMismatch(self.vars.join(","), other.vars.join(",")));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron, GeometryError> {
        self.same_vars(other)?;
        if self.is_empty() {
            return Ok(self.clone());
        }
        if other.is_empty() {
            return Ok(other.clone());
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self::from_rows(self.vars.clone(), rows))
    }

    /// Intersection with extra constraints over the same variables.
    pub fn constrain(&self, constraints: &[Constraint]) -> Result<Polyhedron, GeometryError> {
        if self.is_empty() {
            return Ok(self.clone());
        }
        let mut rows = self.rows.clone();
        for c in constraints {
            rows.push(to_row(&self.vars, c)?);
        }
        Ok(Self::from_rows(self.vars.clone(), rows))
    }

    /// Lets every clock in `clocks` grow by the same amount.
    pub fn time_elapse<S: AsRef<str>>(&self, clocks: &[S]) -> Result<Polyhedron, GeometryError> {
        let idx: Vec<usize> = clocks.iter().map(|c| self.index(c.as_ref())).collect::<Result<_, _>>()?;
        if self.is_empty() || idx.is_empty() {
            return Ok(self.clone());
        }
        let n = self.vars.len();
        // x = x' - g for each clock; column n holds g
        let mut rows: Vec<Row> = self
            .rows
            .iter()
            .map(|r| {
                let mut coeffs = r.coeffs.clone();
                let shift: BigInt = idx.iter().map(|&i| &r.coeffs[i]).sum();
                coeffs.push(-shift);
                Row::normalized(coeffs, r.constant.clone(), r.rel)
            })
            .collect();
        let mut g = vec![BigInt::zero(); n + 1];
        g[n] = -BigInt::one();
        rows.push(Row { coeffs: g, constant: Rational::zero(), rel: Rel::Le });
        let rows = match row::eliminate_all(rows, &[n]) {
            Some(rows) => rows,
            None => return Ok(Self::empty(&self.vars)),
        };
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.coeffs.pop();
                r
            })
            .collect();
        Ok(Self::from_rows(self.vars.clone(), rows))
    }

    /// Image of the map setting every clock in `clocks` to zero.
    pub fn reset_clocks<S: AsRef<str>>(&self, clocks: &[S]) -> Result<Polyhedron, GeometryError> {
        let idx: Vec<usize> = clocks.iter().map(|c| self.index(c.as_ref())).collect::<Result<_, _>>()?;
        if self.is_empty() || idx.is_empty() {
            return Ok(self.clone());
        }
        let n = self.vars.len();
        let Some(mut rows) = row::eliminate_all(self.rows.clone(), &idx) else {
            return Ok(Self::empty(&self.vars));
        };
        for &i in &idx {
            let mut coeffs = vec![BigInt::zero(); n];
            coeffs[i] = BigInt::one();
            rows.push(Row { coeffs, constant: Rational::zero(), rel: Rel::Eq });
        }
        Ok(Self::from_rows(self.vars.clone(), rows))
    }

    /// Existential projection onto `keep`; the result's variables follow
    /// the order of `self`.
    pub fn project<S: AsRef<str>>(&self, keep: &[S]) -> Result<Polyhedron, GeometryError> {
        for k in keep {
            self.index(k.as_ref())?;
        }
        let kept: Vec<usize> =
            (0..self.vars.len()).filter(|&i| keep.iter().any(|k| k.as_ref() == self.vars[i])).collect();
        let vars: Vec<String> = kept.iter().map(|&i| self.vars[i].clone()).collect();
        if self.is_empty() {
            return Ok(Self::empty(&vars));
        }
        let drop: Vec<usize> = (0..self.vars.len()).filter(|i| !kept.contains(i)).collect();
        let Some(rows) = row::eliminate_all(self.rows.clone(), &drop) else {
            return Ok(Self::empty(&vars));
        };
        let rows = rows
            .into_iter()
            .map(|r| Row::normalized(kept.iter().map(|&i| r.coeffs[i].clone()).collect(), r.constant, r.rel))
            .collect();
        Ok(Self::from_rows(vars, rows))
    }

    /// Re-embeds into `vars` (a superset, any order); new variables are
    /// only constrained to be non-negative.
    pub fn extend_vars<S: AsRef<str>>(&self, vars: &[S]) -> Result<Polyhedron, GeometryError> {
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        check_distinct(&vars)?;
        for v in &self.vars {
            if !vars.contains(v) {
                return Err(GeometryError::UnknownVariable(v.clone()));
            }
        }
        if self.is_empty() {
            return Ok(Self::empty(&vars));
        }
        let pos: Vec<usize> = self.vars.iter().map(|v| vars.iter().position(|w| w == v).unwrap()).collect();
        let n = vars.len();
        let mut rows: Vec<Row> = self
            .rows
            .iter()
            .map(|r| {
                let mut coeffs = vec![BigInt::zero(); n];
                for (k, c) in r.coeffs.iter().enumerate() {
                    coeffs[pos[k]] = c.clone();
                }
                Row { coeffs, constant: r.constant.clone(), rel: r.rel }
            })
            .collect();
        rows.extend(nonneg_rows(n));
        Ok(Self::from_rows(vars, rows))
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Polyhedron) -> Result<bool, GeometryError> {
        self.same_vars(other)?;
        if other.is_empty() {
            return Ok(true);
        }
        if self.is_empty() {
            return Ok(false);
        }
        Ok(self.rows.iter().all(|r| row::implies(&other.rows, r)))
    }

    /// Semantic equality (the row lists of lower-dimensional sets are not
    /// unique).
    pub fn same_set(&self, other: &Polyhedron) -> Result<bool, GeometryError> {
        Ok(self.includes(other)? && other.includes(self)?)
    }

    /// Membership of a point; variables absent from `point` are an error.
    pub fn contains(&self, point: &BTreeMap<String, Rational>) -> Result<bool, GeometryError> {
        let mut vals = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            vals.push(point.get(v).ok_or_else(|| GeometryError::UnknownVariable(v.clone()))?);
        }
        if vals.iter().any(|x| x.is_negative()) {
            return Ok(false);
        }
        Ok(self.rows.iter().all(|r| {
            let mut acc = r.constant.clone();
            for (c, x) in r.coeffs.iter().zip(&vals) {
                if !c.is_zero() {
                    acc += Rational::from_integer(c.clone()) * *x;
                }
            }
            match r.rel {
                Rel::Lt => acc.is_negative(),
                Rel::Le => !acc.is_positive(),
                Rel::Eq => acc.is_zero(),
            }
        }))
    }

    /// Rows whose coefficient on `var` is non-zero, and the others.
    pub fn split_on(&self, var: &str) -> Result<(Vec<Constraint>, Vec<Constraint>), GeometryError> {
        let i = self.index(var)?;
        let (with, without): (Vec<&Row>, Vec<&Row>) = self.rows.iter().partition(|r| !r.coeffs[i].is_zero());
        Ok((
            with.into_iter().map(|r| self.to_constraint(r)).collect(),
            without.into_iter().map(|r| self.to_constraint(r)).collect(),
        ))
    }

    /// Renames variable `from` to `to` (which must be new).
    pub fn rename_var(&self, from: &str, to: &str) -> Result<Polyhedron, GeometryError> {
        let i = self.index(from)?;
        if self.vars.iter().any(|v| v == to) {
            return Err(GeometryError::VariableMismatch(self.vars.join(","), format!("duplicate {to}")));
        }
        let mut vars = self.vars.clone();
        vars[i] = to.to_string();
        Ok(Polyhedron { vars, rows: self.rows.clone() })
    }

    /// Same set with the variable order of `vars` (a permutation).
    pub fn reorder<S: AsRef<str>>(&self, vars: &[S]) -> Result<Polyhedron, GeometryError> {
        if vars.len() != self.vars.len() {
            return Err(GeometryError::VariableMismatch(
                self.vars.join(","),
                vars.iter().map(|v| v.as_ref()).collect::<Vec<_>>().join(","),
            ));
        }
        self.extend_vars(vars)
    }
}

pub(crate) fn to_row(vars: &[String], c: &Constraint) -> Result<Row, GeometryError> {
    let mut coeffs = vec![Rational::zero(); vars.len()];
    for (v, k) in &c.expr.coeffs {
        let i = vars.iter().position(|w| w == v).ok_or_else(|| GeometryError::UnknownVariable(v.clone()))?;
        coeffs[i] = k.clone();
    }
    Ok(Row::from_rational(&coeffs, c.expr.constant.clone(), c.rel))
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "false");
        }
        if self.rows.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self.constraints().iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" && "))
    }
}

struct JsonRow<'a> {
    vars: &'a [String],
    row: &'a Row,
}

struct JsonCoeffs<'a> {
    vars: &'a [String],
    row: &'a Row,
}

impl Serialize for JsonCoeffs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let nz: Vec<(&String, &BigInt)> =
            self.vars.iter().zip(&self.row.coeffs).filter(|(_, c)| !c.is_zero()).collect();
        let mut m = s.serialize_map(Some(nz.len()))?;
        for (v, c) in nz {
            m.serialize_entry(v, &format!("{c}/1"))?;
        }
        m.end()
    }
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Row", 3)?;
        st.serialize_field("coeffs", &JsonCoeffs { vars: self.vars, row: self.row })?;
        st.serialize_field("const", &format_rational(&self.row.constant))?;
        st.serialize_field("rel", self.row.rel.symbol())?;
        st.end()
    }
}

impl Serialize for Polyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<JsonRow> = self.rows.iter().map(|row| JsonRow { vars: &self.vars, row }).collect();
        let mut st = s.serialize_struct("Polyhedron", 1)?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}
