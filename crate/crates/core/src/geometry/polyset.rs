use std::fmt;

use serde::{Serialize, Serializer};

use super::row::Row;
use super::{Constraint, GeometryError, Polyhedron};

/// Finite union of polyhedra over a common variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySet {
    vars: Vec<String>,
    disjuncts: Vec<Polyhedron>,
}

impl PolySet {
    pub fn empty<S: AsRef<str>>(vars: &[S]) -> Self {
        PolySet { vars: vars.iter().map(|s| s.as_ref().to_string()).collect(), disjuncts: Vec::new() }
    }

    pub fn from_polyhedron(p: Polyhedron) -> Self {
        let vars = p.vars().to_vec();
        Self::from_disjuncts(vars, vec![p])
    }

    pub fn new<S: AsRef<str>>(vars: &[S], disjuncts: Vec<Polyhedron>) -> Result<Self, GeometryError> {
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        for d in &disjuncts {
            if d.vars() != vars.as_slice() {
                return Err(GeometryError::VariableMismatch(vars.join(","), d.vars().join(",")));
            }
        }
        Ok(Self::from_disjuncts(vars, disjuncts))
    }

    /// Drops empty and subsumed disjuncts and sorts the rest.
    fn from_disjuncts(vars: Vec<String>, disjuncts: Vec<Polyhedron>) -> Self {
        let mut ds: Vec<Polyhedron> = disjuncts.into_iter().filter(|d| !d.is_empty()).collect();
        ds.sort_by(|a, b| a.rows().cmp(b.rows()));
        ds.dedup();
        let mut keep: Vec<Polyhedron> = Vec::with_capacity(ds.len());
        for (i, d) in ds.iter().enumerate() {
            let subsumed = ds.iter().enumerate().any(|(j, e)| {
                j != i && e.includes(d).unwrap_or(false) && (j < i || !d.includes(e).unwrap_or(false))
            });
            if !subsumed {
                keep.push(d.clone());
            }
        }
        PolySet { vars, disjuncts: keep }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    fn same_vars(&self, other: &PolySet) -> Result<(), GeometryError> {
        if self.vars != other.vars {
            return Err(GeometryError::VariableMismatch(self.vars.join(","), other.vars.join(",")));
        }
        Ok(())
    }

    pub fn union(&self, other: &PolySet) -> Result<PolySet, GeometryError> {
        self.same_vars(other)?;
        let mut ds = self.disjuncts.clone();
        ds.extend(other.disjuncts.iter().cloned());
        Ok(Self::from_disjuncts(self.vars.clone(), ds))
    }

    pub fn intersect(&self, other: &PolySet) -> Result<PolySet, GeometryError> {
        self.same_vars(other)?;
        let mut ds = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                ds.push(a.intersect(b)?);
            }
        }
        Ok(Self::from_disjuncts(self.vars.clone(), ds))
    }

    /// Intersects every disjunct with a polyhedron.
    pub fn intersect_polyhedron(&self, p: &Polyhedron) -> Result<PolySet, GeometryError> {
        self.intersect(&PolySet::from_polyhedron(p.clone()))
    }

    pub fn constrain(&self, constraints: &[Constraint]) -> Result<PolySet, GeometryError> {
        let ds = self.disjuncts.iter().map(|d| d.constrain(constraints)).collect::<Result<_, _>>()?;
        Ok(Self::from_disjuncts(self.vars.clone(), ds))
    }

    /// `self \ other`, each piece split along the rows of the subtracted
    /// disjunct.
    pub fn difference(&self, other: &PolySet) -> Result<PolySet, GeometryError> {
        self.same_vars(other)?;
        let mut out = Vec::new();
        for a in &self.disjuncts {
            let mut pieces = vec![a.clone()];
            for b in &other.disjuncts {
                let mut next = Vec::new();
                for x in pieces {
                    next.extend(subtract(&x, b)?);
                }
                pieces = next;
                if pieces.is_empty() {
                    break;
                }
            }
            out.extend(pieces);
        }
        Ok(Self::from_disjuncts(self.vars.clone(), out))
    }

    pub fn project<S: AsRef<str>>(&self, keep: &[S]) -> Result<PolySet, GeometryError> {
        let ds: Vec<Polyhedron> = self.disjuncts.iter().map(|d| d.project(keep)).collect::<Result<_, _>>()?;
        let vars: Vec<String> =
            self.vars.iter().filter(|v| keep.iter().any(|k| k.as_ref() == v.as_str())).cloned().collect();
        Ok(Self::from_disjuncts(vars, ds))
    }

    pub fn extend_vars<S: AsRef<str>>(&self, vars: &[S]) -> Result<PolySet, GeometryError> {
        let ds: Vec<Polyhedron> = self.disjuncts.iter().map(|d| d.extend_vars(vars)).collect::<Result<_, _>>()?;
        Ok(Self::from_disjuncts(vars.iter().map(|s| s.as_ref().to_string()).collect(), ds))
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &PolySet) -> Result<bool, GeometryError> {
        Ok(other.difference(self)?.is_empty())
    }

    /// Order-insensitive semantic equality.
    pub fn equal(&self, other: &PolySet) -> Result<bool, GeometryError> {
        Ok(self.includes(other)? && other.includes(self)?)
    }

    pub fn contains(&self, point: &std::collections::BTreeMap<String, super::Rational>) -> Result<bool, GeometryError> {
        for d in &self.disjuncts {
            if d.contains(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// `x \ b` as pairwise disjoint pieces: x ∧ ¬r1, x ∧ r1 ∧ ¬r2, ...
fn subtract(x: &Polyhedron, b: &Polyhedron) -> Result<Vec<Polyhedron>, GeometryError> {
    if x.intersect(b)?.is_empty() {
        return Ok(vec![x.clone()]);
    }
    if b.includes(x)? {
        return Ok(Vec::new());
    }
    let vars = x.vars().to_vec();
    let mut out = Vec::new();
    let mut prefix: Vec<Row> = x.rows().to_vec();
    for r in b.rows() {
        let negs: Vec<Row> = match r.negated() {
            Some(n) => vec![n],
            None => r.eq_complement().to_vec(),
        };
        for n in negs {
            let mut rows = prefix.clone();
            rows.push(n);
            let p = Polyhedron::from_rows(vars.clone(), rows);
            if !p.is_empty() {
                out.push(p);
            }
        }
        prefix.push(r.clone());
    }
    Ok(out)
}

impl fmt::Display for PolySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return write!(f, "false");
        }
        let parts: Vec<String> = self
            .disjuncts
            .iter()
            .map(|d| if self.disjuncts.len() > 1 { format!("({d})") } else { d.to_string() })
            .collect();
        write!(f, "{}", parts.join(" || "))
    }
}

impl Serialize for PolySet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.disjuncts.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LinExpr as E;

    fn d_le(k: i64) -> Polyhedron {
        Polyhedron::new(&["d"], &[Constraint::le(E::var("d"), E::int(k))]).unwrap()
    }

    #[test]
    fn difference_examples() {
        let a = PolySet::from_polyhedron(d_le(3));
        assert!(a.difference(&a).unwrap().is_empty());
        let none = PolySet::empty(&["d"]);
        assert!(a.difference(&none).unwrap().equal(&a).unwrap());
    }

    #[test]
    fn equality_examples() {
        let a = PolySet::from_polyhedron(d_le(3));
        let lt = Polyhedron::new(&["d"], &[Constraint::lt(E::var("d"), E::int(3))]).unwrap();
        let eq = Polyhedron::new(&["d"], &[Constraint::eq(E::var("d"), E::int(3))]).unwrap();
        let b = PolySet::new(&["d"], vec![lt, eq]).unwrap();
        assert!(a.equal(&b).unwrap());
        let zero = Polyhedron::new(&["d"], &[Constraint::eq(E::var("d"), E::int(0))]).unwrap();
        assert!(!PolySet::empty(&["d"]).equal(&PolySet::from_polyhedron(zero)).unwrap());

        let x = Polyhedron::new(&["d"], &[Constraint::ge(E::var("d"), E::int(5))]).unwrap();
        let u1 = PolySet::new(&["d"], vec![d_le(1), x.clone()]).unwrap();
        let u2 = PolySet::new(&["d"], vec![x, d_le(1)]).unwrap();
        assert!(u1.equal(&u2).unwrap());
        assert_eq!(u1, u2);
    }

    #[test]
    fn union_absorbs_duplicates() {
        let a = PolySet::from_polyhedron(d_le(3));
        assert_eq!(a.union(&a).unwrap(), a);
        assert_eq!(PolySet::empty(&["d"]).union(&a).unwrap(), a);
    }
}
