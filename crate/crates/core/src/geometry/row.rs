//! Dense rows `coeffs·x + constant REL 0` and Fourier–Motzkin elimination.
//!
//! A row is stored with a primitive integer coefficient vector (gcd 1) and a
//! rational constant, so two rows describe the same half-space iff they are
//! equal. Equalities additionally have a positive leading coefficient.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Rational, Rel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Row {
    pub coeffs: Vec<BigInt>,
    pub constant: Rational,
    pub rel: Rel,
}

impl Row {
    /// Normalizes arbitrary rational input.
    pub fn from_rational(coeffs: &[Rational], constant: Rational, rel: Rel) -> Row {
        let mut lcm = BigInt::one();
        for c in coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let ints: Vec<BigInt> = coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        Row::normalized(ints, constant * Rational::from_integer(lcm), rel)
    }

    /// Divides by the gcd of the coefficients and fixes the sign of equalities.
    pub fn normalized(mut coeffs: Vec<BigInt>, mut constant: Rational, rel: Rel) -> Row {
        let mut g = BigInt::zero();
        for c in &coeffs {
            g = g.gcd(c);
        }
        if g.is_zero() {
            // trivial row: keep only the sign of the constant
            let constant = Rational::from_integer(constant.numer().signum() * constant.denom().signum());
            return Row { coeffs, constant, rel };
        }
        if !g.is_one() {
            for c in coeffs.iter_mut() {
                *c /= &g;
            }
            constant /= Rational::from_integer(g);
        }
        if rel == Rel::Eq && coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
            for c in coeffs.iter_mut() {
                *c = -&*c;
            }
            constant = -constant;
        }
        Row { coeffs, constant, rel }
    }

    pub fn falsum(n: usize) -> Row {
        Row { coeffs: vec![BigInt::zero(); n], constant: Rational::one(), rel: Rel::Le }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Truth value of a trivial row.
    pub fn trivially_holds(&self) -> bool {
        match self.rel {
            Rel::Lt => self.constant.is_negative(),
            Rel::Le => !self.constant.is_positive(),
            Rel::Eq => self.constant.is_zero(),
        }
    }

    pub fn is_falsum(&self) -> bool {
        self.is_trivial() && !self.trivially_holds()
    }

    /// `a·self + b·other` with `a, b` such that the result stays a valid
    /// consequence (non-negative multipliers for inequalities).
    pub fn combine(a: &BigInt, r1: &Row, b: &BigInt, r2: &Row, rel: Rel) -> Row {
        let coeffs = r1.coeffs.iter().zip(&r2.coeffs).map(|(x, y)| a * x + b * y).collect();
        let constant = Rational::from_integer(a.clone()) * &r1.constant
            + Rational::from_integer(b.clone()) * &r2.constant;
        Row::normalized(coeffs, constant, rel)
    }

    /// The complement of an inequality row (`None` for equalities).
    pub fn negated(&self) -> Option<Row> {
        let coeffs: Vec<BigInt> = self.coeffs.iter().map(|c| -c).collect();
        let constant = -&self.constant;
        match self.rel {
            Rel::Le => Some(Row::normalized(coeffs, constant, Rel::Lt)),
            Rel::Lt => Some(Row::normalized(coeffs, constant, Rel::Le)),
            Rel::Eq => None,
        }
    }

    /// The two open half-spaces whose union is the complement of an equality.
    pub fn eq_complement(&self) -> [Row; 2] {
        let lt = Row { coeffs: self.coeffs.clone(), constant: self.constant.clone(), rel: Rel::Lt };
        let gt = Row::normalized(self.coeffs.iter().map(|c| -c).collect(), -&self.constant, Rel::Lt);
        [lt, gt]
    }

    pub fn with_rel(&self, rel: Rel) -> Row {
        Row::normalized(self.coeffs.clone(), self.constant.clone(), rel)
    }
}

#[derive(Default)]
struct Bounds {
    lower: Option<(Rational, bool)>,
    upper: Option<(Rational, bool)>,
    eq: Option<Rational>,
}

/// Merges parallel rows and drops trivial ones. `None` means the rows are
/// contradictory.
pub(crate) fn simplify(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut groups: BTreeMap<Vec<BigInt>, Bounds> = BTreeMap::new();
    for r in rows {
        if r.is_trivial() {
            if r.trivially_holds() {
                continue;
            }
            return None;
        }
        let positive = r.coeffs.iter().find(|c| !c.is_zero()).unwrap().is_positive();
        let key: Vec<BigInt> = if positive { r.coeffs } else { r.coeffs.iter().map(|c| -c).collect() };
        let g = groups.entry(key).or_default();
        let strict = r.rel == Rel::Lt;
        if positive {
            // e + c REL 0  <=>  e REL -c
            let v = -r.constant;
            match r.rel {
                Rel::Eq => {
                    if g.eq.as_ref().is_some_and(|e| *e != v) {
                        return None;
                    }
                    g.eq = Some(v);
                }
                _ => tighten_upper(&mut g.upper, v, strict),
            }
        } else {
            // -e + c REL 0  <=>  e REL' c
            tighten_lower(&mut g.lower, r.constant, strict);
        }
    }
    let mut out = Vec::new();
    for (key, b) in groups {
        let neg: Vec<BigInt> = key.iter().map(|c| -c).collect();
        if let Some(e) = b.eq {
            if let Some((l, s)) = &b.lower {
                if e < *l || (e == *l && *s) {
                    return None;
                }
            }
            if let Some((u, s)) = &b.upper {
                if e > *u || (e == *u && *s) {
                    return None;
                }
            }
            out.push(Row { coeffs: key, constant: -e, rel: Rel::Eq });
            continue;
        }
        if let (Some((l, ls)), Some((u, us))) = (&b.lower, &b.upper) {
            if l > u || (l == u && (*ls || *us)) {
                return None;
            }
            if l == u {
                out.push(Row { coeffs: key, constant: -l.clone(), rel: Rel::Eq });
                continue;
            }
        }
        if let Some((l, s)) = b.lower {
            out.push(Row { coeffs: neg, constant: l, rel: if s { Rel::Lt } else { Rel::Le } });
        }
        if let Some((u, s)) = b.upper {
            out.push(Row { coeffs: key, constant: -u, rel: if s { Rel::Lt } else { Rel::Le } });
        }
    }
    out.sort();
    Some(out)
}

fn tighten_upper(slot: &mut Option<(Rational, bool)>, v: Rational, strict: bool) {
    match slot {
        Some((u, s)) if *u < v || (*u == v && *s) => {}
        _ => *slot = Some((v, strict)),
    }
}

fn tighten_lower(slot: &mut Option<(Rational, bool)>, v: Rational, strict: bool) {
    match slot {
        Some((l, s)) if *l > v || (*l == v && *s) => {}
        _ => *slot = Some((v, strict)),
    }
}

/// Eliminates column `j` from already simplified rows.
pub(crate) fn eliminate(rows: Vec<Row>, j: usize) -> Option<Vec<Row>> {
    let pivot = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rel == Rel::Eq && !r.coeffs[j].is_zero())
        .min_by_key(|(_, r)| r.coeffs.iter().filter(|c| !c.is_zero()).count())
        .map(|(i, _)| i);
    let mut out = Vec::with_capacity(rows.len());
    if let Some(pi) = pivot {
        let e = &rows[pi];
        let ae = &e.coeffs[j];
        let abs_ae = ae.abs();
        let sgn = ae.signum();
        for (i, r) in rows.iter().enumerate() {
            if i == pi {
                continue;
            }
            let ar = &r.coeffs[j];
            if ar.is_zero() {
                out.push(r.clone());
            } else {
                out.push(Row::combine(&abs_ae, r, &(-(ar * &sgn)), e, r.rel));
            }
        }
        return simplify(out);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for r in rows {
        let a = &r.coeffs[j];
        if a.is_zero() {
            out.push(r);
        } else if a.is_positive() {
            pos.push(r);
        } else {
            neg.push(r);
        }
    }
    for p in &pos {
        for n in &neg {
            let rel = if p.rel == Rel::Lt || n.rel == Rel::Lt { Rel::Lt } else { Rel::Le };
            let ap = p.coeffs[j].clone();
            let an = -&n.coeffs[j];
            out.push(Row::combine(&an, p, &ap, n, rel));
        }
    }
    simplify(out)
}

/// Picks the column whose elimination creates the fewest rows.
fn cheapest_column(rows: &[Row], cols: &[usize]) -> Option<usize> {
    cols.iter()
        .copied()
        .filter(|&j| rows.iter().any(|r| !r.coeffs[j].is_zero()))
        .min_by_key(|&j| {
            if rows.iter().any(|r| r.rel == Rel::Eq && !r.coeffs[j].is_zero()) {
                return (0usize, j);
            }
            let p = rows.iter().filter(|r| r.coeffs[j].is_positive()).count();
            let n = rows.iter().filter(|r| r.coeffs[j].is_negative()).count();
            (1 + p * n, j)
        })
}

/// Eliminates the given columns (their coefficients become zero).
pub(crate) fn eliminate_all(rows: Vec<Row>, cols: &[usize]) -> Option<Vec<Row>> {
    let mut rows = simplify(rows)?;
    let mut remaining: Vec<usize> = cols.to_vec();
    while let Some(j) = cheapest_column(&rows, &remaining) {
        rows = eliminate(rows, j)?;
        remaining.retain(|&c| c != j);
    }
    Some(rows)
}

pub(crate) fn satisfiable(rows: &[Row]) -> bool {
    let Some(first) = rows.first() else { return true };
    let n = first.coeffs.len();
    let cols: Vec<usize> = (0..n).collect();
    eliminate_all(rows.to_vec(), &cols).is_some()
}

/// Whether `rows` entails `r`.
pub(crate) fn implies(rows: &[Row], r: &Row) -> bool {
    let mut test = rows.to_vec();
    match r.negated() {
        Some(neg) => {
            test.push(neg);
            !satisfiable(&test)
        }
        None => {
            let [a, b] = r.eq_complement();
            test.push(a);
            if satisfiable(&test) {
                return false;
            }
            test.pop();
            test.push(b);
            !satisfiable(&test)
        }
    }
}

/// Irredundant form: satisfiability, implicit equalities, then removal of
/// every row implied by the others. Returns `None` when empty.
pub(crate) fn canonicalize(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut rows = simplify(rows)?;
    if !satisfiable(&rows) {
        return None;
    }
    let mut changed = false;
    for i in 0..rows.len() {
        if rows[i].rel != Rel::Le {
            continue;
        }
        let saved = rows[i].clone();
        rows[i] = saved.with_rel(Rel::Lt);
        if satisfiable(&rows) {
            rows[i] = saved;
        } else {
            rows[i] = saved.with_rel(Rel::Eq);
            changed = true;
        }
    }
    if changed {
        rows = simplify(rows)?;
    }
    let mut i = 0;
    while i < rows.len() {
        let r = rows.remove(i);
        if !implies(&rows, &r) {
            rows.insert(i, r);
            i += 1;
        }
    }
    rows.sort();
    Some(rows)
}
