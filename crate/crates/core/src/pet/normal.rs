use serde::Serialize;

use crate::arith::{interval_star, interval_star_unbounded, PeriodicSet};
use crate::geometry::Polyhedron;
use crate::model::{Valuation, DURATION};

use super::expr::{bar_concat_poly, d_interval, d_zero, ZoneExpr};
use super::PetError;

/// Default cap on the number of terms of a normal form.
pub const MAX_TERMS: usize = 4096;

/// `params_constraint ∧ base` followed by the stars of `loops`; the
/// denotation is the duration sum of one point of the first part and any
/// number of points of each loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalTerm {
    pub params_constraint: Polyhedron,
    pub base: Polyhedron,
    pub loops: Vec<Polyhedron>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Term {
    full: Polyhedron,
    loops: Vec<Polyhedron>,
}

impl Term {
    fn one(vars: &[String]) -> Term {
        Term { full: d_zero(vars), loops: Vec::new() }
    }

    fn concat(&self, other: &Term) -> Result<Term, PetError> {
        let full = bar_concat_poly(&self.full, &other.full)?;
        let mut loops = self.loops.clone();
        loops.extend(other.loops.iter().cloned());
        Ok(Term { full, loops: canonical_loops(loops) })
    }
}

fn canonical_loops(mut loops: Vec<Polyhedron>) -> Vec<Polyhedron> {
    loops.sort_by_key(|l| l.to_string());
    loops.dedup();
    loops
}

/// Rows of `p` that mention `d`, as a polyhedron over the same variables.
fn d_rows(p: &Polyhedron) -> Result<Polyhedron, PetError> {
    let (with, _) = p.split_on(DURATION)?;
    Ok(Polyhedron::new(p.vars(), &with)?)
}

struct Normalizer {
    vars: Vec<String>,
    cap: usize,
}

impl Normalizer {
    fn push(&self, out: &mut Vec<Term>, t: Term) -> Result<(), PetError> {
        if t.full.is_empty() || out.contains(&t) {
            return Ok(());
        }
        out.push(t);
        if out.len() > self.cap {
            return Err(PetError::TooManyTerms(self.cap));
        }
        Ok(())
    }

    fn run(&self, e: &ZoneExpr) -> Result<Vec<Term>, PetError> {
        let mut out = Vec::new();
        match e {
            ZoneExpr::One => out.push(Term::one(&self.vars)),
            ZoneExpr::Atom(s) => {
                for p in s.disjuncts() {
                    self.push(&mut out, Term { full: p.clone(), loops: Vec::new() })?;
                }
            }
            ZoneExpr::Union(a, b) => {
                for t in self.run(a)?.into_iter().chain(self.run(b)?) {
                    self.push(&mut out, t)?;
                }
            }
            ZoneExpr::Concat(a, b) => {
                let (xs, ys) = (self.run(a)?, self.run(b)?);
                for x in &xs {
                    for y in &ys {
                        self.push(&mut out, x.concat(y)?)?;
                    }
                }
            }
            ZoneExpr::Star(a) => {
                // durations commute: (t1 + ... + tn)* = t1* ... tn*, and
                // (B L*)* = {d=0} + B (B^d)* L* since L* L* = L*
                let mut acc = vec![Term::one(&self.vars)];
                for t in self.run(a)? {
                    if t.full.same_set(&d_zero(&self.vars))? && t.loops.is_empty() {
                        continue;
                    }
                    let mut loops = t.loops.clone();
                    loops.push(d_rows(&t.full)?);
                    let unrolled = Term { full: t.full.clone(), loops: canonical_loops(loops) };
                    let mut next = Vec::new();
                    for x in &acc {
                        self.push(&mut next, x.clone())?;
                        self.push(&mut next, x.concat(&unrolled)?)?;
                    }
                    acc = next;
                }
                for t in acc {
                    self.push(&mut out, t)?;
                }
            }
        }
        Ok(out)
    }
}

/// Sum-of-stars normal form of `e` over `vars` (parameters and `d`).
pub fn normalize(e: &ZoneExpr, vars: &[String]) -> Result<Vec<NormalTerm>, PetError> {
    normalize_with_cap(e, vars, MAX_TERMS)
}

pub fn normalize_with_cap(e: &ZoneExpr, vars: &[String], cap: usize) -> Result<Vec<NormalTerm>, PetError> {
    let params: Vec<String> = vars.iter().filter(|v| *v != DURATION).cloned().collect();
    let n = Normalizer { vars: vars.to_vec(), cap };
    n.run(e)?
        .into_iter()
        .map(|t| {
            Ok(NormalTerm {
                params_constraint: t.full.project(&params)?,
                base: d_rows(&t.full)?,
                loops: t.loops.into_iter().map(|l| d_rows(&l)).collect::<Result<_, PetError>>()?,
            })
        })
        .collect()
}

/// Integer durations of the terms at `v`. Loop and base intervals must
/// have integral, non-strict ends (a doubled model guarantees it).
pub fn evaluate_at(terms: &[NormalTerm], v: &Valuation) -> Result<PeriodicSet, PetError> {
    let mut acc = PeriodicSet::empty();
    for t in terms {
        let params = t.params_constraint.vars().to_vec();
        let point = v
            .iter()
            .map(|(k, x)| (k.clone(), crate::geometry::rat(*x as i64)))
            .collect::<std::collections::BTreeMap<_, _>>();
        if !t.params_constraint.contains(&point)? {
            continue;
        }
        let Some(base) = d_interval(&t.base, &params, v)? else { continue };
        let mut set = base.points();
        if !t.loops.is_empty() && !base.integral() {
            return Err(PetError::NonIntegral(format!("base {}", t.base)));
        }
        for l in &t.loops {
            let s = match d_interval(l, &params, v)? {
                None => PeriodicSet::singleton(0),
                Some(iv) => {
                    if iv.is_strict() {
                        return Err(PetError::StrictLoop(l.to_string()));
                    }
                    if !iv.integral() {
                        return Err(PetError::NonIntegral(format!("loop {l}")));
                    }
                    match iv.integer_ends() {
                        None => PeriodicSet::singleton(0),
                        Some((b, None)) => interval_star_unbounded(b),
                        Some((b, Some(c))) => interval_star(b, c),
                    }
                }
            };
            set = set.sum(&s);
        }
        acc = acc.union(&set);
    }
    Ok(acc)
}
