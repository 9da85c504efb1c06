use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::geometry::{Polyhedron, Rational, Rel};
use crate::model::DURATION;
use crate::pet::NormalTerm;

use super::ArithError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AtomRel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// `Σ coeffs·v + constant REL 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinAtom {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
    pub rel: AtomRel,
}

impl LinAtom {
    /// `Σ terms = 0` with the given signed coefficients.
    pub fn sum_eq(terms: &[(i64, &str)], constant: i64) -> LinAtom {
        let mut coeffs = BTreeMap::new();
        for (k, v) in terms {
            *coeffs.entry(v.to_string()).or_insert(0) += k;
        }
        coeffs.retain(|_, k| *k != 0);
        LinAtom { coeffs, constant, rel: AtomRel::Eq }
    }

    fn value(&self, env: &BTreeMap<String, i64>) -> i128 {
        self.coeffs.iter().map(|(v, k)| *k as i128 * env[v] as i128).sum::<i128>() + self.constant as i128
    }

    fn holds(&self, env: &BTreeMap<String, i64>) -> bool {
        let x = self.value(env);
        match self.rel {
            AtomRel::Le => x <= 0,
            AtomRel::Eq => x == 0,
        }
    }
}

/// Existential formula over natural-valued variables with divisibility.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DivFormula {
    True,
    False,
    Lin(LinAtom),
    /// `y | z`
    Divides(String, String),
    And(Vec<DivFormula>),
    Or(Vec<DivFormula>),
    Exists(Vec<String>, Box<DivFormula>),
}

impl DivFormula {
    pub fn and(fs: Vec<DivFormula>) -> DivFormula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                DivFormula::True => {}
                DivFormula::False => return DivFormula::False,
                DivFormula::And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => DivFormula::True,
            1 => out.pop().unwrap(),
            _ => DivFormula::And(out),
        }
    }

    pub fn or(fs: Vec<DivFormula>) -> DivFormula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                DivFormula::False => {}
                DivFormula::True => return DivFormula::True,
                DivFormula::Or(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => DivFormula::False,
            1 => out.pop().unwrap(),
            _ => DivFormula::Or(out),
        }
    }

    pub fn exists(vars: Vec<String>, body: DivFormula) -> DivFormula {
        match body {
            DivFormula::True | DivFormula::False => body,
            b if vars.is_empty() => b,
            b => DivFormula::Exists(vars, Box::new(b)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            DivFormula::True | DivFormula::False => {}
            DivFormula::Lin(a) => out.extend(a.coeffs.keys().cloned()),
            DivFormula::Divides(y, z) => {
                out.insert(y.clone());
                out.insert(z.clone());
            }
            DivFormula::And(fs) | DivFormula::Or(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            DivFormula::Exists(vs, b) => {
                let mut inner = BTreeSet::new();
                b.collect_free(&mut inner);
                out.extend(inner.into_iter().filter(|v| !vs.contains(v)));
            }
        }
    }

    /// Depth of nested existential blocks; the fragment has no alternation.
    pub fn exists_depth(&self) -> usize {
        match self {
            DivFormula::And(fs) | DivFormula::Or(fs) => fs.iter().map(|f| f.exists_depth()).max().unwrap_or(0),
            DivFormula::Exists(_, b) => 1 + b.exists_depth(),
            _ => 0,
        }
    }
}

fn to_i64(x: &num_bigint::BigInt, what: &str) -> Result<i64, ArithError> {
    x.to_i64().ok_or_else(|| ArithError::Overflow(what.to_string()))
}

/// Rows of `p` as integer atoms with `d` renamed to `dvar`. Bare
/// nonnegativity rows are omitted since every variable is natural.
fn atoms(p: &Polyhedron, dvar: &str) -> Result<Vec<DivFormula>, ArithError> {
    if p.is_empty() {
        return Ok(vec![DivFormula::False]);
    }
    let mut out = Vec::new();
    for c in p.constraints() {
        let rel = match c.rel {
            Rel::Lt => return Err(ArithError::StrictRow(c.to_string())),
            Rel::Le => AtomRel::Le,
            Rel::Eq => AtomRel::Eq,
        };
        let mut l = c.expr.constant.denom().clone();
        for k in c.expr.coeffs.values() {
            l = l.lcm(k.denom());
        }
        let scale = Rational::from_integer(l);
        let what = c.to_string();
        let mut coeffs = BTreeMap::new();
        for (v, k) in &c.expr.coeffs {
            let name = if v == DURATION { dvar.to_string() } else { v.clone() };
            coeffs.insert(name, to_i64(&(k * &scale).to_integer(), &what)?);
        }
        let constant = to_i64(&(&c.expr.constant * &scale).to_integer(), &what)?;
        if rel == AtomRel::Le && constant == 0 && coeffs.len() == 1 && coeffs.values().all(|k| *k < 0) {
            continue;
        }
        out.push(DivFormula::Lin(LinAtom { coeffs, constant, rel }));
    }
    Ok(out)
}

/// Membership of `(d, parameters)` in the union of the terms. Each term
/// splits `d` into `x0` (base) and one `xj` per loop; a loop value is zero
/// or `z1 + z2 + y3` with `y1 | z1`, `y2 | z2` and every `y` in the loop.
pub fn build_div_formula(terms: &[NormalTerm]) -> Result<DivFormula, ArithError> {
    let mut alts = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        let xs: Vec<String> = (0..=t.loops.len()).map(|j| format!("x!{i}!{j}")).collect();
        let mut sum: Vec<(i64, &str)> = vec![(1, DURATION)];
        sum.extend(xs.iter().map(|x| (-1, x.as_str())));
        let mut conj = vec![DivFormula::Lin(LinAtom::sum_eq(&sum, 0))];
        conj.extend(atoms(&t.params_constraint, DURATION)?);
        conj.extend(atoms(&t.base, &xs[0])?);
        for (j, l) in t.loops.iter().enumerate() {
            let x = &xs[j + 1];
            let n = |s: &str| format!("{s}!{i}!{}", j + 1);
            let (y1, y2, y3, z1, z2) = (n("y1"), n("y2"), n("y3"), n("z1"), n("z2"));
            let mut block = Vec::new();
            for y in [&y1, &y2, &y3] {
                block.extend(atoms(l, y)?);
            }
            for (y, z) in [(&y1, &z1), (&y2, &z2)] {
                block.push(DivFormula::or(vec![
                    DivFormula::Lin(LinAtom::sum_eq(&[(1, z)], 0)),
                    DivFormula::Divides(y.clone(), z.clone()),
                ]));
            }
            block.push(DivFormula::Lin(LinAtom::sum_eq(&[(1, x), (-1, &z1), (-1, &z2), (-1, &y3)], 0)));
            conj.push(DivFormula::or(vec![
                DivFormula::Lin(LinAtom::sum_eq(&[(1, x)], 0)),
                DivFormula::exists(vec![y1, y2, y3, z1, z2], DivFormula::and(block)),
            ]));
        }
        alts.push(DivFormula::exists(xs, DivFormula::and(conj)));
    }
    Ok(DivFormula::or(alts))
}

struct Block<'a> {
    free: Vec<String>,
    /// Conjuncts of the body with their free variables.
    conjuncts: Vec<(&'a DivFormula, BTreeSet<String>)>,
}

fn conjuncts(f: &DivFormula) -> Vec<&DivFormula> {
    match f {
        DivFormula::And(fs) => fs.iter().flat_map(conjuncts).collect(),
        g => vec![g],
    }
}

struct Evaluator<'a> {
    bound: i64,
    blocks: HashMap<usize, Rc<Block<'a>>>,
    cache: HashMap<(usize, Vec<i64>), bool>,
}

impl<'a> Evaluator<'a> {
    fn holds(&mut self, f: &'a DivFormula, env: &mut BTreeMap<String, i64>) -> bool {
        match f {
            DivFormula::True => true,
            DivFormula::False => false,
            DivFormula::Lin(a) => a.holds(env),
            DivFormula::Divides(y, z) => match (env[y], env[z]) {
                (0, z) => z == 0,
                (y, z) => z % y == 0,
            },
            DivFormula::And(fs) => {
                for g in fs {
                    if !self.holds(g, env) {
                        return false;
                    }
                }
                true
            }
            DivFormula::Or(fs) => {
                for g in fs {
                    if self.holds(g, env) {
                        return true;
                    }
                }
                false
            }
            DivFormula::Exists(vars, body) => {
                let id = f as *const DivFormula as usize;
                let block = self
                    .blocks
                    .entry(id)
                    .or_insert_with(|| {
                        Rc::new(Block {
                            free: f.free_vars().into_iter().collect(),
                            conjuncts: conjuncts(body).into_iter().map(|c| (c, c.free_vars())).collect(),
                        })
                    })
                    .clone();
                let key = (id, block.free.iter().map(|v| env[v]).collect::<Vec<_>>());
                if let Some(r) = self.cache.get(&key) {
                    return *r;
                }
                let shadowed: Vec<(String, i64)> =
                    vars.iter().filter_map(|v| env.remove(v).map(|x| (v.clone(), x))).collect();
                let ready: Vec<bool> = block
                    .conjuncts
                    .iter()
                    .map(|(_, fv)| fv.iter().all(|v| env.contains_key(v)))
                    .collect();
                let mut r = true;
                for (i, (c, _)) in block.conjuncts.iter().enumerate() {
                    if ready[i] && !self.holds(c, env) {
                        r = false;
                        break;
                    }
                }
                if r {
                    r = self.search(&block, vars.clone(), env);
                }
                env.extend(shadowed);
                self.cache.insert(key, r);
                r
            }
        }
    }

    /// Domains of the pending variables narrowed by the linear conjuncts.
    fn propagate(&self, block: &Block<'a>, pending: &[String], env: &BTreeMap<String, i64>) -> Option<Vec<(i64, i64)>> {
        let mut dom: Vec<(i64, i64)> = vec![(0, self.bound); pending.len()];
        let idx = |v: &str| pending.iter().position(|p| p == v);
        for _ in 0..16 {
            let mut changed = false;
            for (c, fv) in &block.conjuncts {
                let DivFormula::Lin(a) = c else { continue };
                if fv.iter().any(|v| !env.contains_key(v) && idx(v).is_none()) {
                    continue;
                }
                let dirs: &[i128] = if a.rel == AtomRel::Eq { &[1, -1] } else { &[1] };
                for &s in dirs {
                    // s·(Σ a·v + c) ≤ 0
                    let mut fixed = s * a.constant as i128;
                    let mut open = Vec::new();
                    for (v, k) in &a.coeffs {
                        let k = s * *k as i128;
                        match idx(v) {
                            Some(i) => open.push((i, k)),
                            None => fixed += k * env[v] as i128,
                        }
                    }
                    let mins: Vec<i128> = open
                        .iter()
                        .map(|&(i, k)| (k * dom[i].0 as i128).min(k * dom[i].1 as i128))
                        .collect();
                    let total: i128 = mins.iter().sum::<i128>() + fixed;
                    for (n, &(i, k)) in open.iter().enumerate() {
                        let rest = total - mins[n];
                        // k·v ≤ -rest
                        let (lo, hi) = dom[i];
                        let (nlo, nhi) = if k > 0 {
                            (lo as i128, hi.min(Integer::div_floor(&-rest, &k).clamp(-1, i64::MAX as i128) as i64) as i128)
                        } else {
                            ((lo as i128).max(Integer::div_ceil(&rest, &(-k))), hi as i128)
                        };
                        let n = (nlo.clamp(0, i64::MAX as i128) as i64, nhi as i64);
                        if n != dom[i] {
                            dom[i] = n;
                            changed = true;
                        }
                        if n.0 > n.1 {
                            return None;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Some(dom)
    }

    fn search(&mut self, block: &Block<'a>, pending: Vec<String>, env: &mut BTreeMap<String, i64>) -> bool {
        if pending.is_empty() {
            return true;
        }
        let Some(dom) = self.propagate(block, &pending, env) else { return false };
        let i = (0..pending.len()).min_by_key(|&i| (dom[i].1 - dom[i].0, i)).expect("pending");
        let var = pending[i].clone();
        let rest: Vec<String> = pending.iter().filter(|v| **v != var).cloned().collect();
        for x in dom[i].0..=dom[i].1 {
            env.insert(var.clone(), x);
            let ok = block.conjuncts.iter().all(|(c, fv)| {
                !fv.contains(&var) || fv.iter().any(|v| !env.contains_key(v)) || self.holds(c, env)
            });
            if ok && self.search(block, rest.clone(), env) {
                env.remove(&var);
                return true;
            }
        }
        env.remove(&var);
        false
    }
}

/// Truth of `f` under `assignment`, with every existential witness searched
/// in `[0, witness_bound]`. For formulas of [`build_div_formula`] a bound of
/// `d` suffices: all summands are natural and add up to `d`, and a `y` with
/// a zero multiple can be taken equal to `y3`.
pub fn eval_div_formula(f: &DivFormula, assignment: &BTreeMap<String, u64>, witness_bound: u64) -> Result<bool, ArithError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !assignment.contains_key(v)) {
        return Err(ArithError::Unassigned(v));
    }
    let mut env: BTreeMap<String, i64> = assignment.iter().map(|(k, v)| (k.clone(), *v as i64)).collect();
    let mut ev = Evaluator { bound: witness_bound as i64, blocks: HashMap::new(), cache: HashMap::new() };
    Ok(ev.holds(f, &mut env))
}
