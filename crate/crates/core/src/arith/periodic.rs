use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

/// Eventually periodic set of naturals. Below `threshold` membership is
/// given by `prefix`; from `threshold` on, `x` belongs iff `period > 0` and
/// `x mod period` is in `residues`. Values are kept canonical: minimal
/// period, then minimal threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PeriodicSet {
    prefix: BTreeSet<u64>,
    threshold: u64,
    period: u64,
    residues: BTreeSet<u64>,
}

fn lcm0(a: u64, b: u64) -> u64 {
    match (a, b) {
        (0, x) | (x, 0) => x,
        (a, b) => a.lcm(&b),
    }
}

impl PeriodicSet {
    pub fn empty() -> Self {
        PeriodicSet { prefix: BTreeSet::new(), threshold: 0, period: 0, residues: BTreeSet::new() }
    }

    pub fn singleton(x: u64) -> Self {
        Self::finite([x])
    }

    pub fn finite(xs: impl IntoIterator<Item = u64>) -> Self {
        let prefix: BTreeSet<u64> = xs.into_iter().collect();
        let threshold = prefix.iter().next_back().map_or(0, |m| m + 1);
        PeriodicSet { prefix, threshold, period: 0, residues: BTreeSet::new() }
    }

    /// `[b, c]`; empty when `b > c`.
    pub fn interval(b: u64, c: u64) -> Self {
        if b > c {
            return Self::empty();
        }
        Self::finite(b..=c)
    }

    /// `[b, ∞)`.
    pub fn from(b: u64) -> Self {
        Self::from_fn(b, 1, |x| x >= b)
    }

    /// Multiples of `p` (only `{0}` when `p = 0`).
    pub fn multiples(p: u64) -> Self {
        if p == 0 {
            return Self::singleton(0);
        }
        Self::from_fn(0, p, |x| x % p == 0)
    }

    /// Builds the canonical set agreeing with `f`, assuming `f` is
    /// `period`-periodic from `threshold` on.
    pub fn from_fn(threshold: u64, period: u64, f: impl Fn(u64) -> bool) -> Self {
        let prefix = (0..threshold).filter(|&x| f(x)).collect();
        let residues = (0..period).filter(|&r| f(threshold + (r + period - threshold % period) % period)).collect();
        PeriodicSet { prefix, threshold, period, residues }.canonical()
    }

    fn canonical(mut self) -> Self {
        if self.period > 0 && self.residues.is_empty() {
            self.period = 0;
        }
        if self.period > 0 {
            let p = self.period;
            let res = &self.residues;
            let best = (1..=p)
                .filter(|q| p % q == 0)
                .find(|&q| (0..p).all(|r| res.contains(&r) == res.contains(&(r % q))))
                .expect("p itself qualifies");
            if best < p {
                self.residues = self.residues.iter().copied().filter(|&r| r < best).collect();
                self.period = best;
            }
            while self.threshold > 0 {
                let y = self.threshold - 1;
                if self.prefix.contains(&y) != self.residues.contains(&(y % self.period)) {
                    break;
                }
                self.prefix.remove(&y);
                self.threshold = y;
            }
        } else {
            self.threshold = self.prefix.iter().next_back().map_or(0, |m| m + 1);
        }
        self
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn prefix(&self) -> &BTreeSet<u64> {
        &self.prefix
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.period == 0
    }

    pub fn is_finite(&self) -> bool {
        self.period == 0
    }

    pub fn contains(&self, x: u64) -> bool {
        if x < self.threshold {
            self.prefix.contains(&x)
        } else {
            self.period > 0 && self.residues.contains(&(x % self.period))
        }
    }

    /// Elements up to `bound` inclusive.
    pub fn elements_upto(&self, bound: u64) -> BTreeSet<u64> {
        (0..=bound).filter(|&x| self.contains(x)).collect()
    }

    pub fn min(&self) -> Option<u64> {
        let end = self.threshold + self.period;
        (0..end).find(|&x| self.contains(x))
    }

    /// Point from which both sets are periodic with a common period, plus
    /// that period.
    fn horizon(&self, other: &Self) -> (u64, u64) {
        (self.threshold.max(other.threshold), lcm0(self.period, other.period))
    }

    fn combine(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        let (t, p) = self.horizon(other);
        Self::from_fn(t, p, |x| f(self.contains(x), other.contains(x)))
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    /// Minkowski sum `{x + y}`.
    pub fn sum(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        let (t1, p1, t2, p2) = (self.threshold, self.period, other.threshold, other.period);
        let t = t1 + t2 + p1 + p2 + p1 * p2;
        let p = lcm0(p1, p2);
        let limit = (t + p) as usize;
        let a: Vec<usize> = (0..limit as u64).filter(|&x| self.contains(x)).map(|x| x as usize).collect();
        let words = limit / 64 + 1;
        let mut bits = vec![0u64; words];
        for x in (0..limit as u64).filter(|&x| other.contains(x)) {
            bits[x as usize / 64] |= 1 << (x % 64);
        }
        let mut out = vec![0u64; words];
        for &s in &a {
            let (ws, bs) = (s / 64, s % 64);
            for w in 0..words - ws {
                out[w + ws] |= bits[w] << bs;
                if bs != 0 && w + ws + 1 < words {
                    out[w + ws + 1] |= bits[w] >> (64 - bs);
                }
            }
        }
        Self::from_fn(t, p, |x| {
            let x = x as usize;
            x < limit && (out[x / 64] >> (x % 64)) & 1 == 1
        })
    }

    /// Submonoid generated by the set, through the Apéry set with respect
    /// to its least positive element.
    pub fn star(&self) -> Self {
        let horizon = self.threshold + self.period;
        let Some(m) = (1..=horizon).find(|&x| self.contains(x)) else {
            return Self::singleton(0);
        };
        let mut gens: Vec<Option<u64>> = vec![None; m as usize];
        for x in 1..self.threshold + lcm0(self.period, m) + m {
            let c = (x % m) as usize;
            if gens[c].is_none() && self.contains(x) {
                gens[c] = Some(x);
            }
        }
        let gens: Vec<u64> = gens.into_iter().flatten().collect();
        let mut dist: Vec<Option<u64>> = vec![None; m as usize];
        let mut done = vec![false; m as usize];
        dist[0] = Some(0);
        loop {
            let next = (0..m as usize).filter(|&r| !done[r] && dist[r].is_some()).min_by_key(|&r| dist[r]);
            let Some(r) = next else { break };
            done[r] = true;
            let base = dist[r].expect("picked reachable");
            for &s in &gens {
                let t = ((r as u64 + s) % m) as usize;
                if dist[t].is_none_or(|d| base + s < d) {
                    dist[t] = Some(base + s);
                }
            }
        }
        let top = dist.iter().flatten().copied().max().unwrap_or(0);
        Self::from_fn(top, m, |x| dist[(x % m) as usize].is_some_and(|d| d <= x))
    }

    /// Least common element.
    pub fn intersect_nonempty(&self, other: &Self) -> Option<u64> {
        let (t, p) = self.horizon(other);
        (0..t + p).find(|&x| self.contains(x) && other.contains(x))
    }

    /// Least element of the symmetric difference, with `true` when it lies
    /// in `self`.
    pub fn first_difference(&self, other: &Self) -> Option<(u64, bool)> {
        let (t, p) = self.horizon(other);
        (0..t + p).find(|&x| self.contains(x) != other.contains(x)).map(|x| (x, self.contains(x)))
    }
}

/// `⋃_{k ≥ 0} [k·b, k·c]`.
pub fn interval_star(b: u64, c: u64) -> PeriodicSet {
    if b > c || (b == 0 && c == 0) {
        return PeriodicSet::singleton(0);
    }
    if b == 0 {
        return PeriodicSet::from(0);
    }
    if b == c {
        return PeriodicSet::multiples(b);
    }
    // bands [kb, kc] overlap their successor once kc + 1 >= (k+1)b
    let k_star = (b - 1).div_ceil(c - b);
    let start = k_star * b;
    PeriodicSet::from_fn(start, 1, |x| x >= start || (0..k_star).any(|k| k * b <= x && x <= k * c))
}

/// `⋃_{k ≥ 0} [k·b, ∞)`.
pub fn interval_star_unbounded(b: u64) -> PeriodicSet {
    PeriodicSet::singleton(0).union(&PeriodicSet::from(b))
}

impl fmt::Display for PeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pre: Vec<String> = self.prefix.iter().map(|x| x.to_string()).collect();
        if self.period == 0 {
            return write!(f, "{{{}}}", pre.join(", "));
        }
        let res: Vec<String> = self.residues.iter().map(|x| x.to_string()).collect();
        if !pre.is_empty() {
            write!(f, "{{{}}} + ", pre.join(", "))?;
        }
        write!(f, "{{x >= {} : x mod {} in {{{}}}}}", self.threshold, self.period, res.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_examples() {
        let m3 = PeriodicSet::multiples(3);
        assert_eq!(PeriodicSet::singleton(0).union(&m3), m3);
        assert_eq!(PeriodicSet::empty().union(&m3), m3);
        let s = PeriodicSet::interval(2, 3).sum(&m3);
        let u = s.union(&PeriodicSet::singleton(1));
        assert!(u.contains(1) && u.prefix().contains(&1));
        assert_eq!(u.elements_upto(30), (0..=30).filter(|x| *x == 1 || (*x >= 2 && x % 3 != 1)).collect());
    }

    #[test]
    fn sum_examples() {
        let s = PeriodicSet::interval(2, 3).sum(&PeriodicSet::multiples(3));
        // 1 lies outside both the prefix and residue 1, so the minimal threshold is 1
        assert_eq!((s.threshold(), s.period()), (1, 3));
        assert_eq!(s.elements_upto(30), (0..=30).filter(|x| *x >= 2 && x % 3 != 1).collect());
        assert_eq!(s.residues(), &BTreeSet::from([0, 2]));
        let x = interval_star(5, 6);
        assert_eq!(x.sum(&PeriodicSet::singleton(0)), x);
        assert!(PeriodicSet::empty().sum(&x).is_empty());
    }

    #[test]
    fn star_examples() {
        assert_eq!(interval_star(3, 3), PeriodicSet::multiples(3));
        assert_eq!(interval_star(2, 3), PeriodicSet::singleton(0).union(&PeriodicSet::from(2)));
        let want: BTreeSet<u64> =
            [0, 5, 6, 10, 11, 12, 15, 16, 17, 18].into_iter().chain(20..=60).collect();
        assert_eq!(interval_star(5, 6).elements_upto(60), want);
        assert_eq!(interval_star(4, 2), PeriodicSet::singleton(0));
        assert_eq!(interval_star(0, 2), PeriodicSet::from(0));
    }

    #[test]
    fn equality_and_witnesses() {
        assert_ne!(PeriodicSet::multiples(2), PeriodicSet::multiples(3));
        assert_eq!(PeriodicSet::empty(), PeriodicSet::empty());
        assert_eq!(PeriodicSet::multiples(2).intersect_nonempty(&PeriodicSet::multiples(3)), Some(0));
        let odd = PeriodicSet::from_fn(0, 2, |x| x % 2 == 1);
        assert_eq!(odd.intersect_nonempty(&PeriodicSet::multiples(4)), None);
        assert_eq!(PeriodicSet::interval(2, 8).intersect_nonempty(&PeriodicSet::interval(0, 6)), Some(2));
        assert_eq!(PeriodicSet::interval(2, 8).first_difference(&PeriodicSet::interval(0, 6)), Some((0, false)));
    }

    #[test]
    fn display() {
        assert_eq!(PeriodicSet::interval(1, 2).to_string(), "{1, 2}");
        assert_eq!(interval_star(2, 3).to_string(), "{0} + {x >= 2 : x mod 1 in {0}}");
    }
}
