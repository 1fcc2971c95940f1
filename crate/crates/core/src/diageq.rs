//! Diagonal equations `x_1^k + ... + x_n^k = lambda` over `F_q`: exact
//! solution counts, special solutions with nonzero coordinates and pairwise
//! distinct `k`-th powers, two-variable solution pairs, and the advisory
//! size thresholds attached to the constructions.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gf::{Elem, FieldCtx};
use crate::{Error, Result};

/// Default cap on elementary steps for [`census`].
pub const DEFAULT_CENSUS_BUDGET: u128 = 1_000_000_000;

/// Cap on backtracking nodes for the exhaustive phase of [`find_special_solution`].
pub const SPECIAL_SEARCH_NODES: u64 = 100_000_000;

const RANDOM_ATTEMPTS: usize = 512;
const REPAIR_ROUNDS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Constraints {
    /// Every coordinate is nonzero.
    pub nonzero: bool,
    /// The `k`-th powers of the coordinates are pairwise distinct.
    pub distinct_kth_powers: bool,
}

impl Constraints {
    pub const BOTH: Constraints = Constraints { nonzero: true, distinct_kth_powers: true };
    pub const NONE: Constraints = Constraints { nonzero: false, distinct_kth_powers: false };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialTuple {
    pub xs: Vec<Elem>,
    pub lambda: Elem,
    pub k: u64,
    pub constraints: Constraints,
}

impl SpecialTuple {
    /// Re-checks the equation and every requested constraint.
    pub fn check(&self, ctx: &FieldCtx) -> bool {
        let powers: Vec<Elem> = self.xs.iter().map(|&x| ctx.pow(x, self.k)).collect();
        let sum = powers.iter().fold(Elem::ZERO, |acc, &v| ctx.add(acc, v));
        let nonzero_ok = !self.constraints.nonzero || self.xs.iter().all(|x| !x.is_zero());
        let distinct_ok =
            !self.constraints.distinct_kth_powers || powers.iter().enumerate().all(|(i, v)| !powers[..i].contains(v));
        sum == self.lambda && nonzero_ok && distinct_ok
    }

    /// The `k`-th powers of the coordinates.
    pub fn powers(&self, ctx: &FieldCtx) -> Vec<Elem> {
        self.xs.iter().map(|&x| ctx.pow(x, self.k)).collect()
    }
}

/// Two solutions `(a, b)`, `(c, d)` of `x^k + y^k = lambda` with
/// `a^k != c^k` and `b^k != d^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoVarPair {
    pub first: (Elem, Elem),
    pub second: (Elem, Elem),
    pub lambda: Elem,
    pub k: u64,
}

impl TwoVarPair {
    pub fn check(&self, ctx: &FieldCtx) -> bool {
        let k = self.k;
        let (a, b) = self.first;
        let (c, d) = self.second;
        let (ak, bk, ck, dk) = (ctx.pow(a, k), ctx.pow(b, k), ctx.pow(c, k), ctx.pow(d, k));
        ctx.add(ak, bk) == self.lambda && ctx.add(ck, dk) == self.lambda && ak != ck && bk != dk
    }
}

/// Exact counts for one diagonal equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusReport {
    pub q: u32,
    pub k: u64,
    pub n: usize,
    pub lambda: Elem,
    /// Number of solutions in `F_q^n`.
    pub solutions: u128,
    /// Solutions with `x_i^k = x_j^k` for some `i < j`; `None` when the
    /// enumeration would exceed the budget.
    pub with_collision: Option<u128>,
    /// Solutions with some `x_i = 0`.
    pub with_zero: Option<u128>,
    /// `|N - q^(n-1)|`.
    pub weil_gap: u128,
    /// `k^(4n) q^(n-1)`, the square of the Weil bound; `None` on overflow.
    pub weil_bound_squared: Option<u128>,
    /// `gap^2 <= k^(4n) q^(n-1)`.
    pub weil_holds: bool,
    /// `N - N1 - N2`, a lower bound for the number of special solutions.
    pub special_lower: Option<i128>,
}

/// Counts gathered by enumerating `k`-th power value tuples whose leading
/// value index lies in a range; summing the parts over a partition of
/// `0..|S|` gives the full counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartialCounts {
    pub solutions: u128,
    pub with_collision: u128,
    pub with_zero: u128,
}

impl PartialCounts {
    pub fn merge(self, other: PartialCounts) -> PartialCounts {
        PartialCounts {
            solutions: self.solutions + other.solutions,
            with_collision: self.with_collision + other.with_collision,
            with_zero: self.with_zero + other.with_zero,
        }
    }
}

/// Number of `x` with `x^k = v`, indexed by `v`.
fn histogram(ctx: &FieldCtx, k: u64) -> Vec<u128> {
    let mut h = vec![0u128; ctx.q() as usize];
    for x in ctx.elements() {
        h[ctx.pow(x, k).index() as usize] += 1;
    }
    h
}

fn saturating_pow(base: u128, exp: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Steps needed to enumerate all value tuples for `n` variables.
pub fn enumeration_work(ctx: &FieldCtx, k: u64, n: usize) -> Option<u128> {
    let s = ctx.kth_power_set(k).len() as u128;
    saturating_pow(s, n.saturating_sub(1) as u64)?.checked_mul(n as u128)
}

/// Solution count by convolving the `k`-th power histogram.
pub fn count_by_convolution(ctx: &FieldCtx, k: u64, n: usize, lambda: Elem, budget: u128) -> Result<u128> {
    let q = ctx.q() as usize;
    let h = histogram(ctx, k);
    let support: Vec<Elem> = ctx.kth_power_set(k);
    let work = (q as u128) * (support.len() as u128) * (n.saturating_sub(2) as u128) + q as u128;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, cap: budget });
    }
    if n == 0 {
        return Ok(u128::from(lambda.is_zero()));
    }
    let mut dist = h.clone();
    for _ in 2..n {
        let mut next = vec![0u128; q];
        for y in ctx.elements() {
            let dy = dist[y.index() as usize];
            if dy == 0 {
                continue;
            }
            for &s in &support {
                next[ctx.add(y, s).index() as usize] += dy * h[s.index() as usize];
            }
        }
        dist = next;
    }
    if n == 1 {
        return Ok(dist[lambda.index() as usize]);
    }
    Ok(support.iter().map(|&s| h[s.index() as usize] * dist[ctx.sub(lambda, s).index() as usize]).sum())
}

/// Enumerates value tuples `(v_1, ..., v_n)` over the `k`-th power set with
/// `v_1` drawn from `support[lead]`, weighting each by the number of preimages.
pub fn census_partial(ctx: &FieldCtx, k: u64, n: usize, lambda: Elem, lead: Range<usize>) -> PartialCounts {
    let h = histogram(ctx, k);
    let support = ctx.kth_power_set(k);
    let mut counts = PartialCounts::default();
    if n == 0 {
        return counts;
    }
    if n == 1 {
        if lead.contains(&0) && h[lambda.index() as usize] > 0 {
            counts.solutions = h[lambda.index() as usize];
            if lambda.is_zero() {
                counts.with_zero = counts.solutions;
            }
        }
        return counts;
    }
    let mut values = vec![Elem::ZERO; n];
    let mut idx = vec![0usize; n - 1];
    for first in lead {
        if first >= support.len() {
            break;
        }
        idx.iter_mut().for_each(|i| *i = 0);
        idx[0] = first;
        loop {
            let mut sum = Elem::ZERO;
            let mut weight: u128 = 1;
            for (slot, &i) in idx.iter().enumerate() {
                let v = support[i];
                values[slot] = v;
                sum = ctx.add(sum, v);
                weight *= h[v.index() as usize];
            }
            let last = ctx.sub(lambda, sum);
            let hl = h[last.index() as usize];
            if hl > 0 {
                values[n - 1] = last;
                let w = weight * hl;
                counts.solutions += w;
                if values.iter().any(|v| v.is_zero()) {
                    counts.with_zero += w;
                }
                if values.iter().enumerate().any(|(i, v)| values[..i].contains(v)) {
                    counts.with_collision += w;
                }
            }
            // odometer over positions 1..n-1
            let mut pos = n - 2;
            loop {
                if pos == 0 {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < support.len() {
                    break;
                }
                idx[pos] = 0;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
    }
    counts
}

/// Builds the report from an exact total and optional enumeration counts.
pub fn census_assemble(
    ctx: &FieldCtx,
    k: u64,
    n: usize,
    lambda: Elem,
    solutions: u128,
    parts: Option<PartialCounts>,
) -> CensusReport {
    let q = u128::from(ctx.q());
    let main = saturating_pow(q, n.saturating_sub(1) as u64).unwrap_or(u128::MAX);
    let weil_gap = solutions.abs_diff(main);
    let weil_bound_squared =
        saturating_pow(u128::from(k), 4 * n as u64).and_then(|a| a.checked_mul(main)).filter(|_| main != u128::MAX);
    let weil_holds = match (weil_gap.checked_mul(weil_gap), weil_bound_squared) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(g), Some(b)) => g <= b,
    };
    let (with_collision, with_zero) = match parts {
        Some(p) => (Some(p.with_collision), Some(p.with_zero)),
        None => (None, None),
    };
    let special_lower = parts.map(|p| solutions as i128 - p.with_collision as i128 - p.with_zero as i128);
    CensusReport {
        q: ctx.q(),
        k,
        n,
        lambda,
        solutions,
        with_collision,
        with_zero,
        weil_gap,
        weil_bound_squared,
        weil_holds,
        special_lower,
    }
}

/// Exact census of `x_1^k + ... + x_n^k = lambda`. The total is computed by
/// histogram convolution; the collision and zero counts by value-tuple
/// enumeration when that fits in `budget`.
pub fn census(ctx: &FieldCtx, k: u64, n: usize, lambda: Elem, budget: u128) -> Result<CensusReport> {
    if n == 0 || k == 0 {
        return Err(Error::PreconditionViolated("census needs n >= 1 and k >= 1".into()));
    }
    let solutions = count_by_convolution(ctx, k, n, lambda, budget)?;
    let parts = match enumeration_work(ctx, k, n) {
        Some(w) if w <= budget => {
            let s = ctx.kth_power_set(k).len();
            let p = census_partial(ctx, k, n, lambda, 0..s);
            if p.solutions != solutions {
                return Err(Error::Internal("census enumeration disagrees with convolution".into()));
            }
            Some(p)
        }
        _ => None,
    };
    Ok(census_assemble(ctx, k, n, lambda, solutions, parts))
}

/// Value-space view of a special-solution search.
struct ValueSearch<'a> {
    ctx: &'a FieldCtx,
    allowed: Vec<Elem>,
    is_power: Vec<bool>,
    n: usize,
    lambda: Elem,
    constraints: Constraints,
}

impl ValueSearch<'_> {
    fn admissible_last(&self, prefix: &[Elem]) -> Option<Elem> {
        let sum = prefix.iter().fold(Elem::ZERO, |acc, &v| self.ctx.add(acc, v));
        let last = self.ctx.sub(self.lambda, sum);
        if !self.is_power[last.index() as usize] || (self.constraints.nonzero && last.is_zero()) {
            return None;
        }
        if self.constraints.distinct_kth_powers && prefix.contains(&last) {
            return None;
        }
        Some(last)
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Option<Vec<Elem>> {
        let m = self.n - 1;
        let len = self.allowed.len() as u32;
        let pick = |rng: &mut ChaCha8Rng| self.allowed[(rng.next_u32() % len) as usize];
        for _ in 0..RANDOM_ATTEMPTS {
            let mut prefix: Vec<Elem> = (0..m).map(|_| pick(rng)).collect();
            for _ in 0..REPAIR_ROUNDS {
                let collision = if self.constraints.distinct_kth_powers {
                    (0..m).find(|&i| prefix[..i].contains(&prefix[i]))
                } else {
                    None
                };
                if let Some(i) = collision {
                    prefix[i] = pick(rng);
                    continue;
                }
                if let Some(last) = self.admissible_last(&prefix) {
                    prefix.push(last);
                    return Some(prefix);
                }
                let i = (rng.next_u32() as usize) % m;
                prefix[i] = pick(rng);
            }
        }
        None
    }

    /// Depth-first search; for distinct values the prefix is taken strictly
    /// increasing, which loses nothing since coordinates can be permuted.
    fn exhaustive(&self) -> core::result::Result<Option<Vec<Elem>>, ()> {
        let mut nodes = 0u64;
        let mut prefix = Vec::with_capacity(self.n);
        self.extend(&mut prefix, 0, &mut nodes)
    }

    fn extend(
        &self,
        prefix: &mut Vec<Elem>,
        start: usize,
        nodes: &mut u64,
    ) -> core::result::Result<Option<Vec<Elem>>, ()> {
        *nodes += 1;
        if *nodes > SPECIAL_SEARCH_NODES {
            return Err(());
        }
        if prefix.len() == self.n - 1 {
            return Ok(self.admissible_last(prefix).map(|last| {
                let mut out = prefix.clone();
                out.push(last);
                out
            }));
        }
        let from = if self.constraints.distinct_kth_powers { start } else { 0 };
        for i in from..self.allowed.len() {
            prefix.push(self.allowed[i]);
            let found = self.extend(prefix, i + 1, nodes)?;
            prefix.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// A solution of `x_1^k + ... + x_n^k = lambda` meeting `constraints`:
/// seeded random sampling with repair, then an exhaustive search over `k`-th
/// power values. `NotFound { exhaustive: true }` proves nonexistence.
pub fn find_special_solution(
    ctx: &FieldCtx,
    k: u64,
    n: usize,
    lambda: Elem,
    constraints: Constraints,
    seed: u64,
) -> Result<SpecialTuple> {
    if n == 0 || k == 0 {
        return Err(Error::PreconditionViolated("special solutions need n >= 1 and k >= 1".into()));
    }
    let powers = ctx.kth_power_set(k);
    let mut is_power = vec![false; ctx.q() as usize];
    for v in &powers {
        is_power[v.index() as usize] = true;
    }
    let allowed: Vec<Elem> = powers.into_iter().filter(|v| !(constraints.nonzero && v.is_zero())).collect();
    if constraints.distinct_kth_powers && allowed.len() < n {
        return Err(Error::NotFound { exhaustive: true });
    }
    let search = ValueSearch { ctx, allowed, is_power, n, lambda, constraints };
    let values = if n == 1 {
        search.admissible_last(&[])
            .map(|v| vec![v])
            .ok_or(Error::NotFound { exhaustive: true })?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match search.random(&mut rng) {
            Some(v) => v,
            None => match search.exhaustive() {
                Ok(Some(v)) => v,
                Ok(None) => return Err(Error::NotFound { exhaustive: true }),
                Err(()) => return Err(Error::NotFound { exhaustive: false }),
            },
        }
    };
    let xs = values.iter().map(|&v| ctx.kth_root(v, k).expect("k-th power")).collect();
    let tuple = SpecialTuple { xs, lambda, k, constraints };
    if !tuple.check(ctx) {
        return Err(Error::Internal("special solution failed its own check".into()));
    }
    Ok(tuple)
}

/// The first two solutions of `x^k + y^k = lambda` with different `k`-th
/// power values, scanning `x^k` in increasing order; roots are the smallest.
pub fn find_two_var_pair(ctx: &FieldCtx, k: u64, lambda: Elem) -> Result<TwoVarPair> {
    let mut found = Vec::with_capacity(2);
    for s in ctx.kth_power_set(k) {
        let t = ctx.sub(lambda, s);
        if ctx.is_kth_power(t, k) {
            found.push((s, t));
            if found.len() == 2 {
                break;
            }
        }
    }
    let [(s1, t1), (s2, t2)] = found[..] else { return Err(Error::NotFound { exhaustive: true }) };
    let root = |v| ctx.kth_root(v, k).expect("k-th power");
    let pair = TwoVarPair { first: (root(s1), root(t1)), second: (root(s2), root(t2)), lambda, k };
    debug_assert!(pair.check(ctx));
    Ok(pair)
}

/// An advisory integer threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Value(u128),
    /// Too large for `u128`.
    Overflow,
    /// The defining expression has no meaning for these parameters.
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constants {
    /// `k^4`: above it every element of `F_q` is a sum of two `k`-th powers.
    pub c_small: Threshold,
    /// `k^16`: above it two-variable pairs exist for every nonzero target.
    pub c_two_var: Threshold,
    /// `max(2n^2, ceil(k^(4n/(n-8))))` for `n >= 9`.
    pub c_kn: Threshold,
    /// `2k`: nilpotent blocks of at least this size need no search.
    pub c_nilpotent_free: Threshold,
}

fn to_threshold(v: &BigUint) -> Threshold {
    u128::try_from(v).map_or(Threshold::Overflow, Threshold::Value)
}

pub fn constants(k: u64, n: usize) -> Constants {
    let big_k = BigUint::from(k);
    let c_kn = if n >= 9 {
        let target = big_k.pow(4 * n as u32);
        let degree = (n - 8) as u32;
        let mut root = target.nth_root(degree);
        if root.pow(degree) < target {
            root += 1u32;
        }
        let two_n2 = BigUint::from(2 * n as u64 * n as u64);
        to_threshold(&root.max(two_n2))
    } else {
        Threshold::Undefined
    };
    Constants {
        c_small: to_threshold(&big_k.pow(4)),
        c_two_var: to_threshold(&big_k.pow(16)),
        c_kn,
        c_nilpotent_free: to_threshold(&(big_k * 2u32)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, m: u32) -> FieldCtx {
        FieldCtx::new(p, m).unwrap()
    }

    #[test]
    fn census_examples() {
        let f7 = field(7, 1);
        let r = census(&f7, 3, 1, f7.elem(6), DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(r.solutions, 3);

        let r = census(&f7, 2, 2, f7.elem(1), DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(r.solutions, 8);
        assert_eq!(r.weil_gap, 1);
        assert!(r.weil_holds);
        // (0,±1),(±1,0) have a zero; (±2,±2) collide
        assert_eq!(r.with_zero, Some(4));
        assert_eq!(r.with_collision, Some(4));
        assert_eq!(r.special_lower, Some(0));

        let f11 = field(11, 1);
        for n in 1..=3 {
            let r = census(&f11, 1, n, f11.elem(5), DEFAULT_CENSUS_BUDGET).unwrap();
            assert_eq!(r.solutions, 11u128.pow(n as u32 - 1));
        }
    }

    #[test]
    fn census_budget() {
        let f = field(101, 1);
        assert!(matches!(census(&f, 2, 3, Elem::ONE, 10), Err(Error::BudgetExceeded { .. })));
        let r = census(&f, 2, 4, Elem::ONE, 200_000).unwrap();
        assert_eq!(r.with_zero, None);
    }

    #[test]
    fn partial_counts_merge_to_whole() {
        let f = field(13, 1);
        let s = f.kth_power_set(2).len();
        let whole = census_partial(&f, 2, 3, Elem::ONE, 0..s);
        let split = census_partial(&f, 2, 3, Elem::ONE, 0..3).merge(census_partial(&f, 2, 3, Elem::ONE, 3..s));
        assert_eq!(whole, split);
    }

    #[test]
    fn special_solution_examples() {
        let f13 = field(13, 1);
        let t = find_special_solution(&f13, 2, 3, Elem::ONE, Constraints::BOTH, 0).unwrap();
        assert!(t.check(&f13));
        assert_eq!(t.xs.len(), 3);

        let f = field(11, 1);
        let t = find_special_solution(&f, 1, 1, f.elem(5), Constraints::BOTH, 0).unwrap();
        assert_eq!(t.xs, [f.elem(5)]);

        let f3 = field(3, 1);
        let distinct = Constraints { nonzero: false, distinct_kth_powers: true };
        assert_eq!(
            find_special_solution(&f3, 2, 3, Elem::ONE, distinct, 0).unwrap_err(),
            Error::NotFound { exhaustive: true }
        );
    }

    #[test]
    fn special_solution_exhaustive_phase_proves_absence() {
        // squares in F_7 are {0,1,2,4}; nonzero distinct triples sum to 0 only
        let f7 = field(7, 1);
        assert_eq!(
            find_special_solution(&f7, 2, 3, Elem::ONE, Constraints::BOTH, 3).unwrap_err(),
            Error::NotFound { exhaustive: true }
        );
        assert!(find_special_solution(&f7, 2, 3, Elem::ZERO, Constraints::BOTH, 3).unwrap().check(&f7));
    }

    #[test]
    fn two_var_pairs() {
        let f7 = field(7, 1);
        let pair = find_two_var_pair(&f7, 2, Elem::ONE).unwrap();
        assert!(pair.check(&f7));
        assert_eq!(pair.first, (Elem::ZERO, Elem::ONE));
        assert_eq!(pair.second, (Elem::ONE, Elem::ZERO));

        let f11 = field(11, 1);
        let l = f11.elem(4);
        let pair = find_two_var_pair(&f11, 1, l).unwrap();
        assert_eq!((pair.first, pair.second), ((Elem::ZERO, l), (Elem::ONE, f11.elem(3))));

        let f5 = field(5, 1);
        assert_eq!(find_two_var_pair(&f5, 4, f5.elem(2)).unwrap_err(), Error::NotFound { exhaustive: true });
    }

    #[test]
    fn constant_values() {
        let c = constants(2, 1);
        assert_eq!(c.c_small, Threshold::Value(16));
        assert_eq!(c.c_two_var, Threshold::Value(65536));
        assert_eq!(c.c_kn, Threshold::Undefined);
        assert_eq!(c.c_nilpotent_free, Threshold::Value(4));
        assert_eq!(constants(2, 10).c_kn, Threshold::Value(1 << 20));
        // 2^(160/32) = 32 < 2 * 40^2
        assert_eq!(constants(2, 40).c_kn, Threshold::Value(3200));
        // n = 9: root of degree one, so the threshold is k^36 itself
        assert_eq!(constants(3, 9).c_kn, Threshold::Value(3u128.pow(36)));
        assert_eq!(constants(1 << 40, 1).c_two_var, Threshold::Overflow);
    }
}
