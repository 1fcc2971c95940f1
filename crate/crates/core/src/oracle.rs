//! Brute-force ground truth for small instances. Nothing here calls into
//! [`crate::matrix`] elimination, [`crate::canon`] or [`crate::waring`]
//! internals: characteristic polynomials come from cofactor expansion,
//! Jordan types from rank sequences computed by a separate elimination, and
//! `k`-th power membership from an exhaustive table.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gf::{Elem, FieldCtx};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::waring::Engine;
use crate::{Error, Result};

/// Largest size accepted by [`charpoly_cofactor`].
pub const COFACTOR_MAX_N: usize = 8;

/// Default cap on `q^(n^2)` for [`PowerTable`].
pub const POWER_TABLE_CAP: u128 = 100_000_000;

/// `det(tI - M)` by Laplace expansion along successive columns, memoized on
/// the set of remaining rows.
pub fn charpoly_cofactor(m: &Matrix) -> Result<Poly> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch("charpoly_cofactor needs a square matrix".into()));
    }
    if n > COFACTOR_MAX_N {
        return Err(Error::TooLarge(format!("cofactor expansion is limited to n <= {COFACTOR_MAX_N}, got {n}")));
    }
    let ctx = m.ctx();
    let entry = |i: usize, j: usize| {
        let c = ctx.neg(m[(i, j)]);
        if i == j {
            Poly::new(ctx, vec![c, Elem::ONE])
        } else {
            Poly::constant(ctx, c)
        }
    };
    let mut memo: BTreeMap<u32, Poly> = BTreeMap::new();
    fn minor(
        rows: u32,
        n: usize,
        entry: &dyn Fn(usize, usize) -> Poly,
        memo: &mut BTreeMap<u32, Poly>,
        ctx: &FieldCtx,
    ) -> Poly {
        if rows == 0 {
            return Poly::one(ctx);
        }
        if let Some(p) = memo.get(&rows) {
            return p.clone();
        }
        let col = n - rows.count_ones() as usize;
        let mut acc = Poly::zero(ctx);
        let mut sign_negative = false;
        for i in 0..n {
            if rows & (1 << i) == 0 {
                continue;
            }
            let e = entry(i, col);
            if !e.is_zero() {
                let term = e.mul(&minor(rows & !(1 << i), n, entry, memo, ctx));
                acc = if sign_negative { acc.sub(&term) } else { acc.add(&term) };
            }
            sign_negative = !sign_negative;
        }
        memo.insert(rows, acc.clone());
        acc
    }
    let all = if n == 0 { 0 } else { (1u32 << n) - 1 };
    Ok(minor(all, n, &entry, &mut memo, ctx))
}

type Dense = Vec<Vec<Elem>>;

fn dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn dense_mul(ctx: &FieldCtx, a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![Elem::ZERO; cols]; n];
    for i in 0..n {
        for j in 0..cols {
            let mut acc = Elem::ZERO;
            for l in 0..inner {
                acc = ctx.add(acc, ctx.mul(a[i][l], b[l][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

/// `m^k` by `k - 1` plain multiplications.
fn dense_pow(ctx: &FieldCtx, m: &Dense, k: u64) -> Dense {
    let n = m.len();
    let mut acc: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { Elem::ONE } else { Elem::ZERO }).collect()).collect();
    for _ in 0..k {
        acc = dense_mul(ctx, &acc, m);
    }
    acc
}

/// Row-by-row Gaussian elimination rank.
fn dense_rank(ctx: &FieldCtx, m: &Dense) -> usize {
    let mut rows = m.clone();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = ctx.inv(rows[rank][c]).expect("nonzero pivot");
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail {
            let factor = ctx.mul(row[c], inv);
            if factor.is_zero() {
                continue;
            }
            for (x, &y) in row[c..cols].iter_mut().zip(&pivot[c..cols]) {
                *x = ctx.sub(*x, ctx.mul(factor, y));
            }
        }
        rank += 1;
    }
    rank
}

/// Jordan type of a nilpotent matrix from its rank sequence: the number of
/// blocks of size at least `j` is `rank(N^(j-1)) - rank(N^j)`. Ascending.
pub fn jordan_type_ranks(nil: &Matrix) -> Result<Vec<usize>> {
    let ctx = nil.ctx();
    let n = nil.rows();
    let base = dense(nil);
    let mut ranks = vec![n];
    let mut power = base.clone();
    for _ in 0..n {
        let r = dense_rank(ctx, &power);
        ranks.push(r);
        if r == 0 {
            break;
        }
        power = dense_mul(ctx, &power, &base);
    }
    if *ranks.last().expect("nonempty") != 0 {
        return Err(Error::NotNilpotent);
    }
    // at_least[j] = blocks of size >= j
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut parts = Vec::new();
    for (j, &count) in at_least.iter().enumerate() {
        let next = at_least.get(j + 1).copied().unwrap_or(0);
        parts.extend(core::iter::repeat_n(j + 1, count - next));
    }
    Ok(parts)
}

/// Every `X^k` with `X` in `M_n(F_q)`, as a bitset over matrix codes
/// (row-major base-`q` digits).
#[derive(Clone, Debug)]
pub struct PowerTable {
    ctx: FieldCtx,
    n: usize,
    k: u64,
    bits: Vec<u64>,
    powers: Vec<u64>,
}

impl PowerTable {
    pub fn build(ctx: &FieldCtx, n: usize, k: u64, cap: u128) -> Result<Self> {
        let size = u128::from(ctx.q()).checked_pow((n * n) as u32).unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::BudgetExceeded { needed: size, cap });
        }
        let size = size as u64;
        let mut bits = vec![0u64; size.div_ceil(64) as usize];
        let mut powers = Vec::new();
        for code in 0..size {
            let x = Self::decode_with(ctx, n, code);
            let p = Self::encode_with(ctx, &dense_pow(ctx, &x, k));
            let (word, bit) = ((p / 64) as usize, p % 64);
            if bits[word] & (1 << bit) == 0 {
                bits[word] |= 1 << bit;
                powers.push(p);
            }
        }
        powers.sort_unstable();
        Ok(PowerTable { ctx: ctx.clone(), n, k, bits, powers })
    }

    fn decode_with(ctx: &FieldCtx, n: usize, mut code: u64) -> Dense {
        let q = u64::from(ctx.q());
        let mut out = vec![vec![Elem::ZERO; n]; n];
        for i in (0..n).rev() {
            for j in (0..n).rev() {
                out[i][j] = ctx.elem((code % q) as u32);
                code /= q;
            }
        }
        out
    }

    fn encode_with(ctx: &FieldCtx, m: &Dense) -> u64 {
        let q = u64::from(ctx.q());
        m.iter().flatten().fold(0u64, |acc, e| acc * q + u64::from(e.index()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Number of distinct `k`-th powers.
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    fn has(&self, code: u64) -> bool {
        self.bits[(code / 64) as usize] & (1 << (code % 64)) != 0
    }

    pub fn contains(&self, m: &Matrix) -> bool {
        m.rows() == self.n && self.has(Self::encode_with(&self.ctx, &dense(m)))
    }

    /// Whether `z = P + Q` for two `k`-th powers, by scanning `P`.
    pub fn is_sum_of_two(&self, z: &Matrix) -> bool {
        let ctx = &self.ctx;
        let zd = dense(z);
        self.powers.iter().any(|&p| {
            let pd = Self::decode_with(ctx, self.n, p);
            let w: Dense = zd.iter().zip(&pd).map(|(zr, pr)| zr.iter().zip(pr).map(|(&a, &b)| ctx.sub(a, b)).collect()).collect();
            self.has(Self::encode_with(ctx, &w))
        })
    }
}

/// `A^k + B^k = Z` with the oracle's own arithmetic.
pub fn independent_verify(z: &Matrix, a: &Matrix, b: &Matrix, k: u64) -> bool {
    let ctx = z.ctx();
    if a.rows() != z.rows() || b.rows() != z.rows() || a.ctx() != ctx || b.ctx() != ctx {
        return false;
    }
    let (pa, pb) = (dense_pow(ctx, &dense(a), k), dense_pow(ctx, &dense(b), k));
    let zd = dense(z);
    (0..z.rows()).all(|i| (0..z.rows()).all(|j| ctx.add(pa[i][j], pb[i][j]) == zd[i][j]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// One matrix the engine did not decompose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub z: Matrix,
    pub reason: String,
    /// Brute-force verdict where the power table was available.
    pub decomposable: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub q: u32,
    pub n: usize,
    pub k: u64,
    pub total: u64,
    pub engine_success: u64,
    /// Matrices checked by the brute-force oracle.
    pub bruteforce_checked: u64,
    /// Of those, how many are sums of two `k`-th powers.
    pub decomposable_by_bruteforce: u64,
    pub failures: Vec<Failure>,
    /// Engine results that fail [`independent_verify`]; must stay empty.
    pub unsound: Vec<Matrix>,
}

impl CoverageReport {
    /// Failures on matrices the oracle proved decomposable.
    pub fn known_gaps(&self) -> impl Iterator<Item = &Failure> {
        self.failures.iter().filter(|f| f.decomposable == Some(true))
    }

    /// Failures the oracle could not classify.
    pub fn unclassified(&self) -> impl Iterator<Item = &Failure> {
        self.failures.iter().filter(|f| f.decomposable.is_none())
    }
}

/// Options for [`coverage_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverageOptions {
    pub sampling: Sampling,
    /// Cap on `q^(n^2)` for building the power table.
    pub table_cap: u128,
    /// Run the brute-force check on every matrix (not only on failures)
    /// when `total * |powers|` stays below this.
    pub full_check_cap: u128,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions { sampling: Sampling::Exhaustive, table_cap: 2_000_000, full_check_cap: 50_000_000 }
    }
}

/// Runs the engine over all (or sampled) matrices in `M_n(F_q)` and compares
/// with brute force where the power table can be built.
pub fn coverage_report(engine: &mut Engine, ctx: &FieldCtx, n: usize, k: u64, opts: CoverageOptions) -> Result<CoverageReport> {
    let q = u64::from(ctx.q());
    let cells = (n * n) as u32;
    let space = u128::from(q).checked_pow(cells);
    let table = PowerTable::build(ctx, n, k, opts.table_cap).ok();
    let samples: Vec<u64> = match opts.sampling {
        Sampling::Exhaustive => {
            let space = space.filter(|&s| s <= u128::from(u32::MAX)).ok_or(Error::BudgetExceeded {
                needed: space.unwrap_or(u128::MAX),
                cap: u128::from(u32::MAX),
            })?;
            (0..space as u64).collect()
        }
        Sampling::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| rng.next_u64()).collect()
        }
    };
    let full_check = table.as_ref().is_some_and(|t| (samples.len() as u128) * (t.len() as u128) <= opts.full_check_cap);

    let mut report = CoverageReport {
        q: ctx.q(),
        n,
        k,
        total: samples.len() as u64,
        engine_success: 0,
        bruteforce_checked: 0,
        decomposable_by_bruteforce: 0,
        failures: Vec::new(),
        unsound: Vec::new(),
    };
    for raw in samples {
        let z = match opts.sampling {
            Sampling::Exhaustive => PowerTable::decode_with(ctx, n, raw),
            // independent uniform entries from the 64-bit draw stream
            Sampling::Random { .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(raw);
                (0..n).map(|_| (0..n).map(|_| ctx.elem((rng.next_u64() % q) as u32)).collect()).collect()
            }
        };
        let z = Matrix::from_rows(ctx, z)?;
        let outcome = engine.decompose(&z, k);
        let oracle = |t: &PowerTable| t.is_sum_of_two(&z);
        let verdict = if full_check || outcome.is_err() { table.as_ref().map(oracle) } else { None };
        if let Some(v) = verdict {
            report.bruteforce_checked += 1;
            report.decomposable_by_bruteforce += u64::from(v);
        }
        match outcome {
            Ok(d) => {
                if independent_verify(&z, &d.a, &d.b, k) {
                    report.engine_success += 1;
                } else {
                    report.unsound.push(z);
                }
            }
            Err(e) => report.failures.push(Failure { z, reason: e.to_string(), decomposable: verdict }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waring::Options;

    fn field(p: u64, m: u32) -> FieldCtx {
        FieldCtx::new(p, m).unwrap()
    }

    #[test]
    fn cofactor_examples() {
        let f = field(101, 1);
        let j = Matrix::jordan(&f, Elem::ZERO, 4);
        assert_eq!(charpoly_cofactor(&j).unwrap(), Poly::monomial(&f, Elem::ONE, 4));
        let (y1, y2, z1) = (f.elem(7), f.elem(11), f.elem(13));
        let b3 = crate::matrix::build_bn(&f, &[y1, y2], &[z1], 3).unwrap();
        assert_eq!(charpoly_cofactor(&b3).unwrap(), Poly::new(&f, vec![Elem::ZERO, f.mul(y1, z1), Elem::ONE, Elem::ONE]));
        assert!(matches!(charpoly_cofactor(&Matrix::identity(&f, 9)), Err(Error::TooLarge(_))));
        assert_eq!(charpoly_cofactor(&Matrix::identity(&f, 0)).unwrap(), Poly::one(&f));
    }

    #[test]
    fn rank_sequence_types() {
        let f = field(7, 1);
        let j6 = Matrix::jordan(&f, Elem::ZERO, 6).pow(3);
        assert_eq!(jordan_type_ranks(&j6).unwrap(), [2, 2, 2]);
        let j7 = Matrix::jordan(&f, Elem::ZERO, 7).pow(3);
        assert_eq!(jordan_type_ranks(&j7).unwrap(), [2, 2, 3]);
        assert_eq!(jordan_type_ranks(&Matrix::zeros(&f, 3, 3)).unwrap(), [1, 1, 1]);
        assert_eq!(jordan_type_ranks(&Matrix::identity(&f, 2)).unwrap_err(), Error::NotNilpotent);
    }

    #[test]
    fn power_table_membership() {
        let f3 = field(3, 1);
        let t = PowerTable::build(&f3, 1, 2, POWER_TABLE_CAP).unwrap();
        assert_eq!(t.len(), 2);
        for x in f3.elements() {
            assert!(t.is_sum_of_two(&Matrix::scalar(&f3, 1, x)));
        }
        let t2 = PowerTable::build(&f3, 2, 2, POWER_TABLE_CAP).unwrap();
        assert!(!t2.contains(&Matrix::jordan(&f3, Elem::ZERO, 2)));
        assert!(t2.contains(&Matrix::identity(&f3, 2)));
        assert!(matches!(PowerTable::build(&field(13, 1), 3, 2, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn coverage_small_cases() {
        let mut engine = Engine::new(Options::default());
        let f3 = field(3, 1);
        let r = coverage_report(&mut engine, &f3, 1, 2, CoverageOptions::default()).unwrap();
        assert_eq!((r.total, r.engine_success, r.decomposable_by_bruteforce), (3, 3, 3));

        let f2 = field(2, 1);
        let r = coverage_report(&mut engine, &f2, 2, 2, CoverageOptions::default()).unwrap();
        assert_eq!(r.total, 16);
        assert_eq!(r.bruteforce_checked, 16);
        assert!(r.unsound.is_empty());
        assert_eq!(r.known_gaps().count(), 0);
        assert_eq!(r.engine_success, r.decomposable_by_bruteforce);

        let f5 = field(5, 1);
        let r = coverage_report(&mut engine, &f5, 2, 1, CoverageOptions::default()).unwrap();
        assert_eq!(r.engine_success, r.total);
    }
}
