//! Decomposition of square matrices over `F_q` as `A^k + B^k`.
//!
//! The engine brings `Z` to generalized Jordan form, decomposes every block
//! `J_{f,r}` on its own and conjugates the direct sum back. Blocks with a
//! nonlinear `f` are handled over `F_q[t]/(f)` as `J_{alpha,r}` and embedded
//! back. The per-block constructions are
//!
//! * nonzero eigenvalue, `r >= 2`: a bidiagonal split `G + H` built from two
//!   solutions of `x^k + y^k = lambda`, both summands diagonalizable;
//! * nilpotent, `r >= 2k`: a nilpotent split from the Jordan type of `J_{0,r}^k`
//!   (works in every characteristic);
//! * nilpotent, `3 <= r`, odd characteristic: a companion-type matrix with
//!   prescribed eigenvalues plus a `B_n`-type matrix, both diagonalizable;
//! * anything else: a search, structured for `2 × 2` blocks and
//!   table-driven or seeded-random for larger ones under a budget.
//!
//! Blocks that fail on their own are searched again jointly, together with
//! as many solved blocks as needed.
//!
//! Every result is checked with [`verify`] before it is returned.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::rc::Rc;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::canon::{
    diagonalize_distinct, generalized_jordan, nilpotent_block_matrix, nilpotent_jordan, regular_nilpotent_conjugator,
    Conjugator, ExtensionCtx, GjBlock,
};
use crate::diageq::{find_special_solution, find_two_var_pair, Constraints, SpecialTuple, TwoVarPair};
use crate::gf::{gcd, Elem, FieldCtx};
use crate::matrix::{build_bn, Matrix};
use crate::poly::Poly;
use crate::{Error, Result};

/// Default budget for fallback searches, in candidate-times-`n^3` units.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    ScalarSearch,
    PrimitiveJordan,
    NilpotentSemisimple,
    NilpotentNilpotent,
    BlockAssembly,
    ExhaustiveFallback,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ScalarSearch,
        Method::PrimitiveJordan,
        Method::NilpotentSemisimple,
        Method::NilpotentNilpotent,
        Method::BlockAssembly,
        Method::ExhaustiveFallback,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::ScalarSearch => "scalar-search",
            Method::PrimitiveJordan => "primitive-jordan",
            Method::NilpotentSemisimple => "nilpotent-semisimple",
            Method::NilpotentNilpotent => "nilpotent-nilpotent",
            Method::BlockAssembly => "block-assembly",
            Method::ExhaustiveFallback => "exhaustive-fallback",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.tag() == tag)
    }
}

/// How one generalized Jordan block, or a group of blocks that could not be
/// split one by one, was split. `a` and `b` are the summands in the
/// coordinates of the (reordered) canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    /// Indices of the covered blocks in canonical order.
    pub blocks: Vec<usize>,
    pub parts: Vec<GjBlock>,
    /// First row of the entry inside the reordered canonical form.
    pub offset: usize,
    pub method: Method,
    pub a: Matrix,
    pub b: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub a: Matrix,
    pub b: Matrix,
    pub k: u64,
    pub method: Method,
    pub trail: Vec<TrailEntry>,
    /// `P` with `P Z P^{-1}` a direct sum of generalized Jordan blocks in
    /// trail order; `A = P^{-1} (⊕ a_i) P`.
    pub conj: Conjugator,
}

/// `A^k + B^k = Z`, checked by direct multiplication.
pub fn verify(z: &Matrix, a: &Matrix, b: &Matrix, k: u64) -> Result<bool> {
    for m in [a, b] {
        if m.ctx() != z.ctx() {
            return Err(Error::ContextMismatch);
        }
        if m.rows() != z.rows() || m.cols() != z.cols() || !z.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Z is {}x{}, summand is {}x{}",
                z.rows(),
                z.cols(),
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(a.pow(k).try_add(&b.pow(k))? == *z)
}

fn ensure(z: &Matrix, a: &Matrix, b: &Matrix, k: u64, what: &str) -> Result<()> {
    if verify(z, a, b, k)? {
        Ok(())
    } else {
        Err(Error::Internal(format!("{what}: A^k + B^k != Z")))
    }
}

/// `(a, b)` with `a^k + b^k = z`: the first `s` in the `k`-th power set (by
/// index) with `z - s` also a `k`-th power, and the smallest roots.
pub fn decompose_scalar(ctx: &FieldCtx, z: Elem, k: u64) -> Result<(Elem, Elem)> {
    for s in ctx.kth_power_set(k) {
        let t = ctx.sub(z, s);
        if ctx.is_kth_power(t, k) {
            let a = ctx.kth_root(s, k).expect("k-th power");
            let b = ctx.kth_root(t, k).expect("k-th power");
            return Ok((a, b));
        }
    }
    Err(Error::NotFound { exhaustive: true })
}

/// `R` with `R^k = M`, for `M` with the pairwise distinct eigenvalues
/// `roots[i]^k`: `R = P^{-1} diag(roots) P` where `P` diagonalizes `M`.
pub fn kth_root_semisimple(m: &Matrix, roots: &[Elem], k: u64) -> Result<Matrix> {
    let ctx = m.ctx();
    let eigenvalues: Vec<Elem> = roots.iter().map(|&a| ctx.pow(a, k)).collect();
    let conj = diagonalize_distinct(m, &eigenvalues)?;
    let r = conj.unapply(&Matrix::diag(ctx, roots));
    if r.pow(k) != *m {
        return Err(Error::Internal("semisimple root does not reproduce M".into()));
    }
    Ok(r)
}

/// Part sizes of the Jordan type of `J_{0,n}^k` and the split positions of
/// the matching junction matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentPlan {
    pub n: usize,
    pub k: usize,
    /// `n mod k`.
    pub m: usize,
    /// `k - m` copies of `n / k` followed by `m` copies of `n / k + 1`.
    pub parts: Vec<usize>,
    /// Partial sums `n_1, n_1 + n_2, ...` (one-based rows of the junction entries).
    pub splits: Vec<usize>,
}

impl NilpotentPlan {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n < k {
            return Err(Error::PreconditionViolated(format!("plan needs 1 <= k <= n (n={n}, k={k})")));
        }
        let m = n % k;
        let mut parts = vec![n / k; k - m];
        parts.extend(core::iter::repeat_n(n / k + 1, m));
        let splits = parts
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .take(parts.len() - 1)
            .collect();
        Ok(NilpotentPlan { n, k, m, parts, splits })
    }

    /// `⊕ J_{0,n_i}`.
    pub fn block_matrix(&self, ctx: &FieldCtx) -> Matrix {
        nilpotent_block_matrix(ctx, &self.parts)
    }

    /// `sum e_{s,s+1}` over the split positions.
    pub fn junction(&self, ctx: &FieldCtx) -> Matrix {
        junction_matrix(ctx, &self.parts)
    }
}

/// The junction matrix of a composition of `n`: `J_{0,n} - ⊕ J_{0,n_i}`.
pub fn junction_matrix(ctx: &FieldCtx, parts: &[usize]) -> Matrix {
    let n: usize = parts.iter().sum();
    let mut m = Matrix::zeros(ctx, n, n);
    let mut s = 0;
    for &p in &parts[..parts.len().saturating_sub(1)] {
        s += p;
        m[(s - 1, s)] = Elem::ONE;
    }
    m
}

/// Nilpotent `k`-th roots of the two summands of `J_{0,n} = A + junction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentCert {
    pub plan: NilpotentPlan,
    /// `⊕ J_{0,n_i}`.
    pub a: Matrix,
    pub junction: Matrix,
    /// `root_a^k = a`.
    pub root_a: Matrix,
    /// `root_junction^k = junction`.
    pub root_junction: Matrix,
}

/// Splits `J_{0,n}`, `n >= 2k`, into two `k`-th powers of nilpotent matrices.
///
/// `A = ⊕ J_{0,n_i}` is conjugate to `J_{0,n}^k`, so conjugating `J_{0,n}`
/// gives its root. The junction has `k - 1` isolated unit entries; a
/// permutation brings it to `0 ⊕ ... ⊕ J_{0,2}^{⊕(k-1)}`, which is conjugate
/// to the `k`-th power of `0 ⊕ ... ⊕ J_{0,2k-1}`.
pub fn decompose_nilpotent_nilpotent(ctx: &FieldCtx, n: usize, k: u64) -> Result<NilpotentCert> {
    let ku = usize::try_from(k).unwrap_or(usize::MAX);
    if k < 2 || n < 2 * ku {
        return Err(Error::PreconditionViolated(format!("nilpotent split needs k >= 2 and n >= 2k (n={n}, k={k})")));
    }
    let plan = NilpotentPlan::new(n, ku)?;
    let shift = Matrix::jordan(ctx, Elem::ZERO, n);
    let a = plan.block_matrix(ctx);
    let junction = plan.junction(ctx);

    let power_type = nilpotent_jordan(&shift.pow(k))?;
    if power_type.partition != plan.parts {
        return Err(Error::Internal("Jordan type of J^k differs from the plan".into()));
    }
    let root_a = power_type.conj.apply(&shift);

    // Non-pair coordinates first, then the pairs (s, s+1) at each split.
    let paired: Vec<usize> = plan.splits.iter().flat_map(|&s| [s - 1, s]).collect();
    let order: Vec<usize> = (0..n).filter(|i| !paired.contains(i)).chain(paired.iter().copied()).collect();
    let mut perm = Matrix::zeros(ctx, n, n);
    for (row, &col) in order.iter().enumerate() {
        perm[(row, col)] = Elem::ONE;
    }
    let reorder = Conjugator { p: perm.clone(), p_inv: perm.transpose() };
    let singles = n - 2 * (ku - 1);
    let mut target_parts = vec![1; singles];
    target_parts.extend(vec![2; ku - 1]);
    if reorder.apply(&junction) != nilpotent_block_matrix(ctx, &target_parts) {
        return Err(Error::Internal("junction reordering failed".into()));
    }

    let mut seed_parts = vec![1; n - (2 * ku - 1)];
    seed_parts.push(2 * ku - 1);
    let seed = nilpotent_block_matrix(ctx, &seed_parts);
    let seed_type = nilpotent_jordan(&seed.pow(k))?;
    if seed_type.partition != target_parts {
        return Err(Error::Internal("Jordan type of the seed power differs from the junction".into()));
    }
    let root_junction = reorder.unapply(&seed_type.conj.apply(&seed));

    if root_a.pow(k) != a || root_junction.pow(k) != junction || &a + &junction != shift {
        return Err(Error::Internal("nilpotent split does not reproduce J_{0,n}".into()));
    }
    if !root_a.pow(n as u64).is_zero() || !root_junction.pow(n as u64).is_zero() {
        return Err(Error::Internal("nilpotent roots are not nilpotent".into()));
    }
    Ok(NilpotentCert { plan, a, junction, root_a, root_junction })
}

/// The bidiagonal matrices `G_n`, `H_n` with `G_n + H_n = J_{lambda,n}` built
/// from a pair `(a,b)`, `(c,d)`: `G_n` has diagonal `a^k, c^k, a^k, ...` with
/// ones at `(1,2), (3,4), ...`; `H_n` has diagonal `b^k, d^k, b^k, ...` with
/// ones at `(2,3), (4,5), ...`.
pub fn build_gh(ctx: &FieldCtx, pair: &TwoVarPair, n: usize) -> (Matrix, Matrix) {
    let k = pair.k;
    let (a, b) = pair.first;
    let (c, d) = pair.second;
    let (ak, bk, ck, dk) = (ctx.pow(a, k), ctx.pow(b, k), ctx.pow(c, k), ctx.pow(d, k));
    let mut g = Matrix::zeros(ctx, n, n);
    let mut h = Matrix::zeros(ctx, n, n);
    for i in 0..n {
        let even = i % 2 == 0;
        g[(i, i)] = if even { ak } else { ck };
        h[(i, i)] = if even { bk } else { dk };
        if i + 1 < n {
            if even {
                g[(i, i + 1)] = Elem::ONE;
            } else {
                h[(i, i + 1)] = Elem::ONE;
            }
        }
    }
    (g, h)
}

/// `k`-th root of a block diagonal of `2 × 2` upper triangular blocks with
/// distinct eigenvalues and `1 × 1` blocks, given the diagonal roots.
fn bidiagonal_root(m: &Matrix, roots: &[Elem], first_pair_at: usize, k: u64) -> Result<Matrix> {
    let ctx = m.ctx();
    let n = m.n();
    let mut out = Matrix::zeros(ctx, n, n);
    let mut i = 0;
    while i < n {
        let size = if i >= first_pair_at && (i - first_pair_at).is_multiple_of(2) && i + 1 < n { 2 } else { 1 };
        let block = m.submatrix(i, i, size, size);
        let root = kth_root_semisimple(&block, &roots[i..i + size], k)?;
        out.set_block(i, i, &root);
        i += size;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveCert {
    pub pair: TwoVarPair,
    pub g: Matrix,
    pub h: Matrix,
    /// `root_g^k = g`.
    pub root_g: Matrix,
    /// `root_h^k = h`.
    pub root_h: Matrix,
}

/// Splits `J_{lambda,n}` for a given pair of two-variable solutions.
pub fn decompose_primitive_jordan_with(ctx: &FieldCtx, pair: &TwoVarPair, n: usize) -> Result<PrimitiveCert> {
    if !pair.check(ctx) {
        return Err(Error::PreconditionViolated("pair does not satisfy its defining equations".into()));
    }
    let (g, h) = build_gh(ctx, pair, n);
    let (a, b) = pair.first;
    let (c, d) = pair.second;
    let g_roots: Vec<Elem> = (0..n).map(|i| if i % 2 == 0 { a } else { c }).collect();
    let h_roots: Vec<Elem> = (0..n).map(|i| if i % 2 == 0 { b } else { d }).collect();
    let root_g = bidiagonal_root(&g, &g_roots, 0, pair.k)?;
    let root_h = bidiagonal_root(&h, &h_roots, 1, pair.k)?;
    ensure(&Matrix::jordan(ctx, pair.lambda, n), &root_g, &root_h, pair.k, "primitive-jordan")?;
    Ok(PrimitiveCert { pair: *pair, g, h, root_g, root_h })
}

/// Splits `J_{lambda,n}`, `lambda != 0`, into two diagonalizable `k`-th powers.
pub fn decompose_primitive_jordan(ctx: &FieldCtx, lambda: Elem, n: usize, k: u64) -> Result<PrimitiveCert> {
    if lambda.is_zero() || n == 0 {
        return Err(Error::PreconditionViolated("needs lambda != 0 and n >= 1".into()));
    }
    let pair = find_two_var_pair(ctx, k, lambda).map_err(|e| match e {
        Error::NotFound { exhaustive } => Error::PairNotFound { exhaustive },
        other => other,
    })?;
    decompose_primitive_jordan_with(ctx, &pair, n)
}

/// Data of the semisimple split of `J_{0,n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemisimpleCert {
    /// Nonzero, distinct `k`-th powers summing to one.
    pub alphas: SpecialTuple,
    /// `n - 1` nonzero, distinct `k`-th powers summing to minus one.
    pub betas: SpecialTuple,
    /// Last row of `A_n` (without the final one).
    pub y: Vec<Elem>,
    /// Last column of `B_n` above the zero.
    pub z: Vec<Elem>,
    /// Elementary symmetric values `s_1, ..., s_{n-1}` of the `beta_i^k`.
    pub s: Vec<Elem>,
    pub a_n: Matrix,
    pub b_n: Matrix,
    /// `P` with `P (A_n + B_n) P^{-1} = J_{0,n}`.
    pub conj: Conjugator,
    /// Final summand roots: `root_a^k + root_b^k = J_{0,n}`.
    pub root_a: Matrix,
    pub root_b: Matrix,
}

/// `A_n`: ones on the superdiagonal and last row `(y_1, ..., y_{n-1}, 1)`.
pub fn build_an(ctx: &FieldCtx, y: &[Elem]) -> Matrix {
    let n = y.len() + 1;
    let mut m = Matrix::jordan(ctx, Elem::ZERO, n);
    for (j, &yj) in y.iter().enumerate() {
        m[(n - 1, j)] = yj;
    }
    m[(n - 1, n - 1)] = Elem::ONE;
    m
}

/// Splits `J_{0,n}`, `n >= 3`, odd characteristic, into two diagonalizable
/// `k`-th powers with eigenvalues taken from special solutions of
/// `x_1^k + ... + x_n^k = 1` and `x_1^k + ... + x_{n-1}^k = -1`.
pub fn decompose_nilpotent_semisimple(ctx: &FieldCtx, n: usize, k: u64, seed: u64) -> Result<SemisimpleCert> {
    if ctx.p() == 2 {
        return Err(Error::CharTwo);
    }
    if n < 3 {
        return Err(Error::PreconditionViolated(format!("semisimple split needs n >= 3 (n={n})")));
    }
    let special = |count: usize, lambda: Elem| {
        find_special_solution(ctx, k, count, lambda, Constraints::BOTH, seed).map_err(|e| match e {
            Error::NotFound { exhaustive } => Error::SpecialSolutionNotFound { n: count, exhaustive },
            other => other,
        })
    };
    let alphas = special(n, Elem::ONE)?;
    let betas = special(n - 1, ctx.neg(Elem::ONE))?;

    let alpha_poly = Poly::from_roots(ctx, &alphas.powers(ctx));
    let y: Vec<Elem> = (0..n - 1).map(|j| ctx.neg(alpha_poly.coeff(j))).collect();
    let a_n = build_an(ctx, &y);

    let beta_powers = betas.powers(ctx);
    let beta_poly = Poly::from_roots(ctx, &beta_powers);
    let target = beta_poly.mul(&Poly::t(ctx));
    // coefficient of t^(n-1-j) in charpoly(B_n) is sum_i y_i z_{i+j-1}, j = 1..n-2
    let size = n - 2;
    let mut system = Matrix::zeros(ctx, size, size);
    let mut rhs = Vec::with_capacity(size);
    for j in 1..=size {
        for l in j..=size {
            system[(j - 1, l - 1)] = y[l - j];
        }
        rhs.push(target.coeff(n - 1 - j));
    }
    let z = system.solve(&rhs).map_err(|_| Error::Internal("B_n system is singular".into()))?;
    let b_n = build_bn(ctx, &y, &z, n)?;
    if a_n.charpoly() != alpha_poly || b_n.charpoly() != target {
        return Err(Error::Internal("A_n or B_n has the wrong characteristic polynomial".into()));
    }
    let s: Vec<Elem> = (1..n)
        .map(|i| {
            let c = beta_poly.coeff(n - 1 - i);
            if i % 2 == 0 {
                c
            } else {
                ctx.neg(c)
            }
        })
        .collect();

    let root_a_n = kth_root_semisimple(&a_n, &alphas.xs, k)?;
    let mut b_roots = vec![Elem::ZERO];
    b_roots.extend(&betas.xs);
    let root_b_n = kth_root_semisimple(&b_n, &b_roots, k)?;
    let conj = regular_nilpotent_conjugator(&(&a_n + &b_n))?;
    let root_a = conj.apply(&root_a_n);
    let root_b = conj.apply(&root_b_n);
    ensure(&Matrix::jordan(ctx, Elem::ZERO, n), &root_a, &root_b, k, "nilpotent-semisimple")?;
    Ok(SemisimpleCert { alphas, betas, y, z, s, a_n, b_n, conj, root_a, root_b })
}

/// `Y` with `Y^k = W` for a `2 × 2` matrix `W`, or `None` when `W` is not a
/// `k`-th power. The test is complete: any root commutes with `W`, so for
/// non-scalar `W` it lies in `F_q[W]`.
pub fn kth_root_2x2(w: &Matrix, k: u64, scalar_roots: &ScalarRoots) -> Option<Matrix> {
    let ctx = w.ctx();
    let id = Matrix::identity(ctx, 2);
    let cp = w.charpoly();
    let roots = cp.roots();
    let q = u64::from(ctx.q());
    match roots.len() {
        2 => {
            let (r0, r1) = (ctx.kth_root(roots[0], k)?, ctx.kth_root(roots[1], k)?);
            kth_root_semisimple(w, &[r0, r1], k).ok()
        }
        0 => {
            // irreducible: W is a k-th power iff its eigenvalue is one in F_{q^2}
            let group = q * q - 1;
            if w.pow(group / gcd(k, group)) != id {
                return None;
            }
            for a in ctx.elements() {
                for b in ctx.elements().skip(1) {
                    let y = &Matrix::scalar(ctx, 2, a) + &w.scale(b);
                    if y.pow(k) == *w {
                        return Some(y);
                    }
                }
            }
            None
        }
        _ => {
            let mu = roots[0];
            let nil = w - &Matrix::scalar(ctx, 2, mu);
            if nil.is_zero() {
                return scalar_roots.get(mu);
            }
            if k == 1 {
                return Some(w.clone());
            }
            // roots are a I + b N with a^k = mu and k a^(k-1) b = 1
            let p = u64::from(ctx.p());
            if mu.is_zero() || k.is_multiple_of(p) {
                return None;
            }
            let a = ctx.kth_root(mu, k)?;
            let b = ctx.inv(ctx.mul(ctx.from_int((k % p) as i64), ctx.pow(a, k - 1))).ok()?;
            let y = &Matrix::scalar(ctx, 2, a) + &nil.scale(b);
            (y.pow(k) == *w).then_some(y)
        }
    }
}

/// For each `mu`, a `2 × 2` matrix `Y` with `Y^k = mu I`, if any. Scalars
/// `a I` cover the `k`-th powers; the other targets need a companion matrix
/// of an irreducible quadratic, found by a scan built on first use.
#[derive(Debug)]
pub struct ScalarRoots {
    ctx: FieldCtx,
    k: u64,
    budget: u128,
    companions: OnceCell<Vec<Option<Matrix>>>,
}

impl ScalarRoots {
    pub fn new(ctx: &FieldCtx, k: u64, budget: u128) -> Self {
        ScalarRoots { ctx: ctx.clone(), k, budget, companions: OnceCell::new() }
    }

    pub fn get(&self, mu: Elem) -> Option<Matrix> {
        let ctx = &self.ctx;
        if let Some(a) = ctx.kth_root(mu, self.k) {
            return Some(Matrix::scalar(ctx, 2, a));
        }
        let q = u128::from(ctx.q());
        if q * q * 8 > self.budget {
            return None;
        }
        let table = self.companions.get_or_init(|| {
            let mut table: Vec<Option<Matrix>> = vec![None; ctx.q() as usize];
            for c in ctx.elements() {
                for d in ctx.elements() {
                    let g = Poly::new(ctx, vec![d, c, Elem::ONE]);
                    if !g.roots().is_empty() {
                        continue;
                    }
                    let comp = Matrix::companion(&g).expect("monic");
                    let p = comp.pow(self.k);
                    let value = p[(0, 0)];
                    if p == Matrix::scalar(ctx, 2, value) && table[value.index() as usize].is_none() {
                        table[value.index() as usize] = Some(comp);
                    }
                }
            }
            table
        });
        table[mu.index() as usize].clone()
    }
}

/// Sorted table of `(code(X^k), code(X))` over all `X` in `M_n(F_q)`, keeping
/// the smallest `X` per power.
#[derive(Clone, Debug)]
struct PowerList {
    entries: Vec<(u64, u64)>,
}

fn encode(m: &Matrix) -> u64 {
    let q = u64::from(m.ctx().q());
    m.entries().iter().fold(0u64, |acc, e| acc * q + u64::from(e.index()))
}

fn decode(ctx: &FieldCtx, n: usize, mut code: u64) -> Matrix {
    let q = u64::from(ctx.q());
    let mut entries = vec![Elem::ZERO; n * n];
    for slot in entries.iter_mut().rev() {
        *slot = ctx.elem((code % q) as u32);
        code /= q;
    }
    let rows = entries.chunks(n).map(<[Elem]>::to_vec).collect();
    Matrix::from_rows(ctx, rows).expect("square")
}

fn table_cost(ctx: &FieldCtx, n: usize) -> Option<u128> {
    let cells = u32::try_from(n * n).ok()?;
    u128::from(ctx.q()).checked_pow(cells)?.checked_mul((n * n * n) as u128)
}

impl PowerList {
    fn build(ctx: &FieldCtx, n: usize, k: u64) -> Self {
        let total = u64::from(ctx.q()).pow((n * n) as u32);
        let mut entries: Vec<(u64, u64)> = (0..total).map(|code| (encode(&decode(ctx, n, code).pow(k)), code)).collect();
        entries.sort_unstable();
        entries.dedup_by_key(|e| e.0);
        PowerList { entries }
    }

    fn root_of(&self, code: u64) -> Option<u64> {
        self.entries.binary_search_by_key(&code, |e| e.0).ok().map(|i| self.entries[i].1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Seed for factorization and randomized special-solution search.
    pub seed: u64,
    /// Cap for fallback searches.
    pub budget: u128,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 0, budget: DEFAULT_BUDGET }
    }
}

type FieldKey = (u32, Vec<u32>);

/// Decomposition engine with caches for extension fields and search tables.
/// Results depend only on the input, `k` and the options.
#[derive(Debug, Default)]
pub struct Engine {
    opts: Options,
    extensions: BTreeMap<(FieldKey, Vec<u32>), ExtensionCtx>,
    scalar_roots: BTreeMap<(FieldKey, u64), Rc<ScalarRoots>>,
    power_lists: BTreeMap<(FieldKey, usize, u64), Arc<PowerList>>,
}

fn field_key(ctx: &FieldCtx) -> FieldKey {
    (ctx.p(), ctx.modulus().to_vec())
}

impl Engine {
    pub fn new(opts: Options) -> Self {
        Engine { opts, ..Engine::default() }
    }

    pub fn options(&self) -> Options {
        self.opts
    }

    pub fn decompose(&mut self, z: &Matrix, k: u64) -> Result<Decomposition> {
        if !z.is_square() {
            return Err(Error::DimensionMismatch("decompose needs a square matrix".into()));
        }
        if k == 0 {
            return Err(Error::PreconditionViolated("k must be at least 1".into()));
        }
        let ctx = z.ctx();
        let n = z.n();
        if k == 1 || n == 0 {
            let b = Matrix::zeros(ctx, n, n);
            return Ok(Decomposition {
                a: z.clone(),
                b,
                k,
                method: Method::BlockAssembly,
                trail: Vec::new(),
                conj: Conjugator::identity(ctx, n),
            });
        }
        let form = generalized_jordan(z, self.opts.seed)?;
        let mut solved = Vec::with_capacity(form.blocks.len());
        let mut first_failure = None;
        for (index, block) in form.blocks.iter().enumerate() {
            match self.decompose_block(&block.f, block.r, k) {
                Ok(found) => solved.push(Some(found)),
                Err(e) => {
                    first_failure.get_or_insert((index, e.to_string()));
                    solved.push(None);
                }
            }
        }
        let mut group: Vec<usize> = (0..solved.len()).filter(|&i| solved[i].is_none()).collect();
        let mut merged = None;
        if let Some((block, reason)) = first_failure {
            // blocks that fail alone are searched together, adding the
            // smallest solved blocks until the search succeeds
            let mut spare: Vec<usize> = (0..solved.len()).filter(|&i| solved[i].is_some()).collect();
            spare.sort_by_key(|&i| (form.blocks[i].dim(), i));
            let mut spare = spare.into_iter();
            loop {
                group.sort_unstable();
                let w = Matrix::block_diag(ctx, group.iter().map(|&i| form.blocks[i].matrix()).collect::<Vec<_>>().iter());
                match self.fallback(&w, k) {
                    Ok(found) => {
                        merged = Some(found);
                        break;
                    }
                    Err(e) => match spare.next() {
                        Some(i) => group.push(i),
                        None => return Err(Error::NotDecomposed { block, reason: format!("{reason}; joint search: {e}") }),
                    },
                }
            }
        }

        // solved blocks first in canonical order, then the jointly searched group
        let order: Vec<usize> =
            (0..form.blocks.len()).filter(|i| !group.contains(i)).chain(group.iter().copied()).collect();
        let mut starts = Vec::with_capacity(form.blocks.len());
        let mut offset = 0;
        for block in &form.blocks {
            starts.push(offset);
            offset += block.dim();
        }
        let mut perm = Matrix::zeros(ctx, n, n);
        let mut row = 0;
        for &i in &order {
            for j in 0..form.blocks[i].dim() {
                perm[(row, starts[i] + j)] = Elem::ONE;
                row += 1;
            }
        }
        let conj = form.conj.then(&Conjugator { p: perm.clone(), p_inv: perm.transpose() });

        let mut trail = Vec::with_capacity(order.len());
        let mut offset = 0;
        for &i in order.iter().filter(|i| !group.contains(i)) {
            let (a, b, method) = solved[i].take().expect("solved block");
            trail.push(TrailEntry { blocks: vec![i], parts: vec![form.blocks[i].clone()], offset, method, a, b });
            offset += form.blocks[i].dim();
        }
        if let Some((a, b)) = merged {
            let parts = group.iter().map(|&i| form.blocks[i].clone()).collect();
            trail.push(TrailEntry { blocks: group, parts, offset, method: Method::ExhaustiveFallback, a, b });
        }
        let a = conj.unapply(&Matrix::block_diag(ctx, trail.iter().map(|t| &t.a)));
        let b = conj.unapply(&Matrix::block_diag(ctx, trail.iter().map(|t| &t.b)));
        let method = match trail.as_slice() {
            [single] => single.method,
            _ => Method::BlockAssembly,
        };
        ensure(z, &a, &b, k, "decompose")?;
        Ok(Decomposition { a, b, k, method, trail, conj })
    }

    /// Summands for `J_{f,r}` over the field of `f`.
    pub fn decompose_block(&mut self, f: &Poly, r: usize, k: u64) -> Result<(Matrix, Matrix, Method)> {
        let ctx = f.ctx();
        let e = f.degree().unwrap_or(0);
        if e == 1 {
            return self.decompose_linear_block(ctx, ctx.neg(f.coeff(0)), r, k);
        }
        let primary = self.extension(f).and_then(|ext| {
            let (a, b, method) = self.decompose_linear_block(ext.ext(), ext.alpha(), r, k)?;
            Ok((ext.embed_ext(&a)?, ext.embed_ext(&b)?, method))
        });
        match primary {
            Ok(found) => Ok(found),
            Err(first) => {
                let z = Matrix::generalized_jordan_block(f, r)?;
                self.fallback(&z, k)
                    .map(|(a, b)| (a, b, Method::ExhaustiveFallback))
                    .map_err(|second| Error::PreconditionViolated(format!("{first}; fallback: {second}")))
            }
        }
    }

    /// Summands for `J_{lambda,r}` over `ctx`.
    fn decompose_linear_block(&mut self, ctx: &FieldCtx, lambda: Elem, r: usize, k: u64) -> Result<(Matrix, Matrix, Method)> {
        if r == 1 {
            let (a, b) = decompose_scalar(ctx, lambda, k)?;
            return Ok((Matrix::scalar(ctx, 1, a), Matrix::scalar(ctx, 1, b), Method::ScalarSearch));
        }
        let ku = usize::try_from(k).unwrap_or(usize::MAX);
        let primary: Result<(Matrix, Matrix, Method)> = if lambda.is_zero() {
            if r >= ku.saturating_mul(2) {
                decompose_nilpotent_nilpotent(ctx, r, k).map(|c| (c.root_a, c.root_junction, Method::NilpotentNilpotent))
            } else if ctx.p() != 2 && r >= 3 {
                decompose_nilpotent_semisimple(ctx, r, k, self.opts.seed)
                    .map(|c| (c.root_a, c.root_b, Method::NilpotentSemisimple))
            } else {
                Err(Error::PreconditionViolated("no construction applies".into()))
            }
        } else {
            decompose_primitive_jordan(ctx, lambda, r, k).map(|c| (c.root_g, c.root_h, Method::PrimitiveJordan))
        };
        match primary {
            Ok(found) => Ok(found),
            Err(first) => {
                let z = Matrix::jordan(ctx, lambda, r);
                self.fallback(&z, k)
                    .map(|(a, b)| (a, b, Method::ExhaustiveFallback))
                    .map_err(|second| Error::PreconditionViolated(format!("{first}; fallback: {second}")))
            }
        }
    }

    fn extension(&mut self, f: &Poly) -> Result<ExtensionCtx> {
        let key = (field_key(f.ctx()), f.indices());
        if let Some(ext) = self.extensions.get(&key) {
            return Ok(ext.clone());
        }
        let ext = ExtensionCtx::new(f)?;
        self.extensions.insert(key, ext.clone());
        Ok(ext)
    }

    /// `Y` with `Y^k = W` when `W` has a squarefree characteristic
    /// polynomial. Such a `W` is cyclic, so its roots lie in
    /// `F_q[W] = ⊕ F_q[t]/(f_i)` and exist iff every `t mod f_i` is a `k`-th
    /// power; `None` means no root or `W` not squarefree.
    pub fn kth_root_cyclic(&mut self, w: &Matrix, k: u64) -> Option<Matrix> {
        let ctx = w.ctx();
        let chi = w.charpoly();
        if !chi.gcd(&chi.derivative()).is_one() {
            return None;
        }
        let form = generalized_jordan(w, self.opts.seed).ok()?;
        let mut roots = Vec::with_capacity(form.blocks.len());
        for block in &form.blocks {
            if block.f.degree() == Some(1) {
                let root = ctx.kth_root(ctx.neg(block.f.coeff(0)), k)?;
                roots.push(Matrix::scalar(ctx, 1, root));
            } else {
                let ext = self.extension(&block.f).ok()?;
                let root = ext.ext().kth_root(ext.alpha(), k)?;
                roots.push(ext.embed_ext(&Matrix::scalar(ext.ext(), 1, root)).ok()?);
            }
        }
        let y = form.conj.unapply(&Matrix::block_diag(ctx, roots.iter()));
        (y.pow(k) == *w).then_some(y)
    }

    /// Seeded search for `X` with `Z - X^k` a cyclic `k`-th power: `X = 0`,
    /// then scalars, then uniform random matrices, within the budget.
    fn random_search(&mut self, z: &Matrix, k: u64) -> Result<(Matrix, Matrix)> {
        let ctx = z.ctx();
        let n = z.n();
        let cost = 64 * (n as u128).pow(3);
        let tries = self.opts.budget / cost;
        if tries == 0 {
            return Err(Error::BudgetExceeded { needed: cost, cap: self.opts.budget });
        }
        let q = ctx.q();
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        for attempt in 0..tries {
            let x = match attempt {
                0 => Matrix::zeros(ctx, n, n),
                a if a <= u128::from(q) => Matrix::scalar(ctx, n, ctx.elem((a - 1) as u32)),
                _ => {
                    let rows = (0..n).map(|_| (0..n).map(|_| ctx.elem((rng.next_u64() % u64::from(q)) as u32)).collect());
                    Matrix::from_rows(ctx, rows.collect())?
                }
            };
            let w = z - &x.pow(k);
            if let Some(y) = self.kth_root_cyclic(&w, k) {
                return Ok((x, y));
            }
        }
        Err(Error::NotFound { exhaustive: false })
    }

    fn scalar_roots(&mut self, ctx: &FieldCtx, k: u64) -> Rc<ScalarRoots> {
        let budget = self.opts.budget;
        self.scalar_roots.entry((field_key(ctx), k)).or_insert_with(|| Rc::new(ScalarRoots::new(ctx, k, budget))).clone()
    }

    /// Search for `A`, `B` with `A^k + B^k = Z`. One-by-one matrices use the
    /// scalar search; `2 × 2` matrices scan `A` (scalars, then diagonals, then
    /// everything) with a complete `k`-th power test on `Z - A^k`; larger
    /// matrices use a table of all `k`-th powers when it fits the budget.
    /// Beyond the budget both give way to a seeded search for `A` with
    /// `Z - A^k` a cyclic `k`-th power, which can miss solutions.
    pub fn fallback(&mut self, z: &Matrix, k: u64) -> Result<(Matrix, Matrix)> {
        let ctx = z.ctx();
        let n = z.n();
        let budget = self.opts.budget;
        match n {
            0 => Ok((z.clone(), z.clone())),
            1 => {
                let (a, b) = decompose_scalar(ctx, z[(0, 0)], k)?;
                Ok((Matrix::scalar(ctx, 1, a), Matrix::scalar(ctx, 1, b)))
            }
            2 => {
                let roots = self.scalar_roots(ctx, k);
                let q = u128::from(ctx.q());
                let mut spent: u128 = 0;
                let try_x = |x: Matrix| -> Option<(Matrix, Matrix)> {
                    let w = z - &x.pow(k);
                    kth_root_2x2(&w, k, &roots).map(|y| (x, y))
                };
                let elems: Vec<Elem> = ctx.elements().collect();
                for &a in &elems {
                    spent += 8;
                    if let Some(found) = try_x(Matrix::scalar(ctx, 2, a)) {
                        return Ok(found);
                    }
                }
                for &a in &elems {
                    for &d in &elems {
                        spent += 8;
                        if let Some(found) = try_x(Matrix::diag(ctx, &[a, d])) {
                            return Ok(found);
                        }
                    }
                }
                let total = q.pow(4) * 8;
                if spent + total > budget {
                    return self.random_search(z, k);
                }
                for code in 0..q.pow(4) as u64 {
                    if let Some(found) = try_x(decode(ctx, 2, code)) {
                        return Ok(found);
                    }
                }
                Err(Error::NotFound { exhaustive: true })
            }
            _ => {
                let cost = table_cost(ctx, n).unwrap_or(u128::MAX);
                if cost > budget {
                    return self.random_search(z, k);
                }
                let key = (field_key(ctx), n, k);
                let list = self
                    .power_lists
                    .entry(key)
                    .or_insert_with(|| Arc::new(PowerList::build(ctx, n, k)))
                    .clone();
                for &(power, root) in &list.entries {
                    let w = z - &decode(ctx, n, power);
                    if let Some(other) = list.root_of(encode(&w)) {
                        let (a, b) = (decode(ctx, n, root), decode(ctx, n, other));
                        ensure(z, &a, &b, k, "fallback")?;
                        return Ok((a, b));
                    }
                }
                Err(Error::NotFound { exhaustive: true })
            }
        }
    }
}

/// [`Engine::decompose`] with default options.
pub fn decompose(z: &Matrix, k: u64) -> Result<Decomposition> {
    Engine::new(Options::default()).decompose(z, k)
}

/// [`Engine::fallback`] with the given budget.
pub fn decompose_block_fallback(z: &Matrix, k: u64, budget: u128) -> Result<(Matrix, Matrix)> {
    let (a, b) = Engine::new(Options { budget, ..Options::default() }).fallback(z, k)?;
    ensure(z, &a, &b, k, "fallback")?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, m: u32) -> FieldCtx {
        FieldCtx::new(p, m).unwrap()
    }

    fn random_matrix(ctx: &FieldCtx, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let rows = (0..n).map(|_| (0..n).map(|_| ctx.elem(rng.next_u32() % ctx.q())).collect()).collect();
        Matrix::from_rows(ctx, rows).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let f7 = field(7, 1);
        assert_eq!(decompose_scalar(&f7, Elem::ZERO, 3).unwrap(), (Elem::ZERO, Elem::ZERO));
        assert_eq!(decompose_scalar(&f7, f7.elem(5), 3).unwrap(), (f7.elem(3), f7.elem(3)));
        let f5 = field(5, 1);
        assert_eq!(decompose_scalar(&f5, f5.elem(3), 4).unwrap_err(), Error::NotFound { exhaustive: true });
    }

    #[test]
    fn decompose_examples() {
        let f7 = field(7, 1);
        for n in 0..4 {
            let z = Matrix::zeros(&f7, n, n);
            let d = decompose(&z, 5).unwrap();
            assert!(d.a.is_zero() && d.b.is_zero());
        }
        assert_eq!(decompose(&Matrix::zeros(&f7, 3, 3), 5).unwrap().method, Method::BlockAssembly);

        let z = Matrix::scalar(&f7, 1, f7.elem(2));
        let d = decompose(&z, 3).unwrap();
        assert_eq!(d.method, Method::ScalarSearch);
        assert!(verify(&z, &d.a, &d.b, 3).unwrap());

        let f5 = field(5, 1);
        let j = Matrix::jordan(&f5, Elem::ZERO, 4);
        assert_eq!(decompose(&j, 2).unwrap().method, Method::NilpotentNilpotent);
        let f2 = field(2, 1);
        let j = Matrix::jordan(&f2, Elem::ZERO, 4);
        let d = decompose(&j, 2).unwrap();
        assert_eq!(d.method, Method::NilpotentNilpotent);
        assert!(verify(&j, &d.a, &d.b, 2).unwrap());

        let d = decompose(&Matrix::jordan(&f7, f7.elem(3), 3), 1).unwrap();
        assert!(d.b.is_zero());
    }

    #[test]
    fn random_matrices_decompose_and_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut engine = Engine::new(Options::default());
        for (p, m, k, n) in [(13, 1, 2, 4), (13, 1, 3, 3), (11, 1, 2, 5), (3, 2, 2, 3), (5, 1, 2, 3), (2, 3, 3, 3)] {
            let ctx = field(p, m);
            for _ in 0..6 {
                let z = random_matrix(&ctx, n, &mut rng);
                match engine.decompose(&z, k) {
                    Ok(d) => assert!(verify(&z, &d.a, &d.b, k).unwrap()),
                    Err(Error::NotDecomposed { .. }) => {}
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
        let f13 = field(13, 1);
        for _ in 0..10 {
            let z = random_matrix(&f13, 4, &mut rng);
            let d = engine.decompose(&z, 2).unwrap();
            assert!(verify(&z, &d.a, &d.b, 2).unwrap());
        }
    }

    #[test]
    fn gh_layout_for_five() {
        let f13 = field(13, 1);
        let pair = find_two_var_pair(&f13, 2, f13.elem(5)).unwrap();
        let (g, h) = build_gh(&f13, &pair, 5);
        let sq = |x| f13.pow(x, 2);
        let (ak, bk, ck, dk) = (sq(pair.first.0), sq(pair.first.1), sq(pair.second.0), sq(pair.second.1));
        for i in 0..5 {
            assert_eq!(g[(i, i)], [ak, ck, ak, ck, ak][i]);
            assert_eq!(h[(i, i)], [bk, dk, bk, dk, bk][i]);
        }
        for i in 0..4 {
            assert_eq!(g[(i, i + 1)], if i % 2 == 0 { Elem::ONE } else { Elem::ZERO });
            assert_eq!(h[(i, i + 1)], if i % 2 == 1 { Elem::ONE } else { Elem::ZERO });
        }
        assert_eq!(&g + &h, Matrix::jordan(&f13, f13.elem(5), 5));
    }

    #[test]
    fn primitive_jordan_from_explicit_pair() {
        let f7 = field(7, 1);
        let pair = TwoVarPair { first: (Elem::ZERO, Elem::ONE), second: (f7.elem(2), f7.elem(2)), lambda: Elem::ONE, k: 2 };
        let cert = decompose_primitive_jordan_with(&f7, &pair, 2).unwrap();
        assert_eq!(cert.g, Matrix::from_ints(&f7, &[&[0, 1], &[0, 4]]));
        assert_eq!(cert.h, Matrix::diag(&f7, &[f7.elem(1), f7.elem(4)]));
        assert_eq!(cert.root_g.pow(2), cert.g);
        assert_eq!(&cert.g + &cert.h, Matrix::jordan(&f7, Elem::ONE, 2));
        assert_eq!(
            decompose_primitive_jordan(&field(5, 1), field(5, 1).elem(2), 3, 4).unwrap_err(),
            Error::PairNotFound { exhaustive: true }
        );
    }

    #[test]
    fn semisimple_root_of_triangular_block() {
        let f13 = field(13, 1);
        let (a, c) = (f13.elem(2), f13.elem(5));
        let m = Matrix::from_rows(&f13, vec![vec![f13.pow(a, 2), Elem::ONE], vec![Elem::ZERO, f13.pow(c, 2)]]).unwrap();
        let r = kth_root_semisimple(&m, &[a, c], 2).unwrap();
        assert_eq!(r.pow(2), m);
        assert!(r[(1, 0)].is_zero());
        assert_eq!((r[(0, 0)], r[(1, 1)]), (a, c));
        let one = Matrix::scalar(&f13, 1, f13.elem(3));
        assert_eq!(kth_root_semisimple(&one, &[f13.elem(4)], 2).unwrap(), Matrix::scalar(&f13, 1, f13.elem(4)));
    }

    #[test]
    fn nilpotent_split_four_by_two() {
        let f5 = field(5, 1);
        let cert = decompose_nilpotent_nilpotent(&f5, 4, 2).unwrap();
        assert_eq!(cert.plan.m, 0);
        assert_eq!(cert.plan.parts, [2, 2]);
        assert_eq!(cert.a, &Matrix::unit(&f5, 4, 0, 1) + &Matrix::unit(&f5, 4, 2, 3));
        assert_eq!(cert.junction, Matrix::unit(&f5, 4, 1, 2));
        assert_eq!(nilpotent_jordan(&cert.junction).unwrap().partition, [1, 1, 2]);
        assert_eq!(
            decompose_nilpotent_nilpotent(&f5, 5, 3).unwrap_err(),
            Error::PreconditionViolated("nilpotent split needs k >= 2 and n >= 2k (n=5, k=3)".into())
        );
    }

    #[test]
    fn junction_displays() {
        let f = field(3, 1);
        let u = |i, j| Matrix::unit(&f, 6, i, j);
        assert_eq!(junction_matrix(&f, &[1, 1, 2, 2]), &(&u(0, 1) + &u(1, 2)) + &u(3, 4));
        assert_eq!(junction_matrix(&f, &[2, 2, 2]), &u(1, 2) + &u(3, 4));
        // a part of size one chains two junction entries together
        assert_eq!(nilpotent_jordan(&junction_matrix(&f, &[1, 1, 1, 3])).unwrap().partition, [1, 1, 4]);
    }

    #[test]
    fn nilpotent_split_in_every_characteristic() {
        for (p, m) in [(2, 1), (2, 2), (3, 1), (5, 1), (3, 2)] {
            let ctx = field(p, m);
            for k in 2..=4u64 {
                for n in 2 * k as usize..=2 * k as usize + 3 {
                    let c = decompose_nilpotent_nilpotent(&ctx, n, k).unwrap();
                    let j = Matrix::jordan(&ctx, Elem::ZERO, n);
                    assert!(verify(&j, &c.root_a, &c.root_junction, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn semisimple_split_three_over_thirteen() {
        let f13 = field(13, 1);
        let c = decompose_nilpotent_semisimple(&f13, 3, 2, 0).unwrap();
        assert_eq!(c.a_n.trace(), Elem::ONE);
        assert_eq!(c.b_n.trace(), f13.neg(Elem::ONE));
        let expected = Poly::from_roots(&f13, &c.alphas.powers(&f13));
        assert_eq!(c.a_n.charpoly(), expected);
        assert_eq!(c.a_n.charpoly().coeff(2), f13.neg(Elem::ONE));
        assert_eq!(c.b_n.rank(), 2);
        assert_eq!(kth_root_semisimple(&c.a_n, &c.alphas.xs, 2).unwrap().pow(2), c.a_n);
        assert!(verify(&Matrix::jordan(&f13, Elem::ZERO, 3), &c.root_a, &c.root_b, 2).unwrap());
        assert_eq!(decompose_nilpotent_semisimple(&field(2, 3), 3, 2, 0).unwrap_err(), Error::CharTwo);
    }

    #[test]
    fn fallback_examples() {
        let f7 = field(7, 1);
        let j = Matrix::jordan(&f7, Elem::ZERO, 2);
        let (a, b) = decompose_block_fallback(&j, 2, DEFAULT_BUDGET).unwrap();
        assert!(verify(&j, &a, &b, 2).unwrap());

        let id = Matrix::identity(&f7, 2);
        let (a, b) = decompose_block_fallback(&id, 3, DEFAULT_BUDGET).unwrap();
        assert!(verify(&id, &a, &b, 3).unwrap());

        let f3 = field(3, 1);
        let j3 = Matrix::jordan(&f3, Elem::ZERO, 3);
        let (a, b) = decompose_block_fallback(&j3, 2, DEFAULT_BUDGET).unwrap();
        assert!(verify(&j3, &a, &b, 2).unwrap());
        assert!(matches!(
            decompose_block_fallback(&Matrix::jordan(&field(13, 1), Elem::ZERO, 3), 2, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn failing_blocks_are_searched_jointly() {
        // 3 is not a sum of two fourth powers in F_5, but diag(0, 3) is
        let f5 = field(5, 1);
        let z = Matrix::diag(&f5, &[Elem::ZERO, f5.elem(3)]);
        let d = decompose(&z, 4).unwrap();
        assert_eq!(d.method, Method::ExhaustiveFallback);
        assert_eq!(d.trail.len(), 1);
        assert_eq!(d.trail[0].blocks, [0, 1]);
        assert!(crate::oracle::independent_verify(&z, &d.a, &d.b, 4));
        assert!(matches!(decompose(&Matrix::scalar(&f5, 1, f5.elem(3)), 4), Err(Error::NotDecomposed { block: 0, .. })));
    }

    #[test]
    fn seeded_search_beyond_the_table() {
        // 3 ⊕ C_{t^2+5t+2} over F_7, k = 3: the 3 × 3 power table exceeds the budget
        let f7 = field(7, 1);
        let c = Matrix::companion(&Poly::from_indices(&f7, &[2, 5, 1])).unwrap();
        let z = Matrix::scalar(&f7, 1, f7.elem(3)).direct_sum(&c);
        let mut engine = Engine::new(Options::default());
        let d = engine.decompose(&z, 3).unwrap();
        assert_eq!(d.method, Method::ExhaustiveFallback);
        assert!(crate::oracle::independent_verify(&z, &d.a, &d.b, 3));
        assert_eq!(Engine::new(Options::default()).decompose(&z, 3).unwrap(), d);

        let w = Matrix::diag(&f7, &[f7.elem(1), f7.elem(6)]);
        let y = engine.kth_root_cyclic(&w, 3).unwrap();
        assert_eq!(y.pow(3), w);
        assert!(engine.kth_root_cyclic(&Matrix::diag(&f7, &[f7.elem(3), f7.elem(1)]), 3).is_none());
        assert!(engine.kth_root_cyclic(&Matrix::identity(&f7, 2), 3).is_none());
    }

    #[test]
    fn two_by_two_power_test_is_complete() {
        // compare against the set of all squares and cubes in M_2(F_3) and M_2(F_4)
        for ctx in [field(3, 1), field(2, 2)] {
            for k in 2..=3u64 {
                let roots = ScalarRoots::new(&ctx, k, DEFAULT_BUDGET);
                let total = u64::from(ctx.q()).pow(4);
                let mut is_power = vec![false; total as usize];
                for code in 0..total {
                    is_power[encode(&decode(&ctx, 2, code).pow(k)) as usize] = true;
                }
                for code in 0..total {
                    let w = decode(&ctx, 2, code);
                    let found = kth_root_2x2(&w, k, &roots);
                    assert_eq!(found.is_some(), is_power[code as usize], "{w:?}");
                    if let Some(y) = found {
                        assert_eq!(y.pow(k), w);
                    }
                }
            }
        }
    }

    #[test]
    fn nonlinear_blocks_go_through_the_extension() {
        let f3 = field(3, 1);
        let g = Poly::from_indices(&f3, &[1, 0, 1]);
        let mut engine = Engine::new(Options::default());
        for r in 1..=3 {
            let z = Matrix::generalized_jordan_block(&g, r).unwrap();
            let (a, b, _) = engine.decompose_block(&g, r, 2).unwrap();
            assert!(verify(&z, &a, &b, 2).unwrap());
        }
    }

    #[test]
    fn verify_rejects_and_checks_shapes() {
        let f3 = field(3, 1);
        let j = Matrix::jordan(&f3, Elem::ZERO, 2);
        let id = Matrix::identity(&f3, 2);
        assert!(!verify(&j, &id, &id, 2).unwrap());
        let z = Matrix::zeros(&f3, 2, 2);
        assert!(verify(&z, &z, &z, 4).unwrap());
        assert!(matches!(verify(&j, &Matrix::identity(&f3, 3), &id, 2), Err(Error::DimensionMismatch(_))));
    }
}
