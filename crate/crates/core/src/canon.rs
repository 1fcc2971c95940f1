//! Similarity machinery: generalized Jordan forms with explicit conjugators,
//! nilpotent Jordan chains, cyclic-vector and eigenvector conjugators, and the
//! embedding `M_d(F_{q^e}) -> M_{de}(F_q)`.
//!
//! Every conjugator returned from this module has been checked by
//! multiplication before it leaves.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::gf::{gcd, Elem, FieldCtx};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::{Error, Result};

/// An invertible `P` together with `P^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugator {
    pub p: Matrix,
    pub p_inv: Matrix,
}

impl Conjugator {
    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        Conjugator { p: Matrix::identity(ctx, n), p_inv: Matrix::identity(ctx, n) }
    }

    /// From the matrix whose columns are the new basis (that is, `P^{-1}`).
    pub fn from_basis(q: Matrix) -> Result<Self> {
        let p = q.inverse()?;
        Ok(Conjugator { p, p_inv: q })
    }

    /// `P X P^{-1}`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        x.conjugate(&self.p, &self.p_inv)
    }

    /// `P^{-1} X P`.
    pub fn unapply(&self, x: &Matrix) -> Matrix {
        x.conjugate(&self.p_inv, &self.p)
    }

    /// The conjugator applying `self` first, then `outer`.
    pub fn then(&self, outer: &Conjugator) -> Conjugator {
        Conjugator { p: &outer.p * &self.p, p_inv: &self.p_inv * &outer.p_inv }
    }

    pub fn inverse(&self) -> Conjugator {
        Conjugator { p: self.p_inv.clone(), p_inv: self.p.clone() }
    }

    pub fn direct_sum(ctx: &FieldCtx, parts: &[Conjugator]) -> Conjugator {
        Conjugator {
            p: Matrix::block_diag(ctx, parts.iter().map(|c| &c.p)),
            p_inv: Matrix::block_diag(ctx, parts.iter().map(|c| &c.p_inv)),
        }
    }

    fn check(&self, from: &Matrix, to: &Matrix, what: &str) -> Result<()> {
        if &self.p * &self.p_inv != Matrix::identity(from.ctx(), from.n()) || self.apply(from) != *to {
            return Err(Error::Internal(format!("{what}: conjugation identity failed")));
        }
        Ok(())
    }
}

/// One generalized Jordan block `J_{f,r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GjBlock {
    pub f: Poly,
    pub r: usize,
}

impl GjBlock {
    pub fn dim(&self) -> usize {
        self.r * self.f.degree().unwrap_or(0)
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::generalized_jordan_block(&self.f, self.r).expect("monic irreducible")
    }
}

/// `P M P^{-1} = J_{f_1,r_1} ⊕ ... ⊕ J_{f_s,r_s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GjForm {
    pub blocks: Vec<GjBlock>,
    pub conj: Conjugator,
}

impl GjForm {
    pub fn block_matrix(&self, ctx: &FieldCtx) -> Matrix {
        let mats: Vec<Matrix> = self.blocks.iter().map(GjBlock::matrix).collect();
        Matrix::block_diag(ctx, &mats)
    }
}

/// Jordan type of a nilpotent matrix and a conjugator to `⊕ J_{0,n_i}` with the
/// parts in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilJordanType {
    pub partition: Vec<usize>,
    pub conj: Conjugator,
}

/// `⊕ J_{0,n_i}` in the given order.
pub fn nilpotent_block_matrix(ctx: &FieldCtx, parts: &[usize]) -> Matrix {
    let blocks: Vec<Matrix> = parts.iter().map(|&s| Matrix::jordan(ctx, Elem::ZERO, s)).collect();
    Matrix::block_diag(ctx, &blocks)
}

/// Incrementally built subspace in reduced echelon form.
struct Span {
    rows: Vec<(usize, Vec<Elem>)>,
    ctx: FieldCtx,
}

impl Span {
    fn new(ctx: &FieldCtx) -> Self {
        Span { rows: Vec::new(), ctx: ctx.clone() }
    }

    /// Adds `v`; returns false (and changes nothing) if it was already in the span.
    fn insert(&mut self, v: &[Elem]) -> bool {
        let f = &self.ctx;
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            let c = v[*pivot];
            if !c.is_zero() {
                for (a, &b) in v.iter_mut().zip(row) {
                    *a = f.sub(*a, f.mul(c, b));
                }
            }
        }
        let Some(pivot) = v.iter().position(|e| !e.is_zero()) else { return false };
        let inv = f.inv(v[pivot]).expect("nonzero");
        for a in v.iter_mut() {
            *a = f.mul(*a, inv);
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[pivot];
            if !c.is_zero() {
                for (a, &b) in row.iter_mut().zip(&v) {
                    *a = f.sub(*a, f.mul(c, b));
                }
            }
        }
        self.rows.push((pivot, v));
        true
    }
}

/// Jordan chains of the nilpotent `nil` on the subspace `ker constraint`
/// (or the whole space), closed under the commuting operator `semi` whose
/// minimal polynomial on that subspace has degree `e`.
///
/// Returns `(length, vectors)` per chain, shortest first; the vectors of a
/// chain of length `r` with top `x` are `semi^i nil^(r-l) x` ordered by
/// `l = 1..=r`, then `i = 0..e`.
fn chain_basis(
    nil: &Matrix,
    semi: Option<&Matrix>,
    e: usize,
    constraint: Option<&Matrix>,
) -> Result<Vec<(usize, Vec<Vec<Elem>>)>> {
    let ctx = nil.ctx();
    let n = nil.n();
    let kernel = |power: &Matrix| match constraint {
        Some(c) => power.stack(c).nullspace(),
        None => power.nullspace(),
    };
    let target = constraint.map_or(n, |c| c.nullspace().len());
    let mut kernels = vec![kernel(&Matrix::identity(ctx, n))];
    let mut power = Matrix::identity(ctx, n);
    while kernels.last().expect("nonempty").len() < target {
        if kernels.len() > n {
            return Err(Error::NotNilpotent);
        }
        power = &power * nil;
        kernels.push(kernel(&power));
    }
    let height = kernels.len() - 1;
    let apply_semi = |v: &[Elem]| semi.map_or_else(|| v.to_vec(), |s| s.mul_vec(v));

    let mut level_vecs: Vec<Vec<Vec<Elem>>> = vec![Vec::new(); height + 1];
    let mut tops: Vec<(usize, Vec<Elem>)> = Vec::new();
    for j in (1..=height).rev() {
        let mut span = Span::new(ctx);
        for v in kernels[j - 1].iter().chain(&level_vecs[j]) {
            span.insert(v);
        }
        for x in &kernels[j] {
            if !span.insert(x) {
                continue;
            }
            let mut shifted = vec![x.clone()];
            for _ in 1..e {
                let next = apply_semi(shifted.last().expect("nonempty"));
                if !span.insert(&next) {
                    return Err(Error::Internal("chain top not cyclic of the expected degree".into()));
                }
                shifted.push(next);
            }
            for mut v in shifted {
                for l in (1..j).rev() {
                    v = nil.mul_vec(&v);
                    level_vecs[l].push(v.clone());
                }
            }
            tops.push((j, x.clone()));
        }
    }
    tops.sort_by_key(|(len, _)| *len);

    let mut out = Vec::with_capacity(tops.len());
    for (len, x) in tops {
        let mut vectors = Vec::with_capacity(len * e);
        for l in 1..=len {
            let mut v = x.clone();
            for _ in 0..len - l {
                v = nil.mul_vec(&v);
            }
            for _ in 0..e {
                vectors.push(v.clone());
                v = apply_semi(&v);
            }
        }
        out.push((len, vectors));
    }
    Ok(out)
}

/// Generalized Jordan form with conjugator. `seed` drives the randomized
/// equal-degree factorization of the characteristic polynomial.
pub fn generalized_jordan(m: &Matrix, seed: u64) -> Result<GjForm> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("generalized_jordan needs a square matrix".into()));
    }
    let ctx = m.ctx();
    let n = m.n();
    if n == 0 {
        return Ok(GjForm { blocks: Vec::new(), conj: Conjugator::identity(ctx, 0) });
    }
    let factors = m.charpoly().factor(seed).factors;

    // Semisimple part: M^(q^L) with every factor degree dividing L and q^L >= n.
    let q = u64::from(ctx.q());
    let lcm = factors.iter().fold(1u64, |acc, (f, _)| {
        let d = f.degree().expect("nonzero") as u64;
        acc / gcd(acc, d) * d
    });
    let mut frob_steps = lcm;
    while q.checked_pow(frob_steps as u32).is_some_and(|v| v < n as u64) {
        frob_steps += lcm;
    }
    let mut semi = m.clone();
    for _ in 0..frob_steps {
        semi = semi.pow(q);
    }
    let nil = m - &semi;

    let mut blocks = Vec::new();
    let mut columns = Vec::with_capacity(n);
    for (f, mult) in &factors {
        let e = f.degree().expect("nonzero");
        let primary = m.eval_poly(f).pow(*mult as u64);
        for (r, vectors) in chain_basis(&nil, Some(&semi), e, Some(&primary))? {
            blocks.push(GjBlock { f: f.clone(), r });
            columns.extend(vectors);
        }
    }
    let conj = Conjugator::from_basis(Matrix::from_columns(ctx, n, &columns))
        .map_err(|_| Error::Internal("generalized Jordan basis is singular".into()))?;
    let form = GjForm { blocks, conj };
    form.conj.check(m, &form.block_matrix(ctx), "generalized_jordan")?;
    Ok(form)
}

/// Jordan type of a nilpotent matrix with a conjugator to `⊕ J_{0,n_i}`.
pub fn nilpotent_jordan(nil: &Matrix) -> Result<NilJordanType> {
    let ctx = nil.ctx();
    let n = nil.n();
    if !nil.pow(n as u64).is_zero() {
        return Err(Error::NotNilpotent);
    }
    let chains = chain_basis(nil, None, 1, None)?;
    let partition: Vec<usize> = chains.iter().map(|(len, _)| *len).collect();
    let columns: Vec<Vec<Elem>> = chains.into_iter().flat_map(|(_, v)| v).collect();
    let conj = Conjugator::from_basis(Matrix::from_columns(ctx, n, &columns))?;
    conj.check(nil, &nilpotent_block_matrix(ctx, &partition), "nilpotent_jordan")?;
    Ok(NilJordanType { partition, conj })
}

/// `P` with `P M P^{-1} = J_{0,n}` from the Krylov basis
/// `(M^{n-1} v, ..., M v, v)` of the first standard basis vector `v` with
/// `M^{n-1} v != 0`.
pub fn regular_nilpotent_conjugator(m: &Matrix) -> Result<Conjugator> {
    let ctx = m.ctx();
    let n = m.n();
    if n == 0 || !m.pow(n as u64).is_zero() || m.rank() != n - 1 {
        return Err(Error::NotRegularNilpotent);
    }
    let top = m.pow(n as u64 - 1);
    let start = (0..n).find(|&i| !top.column(i).iter().all(|e| e.is_zero())).ok_or(Error::NotRegularNilpotent)?;
    let mut v = vec![Elem::ZERO; n];
    v[start] = Elem::ONE;
    let mut krylov = vec![v];
    for _ in 1..n {
        let next = m.mul_vec(krylov.last().expect("nonempty"));
        krylov.push(next);
    }
    krylov.reverse();
    let conj = Conjugator::from_basis(Matrix::from_columns(ctx, n, &krylov))?;
    conj.check(m, &Matrix::jordan(ctx, Elem::ZERO, n), "regular_nilpotent_conjugator")?;
    Ok(conj)
}

/// `P` with `P M P^{-1} = diag(eigenvalues)` for pairwise distinct eigenvalues
/// in `F_q`. Columns of `P^{-1}` are eigenvectors scaled so their first
/// nonzero coordinate is one.
pub fn diagonalize_distinct(m: &Matrix, eigenvalues: &[Elem]) -> Result<Conjugator> {
    let ctx = m.ctx();
    let n = m.n();
    if eigenvalues.len() != n {
        return Err(Error::EigenvalueMismatch(format!("{} eigenvalues for a {n}x{n} matrix", eigenvalues.len())));
    }
    for (i, a) in eigenvalues.iter().enumerate() {
        if eigenvalues[..i].contains(a) {
            return Err(Error::EigenvalueMismatch("eigenvalues are not distinct".into()));
        }
    }
    let mut columns = Vec::with_capacity(n);
    for &lambda in eigenvalues {
        let shifted = m - &Matrix::scalar(ctx, n, lambda);
        let mut kernel = shifted.nullspace();
        if kernel.len() != 1 {
            return Err(Error::EigenvalueMismatch(format!(
                "eigenspace of {} has dimension {}",
                ctx.format_elem(lambda),
                kernel.len()
            )));
        }
        let mut v = kernel.pop().expect("one vector");
        let lead = *v.iter().find(|e| !e.is_zero()).expect("nonzero kernel vector");
        let inv = ctx.inv(lead)?;
        for x in v.iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        columns.push(v);
    }
    let conj = Conjugator::from_basis(Matrix::from_columns(ctx, n, &columns))?;
    conj.check(m, &Matrix::diag(ctx, eigenvalues), "diagonalize_distinct")?;
    Ok(conj)
}

/// The extension `F_{q^e} = F_q[t]/(f)` for a monic irreducible `f` of degree
/// `e`, realized as the absolute field `F_{p^{me}}` together with the
/// embedding `F_q -> F_{q^e}` and a root `alpha` of `f`.
///
/// Elements of the extension are written in the basis `(1, alpha, ..., alpha^{e-1})`
/// over the image of `F_q`.
#[derive(Clone, Debug)]
pub struct ExtensionCtx {
    base: FieldCtx,
    ext: FieldCtx,
    f: Poly,
    alpha: Elem,
    /// Image of the polynomial-basis generator of `base`.
    gamma: Elem,
    /// Inverse of the `F_p`-coordinate matrix of the basis `gamma^i alpha^j`.
    coord_inv: Matrix,
}

impl ExtensionCtx {
    pub fn new(f: &Poly) -> Result<Self> {
        let base = f.ctx().clone();
        let e = match f.degree() {
            Some(e) if e >= 1 && f.is_monic() && f.is_irreducible() => e,
            _ => return Err(Error::NotIrreducible),
        };
        let m = base.m();
        let total = m.checked_mul(e as u32).ok_or(Error::Overflow { p: base.p().into(), m: u32::MAX })?;
        let ext = FieldCtx::new(base.p().into(), total)?;
        let prime = FieldCtx::new(base.p().into(), 1)?;

        let base_modulus = Poly::new(&ext, base.modulus().iter().map(|&c| ext.from_int(c.into())).collect());
        let gamma = *base_modulus.roots().first().ok_or(Error::Internal("base modulus has no root".into()))?;
        let mut partial = ExtensionCtx {
            base: base.clone(),
            ext: ext.clone(),
            f: f.clone(),
            alpha: Elem::ZERO,
            gamma,
            coord_inv: Matrix::identity(&prime, 1),
        };
        let lifted = Poly::new(&ext, f.coeffs().iter().map(|&c| partial.lift(c)).collect());
        let alpha = *lifted.roots().first().ok_or(Error::Internal("f has no root in the extension".into()))?;
        partial.alpha = alpha;

        let size = total as usize;
        let mut columns = Vec::with_capacity(size);
        let mut alpha_pow = Elem::ONE;
        for _ in 0..e {
            let mut gamma_pow = Elem::ONE;
            for _ in 0..m {
                let b = ext.mul(gamma_pow, alpha_pow);
                columns.push(ext.coeffs(b).into_iter().map(|c| prime.elem(c)).collect());
                gamma_pow = ext.mul(gamma_pow, gamma);
            }
            alpha_pow = ext.mul(alpha_pow, alpha);
        }
        partial.coord_inv = Matrix::from_columns(&prime, size, &columns).inverse()?;
        Ok(partial)
    }

    pub fn base(&self) -> &FieldCtx {
        &self.base
    }

    pub fn ext(&self) -> &FieldCtx {
        &self.ext
    }

    pub fn modulus(&self) -> &Poly {
        &self.f
    }

    /// The tracked root of `f`.
    pub fn alpha(&self) -> Elem {
        self.alpha
    }

    pub fn degree(&self) -> usize {
        self.f.degree().expect("nonzero")
    }

    /// The field embedding `F_q -> F_{q^e}`.
    pub fn lift(&self, c: Elem) -> Elem {
        let ext = &self.ext;
        let mut acc = Elem::ZERO;
        let mut gp = Elem::ONE;
        for d in self.base.coeffs(c) {
            acc = ext.add(acc, ext.mul(ext.from_int(d.into()), gp));
            gp = ext.mul(gp, self.gamma);
        }
        acc
    }

    pub fn lift_matrix(&self, m: &Matrix) -> Result<Matrix> {
        if *m.ctx() != self.base {
            return Err(Error::ContextMismatch);
        }
        let rows = m.to_rows().into_iter().map(|r| r.into_iter().map(|c| self.lift(c)).collect()).collect();
        Matrix::from_rows(&self.ext, rows)
    }

    /// Coordinates of `beta` in the basis `(1, alpha, ..., alpha^{e-1})`.
    pub fn coords(&self, beta: Elem) -> Vec<Elem> {
        let prime = self.coord_inv.ctx();
        let digits: Vec<Elem> = self.ext.coeffs(beta).into_iter().map(|c| prime.elem(c)).collect();
        let flat = self.coord_inv.mul_vec(&digits);
        let m = self.base.m() as usize;
        flat.chunks(m)
            .map(|chunk| {
                let residues: Vec<u32> = chunk.iter().map(|c| c.index()).collect();
                self.base.from_coeffs(&residues).expect("residues in range")
            })
            .collect()
    }

    /// Matrix of multiplication by `beta` over `F_q` in the basis
    /// `(1, alpha, ..., alpha^{e-1})`.
    pub fn mult_matrix(&self, beta: Elem) -> Matrix {
        let e = self.degree();
        let mut columns = Vec::with_capacity(e);
        let mut basis = Elem::ONE;
        for _ in 0..e {
            columns.push(self.coords(self.ext.mul(beta, basis)));
            basis = self.ext.mul(basis, self.alpha);
        }
        Matrix::from_columns(&self.base, e, &columns)
    }

    /// Replaces every entry by its `e × e` multiplication matrix; maps
    /// `J_{alpha,d}` to `J_{f,d}`.
    pub fn embed_ext(&self, m: &Matrix) -> Result<Matrix> {
        if *m.ctx() != self.ext {
            return Err(Error::ContextMismatch);
        }
        let e = self.degree();
        let mut out = Matrix::zeros(&self.base, m.rows() * e, m.cols() * e);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m[(i, j)].is_zero() {
                    out.set_block(i * e, j * e, &self.mult_matrix(m[(i, j)]));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn random_matrix(ctx: &FieldCtx, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let rows = (0..n).map(|_| (0..n).map(|_| ctx.elem(rng.next_u32() % ctx.q())).collect()).collect();
        Matrix::from_rows(ctx, rows).unwrap()
    }

    fn random_invertible(ctx: &FieldCtx, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        loop {
            let m = random_matrix(ctx, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    #[test]
    fn fixed_point_and_distinct_eigenvalues() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let g = Poly::from_indices(&f3, &[1, 0, 1]);
        let j = Matrix::generalized_jordan_block(&g, 2).unwrap();
        let form = generalized_jordan(&j, 0).unwrap();
        assert_eq!(form.blocks, [GjBlock { f: g, r: 2 }]);

        let f5 = FieldCtx::new(5, 1).unwrap();
        let d = Matrix::diag(&f5, &[f5.elem(1), f5.elem(2)]);
        let form = generalized_jordan(&d, 0).unwrap();
        assert_eq!(
            form.blocks,
            [GjBlock { f: Poly::linear(&f5, f5.elem(2)), r: 1 }, GjBlock { f: Poly::linear(&f5, f5.elem(1)), r: 1 }]
        );
    }

    #[test]
    fn recovers_randomized_generalized_block() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let g = Poly::from_indices(&f3, &[1, 0, 1]);
        let j = Matrix::generalized_jordan_block(&g, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = random_invertible(&f3, 4, &mut rng);
            let m = j.conjugate(&p, &p.inverse().unwrap());
            let form = generalized_jordan(&m, 1).unwrap();
            assert_eq!(form.blocks, [GjBlock { f: g.clone(), r: 2 }]);
        }
    }

    #[test]
    fn generalized_jordan_mixed_structure() {
        // J_{1,2} ⊕ J_{1,1} ⊕ J_{t^2+1,1} ⊕ J_{0,3} over F_7, scrambled
        let f = FieldCtx::new(7, 1).unwrap();
        let quad = Poly::from_indices(&f, &[1, 0, 1]);
        let parts = [
            Matrix::jordan(&f, f.elem(1), 2),
            Matrix::jordan(&f, f.elem(1), 1),
            Matrix::companion(&quad).unwrap(),
            Matrix::jordan(&f, Elem::ZERO, 3),
        ];
        let z = Matrix::block_diag(&f, &parts);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_invertible(&f, 8, &mut rng);
        let m = z.conjugate(&p, &p.inverse().unwrap());
        let form = generalized_jordan(&m, 0).unwrap();
        let got: Vec<(Vec<u32>, usize)> = form.blocks.iter().map(|b| (b.f.indices(), b.r)).collect();
        assert_eq!(got, [(vec![0, 1], 3), (vec![6, 1], 1), (vec![6, 1], 2), (vec![1, 0, 1], 1)]);
    }

    #[test]
    fn nilpotent_partitions() {
        let f = FieldCtx::new(5, 1).unwrap();
        let j6 = Matrix::jordan(&f, Elem::ZERO, 6).pow(3);
        assert_eq!(nilpotent_jordan(&j6).unwrap().partition, [2, 2, 2]);
        let j7 = Matrix::jordan(&f, Elem::ZERO, 7).pow(3);
        assert_eq!(nilpotent_jordan(&j7).unwrap().partition, [2, 2, 3]);
        assert_eq!(nilpotent_jordan(&Matrix::zeros(&f, 4, 4)).unwrap().partition, [1, 1, 1, 1]);
        assert_eq!(nilpotent_jordan(&Matrix::identity(&f, 2)).unwrap_err(), Error::NotNilpotent);
    }

    #[test]
    fn regular_nilpotent_examples() {
        let f = FieldCtx::new(7, 1).unwrap();
        let j = Matrix::jordan(&f, Elem::ZERO, 4);
        let c = regular_nilpotent_conjugator(&j).unwrap();
        assert_eq!(c.apply(&j), j);

        let m = j.scale(f.elem(2)).submatrix(0, 0, 3, 3);
        let c = regular_nilpotent_conjugator(&m).unwrap();
        assert_eq!(c.apply(&m), Matrix::jordan(&f, Elem::ZERO, 3));

        let junk = Matrix::from_ints(&f, &[&[0, 2, 5, 3], &[0, 0, 2, 6], &[0, 0, 0, 1], &[0, 0, 0, 0]]);
        let c = regular_nilpotent_conjugator(&junk).unwrap();
        assert_eq!(c.apply(&junk), j);

        let two_blocks = Matrix::unit(&f, 3, 0, 1);
        assert_eq!(regular_nilpotent_conjugator(&two_blocks).unwrap_err(), Error::NotRegularNilpotent);
    }

    #[test]
    fn diagonalize_examples() {
        let f = FieldCtx::new(7, 1).unwrap();
        let d = Matrix::diag(&f, &[f.elem(3), f.elem(5)]);
        let c = diagonalize_distinct(&d, &[f.elem(5), f.elem(3)]).unwrap();
        assert_eq!(c.apply(&d), Matrix::diag(&f, &[f.elem(5), f.elem(3)]));

        let t = Matrix::from_ints(&f, &[&[2, 1], &[0, 4]]);
        let c = diagonalize_distinct(&t, &[f.elem(2), f.elem(4)]).unwrap();
        assert_eq!(c.apply(&t), Matrix::diag(&f, &[f.elem(2), f.elem(4)]));

        assert!(matches!(diagonalize_distinct(&t, &[f.elem(2), f.elem(3)]), Err(Error::EigenvalueMismatch(_))));
        assert!(matches!(diagonalize_distinct(&t, &[f.elem(2), f.elem(2)]), Err(Error::EigenvalueMismatch(_))));
        let j = Matrix::jordan(&f, f.elem(2), 2);
        assert!(matches!(diagonalize_distinct(&j, &[f.elem(2), f.elem(2)]), Err(Error::EigenvalueMismatch(_))));
    }

    #[test]
    fn embedding_maps_alpha_to_companion() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let g = Poly::from_indices(&f3, &[2, 1, 1]);
        let ext = ExtensionCtx::new(&g).unwrap();
        let l = ext.ext().clone();
        let one = Matrix::identity(&l, 1);
        assert_eq!(ext.embed_ext(&one).unwrap(), Matrix::identity(&f3, 2));
        let a = Matrix::scalar(&l, 1, ext.alpha());
        assert_eq!(ext.embed_ext(&a).unwrap(), Matrix::companion(&g).unwrap());
        let ja = Matrix::jordan(&l, ext.alpha(), 3);
        assert_eq!(ext.embed_ext(&ja).unwrap(), Matrix::generalized_jordan_block(&g, 3).unwrap());
        assert_eq!(ext.embed_ext(&Matrix::identity(&f3, 1)), Err(Error::ContextMismatch));
    }

    #[test]
    fn embedding_is_a_ring_homomorphism_over_towers() {
        // F_9 viewed over F_3, and F_81 viewed over F_9
        let f3 = FieldCtx::new(3, 1).unwrap();
        let f9 = FieldCtx::new(3, 2).unwrap();
        let g3 = Poly::from_indices(&f3, &[1, 0, 1]);
        let g9 = Poly::new(&f9, vec![f9.generator(), Elem::ZERO, Elem::ONE]);
        let g9 = if g9.is_irreducible() { g9 } else { Poly::new(&f9, vec![f9.generator(), Elem::ONE, Elem::ONE]) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for g in [g3, g9] {
            if !g.is_irreducible() {
                continue;
            }
            let ext = ExtensionCtx::new(&g).unwrap();
            let l = ext.ext();
            for x in ext.base().elements() {
                assert_eq!(ext.coords(ext.lift(x))[0], x);
            }
            for _ in 0..200 {
                let x = random_matrix(l, 2, &mut rng);
                let y = random_matrix(l, 2, &mut rng);
                let (ex, ey) = (ext.embed_ext(&x).unwrap(), ext.embed_ext(&y).unwrap());
                assert_eq!(ext.embed_ext(&(&x * &y)).unwrap(), &ex * &ey);
                assert_eq!(ext.embed_ext(&(&x + &y)).unwrap(), &ex + &ey);
            }
        }
    }
}
