//! Dense matrices over `F_q`: arithmetic, elimination, characteristic
//! polynomials, companion matrices and the `B_n` family.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::gf::{Elem, FieldCtx};
use crate::poly::Poly;
use crate::{Error, Result};

/// Row-major matrix. Most of the crate works with square matrices; kernels and
/// stacked systems use the rectangular case.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    ctx: FieldCtx,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {:?}", self.rows, self.cols, self.ctx)?;
        for i in 0..self.rows {
            let row: Vec<_> = self.row(i).iter().map(|&e| self.ctx.format_elem(e)).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Elem;
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zeros(ctx: &FieldCtx, rows: usize, cols: usize) -> Self {
        Matrix { ctx: ctx.clone(), rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Self {
        Self::scalar(ctx, n, Elem::ONE)
    }

    pub fn scalar(ctx: &FieldCtx, n: usize, s: Elem) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(ctx: &FieldCtx, entries: &[Elem]) -> Self {
        let mut m = Self::zeros(ctx, entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_rows(ctx: &FieldCtx, rows: Vec<Vec<Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        if rows.iter().flatten().any(|e| e.index() >= ctx.q()) {
            return Err(Error::InvalidElement("entry outside the field".into()));
        }
        Ok(Matrix { ctx: ctx.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Square matrix from prime-subfield integers (convenient in tests).
    pub fn from_ints(ctx: &FieldCtx, rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&x| ctx.from_int(x)).collect()).collect();
        Self::from_rows(ctx, rows).expect("rectangular input")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ctx: &FieldCtx, rows: usize, columns: &[Vec<Elem>]) -> Self {
        let mut m = Self::zeros(ctx, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &e) in col.iter().enumerate() {
                m[(i, j)] = e;
            }
        }
        m
    }

    /// Jordan block `J_{lambda,n}`: `lambda` on the diagonal, ones above it.
    pub fn jordan(ctx: &FieldCtx, lambda: Elem, n: usize) -> Self {
        let mut m = Self::scalar(ctx, n, lambda);
        for i in 1..n {
            m[(i - 1, i)] = Elem::ONE;
        }
        m
    }

    /// Matrix unit `e_{i,j}` (zero-based).
    pub fn unit(ctx: &FieldCtx, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        m[(i, j)] = Elem::ONE;
        m
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Dimension of a square matrix.
    pub fn n(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "add")?;
        let f = &self.ctx;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other, "sub")?;
        let f = &self.ctx;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { data, ..self.clone() })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.ctx;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(l, j)];
                    if !b.is_zero() {
                        out[(i, j)] = f.add(out[(i, j)], f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: Elem) -> Self {
        let f = &self.ctx;
        Matrix { data: self.data.iter().map(|&a| f.mul(a, s)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Binary exponentiation; `pow(0)` is the identity.
    pub fn pow(&self, mut e: u64) -> Self {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut base = self.clone();
        let mut acc = Self::identity(&self.ctx, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::block_diag(&self.ctx, [self, other])
    }

    pub fn block_diag<'a>(ctx: &FieldCtx, blocks: impl IntoIterator<Item = &'a Matrix>) -> Self {
        let blocks: Vec<&Matrix> = blocks.into_iter().collect();
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(ctx, r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            assert!(b.ctx == *ctx, "block over a different field");
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(&self.ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        out
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { ctx: self.ctx.clone(), rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn trace(&self) -> Elem {
        (0..self.rows.min(self.cols)).fold(Elem::ZERO, |acc, i| self.ctx.add(acc, self[(i, i)]))
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(v.len(), self.cols);
        let f = &self.ctx;
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Elem::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
            .collect()
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.ctx.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else { continue };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self[(r, c)]).expect("pivot is nonzero");
            for j in c..self.cols {
                self[(r, j)] = f.mul(self[(r, j)], inv);
            }
            for i in 0..self.rows {
                let factor = self[(i, c)];
                if i == r || factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let t = f.mul(factor, self[(r, j)]);
                    self[(i, j)] = f.sub(self[(i, j)], t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Basis of `{v : self v = 0}`, one vector per free column, with the free
    /// coordinate set to one.
    pub fn nullspace(&self) -> Vec<Vec<Elem>> {
        let f = &self.ctx;
        let mut r = self.clone();
        let pivots = r.rref_in_place();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Elem::ZERO; self.cols];
            v[free] = Elem::ONE;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r[(row, free)]);
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::zeros(&self.ctx, n, 2 * n);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, &Self::identity(&self.ctx, n));
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(aug.submatrix(0, n, n, n))
    }

    /// Unique solution of `self x = b` for invertible `self`.
    pub fn solve(&self, b: &[Elem]) -> Result<Vec<Elem>> {
        Ok(self.inverse()?.mul_vec(b))
    }

    /// `p · self · p_inv`.
    pub fn conjugate(&self, p: &Matrix, p_inv: &Matrix) -> Self {
        &(p * self) * p_inv
    }

    /// `f(self)` by Horner's rule.
    pub fn eval_poly(&self, f: &Poly) -> Self {
        let n = self.n();
        let mut acc = Self::zeros(&self.ctx, n, n);
        for &c in f.coeffs().iter().rev() {
            acc = &(&acc * self) + &Self::scalar(&self.ctx, n, c);
        }
        acc
    }

    /// `det(tI - self)` via reduction to Hessenberg form and the standard
    /// three-term recurrence; division-safe over every field.
    pub fn charpoly(&self) -> Poly {
        assert!(self.is_square(), "charpoly of a non-square matrix");
        let f = self.ctx.clone();
        let n = self.rows;
        let mut h = self.clone();
        for j in 0..n.saturating_sub(2) {
            let Some(i) = (j + 1..n).find(|&i| !h[(i, j)].is_zero()) else { continue };
            if i != j + 1 {
                for c in 0..n {
                    h.data.swap(i * n + c, (j + 1) * n + c);
                }
                for r in 0..n {
                    h.data.swap(r * n + i, r * n + j + 1);
                }
            }
            let pivot_inv = f.inv(h[(j + 1, j)]).expect("nonzero pivot");
            for r in j + 2..n {
                let u = f.mul(h[(r, j)], pivot_inv);
                if u.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let t = f.mul(u, h[(j + 1, c)]);
                    h[(r, c)] = f.sub(h[(r, c)], t);
                }
                for rr in 0..n {
                    let t = f.mul(u, h[(rr, r)]);
                    h[(rr, j + 1)] = f.add(h[(rr, j + 1)], t);
                }
            }
        }
        // p_m = (t - h_mm) p_{m-1} - sum_{i<m} h_{m-i,m} (h_{m,m-1} ... h_{m-i+1,m-i}) p_{m-i-1}
        let mut ps: Vec<Poly> = vec![Poly::one(&f)];
        for m in 1..=n {
            let mut pm = Poly::linear(&f, h[(m - 1, m - 1)]).mul(&ps[m - 1]);
            let mut t = Elem::ONE;
            for i in 1..m {
                t = f.mul(t, h[(m - i, m - i - 1)]);
                if t.is_zero() {
                    break;
                }
                let coef = f.mul(h[(m - i - 1, m - 1)], t);
                pm = pm.sub(&ps[m - i - 1].scale(coef));
            }
            ps.push(pm);
        }
        ps.pop().expect("p_n")
    }

    /// Companion matrix of a monic `f = t^n - a_{n-1} t^{n-1} - ... - a_0`:
    /// ones on the subdiagonal and `(a_0, ..., a_{n-1})` in the last column.
    pub fn companion(f: &Poly) -> Result<Self> {
        let ctx = f.ctx();
        let n = match f.degree() {
            Some(n) if n >= 1 && f.is_monic() => n,
            _ => return Err(Error::PreconditionViolated("companion needs a monic polynomial of degree >= 1".into())),
        };
        let mut m = Self::zeros(ctx, n, n);
        for i in 1..n {
            m[(i, i - 1)] = Elem::ONE;
        }
        for i in 0..n {
            m[(i, n - 1)] = ctx.neg(f.coeff(i));
        }
        Ok(m)
    }

    /// Generalized Jordan block `J_{f,r}`: `r` copies of the companion matrix of
    /// `f` on the diagonal and identity blocks directly above it.
    pub fn generalized_jordan_block(f: &Poly, r: usize) -> Result<Self> {
        let c = Self::companion(f)?;
        let e = c.rows;
        let ctx = f.ctx();
        let mut m = Self::zeros(ctx, e * r, e * r);
        for b in 0..r {
            m.set_block(b * e, b * e, &c);
            if b > 0 {
                m.set_block((b - 1) * e, b * e, &Self::identity(ctx, e));
            }
        }
        Ok(m)
    }
}

/// The `n × n` matrix with ones on the superdiagonal except at `(n-1, n)`,
/// last row `(-y_1, ..., -y_{n-1}, -1)` and last column `(z_1, ..., z_{n-2}, 0, -1)`.
pub fn build_bn(ctx: &FieldCtx, y: &[Elem], z: &[Elem], n: usize) -> Result<Matrix> {
    check_bn_dims(y, z, n)?;
    let mut m = Matrix::zeros(ctx, n, n);
    for i in 0..n - 2 {
        m[(i, i + 1)] = Elem::ONE;
        m[(i, n - 1)] = z[i];
    }
    for (j, &yj) in y.iter().enumerate() {
        m[(n - 1, j)] = ctx.neg(yj);
    }
    m[(n - 1, n - 1)] = ctx.neg(Elem::ONE);
    Ok(m)
}

/// Closed form of the characteristic polynomial of [`build_bn`]:
/// `t^n + t^{n-1} + sum_{j=1}^{n-2} (sum_{i=1}^{n-1-j} y_i z_{i+j-1}) t^{n-1-j}`.
pub fn charpoly_bn_formula(ctx: &FieldCtx, y: &[Elem], z: &[Elem], n: usize) -> Result<Poly> {
    check_bn_dims(y, z, n)?;
    let mut c = vec![Elem::ZERO; n + 1];
    c[n] = Elem::ONE;
    c[n - 1] = Elem::ONE;
    for j in 1..=n - 2 {
        // one-based y_i, z_{i+j-1}
        c[n - 1 - j] = (1..=n - 1 - j).fold(Elem::ZERO, |acc, i| ctx.add(acc, ctx.mul(y[i - 1], z[i + j - 2])));
    }
    Ok(Poly::new(ctx, c))
}

fn check_bn_dims(y: &[Elem], z: &[Elem], n: usize) -> Result<()> {
    if n < 3 || y.len() != n - 1 || z.len() != n - 2 {
        return Err(Error::DimensionMismatch(format!(
            "B_n needs n >= 3, |y| = n-1, |z| = n-2 (n={n}, |y|={}, |z|={})",
            y.len(),
            z.len()
        )));
    }
    Ok(())
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix add")
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.try_sub(rhs).expect("matrix sub")
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix mul")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        let f = &self.ctx;
        Matrix { data: self.data.iter().map(|&a| f.neg(a)).collect(), ..self.clone() }
    }
}
