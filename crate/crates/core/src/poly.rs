//! Dense univariate polynomials over `F_q` and their factorization.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::gf::{Elem, FieldCtx};
use crate::{Error, Result};

/// Little-endian coefficients with no trailing zeros; the zero polynomial is
/// the empty vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ctx: FieldCtx,
    coeffs: Vec<Elem>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter().map(|c| self.ctx.format_elem(*c))).finish()
    }
}

impl Poly {
    pub fn new(ctx: &FieldCtx, mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { ctx: ctx.clone(), coeffs }
    }

    pub fn from_indices(ctx: &FieldCtx, indices: &[u32]) -> Self {
        Self::new(ctx, indices.iter().map(|&i| ctx.elem(i)).collect())
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        Poly { ctx: ctx.clone(), coeffs: Vec::new() }
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::constant(ctx, Elem::ONE)
    }

    pub fn constant(ctx: &FieldCtx, c: Elem) -> Self {
        Self::new(ctx, vec![c])
    }

    /// The indeterminate `t`.
    pub fn t(ctx: &FieldCtx) -> Self {
        Self::monomial(ctx, Elem::ONE, 1)
    }

    pub fn monomial(ctx: &FieldCtx, c: Elem, degree: usize) -> Self {
        let mut coeffs = vec![Elem::ZERO; degree + 1];
        coeffs[degree] = c;
        Self::new(ctx, coeffs)
    }

    /// `t - root`.
    pub fn linear(ctx: &FieldCtx, root: Elem) -> Self {
        Self::new(ctx, vec![ctx.neg(root), Elem::ONE])
    }

    /// `prod (t - r)` over the given roots.
    pub fn from_roots(ctx: &FieldCtx, roots: &[Elem]) -> Self {
        roots.iter().fold(Self::one(ctx), |acc, &r| acc.mul(&Self::linear(ctx, r)))
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn indices(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.index()).collect()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Elem::ONE
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    pub fn lead(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(Elem::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == Elem::ONE
    }

    /// Ordering used for canonical block lists: degree, then coefficients from
    /// the top down by index.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }

    fn same_ctx(&self, other: &Self) {
        assert!(self.ctx == other.ctx, "polynomials over different fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ctx(other);
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| self.ctx.add(self.coeff(i), other.coeff(i))).collect();
        Self::new(&self.ctx, c)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.ctx, self.coeffs.iter().map(|&c| self.ctx.neg(c)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: Elem) -> Self {
        Self::new(&self.ctx, self.coeffs.iter().map(|&c| self.ctx.mul(c, s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ctx(other);
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ctx);
        }
        let f = &self.ctx;
        let mut out = vec![Elem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(f, out)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Scaled to leading coefficient one; the zero polynomial stays zero.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.ctx.inv(self.lead()).expect("nonzero lead");
        self.scale(inv)
    }

    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        self.same_ctx(divisor);
        let d = divisor.degree().ok_or(Error::DivisionByZero)?;
        let f = &self.ctx;
        let lead_inv = f.inv(divisor.lead())?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::zero(f), self.clone()));
        }
        let mut quot = vec![Elem::ZERO; rem.len() - d];
        for i in (d..rem.len()).rev() {
            let c = f.mul(rem[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[i - d] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[i - d + j] = f.sub(rem[i - d + j], f.mul(c, b));
            }
        }
        rem.truncate(d);
        Ok((Self::new(f, quot), Self::new(f, rem)))
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        Ok(self.divmod(divisor)?.1)
    }

    /// Quotient of a division known to be exact.
    fn div_exact(&self, divisor: &Self) -> Self {
        let (q, r) = self.divmod(divisor).expect("nonzero divisor");
        debug_assert!(r.is_zero(), "inexact division");
        q
    }

    /// Monic greatest common divisor (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: Elem) -> Elem {
        let f = &self.ctx;
        self.coeffs.iter().rev().fold(Elem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self) -> Self {
        let f = &self.ctx;
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
            .collect();
        Self::new(f, c)
    }

    fn mul_mod(&self, other: &Self, modulus: &Self) -> Self {
        self.mul(other).rem(modulus).expect("nonzero modulus")
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(&self, mut e: u64, modulus: &Self) -> Self {
        let mut base = self.rem(modulus).expect("nonzero modulus");
        let mut acc = Self::one(&self.ctx).rem(modulus).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus);
            }
            base = base.mul_mod(&base, modulus);
            e >>= 1;
        }
        acc
    }

    /// Irreducibility over `F_q`: no factor of degree `d <= deg/2`, checked as
    /// `gcd(t^(q^d) - t, f) = 1`.
    pub fn is_irreducible(&self) -> bool {
        let Some(n) = self.degree() else { return false };
        if n == 0 {
            return false;
        }
        let t = Self::t(&self.ctx);
        let q = u64::from(self.ctx.q());
        let mut h = t.rem(self).expect("nonzero");
        for _ in 1..=n / 2 {
            h = h.pow_mod(q, self);
            if !h.sub(&t).gcd(self).is_one() {
                return false;
            }
        }
        true
    }

    /// Factorization of the monic normalization into monic irreducibles,
    /// sorted canonically. Equal-degree splitting is randomized from `seed`.
    pub fn factor(&self, seed: u64) -> Factorization {
        assert!(self.degree().is_some_and(|d| d >= 1), "factor needs degree >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut factors = Vec::new();
        for (sqf, mult) in self.monic().squarefree_parts() {
            for (block, d) in sqf.distinct_degree() {
                for g in block.equal_degree(d, &mut rng) {
                    factors.push((g, mult));
                }
            }
        }
        factors.sort_by(|a, b| a.0.canonical_cmp(&b.0).then(a.1.cmp(&b.1)));
        Factorization { factors }
    }

    /// Distinct roots in `F_q`, by index.
    pub fn roots(&self) -> Vec<Elem> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut out: Vec<Elem> = self
            .factor(0)
            .factors
            .iter()
            .filter(|(g, _)| g.degree() == Some(1))
            .map(|(g, _)| self.ctx.neg(g.coeff(0)))
            .collect();
        out.sort();
        out
    }

    /// Squarefree decomposition of a monic polynomial: pairs `(g, i)` with
    /// `self = prod g^i`, each `g` squarefree and the `g` pairwise coprime.
    fn squarefree_parts(&self) -> Vec<(Poly, usize)> {
        let f = &self.ctx;
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        if d.is_zero() {
            return self.pth_root_poly().squarefree_parts().into_iter().map(|(g, i)| (g, i * f.p() as usize)).collect();
        }
        let mut c = self.gcd(&d);
        let mut w = self.div_exact(&c);
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c);
            let fac = w.div_exact(&y);
            if !fac.is_one() {
                out.push((fac, i));
            }
            w = y;
            c = c.div_exact(&w);
            i += 1;
        }
        if !c.is_one() {
            let p = f.p() as usize;
            out.extend(c.pth_root_poly().squarefree_parts().into_iter().map(|(g, j)| (g, j * p)));
        }
        out
    }

    /// For a polynomial in `t^p`, the polynomial whose `p`-th power it is.
    fn pth_root_poly(&self) -> Poly {
        let f = &self.ctx;
        let p = f.p() as usize;
        let c = self.coeffs.iter().step_by(p).map(|&c| f.pth_root(c)).collect();
        Poly::new(f, c)
    }

    /// Splits a monic squarefree polynomial into products of irreducibles of
    /// equal degree.
    fn distinct_degree(&self) -> Vec<(Poly, usize)> {
        let t = Self::t(&self.ctx);
        let q = u64::from(self.ctx.q());
        let mut out = Vec::new();
        let mut rest = self.clone();
        let mut h = t.rem(&rest).expect("nonzero");
        let mut d = 0;
        while rest.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = h.pow_mod(q, &rest);
            let g = h.sub(&t).gcd(&rest);
            if !g.is_one() {
                rest = rest.div_exact(&g);
                h = h.rem(&rest).expect("nonzero");
                out.push((g, d));
            }
        }
        if let Some(deg) = rest.degree().filter(|&deg| deg > 0) {
            out.push((rest, deg));
        }
        out
    }

    /// Cantor-Zassenhaus split of a product of distinct irreducibles of degree `d`.
    fn equal_degree(&self, d: usize, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = self.degree().expect("nonzero");
        if n == d {
            return vec![self.clone()];
        }
        let f = &self.ctx;
        let q = u64::from(f.q());
        loop {
            let h = Poly::new(f, (0..n).map(|_| f.elem(rng.next_u32() % f.q())).collect());
            if h.degree().unwrap_or(0) == 0 {
                continue;
            }
            let g = h.gcd(self);
            let candidate = if !g.is_one() {
                g
            } else if f.p() == 2 {
                // trace map h + h^2 + ... + h^(2^(m d - 1))
                let mut term = h.rem(self).expect("nonzero");
                let mut tr = term.clone();
                for _ in 1..(f.m() as usize * d) {
                    term = term.mul_mod(&term, self);
                    tr = tr.add(&term);
                }
                tr.gcd(self)
            } else {
                // h^((q^d - 1)/2) = (h^(1 + q + ... + q^(d-1)))^((q-1)/2)
                let mut frob = h.rem(self).expect("nonzero");
                let mut norm = frob.clone();
                for _ in 1..d {
                    frob = frob.pow_mod(q, self);
                    norm = norm.mul_mod(&frob, self);
                }
                let e = norm.pow_mod((q - 1) / 2, self);
                e.sub(&Poly::one(f)).gcd(self)
            };
            let cd = candidate.degree().unwrap_or(0);
            if cd > 0 && cd < n {
                let other = self.div_exact(&candidate);
                let mut out = candidate.equal_degree(d, rng);
                out.extend(other.equal_degree(d, rng));
                return out;
            }
        }
    }
}

/// `prod f_i^{r_i}` with `f_i` monic irreducible and pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(Poly, usize)>,
}

impl Factorization {
    pub fn product(&self, ctx: &FieldCtx) -> Poly {
        self.factors.iter().fold(Poly::one(ctx), |acc, (f, r)| acc.mul(&f.pow(*r as u64)))
    }
}
