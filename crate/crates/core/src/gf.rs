//! Finite fields `F_q`, `q = p^m`, in the polynomial basis `(1, x, ..., x^{m-1})`
//! of `F_p[x]/(g)`.
//!
//! An element is stored as the integer `c_0 + c_1 p + ... + c_{m-1} p^{m-1}` of
//! its little-endian coefficient vector, so equality is integer equality and
//! iteration over the field is iteration over `0..q`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::poly::Poly;
use crate::{Error, Result};

/// Largest supported field size.
pub const MAX_Q: u64 = 1 << 20;

/// A field element; meaningful only together with its [`FieldCtx`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    /// Canonical index in `0..q`.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(PartialEq, Eq)]
struct Inner {
    p: u32,
    m: u32,
    q: u32,
    /// Monic modulus, little-endian, `m + 1` residues.
    modulus: Vec<u32>,
    generator: u32,
}

/// An immutable, cheaply clonable finite field context.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}{:?}", self.0.p, self.0.m, self.0.modulus)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`, ascending.
pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Splits `q` into `(p, m)` with `q = p^m`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = *prime_divisors(q).first()?;
    let mut m = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p, m))
}

fn checked_q(p: u64, m: u32) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::PreconditionViolated("extension degree must be >= 1".into()));
    }
    let mut q: u64 = 1;
    for _ in 0..m {
        q = q.saturating_mul(p);
        if q > MAX_Q {
            return Err(Error::Overflow { p, m });
        }
    }
    Ok(q as u32)
}

impl FieldCtx {
    /// `F_{p^m}` with the smallest monic irreducible modulus (ordered by the
    /// integer encoding of its lower coefficients) and the smallest primitive
    /// element.
    pub fn new(p: u64, m: u32) -> Result<Self> {
        let q = checked_q(p, m)?;
        if m == 1 {
            return Ok(Self::assemble(p as u32, 1, q, vec![0, 1]));
        }
        let prime = FieldCtx::new(p, 1)?;
        let p32 = p as u32;
        for code in 0..q {
            let mut coeffs = digits(code, p32, m);
            if coeffs[0] == 0 {
                continue;
            }
            coeffs.push(1);
            let f = Poly::from_indices(&prime, &coeffs);
            if f.is_irreducible() {
                return Ok(Self::assemble(p32, m, q, coeffs));
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// `F_p[x]/(modulus)` for a caller-supplied monic irreducible modulus given
    /// as little-endian residues.
    pub fn with_modulus(p: u64, modulus: &[u64]) -> Result<Self> {
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::NotIrreducible);
        }
        let m = (modulus.len() - 1) as u32;
        let q = checked_q(p, m)?;
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::NotIrreducible);
        }
        let coeffs: Vec<u32> = modulus.iter().map(|&c| c as u32).collect();
        if m == 1 {
            // Every degree-1 modulus gives the same element encoding.
            return Ok(Self::assemble(p as u32, 1, q, vec![0, 1]));
        }
        let prime = FieldCtx::new(p, 1)?;
        if !Poly::from_indices(&prime, &coeffs).is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        Ok(Self::assemble(p as u32, m, q, coeffs))
    }

    fn assemble(p: u32, m: u32, q: u32, modulus: Vec<u32>) -> Self {
        let mut ctx = FieldCtx(Arc::new(Inner { p, m, q, modulus, generator: 1 }));
        let g = ctx.find_generator();
        Arc::get_mut(&mut ctx.0).expect("fresh context").generator = g.0;
        ctx
    }

    fn find_generator(&self) -> Elem {
        let order = u64::from(self.q()) - 1;
        let cofactors: Vec<u64> = prime_divisors(order).into_iter().map(|r| order / r).collect();
        (1..self.q())
            .map(Elem)
            .find(|&g| cofactors.iter().all(|&c| self.pow(g, c) != Elem::ONE))
            .expect("multiplicative group of a finite field is cyclic")
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn m(&self) -> u32 {
        self.0.m
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Monic modulus residues, little-endian (`[0, 1]` for prime fields).
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// The certified primitive element.
    pub fn generator(&self) -> Elem {
        Elem(self.0.generator)
    }

    /// `"p^m"`.
    pub fn spec_string(&self) -> String {
        format!("{}^{}", self.p(), self.m())
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Element with the given canonical index.
    pub fn elem(&self, index: u32) -> Elem {
        assert!(index < self.q(), "index {index} out of range for F_{}", self.q());
        Elem(index)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(i64::from(self.p())) as u32)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q()).map(Elem)
    }

    /// Little-endian coefficient residues of `a`.
    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        digits(a.0, self.p(), self.m())
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        if coeffs.len() != self.m() as usize || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(Error::InvalidElement(format!("{coeffs:?} for F_{}", self.q())));
        }
        Ok(Elem(undigits(coeffs, self.p())))
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p();
        if self.m() == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= p { s - p } else { s });
        }
        if p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (mut x, mut y, mut place, mut out) = (a.0, b.0, 1u32, 0u32);
        while x | y != 0 {
            let d = (x % p + y % p) % p;
            out += d * place;
            place *= p;
            x /= p;
            y /= p;
        }
        Elem(out)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.p();
        if self.m() == 1 {
            return Elem(if a.0 == 0 { 0 } else { p - a.0 });
        }
        if p == 2 {
            return a;
        }
        let (mut x, mut place, mut out) = (a.0, 1u32, 0u32);
        while x != 0 {
            let d = x % p;
            out += ((p - d) % p) * place;
            place *= p;
            x /= p;
        }
        Elem(out)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        let p = u64::from(self.p());
        let m = self.m() as usize;
        if m == 1 {
            return Elem((u64::from(a.0) * u64::from(b.0) % p) as u32);
        }
        let mut da = [0u64; 20];
        let mut db = [0u64; 20];
        split_digits(a.0, self.p(), &mut da[..m]);
        split_digits(b.0, self.p(), &mut db[..m]);
        let mut prod = [0u64; 40];
        for i in 0..m {
            if da[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        let modulus = &self.0.modulus;
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            // x^m = -(g_0 + ... + g_{m-1} x^{m-1})
            for (j, &g) in modulus[..m].iter().enumerate() {
                let t = c * u64::from(g) % p;
                prod[i - m + j] = (prod[i - m + j] + p - t) % p;
            }
            prod[i] = 0;
        }
        let mut out = 0u64;
        for i in (0..m).rev() {
            out = out * p + prod[i];
        }
        Elem(out as u32)
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, u64::from(self.q()) - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Elem) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        let mut order = u64::from(self.q()) - 1;
        for r in prime_divisors(order) {
            while order % r == 0 && self.pow(a, order / r) == Elem::ONE {
                order /= r;
            }
        }
        Some(order)
    }

    /// `p`-th root (the inverse Frobenius).
    pub fn pth_root(&self, a: Elem) -> Elem {
        self.pow(a, u64::from(self.q() / self.p()))
    }

    /// Image of `x -> x^k` over the whole field, sorted by index.
    pub fn kth_power_set(&self, k: u64) -> Vec<Elem> {
        let mut seen = vec![false; self.q() as usize];
        for x in self.elements() {
            seen[self.pow(x, k).0 as usize] = true;
        }
        seen.iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| Elem(i as u32)).collect()
    }

    /// All `x` with `x^k = y`, in index order, by exhaustive scan.
    pub fn kth_roots(&self, y: Elem, k: u64) -> Vec<Elem> {
        if y.is_zero() {
            return vec![Elem::ZERO];
        }
        if !self.is_kth_power(y, k) {
            return Vec::new();
        }
        (1..self.q()).map(Elem).filter(|&x| self.pow(x, k) == y).collect()
    }

    /// First root in index order, if any.
    pub fn kth_root(&self, y: Elem, k: u64) -> Option<Elem> {
        if y.is_zero() {
            return Some(Elem::ZERO);
        }
        if !self.is_kth_power(y, k) {
            return None;
        }
        (1..self.q()).map(Elem).find(|&x| self.pow(x, k) == y)
    }

    /// Power-residue test: `y` is a `k`-th power iff `y = 0` or
    /// `y^((q-1)/gcd(k, q-1)) = 1`.
    pub fn is_kth_power(&self, y: Elem, k: u64) -> bool {
        if y.is_zero() {
            return true;
        }
        let order = u64::from(self.q()) - 1;
        self.pow(y, order / gcd(k, order)) == Elem::ONE
    }

    /// Text form: decimal residue when `m = 1`, `"[c0,c1,...]"` otherwise.
    pub fn format_elem(&self, a: Elem) -> String {
        if self.m() == 1 {
            return format!("{}", a.0);
        }
        let parts: Vec<String> = self.coeffs(a).iter().map(|c| format!("{c}")).collect();
        format!("[{}]", parts.join(","))
    }

    /// Inverse of [`FieldCtx::format_elem`]. For prime fields any integer is
    /// accepted and reduced (so `-1` parses).
    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let s = s.trim();
        let bad = || Error::InvalidElement(String::from(s));
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let coeffs = inner
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            return self.from_coeffs(&coeffs);
        }
        if self.m() != 1 {
            return Err(bad());
        }
        let v: i64 = s.parse().map_err(|_| bad())?;
        Ok(self.from_int(v))
    }
}

fn split_digits(mut x: u32, p: u32, out: &mut [u64]) {
    for d in out.iter_mut() {
        *d = u64::from(x % p);
        x /= p;
    }
}

fn digits(x: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = vec![0u32; m as usize];
    let mut x = x;
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(FieldCtx::new(6, 1).unwrap_err(), Error::NotPrime(6));
        assert_eq!(FieldCtx::new(1, 1).unwrap_err(), Error::NotPrime(1));
        assert!(matches!(FieldCtx::new(2, 21), Err(Error::Overflow { .. })));
        assert!(FieldCtx::new(2, 20).is_ok());
        assert!(FieldCtx::new(3, 0).is_err());
    }

    #[test]
    fn f7_generator_has_order_six() {
        let f = FieldCtx::new(7, 1).unwrap();
        // brute force: orders of all units
        let orders: Vec<u64> = (1..7).map(|i| f.order(f.elem(i)).unwrap()).collect();
        assert_eq!(orders, [1, 3, 6, 3, 6, 2]);
        assert_eq!(f.generator(), f.elem(3));
    }

    #[test]
    fn f2_generator_is_one() {
        let f = FieldCtx::new(2, 1).unwrap();
        assert_eq!(f.generator(), Elem::ONE);
    }

    #[test]
    fn f9_modulus_and_generator() {
        let f = FieldCtx::new(3, 2).unwrap();
        // monic irreducible quadratics over F_3 are t^2+1, t^2+t+2, t^2+2t+2;
        // the smallest encoding is t^2 + 1.
        assert_eq!(f.modulus(), &[1, 0, 1]);
        assert_eq!(f.order(f.generator()), Some(8));
        // x has order 4 since x^2 = -1, so the generator is not x itself.
        assert_ne!(f.generator(), f.from_coeffs(&[0, 1]).unwrap());
        let g = f.generator();
        assert_eq!(f.mul(g, f.pow(g, 7)), Elem::ONE);
    }

    #[test]
    fn f7_inverse_of_three() {
        let f = FieldCtx::new(7, 1).unwrap();
        assert_eq!(f.inv(f.elem(3)).unwrap(), f.elem(5));
        assert_eq!(f.inv(Elem::ZERO), Err(Error::DivisionByZero));
    }

    #[test]
    fn inverses_exhaustive_small_fields() {
        for (p, m) in [(2, 1), (2, 8), (3, 5), (5, 2), (7, 2), (13, 2), (251, 1)] {
            let f = FieldCtx::new(p, m).unwrap();
            for x in f.elements().skip(1) {
                assert_eq!(f.mul(f.inv(x).unwrap(), x), Elem::ONE, "F_{}^{} x={x:?}", p, m);
            }
        }
    }

    #[test]
    fn kth_power_sets() {
        let f7 = FieldCtx::new(7, 1).unwrap();
        let idx = |v: Vec<Elem>| v.iter().map(|e| e.index()).collect::<Vec<_>>();
        assert_eq!(idx(f7.kth_power_set(3)), [0, 1, 6]);
        assert_eq!(f7.kth_power_set(1).len(), 7);
        let f5 = FieldCtx::new(5, 1).unwrap();
        assert_eq!(idx(f5.kth_power_set(2)), [0, 1, 4]);
    }

    #[test]
    fn kth_power_set_sizes_exhaustive() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 49, 64, 81, 121, 125, 128, 243, 256] {
            let (p, m) = prime_power(q).unwrap();
            let f = FieldCtx::new(p, m).unwrap();
            for k in 1..=12u64 {
                let expect = 1 + (q - 1) / gcd(k, q - 1);
                assert_eq!(f.kth_power_set(k).len() as u64, expect, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn kth_roots_examples() {
        let f = FieldCtx::new(7, 1).unwrap();
        let r: Vec<u32> = f.kth_roots(f.elem(6), 3).iter().map(|e| e.index()).collect();
        assert_eq!(r, [3, 5, 6]);
        assert_eq!(f.kth_roots(Elem::ZERO, 3), [Elem::ZERO]);
        assert!(f.kth_roots(f.elem(3), 3).is_empty());
        assert!(!f.is_kth_power(f.elem(3), 3));
    }

    #[test]
    fn encoding_roundtrip() {
        let f = FieldCtx::new(3, 2).unwrap();
        let a = f.from_coeffs(&[2, 1]).unwrap();
        assert_eq!(f.format_elem(a), "[2,1]");
        assert_eq!(f.parse_elem("[2, 1]").unwrap(), a);
        assert!(f.parse_elem("5").is_err());
        let g = FieldCtx::new(7, 1).unwrap();
        assert_eq!(g.parse_elem("-1").unwrap(), g.elem(6));
        assert_eq!(g.format_elem(g.elem(4)), "4");
    }

    #[test]
    fn custom_modulus() {
        let f = FieldCtx::with_modulus(3, &[2, 1, 1]).unwrap();
        assert_eq!(f.order(f.generator()), Some(8));
        assert_ne!(f, FieldCtx::new(3, 2).unwrap());
        assert_eq!(FieldCtx::with_modulus(3, &[2, 0, 1]), Err(Error::NotIrreducible));
    }

    #[test]
    fn prime_power_split() {
        assert_eq!(prime_power(81), Some((3, 4)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
