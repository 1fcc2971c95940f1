//! Exact arithmetic over finite fields `F_q` and constructive decompositions of
//! square matrices as sums of two `k`-th powers.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is exact: field
//! elements are canonical integers in `[0, q)`, matrices are dense, and every
//! conjugator or certificate produced here is re-checked by multiplication
//! before it is handed back.
//!
//! Layout:
//!
//! * [`gf`] finite fields `F_{p^m}` with a deterministic modulus and generator.
//! * [`poly`] and [`matrix`] dense polynomials and matrices, characteristic
//!   polynomials, factorization into irreducibles.
//! * [`canon`] generalized Jordan forms, nilpotent Jordan chains, cyclic-vector
//!   conjugators and the extension-field embedding.
//! * [`diageq`] solution counts and special solutions of diagonal equations.
//! * [`waring`] the decomposition engine.
//! * [`oracle`] brute-force ground truth kept independent of the code it checks.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod canon;
pub mod diageq;
mod error;
pub mod gf;
pub mod matrix;
pub mod oracle;
pub mod poly;
pub mod waring;

pub use error::{Error, Result};
pub use gf::{Elem, FieldCtx};
pub use matrix::Matrix;
pub use poly::Poly;
