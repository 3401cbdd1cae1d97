//! Exact spin-weighted harmonic analysis on the unit-quaternion group
//! manifold (the 3-sphere), with curl-type first-order operators.
//!
//! The crate is layered bottom-up:
//!
//! - [`half`]: half-integer labels stored as doubled integers.
//! - [`exact`]: signed square roots of rationals and exact radical sums.
//! - [`wigner`]: 3j/6j symbols, Clebsch–Gordan coefficients, generator
//!   matrices — the exact coupling kernel.
//! - [`group`]: quaternion points, Euler charts, invariant frames, Haar
//!   quadrature and seeded Haar sampling.
//! - [`dmatrix`]: rotation matrices for any half-integer spin, single-valued
//!   on the double cover.
//! - [`modes`]: spin-weighted mode functions and expansions.
//! - [`operators`]: grad/div/curl and the curl spectrum on mode expansions.
//! - [`contact`]: pointwise products, recoupling of mode products, norm
//!   scans, parity and zero finding.
//!
//! The command-line crate layers a report generator and named self-check
//! suites on top of these modules.

pub mod contact;
pub mod error;
pub mod exact;
pub mod dmatrix;
pub mod group;
pub mod half;
pub mod modes;
pub mod operators;
pub mod wigner;

pub use exact::{ExactComplex, SqrtLinear, SqrtRational};
pub use error::Error;
pub use half::{triangle_ok, HalfInt};
