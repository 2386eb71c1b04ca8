//! Permutation operators on `n` qudits of local dimension `d`.
//!
//! The crate builds the Gram matrix of the operators `P_d(π)` under the
//! normalized Hilbert-Schmidt inner product, inverts it exactly (the
//! Weingarten matrix), evaluates its spectrum from partition content
//! products, and checks the surrounding family of bounds:
//!
//! - [`symgroup`]: permutations, cycle types and the transposition metric.
//! - [`schur_weyl`]: integer partitions, irrep dimensions, the closed-form
//!   Gram spectrum and state-moment ratios.
//! - [`gram`]: exact Gram construction, numeric spectra and norm windows.
//! - [`weingarten`]: exact inverse, Catalan/Möbius leading terms.
//! - [`dense_ops`]: explicit tensor operators, partial transposes and PPT checks.
//! - [`random_moments`]: Haar/Ginibre sampling and exact tensor moment formulas.
//! - [`boson`]: permanents and Haar-vs-Gaussian permanent moments.
//! - [`locality`]: max-cut subsets, PPT coefficient bounds and bias bound chains.
//! - [`setpart`]: set partitions and their (non-orthogonal) Gram matrix.
//!
//! Exact quantities use arbitrary-precision rationals; floating point only
//! enters where a claim is spectral or statistical.

#![forbid(unsafe_code)]

pub mod boson;
pub mod dense_ops;
mod error;
pub mod exact;
pub mod gram;
pub mod limits;
pub mod locality;
pub mod random_moments;
pub mod schur_weyl;
pub mod setpart;
pub mod symgroup;
pub mod weingarten;

pub use error::{Error, Result};
pub use limits::Limits;
