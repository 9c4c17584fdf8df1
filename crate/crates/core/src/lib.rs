//! Inverse Brascamp-Lieb data on finite-dimensional real spaces.
//!
//! A datum is a list of surjections `B_k : H -> H_k` with exponents `c_k`
//! (positive ones first) and a symmetric kernel `Q`.  The crate classifies a
//! datum, computes the best constant over centered Gaussians, decides
//! positivity through the rank-one domain or the subspace condition, and
//! provides brute-force quadrature oracles for cross-checking.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in `ibl-cli`.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod condition_c;
pub mod error;
pub mod field;
pub mod gaussian;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod rank_one;

pub use classify::{classify, decompose, Case, Classification, Decomposition};
pub use error::IblError;
pub use problem::{validate, ExactData, Factor, NormalizedProblem, Problem};

#[cfg(test)]
pub(crate) mod fixtures;
