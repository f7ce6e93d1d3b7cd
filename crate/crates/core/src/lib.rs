//! Matrix-free minimization of spectral norms in relative scale.
//!
//! The largest eigenvalue of a PSD matrix is replaced by the smooth
//! approximation `E_p(X) = E_u ⟨Xᵖu, u⟩^{1/p}`, whose gradient admits an
//! unbiased rank-one sample computed with `p` matrix-vector products. A
//! stochastic gradient method in a Euclidean seminorm then reaches a
//! `δ`-approximate solution of problems such as spectral linear regression
//! `min_x ‖Σ x_i A_i − C‖_∞`.
//!
//! Modules, bottom up: [`matrix`] (dense/sparse storage, sphere sampling),
//! [`oracles`] (power chain and gradient samples), [`sgm`] (the method),
//! [`regression`] (problem assembly and the parameter chain), [`eval`]
//! (spectral-norm evaluation), [`datagen`] and [`harness`] (experiments),
//! [`mtx`] (Matrix Market input/output).

// `!(x > t)` comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod eval;
pub mod harness;
pub mod matrix;
pub mod mtx;
pub mod oracles;
pub mod regression;
pub mod sgm;
pub mod trace;

pub use error::{Error, Result};
