//! Spectral-norm evaluation of residual matrices.
//!
//! [`spectral_norm_power`] is the production estimator (power method on
//! `Y Yᵀ`, stopped when the Rayleigh quotient stabilizes).
//! [`spectral_norm_exact`] is a cyclic Jacobi eigensolver for small matrices,
//! used as a reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, sample_unit_sphere, DenseMatrix, Matrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub rel_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::usage("EvalConfig needs rel_tol > 0 and max_iters >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNormEstimate {
    pub estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Products with `Y` or `Yᵀ`.
    pub matvecs: u64,
}

/// Power-method estimate of `‖Y‖_∞` from a start drawn from `rng`.
///
/// The returned value is `√ρ` for a Rayleigh quotient `ρ` of `YYᵀ`, hence
/// never above the true spectral norm.
pub fn spectral_norm_power_with(
    y: &Matrix,
    cfg: &EvalConfig,
    rng: &mut RngStream,
) -> Result<SpectralNormEstimate> {
    cfg.validate()?;
    let (n, m) = y.shape();
    if n == 0 || m == 0 {
        return Ok(SpectralNormEstimate {
            estimate: 0.0,
            iterations: 0,
            converged: true,
            matvecs: 0,
        });
    }
    let mut v = sample_unit_sphere(rng, n)?.into_inner();
    let mut w = vec![0.0; m];
    let mut z = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut matvecs = 0;
    for it in 1..=cfg.max_iters {
        y.matvec_transpose_into(&v, &mut w);
        matvecs += 1;
        let rho = dot(&w, &w);
        let done = rho == 0.0 || (rho - prev).abs() <= cfg.rel_tol * rho;
        if done {
            return Ok(SpectralNormEstimate {
                estimate: rho.sqrt(),
                iterations: it,
                converged: true,
                matvecs,
            });
        }
        prev = rho;
        y.matvec_into(&w, &mut z);
        matvecs += 1;
        let nz = dot(&z, &z).sqrt();
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / nz;
        }
        if it == cfg.max_iters {
            break;
        }
    }
    Ok(SpectralNormEstimate {
        estimate: prev.sqrt(),
        iterations: cfg.max_iters,
        converged: false,
        matvecs,
    })
}

/// [`spectral_norm_power_with`] seeded from the evaluation substream of `cfg.seed`.
pub fn spectral_norm_power(y: &Matrix, cfg: &EvalConfig) -> Result<SpectralNormEstimate> {
    let mut rng = RngStream::substream(cfg.seed, RngStream::EVAL);
    spectral_norm_power_with(y, cfg, &mut rng)
}

/// Largest dimension accepted by [`spectral_norm_exact`] (after choosing the
/// smaller of `YYᵀ` and `YᵀY`).
pub const EXACT_MAX_DIM: usize = 64;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, until the
/// off-diagonal Frobenius mass is below `1e-14 · ‖A‖_F`. Unsorted.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::usage("jacobi_eigenvalues needs a square matrix"));
    }
    let mut s: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let total = a.frobenius_norm_sq().sqrt();
    let off = |s: &Vec<Vec<f64>>| -> f64 {
        let mut acc = 0.0;
        for (i, row) in s.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    acc += v * v;
                }
            }
        }
        acc.sqrt()
    };
    for _sweep in 0..100 {
        if off(&s) <= 1e-14 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for row in s.iter_mut() {
                    let (skp, skq) = (row[p], row[q]);
                    row[p] = c * skp - sn * skq;
                    row[q] = sn * skp + c * skq;
                }
                let (head, tail) = s.split_at_mut(q);
                for (spk, sqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (a, b) = (*spk, *sqk);
                    *spk = c * a - sn * b;
                    *sqk = sn * a + c * b;
                }
            }
        }
    }
    Ok((0..n).map(|i| s[i][i]).collect())
}

/// Exact `‖Y‖_∞ = √λ_max(YYᵀ)` for small matrices.
pub fn spectral_norm_exact(y: &Matrix) -> Result<f64> {
    let d = y.to_dense();
    let (n, m) = (d.n_rows(), d.n_cols());
    if n.min(m) > EXACT_MAX_DIM {
        return Err(Error::usage(format!(
            "spectral_norm_exact supports min(n, m) <= {EXACT_MAX_DIM}, got {n}x{m}"
        )));
    }
    if n == 0 || m == 0 {
        return Ok(0.0);
    }
    let (rows, k) = if n <= m { (&d, n) } else { (&d.transpose(), m) };
    let mut gram = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = dot(rows.row(i), rows.row(j));
            gram.set(i, j, v);
            gram.set(j, i, v);
        }
    }
    let lmax = jacobi_eigenvalues(&gram)?
        .into_iter()
        .fold(0.0f64, f64::max);
    Ok(lmax.sqrt())
}

/// Smallest `δ ≥ 0` with `(1 - δ) f ≤ f*`, i.e. `max(0, 1 - f*/f)`.
///
/// An `f` below `f*` (unconverged evaluation or a wrong `f*`) clips to 0.
pub fn relative_accuracy(f_val: f64, f_star: f64) -> Result<f64> {
    if !(f_star > 0.0) {
        return Err(Error::usage(format!("f* must be positive, got {f_star}")));
    }
    if !f_val.is_finite() {
        return Err(Error::NumericalFailure {
            iteration: 0,
            what: format!("non-finite objective value {f_val}"),
        });
    }
    Ok((1.0 - f_star / f_val).max(0.0))
}
