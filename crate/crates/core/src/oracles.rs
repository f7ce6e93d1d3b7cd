//! Randomized value and gradient oracles for smoothed maximal-eigenvalue
//! functions.
//!
//! For an odd degree `p = 2k + 1`, a PSD operator `X` and `u` uniform on the
//! sphere, the value sample is `f(u) = ⟨Xᵖu, u⟩^{1/p}` and the gradient
//! sample is the rank-one PSD matrix
//!
//! ```text
//! Xᵏu uᵀXᵏ / ⟨Xᵖu, u⟩^{(p-1)/p}  =  (τ / ⟨X y, y⟩) · y yᵀ,   y = Xᵏu / ‖Xᵏu‖
//! ```
//!
//! whose expectation is the gradient of `E_p(X) = E_u f(u)`. Everything is
//! computed by a normalized power chain with logarithmic accumulation of the
//! norms, so no power of `X` is ever formed and nothing overflows for large
//! `p`.
//!
//! Rectangular and symmetric-indefinite inputs reuse the same chain on
//! `Y Yᵀ` and `S²` respectively.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, sample_unit_sphere, DenseMatrix, Matrix, RngStream, UnitVector};

/// Squared norms and Rayleigh quotients at or below this value count as a
/// hit on the kernel of the operator.
pub const KERNEL_THRESHOLD: f64 = 1e-300;

/// Odd oracle degree `p = 2k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OracleDegree(u32);

impl OracleDegree {
    pub fn new(p: u32) -> Result<Self> {
        if p.is_multiple_of(2) {
            return Err(Error::usage(format!("oracle degree must be odd and positive, got {p}")));
        }
        Ok(Self(p))
    }

    pub fn from_half(k: u32) -> Self {
        Self(2 * k + 1)
    }

    pub fn p(self) -> u32 {
        self.0
    }

    /// Number of normalized power steps, `(p - 1) / 2`.
    pub fn k(self) -> u32 {
        (self.0 - 1) / 2
    }
}

/// A symmetric positive semidefinite operator known only through products.
pub trait PsdOperator {
    fn dim(&self) -> usize;

    /// `out = X v`.
    fn apply(&self, v: &[f64], out: &mut [f64]);

    /// `⟨X v, v⟩`.
    fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut out = vec![0.0; self.dim()];
        self.apply(v, &mut out);
        dot(&out, v)
    }
}

impl PsdOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.matvec_into(v, out);
    }
}

/// Wraps a closure `(v, out) ↦ out = X v`.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> PsdOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        (self.f)(v, out)
    }
}

/// `v ↦ Y (Yᵀ v)` for a rectangular `Y`, counting primitive products with `Y`
/// or `Yᵀ`.
pub struct GramOperator<'a> {
    y: &'a Matrix,
    scratch: std::cell::RefCell<Vec<f64>>,
    matvecs: Cell<u64>,
}

impl<'a> GramOperator<'a> {
    pub fn new(y: &'a Matrix) -> Self {
        Self {
            y,
            scratch: std::cell::RefCell::new(vec![0.0; y.n_cols()]),
            matvecs: Cell::new(0),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        self.y
    }

    /// Products with `Y` or `Yᵀ` performed so far.
    pub fn matvecs(&self) -> u64 {
        self.matvecs.get()
    }

    /// `Yᵀ v`.
    pub fn adjoint(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.y.n_cols()];
        self.y.matvec_transpose_into(v, &mut out);
        self.matvecs.set(self.matvecs.get() + 1);
        out
    }
}

impl PsdOperator for GramOperator<'_> {
    fn dim(&self) -> usize {
        self.y.n_rows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let mut t = self.scratch.borrow_mut();
        self.y.matvec_transpose_into(v, &mut t);
        self.y.matvec_into(&t, out);
        self.matvecs.set(self.matvecs.get() + 2);
    }

    fn quadratic_form(&self, v: &[f64]) -> f64 {
        let t = self.adjoint(v);
        dot(&t, &t)
    }
}

/// Symmetric operator `S` given as a closure; squared to the PSD `S²`.
pub struct SquaredOperator<F> {
    dim: usize,
    s: F,
}

impl<F: Fn(&[f64], &mut [f64])> SquaredOperator<F> {
    pub fn new(dim: usize, s: F) -> Self {
        Self { dim, s }
    }

    fn apply_s(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.s)(v, &mut out);
        out
    }
}

impl<F: Fn(&[f64], &mut [f64])> PsdOperator for SquaredOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let t = self.apply_s(v);
        (self.s)(&t, out);
    }

    fn quadratic_form(&self, v: &[f64]) -> f64 {
        let t = self.apply_s(v);
        dot(&t, &t)
    }
}

/// The chain reached (numerically) the kernel of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("power chain hit the operator kernel at stage {stage}")]
pub struct KernelHit {
    pub stage: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerChainResult {
    /// `Xᵏu / ‖Xᵏu‖`.
    pub y: UnitVector,
    /// `ln ‖Xᵏu‖²`, accumulated as a sum of logs.
    pub log_norm_accum: f64,
    /// `⟨X y, y⟩`.
    pub rayleigh: f64,
    /// `⟨X^{2k+1} u, u⟩^{1/(2k+1)}`.
    pub tau: f64,
}

/// Runs the `k` normalized steps; returns `(y_k, σ_k)`.
fn chain_steps<O: PsdOperator + ?Sized>(
    op: &O,
    u: &UnitVector,
    k: u32,
) -> std::result::Result<(Vec<f64>, f64), KernelHit> {
    let mut y = u.as_slice().to_vec();
    let mut z = vec![0.0; y.len()];
    let mut sigma = 0.0;
    for stage in 0..k {
        op.apply(&y, &mut z);
        let nz2 = dot(&z, &z);
        if !(nz2 > KERNEL_THRESHOLD) {
            return Err(KernelHit { stage });
        }
        sigma += nz2.ln();
        let inv = 1.0 / nz2.sqrt();
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi = zi * inv;
        }
    }
    Ok((y, sigma))
}

fn finish_chain(
    y: Vec<f64>,
    sigma: f64,
    rayleigh: f64,
    k: u32,
) -> std::result::Result<PowerChainResult, KernelHit> {
    if !(rayleigh > KERNEL_THRESHOLD) {
        return Err(KernelHit { stage: k });
    }
    let tau = ((rayleigh.ln() + sigma) / f64::from(2 * k + 1)).exp();
    let y = UnitVector::from_normalized(y);
    Ok(PowerChainResult {
        y,
        log_norm_accum: sigma,
        rayleigh,
        tau,
    })
}

/// Normalized power chain of length `k`: exactly `k + 1` operator
/// applications (the last one only through [`PsdOperator::quadratic_form`]).
pub fn power_chain<O: PsdOperator + ?Sized>(
    op: &O,
    u: &UnitVector,
    k: u32,
) -> std::result::Result<PowerChainResult, KernelHit> {
    let (y, sigma) = chain_steps(op, u, k)?;
    let rayleigh = op.quadratic_form(&y);
    finish_chain(y, sigma, rayleigh, k)
}

/// `f(u) = ⟨Xᵖu, u⟩^{1/p}`; zero when the chain hits the kernel.
pub fn value_fpu<O: PsdOperator + ?Sized>(op: &O, u: &UnitVector, p: OracleDegree) -> f64 {
    power_chain(op, u, p.k()).map_or(0.0, |r| r.tau)
}

/// `scale · d dᵀ` with a unit `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSym {
    pub scale: f64,
    pub direction: UnitVector,
}

impl RankOneSym {
    /// Nuclear norm; equals `scale` since the matrix is PSD rank one.
    pub fn nuclear_norm(&self) -> f64 {
        self.scale
    }

    /// `⟨sample, X⟩ = scale · ⟨X d, d⟩`.
    pub fn inner<O: PsdOperator + ?Sized>(&self, op: &O) -> f64 {
        self.scale * op.quadratic_form(&self.direction)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let d = &self.direction;
        let n = d.len();
        let data = (0..n * n).map(|t| self.scale * d[t / n] * d[t % n]).collect();
        DenseMatrix::new(n, n, data).expect("finite")
    }
}

/// `left · rightᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneRect {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl RankOneRect {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            left: vec![0.0; n],
            right: vec![0.0; m],
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.left) * norm2(&self.right)
    }

    /// `⟨sample, Y⟩ = leftᵀ Y right`.
    pub fn inner(&self, y: &Matrix) -> f64 {
        y.bilinear(&self.left, &self.right)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (n, m) = (self.left.len(), self.right.len());
        let data = (0..n * m)
            .map(|t| self.left[t / m] * self.right[t % m])
            .collect();
        DenseMatrix::new(n, m, data).expect("finite")
    }
}

/// `v wᵀ + w vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTwoSym {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl RankTwoSym {
    /// Eigenvalues are `vᵀw ± ‖v‖‖w‖`, so the spectral norm is their largest modulus.
    pub fn spectral_norm(&self) -> f64 {
        dot(&self.v, &self.w).abs() + norm2(&self.v) * norm2(&self.w)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        let vw = dot(&self.v, &self.w);
        2.0 * (dot(&self.v, &self.v) * dot(&self.w, &self.w) + vw * vw)
    }

    /// `⟨sample, S⟩ = 2 vᵀ S w` for symmetric `S`.
    pub fn inner_dense(&self, s: &DenseMatrix) -> f64 {
        2.0 * s.bilinear(&self.v, &self.w)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.v.len();
        let data = (0..n * n)
            .map(|t| {
                let (i, j) = (t / n, t % n);
                self.v[i] * self.w[j] + self.w[i] * self.v[j]
            })
            .collect();
        DenseMatrix::new(n, n, data).expect("finite")
    }
}

/// Unbiased rank-one gradient sample of `E_p` at `X`.
///
/// On a kernel hit this returns the zero sample (scale 0, direction `u`).
pub fn grad_ep_sample<O: PsdOperator + ?Sized>(
    op: &O,
    u: &UnitVector,
    p: OracleDegree,
) -> RankOneSym {
    match power_chain(op, u, p.k()) {
        Ok(r) => RankOneSym {
            scale: r.tau / r.rayleigh,
            direction: r.y,
        },
        Err(_) => RankOneSym {
            scale: 0.0,
            direction: u.clone(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len(),
        }
    }
}

/// Monte Carlo estimate of `E_p(X)` from i.i.d. value samples.
pub fn estimate_ep<O: PsdOperator + ?Sized>(
    op: &O,
    p: OracleDegree,
    samples: usize,
    rng: &mut RngStream,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(Error::usage("estimate_ep needs at least two samples"));
    }
    let values = (0..samples)
        .map(|_| sample_unit_sphere(rng, op.dim()).map(|u| value_fpu(op, &u, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloEstimate::from_samples(&values))
}

/// Approximation coefficient `p/(p+2) · n^{-1/p}`.
pub fn beta_p(p: OracleDegree, n: usize) -> f64 {
    let p = f64::from(p.p());
    p / (p + 2.0) * (-(n.max(1) as f64).ln() / p).exp()
}

/// Unbiased gradient sample of `Q_p(Y) = E_p(Y Yᵀ)`: `2 [∇̂E_p(YYᵀ)] Y`,
/// returned in factored form. Costs exactly `p` products with `Y` or `Yᵀ`.
pub fn grad_qp_sample(op: &GramOperator<'_>, u: &UnitVector, p: OracleDegree) -> RankOneRect {
    let y = op.matrix();
    let zero = || RankOneRect::zero(y.n_rows(), y.n_cols());
    let k = p.k();
    let Ok((yk, sigma)) = chain_steps(op, u, k) else {
        return zero();
    };
    let right = op.adjoint(&yk);
    let rayleigh = dot(&right, &right);
    let Ok(chain) = finish_chain(yk, sigma, rayleigh, k) else {
        return zero();
    };
    let factor = 2.0 * chain.tau / chain.rayleigh;
    RankOneRect {
        left: chain.y.iter().map(|v| factor * v).collect(),
        right,
    }
}

/// Unbiased rank-two gradient sample of `R_p(S) = E_p(S²)` for symmetric `S`:
/// `S G + G S` with `G = ∇̂E_p(S²)`.
pub fn grad_rp_sample<F: Fn(&[f64], &mut [f64])>(
    op: &SquaredOperator<F>,
    u: &UnitVector,
    p: OracleDegree,
) -> RankTwoSym {
    let n = op.dim();
    let zero = || RankTwoSym {
        v: vec![0.0; n],
        w: vec![0.0; n],
    };
    let k = p.k();
    let Ok((yk, sigma)) = chain_steps(op, u, k) else {
        return zero();
    };
    let w = op.apply_s(&yk);
    let rayleigh = dot(&w, &w);
    let Ok(chain) = finish_chain(yk, sigma, rayleigh, k) else {
        return zero();
    };
    let scale = chain.tau / chain.rayleigh;
    RankTwoSym {
        v: chain.y.iter().map(|x| scale * x).collect(),
        w,
    }
}

/// Heuristic power-iteration gradient `2 v̂ v̂ᵀ Y`, `v̂ = (YYᵀ)^q u / ‖·‖`.
pub fn power_iteration_oracle(op: &GramOperator<'_>, u: &UnitVector, q: u32) -> RankOneRect {
    let y = op.matrix();
    let Ok((v, _)) = chain_steps(op, u, q) else {
        return RankOneRect::zero(y.n_rows(), y.n_cols());
    };
    let right = op.adjoint(&v);
    RankOneRect {
        left: v.iter().map(|x| 2.0 * x).collect(),
        right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn diag(values: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(values.len(), values.len(), values).unwrap()
    }

    fn u_diag() -> UnitVector {
        UnitVector::normalize(vec![1.0, 1.0]).unwrap()
    }

    fn p(v: u32) -> OracleDegree {
        OracleDegree::new(v).unwrap()
    }

    /// Random PSD matrix `G Gᵀ` with `G` n×r Gaussian.
    fn random_psd(rng: &mut RngStream, n: usize, r: usize) -> DenseMatrix {
        let g = DMatrix::from_fn(n, r, |_, _| rng.gaussian());
        let x = &g * g.transpose();
        DenseMatrix::new(n, n, x.transpose().as_slice().to_vec()).unwrap()
    }

    fn lambda_max(x: &DenseMatrix) -> f64 {
        let n = x.n_rows();
        let m = DMatrix::from_row_slice(n, n, x.as_slice());
        m.symmetric_eigenvalues().max()
    }

    #[test]
    fn degree_validation() {
        assert!(OracleDegree::new(0).is_err());
        assert!(OracleDegree::new(4).is_err());
        let d = p(663);
        assert_eq!(d.k(), 331);
        assert_eq!(OracleDegree::from_half(331), d);
    }

    #[test]
    fn power_chain_identity() {
        let id = DenseMatrix::identity(3);
        let u = UnitVector::normalize(vec![0.3, -1.0, 2.0]).unwrap();
        for k in 0..5 {
            let r = power_chain(&id, &u, k).unwrap();
            assert_relative_eq!(r.y.as_slice(), u.as_slice(), epsilon = 1e-15);
            assert_eq!(r.log_norm_accum, 0.0);
            assert_relative_eq!(r.rayleigh, 1.0, epsilon = 1e-15);
            assert_relative_eq!(r.tau, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn power_chain_empty() {
        let x = diag(&[4.0, 1.0]);
        let r = power_chain(&x, &u_diag(), 0).unwrap();
        assert_eq!(r.y, u_diag());
        assert_eq!(r.log_norm_accum, 0.0);
        assert_relative_eq!(r.tau, 2.5, epsilon = 1e-15);
    }

    #[test]
    fn power_chain_diag_example() {
        let x = diag(&[4.0, 1.0]);
        let r = power_chain(&x, &u_diag(), 1).unwrap();
        let s17 = 17f64.sqrt();
        assert_relative_eq!(r.y.as_slice(), &[4.0 / s17, 1.0 / s17][..], epsilon = 1e-15);
        assert_relative_eq!(r.rayleigh, 65.0 / 17.0, epsilon = 1e-14);
        assert_relative_eq!(r.tau, 32.5f64.cbrt(), epsilon = 1e-14);
        assert_relative_eq!(r.tau, 3.191252, epsilon = 1e-6);
        assert_relative_eq!(r.log_norm_accum, 8.5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn power_chain_counts_applications() {
        let calls = Cell::new(0);
        let x = diag(&[3.0, 2.0, 1.0]);
        let op = FnOperator::new(3, |v: &[f64], out: &mut [f64]| {
            calls.set(calls.get() + 1);
            x.matvec_into(v, out);
        });
        let u = UnitVector::normalize(vec![1.0, 1.0, 1.0]).unwrap();
        power_chain(&op, &u, 7).unwrap();
        assert_eq!(calls.get(), 8);
    }

    #[test]
    fn kernel_hit_yields_zero() {
        let x = diag(&[0.0, 1.0]);
        let u = UnitVector::basis(2, 0);
        assert_eq!(power_chain(&x, &u, 2), Err(KernelHit { stage: 0 }));
        assert_eq!(power_chain(&x, &u, 0), Err(KernelHit { stage: 0 }));
        assert_eq!(value_fpu(&x, &u, p(3)), 0.0);
        let g = grad_ep_sample(&x, &u, p(3));
        assert_eq!(g.scale, 0.0);
        assert_eq!(g.direction, u);
    }

    #[test]
    fn value_examples() {
        let x = diag(&[4.0, 1.0]);
        assert_relative_eq!(value_fpu(&x, &u_diag(), p(1)), 2.5, epsilon = 1e-15);
        let f3 = value_fpu(&x, &u_diag(), p(3));
        assert_relative_eq!(f3, 3.191252, epsilon = 1e-6);
        assert!((2.5..=4.0).contains(&f3));
        let id = DenseMatrix::identity(4);
        let u = UnitVector::normalize(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        for q in [1, 3, 5, 9, 101] {
            assert_relative_eq!(value_fpu(&id, &u, p(q)), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn grad_ep_examples() {
        let id = DenseMatrix::identity(3);
        let u = UnitVector::normalize(vec![1.0, -2.0, 0.5]).unwrap();
        let g = grad_ep_sample(&id, &u, p(5));
        assert_relative_eq!(g.scale, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.direction.as_slice(), u.as_slice(), epsilon = 1e-15);

        let mut rng = RngStream::new(1);
        let x = random_psd(&mut rng, 5, 3);
        let u = sample_unit_sphere(&mut rng, 5).unwrap();
        let g = grad_ep_sample(&x, &u, p(1));
        assert_relative_eq!(g.scale, 1.0, epsilon = 1e-14);
        assert_eq!(g.direction, u);

        let x = diag(&[4.0, 1.0]);
        let g = grad_ep_sample(&x, &u_diag(), p(3));
        assert_relative_eq!(g.scale, 32.5f64.cbrt() * 17.0 / 65.0, epsilon = 1e-14);
        assert_relative_eq!(g.scale, 0.834635, epsilon = 1e-6);
        let s17 = 17f64.sqrt();
        assert_relative_eq!(g.direction.as_slice(), &[4.0 / s17, 1.0 / s17][..], epsilon = 1e-15);
    }

    #[test]
    fn beta_examples() {
        assert_relative_eq!(beta_p(p(1), 4), 1.0 / 12.0, epsilon = 1e-16);
        assert!((beta_p(p(663), 100) - 0.9900914).abs() <= 1e-7);
        let mut prev = 0.0;
        for q in [11, 101, 1001, 10001] {
            let b = beta_p(p(q), 50);
            assert!(b > prev && b < 1.0);
            prev = b;
        }
        assert!(1.0 - prev < 1e-3);
    }

    #[test]
    fn grad_qp_examples() {
        let id: Matrix = DenseMatrix::identity(3).into();
        let op = GramOperator::new(&id);
        let u = UnitVector::normalize(vec![1.0, 2.0, 2.0]).unwrap();
        let g = grad_qp_sample(&op, &u, p(7));
        assert_relative_eq!(g.to_dense().as_slice(), RankOneRect {
            left: u.iter().map(|x| 2.0 * x).collect(),
            right: u.to_vec(),
        }
        .to_dense()
        .as_slice(), epsilon = 1e-14);

        let z: Matrix = DenseMatrix::zeros(2, 3).into();
        let g = grad_qp_sample(&GramOperator::new(&z), &u_diag(), p(3));
        assert_eq!(g, RankOneRect::zero(2, 3));

        let y: Matrix = diag(&[2.0, 1.0]).into();
        let op = GramOperator::new(&y);
        let g = grad_qp_sample(&op, &u_diag(), p(3));
        assert_eq!(op.matvecs(), 3);
        let s17 = 17f64.sqrt();
        let scale = 32.5f64.cbrt() * 17.0 / 65.0;
        assert_relative_eq!(g.left.as_slice(), &[2.0 * scale * 4.0 / s17, 2.0 * scale / s17][..], epsilon = 1e-14);
        assert_relative_eq!(g.right.as_slice(), &[8.0 / s17, 1.0 / s17][..], epsilon = 1e-14);
        assert_relative_eq!(g.inner(&y), 2.0 * 32.5f64.cbrt(), epsilon = 1e-13);
    }

    #[test]
    fn grad_qp_costs_exactly_p_matvecs() {
        let mut rng = RngStream::new(9);
        let y: Matrix = random_psd(&mut rng, 6, 6).into();
        for q in [1u32, 3, 5, 21] {
            let op = GramOperator::new(&y);
            let u = sample_unit_sphere(&mut rng, 6).unwrap();
            grad_qp_sample(&op, &u, p(q));
            assert_eq!(op.matvecs(), u64::from(q));
        }
    }

    #[test]
    fn grad_rp_examples() {
        let u = UnitVector::normalize(vec![3.0, 4.0]).unwrap();
        let id = diag(&[1.0, 1.0]);
        let op = SquaredOperator::new(2, |v: &[f64], o: &mut [f64]| id.matvec_into(v, o));
        let g = grad_rp_sample(&op, &u, p(5));
        let expected: Vec<f64> = (0..4).map(|t| 2.0 * u[t / 2] * u[t % 2]).collect();
        assert_relative_eq!(g.to_dense().as_slice(), expected.as_slice(), epsilon = 1e-14);

        let z = DenseMatrix::zeros(2, 2);
        let op = SquaredOperator::new(2, |v: &[f64], o: &mut [f64]| z.matvec_into(v, o));
        let g = grad_rp_sample(&op, &u, p(3));
        assert!(g.v.iter().chain(&g.w).all(|&x| x == 0.0));

        let s = diag(&[2.0, 1.0]);
        let op = SquaredOperator::new(2, |v: &[f64], o: &mut [f64]| s.matvec_into(v, o));
        let g = grad_rp_sample(&op, &u_diag(), p(3));
        let s17 = 17f64.sqrt();
        let scale = 32.5f64.cbrt() * 17.0 / 65.0;
        assert_relative_eq!(g.v.as_slice(), &[scale * 4.0 / s17, scale / s17][..], epsilon = 1e-14);
        assert_relative_eq!(g.w.as_slice(), &[8.0 / s17, 1.0 / s17][..], epsilon = 1e-14);
        assert_relative_eq!(g.inner_dense(&s), 2.0 * 32.5f64.cbrt(), epsilon = 1e-13);
    }

    #[test]
    fn power_iteration_examples() {
        let y: Matrix = DenseMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![-1.0, 0.5, 3.0]])
            .unwrap()
            .into();
        let u = UnitVector::normalize(vec![0.6, 0.8]).unwrap();
        let g = power_iteration_oracle(&GramOperator::new(&y), &u, 0);
        assert_eq!(g.left, vec![1.2, 1.6]);
        assert_relative_eq!(g.right.as_slice(), y.matvec_transpose(&u).unwrap().as_slice(), epsilon = 1e-15);

        let id: Matrix = DenseMatrix::identity(2).into();
        for q in [1u32, 2, 5] {
            let pi = power_iteration_oracle(&GramOperator::new(&id), &u, q);
            let qp = grad_qp_sample(&GramOperator::new(&id), &u, OracleDegree::from_half(q));
            assert_relative_eq!(pi.to_dense().as_slice(), qp.to_dense().as_slice(), epsilon = 1e-14);
        }

        let y: Matrix = diag(&[2.0, 1.0]).into();
        let pi = power_iteration_oracle(&GramOperator::new(&y), &u_diag(), 1);
        let qp = grad_qp_sample(&GramOperator::new(&y), &u_diag(), p(3));
        let s17 = 17f64.sqrt();
        assert_relative_eq!(pi.left.as_slice(), &[8.0 / s17, 2.0 / s17][..], epsilon = 1e-14);
        let ratio = qp.left[0] / pi.left[0];
        assert_relative_eq!(ratio, 32.5f64.cbrt() * 17.0 / 65.0, epsilon = 1e-13);
        assert_relative_eq!(pi.right.as_slice(), qp.right.as_slice(), epsilon = 1e-14);
        // ‖sample‖² = 4⟨YYᵀv̂, v̂⟩
        assert_relative_eq!(pi.frobenius_norm().powi(2), 4.0 * 65.0 / 17.0, epsilon = 1e-13);
    }

    /// Trapezoid rule for E_p(diag(l1, l2)) over the unit circle.
    fn quad_ep(l1: f64, l2: f64, p: f64) -> f64 {
        let pts = 100_000;
        let h = 2.0 * std::f64::consts::PI / pts as f64;
        (0..pts)
            .map(|i| {
                let t = i as f64 * h;
                (l1.powf(p) * t.cos().powi(2) + l2.powf(p) * t.sin().powi(2)).powf(1.0 / p)
            })
            .sum::<f64>()
            / pts as f64
    }

    #[test]
    fn estimate_examples() {
        let mut rng = RngStream::new(21);
        let est = estimate_ep(&DenseMatrix::identity(4), p(5), 100, &mut rng).unwrap();
        assert_relative_eq!(est.mean, 1.0, epsilon = 1e-14);
        assert!(est.stderr < 1e-14);
        assert!(estimate_ep(&DenseMatrix::identity(4), p(5), 1, &mut rng).is_err());

        // λ e₁e₁ᵀ: E_p = λ · E|cos θ|^{2/p}.
        for q in [1u32, 3, 7] {
            let lam = 2.5;
            let exact = quad_ep(lam, 0.0, f64::from(q));
            let est = estimate_ep(&diag(&[lam, 0.0]), p(q), 40_000, &mut rng).unwrap();
            assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{q}: {est:?} vs {exact}");
        }

        let est = estimate_ep(&diag(&[3.0, 1.5]), p(5), 40_000, &mut rng).unwrap();
        let exact = quad_ep(3.0, 1.5, 5.0);
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn stable_matches_naive_powers() {
        let mut rng = RngStream::new(77);
        for trial in 0..20 {
            let n = 2 + trial % 6;
            let q = DMatrix::from_fn(n, n, |_, _| rng.gaussian()).qr().q();
            let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.uniform(1.0, 10.0)));
            let xm = &q * lam * q.transpose();
            let x = DenseMatrix::new(n, n, xm.transpose().as_slice().to_vec()).unwrap();
            let u = sample_unit_sphere(&mut rng, n).unwrap();
            let uv = nalgebra::DVector::from_column_slice(&u);
            for deg in [1u32, 3, 5, 7, 9] {
                let k = (deg - 1) / 2;
                let xk_u = xm.pow(k) * &uv;
                let denom = (xm.pow(deg) * &uv).dot(&uv).powf(f64::from(deg - 1) / f64::from(deg));
                let naive = &xk_u * xk_u.transpose() / denom;
                let stable = grad_ep_sample(&x, &u, p(deg)).to_dense();
                let naive_rm = naive.transpose();
                let diff: f64 = stable
                    .as_slice()
                    .iter()
                    .zip(naive_rm.as_slice())
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(diff <= 1e-8 * naive.norm(), "deg {deg}: {diff}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn euler_identity_norm_bound_and_monotonicity(seed in any::<u64>(), n in 1usize..=20, rank in 1usize..=20) {
            let mut rng = RngStream::new(seed);
            let x = random_psd(&mut rng, n, rank);
            let lmax = lambda_max(&x);
            let u = sample_unit_sphere(&mut rng, n).unwrap();
            let mut prev = 0.0;
            for deg in [1u32, 3, 5, 7, 9] {
                let g = grad_ep_sample(&x, &u, p(deg));
                let f = value_fpu(&x, &u, p(deg));
                prop_assert!((g.inner(&x) - f).abs() <= 1e-10 * (1.0 + lmax));
                prop_assert!(g.scale <= 1.0 + 1e-10);
                prop_assert!(f >= prev - 1e-12 * (1.0 + lmax));
                prop_assert!(f <= lmax + 1e-10 * (1.0 + lmax));
                prev = f;
            }
        }

        #[test]
        fn rectangular_and_symmetric_bounds(seed in any::<u64>(), n in 1usize..=8, extra in 0usize..=6) {
            let mut rng = RngStream::new(seed);
            let m = n + extra;
            let data: Vec<f64> = (0..n * m).map(|_| rng.gaussian()).collect();
            let y: Matrix = DenseMatrix::new(n, m, data).unwrap().into();
            let yd = DMatrix::from_row_slice(n, m, y.to_dense().as_slice());
            let spec = yd.singular_values().max();
            let u = sample_unit_sphere(&mut rng, n).unwrap();
            for deg in [1u32, 3, 9] {
                let op = GramOperator::new(&y);
                let g = grad_qp_sample(&op, &u, p(deg));
                prop_assert!(g.frobenius_norm() <= 2.0 * spec * (1.0 + 1e-10));
                let f = value_fpu(&GramOperator::new(&y), &u, p(deg));
                prop_assert!((g.inner(&y) - 2.0 * f).abs() <= 1e-10 * (1.0 + spec * spec));
            }

            let a = DMatrix::from_fn(n, n, |_, _| rng.gaussian());
            let sm = &a + a.transpose();
            let s = DenseMatrix::new(n, n, sm.as_slice().to_vec()).unwrap();
            let snorm = sm.symmetric_eigenvalues().amax();
            let op = SquaredOperator::new(n, |v: &[f64], o: &mut [f64]| s.matvec_into(v, o));
            for deg in [1u32, 3, 9] {
                let g = grad_rp_sample(&op, &u, p(deg));
                prop_assert!(g.spectral_norm() <= 2.0 * snorm * (1.0 + 1e-10));
                prop_assert!(g.frobenius_norm_sq() <= 8.0 * snorm * snorm * (1.0 + 1e-10));
                let dense = DMatrix::from_row_slice(n, n, g.to_dense().as_slice());
                let exact = dense.symmetric_eigenvalues().amax();
                prop_assert!((g.spectral_norm() - exact).abs() <= 1e-10 * (1.0 + exact));
            }
        }
    }
}
