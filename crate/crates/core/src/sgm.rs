//! Stochastic gradient method for convex minimization in relative scale.
//!
//! Distances are measured in the Euclidean seminorm `‖x‖_B = ⟨Bx, x⟩^{1/2}`
//! of a PSD matrix `B` (possibly singular). Each iteration draws a stochastic
//! gradient at the prox center `v_k`, folds `v_k` into the weighted average
//! `x_{k+1}` with weight `c_k = a_k(1 - L a_k)` and moves the prox center by
//! the gradient step `B(v_{k+1} - v_k) = -a_k g_k`.

use std::ops::ControlFlow;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix, RngStream};

/// Relative eigenvalue cutoff of the pseudo-solve.
pub const PSEUDO_CUTOFF: f64 = 1e-12;
/// `λ_min / λ_max` above which `B` counts as positive definite.
pub const DEFINITE_RATIO: f64 = 1e-10;
/// Relative residual accepted from a gradient step.
pub const STEP_RESIDUAL_TOL: f64 = 1e-8;

/// The metric matrix `B` with a factorization prepared for repeated solves.
#[derive(Debug, Clone)]
pub struct GramSystem {
    matrix: DMatrix<f64>,
    eigen: SymmetricEigen<f64, Dyn>,
    cholesky: Option<Cholesky<f64, Dyn>>,
    lambda_max: f64,
    norm: f64,
}

impl GramSystem {
    pub fn new(b: &DenseMatrix) -> Result<Self> {
        let d = b.n_rows();
        if b.n_cols() != d {
            return Err(Error::usage("Gram matrix must be square"));
        }
        let matrix = DMatrix::from_row_slice(d, d, b.as_slice());
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::usage("Gram matrix is not symmetric"));
        }
        let eigen = SymmetricEigen::new(matrix.clone());
        let lambda_max = eigen.eigenvalues.max().max(0.0);
        let lambda_min = eigen.eigenvalues.min();
        if lambda_min < -1e-10 * lambda_max.max(scale) {
            return Err(Error::usage(format!(
                "Gram matrix is not positive semidefinite (λ_min = {lambda_min:.3e})"
            )));
        }
        let cholesky = if d > 0 && lambda_min > DEFINITE_RATIO * lambda_max {
            Cholesky::new(matrix.clone())
        } else {
            None
        };
        Ok(Self {
            matrix,
            eigen,
            cholesky,
            lambda_max,
            norm: lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_definite(&self) -> bool {
        self.cholesky.is_some()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// `‖x‖_B² = ⟨Bx, x⟩`.
    pub fn seminorm_sq(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.matrix * &v))
    }

    /// Minimum-norm least-squares solution of `B s = rhs` through the
    /// eigendecomposition.
    pub fn solve_pseudo(&self, rhs: &[f64]) -> Vec<f64> {
        let cutoff = PSEUDO_CUTOFF * self.lambda_max;
        let q = &self.eigen.eigenvectors;
        let mut coeffs = q.tr_mul(&DVector::from_column_slice(rhs));
        for (c, &lam) in coeffs.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            *c = if lam > cutoff { *c / lam } else { 0.0 };
        }
        (q * coeffs).as_slice().to_vec()
    }

    /// Cholesky solve; `None` when `B` is not numerically definite.
    pub fn solve_cholesky(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        self.cholesky
            .as_ref()
            .map(|c| c.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
    }

    /// Solves `B s = rhs`, checking the residual.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let s = self
            .solve_cholesky(rhs)
            .unwrap_or_else(|| self.solve_pseudo(rhs));
        let bs = self.apply(&s);
        let residual = norm2(&bs.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
        let tolerance = STEP_RESIDUAL_TOL * (norm2(rhs) + self.norm * norm2(&s));
        if !(residual <= tolerance) {
            return Err(Error::IllConditioned {
                residual,
                tolerance,
            });
        }
        Ok(s)
    }
}

/// Gradient step `T = argmin ⟨g, x⟩ + ½‖x - x̄‖_B²`, i.e. `B(T - x̄) = -g`,
/// taking the minimum-norm displacement when `B` is singular.
pub fn gradient_step(gram: &GramSystem, x_bar: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if x_bar.len() != gram.dim() || g.len() != gram.dim() {
        return Err(Error::usage("gradient_step: dimension mismatch"));
    }
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    let s = gram.solve(&neg)?;
    Ok(x_bar.iter().zip(&s).map(|(x, s)| x + s).collect())
}

/// Constants `(γ₀, L)` of a problem consistent with its seminorm, and the
/// approximation coefficient `β_p` of a smoothed surrogate (1 when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyConstants {
    pub gamma0: f64,
    pub l: f64,
    pub beta_p: f64,
}

impl ConsistencyConstants {
    pub fn new(gamma0: f64, l: f64, beta_p: f64) -> Result<Self> {
        if !(gamma0 > 0.0 && l > 0.0 && beta_p > 0.0 && beta_p <= 1.0) {
            return Err(Error::Parameter(format!(
                "need γ₀ > 0, L > 0, 0 < β ≤ 1; got ({gamma0}, {l}, {beta_p})"
            )));
        }
        Ok(Self { gamma0, l, beta_p })
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Parameter(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

/// `a = δ / (2L)`.
pub fn step_constant_delta(delta: f64, l: f64) -> Result<f64> {
    check_open_unit("δ", delta)?;
    if !(l > 0.0) {
        return Err(Error::Parameter("L must be positive".into()));
    }
    Ok(delta / (2.0 * l))
}

/// Optimal constant step for a fixed horizon `N`: the positive root of
/// `2γ₀NL a² + 2L a = 1`.
pub fn step_fixed_horizon_optimal(horizon: u64, gamma0: f64, l: f64) -> f64 {
    let n = horizon.max(1) as f64;
    1.0 / ((2.0 * gamma0 * n * l + l * l).sqrt() + l)
}

/// `a = Δ / (4 β_p L_p)`, valid when `β_p ≥ 1 - Δ/2`.
pub fn step_composition(delta_sq: f64, beta_p: f64, l_p: f64) -> Result<f64> {
    check_open_unit("Δ", delta_sq)?;
    if beta_p < 1.0 - 0.5 * delta_sq {
        return Err(Error::Parameter(format!(
            "β_p = {beta_p} is below 1 - Δ/2 = {}",
            1.0 - 0.5 * delta_sq
        )));
    }
    if !(l_p > 0.0) {
        return Err(Error::Parameter("L_p must be positive".into()));
    }
    Ok(delta_sq / (4.0 * beta_p * l_p))
}

/// `N(δ) = ⌈2L / (γ₀δ²)⌉`, or `⌈2L(1-δ) / (γ₀δ²)⌉` when `improved`.
pub fn iteration_budget(delta: f64, gamma0: f64, l: f64, improved: bool) -> u64 {
    let factor = if improved { 1.0 - delta } else { 1.0 };
    (2.0 * l * factor / (gamma0 * delta * delta)).ceil() as u64
}

/// `N(Δ) = ⌈8 β_p² L_p / (γ₀Δ²)⌉`.
pub fn iteration_budget_composition(delta_sq: f64, gamma0: f64, beta_p: f64, l_p: f64) -> u64 {
    (8.0 * beta_p * beta_p * l_p / (gamma0 * delta_sq * delta_sq)).ceil() as u64
}

/// Deterministic step-size rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Constant(f64),
    FixedHorizonOptimal { horizon: u64, gamma0: f64 },
    Composition { delta_sq: f64, beta_p: f64, l_p: f64 },
}

impl StepPolicy {
    /// Step size `a_k` for the method's constant `L`.
    pub fn step(&self, _k: u64, l: f64) -> Result<f64> {
        let a = match *self {
            StepPolicy::Constant(a) => a,
            StepPolicy::FixedHorizonOptimal { horizon, gamma0 } => {
                step_fixed_horizon_optimal(horizon, gamma0, l)
            }
            StepPolicy::Composition {
                delta_sq,
                beta_p,
                l_p,
            } => step_composition(delta_sq, beta_p, l_p)?,
        };
        if !(a > 0.0 && a * l < 1.0) {
            return Err(Error::Parameter(format!(
                "step size {a} outside (0, 1/L) for L = {l}"
            )));
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Completed iterations.
    pub k: u64,
    /// Prox center `v_k`.
    pub v: Vec<f64>,
    /// Averaged output `x_k` (equals `x_0` before the first iteration).
    pub x: Vec<f64>,
    /// `C_k = Σ_{i<k} c_i`.
    pub weight: f64,
}

/// Source of stochastic gradients `g(v, ξ)`.
pub trait StochasticOracle {
    fn sample(&mut self, v: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;
}

impl<F> StochasticOracle for F
where
    F: FnMut(&[f64], &mut RngStream) -> Result<Vec<f64>>,
{
    fn sample(&mut self, v: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self(v, rng)
    }
}

pub struct SgmConfig<'a> {
    pub gram: &'a GramSystem,
    pub policy: StepPolicy,
    pub l: f64,
    pub x0: Vec<f64>,
    pub iterations: u64,
}

/// Runs the method for `cfg.iterations` steps. `observer` sees the state
/// after every iteration and may stop the run early.
pub fn sgm_run<O, F>(
    oracle: &mut O,
    cfg: SgmConfig<'_>,
    rng: &mut RngStream,
    mut observer: F,
) -> Result<SolverState>
where
    O: StochasticOracle + ?Sized,
    F: FnMut(&SolverState) -> ControlFlow<()>,
{
    let d = cfg.gram.dim();
    if cfg.x0.len() != d {
        return Err(Error::usage("sgm_run: x0 has wrong dimension"));
    }
    let mut state = SolverState {
        k: 0,
        v: cfg.x0.clone(),
        x: cfg.x0,
        weight: 0.0,
    };
    while state.k < cfg.iterations {
        let g = oracle.sample(&state.v, rng)?;
        if g.len() != d {
            return Err(Error::usage("oracle returned a gradient of wrong dimension"));
        }
        let a = cfg.policy.step(state.k, cfg.l)?;
        let c = a * (1.0 - cfg.l * a);
        let next_weight = state.weight + c;
        for (x, v) in state.x.iter_mut().zip(&state.v) {
            *x = (state.weight * *x + c * v) / next_weight;
        }
        let scaled: Vec<f64> = g.iter().map(|gi| a * gi).collect();
        state.v = gradient_step(cfg.gram, &state.v, &scaled)?;
        state.weight = next_weight;
        state.k += 1;
        if state.v.iter().chain(&state.x).any(|t| !t.is_finite()) {
            return Err(Error::NumericalFailure {
                iteration: state.k,
                what: "non-finite iterate".into(),
            });
        }
        if observer(&state).is_break() {
            break;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gram(rows: &[Vec<f64>]) -> GramSystem {
        GramSystem::new(&DenseMatrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn gradient_step_examples() {
        let id = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(gradient_step(&id, &[1.0, 2.0], &[0.5, -1.0]).unwrap(), vec![0.5, 3.0]);

        let b = gram(&[vec![3.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(gradient_step(&b, &[1.0, -2.0], &[0.0, 0.0]).unwrap(), vec![1.0, -2.0]);

        let singular = gram(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        assert!(!singular.is_definite());
        let t = gradient_step(&singular, &[0.0, 0.0], &[4.0, 0.0]).unwrap();
        assert_relative_eq!(t.as_slice(), &[-2.0, 0.0][..], epsilon = 1e-15);
    }

    #[test]
    fn gradient_step_outside_range_is_ill_conditioned() {
        let singular = gram(&[vec![2.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            gradient_step(&singular, &[0.0, 0.0], &[0.0, 1.0]),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn gram_rejects_bad_input() {
        assert!(GramSystem::new(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap()).is_err());
        assert!(GramSystem::new(&DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap()).is_err());
        assert!(GramSystem::new(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn step_rules() {
        assert_relative_eq!(step_constant_delta(0.5, 2.0).unwrap(), 0.125);
        assert_relative_eq!(step_constant_delta(0.01, 2.0).unwrap(), 0.0025);
        let a = step_constant_delta(1.0 - 1e-12, 1.0).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        assert!(step_constant_delta(1.0, 1.0).is_err());
        assert!(step_constant_delta(0.0, 1.0).is_err());

        let a = step_fixed_horizon_optimal(4, 1.0, 2.0);
        assert_relative_eq!(a, 1.0 / (20f64.sqrt() + 2.0), epsilon = 1e-15);
        assert_relative_eq!(a, 0.1545085, epsilon = 1e-7);
        assert!((2.0 * 1.0 * 4.0 * 2.0 * a * a + 2.0 * 2.0 * a - 1.0).abs() <= 1e-12);
        assert!(step_fixed_horizon_optimal(1_000_000_000, 1.0, 2.0) < 1e-4);
        for n in [1u64, 10, 1000] {
            let (g0, l) = (0.3, 1.7);
            let a = step_fixed_horizon_optimal(n, g0, l);
            assert!(a < 1.0 / l);
            assert!(2.0 * l * a <= (2.0 * l / (g0 * n as f64)).sqrt());
        }

        assert_relative_eq!(step_composition(0.5, 1.0, 2.0).unwrap(), 0.0625);
        assert!(matches!(step_composition(0.5, 0.7, 2.0), Err(Error::Parameter(_))));
        let beta = 0.9900914;
        let a = step_composition(0.0199, beta, 2.0 / beta).unwrap();
        assert_relative_eq!(a, 0.0199 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn budgets() {
        assert_eq!(iteration_budget(0.1, 1.0, 2.0, false), 400);
        assert_eq!(iteration_budget(0.1, 1.0, 2.0, true), 360);
        let beta = crate::oracles::beta_p(crate::oracles::OracleDegree::new(663).unwrap(), 100);
        assert_eq!(iteration_budget_composition(0.0199, 0.01, beta, 2.0 / beta), 4_000_269);
        let beta = crate::oracles::beta_p(crate::oracles::OracleDegree::new(895).unwrap(), 1000);
        assert_eq!(iteration_budget_composition(0.0199, 0.001, beta, 2.0 / beta), 40_002_992);
    }

    fn quadratic_run(policy: StepPolicy, n: u64) -> (SolverState, Vec<Vec<f64>>) {
        let g = gram(&[vec![1.0]]);
        let mut oracle = |v: &[f64], _: &mut RngStream| -> Result<Vec<f64>> { Ok(vec![2.0 * v[0]]) };
        let mut vs = vec![vec![1.0]];
        let state = sgm_run(
            &mut oracle,
            SgmConfig {
                gram: &g,
                policy,
                l: 2.0,
                x0: vec![1.0],
                iterations: n,
            },
            &mut RngStream::new(0),
            |s| {
                vs.push(s.v.clone());
                ControlFlow::Continue(())
            },
        )
        .unwrap();
        (state, vs)
    }

    #[test]
    fn hand_trace_on_quadratic() {
        let (state, vs) = quadratic_run(StepPolicy::Constant(0.25), 3);
        assert_eq!(vs, vec![vec![1.0], vec![0.5], vec![0.25], vec![0.125]]);
        assert_relative_eq!(state.x[0], 1.75 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(state.x[0], 0.583333, epsilon = 1e-6);
        assert_eq!(state.k, 3);
        assert_relative_eq!(state.weight, 3.0 * 0.25 * 0.5);

        let (one, _) = quadratic_run(StepPolicy::Constant(0.25), 1);
        assert_eq!(one.x, vec![1.0]);
        let (two, vs) = quadratic_run(StepPolicy::Constant(0.1), 2);
        assert_relative_eq!(two.x[0], (vs[0][0] + vs[1][0]) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn optimal_horizon_objective_decreases_with_horizon() {
        let mut prev = f64::INFINITY;
        for n in [1u64, 2, 4, 8, 16, 64, 256] {
            let (state, _) = quadratic_run(StepPolicy::FixedHorizonOptimal { horizon: n, gamma0: 1.0 }, n);
            let f = state.x[0] * state.x[0];
            assert!(f < prev, "{n}: {f} >= {prev}");
            prev = f;
        }
    }

    #[test]
    fn policy_rejects_steps_outside_range() {
        let g = gram(&[vec![1.0]]);
        let mut oracle = |v: &[f64], _: &mut RngStream| -> Result<Vec<f64>> { Ok(v.to_vec()) };
        let res = sgm_run(
            &mut oracle,
            SgmConfig {
                gram: &g,
                policy: StepPolicy::Constant(0.6),
                l: 2.0,
                x0: vec![1.0],
                iterations: 1,
            },
            &mut RngStream::new(0),
            |_| ControlFlow::Continue(()),
        );
        assert!(matches!(res, Err(Error::Parameter(_))));
    }

    #[test]
    fn nonfinite_iterate_reports_iteration() {
        let g = gram(&[vec![1.0]]);
        let mut calls = 0;
        let mut oracle = |_: &[f64], _: &mut RngStream| -> Result<Vec<f64>> {
            calls += 1;
            Ok(vec![if calls == 3 { f64::INFINITY } else { 1.0 }])
        };
        let res = sgm_run(
            &mut oracle,
            SgmConfig {
                gram: &g,
                policy: StepPolicy::Constant(0.1),
                l: 1.0,
                x0: vec![0.0],
                iterations: 10,
            },
            &mut RngStream::new(0),
            |_| ControlFlow::Continue(()),
        );
        assert!(matches!(res, Err(Error::NumericalFailure { iteration: 3, .. }) | Err(Error::IllConditioned { .. })));
    }

    fn random_gram(rng: &mut RngStream, d: usize, rank: usize) -> (DenseMatrix, GramSystem) {
        let a: Vec<Vec<f64>> = (0..rank).map(|_| (0..d).map(|_| rng.gaussian()).collect()).collect();
        let mut b = DenseMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                b.set(i, j, a.iter().map(|r| r[i] * r[j]).sum());
            }
        }
        let g = GramSystem::new(&b).unwrap();
        (b, g)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gradient_step_optimality(seed in any::<u64>(), d in 1usize..8, rank in 1usize..10) {
            let mut rng = RngStream::new(seed);
            let (b, gs) = random_gram(&mut rng, d, rank);
            // g in range(B)
            let w: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let g = gs.apply(&w);
            let x_bar: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let t = gradient_step(&gs, &x_bar, &g).unwrap();
            let diff: Vec<f64> = t.iter().zip(&x_bar).map(|(a, b)| a - b).collect();
            let bd = b.as_slice().chunks(d).map(|r| crate::matrix::dot(r, &diff)).collect::<Vec<_>>();
            let scale = norm2(&g) + gs.norm * norm2(&diff);
            for _ in 0..5 {
                let x: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
                let pairing: f64 = g.iter().zip(&bd).zip(x.iter().zip(&t)).map(|((gi, bi), (xi, ti))| (gi + bi) * (xi - ti)).sum();
                prop_assert!(pairing.abs() <= 1e-8 * scale * (1.0 + norm2(&x) + norm2(&t)));
            }
        }

        #[test]
        fn cholesky_and_pseudo_agree(seed in any::<u64>(), d in 1usize..8) {
            let mut rng = RngStream::new(seed);
            let (_, gs) = random_gram(&mut rng, d, d + 3);
            prop_assume!(gs.is_definite());
            let rhs: Vec<f64> = (0..d).map(|_| rng.gaussian()).collect();
            let c = gs.solve_cholesky(&rhs).unwrap();
            let p = gs.solve_pseudo(&rhs);
            let err = norm2(&c.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
            prop_assert!(err <= 1e-8 * (1.0 + norm2(&c)));
        }

        #[test]
        fn averaging_invariant(seed in any::<u64>(), a in 0.01f64..0.45, iters in 1u64..40) {
            let mut rng = RngStream::new(seed);
            let (_, gs) = random_gram(&mut rng, 3, 5);
            let mut oracle = |v: &[f64], r: &mut RngStream| -> Result<Vec<f64>> {
                Ok(gs.apply(&v.iter().map(|x| x + r.gaussian()).collect::<Vec<_>>()))
            };
            let x0 = vec![1.0, -1.0, 0.5];
            let mut vs = vec![x0.clone()];
            let mut weights = vec![];
            let mut ok = true;
            let mut prev_weight = 0.0;
            sgm_run(&mut oracle, SgmConfig { gram: &gs, policy: StepPolicy::Constant(a), l: 2.0, x0, iterations: iters }, &mut rng, |s| {
                let c = a * (1.0 - 2.0 * a);
                weights.push(c);
                ok &= c >= 0.0 && s.weight > prev_weight;
                prev_weight = s.weight;
                let total: f64 = weights.iter().sum();
                for j in 0..3 {
                    let avg: f64 = weights.iter().zip(&vs).map(|(c, v)| c * v[j]).sum::<f64>() / total;
                    ok &= (avg - s.x[j]).abs() <= 1e-10 * (1.0 + avg.abs());
                }
                vs.push(s.v.clone());
                ControlFlow::Continue(())
            }).unwrap();
            prop_assert!(ok);
        }
    }

    #[test]
    fn equal_seeds_reproduce_bitwise() {
        let mut rng0 = RngStream::new(1);
        let (_, gs) = random_gram(&mut rng0, 4, 6);
        let run = |seed| {
            let mut oracle = |v: &[f64], r: &mut RngStream| -> Result<Vec<f64>> {
                Ok(gs.apply(&v.iter().map(|x| x * r.gaussian()).collect::<Vec<_>>()))
            };
            let mut traj = Vec::new();
            sgm_run(&mut oracle, SgmConfig { gram: &gs, policy: StepPolicy::Constant(0.05), l: 1.0, x0: vec![1.0; 4], iterations: 50 }, &mut RngStream::new(seed), |s| {
                traj.extend(s.x.iter().map(|v| v.to_bits()));
                ControlFlow::Continue(())
            }).unwrap();
            traj
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }
}
