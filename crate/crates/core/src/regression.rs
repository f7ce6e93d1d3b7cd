//! Spectral linear regression `min_x ‖Σ x_i A_i − C‖_∞`.
//!
//! The problem is solved in relative scale through its square
//! `Q_p(Ax − C)`: the stochastic gradient is `A* G_p(Ax − C, u)` with `G_p`
//! the unbiased rank-one sample of [`grad_qp_sample`].

use std::cell::Cell;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{relative_accuracy, spectral_norm_power_with, EvalConfig};
use crate::matrix::{frobenius_inner, sample_unit_sphere, DenseMatrix, Matrix, RngStream, UnitVector};
use crate::oracles::{beta_p, grad_qp_sample, power_iteration_oracle, GramOperator, OracleDegree, RankOneRect};
use crate::sgm::{
    gradient_step, iteration_budget_composition, sgm_run, step_composition, GramSystem, SgmConfig,
    SolverState, StepPolicy,
};
use crate::trace::{EvalSchedule, TraceRow};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    target: Matrix,
    basis: Vec<Matrix>,
    transposed: bool,
}

impl RegressionProblem {
    /// Validates shapes; when `n > m` every matrix is transposed so that the
    /// residual always has `n ≤ m`.
    pub fn new(target: Matrix, basis: Vec<Matrix>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::usage("regression needs at least one basis matrix"));
        }
        let shape = target.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::usage("target matrix is empty"));
        }
        if let Some((i, a)) = basis.iter().enumerate().find(|(_, a)| a.shape() != shape) {
            return Err(Error::usage(format!(
                "basis matrix {i} has shape {:?}, target has {shape:?}",
                a.shape()
            )));
        }
        if shape.0 > shape.1 {
            return Ok(Self {
                target: target.transpose(),
                basis: basis.iter().map(Matrix::transpose).collect(),
                transposed: true,
            });
        }
        Ok(Self {
            target,
            basis,
            transposed: false,
        })
    }

    pub fn d(&self) -> usize {
        self.basis.len()
    }

    pub fn n(&self) -> usize {
        self.target.n_rows()
    }

    pub fn m(&self) -> usize {
        self.target.n_cols()
    }

    pub fn target(&self) -> &Matrix {
        &self.target
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    /// Whether the input was transposed on ingestion.
    pub fn transposed(&self) -> bool {
        self.transposed
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::usage(format!(
                "coefficient vector has length {}, expected {}",
                x.len(),
                self.d()
            )));
        }
        Ok(())
    }

    /// `A x = Σ x_i A_i`, dense.
    pub fn operator_apply(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.check_x(x)?;
        let mut out = DenseMatrix::zeros(self.n(), self.m());
        for (xi, a) in x.iter().zip(&self.basis) {
            if *xi != 0.0 {
                out.add_scaled(*xi, a);
            }
        }
        Ok(out)
    }

    /// `A x − C`, dense.
    pub fn residual(&self, x: &[f64]) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(self.n(), self.m());
        self.residual_into(x, &mut out)?;
        Ok(out)
    }

    fn residual_into(&self, x: &[f64], out: &mut DenseMatrix) -> Result<()> {
        self.check_x(x)?;
        match &self.target {
            Matrix::Dense(c) => {
                for (o, v) in out.as_mut_slice().iter_mut().zip(c.as_slice()) {
                    *o = -v;
                }
            }
            Matrix::Sparse(_) => {
                out.as_mut_slice().fill(0.0);
                out.add_scaled(-1.0, &self.target);
            }
        }
        for (xi, a) in x.iter().zip(&self.basis) {
            if *xi != 0.0 {
                out.add_scaled(*xi, a);
            }
        }
        Ok(())
    }

    /// `A*(left rightᵀ)`, component `i` equal to `leftᵀ A_i right`.
    pub fn adjoint_apply_rank_one(&self, left: &[f64], right: &[f64]) -> Result<Vec<f64>> {
        if left.len() != self.n() || right.len() != self.m() {
            return Err(Error::usage("rank-one factors do not match the problem shape"));
        }
        Ok(self.basis.iter().map(|a| a.bilinear(left, right)).collect())
    }

    /// `A* H = (⟨A_i, H⟩)_i`.
    pub fn adjoint_apply(&self, h: &Matrix) -> Result<Vec<f64>> {
        self.basis.iter().map(|a| frobenius_inner(a, h)).collect()
    }

    /// `f(x) = ‖Ax − C‖_∞`, estimated by the power method.
    pub fn objective(&self, x: &[f64], cfg: &EvalConfig) -> Result<f64> {
        let r: Matrix = self.residual(x)?.into();
        let mut rng = RngStream::substream(cfg.seed, RngStream::EVAL);
        Ok(spectral_norm_power_with(&r, cfg, &mut rng)?.estimate)
    }
}

/// Gram matrix `B_ij = ⟨A_i, A_j⟩`, factored.
pub fn build_gram(prob: &RegressionProblem) -> Result<GramSystem> {
    let d = prob.d();
    let mut b = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = frobenius_inner(&prob.basis[i], &prob.basis[j])?;
            b.set(i, j, v);
            b.set(j, i, v);
        }
    }
    GramSystem::new(&b)
}

/// `x₀ = T(0, −A*C)`: the least-squares fit of `C`.
pub fn initial_point(prob: &RegressionProblem, gram: &GramSystem) -> Result<Vec<f64>> {
    let g: Vec<f64> = prob.adjoint_apply(&prob.target)?.into_iter().map(|v| -v).collect();
    gradient_step(gram, &vec![0.0; prob.d()], &g)
}

/// The parameter chain `δ → Δ → p → β_p → L_p → a → N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub delta_sq: f64,
    pub p: u32,
    pub beta_p: f64,
    #[serde(rename = "L_p")]
    pub l_p: f64,
    pub a: f64,
    #[serde(rename = "N")]
    pub n_iter: u64,
}

impl RunParameters {
    pub fn degree(&self) -> OracleDegree {
        OracleDegree::from_half((self.p - 1) / 2)
    }
}

pub fn select_parameters(delta: f64, n: usize) -> Result<RunParameters> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::usage(format!("δ must lie in (0, 1), got {delta}")));
    }
    if n < 2 {
        return Err(Error::usage(format!("n must be at least 2, got {n}")));
    }
    let delta_sq = (2.0 - delta) * delta;
    let k = (((n as f64).ln() + 2.0) / delta_sq).floor();
    if k > f64::from(u32::MAX / 2 - 1) {
        return Err(Error::Parameter(format!("oracle degree overflows for δ = {delta}")));
    }
    let degree = OracleDegree::from_half(k as u32);
    let beta = beta_p(degree, n);
    let l_p = 2.0 / beta;
    let a = step_composition(delta_sq, beta, l_p)?;
    let n_iter = iteration_budget_composition(delta_sq, 1.0 / n as f64, beta, l_p);
    Ok(RunParameters {
        delta,
        delta_sq,
        p: degree.p(),
        beta_p: beta,
        l_p,
        a,
        n_iter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Unbiased gradient of `Q_p`.
    New,
    /// Power-method direction with unit normalization, `q = (p − 1)/2`.
    PowerIteration,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::New => "new",
            OracleKind::PowerIteration => "power-iteration",
        }
    }

    /// `(β, L)` used by the method with this oracle.
    pub fn constants(self, params: &RunParameters) -> (f64, f64) {
        match self {
            OracleKind::New => (params.beta_p, params.l_p),
            OracleKind::PowerIteration => (1.0, 2.0),
        }
    }
}

impl std::fmt::Display for OracleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "new" => Ok(OracleKind::New),
            "power-iteration" | "pi" => Ok(OracleKind::PowerIteration),
            _ => Err(Error::usage(format!("unknown oracle {s:?} (new | power-iteration)"))),
        }
    }
}

fn sample_on_residual(op: &GramOperator<'_>, u: &UnitVector, p: OracleDegree, kind: OracleKind) -> RankOneRect {
    match kind {
        OracleKind::New => grad_qp_sample(op, u, p),
        OracleKind::PowerIteration => power_iteration_oracle(op, u, p.k()),
    }
}

/// `g_p(x, u) = A* G_p(Ax − C, u)`.
pub fn regression_oracle(
    prob: &RegressionProblem,
    x: &[f64],
    u: &UnitVector,
    p: OracleDegree,
    kind: OracleKind,
) -> Result<Vec<f64>> {
    if u.len() != prob.n() {
        return Err(Error::usage("direction length differs from n"));
    }
    let r: Matrix = prob.residual(x)?.into();
    let op = GramOperator::new(&r);
    let g = sample_on_residual(&op, u, p, kind);
    prob.adjoint_apply_rank_one(&g.left, &g.right)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub delta: f64,
    pub seed: u64,
    pub oracle: OracleKind,
    pub schedule: EvalSchedule,
    /// Stop at the first checkpoint with `δ̂_k ≤ δ`.
    pub early_stop: bool,
    /// Known optimal value used for `δ̂_k`.
    pub f_star: f64,
    pub eval: EvalConfig,
    /// Hard cap below the theoretical budget `N`.
    pub max_iterations: Option<u64>,
    /// Record wall-clock seconds; when off `elapsed_s` is 0 and traces are
    /// byte-reproducible.
    pub record_time: bool,
}

impl SolveOptions {
    pub fn new(delta: f64, seed: u64, oracle: OracleKind) -> Self {
        Self {
            delta,
            seed,
            oracle,
            schedule: EvalSchedule::default(),
            early_stop: true,
            f_star: 1.0,
            eval: EvalConfig {
                seed,
                ..EvalConfig::default()
            },
            max_iterations: None,
            record_time: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Early stop with `δ̂_k ≤ δ`.
    TargetReached,
    /// Budget `N` (or the cap) used up.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub params: RunParameters,
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    pub iterations: u64,
    pub x: Vec<f64>,
    /// Residual products spent inside the oracle.
    pub oracle_matvecs: u64,
    /// Residual products spent on objective evaluation.
    pub eval_matvecs: u64,
}

/// Runs the method with the `(β, L)` pair of `opts.oracle`, evaluating the
/// objective at the checkpoints of `opts.schedule` and at the final
/// iteration. `on_row` sees each trace row as it is produced.
pub fn solve_regression(
    prob: &RegressionProblem,
    opts: &SolveOptions,
    on_row: &mut dyn FnMut(&TraceRow) -> Result<()>,
) -> Result<Solution> {
    opts.schedule.validate()?;
    opts.eval.validate()?;
    if !(opts.f_star > 0.0) {
        return Err(Error::usage("f* must be positive"));
    }
    let params = select_parameters(opts.delta, prob.n())?;
    let degree = params.degree();
    let (beta, l) = opts.oracle.constants(&params);
    let gram = build_gram(prob)?;
    let x0 = initial_point(prob, &gram)?;
    let budget = opts.max_iterations.map_or(params.n_iter, |c| c.min(params.n_iter));
    let start = Instant::now();
    let elapsed = || if opts.record_time { start.elapsed().as_secs_f64() } else { 0.0 };

    let oracle_matvecs = Cell::new(0u64);
    let mut residual = Matrix::Dense(DenseMatrix::zeros(prob.n(), prob.m()));
    let mut oracle = |v: &[f64], rng: &mut RngStream| -> Result<Vec<f64>> {
        let Matrix::Dense(buf) = &mut residual else {
            unreachable!("residual buffer is dense")
        };
        prob.residual_into(v, buf)?;
        let u = sample_unit_sphere(rng, prob.n())?;
        let op = GramOperator::new(&residual);
        let g = sample_on_residual(&op, &u, degree, opts.oracle);
        oracle_matvecs.set(oracle_matvecs.get() + op.matvecs());
        prob.adjoint_apply_rank_one(&g.left, &g.right)
    };

    let mut eval_rng = RngStream::substream(opts.eval.seed, RngStream::EVAL);
    let mut eval_matvecs = 0u64;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut failure: Option<Error> = None;
    let mut target_hit = false;
    let mut evaluate = |k: u64, x: &[f64], rows: &mut Vec<TraceRow>| -> Result<f64> {
        let r: Matrix = prob.residual(x)?.into();
        let est = spectral_norm_power_with(&r, &opts.eval, &mut eval_rng)?;
        eval_matvecs += est.matvecs;
        if !est.estimate.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: k,
                what: format!("objective evaluated to {}", est.estimate),
            });
        }
        let delta_k = relative_accuracy(est.estimate, opts.f_star)?;
        let row = TraceRow {
            iter: k,
            f_est: est.estimate,
            delta_k,
            matvecs: oracle_matvecs.get() + eval_matvecs,
            elapsed_s: elapsed(),
        };
        on_row(&row)?;
        rows.push(row);
        Ok(delta_k)
    };

    let mut next_eval = opts.schedule.next_after(0);
    let observer = |state: &SolverState| {
        let due = next_eval == Some(state.k) || state.k == budget;
        if !due {
            return ControlFlow::Continue(());
        }
        next_eval = opts.schedule.next_after(state.k);
        match evaluate(state.k, &state.x, &mut rows) {
            Ok(delta_k) if opts.early_stop && delta_k <= opts.delta => {
                target_hit = true;
                ControlFlow::Break(())
            }
            Ok(_) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    };

    let cfg = SgmConfig {
        gram: &gram,
        policy: StepPolicy::Composition {
            delta_sq: params.delta_sq,
            beta_p: beta,
            l_p: l,
        },
        l,
        x0,
        iterations: budget,
    };
    let mut rng = RngStream::substream(opts.seed, RngStream::ORACLE);
    let state = sgm_run(&mut oracle, cfg, &mut rng, observer)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Solution {
        params,
        rows,
        stop: if target_hit {
            StopReason::TargetReached
        } else {
            StopReason::BudgetExhausted
        },
        iterations: state.k,
        x: state.x,
        oracle_matvecs: oracle_matvecs.get(),
        eval_matvecs,
    })
}
