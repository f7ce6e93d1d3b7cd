//! Experiment orchestration: task specs, persisted runs, oracle comparison.
//!
//! A run writes its trace CSV row by row and, next to it, a JSON sidecar
//! (`<stem>.meta.json`) echoing the task, the parameter chain and the final
//! status.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{gen_dense, gen_sparse};
use crate::error::{Error, Result};
use crate::eval::EvalConfig;
use crate::regression::{solve_regression, OracleKind, RegressionProblem, RunParameters, SolveOptions, StopReason};
use crate::trace::{EvalSchedule, TraceRow, TraceWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataMode {
    Dense,
    /// `s` nonzeros per column.
    Sparse { s: usize },
}

pub const DEFAULT_SPARSITY: usize = 5;

/// A generated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub mode: DataMode,
    pub delta: f64,
    pub seed: u64,
    pub oracle: OracleKind,
    pub schedule: EvalSchedule,
    pub early_stop: bool,
    pub max_iterations: Option<u64>,
    pub record_time: bool,
}

impl TaskSpec {
    /// Dense data, new oracle, geometric checkpoints, early stop on.
    pub fn new(d: usize, n: usize, m: usize, delta: f64, seed: u64) -> Self {
        Self {
            d,
            n,
            m,
            mode: DataMode::Dense,
            delta,
            seed,
            oracle: OracleKind::New,
            schedule: EvalSchedule::default(),
            early_stop: true,
            max_iterations: None,
            record_time: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n < 2 || self.n > self.m {
            return Err(Error::usage(format!(
                "need d >= 1 and 2 <= n <= m, got d={} n={} m={}",
                self.d, self.n, self.m
            )));
        }
        if let DataMode::Sparse { s } = self.mode {
            if s == 0 || s >= self.n {
                return Err(Error::usage(format!("need 1 <= s <= n - 1, got s = {s}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::usage(format!("δ must lie in (0, 1), got {}", self.delta)));
        }
        self.schedule.validate()
    }

    /// Legend label `"d, n×m"`.
    pub fn label(&self) -> String {
        format!("{}, {}×{}", self.d, self.n, self.m)
    }

    pub fn generate(&self) -> Result<RegressionProblem> {
        match self.mode {
            DataMode::Dense => gen_dense(self.d, self.n, self.m, self.seed),
            DataMode::Sparse { s } => gen_sparse(self.d, self.n, self.m, s, self.seed),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            delta: self.delta,
            seed: self.seed,
            oracle: self.oracle,
            schedule: self.schedule.clone(),
            early_stop: self.early_stop,
            f_star: 1.0,
            eval: EvalConfig {
                seed: self.seed,
                ..EvalConfig::default()
            },
            max_iterations: self.max_iterations,
            record_time: self.record_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    /// Echo of the generated task, absent for problems read from files.
    pub task: Option<TaskSpec>,
    pub options: SolveOptions,
    pub params: RunParameters,
    pub stop: StopReason,
    pub iterations: u64,
    pub oracle_matvecs: u64,
    pub eval_matvecs: u64,
    #[serde(skip)]
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn final_delta(&self) -> Option<f64> {
        self.rows.last().map(|r| r.delta_k)
    }
}

/// `trace.csv` → `trace.meta.json`.
pub fn meta_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Solves `problem` and, when `out` is given, streams the trace to it.
pub fn run_problem(
    problem: &RegressionProblem,
    options: &SolveOptions,
    task: Option<&TaskSpec>,
    out: Option<&Path>,
) -> Result<RunTrace> {
    let mut writer = out.map(TraceWriter::create).transpose()?;
    let sol = solve_regression(problem, options, &mut |row| match (&mut writer, out) {
        (Some(w), Some(path)) => w.push(row).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        }),
        _ => Ok(()),
    })?;
    let trace = RunTrace {
        task: task.cloned(),
        options: options.clone(),
        params: sol.params,
        stop: sol.stop,
        iterations: sol.iterations,
        oracle_matvecs: sol.oracle_matvecs,
        eval_matvecs: sol.eval_matvecs,
        rows: sol.rows,
    };
    if let Some(path) = out {
        let meta = meta_path(path);
        let json = serde_json::to_string_pretty(&trace).expect("trace metadata serializes");
        fs::write(&meta, json + "\n").map_err(|e| Error::io(&meta, e))?;
    }
    Ok(trace)
}

/// Generates the task's data and runs it.
pub fn run_task(spec: &TaskSpec, out: Option<&Path>) -> Result<RunTrace> {
    spec.validate()?;
    let problem = spec.generate()?;
    run_problem(&problem, &spec.solve_options(), Some(spec), out)
}

/// Runs independent tasks on up to `jobs` threads; results keep input order.
pub fn run_tasks(tasks: &[(TaskSpec, Option<PathBuf>)], jobs: usize) -> Vec<Result<RunTrace>> {
    let jobs = jobs.clamp(1, tasks.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<Result<RunTrace>>> = (0..tasks.len()).map(|_| None).collect();
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((spec, out)) = tasks.get(i) else { break };
                let r = run_task(spec, out.as_deref());
                slots.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    results.into_iter().map(|r| r.expect("every task ran")).collect()
}

/// Runs the task with both oracles on the same data and the same direction
/// draws. Returns `(new, power_iteration)`.
pub fn compare_oracles(
    spec: &TaskSpec,
    out_new: Option<&Path>,
    out_pi: Option<&Path>,
) -> Result<(RunTrace, RunTrace)> {
    spec.validate()?;
    let problem = spec.generate()?;
    let run = |oracle, out| {
        let task = TaskSpec {
            oracle,
            ..spec.clone()
        };
        run_problem(&problem, &task.solve_options(), Some(&task), out)
    };
    Ok((run(OracleKind::New, out_new)?, run(OracleKind::PowerIteration, out_pi)?))
}
