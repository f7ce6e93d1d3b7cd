use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use relspec::harness::{compare_oracles, run_problem, run_task, DataMode, RunTrace, TaskSpec};
use relspec::mtx::{load_problem, save_problem};
use relspec::regression::{select_parameters, OracleKind, SolveOptions};
use relspec::trace::EvalSchedule;
use relspec::{Error, Result};

#[derive(Parser)]
#[command(name = "relspec", version, about = "Relative-accuracy spectral-norm minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one generated (or file-based) regression task and write its trace.
    Run(RunArgs),
    /// Print the parameter chain for (delta, n) as JSON.
    Params {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
    },
    /// Run both oracles on the same task and write paired traces.
    Compare(CompareArgs),
    /// Write a generated problem as Matrix Market files plus a manifest.
    Generate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Sparse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    New,
    PowerIteration,
}

impl From<Oracle> for OracleKind {
    fn from(o: Oracle) -> Self {
        match o {
            Oracle::New => OracleKind::New,
            Oracle::PowerIteration => OracleKind::PowerIteration,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, value_enum, default_value = "dense")]
    mode: Mode,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Nonzeros per column in sparse mode.
    #[arg(long, default_value_t = relspec::harness::DEFAULT_SPARSITY)]
    s: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop at the first checkpoint with delta_k <= delta.
    #[arg(long)]
    early_stop: bool,
    /// Geometric checkpoints 1, 2, 4, ... (the default schedule).
    #[arg(long, conflicts_with_all = ["eval_every", "eval_ratio"])]
    eval_geometric: bool,
    /// Geometric checkpoints with this ratio.
    #[arg(long, conflicts_with = "eval_every")]
    eval_ratio: Option<f64>,
    /// Evaluate every K iterations.
    #[arg(long, value_name = "K")]
    eval_every: Option<u64>,
    /// Cap on iterations below the theoretical budget N.
    #[arg(long)]
    max_iters: Option<u64>,
    /// Write elapsed_s = 0 so repeated runs give identical files.
    #[arg(long)]
    no_clock: bool,
}

impl SolveArgs {
    fn schedule(&self) -> EvalSchedule {
        match (self.eval_every, self.eval_ratio) {
            (Some(k), _) => EvalSchedule::Every(k),
            (None, Some(ratio)) => EvalSchedule::Geometric { ratio },
            (None, None) => EvalSchedule::default(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_enum, default_value = "new")]
    oracle: Oracle,
    /// Problem manifest (Matrix Market files) instead of generated data.
    #[arg(long, conflicts_with_all = ["d", "n", "m"])]
    problem: Option<PathBuf>,
    /// Optimal value for file-based problems (overrides the manifest).
    #[arg(long, requires = "problem")]
    f_star: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solve: SolveArgs,
    /// Output prefix: writes <prefix>.new.csv and <prefix>.pi.csv.
    #[arg(long)]
    out: PathBuf,
}

fn generated(data: &DataArgs, delta: f64, seed: u64) -> Result<TaskSpec> {
    let (Some(d), Some(n), Some(m)) = (data.d, data.n, data.m) else {
        return Err(Error::Usage("--d, --n and --m are required for generated data".into()));
    };
    Ok(TaskSpec {
        mode: match data.mode {
            Mode::Dense => DataMode::Dense,
            Mode::Sparse => DataMode::Sparse { s: data.s },
        },
        ..TaskSpec::new(d, n, m, delta, seed)
    })
}

fn task(data: &DataArgs, solve: &SolveArgs, oracle: OracleKind) -> Result<TaskSpec> {
    Ok(TaskSpec {
        oracle,
        schedule: solve.schedule(),
        early_stop: solve.early_stop,
        max_iterations: solve.max_iters,
        record_time: !solve.no_clock,
        ..generated(data, solve.delta, solve.seed)?
    })
}

fn summary(trace: &RunTrace, out: &Path) -> serde_json::Value {
    json!({
        "trace": out,
        "oracle": trace.options.oracle,
        "p": trace.params.p,
        "N": trace.params.n_iter,
        "iterations": trace.iterations,
        "stop": trace.stop,
        "delta_k": trace.final_delta(),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Params { delta, n } => {
            let params = select_parameters(delta, n)?;
            println!("{}", serde_json::to_string(&params).expect("parameters serialize"));
        }
        Command::Run(args) => {
            let oracle = args.oracle.into();
            let trace = if let Some(manifest) = &args.problem {
                let loaded = load_problem(manifest)?;
                let f_star = args.f_star.or(loaded.f_star).ok_or_else(|| {
                    Error::Usage("file-based runs need f_star in the manifest or --f-star".into())
                })?;
                let s = &args.solve;
                let mut opts = SolveOptions::new(s.delta, s.seed, oracle);
                opts.schedule = s.schedule();
                opts.early_stop = s.early_stop;
                opts.max_iterations = s.max_iters;
                opts.record_time = !s.no_clock;
                opts.f_star = f_star;
                run_problem(&loaded.problem, &opts, None, Some(&args.out))?
            } else {
                run_task(&task(&args.data, &args.solve, oracle)?, Some(&args.out))?
            };
            println!("{}", summary(&trace, &args.out));
        }
        Command::Compare(args) => {
            let spec = task(&args.data, &args.solve, OracleKind::New)?;
            let out_new = with_suffix(&args.out, ".new.csv");
            let out_pi = with_suffix(&args.out, ".pi.csv");
            let (new, pi) = compare_oracles(&spec, Some(&out_new), Some(&out_pi))?;
            println!("{}", summary(&new, &out_new));
            println!("{}", summary(&pi, &out_pi));
        }
        Command::Generate { data, seed, out } => {
            let spec = generated(&data, 0.5, seed)?;
            spec.validate()?;
            let problem = spec.generate()?;
            let manifest = save_problem(&out, &problem, Some(1.0))?;
            println!("{}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
