//! Dense spectral regression on generated data with known optimum `f* = 1`.
//!
//! Usage: `cargo run --release --example dense_regression -- [d n m delta seeds]`

use relspec::harness::{run_task, TaskSpec};

fn main() -> relspec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.into());
    let d: usize = arg(0, "10").parse().expect("d");
    let n: usize = arg(1, "40").parse().expect("n");
    let m: usize = arg(2, "80").parse().expect("m");
    let delta: f64 = arg(3, "0.05").parse().expect("delta");
    let seeds: u64 = arg(4, "3").parse().expect("seeds");

    for seed in 0..seeds {
        let spec = TaskSpec::new(d, n, m, delta, seed);
        let trace = run_task(&spec, None)?;
        let last = trace.rows.last().expect("at least one row");
        println!(
            "{} seed {seed}: p = {}, N = {}, stopped at k = {} ({:?}), delta_k = {:.4}, {:.2}s",
            spec.label(),
            trace.params.p,
            trace.params.n_iter,
            trace.iterations,
            trace.stop,
            last.delta_k,
            last.elapsed_s
        );
    }
    Ok(())
}
