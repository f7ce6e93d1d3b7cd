//! Sparse generated data (5 nonzeros per column), trace written to CSV.
//!
//! Usage: `cargo run --release --example sparse_regression -- [out.csv]`

use std::path::PathBuf;

use relspec::harness::{run_task, DataMode, TaskSpec};

fn main() -> relspec::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("sparse_trace.csv"), PathBuf::from);
    let spec = TaskSpec {
        mode: DataMode::Sparse { s: 5 },
        early_stop: false,
        max_iterations: Some(4096),
        ..TaskSpec::new(20, 30, 60, 0.05, 3)
    };
    let trace = run_task(&spec, Some(&out))?;
    for row in &trace.rows {
        println!("k = {:>5}  f = {:.6}  delta_k = {:.3e}  matvecs = {}", row.iter, row.f_est, row.delta_k, row.matvecs);
    }
    println!("trace: {}", out.display());
    Ok(())
}
