//! Write a generated problem as Matrix Market files, read it back, solve it.

use relspec::datagen::gen_sparse;
use relspec::harness::run_problem;
use relspec::mtx::{load_problem, save_problem};
use relspec::regression::{OracleKind, SolveOptions};

fn main() -> relspec::Result<()> {
    let dir = std::env::temp_dir().join("relspec_mtx_example");
    let problem = gen_sparse(4, 6, 10, 2, 11)?;
    let manifest = save_problem(&dir, &problem, Some(1.0))?;
    println!("wrote {}", manifest.display());

    let loaded = load_problem(&manifest)?;
    let mut opts = SolveOptions::new(0.1, 11, OracleKind::New);
    opts.f_star = loaded.f_star.expect("manifest carries f*");
    let trace = run_problem(&loaded.problem, &opts, None, None)?;
    println!(
        "p = {}, N = {}, stopped after {} iterations ({:?}), delta_k = {:.3e}",
        trace.params.p,
        trace.params.n_iter,
        trace.iterations,
        trace.stop,
        trace.final_delta().unwrap_or(f64::NAN)
    );
    Ok(())
}
