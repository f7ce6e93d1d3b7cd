//! Unbiased oracle vs the power-iteration heuristic on identical data and
//! identical direction draws.

use relspec::harness::{compare_oracles, TaskSpec};

fn main() -> relspec::Result<()> {
    let spec = TaskSpec {
        early_stop: false,
        max_iterations: Some(8192),
        ..TaskSpec::new(10, 20, 40, 0.05, 1)
    };
    let (new, pi) = compare_oracles(&spec, None, None)?;
    println!("{:>6} {:>12} {:>12}", "k", "new", "power-it");
    for (a, b) in new.rows.iter().zip(&pi.rows) {
        println!("{:>6} {:>12.4e} {:>12.4e}", a.iter, a.delta_k, b.delta_k);
    }
    Ok(())
}
