//! The stochastic gradient method on `f(x) = ‖x‖²` with a noisy gradient, in
//! the seminorm of a singular metric.

use std::ops::ControlFlow;

use relspec::matrix::{DenseMatrix, RngStream};
use relspec::sgm::{sgm_run, GramSystem, SgmConfig, StepPolicy};

fn main() -> relspec::Result<()> {
    // B = diag(1, 1, 0): the third coordinate is invisible to the metric.
    let gram = GramSystem::new(&DenseMatrix::from_diagonal(3, 3, &[1.0, 1.0, 0.0])?)?;
    let mut oracle = |v: &[f64], rng: &mut RngStream| -> relspec::Result<Vec<f64>> {
        Ok(vec![2.0 * v[0] + 0.1 * rng.gaussian(), 2.0 * v[1] + 0.1 * rng.gaussian(), 0.0])
    };
    let cfg = SgmConfig {
        gram: &gram,
        policy: StepPolicy::FixedHorizonOptimal { horizon: 2000, gamma0: 1.0 },
        l: 4.0,
        x0: vec![1.0, -2.0, 0.0],
        iterations: 2000,
    };
    let state = sgm_run(&mut oracle, cfg, &mut RngStream::new(7), |s| {
        if s.k.is_power_of_two() {
            println!("k = {:>4}: x = [{:+.4}, {:+.4}]", s.k, s.x[0], s.x[1]);
        }
        ControlFlow::Continue(())
    })?;
    println!("final x = {:?}", state.x);
    Ok(())
}
