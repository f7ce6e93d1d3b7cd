//! Power-method spectral norm against the exact Jacobi evaluator.

use relspec::eval::{spectral_norm_exact, spectral_norm_power, EvalConfig};
use relspec::matrix::{DenseMatrix, Matrix, RngStream};

fn main() -> relspec::Result<()> {
    let mut rng = RngStream::new(5);
    for (n, m) in [(4, 4), (16, 40), (64, 128)] {
        let y: Matrix = DenseMatrix::new(n, m, (0..n * m).map(|_| rng.gaussian()).collect())?.into();
        let est = spectral_norm_power(&y, &EvalConfig::default())?;
        let exact = spectral_norm_exact(&y)?;
        println!(
            "{n:>2}x{m:<3}: power {:.10} ({} iterations), exact {exact:.10}, rel err {:.1e}",
            est.estimate,
            est.iterations,
            (est.estimate - exact).abs() / exact
        );
    }
    Ok(())
}
