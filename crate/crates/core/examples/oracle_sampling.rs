//! Monte Carlo estimates of `E_p(X)` against the bounds
//! `β_p ‖λ(X)‖_p ≤ E_p(X) ≤ λ_max(X)`, and one unbiased gradient sample.

use relspec::matrix::{sample_unit_sphere, DenseMatrix, RngStream};
use relspec::oracles::{beta_p, estimate_ep, grad_ep_sample, OracleDegree};

fn main() -> relspec::Result<()> {
    let eig = [4.0, 2.0, 1.0, 0.5, 0.25];
    let x = DenseMatrix::from_diagonal(5, 5, &eig)?;
    let mut rng = RngStream::new(42);

    for p in [1u32, 3, 9, 31] {
        let deg = OracleDegree::new(p)?;
        let est = estimate_ep(&x, deg, 20_000, &mut rng)?;
        let lp = eig.iter().map(|l: &f64| l.powf(f64::from(p))).sum::<f64>().powf(1.0 / f64::from(p));
        println!(
            "p = {p:>2}: {:.4} <= E_p = {:.4} ± {:.4} <= {:.4}",
            beta_p(deg, 5) * lp,
            est.mean,
            est.stderr,
            eig[0]
        );
    }

    let u = sample_unit_sphere(&mut rng, 5)?;
    let g = grad_ep_sample(&x, &u, OracleDegree::new(9)?);
    println!("gradient sample: nuclear norm {:.4}, direction {:?}", g.nuclear_norm(), &g.direction[..]);
    Ok(())
}
