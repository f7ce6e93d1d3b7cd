//! The normalized power chain keeps `⟨X^p u, u⟩^{1/p}` finite where explicit
//! powers overflow.

use relspec::matrix::{DenseMatrix, UnitVector};
use relspec::oracles::{power_chain, value_fpu, OracleDegree};

fn main() -> relspec::Result<()> {
    let eig = [1e3, 10.0, 1.0];
    let x = DenseMatrix::from_diagonal(3, 3, &eig)?;
    let u = UnitVector::normalize(vec![1.0, 1.0, 1.0]).expect("nonzero");

    for p in [1u32, 5, 51, 201] {
        let deg = OracleDegree::new(p)?;
        let chain = power_chain(&x, &u, deg.k()).expect("u is not in the kernel");
        let naive = (eig.iter().map(|l: &f64| l.powi(p as i32)).sum::<f64>() / 3.0).powf(1.0 / f64::from(p));
        println!(
            "p = {p:>3}: f = {:.6}  (explicit power: {naive:.6}), log-norm sum = {:.3}",
            value_fpu(&x, &u, deg),
            chain.log_norm_accum
        );
    }
    Ok(())
}
