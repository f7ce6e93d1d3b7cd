//! Random test problems with known optimum `x* = 0`, `f* = 1`.
//!
//! `C = Diag(1, c₂, …, c_n)` (padded with zero columns) and every basis
//! matrix vanishes in the top left corner. Then `e₁e₁ᵀ` is a subgradient of
//! `‖·‖_∞` at `−C` orthogonal to every `A_i`, so `x = 0` is optimal.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix, RngStream, SparseMatrix};
use crate::regression::RegressionProblem;

fn check_shape(d: usize, n: usize, m: usize) -> Result<()> {
    if d == 0 || n == 0 || m == 0 {
        return Err(Error::usage("d, n and m must be at least 1"));
    }
    if n > m {
        return Err(Error::usage(format!("generated problems need n <= m, got {n} > {m}")));
    }
    Ok(())
}

fn target(rng: &mut RngStream, n: usize, m: usize) -> Matrix {
    let mut diag = Vec::with_capacity(n);
    diag.push(1.0);
    diag.extend((1..n).map(|_| rng.uniform(-1.0, 1.0)));
    DenseMatrix::from_diagonal(n, m, &diag)
        .expect("finite diagonal")
        .into()
}

/// Dense `Uniform[−1, 1]` basis matrices with `A_i[0,0] = 0`.
pub fn gen_dense(d: usize, n: usize, m: usize, seed: u64) -> Result<RegressionProblem> {
    check_shape(d, n, m)?;
    let mut rng = RngStream::substream(seed, RngStream::DATA);
    let c = target(&mut rng, n, m);
    let basis = (0..d)
        .map(|_| {
            let mut data: Vec<f64> = (0..n * m).map(|_| rng.uniform(-1.0, 1.0)).collect();
            data[0] = 0.0;
            DenseMatrix::new(n, m, data).map(Matrix::from)
        })
        .collect::<Result<Vec<_>>>()?;
    RegressionProblem::new(c, basis)
}

/// Basis matrices with exactly `s` nonzeros per column at distinct random
/// rows; column 0 draws its rows from `1..n`.
pub fn gen_sparse(d: usize, n: usize, m: usize, s: usize, seed: u64) -> Result<RegressionProblem> {
    check_shape(d, n, m)?;
    if s == 0 || s >= n {
        return Err(Error::usage(format!("need 1 <= s <= n - 1, got s = {s}, n = {n}")));
    }
    let mut rng = RngStream::substream(seed, RngStream::DATA);
    let c = target(&mut rng, n, m);
    let all: Vec<usize> = (0..n).collect();
    let mut basis = Vec::with_capacity(d);
    for _ in 0..d {
        let mut col_ptr = Vec::with_capacity(m + 1);
        let mut rows = Vec::with_capacity(m * s);
        let mut values = Vec::with_capacity(m * s);
        col_ptr.push(0);
        for j in 0..m {
            let pool = if j == 0 { &all[1..] } else { &all[..] };
            let mut picked = rng.choose_distinct(pool, s);
            picked.sort_unstable();
            for i in picked {
                rows.push(i);
                values.push(nonzero_uniform(&mut rng));
            }
            col_ptr.push(rows.len());
        }
        basis.push(SparseMatrix::new(n, m, col_ptr, rows, values)?.into());
    }
    RegressionProblem::new(c, basis)
}

fn nonzero_uniform(rng: &mut RngStream) -> f64 {
    loop {
        let v = rng.uniform(-1.0, 1.0);
        if v != 0.0 {
            return v;
        }
    }
}
