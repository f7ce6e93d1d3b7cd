//! Dense and compressed-sparse-column matrices, the products the oracles need,
//! unit vectors and deterministic random streams.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::usage(format!(
            "{what}: expected vector of length {expected}, got {got}"
        )));
    }
    Ok(())
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::usage(format!(
                "dense matrix {n_rows}x{n_cols} needs {} entries, got {}",
                n_rows * n_cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::usage(format!(
                "dense matrix entry ({}, {}) is not finite",
                pos / n_cols.max(1),
                pos % n_cols.max(1)
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Rectangular matrix with `diag` on its main diagonal.
    pub fn from_diagonal(n_rows: usize, n_cols: usize, diag: &[f64]) -> Result<Self> {
        if diag.len() > n_rows.min(n_cols) {
            return Err(Error::usage("diagonal longer than min(n_rows, n_cols)"));
        }
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n_cols + i] = d;
        }
        Self::new(n_rows, n_cols, m.data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::usage("ragged rows"));
        }
        Self::new(n_rows, n_cols, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n_cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t.data[j * self.n_rows + i] = self.data[i * self.n_cols + j];
            }
        }
        t
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    /// `out = M v`, no allocation.
    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.n_cols.max(1))) {
            *o = dot(row, v);
        }
        if self.n_cols == 0 {
            out.fill(0.0);
        }
    }

    /// `out = Mᵀ v`, no allocation.
    pub fn matvec_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        out.fill(0.0);
        if self.n_cols == 0 {
            return;
        }
        for (&vi, row) in v.iter().zip(self.data.chunks_exact(self.n_cols)) {
            if vi != 0.0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += vi * r;
                }
            }
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Matrix) {
        debug_assert_eq!(self.n_rows, other.n_rows());
        debug_assert_eq!(self.n_cols, other.n_cols());
        match other {
            Matrix::Dense(d) => {
                for (s, o) in self.data.iter_mut().zip(&d.data) {
                    *s += alpha * o;
                }
            }
            Matrix::Sparse(s) => {
                for j in 0..s.n_cols {
                    for idx in s.col_ptr[j]..s.col_ptr[j + 1] {
                        self.data[s.row_idx[idx] * self.n_cols + j] += alpha * s.values[idx];
                    }
                }
            }
        }
    }

    /// `leftᵀ M right`.
    pub fn bilinear(&self, left: &[f64], right: &[f64]) -> f64 {
        left.iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(i, &l)| l * dot(self.row(i), right))
            .sum()
    }
}

/// Compressed-sparse-column matrix. Stored values are finite and nonzero,
/// row indices strictly increase within each column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != n_cols + 1 || col_ptr[0] != 0 {
            return Err(Error::usage("column offsets must have n_cols + 1 entries starting at 0"));
        }
        if col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::usage("column offsets must be nondecreasing"));
        }
        let nnz = col_ptr[n_cols];
        if row_idx.len() != nnz || values.len() != nnz {
            return Err(Error::usage("row index / value arrays disagree with offsets"));
        }
        for j in 0..n_cols {
            let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::usage(format!(
                    "row indices in column {j} must be strictly increasing"
                )));
            }
            if rows.last().is_some_and(|&r| r >= n_rows) {
                return Err(Error::usage(format!("row index out of range in column {j}")));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::usage("sparse values must be finite and nonzero"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<_> = triplets.to_vec();
        if sorted.iter().any(|&(i, j, _)| i >= n_rows || j >= n_cols) {
            return Err(Error::usage("triplet index out of range"));
        }
        sorted.sort_by_key(|&(i, j, _)| (j, i));
        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut cols = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            if cols.last() == Some(&j) && row_idx.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(i);
                cols.push(j);
                values.push(v);
            }
        }
        let keep: Vec<bool> = values.iter().map(|&v| v != 0.0).collect();
        let mut r2 = Vec::new();
        let mut v2 = Vec::new();
        for (k, &kept) in keep.iter().enumerate() {
            if kept {
                r2.push(row_idx[k]);
                v2.push(values[k]);
                col_ptr[cols[k] + 1] += 1;
            }
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Self::new(n_rows, n_cols, col_ptr, r2, v2)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored `(row, value)` pairs of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.column(j).find(|&(r, _)| r == i).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_cols);
        out.fill(0.0);
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                for (i, a) in self.column(j) {
                    out[i] += a * vj;
                }
            }
        }
    }

    pub fn matvec_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n_rows);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.column(j).map(|(i, a)| a * v[i]).sum();
        }
    }

    pub fn bilinear(&self, left: &[f64], right: &[f64]) -> f64 {
        right
            .iter()
            .enumerate()
            .filter(|(_, &r)| r != 0.0)
            .map(|(j, &r)| r * self.column(j).map(|(i, a)| a * left[i]).sum::<f64>())
            .sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            for (i, a) in self.column(j) {
                d.set(i, j, a);
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = (0..self.n_cols)
            .flat_map(|j| self.column(j).map(move |(i, a)| (j, i, a)))
            .collect();
        Self::from_triplets(self.n_cols, self.n_rows, &triplets)
            .expect("transpose of a valid matrix is valid")
    }
}

/// Either storage format, with a shared product surface.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl From<DenseMatrix> for Matrix {
    fn from(m: DenseMatrix) -> Self {
        Matrix::Dense(m)
    }
}

impl From<SparseMatrix> for Matrix {
    fn from(m: SparseMatrix) -> Self {
        Matrix::Sparse(m)
    }
}

impl Matrix {
    pub fn n_rows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.n_rows,
            Matrix::Sparse(m) => m.n_rows,
        }
    }

    pub fn n_cols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.n_cols,
            Matrix::Sparse(m) => m.n_cols,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows(), self.n_cols())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Matrix::Dense(m) => m.get(i, j),
            Matrix::Sparse(m) => m.get(i, j),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec", self.n_cols(), v.len())?;
        let mut out = vec![0.0; self.n_rows()];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    pub fn matvec_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec_transpose", self.n_rows(), v.len())?;
        let mut out = vec![0.0; self.n_cols()];
        self.matvec_transpose_into(v, &mut out);
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Matrix::Dense(m) => m.matvec_into(v, out),
            Matrix::Sparse(m) => m.matvec_into(v, out),
        }
    }

    pub fn matvec_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        match self {
            Matrix::Dense(m) => m.matvec_transpose_into(v, out),
            Matrix::Sparse(m) => m.matvec_transpose_into(v, out),
        }
    }

    /// `leftᵀ M right` without forming the rank-one matrix.
    pub fn bilinear(&self, left: &[f64], right: &[f64]) -> f64 {
        match self {
            Matrix::Dense(m) => m.bilinear(left, right),
            Matrix::Sparse(m) => m.bilinear(left, right),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(m) => m.clone(),
            Matrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.transpose()),
            Matrix::Sparse(m) => Matrix::Sparse(m.transpose()),
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.frobenius_norm_sq(),
            Matrix::Sparse(m) => dot(&m.values, &m.values),
        }
    }
}

/// Frobenius inner product `Σ M1[i,j]·M2[i,j]`.
pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::usage(format!(
            "frobenius_inner: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(match (a, b) {
        (Matrix::Dense(x), Matrix::Dense(y)) => dot(&x.data, &y.data),
        (Matrix::Sparse(s), Matrix::Dense(d)) | (Matrix::Dense(d), Matrix::Sparse(s)) => (0
            ..s.n_cols)
            .flat_map(|j| s.column(j).map(move |(i, v)| v * d.get(i, j)))
            .sum(),
        (Matrix::Sparse(x), Matrix::Sparse(y)) => {
            let mut acc = 0.0;
            for j in 0..x.n_cols {
                let mut ys = y.column(j).peekable();
                for (i, v) in x.column(j) {
                    while ys.peek().is_some_and(|&(r, _)| r < i) {
                        ys.next();
                    }
                    if let Some(&(r, w)) = ys.peek() {
                        if r == i {
                            acc += v * w;
                        }
                    }
                }
            }
            acc
        }
    })
}

/// A vector of Euclidean length one (within `1e-12`).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`; `None` for the zero or a non-finite vector.
    pub fn normalize(mut v: Vec<f64>) -> Option<Self> {
        let nrm = norm2(&v);
        if !(nrm.is_finite() && nrm > 0.0) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        Some(Self(v))
    }

    /// Wraps a vector already normalized by the caller.
    pub(crate) fn from_normalized(v: Vec<f64>) -> Self {
        debug_assert!((norm2(&v) - 1.0).abs() <= 1e-12);
        Self(v)
    }

    /// Standard basis vector `e_i` in `R^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Seeded ChaCha8 stream. Equal `(seed, stream)` pairs give identical draws
/// on every platform.
///
/// Substreams share the seed and differ in the ChaCha stream id, so the data
/// generator, the oracle noise and the evaluator never consume each other's
/// draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const DATA: u64 = 1;
    pub const ORACLE: u64 = 2;
    pub const EVAL: u64 = 3;

    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform draw on `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        Uniform::new_inclusive(lo, hi)
            .expect("finite bounds")
            .sample(&mut self.rng)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// `count` distinct values drawn uniformly from `pool`, in draw order.
    pub fn choose_distinct(&mut self, pool: &[usize], count: usize) -> Vec<usize> {
        let mut pool = pool.to_vec();
        let count = count.min(pool.len());
        for i in 0..count {
            let j = i + self.index(pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}

/// Uniform point on the unit sphere of `R^n` via a normalized Gaussian vector.
pub fn sample_unit_sphere(rng: &mut RngStream, n: usize) -> Result<UnitVector> {
    if n == 0 {
        return Err(Error::usage("sample_unit_sphere: dimension must be at least 1"));
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
        if let Some(u) = UnitVector::normalize(v) {
            return Ok(u);
        }
    }
}
