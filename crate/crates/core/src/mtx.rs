//! Matrix Market files and problem manifests.
//!
//! Dense matrices use the `array` layout (column-major values), sparse ones
//! the `coordinate` layout (1-based `row col value` triplets). Only `real`
//! or `integer` fields with `general` symmetry are accepted.
//!
//! A problem is described by a JSON manifest whose paths are relative to the
//! manifest's directory:
//!
//! ```json
//! { "target": "C.mtx", "basis": ["A_1.mtx", "A_2.mtx"], "f_star": 1.0 }
//! ```
//!
//! `f_star` is optional; without it relative accuracy cannot be reported.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix, SparseMatrix};
use crate::regression::RegressionProblem;

fn parse_err(path: &Path, line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    }
}

/// Parses Matrix Market text; `origin` only labels errors.
pub fn parse_matrix_market(text: &str, origin: &Path) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(origin, 1, format!("bad banner {banner:?}")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(origin, 1, format!("unsupported format {other}"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer") {
        return Err(parse_err(origin, 1, format!("unsupported field {}", fields[3])));
    }
    if fields[4] != "general" {
        return Err(parse_err(origin, 1, format!("unsupported symmetry {}", fields[4])));
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(origin, 2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| parse_err(origin, size_line, e)))
        .collect::<Result<_>>()?;
    let num = |line: usize, tok: &str| -> Result<f64> {
        let v: f64 = tok.parse().map_err(|e| parse_err(origin, line, e))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(origin, line, "non-finite value"))
        }
    };
    if coordinate {
        let &[n, m, nnz] = dims.as_slice() else {
            return Err(parse_err(origin, size_line, "expected `rows cols entries`"));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for (line, l) in body {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let &[i, j, v] = toks.as_slice() else {
                return Err(parse_err(origin, line, "expected `row col value`"));
            };
            let i: usize = i.parse().map_err(|e| parse_err(origin, line, e))?;
            let j: usize = j.parse().map_err(|e| parse_err(origin, line, e))?;
            if i == 0 || j == 0 || i > n || j > m {
                return Err(parse_err(origin, line, format!("index ({i}, {j}) out of range")));
            }
            triplets.push((i - 1, j - 1, num(line, v)?));
        }
        if triplets.len() != nnz {
            return Err(parse_err(
                origin,
                size_line,
                format!("declared {nnz} entries, found {}", triplets.len()),
            ));
        }
        Ok(SparseMatrix::from_triplets(n, m, &triplets)?.into())
    } else {
        let &[n, m] = dims.as_slice() else {
            return Err(parse_err(origin, size_line, "expected `rows cols`"));
        };
        let mut data = vec![0.0; n * m];
        let mut count = 0;
        for (line, l) in body {
            for tok in l.split_whitespace() {
                if count == n * m {
                    return Err(parse_err(origin, line, "too many values"));
                }
                // column-major on disk, row-major in memory
                let (i, j) = (count % n, count / n);
                data[i * m + j] = num(line, tok)?;
                count += 1;
            }
        }
        if count != n * m {
            return Err(parse_err(origin, size_line, format!("expected {} values, found {count}", n * m)));
        }
        Ok(DenseMatrix::new(n, m, data)?.into())
    }
}

pub fn format_matrix_market(matrix: &Matrix) -> String {
    let (n, m) = matrix.shape();
    let mut out = String::new();
    match matrix {
        Matrix::Dense(d) => {
            out.push_str("%%MatrixMarket matrix array real general\n");
            let _ = writeln!(out, "{n} {m}");
            for j in 0..m {
                for i in 0..n {
                    let _ = writeln!(out, "{:e}", d.get(i, j));
                }
            }
        }
        Matrix::Sparse(s) => {
            out.push_str("%%MatrixMarket matrix coordinate real general\n");
            let _ = writeln!(out, "{n} {m} {}", s.nnz());
            for j in 0..m {
                for (i, v) in s.column(j) {
                    let _ = writeln!(out, "{} {} {v:e}", i + 1, j + 1);
                }
            }
        }
    }
    out
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, path)
}

pub fn write_matrix_market(path: &Path, matrix: &Matrix) -> Result<()> {
    fs::write(path, format_matrix_market(matrix)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub target: PathBuf,
    pub basis: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: RegressionProblem,
    pub f_star: Option<f64>,
}

pub fn load_problem(manifest_path: &Path) -> Result<LoadedProblem> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let target = read_matrix_market(&base.join(&manifest.target))?;
    let basis = manifest
        .basis
        .iter()
        .map(|p| read_matrix_market(&base.join(p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedProblem {
        problem: RegressionProblem::new(target, basis)?,
        f_star: manifest.f_star,
    })
}

/// Writes `C.mtx`, `A_<i>.mtx` and `problem.json` into `dir` (created if
/// missing); returns the manifest path. Matrices are stored as held by the
/// problem, i.e. after any ingestion transpose.
pub fn save_problem(dir: &Path, problem: &RegressionProblem, f_star: Option<f64>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix_market(&dir.join("C.mtx"), problem.target())?;
    let mut basis = Vec::with_capacity(problem.d());
    for (i, a) in problem.basis().iter().enumerate() {
        let name = PathBuf::from(format!("A_{}.mtx", i + 1));
        write_matrix_market(&dir.join(&name), a)?;
        basis.push(name);
    }
    let manifest = Manifest {
        target: "C.mtx".into(),
        basis,
        f_star,
    };
    let path = dir.join("problem.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
