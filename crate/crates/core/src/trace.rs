//! Convergence traces: evaluation schedules, rows, and the CSV format.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact CSV header of a trace file.
pub const CSV_HEADER: &str = "iter,f_est,delta_k,matvecs,elapsed_s";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: u64,
    pub f_est: f64,
    pub delta_k: f64,
    /// Cumulative products with a residual or its transpose (oracle and evaluation).
    pub matvecs: u64,
    pub elapsed_s: f64,
}

/// Iterations at which the objective is evaluated. The last iteration of a
/// run is always evaluated in addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EvalSchedule {
    /// `⌈r^j⌉` for `j = 0, 1, …`; ratio 2 gives `{1, 2, 4, 8, …}`.
    Geometric { ratio: f64 },
    /// Every `k`-th iteration.
    Every(u64),
    /// Explicit iteration list.
    Explicit(Vec<u64>),
}

impl Default for EvalSchedule {
    fn default() -> Self {
        EvalSchedule::Geometric { ratio: 2.0 }
    }
}

impl EvalSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            EvalSchedule::Geometric { ratio } if !(*ratio > 1.0 && ratio.is_finite()) => {
                Err(Error::usage(format!("geometric ratio must exceed 1, got {ratio}")))
            }
            EvalSchedule::Every(0) => Err(Error::usage("evaluation period must be >= 1")),
            _ => Ok(()),
        }
    }

    /// First checkpoint strictly after `k`, if any.
    pub fn next_after(&self, k: u64) -> Option<u64> {
        match self {
            EvalSchedule::Geometric { ratio } => {
                let mut t = 1.0f64;
                loop {
                    let c = t.ceil();
                    if c >= u64::MAX as f64 {
                        return None;
                    }
                    if c as u64 > k {
                        return Some(c as u64);
                    }
                    t *= ratio;
                }
            }
            EvalSchedule::Every(period) => Some((k / period + 1) * period),
            EvalSchedule::Explicit(list) => list.iter().copied().filter(|&c| c > k).min(),
        }
    }

    /// Checkpoints in `1..=last`, with `last` appended.
    pub fn checkpoints(&self, last: u64) -> Vec<u64> {
        let mut out = Vec::new();
        let mut k = 0;
        while let Some(c) = self.next_after(k) {
            if c >= last {
                break;
            }
            out.push(c);
            k = c;
        }
        if last > 0 {
            out.push(last);
        }
        out
    }
}

/// Streams rows to a CSV file, flushing after every row so an interrupted run
/// leaves a valid prefix.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl TraceWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Self::new(BufWriter::new(file)).map_err(|e| with_path(e, path))
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        // Header written by hand so an empty trace still carries it.
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        inner.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
        inner.flush().map_err(|e| csv_err(e.into()))?;
        Ok(Self { inner })
    }

    pub fn push(&mut self, row: &TraceRow) -> Result<()> {
        self.inner.serialize(row).map_err(csv_err)?;
        self.inner.flush().map_err(|e| csv_err(e.into()))
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| Error::usage(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<trace>", io),
        other => Error::usage(format!("{other:?}")),
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = TraceWriter::create(path)?;
    for row in rows {
        w.push(row).map_err(|e| with_path(e, path))?;
    }
    Ok(())
}

/// Parses trace rows; the header must match [`CSV_HEADER`] exactly.
pub fn parse_trace_csv<R: std::io::Read>(reader: R, origin: &Path) -> Result<Vec<TraceRow>> {
    let parse = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| parse(e.to_string()))?;
    let joined = header.iter().collect::<Vec<_>>().join(",");
    if joined != CSV_HEADER {
        return Err(parse(format!("unexpected header {joined:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.deserialize().enumerate() {
        let row: TraceRow = rec.map_err(|e| parse(format!("line {}: {e}", line + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace_csv(std::io::BufReader::new(file), path)
}
