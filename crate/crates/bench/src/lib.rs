//! Experiment harness around `pedi-core`: PGM input, noisy problem
//! construction, cached reference solutions, per-iteration CSV logs and
//! threshold tables.

pub mod logs;
pub mod pgm;
pub mod run;
pub mod table;
pub mod target;

use std::path::{Path, PathBuf};

use pedi_core::{ImagingError, SolverError};
use thiserror::Error;

use crate::target::TargetSolver;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{source_name}, line {line}: {msg}")]
    Parse {
        source_name: String,
        line: u64,
        msg: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{solver}: {source}")]
    SolverRun {
        solver: &'static str,
        source: SolverError,
    },
    #[error(
        "target file {} was made for a different configuration (stored key {found}, expected {expected}); \
         delete it or choose another path",
        path.display()
    )]
    CacheMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },
    #[error(
        "target file {} belongs to a different problem (stored hash {found}, expected {expected})",
        path.display()
    )]
    TargetMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },
    #[error(
        "reference failed the quality gate: gap/gap0 = {ratio:e} > {limit:e} after {iters} {solver} iterations; \
         raise --target-iters or use --target-solver dual-fb"
    )]
    QualityGate {
        ratio: f64,
        limit: f64,
        iters: usize,
        solver: TargetSolver,
    },
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            _ => 1,
        }
    }
}
