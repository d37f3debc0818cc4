//! Configuration-driven runs: lattice → circuit → backend (or noisy
//! trajectories) → analysis, with every artifact written as CSV and listed
//! in a hashed manifest.

mod compare;
mod config;
mod run;
mod series;

use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use compare::{compare, CompareReport, PointDiff};
pub use config::{
    AnalysisSpec, BackendSpec, GraphSpec, MeasureSpec, NoiseSpec, OutputSpec, ParamGrid, PatternSpec, Prepared,
    RunConfig, SCHEMA_VERSION,
};
pub use run::{run, PointSummary, RunSummary};
pub use series::{read_series, SeriesRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("backend/graph mismatch: {0}")]
    BackendGraphMismatch(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("runs are not comparable: {0}")]
    GridMismatch(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_owned(), source }
    }

    /// Config and mismatch errors are the caller's to fix; I/O is not.
    pub fn is_validation(&self) -> bool {
        matches!(self, Self::Config(_) | Self::BackendGraphMismatch(_) | Self::GridMismatch(_))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Stream offset of the calibration runs, one per `θz` index.
const CALIBRATION_STREAM: u64 = 1 << 32;

/// Seed of grid point `index`: the first word of ChaCha8 keyed by the master
/// seed on stream `index`. Calibration runs use stream `2^32 + θz index`.
/// Trajectories inside a run take further streams of their own generator.
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn calibration_seed(master: u64, tz_index: u64) -> u64 {
    point_seed(master, CALIBRATION_STREAM + tz_index)
}
