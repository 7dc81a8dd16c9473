//! Experiment orchestration: configuration, seeded replications, budget
//! enforcement and CSV output.

pub mod config;
pub mod runner;
pub mod seeds;
pub mod snapshot;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use config::{
    AlgorithmConfig, ExperimentConfig, GeometryConfig, MetricsConfig, NoiseConfig, Resolved, SigmaMeaning,
    SweepConfig, TaskConfig, TaskKind, VariantConfig,
};
pub use runner::{
    experiment_dir, metrics_from_snapshot, render_record, run_experiment, run_replication, run_sweep, RunResult,
    LEDGER_HEADER, METRICS_HEADER,
};
pub use seeds::{derive_seed, stream_seeds};
pub use snapshot::{export_grid_snapshot, load_grid_snapshot, parse_snapshot, render_snapshot};

/// Writes to a sibling temporary file, then renames over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
