use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Resolved};
use super::seeds::{derive_seed, stream_seeds};
use super::snapshot::{export_grid_snapshot, load_grid_snapshot};
use super::write_atomic;
use crate::algorithms::{initialize_grid, run_generation, Problem, StreamRng};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::metrics::{measure, MetricsRecord};
use crate::selection::{InCellRule, SelectorSpec};
use crate::tasks::NoiseSpec;

pub const METRICS_HEADER: &str = "task,variant,replication,evaluations,correct_bd,\
corrected_collection_size,total_corrected_quality,wallclock_seconds\n";

pub const LEDGER_HEADER: &str = "evaluations_used,metric_evaluations,generations,drifts\n";

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub replication: usize,
    /// Checkpoints, strictly increasing in evaluations.
    pub records: Vec<MetricsRecord>,
    pub wallclock_seconds: Vec<f64>,
    /// Non-empty source cells at each checkpoint, index-aligned with
    /// `records`.
    pub coverage: Vec<usize>,
    /// Same checkpoints measured without noise, when enabled.
    pub exact_records: Vec<MetricsRecord>,
    /// Same checkpoints sampling each cell's best stored individual, when
    /// enabled.
    pub best_of_cell_records: Vec<MetricsRecord>,
    pub evaluations_used: u64,
    /// Evaluations spent on metrics; never part of `evaluations_used`.
    pub metric_evaluations: u64,
    pub generations: u64,
    pub drifts: u64,
    pub snapshot_path: Option<PathBuf>,
}

impl RunResult {
    pub fn final_record(&self) -> &MetricsRecord {
        self.records.last().expect("every run ends with a checkpoint")
    }

    /// Last checkpoint taken at or before `evaluations`.
    pub fn record_at(&self, evaluations: u64) -> Option<&MetricsRecord> {
        self.records.iter().rev().find(|r| r.evaluations_used <= evaluations)
    }

    /// Final `correct_bd` as a fraction of the non-empty source cells.
    pub fn final_correct_fraction(&self) -> f64 {
        let cells = *self.coverage.last().expect("every run ends with a checkpoint");
        if cells == 0 {
            return 0.0;
        }
        self.final_record().correct_bd_count as f64 / cells as f64
    }
}

fn csv_row(task: &str, variant: &str, replication: usize, r: &MetricsRecord, wallclock: f64) -> String {
    format!(
        "{task},{variant},{replication},{},{},{},{},{wallclock:.3}\n",
        r.evaluations_used, r.correct_bd_count, r.corrected_collection_size, r.total_corrected_quality
    )
}

/// Appends checkpoint rows to a per-replication CSV as they are produced.
struct RowSink {
    file: Option<File>,
    path: PathBuf,
}

impl RowSink {
    fn create(dir: Option<&Path>, name: &str, enabled: bool) -> Result<Self> {
        let path = dir.map(|d| d.join(name)).unwrap_or_default();
        let file = match dir {
            Some(_) if enabled => {
                let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
                f.write_all(METRICS_HEADER.as_bytes()).map_err(|e| Error::io(&path, e))?;
                Some(f)
            }
            _ => None,
        };
        Ok(RowSink { file, path })
    }

    fn push(&mut self, row: &str) -> Result<()> {
        if let Some(f) = &mut self.file {
            f.write_all(row.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| Error::io(&self.path, e))?;
        }
        Ok(())
    }
}

/// Runs one seeded replication. When `dir` is given, checkpoint rows,
/// the final snapshot and the evaluation ledger are written there.
pub fn run_replication(
    config: &ExperimentConfig,
    resolved: &Resolved,
    replication: usize,
    dir: Option<&Path>,
) -> Result<RunResult> {
    let started = Instant::now();
    let task_label = config.task.kind.to_string();
    let variant_label = config.algorithm.variant.label();
    let master = config.master_seed;
    let rep = replication as u64;

    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut sinks = [
        RowSink::create(dir, "metrics.csv", true)?,
        RowSink::create(dir, "metrics_exact.csv", config.metrics.noise_free_metrics)?,
        RowSink::create(dir, "metrics_best_of_cell.csv", config.metrics.best_of_cell)?,
    ];

    let problem = Problem::new(resolved.task.as_ref(), resolved.noise);
    let exact_problem = Problem::new(resolved.task.as_ref(), NoiseSpec::NONE);
    let algorithm = &resolved.algorithm;
    let (mut state, _) = initialize_grid(
        &problem,
        algorithm,
        resolved.geometry.clone(),
        stream_seeds(master, rep),
        config.budget,
    )?;

    let mut rngs = [
        StreamRng::seed_from_u64(derive_seed(master, rep, "metrics")),
        StreamRng::seed_from_u64(derive_seed(master, rep, "metrics_exact")),
        StreamRng::seed_from_u64(derive_seed(master, rep, "metrics_best_of_cell")),
    ];
    let best_selector = SelectorSpec {
        in_cell_rule: InCellRule::BestOfCell,
        ..algorithm.selector
    };
    let n_repeat = config.metrics.n_repeat;
    let counting = config.metrics.correct_counting;

    let mut result = RunResult {
        replication,
        records: Vec::new(),
        wallclock_seconds: Vec::new(),
        coverage: Vec::new(),
        exact_records: Vec::new(),
        best_of_cell_records: Vec::new(),
        evaluations_used: 0,
        metric_evaluations: 0,
        generations: 0,
        drifts: 0,
        snapshot_path: None,
    };

    let mut checkpoint = |grid: &Grid, used: u64, result: &mut RunResult| -> Result<()> {
        let wallclock = if config.record_wallclock {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let passes = [
            (true, &problem, &algorithm.selector),
            (config.metrics.noise_free_metrics, &exact_problem, &algorithm.selector),
            (config.metrics.best_of_cell, &problem, &best_selector),
        ];
        for (i, (enabled, prob, selector)) in passes.into_iter().enumerate() {
            if !enabled {
                continue;
            }
            let (record, container) = measure(grid, selector, prob, n_repeat, counting, used, &mut rngs[i]);
            result.metric_evaluations += container.evaluations;
            sinks[i].push(&csv_row(&task_label, &variant_label, replication, &record, wallclock))?;
            match i {
                0 => {
                    result.records.push(record);
                    result.wallclock_seconds.push(wallclock);
                    result.coverage.push(grid.coverage());
                }
                1 => result.exact_records.push(record),
                _ => result.best_of_cell_records.push(record),
            }
        }
        Ok(())
    };

    let interval = config.checkpoint_every();
    let mut next = interval;
    loop {
        let used = state.evaluations_used();
        if used >= next {
            checkpoint(state.grid(), used, &mut result)?;
            next = (used / interval + 1) * interval;
        }
        let affordable = match algorithm.generation_cost() {
            Some(cost) => used + cost <= config.budget,
            None => used < config.budget,
        };
        if !affordable {
            break;
        }
        run_generation(&mut state, &problem, algorithm);
    }
    let used = state.evaluations_used();
    if result.records.last().map(|r| r.evaluations_used) != Some(used) {
        checkpoint(state.grid(), used, &mut result)?;
    }

    result.evaluations_used = used;
    result.generations = state.generation();
    result.drifts = state.drifts();

    if let Some(d) = dir {
        if config.write_snapshots {
            let path = d.join("snapshot.csv");
            export_grid_snapshot(state.grid(), resolved.task.spec().genotype_dim, &path)?;
            result.snapshot_path = Some(path);
        }
        let ledger = format!(
            "{LEDGER_HEADER}{},{},{},{}\n",
            result.evaluations_used, result.metric_evaluations, result.generations, result.drifts
        );
        write_atomic(&d.join("ledger.csv"), ledger.as_bytes())?;
    }
    Ok(result)
}

fn merged(results: &[RunResult], task: &str, variant: &str, pick: fn(&RunResult) -> &[MetricsRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    for r in results {
        for (i, rec) in pick(r).iter().enumerate() {
            let wall = r.wallclock_seconds.get(i).copied().unwrap_or(0.0);
            out.push_str(&csv_row(task, variant, r.replication, rec, wall));
        }
    }
    out
}

/// Directory that `run_experiment` writes for `config`.
pub fn experiment_dir(config: &ExperimentConfig) -> PathBuf {
    config.output_dir.join(config.label())
}

/// Runs every replication of `config` and writes
///
/// ```text
/// <output_dir>/<task>_<variant>/
///     config.json                 resolved configuration
///     metrics.csv                 all replications, in replication order
///     metrics_exact.csv           (metrics.noise_free_metrics)
///     metrics_best_of_cell.csv    (metrics.best_of_cell)
///     rep_000/metrics.csv         rows appended as checkpoints happen
///     rep_000/snapshot.csv        final grid
///     rep_000/ledger.csv          charged vs metric evaluations
/// ```
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    let resolved = config.resolve()?;
    let dir = experiment_dir(config);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_atomic(&dir.join("config.json"), config.to_json().as_bytes())?;

    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<RunResult> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let rep_dir = dir.join(format!("rep_{rep:03}"));
                run_replication(config, &resolved, rep, Some(&rep_dir))
            })
            .collect::<Result<_>>()
    })?;

    let task = config.task.kind.to_string();
    let variant = config.algorithm.variant.label();
    write_atomic(&dir.join("metrics.csv"), merged(&results, &task, &variant, |r| &r.records).as_bytes())?;
    if config.metrics.noise_free_metrics {
        let text = merged(&results, &task, &variant, |r| &r.exact_records);
        write_atomic(&dir.join("metrics_exact.csv"), text.as_bytes())?;
    }
    if config.metrics.best_of_cell {
        let text = merged(&results, &task, &variant, |r| &r.best_of_cell_records);
        write_atomic(&dir.join("metrics_best_of_cell.csv"), text.as_bytes())?;
    }
    Ok(results)
}

/// Runs every (task, variant) pair of the sweep section.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<(String, Vec<RunResult>)>> {
    let experiments = config.expand_sweep()?;
    for cfg in &experiments {
        cfg.resolve()?;
    }
    experiments
        .iter()
        .map(|cfg| Ok((cfg.label(), run_experiment(cfg)?)))
        .collect()
}

/// Recomputes corrected-container metrics from a saved snapshot, using the
/// configuration's geometry, selector, noise and metric settings.
pub fn metrics_from_snapshot(config: &ExperimentConfig, snapshot: &Path, evaluations: u64) -> Result<MetricsRecord> {
    let resolved = config.resolve()?;
    let grid = load_grid_snapshot(snapshot, resolved.geometry.clone(), resolved.algorithm.variant.depth())?;
    let dim = resolved.task.spec().genotype_dim;
    if let Some((cell, _)) = grid.occupied().find(|(_, c)| c.occupants().iter().any(|i| i.genotype.len() != dim)) {
        return Err(Error::Snapshot {
            line: 0,
            message: format!("cell {} holds genotypes that do not match the task dimension {dim}", cell.0),
        });
    }
    let problem = Problem::new(resolved.task.as_ref(), resolved.noise);
    let mut rng = StreamRng::seed_from_u64(derive_seed(config.master_seed, 0, "metrics"));
    let (record, _) = measure(
        &grid,
        &resolved.algorithm.selector,
        &problem,
        config.metrics.n_repeat,
        config.metrics.correct_counting,
        evaluations,
        &mut rng,
    );
    Ok(record)
}

/// One metrics CSV row for `record`, with the header.
pub fn render_record(config: &ExperimentConfig, record: &MetricsRecord) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push_str(&csv_row(
        &config.task.kind.to_string(),
        &config.algorithm.variant.label(),
        0,
        record,
        0.0,
    ));
    out
}
