use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{AlgorithmSpec, Variant};
use crate::error::{Error, Result};
use crate::geometry::{CartesianGeometry, GridGeometry, PolarGeometry};
use crate::metrics::{CorrectCounting, DEFAULT_N_REPEAT};
use crate::selection::{MutationSpec, SelectorSpec};
use crate::tasks::{Bounds, NoiseSpec, PlanarArm, Rastrigin, Task, TaskSpec};

/// One experiment: a task, a variant, a budget and a number of seeded
/// replications. Every field has a default, so `{}` is a valid file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskConfig,
    pub noise: NoiseConfig,
    /// Overrides the task's default discretisation.
    pub grid: Option<GeometryConfig>,
    pub algorithm: AlgorithmConfig,
    /// Charged evaluations per replication.
    pub budget: u64,
    pub replications: usize,
    pub master_seed: u64,
    /// Charged evaluations between checkpoints; defaults to 5% of the budget.
    pub checkpoint_interval: Option<u64>,
    pub metrics: MetricsConfig,
    pub output_dir: PathBuf,
    /// Replications run concurrently; defaults to the number of CPUs.
    pub workers: Option<usize>,
    /// Writes real timings into `wallclock_seconds`. Off by default so that
    /// outputs depend only on the configuration.
    pub record_wallclock: bool,
    pub write_snapshots: bool,
    /// Used by the `sweep` command only.
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: TaskConfig::default(),
            noise: NoiseConfig::default(),
            grid: None,
            algorithm: AlgorithmConfig::default(),
            budget: 500_000,
            replications: 1,
            master_seed: 0,
            checkpoint_interval: None,
            metrics: MetricsConfig::default(),
            output_dir: PathBuf::from("results"),
            workers: None,
            record_wallclock: false,
            write_snapshots: true,
            sweep: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Rastrigin,
    Arm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    pub genotype_dim: Option<usize>,
    /// Same interval for every gene.
    pub gene_bounds: Option<Bounds>,
    pub fitness_bounds: Option<Bounds>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            kind: TaskKind::Rastrigin,
            genotype_dim: None,
            gene_bounds: None,
            fitness_bounds: None,
        }
    }
}

impl TaskConfig {
    pub fn of(kind: TaskKind) -> Self {
        TaskConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<Box<dyn Task>> {
        let defaults: Box<dyn Task> = match self.kind {
            TaskKind::Rastrigin => Box::new(Rastrigin::new()),
            TaskKind::Arm => Box::new(PlanarArm::with_joints(self.genotype_dim.unwrap_or(PlanarArm::JOINTS))),
        };
        if self.genotype_dim.is_none() && self.gene_bounds.is_none() && self.fitness_bounds.is_none() {
            return Ok(defaults);
        }
        let base = defaults.spec();
        let dim = self.genotype_dim.unwrap_or(base.genotype_dim);
        let gene = self.gene_bounds.unwrap_or(base.gene_bounds[0]);
        let spec = TaskSpec {
            genotype_dim: dim,
            gene_bounds: vec![gene; dim],
            bd_bounds: match self.kind {
                TaskKind::Rastrigin => [gene; 2],
                TaskKind::Arm => base.bd_bounds,
            },
            fitness_bounds: self.fitness_bounds.unwrap_or(base.fitness_bounds),
        };
        Ok(match self.kind {
            TaskKind::Rastrigin => Box::new(Rastrigin::with_spec(spec)?),
            TaskKind::Arm => Box::new(PlanarArm::with_spec(spec)?),
        })
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Rastrigin => "rastrigin",
            TaskKind::Arm => "arm",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMeaning {
    #[default]
    StdDev,
    Variance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub fitness_sigma: f64,
    pub bd_sigma: f64,
    /// Whether the two numbers above are standard deviations or variances.
    pub interpretation: SigmaMeaning,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let d = NoiseSpec::default();
        NoiseConfig {
            fitness_sigma: d.fitness_sigma,
            bd_sigma: d.bd_sigma,
            interpretation: SigmaMeaning::StdDev,
        }
    }
}

impl NoiseConfig {
    pub fn spec(&self) -> Result<NoiseSpec> {
        // Validate the raw numbers first: sqrt would turn a negative into NaN.
        NoiseSpec::new(self.fitness_sigma, self.bd_sigma)?;
        match self.interpretation {
            SigmaMeaning::StdDev => NoiseSpec::new(self.fitness_sigma, self.bd_sigma),
            SigmaMeaning::Variance => NoiseSpec::new(self.fitness_sigma.sqrt(), self.bd_sigma.sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Cartesian {
        lower: [f64; 2],
        upper: [f64; 2],
        bins: [usize; 2],
    },
    Polar {
        #[serde(default = "one")]
        max_radius: f64,
        /// Equal-area layout with this many rings.
        #[serde(default)]
        rings: Option<usize>,
        /// Explicit layout; takes precedence over `rings`.
        #[serde(default)]
        sectors_per_ring: Option<Vec<usize>>,
    },
}

fn one() -> f64 {
    1.0
}

impl GeometryConfig {
    pub fn build(&self) -> Result<GridGeometry> {
        Ok(match self {
            GeometryConfig::Cartesian { lower, upper, bins } => {
                GridGeometry::Cartesian(CartesianGeometry::new(*lower, *upper, *bins)?)
            }
            GeometryConfig::Polar {
                max_radius,
                rings,
                sectors_per_ring,
            } => GridGeometry::Polar(match sectors_per_ring {
                Some(layout) => PolarGeometry::new(*max_radius, layout.clone())?,
                None => PolarGeometry::equal_area(*max_radius, rings.unwrap_or(PolarGeometry::DEFAULT_RINGS))?,
            }),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariantConfig {
    /// Plain MAP-Elites on the task with all noise removed.
    BaselineNoiseFree,
    Naive {
        #[serde(default = "one_sample")]
        samples: u32,
    },
    Adaptive,
    AdaptiveDrift {
        #[serde(default = "ten")]
        depth: usize,
    },
    DeepGrid {
        #[serde(default = "fifty")]
        depth: usize,
    },
}

fn one_sample() -> u32 {
    1
}

fn ten() -> usize {
    10
}

fn fifty() -> usize {
    50
}

impl VariantConfig {
    pub fn variant(&self) -> Variant {
        match *self {
            VariantConfig::BaselineNoiseFree => Variant::Naive { samples: 1 },
            VariantConfig::Naive { samples } => Variant::Naive { samples },
            VariantConfig::Adaptive => Variant::Adaptive,
            VariantConfig::AdaptiveDrift { depth } => Variant::AdaptiveDrift { depth },
            VariantConfig::DeepGrid { depth } => Variant::DeepGrid { depth },
        }
    }

    pub fn is_noise_free(&self) -> bool {
        matches!(self, VariantConfig::BaselineNoiseFree)
    }

    pub fn label(&self) -> String {
        match self {
            VariantConfig::BaselineNoiseFree => "baseline_noise_free".to_string(),
            other => other.variant().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub variant: VariantConfig,
    pub batch_size: usize,
    pub init_size: usize,
    /// Per-gene mutation probability; defaults depend on the variant.
    pub mutation_rate: Option<f64>,
    pub sigma_fraction: f64,
    pub epsilon_fraction: f64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            variant: VariantConfig::DeepGrid { depth: 50 },
            batch_size: AlgorithmSpec::DEFAULT_BATCH_SIZE,
            init_size: AlgorithmSpec::DEFAULT_INIT_SIZE,
            mutation_rate: None,
            sigma_fraction: MutationSpec::DEFAULT_SIGMA_FRACTION,
            epsilon_fraction: SelectorSpec::DEFAULT_EPSILON_FRACTION,
        }
    }
}

impl AlgorithmConfig {
    pub fn spec(&self) -> Result<AlgorithmSpec> {
        let mut spec = AlgorithmSpec::new(self.variant.variant());
        spec.batch_size = self.batch_size;
        spec.init_size = self.init_size;
        if let Some(rate) = self.mutation_rate {
            spec.mutation.per_gene_rate = rate;
        }
        spec.mutation.sigma_fraction = self.sigma_fraction;
        spec.selector.epsilon_fraction = self.epsilon_fraction;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub n_repeat: usize,
    /// Also write `metrics_exact.csv`, computed with the noise removed.
    pub noise_free_metrics: bool,
    /// Also write `metrics_best_of_cell.csv`, sampling each cell's best
    /// stored individual instead of the variant's own selector.
    pub best_of_cell: bool,
    pub correct_counting: CorrectCounting,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            n_repeat: DEFAULT_N_REPEAT,
            noise_free_metrics: false,
            best_of_cell: false,
            correct_counting: CorrectCounting::BeforeCollisions,
        }
    }
}

/// Cartesian product of tasks and variants, everything else shared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub tasks: Vec<TaskConfig>,
    pub variants: Vec<VariantConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    /// `<task>_<variant>`, the name of this experiment's output directory.
    pub fn label(&self) -> String {
        format!("{}_{}", self.task.kind, self.algorithm.variant.label())
    }

    pub fn checkpoint_every(&self) -> u64 {
        self.checkpoint_interval.unwrap_or((self.budget / 20).max(1))
    }

    /// Checks every constraint and builds the runtime pieces.
    pub fn resolve(&self) -> Result<Resolved> {
        let task = self.task.build()?;
        let geometry = match &self.grid {
            Some(g) => g.build()?,
            None => task.default_geometry(),
        };
        let algorithm = self.algorithm.spec()?;
        let configured = self.noise.spec()?;
        let noise = if self.algorithm.variant.is_noise_free() {
            NoiseSpec::NONE
        } else {
            configured
        };
        if self.replications == 0 {
            return Err(Error::config("replications must be >= 1"));
        }
        if self.budget < algorithm.init_cost() {
            return Err(Error::config(format!(
                "budget {} is below the initialisation cost {}",
                self.budget,
                algorithm.init_cost()
            )));
        }
        if self.checkpoint_interval == Some(0) {
            return Err(Error::config("checkpoint_interval must be >= 1"));
        }
        if self.metrics.n_repeat == 0 {
            return Err(Error::config("metrics.n_repeat must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be >= 1"));
        }
        Ok(Resolved {
            task,
            geometry,
            algorithm,
            noise,
        })
    }

    /// Every (task, variant) combination of the sweep section.
    pub fn expand_sweep(&self) -> Result<Vec<ExperimentConfig>> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("configuration has no `sweep` section"))?;
        if sweep.tasks.is_empty() || sweep.variants.is_empty() {
            return Err(Error::config("sweep needs at least one task and one variant"));
        }
        let mut out = Vec::new();
        for task in &sweep.tasks {
            for variant in &sweep.variants {
                let mut cfg = self.clone();
                cfg.sweep = None;
                cfg.task = task.clone();
                cfg.algorithm.variant = *variant;
                // A grid override only makes sense for the task it was written for.
                if sweep.tasks.len() > 1 {
                    cfg.grid = None;
                }
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

/// Validated runtime pieces of a configuration.
pub struct Resolved {
    pub task: Box<dyn Task>,
    pub geometry: GridGeometry,
    pub algorithm: AlgorithmSpec,
    /// Noise used by both the optimiser and the metrics.
    pub noise: NoiseSpec,
}

impl fmt::Debug for Resolved {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resolved")
            .field("task", &self.task.name())
            .field("geometry", &self.geometry)
            .field("algorithm", &self.algorithm)
            .field("noise", &self.noise)
            .finish()
    }
}
