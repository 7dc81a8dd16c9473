//! The experiment variants behind one generation loop.
//!
//! Every variant shares the same batch structure: `batch_size` parents are
//! drawn from the grid as it stands at the start of the generation, mutated,
//! evaluated, and then inserted one after another. Variants differ only in
//! how offspring are evaluated (one sample or many) and in the insertion
//! rule.

mod adaptive;
mod deep_grid;
mod naive;

pub use adaptive::{adaptive_challenge, adaptive_drift_generation, adaptive_generation, ChallengeOutcome};
pub use deep_grid::deep_grid_generation;
pub use naive::naive_generation;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::GridGeometry;
use crate::grid::{CellIndex, Evaluation, Genotype, Grid, Individual};
use crate::selection::{mutate, select_cell, select_in_cell, InCellRule, MutationSpec, SelectorSpec};
use crate::tasks::{noisy_evaluate, NoiseSpec, Task};

/// Random stream used throughout the crate.
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Explicit averaging over a fixed number of samples; `samples = 1` is
    /// plain MAP-Elites.
    Naive { samples: u32 },
    /// Adaptive sampling; elites stay in the cell where they were first
    /// placed.
    Adaptive,
    /// Adaptive sampling where elites drift to the cell of their mean
    /// descriptor, with ranked backups per cell.
    AdaptiveDrift { depth: usize },
    DeepGrid { depth: usize },
}

impl Variant {
    pub fn depth(&self) -> usize {
        match *self {
            Variant::Naive { .. } | Variant::Adaptive => 1,
            Variant::AdaptiveDrift { depth } | Variant::DeepGrid { depth } => depth,
        }
    }

    /// Rule used both for parent selection and for metric sampling.
    pub fn in_cell_rule(&self) -> InCellRule {
        match self {
            Variant::Naive { .. } | Variant::Adaptive => InCellRule::SingleOccupant,
            Variant::AdaptiveDrift { .. } => InCellRule::BestOfCell,
            Variant::DeepGrid { .. } => InCellRule::FitnessProportional,
        }
    }

    pub fn default_mutation_rate(&self) -> f64 {
        match self {
            Variant::DeepGrid { .. } => 0.05,
            _ => 0.1,
        }
    }

    /// Evaluations charged per offspring, when fixed.
    pub fn samples_per_offspring(&self) -> Option<u64> {
        match *self {
            Variant::Naive { samples } => Some(u64::from(samples)),
            Variant::DeepGrid { .. } => Some(1),
            Variant::Adaptive | Variant::AdaptiveDrift { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Variant::Naive { samples: 0 } => Err(Error::config("naive sampling needs samples >= 1")),
            Variant::AdaptiveDrift { depth } if depth < 2 => {
                Err(Error::config("adaptive drift needs depth >= 2"))
            }
            Variant::DeepGrid { depth: 0 } => Err(Error::config("deep grid needs depth >= 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Naive { samples } => write!(f, "naive_{samples}"),
            Variant::Adaptive => write!(f, "adaptive"),
            Variant::AdaptiveDrift { depth } => write!(f, "adaptive_drift_{depth}"),
            Variant::DeepGrid { depth } => write!(f, "deep_grid_{depth}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmSpec {
    pub variant: Variant,
    /// Parents drawn per generation.
    pub batch_size: usize,
    /// Random genotypes evaluated to seed the grid.
    pub init_size: usize,
    pub selector: SelectorSpec,
    pub mutation: MutationSpec,
}

impl AlgorithmSpec {
    pub const DEFAULT_BATCH_SIZE: usize = 100;
    pub const DEFAULT_INIT_SIZE: usize = 100;

    pub fn new(variant: Variant) -> Self {
        AlgorithmSpec {
            variant,
            batch_size: Self::DEFAULT_BATCH_SIZE,
            init_size: Self::DEFAULT_INIT_SIZE,
            selector: SelectorSpec::new(variant.in_cell_rule()),
            mutation: MutationSpec::new(variant.default_mutation_rate()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        self.selector.validate()?;
        self.mutation.validate()?;
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be >= 1"));
        }
        if self.init_size == 0 {
            return Err(Error::config("init_size must be >= 1: selection needs a non-empty grid"));
        }
        Ok(())
    }

    /// Exact cost of one generation, or `None` for adaptive variants.
    pub fn generation_cost(&self) -> Option<u64> {
        self.variant
            .samples_per_offspring()
            .map(|s| s * self.batch_size as u64)
    }

    /// Evaluations needed to initialise the grid (a lower bound for adaptive
    /// variants, whose initial insertions may trigger re-sampling).
    pub fn init_cost(&self) -> u64 {
        self.variant.samples_per_offspring().unwrap_or(1) * self.init_size as u64
    }
}

/// A task plus the noise corrupting it.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub task: &'a dyn Task,
    pub noise: NoiseSpec,
}

impl<'a> Problem<'a> {
    pub fn new(task: &'a dyn Task, noise: NoiseSpec) -> Self {
        Problem { task, noise }
    }
}

/// Charges noisy evaluations against the run budget. Owns the noise stream.
#[derive(Clone, Debug)]
pub struct Ledger {
    used: u64,
    limit: u64,
    rng: StreamRng,
}

impl Ledger {
    pub fn new(noise_seed: u64, limit: u64) -> Self {
        Ledger {
            used: 0,
            limit,
            rng: StreamRng::seed_from_u64(noise_seed),
        }
    }

    /// One noisy evaluation, or `None` once the budget is spent.
    pub fn evaluate(&mut self, problem: &Problem<'_>, genotype: &Genotype) -> Option<Evaluation> {
        if self.used >= self.limit {
            return None;
        }
        self.used += 1;
        Some(noisy_evaluate(problem.task, &problem.noise, genotype, &mut self.rng))
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }
}

/// Seeds of the independent random streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamSeeds {
    pub variation: u64,
    pub selection: u64,
    pub noise: u64,
}

#[derive(Clone, Debug)]
pub struct RunState {
    grid: Grid,
    ledger: Ledger,
    generation: u64,
    drifts: u64,
    variation_rng: StreamRng,
    selection_rng: StreamRng,
}

impl RunState {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn evaluations_used(&self) -> u64 {
        self.ledger.used()
    }

    /// Completed generations, not counting initialisation.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Total elite relocations (drifting variant only).
    pub fn drifts(&self) -> u64 {
        self.drifts
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    /// Raises or lowers the evaluation cap for subsequent generations.
    pub fn set_evaluation_limit(&mut self, limit: u64) {
        self.ledger.limit = limit;
    }

    pub fn into_grid(self) -> Grid {
        self.grid
    }
}

/// What happened during one generation (or the initialisation).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenerationReport {
    /// Offspring that entered the grid, in insertion order, with the cell
    /// they were placed in. For the adaptive variants this means "became or
    /// replaced the elite".
    pub accepted: Vec<(CellIndex, Genotype)>,
    pub offspring: usize,
    pub evaluations: u64,
    pub drifts: u64,
}

/// Draws `init_size` uniform genotypes, evaluates and inserts them with the
/// variant's rules.
pub fn initialize_grid(
    problem: &Problem<'_>,
    spec: &AlgorithmSpec,
    geometry: GridGeometry,
    seeds: StreamSeeds,
    evaluation_limit: u64,
) -> Result<(RunState, GenerationReport)> {
    spec.validate()?;
    let task_spec = problem.task.spec();
    task_spec.validate()?;
    let mut state = RunState {
        grid: Grid::new(geometry, spec.variant.depth()),
        ledger: Ledger::new(seeds.noise, evaluation_limit),
        generation: 0,
        drifts: 0,
        variation_rng: StreamRng::seed_from_u64(seeds.variation),
        selection_rng: StreamRng::seed_from_u64(seeds.selection),
    };
    let genotypes: Vec<Genotype> = (0..spec.init_size)
        .map(|_| {
            let values = task_spec
                .gene_bounds
                .iter()
                .map(|b| state.variation_rng.random_range(b.lo..=b.hi))
                .collect();
            Genotype::new(values)
        })
        .collect();
    let report = evaluate_and_insert(&mut state, problem, spec, genotypes);
    if state.grid.coverage() == 0 {
        return Err(Error::config("evaluation budget too small to initialise the grid"));
    }
    Ok((state, report))
}

/// Runs one generation of whichever variant `spec` names.
pub fn run_generation(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec) -> GenerationReport {
    match spec.variant {
        Variant::Naive { .. } => naive_generation(state, problem, spec),
        Variant::Adaptive => adaptive_generation(state, problem, spec),
        Variant::AdaptiveDrift { .. } => adaptive_drift_generation(state, problem, spec),
        Variant::DeepGrid { .. } => deep_grid_generation(state, problem, spec),
    }
}

/// Select, mutate, evaluate and insert one batch.
fn generation(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec) -> GenerationReport {
    let bounds = &problem.task.spec().gene_bounds;
    let parents: Vec<&Individual> = (0..spec.batch_size)
        .map(|_| {
            let cell = select_cell(&state.grid, &mut state.selection_rng);
            let occupants = state.grid.cell(cell);
            let slot = select_in_cell(occupants, &spec.selector, &mut state.selection_rng);
            &occupants.occupants()[slot]
        })
        .collect();
    let offspring: Vec<Genotype> = parents
        .into_iter()
        .map(|p| mutate(&p.genotype, &spec.mutation, bounds, &mut state.variation_rng))
        .collect();
    let report = evaluate_and_insert(state, problem, spec, offspring);
    state.generation += 1;
    report
}

fn evaluate_and_insert(
    state: &mut RunState,
    problem: &Problem<'_>,
    spec: &AlgorithmSpec,
    genotypes: Vec<Genotype>,
) -> GenerationReport {
    let start = state.ledger.used();
    let samples = spec.variant.samples_per_offspring().unwrap_or(1);
    let mut evaluated = Vec::with_capacity(genotypes.len());
    for genotype in genotypes {
        if let Some(indiv) = sample(&mut state.ledger, problem, genotype, samples) {
            evaluated.push(indiv);
        }
    }

    let mut report = GenerationReport {
        offspring: evaluated.len(),
        ..Default::default()
    };
    for indiv in evaluated {
        match spec.variant {
            Variant::Naive { .. } => naive::insert(state, indiv, &mut report),
            Variant::DeepGrid { .. } => deep_grid::insert(state, indiv, &mut report),
            Variant::Adaptive => adaptive::insert(state, problem, indiv, false, &mut report),
            Variant::AdaptiveDrift { .. } => adaptive::insert(state, problem, indiv, true, &mut report),
        }
    }
    report.evaluations = state.ledger.used() - start;
    state.drifts += report.drifts;
    report
}

/// Evaluates `genotype` `samples` times and averages, or `None` if the
/// budget cannot cover all samples.
fn sample(ledger: &mut Ledger, problem: &Problem<'_>, genotype: Genotype, samples: u64) -> Option<Individual> {
    if ledger.remaining() < samples {
        return None;
    }
    let first = ledger.evaluate(problem, &genotype)?;
    let mut indiv = Individual::new(genotype, first);
    for _ in 1..samples {
        let e = ledger.evaluate(problem, &indiv.genotype)?;
        indiv.add_sample(e);
    }
    Some(indiv)
}
