//! Deep-Grid MAP-Elites and the sampling-based MAP-Elites variants it is
//! compared against, for quality-diversity optimisation under noisy fitness
//! and noisy behaviour descriptors.
//!
//! * [`grid`]: genotypes, individuals and the depth-capable grid.
//! * [`geometry`]: Cartesian and polar descriptor-space discretisers.
//! * [`tasks`]: Rastrigin and planar-arm benchmarks plus Gaussian noise.
//! * [`selection`]: cell and in-cell selectors, Gaussian mutation.
//! * [`algorithms`]: naive, adaptive, drifting-adaptive and Deep-Grid.
//! * [`metrics`]: corrected-container metrics.
//! * [`harness`]: configuration, seeded replications and CSV output.

pub mod algorithms;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod selection;
pub mod tasks;

pub use algorithms::{
    initialize_grid, run_generation, AlgorithmSpec, GenerationReport, Ledger, Problem, RunState, StreamRng,
    StreamSeeds, Variant,
};
pub use error::{Error, Result};
pub use geometry::{CartesianGeometry, GridGeometry, PolarGeometry};
pub use grid::{CellIndex, DeepCell, Descriptor, Evaluation, Genotype, Grid, Individual, BD_DIM};
pub use metrics::{CellEntity, CorrectCounting, CorrectedContainer, MetricsRecord};
pub use selection::{InCellRule, MutationSpec, SelectorSpec};
pub use tasks::{noisy_evaluate, Bounds, NoiseSpec, PlanarArm, Rastrigin, Task, TaskSpec};
