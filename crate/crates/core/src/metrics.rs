//! Corrected-container metrics.
//!
//! Each non-empty cell is turned into a cell entity by drawing `n_repeat`
//! occupants with the variant's in-cell selector and re-evaluating each
//! draw once. The entity is then moved to the cell of its mean descriptor;
//! when several entities land in the same cell the fittest one stays.
//! Metric evaluations run on their own random stream and are never charged
//! to the optimisation budget.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::Problem;
use crate::grid::{CellIndex, Descriptor, Grid, BD_DIM};
use crate::selection::{select_in_cell, SelectorSpec};
use crate::tasks::{noisy_evaluate, Bounds};

pub const DEFAULT_N_REPEAT: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellEntity {
    pub source_cell: CellIndex,
    pub corrected_fitness: f64,
    pub corrected_bd: Descriptor,
}

/// When a correctly placed entity loses its own cell to a fitter entity
/// drifting in, should it still count as a correct descriptor?
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectCounting {
    /// Count before collisions are resolved.
    #[default]
    BeforeCollisions,
    /// Count only entities that survive relocation in their own cell.
    AfterCollisions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectedContainer {
    /// Every sampled entity, in source-cell order.
    pub entities: Vec<CellEntity>,
    /// Relocated entities keyed by the cell their corrected descriptor
    /// locates to.
    pub cells: BTreeMap<CellIndex, CellEntity>,
    /// Where each of `entities` was relocated to, index-aligned.
    pub targets: Vec<CellIndex>,
    /// Uncharged evaluations spent building the container.
    pub evaluations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsRecord {
    pub evaluations_used: u64,
    pub correct_bd_count: usize,
    pub corrected_collection_size: usize,
    pub total_corrected_quality: f64,
}

/// Estimates one cell's ground-truth fitness and descriptor.
///
/// # Panics
/// If the cell is empty or `n_repeat` is zero.
pub fn sample_cell_entity<R: Rng + ?Sized>(
    grid: &Grid,
    cell: CellIndex,
    selector: &SelectorSpec,
    problem: &Problem<'_>,
    n_repeat: usize,
    rng: &mut R,
) -> CellEntity {
    assert!(n_repeat >= 1, "n_repeat must be >= 1");
    let occupants = grid.cell(cell);
    let mut fitness = 0.0;
    let mut bd = [0.0; BD_DIM];
    for _ in 0..n_repeat {
        let slot = select_in_cell(occupants, selector, rng);
        let e = noisy_evaluate(problem.task, &problem.noise, &occupants.occupants()[slot].genotype, rng);
        fitness += e.fitness;
        for (acc, x) in bd.iter_mut().zip(e.descriptor) {
            *acc += x;
        }
    }
    let n = n_repeat as f64;
    CellEntity {
        source_cell: cell,
        corrected_fitness: fitness / n,
        corrected_bd: bd.map(|x| x / n),
    }
}

pub fn build_corrected_container<R: Rng + ?Sized>(
    grid: &Grid,
    selector: &SelectorSpec,
    problem: &Problem<'_>,
    n_repeat: usize,
    rng: &mut R,
) -> CorrectedContainer {
    let entities: Vec<CellEntity> = grid
        .occupied()
        .map(|(cell, _)| sample_cell_entity(grid, cell, selector, problem, n_repeat, rng))
        .collect();
    relocate(grid, entities, (n_repeat * grid.coverage()) as u64)
}

/// Moves entities to the cells of their corrected descriptors, keeping the
/// fitter one on collision (first come on exact ties).
pub fn relocate(grid: &Grid, entities: Vec<CellEntity>, evaluations: u64) -> CorrectedContainer {
    let mut cells: BTreeMap<CellIndex, CellEntity> = BTreeMap::new();
    let mut targets = Vec::with_capacity(entities.len());
    for entity in &entities {
        let target = grid.locate(&entity.corrected_bd);
        targets.push(target);
        cells
            .entry(target)
            .and_modify(|kept| {
                if entity.corrected_fitness > kept.corrected_fitness {
                    *kept = *entity;
                }
            })
            .or_insert(*entity);
    }
    CorrectedContainer {
        entities,
        cells,
        targets,
        evaluations,
    }
}

pub fn compute_metrics(
    container: &CorrectedContainer,
    fitness_bounds: Bounds,
    counting: CorrectCounting,
    evaluations_used: u64,
) -> MetricsRecord {
    let correct_bd_count = match counting {
        CorrectCounting::BeforeCollisions => container
            .entities
            .iter()
            .zip(&container.targets)
            .filter(|(e, t)| e.source_cell == **t)
            .count(),
        CorrectCounting::AfterCollisions => container
            .cells
            .iter()
            .filter(|(cell, e)| e.source_cell == **cell)
            .count(),
    };
    let total_corrected_quality = container
        .cells
        .values()
        .map(|e| normalized_quality(e.corrected_fitness, fitness_bounds))
        .sum();
    MetricsRecord {
        evaluations_used,
        correct_bd_count,
        corrected_collection_size: container.cells.len(),
        total_corrected_quality,
    }
}

/// `(f - f_min) / (f_max - f_min)`, clamped to `[0, 1]`.
pub fn normalized_quality(fitness: f64, bounds: Bounds) -> f64 {
    ((fitness - bounds.lo) / bounds.width()).clamp(0.0, 1.0)
}

/// Samples, relocates and scores a grid in one call.
pub fn measure<R: Rng + ?Sized>(
    grid: &Grid,
    selector: &SelectorSpec,
    problem: &Problem<'_>,
    n_repeat: usize,
    counting: CorrectCounting,
    evaluations_used: u64,
    rng: &mut R,
) -> (MetricsRecord, CorrectedContainer) {
    let container = build_corrected_container(grid, selector, problem, n_repeat, rng);
    let record = compute_metrics(&container, problem.task.spec().fitness_bounds, counting, evaluations_used);
    (record, container)
}
