//! Parent selection (grid level and in-cell) and Gaussian mutation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellIndex, DeepCell, Genotype, Grid};
use crate::tasks::Bounds;

/// How an individual is picked once a cell has been chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InCellRule {
    SingleOccupant,
    BestOfCell,
    FitnessProportional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectorSpec {
    pub in_cell_rule: InCellRule,
    /// Weight floor as a fraction of the in-cell fitness range.
    pub epsilon_fraction: f64,
}

impl SelectorSpec {
    pub const DEFAULT_EPSILON_FRACTION: f64 = 0.1;

    pub fn new(in_cell_rule: InCellRule) -> Self {
        SelectorSpec {
            in_cell_rule,
            epsilon_fraction: Self::DEFAULT_EPSILON_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_fraction > 0.0 && self.epsilon_fraction.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "epsilon_fraction must be positive, got {}",
                self.epsilon_fraction
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationSpec {
    pub per_gene_rate: f64,
    /// Step standard deviation as a fraction of each gene's range.
    pub sigma_fraction: f64,
}

impl MutationSpec {
    pub const DEFAULT_SIGMA_FRACTION: f64 = 0.1;

    pub fn new(per_gene_rate: f64) -> Self {
        MutationSpec {
            per_gene_rate,
            sigma_fraction: Self::DEFAULT_SIGMA_FRACTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.per_gene_rate > 0.0 && self.per_gene_rate <= 1.0) {
            return Err(Error::config(format!(
                "per_gene_rate must lie in (0, 1], got {}",
                self.per_gene_rate
            )));
        }
        if !(self.sigma_fraction > 0.0 && self.sigma_fraction.is_finite()) {
            return Err(Error::config(format!(
                "sigma_fraction must be positive, got {}",
                self.sigma_fraction
            )));
        }
        Ok(())
    }
}

/// Uniform choice among non-empty cells.
///
/// # Panics
/// If the grid is empty.
pub fn select_cell<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> CellIndex {
    let cells = grid.non_empty_cells();
    assert!(!cells.is_empty(), "cannot select from an empty grid");
    cells[rng.random_range(0..cells.len())]
}

/// Roulette weights `f_i - f_min + eps` with `eps = epsilon_fraction * range`.
/// Returns `None` when every occupant has the same fitness (uniform case).
pub fn proportional_weights(
    fitnesses: impl Iterator<Item = f64> + Clone,
    epsilon_fraction: f64,
) -> Option<impl Iterator<Item = f64>> {
    let (min, max) = fitnesses
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)));
    let range = max - min;
    if !(range > 0.0) {
        return None;
    }
    let eps = epsilon_fraction * range;
    Some(fitnesses.map(move |f| f - min + eps))
}

/// Picks a slot of `cell` according to `spec`.
///
/// # Panics
/// If the cell is empty.
pub fn select_in_cell<R: Rng + ?Sized>(cell: &DeepCell, spec: &SelectorSpec, rng: &mut R) -> usize {
    let occupants = cell.occupants();
    assert!(!occupants.is_empty(), "cannot select from an empty cell");
    match spec.in_cell_rule {
        InCellRule::SingleOccupant => 0,
        InCellRule::BestOfCell => best_slot(cell),
        InCellRule::FitnessProportional => {
            if occupants.len() == 1 {
                return 0;
            }
            let fitnesses = occupants.iter().map(|i| i.fitness());
            match proportional_weights(fitnesses, spec.epsilon_fraction) {
                None => rng.random_range(0..occupants.len()),
                Some(weights) => {
                    let weights: Vec<f64> = weights.collect();
                    let total: f64 = weights.iter().sum();
                    let mut target = rng.random::<f64>() * total;
                    for (slot, w) in weights.iter().enumerate() {
                        if target < *w {
                            return slot;
                        }
                        target -= w;
                    }
                    // Rounding left a sliver past the last weight.
                    weights.len() - 1
                }
            }
        }
    }
}

/// Highest-fitness slot, lowest slot on ties.
pub fn best_slot(cell: &DeepCell) -> usize {
    let mut best = 0;
    for (slot, ind) in cell.occupants().iter().enumerate().skip(1) {
        if ind.fitness() > cell.occupants()[best].fitness() {
            best = slot;
        }
    }
    best
}

/// Per-gene Gaussian mutation, clamped to the gene bounds. No crossover.
pub fn mutate<R: Rng + ?Sized>(
    parent: &Genotype,
    spec: &MutationSpec,
    bounds: &[Bounds],
    rng: &mut R,
) -> Genotype {
    let mut child = parent.clone();
    for (gene, b) in child.values_mut().iter_mut().zip(bounds) {
        if rng.random::<f64>() < spec.per_gene_rate {
            let z: f64 = StandardNormal.sample(rng);
            *gene = b.clamp(*gene + z * spec.sigma_fraction * b.width());
        }
    }
    child
}
