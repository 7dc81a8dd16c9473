use super::{generation, AlgorithmSpec, GenerationReport, Ledger, Problem, RunState, Variant};
use crate::grid::{CellIndex, Grid, Individual};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChallengeOutcome {
    Replace,
    Reject,
}

/// Sequential challenge of an elite by a newcomer.
///
/// The challenger is re-sampled one evaluation at a time while it is not
/// behind and has fewer samples than the elite. It wins only if it is
/// strictly ahead once the counts match. The first time it falls behind it
/// loses and the elite is re-sampled once. Running out of budget counts as a
/// loss without touching the elite.
pub fn adaptive_challenge(
    elite: &mut Individual,
    challenger: &mut Individual,
    problem: &Problem<'_>,
    ledger: &mut Ledger,
) -> ChallengeOutcome {
    loop {
        if challenger.fitness() < elite.fitness() {
            if let Some(e) = ledger.evaluate(problem, &elite.genotype) {
                elite.add_sample(e);
            }
            return ChallengeOutcome::Reject;
        }
        if challenger.sample_count >= elite.sample_count {
            return if challenger.fitness() > elite.fitness() {
                ChallengeOutcome::Replace
            } else {
                ChallengeOutcome::Reject
            };
        }
        match ledger.evaluate(problem, &challenger.genotype) {
            Some(e) => challenger.add_sample(e),
            None => return ChallengeOutcome::Reject,
        }
    }
}

/// Adaptive sampling without drift: elites stay pinned to the cell where
/// they were first placed, whatever their refined descriptor says.
///
/// # Panics
/// If `spec` names another variant.
pub fn adaptive_generation(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec) -> GenerationReport {
    assert!(matches!(spec.variant, Variant::Adaptive), "not an adaptive spec");
    generation(state, problem, spec)
}

/// Adaptive sampling with drifting elites and ranked per-cell backups.
///
/// # Panics
/// If `spec` names another variant.
pub fn adaptive_drift_generation(
    state: &mut RunState,
    problem: &Problem<'_>,
    spec: &AlgorithmSpec,
) -> GenerationReport {
    assert!(matches!(spec.variant, Variant::AdaptiveDrift { .. }), "not an adaptive drift spec");
    generation(state, problem, spec)
}

pub(super) fn insert(
    state: &mut RunState,
    problem: &Problem<'_>,
    indiv: Individual,
    drift: bool,
    report: &mut GenerationReport,
) {
    let grid = &mut state.grid;
    let ledger = &mut state.ledger;
    let cell = grid.locate(indiv.descriptor());
    let mut touched = vec![cell];
    let genotype = indiv.genotype.clone();
    if place(grid, ledger, problem, cell, indiv, drift) {
        report.accepted.push((cell, genotype));
    }
    if drift {
        report.drifts += settle(grid, ledger, problem, &mut touched);
    }
}

/// Inserts into `cell`, challenging its elite if there is one. Returns true
/// if `indiv` became the elite. With `ranked`, cells keep up to `depth`
/// individuals sorted by mean fitness and losers may stay as backups.
fn place(
    grid: &mut Grid,
    ledger: &mut Ledger,
    problem: &Problem<'_>,
    cell: CellIndex,
    mut indiv: Individual,
    ranked: bool,
) -> bool {
    let depth = grid.depth();
    grid.with_cell_mut(cell, |occupants| {
        let Some(elite) = occupants.first_mut() else {
            occupants.push(indiv);
            return true;
        };
        let outcome = adaptive_challenge(elite, &mut indiv, problem, ledger);
        let won = outcome == ChallengeOutcome::Replace;
        if won && !ranked {
            occupants[0] = indiv;
        } else if won {
            occupants.insert(0, indiv);
        } else if ranked {
            if occupants.len() < depth {
                occupants.push(indiv);
            } else if occupants.last().is_some_and(|worst| indiv.fitness() > worst.fitness()) {
                *occupants.last_mut().unwrap() = indiv;
            }
        }
        if ranked {
            occupants.sort_by(|a, b| b.fitness().total_cmp(&a.fitness()));
            occupants.truncate(depth);
        }
        won
    })
}

/// Moves every occupant of the touched cells whose mean descriptor now
/// locates elsewhere, re-inserting it at its destination. Repeats until no
/// touched cell holds a misplaced individual. Returns the number of moves.
fn settle(grid: &mut Grid, ledger: &mut Ledger, problem: &Problem<'_>, touched: &mut Vec<CellIndex>) -> u64 {
    let mut moves = 0;
    while let Some(cell) = touched.pop() {
        let misplaced: Vec<usize> = grid
            .cell(cell)
            .occupants()
            .iter()
            .enumerate()
            .filter(|(_, ind)| grid.locate(ind.descriptor()) != cell)
            .map(|(slot, _)| slot)
            .collect();
        if misplaced.is_empty() {
            continue;
        }
        let drifters: Vec<Individual> = grid.with_cell_mut(cell, |occupants| {
            misplaced.iter().rev().map(|&slot| occupants.remove(slot)).collect()
        });
        for drifter in drifters.into_iter().rev() {
            moves += 1;
            let dest = grid.locate(drifter.descriptor());
            place(grid, ledger, problem, dest, drifter, true);
            touched.push(dest);
        }
    }
    moves
}
