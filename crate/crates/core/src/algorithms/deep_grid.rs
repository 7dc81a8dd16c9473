use super::{generation, AlgorithmSpec, GenerationReport, Problem, RunState, Variant};
use crate::grid::Individual;

/// One Deep-Grid generation: uniform cell, fitness-proportional parent,
/// single noisy evaluation, unconditional insertion with uniform eviction.
///
/// # Panics
/// If `spec` names another variant.
pub fn deep_grid_generation(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec) -> GenerationReport {
    assert!(matches!(spec.variant, Variant::DeepGrid { .. }), "not a deep grid spec");
    generation(state, problem, spec)
}

pub(super) fn insert(state: &mut RunState, indiv: Individual, report: &mut GenerationReport) {
    let cell = state.grid.locate(indiv.descriptor());
    let genotype = indiv.genotype.clone();
    state.grid.insert_replace_random(cell, indiv, &mut state.selection_rng);
    report.accepted.push((cell, genotype));
}
