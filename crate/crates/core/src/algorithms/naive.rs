use super::{generation, AlgorithmSpec, GenerationReport, Problem, RunState, Variant};
use crate::grid::Individual;

/// One explicit-averaging generation. Offspring arrive already averaged
/// over `samples` evaluations and are placed by their mean descriptor.
///
/// # Panics
/// If `spec` names another variant.
pub fn naive_generation(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec) -> GenerationReport {
    assert!(matches!(spec.variant, Variant::Naive { .. }), "not a naive spec");
    generation(state, problem, spec)
}

pub(super) fn insert(state: &mut RunState, indiv: Individual, report: &mut GenerationReport) {
    let cell = state.grid.locate(indiv.descriptor());
    let genotype = indiv.genotype.clone();
    if state.grid.insert_elitist(cell, indiv) {
        report.accepted.push((cell, genotype));
    }
}
