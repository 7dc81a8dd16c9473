//! Shared fixtures for the criterion benches.

use deepgrid_core::{initialize_grid, run_generation, AlgorithmSpec, Problem, RunState, StreamSeeds, Variant};

pub const SEEDS: StreamSeeds = StreamSeeds {
    variation: 1,
    selection: 2,
    noise: 3,
};

/// A state warmed up for `generations` generations.
pub fn warmed_state(problem: &Problem<'_>, spec: &AlgorithmSpec, generations: usize) -> RunState {
    let (mut state, _) =
        initialize_grid(problem, spec, problem.task.default_geometry(), SEEDS, u64::MAX).expect("valid spec");
    for _ in 0..generations {
        run_generation(&mut state, problem, spec);
    }
    state
}

pub fn variants() -> [Variant; 4] {
    [
        Variant::DeepGrid { depth: 50 },
        Variant::Naive { samples: 1 },
        Variant::Adaptive,
        Variant::AdaptiveDrift { depth: 10 },
    ]
}
