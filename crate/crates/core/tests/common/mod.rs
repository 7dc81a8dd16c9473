//! Helpers and property checks shared by the integration tests and the
//! acceptance binary. Each `check_*` returns a short detail string, as
//! `Err` when the property fails.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use deepgrid_core::harness::stream_seeds;
use deepgrid_core::metrics::measure;
use deepgrid_core::selection::{mutate, select_cell, select_in_cell};
use deepgrid_core::{
    initialize_grid, noisy_evaluate, run_generation, AlgorithmSpec, CartesianGeometry, CellIndex, CorrectCounting,
    Evaluation, Genotype, Grid, GridGeometry, InCellRule, Individual, NoiseSpec, PlanarArm, Problem, Rastrigin,
    RunState, SelectorSpec, StreamRng, Task, TaskSpec, Variant,
};
use rand::{Rng, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub type Check = Result<String, String>;

/// Wraps a task and counts every call to `evaluate`.
pub struct CountingTask<T> {
    pub inner: T,
    calls: AtomicU64,
}

impl<T: Task> CountingTask<T> {
    pub fn new(inner: T) -> Self {
        CountingTask {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<T: Task> Task for CountingTask<T> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn spec(&self) -> &TaskSpec {
        self.inner.spec()
    }
    fn evaluate(&self, genotype: &Genotype) -> Evaluation {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(genotype)
    }
    fn default_geometry(&self) -> GridGeometry {
        self.inner.default_geometry()
    }
}

/// Pearson chi-square goodness-of-fit p-value.
pub fn chi_square_p(counts: &[u64], probabilities: &[f64]) -> f64 {
    assert_eq!(counts.len(), probabilities.len());
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probabilities)
        .map(|(&c, &p)| {
            let expected = p * n as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

pub fn unit_grid(bins: usize, depth: usize) -> Grid {
    let geom = CartesianGeometry::new([0.0, 0.0], [1.0, 1.0], [bins, bins]).unwrap();
    Grid::new(GridGeometry::Cartesian(geom), depth)
}

/// An individual whose only gene doubles as an identity tag.
pub fn tagged(id: f64, fitness: f64) -> Individual {
    Individual::new(Genotype::new(vec![id]), Evaluation::new(fitness, [0.0, 0.0]))
}

pub fn start(problem: &Problem<'_>, variant: Variant, seed: u64, limit: u64) -> RunState {
    let spec = AlgorithmSpec::new(variant);
    let geometry = problem.task.default_geometry();
    initialize_grid(problem, &spec, geometry, stream_seeds(seed, 0), limit).unwrap().0
}

/// Runs generations with the harness budget rule: fixed-cost variants stop
/// before a generation that would overshoot, adaptive ones stop when the
/// ledger is spent.
pub fn run_to_budget(state: &mut RunState, problem: &Problem<'_>, spec: &AlgorithmSpec, budget: u64) {
    loop {
        let used = state.evaluations_used();
        let affordable = match spec.generation_cost() {
            Some(cost) => used + cost <= budget,
            None => used < budget,
        };
        if !affordable {
            return;
        }
        run_generation(state, problem, spec);
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// Criterion 1

/// Plain depth-1 MAP-Elites written against the same random streams, used as
/// an independent oracle for the zero-noise reductions.
struct OracleMapElites {
    elites: Vec<Option<(Genotype, f64)>>,
    filled: Vec<usize>,
    variation: StreamRng,
    selection: StreamRng,
}

impl OracleMapElites {
    fn new(task: &dyn Task, seed: u64, init: usize) -> (Self, Vec<(CellIndex, Genotype)>) {
        let seeds = stream_seeds(seed, 0);
        let geometry = task.default_geometry();
        let mut me = OracleMapElites {
            elites: vec![None; geometry.cell_count()],
            filled: Vec::new(),
            variation: StreamRng::seed_from_u64(seeds.variation),
            selection: StreamRng::seed_from_u64(seeds.selection),
        };
        let bounds = task.spec().gene_bounds.clone();
        let batch: Vec<Genotype> = (0..init)
            .map(|_| Genotype::new(bounds.iter().map(|b| me.variation.random_range(b.lo..=b.hi)).collect()))
            .collect();
        let accepted = me.insert(task, &geometry, batch);
        (me, accepted)
    }

    fn insert(&mut self, task: &dyn Task, geometry: &GridGeometry, batch: Vec<Genotype>) -> Vec<(CellIndex, Genotype)> {
        let evaluated: Vec<_> = batch.into_iter().map(|g| (task.evaluate(&g), g)).collect();
        let mut accepted = Vec::new();
        for (e, g) in evaluated {
            let cell = geometry.locate(&e.descriptor);
            let slot = &mut self.elites[cell.0];
            let better = match slot {
                None => {
                    self.filled.push(cell.0);
                    true
                }
                Some((_, f)) => e.fitness > *f,
            };
            if better {
                *slot = Some((g.clone(), e.fitness));
                accepted.push((cell, g));
            }
        }
        accepted
    }

    fn generation(&mut self, task: &dyn Task, spec: &AlgorithmSpec) -> Vec<(CellIndex, Genotype)> {
        let geometry = task.default_geometry();
        let bounds = task.spec().gene_bounds.clone();
        let parents: Vec<Genotype> = (0..spec.batch_size)
            .map(|_| {
                let cell = self.filled[self.selection.random_range(0..self.filled.len())];
                self.elites[cell].as_ref().unwrap().0.clone()
            })
            .collect();
        let batch = parents
            .iter()
            .map(|p| mutate(p, &spec.mutation, &bounds, &mut self.variation))
            .collect();
        self.insert(task, &geometry, batch)
    }
}

pub fn check_zero_noise_reduction(generations: u64) -> Check {
    let task = Rastrigin::new();
    let problem = Problem::new(&task, NoiseSpec::NONE);
    let seed = 11;
    let variants = [Variant::Naive { samples: 1 }, Variant::Naive { samples: 50 }, Variant::Adaptive];
    let (mut oracle, oracle_init) = OracleMapElites::new(&task, seed, AlgorithmSpec::DEFAULT_INIT_SIZE);
    let mut runs: Vec<(AlgorithmSpec, RunState)> = Vec::new();
    for v in variants {
        let spec = AlgorithmSpec::new(v);
        let (state, report) =
            initialize_grid(&problem, &spec, task.default_geometry(), stream_seeds(seed, 0), u64::MAX).unwrap();
        if report.accepted != oracle_init {
            return Err(format!("{v}: initial accepted set differs from plain MAP-Elites"));
        }
        runs.push((spec, state));
    }
    let mut accepted_total = oracle_init.len();
    let oracle_spec = AlgorithmSpec::new(Variant::Naive { samples: 1 });
    for g in 0..generations {
        let expected = oracle.generation(&task, &oracle_spec);
        accepted_total += expected.len();
        for (spec, state) in &mut runs {
            let report = run_generation(state, &problem, spec);
            if report.accepted != expected {
                return Err(format!("{}: generation {g} accepted set differs", spec.variant));
            }
        }
    }

    let drift_spec = AlgorithmSpec::new(Variant::AdaptiveDrift { depth: 10 });
    let mut drift = start(&problem, drift_spec.variant, seed, u64::MAX);
    for _ in 0..generations {
        run_generation(&mut drift, &problem, &drift_spec);
    }
    if drift.drifts() != 0 {
        return Err(format!("adaptive_drift_10 drifted {} times without noise", drift.drifts()));
    }
    Ok(format!(
        "{generations} generations, {accepted_total} accepted offspring identical across naive_1, naive_50, adaptive \
         and the MAP-Elites oracle; adaptive_drift_10 drifts = 0"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 2

pub fn check_budget_audit() -> Check {
    let variants = [
        Variant::Naive { samples: 1 },
        Variant::Naive { samples: 50 },
        Variant::Adaptive,
        Variant::AdaptiveDrift { depth: 10 },
        Variant::DeepGrid { depth: 50 },
    ];
    // Not a multiple of any generation cost, so every stopping rule is hit.
    let budget = 23_417;
    let mut lines = Vec::new();
    for v in variants {
        let task = CountingTask::new(Rastrigin::new());
        let problem = Problem::new(&task, NoiseSpec::default());
        let spec = AlgorithmSpec::new(v);
        let mut state = start(&problem, v, 5, budget);
        run_to_budget(&mut state, &problem, &spec, budget);
        let used = state.evaluations_used();
        if task.calls() != used {
            return Err(format!("{v}: {} task calls but {used} charged", task.calls()));
        }
        if used > budget {
            return Err(format!("{v}: charged {used} > budget {budget}"));
        }
        if let Some(cost) = spec.generation_cost() {
            if used + cost <= budget {
                return Err(format!("{v}: stopped at {used} with another generation affordable"));
            }
        } else if used != budget {
            return Err(format!("{v}: adaptive run stopped at {used} before spending {budget}"));
        }

        let before = task.calls();
        let mut rng = StreamRng::seed_from_u64(99);
        let (record, container) =
            measure(state.grid(), &spec.selector, &problem, 50, CorrectCounting::default(), used, &mut rng);
        let metric_calls = task.calls() - before;
        if metric_calls != container.evaluations || metric_calls != 50 * state.grid().coverage() as u64 {
            return Err(format!("{v}: metric sampling made {metric_calls} calls, reported {}", container.evaluations));
        }
        if state.evaluations_used() != used || record.evaluations_used != used {
            return Err(format!("{v}: metric sampling changed the charged count"));
        }
        lines.push(format!("{v}={used}"));
    }
    Ok(format!("charged == counted, metrics charge 0 ({})", lines.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 3

pub const DRAWS: u64 = 100_000;

pub fn check_select_cell_uniform() -> Check {
    let mut rng = StreamRng::seed_from_u64(3);
    let mut two = unit_grid(10, 1);
    two.push(CellIndex(4), tagged(0.0, 0.0));
    two.push(CellIndex(71), tagged(1.0, 0.0));
    let hits = (0..DRAWS).filter(|_| select_cell(&two, &mut rng) == CellIndex(4)).count();
    let freq = hits as f64 / DRAWS as f64;
    if !close(freq, 0.5, 0.01) {
        return Err(format!("two cells: frequency {freq:.4}, expected 0.5 +- 0.01"));
    }

    let mut grid = unit_grid(10, 3);
    let cells = [2, 17, 40, 41, 88, 99];
    for (i, &c) in cells.iter().enumerate() {
        // Uneven occupancy must not bias the cell draw.
        for k in 0..=(i % 3) {
            grid.push(CellIndex(c), tagged(k as f64, i as f64));
        }
    }
    let mut counts = vec![0u64; cells.len()];
    for _ in 0..DRAWS {
        let c = select_cell(&grid, &mut rng);
        counts[cells.iter().position(|&x| x == c.0).unwrap()] += 1;
    }
    let p = chi_square_p(&counts, &vec![1.0 / cells.len() as f64; cells.len()]);
    if p <= 0.01 {
        return Err(format!("six cells: chi-square p = {p:.4}"));
    }
    Ok(format!("two-cell frequency {freq:.4}; six-cell chi-square p = {p:.3}"))
}

/// Draw probabilities under the epsilon-shifted roulette, computed directly
/// from the rule rather than through the library.
pub fn proportional_law(fitnesses: &[f64], epsilon_fraction: f64) -> Vec<f64> {
    let lo = fitnesses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = fitnesses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return vec![1.0 / fitnesses.len() as f64; fitnesses.len()];
    }
    let eps = epsilon_fraction * (hi - lo);
    let w: Vec<f64> = fitnesses.iter().map(|f| f - lo + eps).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn in_cell_counts(fitnesses: &[f64], rng: &mut StreamRng) -> Vec<u64> {
    let mut grid = unit_grid(1, fitnesses.len());
    for (i, &f) in fitnesses.iter().enumerate() {
        grid.push(CellIndex(0), tagged(i as f64, f));
    }
    let spec = SelectorSpec::new(InCellRule::FitnessProportional);
    let mut counts = vec![0u64; fitnesses.len()];
    for _ in 0..DRAWS {
        counts[select_in_cell(grid.cell(CellIndex(0)), &spec, rng)] += 1;
    }
    counts
}

pub fn check_in_cell_law() -> Check {
    let mut rng = StreamRng::seed_from_u64(4);
    let counts = in_cell_counts(&[-1.0, -3.0], &mut rng);
    let freq = counts[0] as f64 / DRAWS as f64;
    if !close(freq, 11.0 / 12.0, 0.01) {
        return Err(format!("(-1, -3): frequency {freq:.4}, expected 11/12 +- 0.01"));
    }
    let mut worst_p = chi_square_p(&counts, &[11.0 / 12.0, 1.0 / 12.0]);
    for fitnesses in [vec![-1.0, -2.0, -4.0, -8.0, 0.5], vec![2.0; 4], vec![-0.3, 7.0, 7.0, 1.5, -9.0, 0.0]] {
        let counts = in_cell_counts(&fitnesses, &mut rng);
        let p = chi_square_p(&counts, &proportional_law(&fitnesses, 0.1));
        worst_p = worst_p.min(p);
    }
    if worst_p <= 0.01 {
        return Err(format!("proportional law rejected, min chi-square p = {worst_p:.4}"));
    }
    Ok(format!("(-1, -3) frequency {freq:.4}; min chi-square p over 4 cells = {worst_p:.3}"))
}

// ---------------------------------------------------------------------------
// Criterion 4

pub fn check_capacity_invariants(ops: usize, seed: u64) -> Check {
    let depth = 4;
    let mut grid = unit_grid(5, depth);
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut next_id = 0.0;
    for op in 0..ops {
        let cell = CellIndex(rng.random_range(0..grid.cell_count()));
        let before = grid.cell(cell).len();
        let total_before = grid.total_individuals();
        next_id += 1.0;
        let evicted = grid.insert_replace_random(cell, tagged(next_id, rng.random()), &mut rng);
        let after = grid.cell(cell).len();
        match evicted {
            Some(_) if before < depth => return Err(format!("op {op}: eviction from a cell with room")),
            None if before == depth => return Err(format!("op {op}: full cell grew")),
            _ => {}
        }
        if after > depth || after != (before + 1).min(depth) {
            return Err(format!("op {op}: cell size {before} -> {after}"));
        }
        if grid.total_individuals() != total_before + usize::from(before < depth) {
            return Err(format!("op {op}: individual count out of step"));
        }
        if !grid.cell(cell).occupants().iter().any(|i| i.genotype.values()[0] == next_id) {
            return Err(format!("op {op}: newcomer not stored"));
        }
        let mut listed: Vec<usize> = grid.non_empty_cells().iter().map(|c| c.0).collect();
        listed.sort_unstable();
        let occupied: Vec<usize> = grid.occupied().map(|(c, _)| c.0).collect();
        if listed != occupied || grid.coverage() != occupied.len() {
            return Err(format!("op {op}: non-empty list disagrees with occupancy"));
        }
    }
    Ok(format!("{ops} random insertions, depth {depth}: capacity and bookkeeping held"))
}

pub fn check_eviction_uniformity(trials: u64) -> Check {
    let depth = 4;
    let mut grid = unit_grid(1, depth);
    let cell = CellIndex(0);
    for id in 0..depth {
        grid.push(cell, tagged(id as f64, 0.0));
    }
    // Tags currently held by each slot, mirrored outside the grid.
    let mut mirror: Vec<f64> = (0..depth).map(|i| i as f64).collect();
    let mut counts = vec![0u64; depth];
    let mut rng = StreamRng::seed_from_u64(8);
    for t in 0..trials {
        let id = (depth as u64 + t) as f64;
        let out = grid.insert_replace_random(cell, tagged(id, -(t as f64)), &mut rng).expect("cell is full");
        let slot = mirror.iter().position(|&m| m == out.genotype.values()[0]).expect("evicted a known tag");
        counts[slot] += 1;
        mirror[slot] = id;
        if grid.cell(cell).occupants()[slot].genotype.values()[0] != id {
            return Err("newcomer did not take the evicted slot".into());
        }
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    if let Some(f) = freqs.iter().find(|f| !close(**f, 0.25, 0.01)) {
        return Err(format!("slot frequency {f:.4} outside 0.25 +- 0.01"));
    }
    let p = chi_square_p(&counts, &[0.25; 4]);
    if p <= 0.01 {
        return Err(format!("eviction chi-square p = {p:.4}"));
    }
    let shown: Vec<String> = freqs.iter().map(|f| format!("{f:.4}")).collect();
    Ok(format!("eviction frequencies [{}], chi-square p = {p:.3}", shown.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 5

pub fn check_task_oracles() -> Check {
    let r = Rastrigin::new();
    let g6 = |x0: f64| Genotype::new(vec![x0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    for (x0, f, bd) in [(0.0, 0.0, [0.0, 0.0]), (0.5, -20.25, [0.5, 0.0]), (1.0, -1.0, [1.0, 0.0])] {
        let e = r.evaluate(&g6(x0));
        if !close(e.fitness, f, 1e-12) || e.descriptor != bd {
            return Err(format!("rastrigin x1 = {x0}: got {e:?}"));
        }
    }

    let arm = PlanarArm::new();
    let zero = arm.evaluate(&Genotype::new(vec![0.0; 8]));
    if zero.fitness != 0.0 || !close(zero.descriptor[0], 1.0, 1e-12) || !close(zero.descriptor[1], 0.0, 1e-12) {
        return Err(format!("arm zeros: got {zero:?}"));
    }
    let constant = arm.evaluate(&Genotype::new(vec![0.7; 8]));
    if !close(constant.fitness, 0.0, 1e-12) {
        return Err(format!("arm constant angles: fitness {}", constant.fitness));
    }
    let mut bent = vec![0.0; 8];
    bent[0] = PI / 2.0;
    let e = arm.evaluate(&Genotype::new(bent));
    let expected = -7.0 * PI * PI / 256.0;
    if !close(e.fitness, expected, 1e-12) || !close(e.descriptor[0], 0.0, 1e-12) || !close(e.descriptor[1], 1.0, 1e-12) {
        return Err(format!("arm (pi/2, 0, ...): got {e:?}, expected fitness {expected}"));
    }

    let noise = NoiseSpec::default();
    let g = Genotype::new(vec![0.3, -1.2, 2.0, 0.1, -0.7, 4.4]);
    let truth = r.evaluate(&g);
    let mut rng = StreamRng::seed_from_u64(21);
    let n = 100_000;
    let (mut sum_f, mut sum_b, mut sum_b2) = (0.0, [0.0; 2], [0.0; 2]);
    for _ in 0..n {
        let e = noisy_evaluate(&r, &noise, &g, &mut rng);
        sum_f += e.fitness;
        for k in 0..2 {
            let d = e.descriptor[k] - truth.descriptor[k];
            sum_b[k] += d;
            sum_b2[k] += d * d;
        }
    }
    let nf = n as f64;
    let mean_err = (sum_f / nf - truth.fitness).abs();
    let bound = 3.0 * 0.05 / nf.sqrt();
    if mean_err > bound {
        return Err(format!("noisy fitness mean off by {mean_err:.2e} > {bound:.2e}"));
    }
    let mut sds = [0.0; 2];
    for k in 0..2 {
        let mean = sum_b[k] / nf;
        sds[k] = ((sum_b2[k] / nf - mean * mean) * nf / (nf - 1.0)).sqrt();
        if !close(sds[k], 0.01, 0.0005) {
            return Err(format!("BD dimension {k} standard deviation {:.5}", sds[k]));
        }
    }
    Ok(format!(
        "rastrigin and arm oracles exact; noisy mean error {mean_err:.1e} (bound {bound:.1e}); BD sd {:.5}, {:.5}",
        sds[0], sds[1]
    ))
}
