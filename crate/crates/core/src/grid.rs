//! Domain types shared by every algorithm: genotypes, evaluations,
//! individuals and the depth-capable grid container.

use rand::Rng;

use crate::geometry::GridGeometry;

/// Dimension of the behaviour-descriptor space for every supported task.
pub const BD_DIM: usize = 2;

/// A point in behaviour-descriptor space.
pub type Descriptor = [f64; BD_DIM];

/// Fixed-length real vector; the unit of variation.
#[derive(Clone, Debug, PartialEq)]
pub struct Genotype(Vec<f64>);

impl Genotype {
    pub fn new(values: Vec<f64>) -> Self {
        Genotype(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for Genotype {
    fn from(values: Vec<f64>) -> Self {
        Genotype(values)
    }
}

/// Fitness (higher is better) and behaviour descriptor of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub descriptor: Descriptor,
}

impl Evaluation {
    pub fn new(fitness: f64, descriptor: Descriptor) -> Self {
        Evaluation {
            fitness,
            descriptor,
        }
    }
}

/// A stored solution. `evaluation` holds the running mean over
/// `sample_count` evaluations of `genotype`.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub evaluation: Evaluation,
    pub sample_count: u32,
}

impl Individual {
    pub fn new(genotype: Genotype, evaluation: Evaluation) -> Self {
        Individual {
            genotype,
            evaluation,
            sample_count: 1,
        }
    }

    /// Folds one more evaluation into the running means.
    pub fn add_sample(&mut self, sample: Evaluation) {
        self.sample_count += 1;
        let n = f64::from(self.sample_count);
        let mean = &mut self.evaluation;
        mean.fitness += (sample.fitness - mean.fitness) / n;
        for (m, x) in mean.descriptor.iter_mut().zip(sample.descriptor) {
            *m += (x - *m) / n;
        }
    }

    pub fn fitness(&self) -> f64 {
        self.evaluation.fitness
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.evaluation.descriptor
    }
}

/// Identity of one cell of the discretised descriptor space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(pub usize);

impl CellIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

/// Up to `capacity` individuals sharing one cell. Slot order carries no
/// meaning for Deep-Grid; the drifting adaptive variant keeps it sorted by
/// mean fitness.
#[derive(Clone, Debug)]
pub struct DeepCell {
    occupants: Vec<Individual>,
    capacity: usize,
}

impl DeepCell {
    fn new(capacity: usize) -> Self {
        DeepCell {
            occupants: Vec::new(),
            capacity,
        }
    }

    pub fn occupants(&self) -> &[Individual] {
        &self.occupants
    }

    pub fn get(&self, slot: usize) -> Option<&Individual> {
        self.occupants.get(slot)
    }

    pub fn len(&self) -> usize {
        self.occupants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupants.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.occupants.len() >= self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

const ABSENT: usize = usize::MAX;

/// Discretised descriptor space plus the per-cell populations.
///
/// A dense list of non-empty cells is kept alongside the cells so that the
/// uniform cell selector is O(1).
#[derive(Clone, Debug)]
pub struct Grid {
    geometry: GridGeometry,
    depth: usize,
    cells: Vec<DeepCell>,
    non_empty: Vec<CellIndex>,
    position: Vec<usize>,
    individuals: usize,
}

impl Grid {
    /// # Panics
    /// If `depth` is zero.
    pub fn new(geometry: GridGeometry, depth: usize) -> Self {
        assert!(depth >= 1, "grid depth must be at least 1");
        let n = geometry.cell_count();
        Grid {
            geometry,
            depth,
            cells: vec![DeepCell::new(depth); n],
            non_empty: Vec::new(),
            position: vec![ABSENT; n],
            individuals: 0,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn locate(&self, descriptor: &Descriptor) -> CellIndex {
        self.geometry.locate(descriptor)
    }

    pub fn cell(&self, cell: CellIndex) -> &DeepCell {
        &self.cells[cell.0]
    }

    /// Number of cells holding at least one individual.
    pub fn coverage(&self) -> usize {
        self.non_empty.len()
    }

    pub fn total_individuals(&self) -> usize {
        self.individuals
    }

    /// Non-empty cells, in an order determined by the insertion history.
    pub fn non_empty_cells(&self) -> &[CellIndex] {
        &self.non_empty
    }

    /// Occupied cells in ascending index order.
    pub fn occupied(&self) -> impl Iterator<Item = (CellIndex, &DeepCell)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, c)| (CellIndex(i), c))
    }

    /// Deep-Grid insertion: append while the cell has room, otherwise evict
    /// a uniformly chosen occupant. Fitness and age are never consulted.
    pub fn insert_replace_random<R: Rng + ?Sized>(
        &mut self,
        cell: CellIndex,
        indiv: Individual,
        rng: &mut R,
    ) -> Option<Individual> {
        let depth = self.depth;
        self.with_cell_mut(cell, |occupants| {
            if occupants.len() < depth {
                occupants.push(indiv);
                None
            } else {
                let slot = rng.random_range(0..occupants.len());
                Some(std::mem::replace(&mut occupants[slot], indiv))
            }
        })
    }

    /// MAP-Elites insertion: fill an empty cell or strictly beat the
    /// incumbent. Ties keep the incumbent.
    ///
    /// # Panics
    /// On a grid with depth greater than one.
    pub fn insert_elitist(&mut self, cell: CellIndex, indiv: Individual) -> bool {
        assert_eq!(self.depth, 1, "elitist insertion requires a depth-1 grid");
        self.with_cell_mut(cell, |occupants| match occupants.first_mut() {
            None => {
                occupants.push(indiv);
                true
            }
            Some(incumbent) if indiv.fitness() > incumbent.fitness() => {
                *incumbent = indiv;
                true
            }
            Some(_) => false,
        })
    }

    /// Appends without any replacement rule. Used when reloading snapshots.
    ///
    /// # Panics
    /// If the cell is already full.
    pub fn push(&mut self, cell: CellIndex, indiv: Individual) {
        let depth = self.depth;
        self.with_cell_mut(cell, |occupants| {
            assert!(occupants.len() < depth, "cell {} is full", cell.0);
            occupants.push(indiv);
        })
    }

    /// Mutable access to one cell's occupants. Occupancy bookkeeping is
    /// refreshed afterwards; the closure must not grow the cell past depth.
    pub(crate) fn with_cell_mut<T>(
        &mut self,
        cell: CellIndex,
        f: impl FnOnce(&mut Vec<Individual>) -> T,
    ) -> T {
        let occupants = &mut self.cells[cell.0].occupants;
        let before = occupants.len();
        let out = f(occupants);
        let after = occupants.len();
        debug_assert!(after <= self.depth);
        self.individuals = self.individuals + after - before;
        match (before == 0, after == 0) {
            (true, false) => {
                self.position[cell.0] = self.non_empty.len();
                self.non_empty.push(cell);
            }
            (false, true) => {
                let pos = self.position[cell.0];
                self.non_empty.swap_remove(pos);
                if let Some(moved) = self.non_empty.get(pos) {
                    self.position[moved.0] = pos;
                }
                self.position[cell.0] = ABSENT;
            }
            _ => {}
        }
        out
    }
}
