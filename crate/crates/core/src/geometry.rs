//! Behaviour-space discretisers. Out-of-bounds descriptors clamp to the
//! nearest boundary cell so that noisy evaluations always land somewhere.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{CellIndex, Descriptor, BD_DIM};

/// Axis-aligned grid with row-major cell numbering (first dimension most
/// significant).
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianGeometry {
    lower: [f64; BD_DIM],
    upper: [f64; BD_DIM],
    bins: [usize; BD_DIM],
}

impl CartesianGeometry {
    pub fn new(lower: [f64; BD_DIM], upper: [f64; BD_DIM], bins: [usize; BD_DIM]) -> Result<Self> {
        for d in 0..BD_DIM {
            if bins[d] == 0 {
                return Err(Error::config(format!("dimension {d}: bin count must be >= 1")));
            }
            if !(lower[d] < upper[d]) {
                return Err(Error::config(format!(
                    "dimension {d}: lower bound {} must be below upper bound {}",
                    lower[d], upper[d]
                )));
            }
        }
        Ok(CartesianGeometry { lower, upper, bins })
    }

    pub fn lower(&self) -> [f64; BD_DIM] {
        self.lower
    }

    pub fn upper(&self) -> [f64; BD_DIM] {
        self.upper
    }

    pub fn bins(&self) -> [usize; BD_DIM] {
        self.bins
    }

    pub fn cell_count(&self) -> usize {
        self.bins.iter().product()
    }

    fn bin(&self, d: usize, x: f64) -> usize {
        let t = (x - self.lower[d]) / (self.upper[d] - self.lower[d]);
        let b = (t * self.bins[d] as f64).floor();
        // NaN and negative values both land in bin 0.
        if b >= 1.0 {
            (b as usize).min(self.bins[d] - 1)
        } else {
            0
        }
    }

    pub fn locate(&self, bd: &Descriptor) -> CellIndex {
        let mut index = 0;
        for (d, &x) in bd.iter().enumerate() {
            index = index * self.bins[d] + self.bin(d, x);
        }
        CellIndex(index)
    }

    pub fn cell_center(&self, cell: CellIndex) -> Descriptor {
        let mut rest = cell.0;
        let mut center = [0.0; BD_DIM];
        for d in (0..BD_DIM).rev() {
            let b = rest % self.bins[d];
            rest /= self.bins[d];
            let width = (self.upper[d] - self.lower[d]) / self.bins[d] as f64;
            center[d] = self.lower[d] + (b as f64 + 0.5) * width;
        }
        center
    }
}

/// Concentric rings of equal radial width, each split into equal angular
/// sectors. Cells are numbered ring by ring from the centre outwards and
/// counterclockwise from angle zero within a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGeometry {
    max_radius: f64,
    sectors_per_ring: Vec<usize>,
    ring_offsets: Vec<usize>,
}

impl PolarGeometry {
    pub const DEFAULT_RINGS: usize = 71;

    pub fn new(max_radius: f64, sectors_per_ring: Vec<usize>) -> Result<Self> {
        if !(max_radius > 0.0 && max_radius.is_finite()) {
            return Err(Error::config(format!("max_radius must be positive, got {max_radius}")));
        }
        if sectors_per_ring.is_empty() {
            return Err(Error::config("polar grid needs at least one ring"));
        }
        if sectors_per_ring.contains(&0) {
            return Err(Error::config("every ring needs at least one sector"));
        }
        if sectors_per_ring.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config("sectors per ring must be non-decreasing outwards"));
        }
        let ring_offsets = sectors_per_ring
            .iter()
            .scan(0, |acc, &n| {
                let start = *acc;
                *acc += n;
                Some(start)
            })
            .collect();
        Ok(PolarGeometry {
            max_radius,
            sectors_per_ring,
            ring_offsets,
        })
    }

    /// Ring `i` gets `2 * (2i + 1)` sectors, which keeps every cell at the
    /// same area: `2 * rings^2` cells in total.
    pub fn equal_area(max_radius: f64, rings: usize) -> Result<Self> {
        Self::new(max_radius, (0..rings).map(|i| 2 * (2 * i + 1)).collect())
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn ring_count(&self) -> usize {
        self.sectors_per_ring.len()
    }

    pub fn sectors_per_ring(&self) -> &[usize] {
        &self.sectors_per_ring
    }

    pub fn cell_count(&self) -> usize {
        self.ring_offsets.last().unwrap() + self.sectors_per_ring.last().unwrap()
    }

    pub fn locate(&self, bd: &Descriptor) -> CellIndex {
        let [x, y] = *bd;
        let rings = self.ring_count();
        let r = x.hypot(y) / self.max_radius;
        let ring = ((r * rings as f64).floor().max(0.0) as usize).min(rings - 1);

        let mut angle = y.atan2(x);
        if angle < 0.0 {
            angle += TAU;
        }
        let sectors = self.sectors_per_ring[ring];
        let sector = ((angle / TAU * sectors as f64).floor().max(0.0) as usize) % sectors;
        CellIndex(self.ring_offsets[ring] + sector)
    }

    pub fn cell_center(&self, cell: CellIndex) -> Descriptor {
        let ring = match self.ring_offsets.binary_search(&cell.0) {
            Ok(r) => r,
            Err(r) => r - 1,
        };
        let sector = cell.0 - self.ring_offsets[ring];
        let width = self.max_radius / self.ring_count() as f64;
        let radius = (ring as f64 + 0.5) * width;
        let angle = (sector as f64 + 0.5) * TAU / self.sectors_per_ring[ring] as f64;
        [radius * angle.cos(), radius * angle.sin()]
    }
}

/// Maps a descriptor to exactly one cell.
#[derive(Clone, Debug, PartialEq)]
pub enum GridGeometry {
    Cartesian(CartesianGeometry),
    Polar(PolarGeometry),
}

impl GridGeometry {
    pub fn locate(&self, bd: &Descriptor) -> CellIndex {
        match self {
            GridGeometry::Cartesian(g) => g.locate(bd),
            GridGeometry::Polar(g) => g.locate(bd),
        }
    }

    pub fn cell_count(&self) -> usize {
        match self {
            GridGeometry::Cartesian(g) => g.cell_count(),
            GridGeometry::Polar(g) => g.cell_count(),
        }
    }

    pub fn cell_center(&self, cell: CellIndex) -> Descriptor {
        match self {
            GridGeometry::Cartesian(g) => g.cell_center(cell),
            GridGeometry::Polar(g) => g.cell_center(cell),
        }
    }
}
