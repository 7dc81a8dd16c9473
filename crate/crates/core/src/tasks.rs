//! Closed-form benchmark tasks and the Gaussian noise model applied on top
//! of them.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CartesianGeometry, GridGeometry, PolarGeometry};
use crate::grid::{Evaluation, Genotype, BD_DIM};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Bounds { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub genotype_dim: usize,
    pub gene_bounds: Vec<Bounds>,
    pub bd_bounds: [Bounds; BD_DIM],
    /// `(f_min, f_max)`, used to normalise quality.
    pub fitness_bounds: Bounds,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gene_bounds.len() != self.genotype_dim {
            return Err(Error::config(format!(
                "expected {} gene bounds, got {}",
                self.genotype_dim,
                self.gene_bounds.len()
            )));
        }
        if self.gene_bounds.iter().any(|b| !(b.lo < b.hi)) {
            return Err(Error::config("every gene interval needs lo < hi"));
        }
        if !(self.fitness_bounds.lo < self.fitness_bounds.hi) {
            return Err(Error::config("fitness bounds need f_min < f_max"));
        }
        Ok(())
    }
}

/// Deterministic evaluator. Implementations must be pure.
pub trait Task: Send + Sync {
    fn name(&self) -> &str;
    fn spec(&self) -> &TaskSpec;
    fn evaluate(&self, genotype: &Genotype) -> Evaluation;
    /// The discretisation used when the configuration does not override it.
    fn default_geometry(&self) -> GridGeometry;
}

impl<T: Task + ?Sized> Task for &T {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn spec(&self) -> &TaskSpec {
        (**self).spec()
    }
    fn evaluate(&self, genotype: &Genotype) -> Evaluation {
        (**self).evaluate(genotype)
    }
    fn default_geometry(&self) -> GridGeometry {
        (**self).default_geometry()
    }
}

/// 6-D Rastrigin, shifted so that the maximum is 0 at the origin. The
/// descriptor is the first two genes.
#[derive(Clone, Debug)]
pub struct Rastrigin {
    spec: TaskSpec,
}

impl Rastrigin {
    pub const DIM: usize = 6;
    pub const GENE_BOUNDS: Bounds = Bounds::new(-5.12, 5.12);
    pub const FITNESS_BOUNDS: Bounds = Bounds::new(-277.2, 0.0);

    pub fn new() -> Self {
        Rastrigin {
            spec: TaskSpec {
                genotype_dim: Self::DIM,
                gene_bounds: vec![Self::GENE_BOUNDS; Self::DIM],
                bd_bounds: [Self::GENE_BOUNDS; 2],
                fitness_bounds: Self::FITNESS_BOUNDS,
            },
        }
    }

    pub fn with_spec(spec: TaskSpec) -> Result<Self> {
        spec.validate()?;
        if spec.genotype_dim < BD_DIM {
            return Err(Error::config("rastrigin needs at least two genes"));
        }
        Ok(Rastrigin { spec })
    }
}

impl Default for Rastrigin {
    fn default() -> Self {
        Self::new()
    }
}

impl Task for Rastrigin {
    fn name(&self) -> &str {
        "rastrigin"
    }

    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn evaluate(&self, genotype: &Genotype) -> Evaluation {
        let x = genotype.values();
        let n = x.len() as f64;
        let sum: f64 = x.iter().map(|&xi| xi * xi - 10.0 * (TAU * xi).cos()).sum();
        Evaluation::new(-10.0 * n - sum, [x[0], x[1]])
    }

    fn default_geometry(&self) -> GridGeometry {
        let [b0, b1] = self.spec.bd_bounds;
        GridGeometry::Cartesian(
            CartesianGeometry::new([b0.lo, b1.lo], [b0.hi, b1.hi], [100, 100])
                .expect("rastrigin descriptor bounds are valid"),
        )
    }
}

/// Planar arm with equal links of total length 1. Fitness is the negative
/// variance of the joint angles; the descriptor is the end-effector position.
#[derive(Clone, Debug)]
pub struct PlanarArm {
    spec: TaskSpec,
}

impl PlanarArm {
    pub const JOINTS: usize = 8;

    pub fn new() -> Self {
        Self::with_joints(Self::JOINTS)
    }

    pub fn with_joints(joints: usize) -> Self {
        PlanarArm {
            spec: TaskSpec {
                genotype_dim: joints,
                gene_bounds: vec![Bounds::new(-PI, PI); joints],
                bd_bounds: [Bounds::new(-1.0, 1.0); 2],
                fitness_bounds: Bounds::new(-PI * PI, 0.0),
            },
        }
    }

    pub fn with_spec(spec: TaskSpec) -> Result<Self> {
        spec.validate()?;
        if spec.genotype_dim == 0 {
            return Err(Error::config("arm needs at least one joint"));
        }
        Ok(PlanarArm { spec })
    }
}

impl Default for PlanarArm {
    fn default() -> Self {
        Self::new()
    }
}

impl Task for PlanarArm {
    fn name(&self) -> &str {
        "arm"
    }

    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn evaluate(&self, genotype: &Genotype) -> Evaluation {
        let angles = genotype.values();
        let n = angles.len() as f64;
        let link = 1.0 / n;

        let mean = angles.iter().sum::<f64>() / n;
        let variance = angles.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;

        let (mut x, mut y, mut heading) = (0.0, 0.0, 0.0);
        for a in angles {
            heading += a;
            x += link * heading.cos();
            y += link * heading.sin();
        }
        Evaluation::new(-variance, [x, y])
    }

    fn default_geometry(&self) -> GridGeometry {
        GridGeometry::Polar(
            PolarGeometry::equal_area(1.0, PolarGeometry::DEFAULT_RINGS)
                .expect("default polar layout is valid"),
        )
    }
}

/// Standard deviations of the additive Gaussian noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub fitness_sigma: f64,
    /// Applied independently to every descriptor dimension.
    pub bd_sigma: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec {
        fitness_sigma: 0.0,
        bd_sigma: 0.0,
    };

    pub fn new(fitness_sigma: f64, bd_sigma: f64) -> Result<Self> {
        let spec = NoiseSpec {
            fitness_sigma,
            bd_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |s: f64| s >= 0.0 && s.is_finite();
        if ok(self.fitness_sigma) && ok(self.bd_sigma) {
            Ok(())
        } else {
            Err(Error::config(format!("noise sigmas must be finite and >= 0, got {self:?}")))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.fitness_sigma == 0.0 && self.bd_sigma == 0.0
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            fitness_sigma: 0.05,
            bd_sigma: 0.01,
        }
    }
}

/// `f(x) + N(0, fitness_sigma)` and `bd_k(x) + N(0, bd_sigma)`.
///
/// A zero sigma skips the draw, so a noiseless spec reproduces the task
/// bit-for-bit and consumes no randomness.
pub fn noisy_evaluate<T, R>(task: &T, noise: &NoiseSpec, genotype: &Genotype, rng: &mut R) -> Evaluation
where
    T: Task + ?Sized,
    R: Rng + ?Sized,
{
    let mut eval = task.evaluate(genotype);
    if noise.fitness_sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        eval.fitness += noise.fitness_sigma * z;
    }
    if noise.bd_sigma > 0.0 {
        for d in eval.descriptor.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *d += noise.bd_sigma * z;
        }
    }
    eval
}
