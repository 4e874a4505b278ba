//! Genome representation, genotypic distance, and the variation operators.
//!
//! A genome is a fixed-length vector of controller weights plus lineage
//! metadata. Mutation and crossover are the only ways new weight vectors
//! enter a running experiment, and both keep every weight inside the
//! configured bounds.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Inclusive weight range shared by every genome of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBounds {
    pub min: f64,
    pub max: f64,
}

impl WeightBounds {
    /// Panics if `min > max`; a degenerate range (`min == max`) is allowed.
    pub fn new(min: f64, max: f64) -> Self {
        assert!(min <= max, "weight bounds must satisfy min <= max");
        Self { min, max }
    }

    pub fn clamp(&self, w: f64) -> f64 {
        w.clamp(self.min, self.max)
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

impl Default for WeightBounds {
    fn default() -> Self {
        Self { min: -4.0, max: 4.0 }
    }
}

/// Crossover operator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMode {
    Uniform,
    OnePoint,
}

/// A fixed-length real-valued genome with lineage metadata.
///
/// `lineage_id` identifies the founding ancestor: mutation preserves it and
/// crossover inherits it from the first parent, so counting lineages in a
/// population tells which initial genomes still have descendants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub weights: Vec<f64>,
    pub lineage_id: u64,
    pub birth_step: u64,
}

impl Genome {
    /// Draw a genome with every weight uniform in the bounds.
    ///
    /// The caller supplies a fresh `lineage_id`; the runner hands out one per
    /// founding genome so lineage counts stay interpretable.
    pub fn random<R: Rng>(
        dimension: usize,
        bounds: WeightBounds,
        lineage_id: u64,
        birth_step: u64,
        rng: &mut R,
    ) -> Self {
        assert!(dimension >= 1, "genome dimension must be at least 1");
        let weights = (0..dimension)
            .map(|_| rng.random_range(bounds.min..=bounds.max))
            .collect();
        Self { weights, lineage_id, birth_step }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Gaussian perturbation of every weight, clamped back into bounds.
    ///
    /// `sigma == 0` is the identity on weights. The lineage is preserved and
    /// `birth_step` is copied; the caller stamps the actual activation step.
    pub fn mutate<R: Rng>(&self, sigma: f64, bounds: WeightBounds, rng: &mut R) -> Self {
        assert!(sigma >= 0.0, "mutation sigma must be nonnegative");
        let weights = self
            .weights
            .iter()
            .map(|&w| {
                let z: f64 = rng.sample(StandardNormal);
                bounds.clamp(w + sigma * z)
            })
            .collect();
        Self { weights, lineage_id: self.lineage_id, birth_step: self.birth_step }
    }

    /// Recombine two equal-length genomes. The child's lineage comes from
    /// `self` (the first parent), an arbitrary but fixed tie-break.
    pub fn crossover<R: Rng>(&self, other: &Genome, mode: CrossoverMode, rng: &mut R) -> Self {
        assert_eq!(
            self.dimension(),
            other.dimension(),
            "crossover requires equal genome dimensions"
        );
        match mode {
            CrossoverMode::Uniform => {
                let weights = self
                    .weights
                    .iter()
                    .zip(&other.weights)
                    .map(|(&a, &b)| if rng.random_bool(0.5) { a } else { b })
                    .collect();
                Self { weights, lineage_id: self.lineage_id, birth_step: self.birth_step }
            }
            CrossoverMode::OnePoint => {
                let cut = rng.random_range(1..self.dimension());
                self.one_point_at(other, cut)
            }
        }
    }

    /// One-point crossover at a fixed cut index: genes `[0, cut)` from
    /// `self`, the rest from `other`.
    pub fn one_point_at(&self, other: &Genome, cut: usize) -> Self {
        assert_eq!(self.dimension(), other.dimension());
        assert!(cut >= 1 && cut < self.dimension(), "cut index out of range");
        let weights = self.weights[..cut]
            .iter()
            .chain(&other.weights[cut..])
            .copied()
            .collect();
        Self { weights, lineage_id: self.lineage_id, birth_step: self.birth_step }
    }

    /// Euclidean distance between weight vectors.
    pub fn distance(&self, other: &Genome) -> f64 {
        assert_eq!(
            self.dimension(),
            other.dimension(),
            "genotypic distance requires equal genome dimensions"
        );
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A genome in flight: what one robot broadcasts to another during mating.
///
/// `fitness` is the sender's accumulated performance at transmit time; it is
/// present exactly when the experiment defines a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomePacket {
    pub genome: Genome,
    pub sender_id: u32,
    pub fitness: Option<f64>,
    pub transmit_step: u64,
}
