//! Experiment configuration: TOML loading, validation, and the resolved
//! echo.
//!
//! Config files are flat key/value pairs under dotted sections. Every key
//! has a default except `seed`; loading a file yields a fully resolved
//! configuration in which every default has been made explicit, and that
//! resolved form round-trips to itself.

use crate::arena::WorldConfig;
use crate::controller::ControllerSpec;
use crate::events::EventLevel;
use crate::evolution::{EvolutionConfig, MatingPolicy, ReplacementPolicy, Scheme, SelectionPolicy};
use crate::genome::WeightBounds;
use crate::rng::{Purpose, Streams};
use crate::tasks::{TaskConfig, TaskKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", issues.join("\n"))]
    Validation { issues: Vec<String> },
}

/// Controller shape knobs that live in the genome section of the file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenomeConfig {
    pub weight_min: f64,
    pub weight_max: f64,
    pub n_hidden: usize,
}

impl Default for GenomeConfig {
    fn default() -> Self {
        Self { weight_min: -4.0, weight_max: 4.0, n_hidden: 0 }
    }
}

impl GenomeConfig {
    pub fn bounds(&self) -> WeightBounds {
        WeightBounds { min: self.weight_min, max: self.weight_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Genotypic distance under which two robots count as the same cluster.
    /// Defaults to 10% of the mean distance between two uniform-random
    /// genomes, estimated once per configuration from the base seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polymorphism_threshold: Option<f64>,
}

/// The whole experiment: world, genome shape, evolution design point, task,
/// and run bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base RNG seed; replicate `i` runs with `seed + i`. Required.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n_robots: usize,
    pub n_steps: u64,
    pub replicates: usize,
    pub snapshot_every: u64,
    pub out_dir: String,
    pub events: EventLevel,
    pub trajectories: bool,
    pub world: WorldConfig,
    pub genome: GenomeConfig,
    pub evolution: EvolutionConfig,
    pub task: TaskConfig,
    pub metrics: MetricsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: None,
            n_robots: 20,
            n_steps: 10_000,
            replicates: 1,
            snapshot_every: 100,
            out_dir: "out".to_string(),
            events: EventLevel::default(),
            trajectories: false,
            world: WorldConfig::default(),
            genome: GenomeConfig::default(),
            evolution: EvolutionConfig::default(),
            task: TaskConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parse, validate, and resolve a config file.
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        cfg.resolve();
        Ok(cfg)
    }

    /// The resolved echo: every default explicit, stable key order.
    pub fn to_resolved_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }

    pub fn base_seed(&self) -> u64 {
        self.seed.expect("config was resolved, so seed is present")
    }

    pub fn replicate_seed(&self, replicate: usize) -> u64 {
        self.base_seed().wrapping_add(replicate as u64)
    }

    pub fn bounds(&self) -> WeightBounds {
        self.genome.bounds()
    }

    /// Network shape implied by the sensor count and the task's extra
    /// channels.
    pub fn controller_spec(&self) -> ControllerSpec {
        ControllerSpec::new(
            self.world.sensor_count + self.task.extra_channels(),
            self.genome.n_hidden,
            2,
        )
    }

    /// Fill in the derived defaults (mutation sigma, polymorphism threshold)
    /// so the echoed config is fully explicit.
    fn resolve(&mut self) {
        if self.evolution.sigma.is_none() {
            self.evolution.sigma = Some(self.evolution.sigma_for(self.bounds()));
        }
        if self.metrics.polymorphism_threshold.is_none() {
            let mut rng =
                Streams::new(self.base_seed()).world(Purpose::DiversityEstimate);
            self.metrics.polymorphism_threshold =
                Some(crate::metrics::estimate_polymorphism_threshold(
                    self.controller_spec().genome_dimension(),
                    self.bounds(),
                    &mut rng,
                ));
        }
    }

    /// Check every invariant, reporting all violations at once with their
    /// key paths.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut fail = |key: &str, msg: String| issues.push(format!("{key}: {msg}"));
        // NaN must fail these checks too, so the comparisons are kept in the
        // "not positive" form.
        let positive = |v: f64| v > 0.0 && v.is_finite();

        if self.seed.is_none() {
            fail("seed", "missing required key (a 64-bit base seed)".into());
        }
        if self.n_robots < 2 {
            fail(
                "n_robots",
                format!(
                    "got {}; embodied evolution runs a parallel population of robots that \
                     evolve in the same environment, which requires at least 2",
                    self.n_robots
                ),
            );
        }
        if self.replicates < 1 {
            fail("replicates", "must be at least 1".into());
        }
        if self.snapshot_every < 1 {
            fail("snapshot_every", "must be at least 1".into());
        }

        let w = &self.world;
        if !positive(w.dt) {
            fail("world.dt", format!("must be positive, got {}", w.dt));
        }
        if !positive(w.robot_radius) {
            fail("world.robot_radius", format!("must be positive, got {}", w.robot_radius));
        }
        if !positive(w.food_radius) {
            fail("world.food_radius", format!("must be positive, got {}", w.food_radius));
        }
        if !positive(w.max_speed) {
            fail("world.max_speed", format!("must be positive, got {}", w.max_speed));
        }
        if w.sensor_count < 1 {
            fail("world.sensor_count", "must be at least 1".into());
        }
        if !positive(w.sensor_range) {
            fail("world.sensor_range", format!("must be positive, got {}", w.sensor_range));
        }
        if w.broadcast_range < 0.0 {
            fail(
                "world.broadcast_range",
                format!("must be nonnegative, got {}", w.broadcast_range),
            );
        }
        if w.width <= 4.0 * w.robot_radius
            || w.height <= 4.0 * w.robot_radius
            || !w.width.is_finite()
            || !w.height.is_finite()
        {
            fail("world.width", "arena must be larger than a few robot bodies".into());
        }
        if let Some([x, y]) = w.light {
            if x < 0.0 || x > w.width || y < 0.0 || y > w.height {
                fail("world.light", format!("({x}, {y}) lies outside the arena"));
            }
        }

        let g = &self.genome;
        if g.weight_min >= g.weight_max || !(g.weight_min + g.weight_max).is_finite() {
            fail(
                "genome.weight_min",
                format!("weight range [{}, {}] is empty", g.weight_min, g.weight_max),
            );
        }

        let e = &self.evolution;
        if e.tau < 1 {
            fail("evolution.tau", "evaluation window must be at least 1 step".into());
        }
        if e.tau_max.is_some_and(|m| m < 1) {
            fail("evolution.tau_max", "lifetime bound must be at least 1 step".into());
        }
        if e.island_size < 1 {
            fail("evolution.island_size", "island size (mu) must be at least 1".into());
        }
        if e.tournament_k < 1 {
            fail("evolution.tournament_k", "tournament size must be at least 1".into());
        }
        if e.reservoir_capacity < 1 {
            fail("evolution.reservoir_capacity", "must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&e.crossover_probability) {
            fail(
                "evolution.crossover_probability",
                format!("must lie in [0, 1], got {}", e.crossover_probability),
            );
        }
        if e.sigma.is_some_and(|s| s.is_nan() || s < 0.0) {
            fail("evolution.sigma", "must be nonnegative".into());
        }

        let t = &self.task;
        match t.kind {
            TaskKind::Phototaxis => {
                if w.light.is_none() {
                    fail("world.light", "phototaxis requires a light source position".into());
                }
            }
            TaskKind::Foraging => {
                if w.food_count < 1 {
                    fail("world.food_count", "foraging requires at least one food item".into());
                }
            }
            TaskKind::None => {
                if w.food_count < 1 {
                    fail(
                        "world.food_count",
                        "the task-free energy environment needs food items".into(),
                    );
                }
                for (key, v) in [
                    ("task.e_init", t.e_init),
                    ("task.e_max", t.e_max),
                    ("task.e_food", t.e_food),
                    ("task.e_step", t.e_step),
                ] {
                    if !positive(v) {
                        fail(key, format!("must be positive in the task-free mode, got {v}"));
                    }
                }
                if e.selection != SelectionPolicy::Random {
                    fail(
                        "evolution.selection",
                        "without a task there is no fitness to select on; \
                         selection must be \"random\""
                            .into(),
                    );
                }
                if e.replacement == ReplacementPolicy::EventBased {
                    fail(
                        "evolution.replacement",
                        "event_based replacement compares fitness and needs a task".into(),
                    );
                }
                if e.scheme == Scheme::Hybrid {
                    fail(
                        "evolution.scheme",
                        "the hybrid island ranks genomes by fitness and needs a task".into(),
                    );
                }
            }
            TaskKind::ObstacleAvoidance => {}
        }

        let _ = MatingPolicy::Proximity; // all mating variants are valid everywhere

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation { issues })
        }
    }
}
