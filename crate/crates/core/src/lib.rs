//! Decentralised on-line evolution for simulated robot collectives.
//!
//! A population of differential-drive robots adapts while it operates: each
//! robot runs its own control loop, broadcasts its genome to robots in
//! range, stores what it receives in a bounded reservoir, and — on its own
//! clock — selects parents locally, applies variation, and activates the
//! offspring as its next controller. No central authority selects, ranks,
//! or replaces anything, and the world never pauses or resets.
//!
//! The crate is organised around that loop:
//!
//! * [`genome`] — genomes, variation operators, genotypic distance
//! * [`controller`] — decoding genomes into feedforward wheel controllers
//! * [`arena`] — the 2D world: kinematics, ray sensing, food, range queries
//! * [`evolution`] — mating, reservoir/island, replacement, selection
//! * [`tasks`] — on-board objective functions and the task-free energy mode
//! * [`metrics`] — population observables and the metrics CSV
//! * [`config`] / [`runner`] — experiment configuration, replicates, outputs

pub mod arena;
pub mod config;
pub mod controller;
pub mod events;
pub mod evolution;
pub mod genome;
pub mod metrics;
pub mod rng;
pub mod runner;
pub mod tasks;
pub mod world;

pub use arena::{Pose, RobotState, WorldConfig};
pub use config::{ConfigError, ExperimentConfig, GenomeConfig, MetricsConfig};
pub use controller::{Controller, ControllerSpec};
pub use events::{Event, EventLevel};
pub use evolution::{
    EvolutionConfig, MatingPolicy, ReplacementPolicy, Reservoir, Scheme, SelectionPolicy,
};
pub use genome::{CrossoverMode, Genome, GenomePacket, WeightBounds};
pub use metrics::{FitnessStats, Snapshot};
pub use runner::{replicate_batch, run_single, RunError, RunResult, RunSummary, SeriesRow};
pub use tasks::{TaskConfig, TaskKind};
pub use world::World;
