//! On-board objective functions, plus the task-free mode where virtual
//! energy is the only currency.
//!
//! Every increment is computable from the robot's own state and sensors —
//! nothing here ever looks at another robot. The three formulas are artifact
//! choices isolated behind this module so they can be swapped without
//! touching the engine.

use crate::arena::geometry::Vec2;
use serde::{Deserialize, Serialize};

/// Which objective the robots evaluate on-board. `None` means selection
/// pressure comes from the environment alone: no fitness is computed,
/// transmitted, or logged anywhere in the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[default]
    ObstacleAvoidance,
    Foraging,
    Phototaxis,
    None,
}

/// Task selection plus the virtual-energy parameters used when `kind` is
/// `none`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub kind: TaskKind,
    /// Energy granted at birth (and at every activation of a new genome).
    pub e_init: f64,
    /// Hard ceiling on stored energy.
    pub e_max: f64,
    /// Energy gained per food item.
    pub e_food: f64,
    /// Energy spent per step just by being alive.
    pub e_step: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self { kind: TaskKind::ObstacleAvoidance, e_init: 100.0, e_max: 200.0, e_food: 50.0, e_step: 1.0 }
    }
}

impl TaskConfig {
    pub fn defines_fitness(&self) -> bool {
        self.kind != TaskKind::None
    }

    /// Extra sensor channels appended after the proximity rays.
    ///
    /// Foraging adds (bearing, intensity) of the nearest food item; the
    /// task-free energy environment adds the same two, since food is what
    /// keeps robots alive there; phototaxis adds the light intensity.
    pub fn extra_channels(&self) -> usize {
        match self.kind {
            TaskKind::ObstacleAvoidance => 0,
            TaskKind::Foraging | TaskKind::None => 2,
            TaskKind::Phototaxis => 1,
        }
    }

    /// Append the task channels for a robot at `position` with `heading`.
    /// All values are in [0, 1].
    pub fn append_channels(
        &self,
        position: Vec2,
        heading: f64,
        nearest_food: Option<(Vec2, f64)>,
        light: Option<Vec2>,
        arena_diagonal: f64,
        sensors: &mut Vec<f64>,
    ) {
        match self.kind {
            TaskKind::ObstacleAvoidance => {}
            TaskKind::Foraging | TaskKind::None => {
                let (bearing, intensity) = match nearest_food {
                    Some((item, dist)) => {
                        let abs = (item.y - position.y).atan2(item.x - position.x);
                        let rel = crate::arena::geometry::wrap_angle(abs - heading);
                        (
                            (rel + std::f64::consts::PI) / std::f64::consts::TAU,
                            (1.0 - dist / arena_diagonal).clamp(0.0, 1.0),
                        )
                    }
                    None => (0.5, 0.0),
                };
                sensors.push(bearing);
                sensors.push(intensity);
            }
            TaskKind::Phototaxis => {
                let light = light.expect("phototaxis requires a light source");
                let dist = position.distance(light);
                sensors.push((1.0 - dist / arena_diagonal).clamp(0.0, 1.0));
            }
        }
    }
}

/// Obstacle avoidance: forward speed, times straightness, times clearance.
/// Zero for spinning in place or for driving backwards.
pub fn fitness_increment_obstacle_avoidance(v_left: f64, v_right: f64, max_prox: f64) -> f64 {
    let forward = ((v_left + v_right) / 2.0).clamp(0.0, 1.0);
    let straightness = 1.0 - (v_left - v_right).abs() / 2.0;
    forward * straightness * (1.0 - max_prox)
}

/// Foraging: one fitness unit per item collected this step.
pub fn fitness_increment_foraging(items_eaten: usize) -> f64 {
    items_eaten as f64
}

/// Phototaxis: closeness to the light, normalised by the arena diagonal.
pub fn fitness_increment_phototaxis(robot: Vec2, light: Vec2, arena_diagonal: f64) -> f64 {
    (1.0 - robot.distance(light) / arena_diagonal).clamp(0.0, 1.0)
}

/// Task-free energy bookkeeping: pay the per-step cost, bank the food.
/// The result is clamped into [0, e_max].
pub fn energy_update(energy: f64, items_eaten: usize, cfg: &TaskConfig) -> f64 {
    (energy - cfg.e_step + cfg.e_food * items_eaten as f64).clamp(0.0, cfg.e_max)
}
