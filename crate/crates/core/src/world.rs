//! The simulation world: owns the robots and steps them.
//!
//! Within one tick every robot observes the same snapshot of the previous
//! tick's poses, aliveness, and food positions, and genome deliveries take
//! effect on the next tick. Robots are stepped sequentially in id order, but
//! under this contract the order carries no information.

use crate::arena::{
    self, geometry::Vec2, grid::PoseGrid, FoodField, RobotState, StaticGeometry,
    WorldConfig,
};
use crate::config::ExperimentConfig;
use crate::controller::{Controller, ControllerSpec};
use crate::events::Event;
use crate::evolution::{
    engine_step, revival_step, EngineContext, EvolutionConfig, EvolutionState, MatingPolicy,
    ReplacementPolicy, RobotRng, TickObservation,
};
use crate::genome::{Genome, GenomePacket, WeightBounds};
use crate::metrics::Snapshot;
use crate::rng::{Purpose, Streams};
use crate::tasks::{TaskConfig, TaskKind};
use rand::Rng;

pub struct World {
    pub world_cfg: WorldConfig,
    pub evolution_cfg: EvolutionConfig,
    pub task_cfg: TaskConfig,
    bounds: WeightBounds,
    controller_spec: ControllerSpec,
    geom: StaticGeometry,
    robots: Vec<RobotState>,
    evo: Vec<EvolutionState>,
    controllers: Vec<Controller>,
    rngs: Vec<RobotRng>,
    inboxes: Vec<Vec<GenomePacket>>,
    food: FoodField,
    food_rng: rand_chacha::ChaCha8Rng,
    step: u64,
    sensor_buf: Vec<f64>,
}

impl World {
    /// Build the initial population: uniform-random free poses, random
    /// genomes (lineage = robot id), and randomised replacement-counter
    /// offsets so the robots' windows never align.
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self, String> {
        let streams = Streams::new(seed);
        let world_cfg = cfg.world.clone();
        let geom = StaticGeometry::from_config(&world_cfg);
        let spec = cfg.controller_spec();
        let bounds = cfg.bounds();
        let n = cfg.n_robots;

        let mut placement = streams.world(Purpose::Placement);
        let poses = arena::place_robots(n, &world_cfg, &geom, &mut placement)?;
        let offset_bound = match cfg.evolution.replacement {
            ReplacementPolicy::Fixed => cfg.evolution.tau,
            ReplacementPolicy::Limited => cfg.evolution.tau_max.unwrap_or(0),
            ReplacementPolicy::EventBased => 0,
        };

        let mut robots = Vec::with_capacity(n);
        let mut controllers = Vec::with_capacity(n);
        let mut rngs = Vec::with_capacity(n);
        let mut evo = Vec::with_capacity(n);
        for (i, pose) in poses.into_iter().enumerate() {
            let id = i as u32;
            let mut rng = RobotRng {
                variation: streams.robot(id, Purpose::Variation),
                selection: streams.robot(id, Purpose::Selection),
            };
            let genome = Genome::random(
                spec.genome_dimension(),
                bounds,
                u64::from(id),
                0,
                &mut rng.variation,
            );
            let offset =
                if offset_bound > 0 { placement.random_range(0..offset_bound) } else { 0 };
            controllers.push(Controller::decode(&genome, spec));
            robots.push(RobotState {
                id,
                pose,
                active_genome: genome,
                fitness_acc: 0.0,
                energy: cfg.task.e_init,
                steps_since_replacement: offset,
                alive: true,
            });
            rngs.push(rng);
            evo.push(EvolutionState::new(&cfg.evolution));
        }

        let mut food_rng = streams.world(Purpose::Food);
        let food = FoodField::place(&world_cfg, &geom, &mut food_rng);

        Ok(Self {
            world_cfg,
            evolution_cfg: cfg.evolution.clone(),
            task_cfg: cfg.task,
            bounds,
            controller_spec: spec,
            geom,
            robots,
            evo,
            controllers,
            rngs,
            inboxes: vec![Vec::new(); n],
            food,
            food_rng,
            step: 0,
            sensor_buf: Vec::new(),
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    /// White-box access for scenario construction in tests.
    pub fn robots_mut(&mut self) -> &mut [RobotState] {
        &mut self.robots
    }

    /// Swap in a hand-built genome (and its decoded controller).
    pub fn set_active_genome(&mut self, id: u32, genome: Genome) {
        self.controllers[id as usize] = Controller::decode(&genome, self.controller_spec);
        self.robots[id as usize].active_genome = genome;
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::capture(self.step, &self.robots)
    }

    /// How many packets robot `id` currently holds.
    pub fn reservoir_len(&self, id: u32) -> usize {
        self.evo[id as usize].reservoir.len()
    }

    /// Size of robot `id`'s island under the hybrid scheme.
    pub fn island_len(&self, id: u32) -> usize {
        self.evo[id as usize].island.entries().len()
    }

    pub fn food_positions(&self) -> &[Vec2] {
        &self.food.items
    }

    /// Advance the world by one tick, appending any events to `events`.
    pub fn tick(&mut self, events: &mut Vec<Event>) {
        self.step += 1;
        let step = self.step;
        let n = self.robots.len();

        // Snapshot of the previous tick: poses (for sensing, collision, and
        // range queries), and food positions (for the task channels).
        let positions: Vec<Vec2> = self.robots.iter().map(|r| r.pose.position).collect();
        let grid = PoseGrid::build(
            self.world_cfg.width,
            self.world_cfg.height,
            self.world_cfg.grid_cell_size(),
            &positions,
        );
        let food_snapshot = self.food.clone();

        let ctx = EngineContext {
            evolution: &self.evolution_cfg,
            task: &self.task_cfg,
            bounds: self.bounds,
        };
        let mut deliveries: Vec<(u32, GenomePacket)> = Vec::new();
        let reach = self.world_cfg.robot_radius + self.world_cfg.food_radius;
        let diag = self.world_cfg.arena_diagonal();
        let light = self.world_cfg.light_position();

        #[allow(clippy::needless_range_loop)] // several parallel per-robot arrays are indexed
        for i in 0..n {
            let mut inbox = std::mem::take(&mut self.inboxes[i]);
            let robot = &mut self.robots[i];

            if !robot.alive {
                // Inactive robots neither move nor transmit, but a packet
                // reaching them donates a genome and brings them back.
                if revival_step(
                    robot,
                    &mut self.evo[i],
                    &mut inbox,
                    step,
                    &ctx,
                    &mut self.rngs[i],
                    events,
                ) {
                    self.controllers[i] =
                        Controller::decode(&robot.active_genome, self.controller_spec);
                }
                continue;
            }

            // Sense.
            arena::proximity_readings(
                robot.pose,
                &self.world_cfg,
                &self.geom,
                &grid,
                robot.id,
                &mut self.sensor_buf,
            );
            let max_prox = self.sensor_buf.iter().copied().fold(0.0, f64::max);
            self.task_cfg.append_channels(
                robot.pose.position,
                robot.pose.heading,
                food_snapshot.nearest(robot.pose.position),
                light,
                diag,
                &mut self.sensor_buf,
            );

            // Act.
            let command = self.controllers[i].act(&self.sensor_buf);

            // Move, then eat whatever the new position covers.
            robot.pose = arena::step_kinematics(
                robot.pose,
                command,
                &self.world_cfg,
                &self.geom,
                &grid,
                robot.id,
            );
            let items_eaten = if self.world_cfg.food_count > 0 {
                self.food.consume(
                    robot.pose.position,
                    reach,
                    &self.world_cfg,
                    &self.geom,
                    &mut self.food_rng,
                )
            } else {
                0
            };

            let fitness_increment = match self.task_cfg.kind {
                TaskKind::ObstacleAvoidance => {
                    Some(crate::tasks::fitness_increment_obstacle_avoidance(
                        command.0, command.1, max_prox,
                    ))
                }
                TaskKind::Foraging => {
                    Some(crate::tasks::fitness_increment_foraging(items_eaten))
                }
                TaskKind::Phototaxis => Some(crate::tasks::fitness_increment_phototaxis(
                    robot.pose.position,
                    light.expect("validated: phototaxis has a light"),
                    diag,
                )),
                TaskKind::None => None,
            };

            // Broadcast targets from the snapshot positions; dead robots are
            // included so revival packets can reach them.
            let mating_targets = match self.evolution_cfg.mating {
                MatingPolicy::Proximity => {
                    grid.in_range(positions[i], self.world_cfg.broadcast_range, robot.id)
                }
                MatingPolicy::Panmictic => {
                    (0..n as u32).filter(|&j| j != robot.id).collect()
                }
                MatingPolicy::Disabled => Vec::new(),
            };

            let obs = TickObservation {
                step,
                command,
                max_prox,
                items_eaten,
                fitness_increment,
                mating_targets,
            };
            let outcome = engine_step(
                robot,
                &mut self.evo[i],
                &mut inbox,
                &obs,
                &ctx,
                &mut self.rngs[i],
                &mut deliveries,
                events,
            );
            if outcome.replaced {
                self.controllers[i] =
                    Controller::decode(&robot.active_genome, self.controller_spec);
            }
        }

        // Deliveries take effect next tick; senders ran in id order, so each
        // inbox is ordered by sender id.
        for (to, packet) in deliveries {
            self.inboxes[to as usize].push(packet);
        }
    }
}
