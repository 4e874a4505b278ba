//! The per-robot evolution engine: mating, the genome reservoir, replacement
//! triggers, parent selection, and offspring activation.
//!
//! Every decision here reads only the calling robot's own state, the packets
//! addressed to it this tick, and the ids of robots currently in
//! transmission range. There is no global fitness, no global selection, and
//! no synchronisation between robots: each one replaces its genome on its
//! own clock.

use crate::arena::RobotState;
use crate::events::{Event, ParentRecord, ReplacementTrigger, VariationOp};
use crate::genome::{CrossoverMode, Genome, GenomePacket, WeightBounds};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One genome per robot, or an on-board island population fed by mating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Distributed,
    Hybrid,
}

/// Who receives a robot's genome broadcasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MatingPolicy {
    /// Everyone within `broadcast_range`, every tick; the mating predicate
    /// is implicit in the range.
    #[default]
    Proximity,
    /// Every other robot, regardless of position.
    Panmictic,
    /// No transmission at all (the mutation-only control).
    Disabled,
}

/// How parents are picked from the candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    #[default]
    Best,
    Random,
    Tournament,
    /// Minimum genotypic distance to the robot's current genome.
    Similar,
}

/// What triggers the activation of a new genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementPolicy {
    /// After a fixed evaluation window of `tau` steps.
    #[default]
    Fixed,
    /// When virtual energy runs out, bounded by `tau_max` steps if set
    /// (unbounded `tau_max` is the pure variable-lifetime scheme).
    Limited,
    /// On reception of a packet whose fitness strictly exceeds the robot's
    /// current accumulated fitness (microbial-style overwrite).
    EventBased,
}

/// Crossover switch; `off` means mutation-only variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverSetting {
    #[default]
    Off,
    Uniform,
    OnePoint,
}

impl CrossoverSetting {
    fn mode(self) -> Option<CrossoverMode> {
        match self {
            CrossoverSetting::Off => None,
            CrossoverSetting::Uniform => Some(CrossoverMode::Uniform),
            CrossoverSetting::OnePoint => Some(CrossoverMode::OnePoint),
        }
    }
}

/// The full design-space selection for the evolution engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub scheme: Scheme,
    /// Island size (mu) under the hybrid scheme.
    pub island_size: usize,
    pub mating: MatingPolicy,
    pub selection: SelectionPolicy,
    pub tournament_k: usize,
    pub replacement: ReplacementPolicy,
    /// Evaluation window for fixed replacement, in steps.
    pub tau: u64,
    /// Upper lifetime bound for limited replacement; absent means unbounded.
    pub tau_max: Option<u64>,
    /// Mutation standard deviation; absent resolves to 0.1 * span / 2.
    pub sigma: Option<f64>,
    pub crossover: CrossoverSetting,
    pub crossover_probability: f64,
    pub reservoir_capacity: usize,
    /// Number of consecutive windows to average before a genome may be
    /// replaced; 0 disables re-evaluation.
    pub reevaluation_count: u32,
    /// Control knob: replace every received genome with a fresh random one
    /// at delivery, severing inheritance through mating.
    pub randomize_received: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Distributed,
            island_size: 8,
            mating: MatingPolicy::Proximity,
            selection: SelectionPolicy::Best,
            tournament_k: 2,
            replacement: ReplacementPolicy::Fixed,
            tau: 300,
            tau_max: None,
            sigma: None,
            crossover: CrossoverSetting::Off,
            crossover_probability: 0.0,
            reservoir_capacity: 32,
            reevaluation_count: 0,
            randomize_received: false,
        }
    }
}

impl EvolutionConfig {
    pub fn sigma_for(&self, bounds: WeightBounds) -> f64 {
        self.sigma.unwrap_or(0.1 * bounds.span() / 2.0)
    }
}

/// Bounded per-robot store of received genome packets.
///
/// At most one entry per sender (newest wins), oldest dropped when full,
/// cleared at every replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    entries: Vec<GenomePacket>,
    capacity: usize,
}

impl Reservoir {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "reservoir capacity must be positive");
        Self { entries: Vec::new(), capacity }
    }

    pub fn receive(&mut self, packet: GenomePacket) {
        if let Some(pos) = self.entries.iter().position(|e| e.sender_id == packet.sender_id) {
            self.entries.remove(pos);
        }
        if self.entries.len() == self.capacity {
            self.entries.remove(0);
        }
        self.entries.push(packet);
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn entries(&self) -> &[GenomePacket] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// One member of a hybrid-scheme island.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandEntry {
    pub genome: Genome,
    pub fitness: f64,
    pub sender: u32,
    pub recorded_step: u64,
}

/// On-board population for the hybrid scheme: bounded, worst-fitness
/// eviction, never cleared.
#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    entries: Vec<IslandEntry>,
    capacity: usize,
}

impl Island {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "island size must be positive");
        Self { entries: Vec::new(), capacity }
    }

    /// Insert an evaluated or received genome. When full, the incoming entry
    /// must strictly beat the island minimum, which it then evicts.
    pub fn insert(&mut self, entry: IslandEntry) -> bool {
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
            return true;
        }
        let worst = self
            .entries
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.fitness
                    .total_cmp(&b.fitness)
                    .then(a.recorded_step.cmp(&b.recorded_step))
                    .then(a.sender.cmp(&b.sender))
            })
            .map(|(i, _)| i)
            .expect("island capacity >= 1");
        if entry.fitness > self.entries[worst].fitness {
            self.entries[worst] = entry;
            true
        } else {
            false
        }
    }

    pub fn entries(&self) -> &[IslandEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-robot evolution bookkeeping beyond the public `RobotState`.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub reservoir: Reservoir,
    pub island: Island,
    /// Fitness totals of completed windows under re-evaluation.
    pub window_fitnesses: Vec<f64>,
    /// Counter for lineage ids given to locally created fresh genomes.
    fresh_lineage_seq: u32,
}

impl EvolutionState {
    pub fn new(cfg: &EvolutionConfig) -> Self {
        Self {
            reservoir: Reservoir::new(cfg.reservoir_capacity),
            island: Island::new(cfg.island_size),
            window_fitnesses: Vec::new(),
            fresh_lineage_seq: 0,
        }
    }

    /// A lineage id no founding genome and no other robot can produce:
    /// founders use plain robot ids, which stay below 2^32.
    pub fn fresh_lineage(&mut self, robot: u32) -> u64 {
        self.fresh_lineage_seq += 1;
        (u64::from(robot) + 1) << 32 | u64::from(self.fresh_lineage_seq)
    }
}

/// A parent candidate, wherever it came from.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub genome: &'a Genome,
    pub fitness: Option<f64>,
    pub sender: u32,
    pub transmit_step: u64,
}

impl<'a> Candidate<'a> {
    fn record(&self) -> ParentRecord {
        ParentRecord {
            sender: self.sender,
            lineage: self.genome.lineage_id,
            transmit_step: self.transmit_step,
        }
    }

    fn fitness_key(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Ties everywhere break by (lowest sender id, earliest transmit step), so
/// selection is reproducible.
fn pick_best<'a, 'p>(pool: &'p [Candidate<'a>]) -> &'p Candidate<'a> {
    pool.iter()
        .min_by(|a, b| {
            b.fitness_key()
                .total_cmp(&a.fitness_key())
                .then(a.sender.cmp(&b.sender))
                .then(a.transmit_step.cmp(&b.transmit_step))
        })
        .expect("pool is nonempty")
}

fn pick_similar<'a, 'p>(pool: &'p [Candidate<'a>], current: &Genome) -> &'p Candidate<'a> {
    pool.iter()
        .min_by(|a, b| {
            a.genome
                .distance(current)
                .total_cmp(&b.genome.distance(current))
                .then(a.sender.cmp(&b.sender))
                .then(a.transmit_step.cmp(&b.transmit_step))
        })
        .expect("pool is nonempty")
}

fn pick_one<'a, 'p, R: Rng>(
    pool: &'p [Candidate<'a>],
    current: &Genome,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> &'p Candidate<'a> {
    match cfg.selection {
        SelectionPolicy::Best => pick_best(pool),
        SelectionPolicy::Random => &pool[rng.random_range(0..pool.len())],
        SelectionPolicy::Tournament => {
            let k = cfg.tournament_k.max(1);
            let drawn: Vec<&Candidate> =
                (0..k).map(|_| &pool[rng.random_range(0..pool.len())]).collect();
            drawn
                .into_iter()
                .min_by(|a, b| {
                    b.fitness_key()
                        .total_cmp(&a.fitness_key())
                        .then(a.sender.cmp(&b.sender))
                        .then(a.transmit_step.cmp(&b.transmit_step))
                })
                .expect("tournament draws at least one candidate")
        }
        SelectionPolicy::Similar => pick_similar(pool, current),
    }
}

/// Select one parent (two when the crossover coin fires) from the pool.
/// Returns `None` exactly when the pool is empty; the engine decides what an
/// empty pool means (self-mutation under a task, death without one).
pub fn select_parents<R: Rng>(
    pool: &[Candidate<'_>],
    current: &Genome,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Option<Vec<(Genome, ParentRecord)>> {
    if pool.is_empty() {
        return None;
    }
    let two = cfg.crossover.mode().is_some() && rng.random_bool(cfg.crossover_probability);
    let n = if two { 2 } else { 1 };
    Some(
        (0..n)
            .map(|_| {
                let c = pick_one(pool, current, cfg, rng);
                (c.genome.clone(), c.record())
            })
            .collect(),
    )
}

/// Why a replacement fires this tick, if it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerCause {
    WindowElapsed,
    EnergyExhausted,
    LifetimeBound,
    SuperiorPacket,
}

impl TriggerCause {
    pub fn logged(self) -> ReplacementTrigger {
        match self {
            TriggerCause::WindowElapsed => ReplacementTrigger::Fixed,
            TriggerCause::EnergyExhausted | TriggerCause::LifetimeBound => {
                ReplacementTrigger::Limited
            }
            TriggerCause::SuperiorPacket => ReplacementTrigger::EventBased,
        }
    }

    /// Time-driven window ends participate in re-evaluation; energy
    /// exhaustion and superior packets replace immediately.
    fn reevaluates(self) -> bool {
        matches!(self, TriggerCause::WindowElapsed | TriggerCause::LifetimeBound)
    }
}

/// The replacement predicate of the control loop.
///
/// `received` are the packets delivered to this robot this tick (already
/// stored); the counter in `robot` has been advanced for this tick.
pub fn should_replace(
    robot: &RobotState,
    received: &[GenomePacket],
    cfg: &EvolutionConfig,
) -> Option<TriggerCause> {
    match cfg.replacement {
        ReplacementPolicy::Fixed => {
            (robot.steps_since_replacement >= cfg.tau).then_some(TriggerCause::WindowElapsed)
        }
        ReplacementPolicy::Limited => {
            if robot.energy <= 0.0 {
                Some(TriggerCause::EnergyExhausted)
            } else if cfg.tau_max.is_some_and(|m| robot.steps_since_replacement >= m) {
                Some(TriggerCause::LifetimeBound)
            } else {
                None
            }
        }
        ReplacementPolicy::EventBased => received
            .iter()
            .any(|p| p.fitness.is_some_and(|f| f > robot.fitness_acc))
            .then_some(TriggerCause::SuperiorPacket),
    }
}

/// What the physics phase observed for one robot this tick; the engine's
/// only view of the world beyond its inbox.
#[derive(Debug, Clone)]
pub struct TickObservation {
    pub step: u64,
    pub command: (f64, f64),
    pub max_prox: f64,
    pub items_eaten: usize,
    /// Fitness increment already computed by the task layer (absent in the
    /// task-free mode).
    pub fitness_increment: Option<f64>,
    /// Receivers for this robot's broadcast, ascending ids; dead robots are
    /// included so revival packets can reach them.
    pub mating_targets: Vec<u32>,
}

/// Per-robot random substreams, owned by the world.
pub struct RobotRng {
    pub variation: rand_chacha::ChaCha8Rng,
    pub selection: rand_chacha::ChaCha8Rng,
}

pub struct EngineContext<'a> {
    pub evolution: &'a EvolutionConfig,
    pub task: &'a crate::tasks::TaskConfig,
    pub bounds: WeightBounds,
}

/// Outcome flags the world needs after a robot's engine step.
#[derive(Debug, Default)]
pub struct EngineOutcome {
    /// A new genome was activated; the controller must be re-decoded.
    pub replaced: bool,
    /// The robot ran out of options in the task-free mode and went inactive.
    pub died: bool,
}

/// One tick of the evolution loop for a single alive robot, after the
/// sense-act and physics phase: performance update, genome broadcast,
/// reception, and (maybe) replacement.
#[allow(clippy::too_many_arguments)]
pub fn engine_step(
    robot: &mut RobotState,
    evo: &mut EvolutionState,
    inbox: &mut [GenomePacket],
    obs: &TickObservation,
    ctx: &EngineContext<'_>,
    rng: &mut RobotRng,
    deliveries: &mut Vec<(u32, GenomePacket)>,
    events: &mut Vec<Event>,
) -> EngineOutcome {
    debug_assert!(robot.alive, "engine_step is only run for alive robots");
    let cfg = ctx.evolution;
    let defines_fitness = ctx.task.defines_fitness();
    let mut outcome = EngineOutcome::default();

    // Performance / energy update.
    if let Some(inc) = obs.fitness_increment {
        robot.fitness_acc += inc;
    }
    if !defines_fitness {
        robot.energy = crate::tasks::energy_update(robot.energy, obs.items_eaten, ctx.task);
    }

    // Mating: continual broadcast to everyone in range (or everyone, under
    // panmixia). Transmission carries the sender's current fitness estimate.
    if cfg.mating != MatingPolicy::Disabled {
        let fitness = defines_fitness.then(|| current_fitness_estimate(robot, evo));
        for &target in &obs.mating_targets {
            deliveries.push((
                target,
                GenomePacket {
                    genome: robot.active_genome.clone(),
                    sender_id: robot.id,
                    fitness,
                    transmit_step: obs.step,
                },
            ));
            events.push(Event::Delivery { step: obs.step, from: robot.id, to: target, fitness });
        }
    }

    // Reception: store everything addressed to us this tick.
    randomize_inbox_if_configured(robot.id, inbox, evo, ctx, &mut rng.variation, obs.step);
    for packet in inbox.iter() {
        events.push(Event::Store {
            step: obs.step,
            robot: robot.id,
            sender: packet.sender_id,
            transmit_step: packet.transmit_step,
        });
        match cfg.scheme {
            Scheme::Distributed => evo.reservoir.receive(packet.clone()),
            Scheme::Hybrid => {
                let fitness = packet
                    .fitness
                    .expect("hybrid scheme requires a task, so packets carry fitness");
                evo.island.insert(IslandEntry {
                    genome: packet.genome.clone(),
                    fitness,
                    sender: packet.sender_id,
                    recorded_step: packet.transmit_step,
                });
            }
        }
    }

    // Replacement.
    robot.steps_since_replacement += 1;
    let Some(cause) = should_replace(robot, inbox, cfg) else {
        return outcome;
    };

    // Re-evaluation: bank this window and keep running the same genome until
    // enough windows have been averaged.
    if cause.reevaluates()
        && cfg.reevaluation_count > 0
        && (evo.window_fitnesses.len() as u32) + 1 < cfg.reevaluation_count
    {
        evo.window_fitnesses.push(robot.fitness_acc);
        robot.fitness_acc = 0.0;
        robot.steps_since_replacement = 0;
        return outcome;
    }

    let final_fitness = current_fitness_estimate(robot, evo);

    // Candidate pool. Distributed: received packets, plus (under a task) the
    // current genome so a robot is never forced to adopt worse material.
    // Without a task no fitness exists, selection is random over received
    // genomes only, and an empty reservoir means the robot goes inactive —
    // that emptiness is exactly what environment-driven selection acts on.
    // Hybrid: the evaluated genome enters the island, then parents come from
    // the island.
    let selected = match cfg.scheme {
        Scheme::Distributed => {
            let mut pool: Vec<Candidate> = evo
                .reservoir
                .entries()
                .iter()
                .map(|p| Candidate {
                    genome: &p.genome,
                    fitness: p.fitness,
                    sender: p.sender_id,
                    transmit_step: p.transmit_step,
                })
                .collect();
            // Under similarity selection the current genome would always win
            // (distance zero to itself), so it only backstops an empty pool.
            let include_current = defines_fitness
                && !(cfg.selection == SelectionPolicy::Similar && !pool.is_empty());
            if include_current {
                pool.push(Candidate {
                    genome: &robot.active_genome,
                    fitness: Some(final_fitness),
                    sender: robot.id,
                    transmit_step: robot.active_genome.birth_step,
                });
            }
            select_parents(&pool, &robot.active_genome, cfg, &mut rng.selection)
        }
        Scheme::Hybrid => {
            hybrid_island_update(
                robot,
                IslandEntry {
                    genome: robot.active_genome.clone(),
                    fitness: final_fitness,
                    sender: robot.id,
                    recorded_step: obs.step,
                },
                evo,
                cfg,
            );
            let pool: Vec<Candidate> = evo
                .island
                .entries()
                .iter()
                .map(|e| Candidate {
                    genome: &e.genome,
                    fitness: Some(e.fitness),
                    sender: e.sender,
                    transmit_step: e.recorded_step,
                })
                .collect();
            select_parents(&pool, &robot.active_genome, cfg, &mut rng.selection)
        }
    };

    let sigma = cfg.sigma_for(ctx.bounds);
    let (mut offspring, parents, operator) = match selected {
        Some(parents_sel) => {
            let records: Vec<ParentRecord> = parents_sel.iter().map(|(_, r)| *r).collect();
            if parents_sel.len() == 2 {
                let mode = cfg.crossover.mode().expect("two parents imply crossover");
                let child = parents_sel[0].0.crossover(&parents_sel[1].0, mode, &mut rng.variation);
                (
                    child.mutate(sigma, ctx.bounds, &mut rng.variation),
                    records,
                    VariationOp::CrossoverMutation,
                )
            } else {
                (
                    parents_sel[0].0.mutate(sigma, ctx.bounds, &mut rng.variation),
                    records,
                    VariationOp::Mutation,
                )
            }
        }
        None if defines_fitness => {
            // Empty pool under a task: re-activate a mutated copy of the
            // current genome.
            let record = ParentRecord {
                sender: robot.id,
                lineage: robot.active_genome.lineage_id,
                transmit_step: robot.active_genome.birth_step,
            };
            (
                robot.active_genome.mutate(sigma, ctx.bounds, &mut rng.variation),
                vec![record],
                VariationOp::Mutation,
            )
        }
        None => {
            // Empty pool without a task: the robot becomes inactive until a
            // received packet revives it.
            robot.alive = false;
            evo.reservoir.clear();
            evo.window_fitnesses.clear();
            robot.fitness_acc = 0.0;
            events.push(Event::Death { step: obs.step, robot: robot.id });
            outcome.died = true;
            return outcome;
        }
    };

    // Activation: the offspring takes over, counters reset, reservoir
    // cleared. The pose is untouched — evolution never repositions a robot.
    offspring.birth_step = obs.step;
    events.push(Event::Replacement {
        step: obs.step,
        robot: robot.id,
        trigger: cause.logged(),
        parents,
        operator,
        lineage: offspring.lineage_id,
    });
    robot.active_genome = offspring;
    robot.fitness_acc = 0.0;
    robot.steps_since_replacement = 0;
    if !defines_fitness {
        robot.energy = ctx.task.e_init;
    }
    evo.reservoir.clear();
    evo.window_fitnesses.clear();
    outcome.replaced = true;
    outcome
}

/// Insert an evaluated genome into the robot's island. Only meaningful under
/// the hybrid scheme.
pub fn hybrid_island_update(
    robot: &RobotState,
    entry: IslandEntry,
    evo: &mut EvolutionState,
    cfg: &EvolutionConfig,
) {
    assert!(
        cfg.scheme == Scheme::Hybrid,
        "hybrid_island_update called under the distributed scheme"
    );
    let _ = robot;
    evo.island.insert(entry);
}

/// Revival of an inactive robot in the task-free mode: the first packet to
/// arrive (lowest sender id on ties) donates its genome verbatim, and the
/// robot restarts with a fresh energy budget.
pub fn revival_step(
    robot: &mut RobotState,
    evo: &mut EvolutionState,
    inbox: &mut [GenomePacket],
    obs_step: u64,
    ctx: &EngineContext<'_>,
    rng: &mut RobotRng,
    events: &mut Vec<Event>,
) -> bool {
    debug_assert!(!robot.alive);
    randomize_inbox_if_configured(robot.id, inbox, evo, ctx, &mut rng.variation, obs_step);
    let Some(packet) = inbox.first() else {
        return false;
    };
    let mut genome = packet.genome.clone();
    genome.birth_step = obs_step;
    events.push(Event::Revival {
        step: obs_step,
        robot: robot.id,
        donor: packet.sender_id,
        lineage: genome.lineage_id,
    });
    robot.active_genome = genome;
    robot.alive = true;
    robot.fitness_acc = 0.0;
    robot.steps_since_replacement = 0;
    robot.energy = ctx.task.e_init;
    evo.reservoir.clear();
    evo.window_fitnesses.clear();
    true
}

/// The fitness a robot would report right now: the plain accumulator, or the
/// running mean across windows under re-evaluation.
fn current_fitness_estimate(robot: &RobotState, evo: &EvolutionState) -> f64 {
    if evo.window_fitnesses.is_empty() {
        robot.fitness_acc
    } else {
        let n = evo.window_fitnesses.len() as f64 + 1.0;
        (evo.window_fitnesses.iter().sum::<f64>() + robot.fitness_acc) / n
    }
}

/// The heredity-ablation control: swap every incoming genome for a fresh
/// random one of the same dimension before it is seen by anything else.
fn randomize_inbox_if_configured(
    robot_id: u32,
    inbox: &mut [GenomePacket],
    evo: &mut EvolutionState,
    ctx: &EngineContext<'_>,
    variation_rng: &mut rand_chacha::ChaCha8Rng,
    step: u64,
) {
    if !ctx.evolution.randomize_received {
        return;
    }
    for packet in inbox.iter_mut() {
        let dim = packet.genome.dimension();
        let lineage = evo.fresh_lineage(robot_id);
        packet.genome = Genome::random(dim, ctx.bounds, lineage, step, variation_rng);
    }
}
