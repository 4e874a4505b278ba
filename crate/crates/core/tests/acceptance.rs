//! The acceptance gate: one test per criterion, each ending with a PASS
//! line. Thresholds are pinned here, in code.
//!
//! The heavy population runs (criteria 3, 4, 6) use fixed experiment
//! configurations chosen once and frozen below; replicate seeds derive from
//! the base seed, so every number in this file is reproducible from the
//! command line with the same config.

use embevo_core::arena::geometry::Vec2;
use embevo_core::config::ExperimentConfig;
use embevo_core::events::{Event, ParentRecord, ReplacementTrigger, VariationOp};
use embevo_core::genome::{Genome, WeightBounds};
use embevo_core::metrics::mann_whitney_u;
use embevo_core::runner::{replicate_batch, run_single, RunResult, SeriesRow};
use embevo_core::world::World;
use std::sync::OnceLock;
use std::time::Instant;
use tempfile::TempDir;

/// One visible line per criterion. The default libtest harness captures the
/// `println!` macros of passing tests; writing to the stdout handle directly
/// keeps the pass/fail lines in plain `cargo test` output.
fn report(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

macro_rules! report {
    ($($arg:tt)*) => { report(format_args!($($arg)*)) };
}

// ---------------------------------------------------------------------------
// shared experiment plumbing
// ---------------------------------------------------------------------------

fn cfg(toml: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(toml).unwrap_or_else(|e| panic!("bad acceptance config: {e}"))
}

fn run_batch(config: &ExperimentConfig) -> (TempDir, Vec<RunResult>) {
    let dir = TempDir::new().unwrap();
    let results = replicate_batch(config, dir.path(), true)
        .unwrap()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .unwrap();
    (dir, results)
}

/// Snapshot rows with `lo < step <= hi`.
fn band(series: &[SeriesRow], lo: u64, hi: u64) -> impl Iterator<Item = &SeriesRow> {
    series.iter().filter(move |r| r.step > lo && r.step <= hi)
}

fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// A scattered field of circular obstacles that makes blind driving
/// unrewarding; the jitter pattern is arbitrary but fixed.
fn obstacle_field() -> String {
    let mut obs = Vec::new();
    for i in 0..6 {
        for j in 0..6 {
            let x = 2.5 + i as f64 * 5.0 + if (i + j) % 2 == 1 { 1.17 } else { -1.17 };
            let y = 2.5 + j as f64 * 5.0 + if (i * j) % 3 != 0 { 1.1 } else { -0.7 };
            obs.push(format!("[{x:.2},{y:.2},0.8]"));
        }
    }
    obs.join(",")
}

/// The obstacle-avoidance adaptation setup shared by criteria 3 and 6:
/// 20 robots, proximity mating at 1 m, best-of-reservoir selection, fixed
/// evaluation windows, 100k steps, 10 replicates.
fn adaptation_config(tau: u64, mating: &str) -> ExperimentConfig {
    cfg(&format!(
        "seed = 9000\nn_robots = 20\nn_steps = 100000\nreplicates = 10\nsnapshot_every = 1000\n\
         [world]\nwidth = 30.0\nheight = 30.0\nbroadcast_range = 1.0\nobstacles = [{}]\n\
         [task]\nkind = \"obstacle_avoidance\"\n\
         [evolution]\nmating = \"{mating}\"\nselection = \"best\"\ntau = {tau}\nsigma = 0.15\n",
        obstacle_field()
    ))
}

/// Per-replicate population-mean fitness, one value per snapshot in the
/// given step band.
fn popmeans_in_band(runs: &[RunResult], lo: u64, hi: u64) -> Vec<Vec<f64>> {
    runs.iter()
        .map(|r| {
            band(&r.series, lo, hi)
                .filter_map(|row| row.fitness.map(|f| f.mean))
                .collect::<Vec<f64>>()
        })
        .collect()
}

static TAU300: OnceLock<(TempDir, Vec<RunResult>)> = OnceLock::new();

fn tau300_runs() -> &'static [RunResult] {
    &TAU300.get_or_init(|| run_batch(&adaptation_config(300, "proximity"))).1
}

// ---------------------------------------------------------------------------
// criterion 1 — control-loop conformance trace
// ---------------------------------------------------------------------------

// Two still robots under panmictic mating and event-based replacement, with
// fitness accumulators pinned at 1 and 9 by construction (their controllers
// output (0, 0), so the obstacle-avoidance increment is exactly zero). The
// hand-trace: tick 1 sends both genomes; tick 2 stores them, the low-fitness
// robot sees 9 > 1 and adopts the other's genome; nothing else happens.
#[test]
fn criterion_1_algorithm_conformance_trace() {
    let config = cfg(
        "seed = 1\nn_robots = 2\n\
         [evolution]\nmating = \"panmictic\"\nreplacement = \"event_based\"\nsigma = 0.0\n",
    );
    let mut world = World::new(&config, 1).unwrap();
    let dim = config.controller_spec().genome_dimension();
    assert_eq!(dim, 18);

    // Robot 0: the all-zero genome. Robot 1: zero biases but nonzero sensor
    // weights; with nothing in sensor range both controllers command (0, 0).
    let g0 = Genome { weights: vec![0.0; dim], lineage_id: 0, birth_step: 0 };
    let mut w1 = vec![0.0; dim];
    for (i, w) in w1.iter_mut().enumerate().take(8) {
        *w = 0.7 - 0.05 * i as f64;
    }
    for (i, w) in w1.iter_mut().enumerate().skip(9).take(8) {
        *w = -0.3 + 0.04 * (i - 9) as f64;
    }
    let g1 = Genome { weights: w1, lineage_id: 1, birth_step: 0 };
    world.set_active_genome(0, g0.clone());
    world.set_active_genome(1, g1.clone());
    world.robots_mut()[0].pose = embevo_core::Pose { position: Vec2::new(8.0, 10.0), heading: 0.0 };
    world.robots_mut()[1].pose = embevo_core::Pose { position: Vec2::new(12.0, 10.0), heading: 0.0 };
    world.robots_mut()[0].fitness_acc = 1.0;
    world.robots_mut()[1].fitness_acc = 9.0;

    let mut events = Vec::new();
    world.tick(&mut events);
    world.tick(&mut events);

    let expected = vec![
        Event::Delivery { step: 1, from: 0, to: 1, fitness: Some(1.0) },
        Event::Delivery { step: 1, from: 1, to: 0, fitness: Some(9.0) },
        Event::Delivery { step: 2, from: 0, to: 1, fitness: Some(1.0) },
        Event::Store { step: 2, robot: 0, sender: 1, transmit_step: 1 },
        Event::Replacement {
            step: 2,
            robot: 0,
            trigger: ReplacementTrigger::EventBased,
            parents: vec![ParentRecord { sender: 1, lineage: 1, transmit_step: 1 }],
            operator: VariationOp::Mutation,
            lineage: 1,
        },
        Event::Delivery { step: 2, from: 1, to: 0, fitness: Some(9.0) },
        Event::Store { step: 2, robot: 1, sender: 0, transmit_step: 1 },
    ];
    assert_eq!(events, expected, "event sequence must match the hand-trace exactly");

    // The low-fitness robot adopted the other's genome within one delivery
    // round-trip; with sigma = 0 the weights are copied bit for bit.
    assert_eq!(world.robots()[0].active_genome.weights, g1.weights);
    assert_eq!(world.robots()[0].active_genome.lineage_id, 1);
    assert_eq!(world.robots()[0].fitness_acc, 0.0);
    assert_eq!(world.robots()[1].active_genome.weights, g1.weights);

    // The same sequence as it appears in the JSON-lines log.
    let logged: Vec<String> =
        events.iter().map(|e| serde_json::to_string(e).unwrap()).collect();
    assert_eq!(
        logged[4],
        "{\"event\":\"replacement\",\"step\":2,\"robot\":0,\"trigger\":\"event_based\",\
         \"parents\":[{\"sender\":1,\"lineage\":1,\"transmit_step\":1}],\
         \"operator\":\"mutation\",\"lineage\":1}"
    );
    report!("ACCEPTANCE 1 algorithm-conformance-trace: PASS (7-event hand-trace exact)");
}

// ---------------------------------------------------------------------------
// criterion 2 — determinism and runtime
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_determinism() {
    let toml = "seed = 2000\nn_robots = 20\nn_steps = 10000\nevents = \"full\"\n";
    let config = cfg(toml);
    let dirs: Vec<TempDir> = (0..3).map(|_| TempDir::new().unwrap()).collect();
    let mut first_run_secs = 0.0;
    for (i, dir) in dirs.iter().enumerate() {
        let t = Instant::now();
        run_single(&config, 0, dir.path()).unwrap();
        if i == 0 {
            first_run_secs = t.elapsed().as_secs_f64();
        }
    }
    let read = |d: &TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    for other in &dirs[1..] {
        assert_eq!(read(&dirs[0], "metrics.csv"), read(other, "metrics.csv"));
        assert_eq!(read(&dirs[0], "events.jsonl"), read(other, "events.jsonl"));
    }

    let reseeded = cfg(&toml.replace("seed = 2000", "seed = 2001"));
    let other_dir = TempDir::new().unwrap();
    run_single(&reseeded, 0, other_dir.path()).unwrap();
    assert_ne!(read(&dirs[0], "metrics.csv"), read(&other_dir, "metrics.csv"));
    assert_ne!(read(&dirs[0], "events.jsonl"), read(&other_dir, "events.jsonl"));

    assert!(
        first_run_secs < 60.0,
        "20 robots x 10k steps took {first_run_secs:.1}s, budget is 60s"
    );
    report!(
        "ACCEPTANCE 2 determinism: PASS (3 byte-identical runs, seed change diverges, \
         {first_run_secs:.2}s per run)"
    );
}

// ---------------------------------------------------------------------------
// criterion 3 — task adaptation on obstacle avoidance
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_task_adaptation() {
    let started = Instant::now();
    let evolved = tau300_runs();
    let (_ctl_dir, control) = run_batch(&adaptation_config(300, "disabled"));

    // Median population-mean fitness over the first and final 10% of steps,
    // pooled across the 10 replicates' snapshots.
    let first: Vec<f64> = popmeans_in_band(evolved, 0, 10_000).concat();
    let last: Vec<f64> = popmeans_in_band(evolved, 90_000, 100_000).concat();
    let (m_first, m_last) = (median(first), median(last));
    let ratio = m_last / m_first;
    assert!(
        ratio >= 3.0,
        "final-band median {m_last:.2} vs first-band median {m_first:.2}: ratio {ratio:.2} < 3"
    );

    // Paired against the mutation-only control (broadcast disabled, so every
    // replacement walks the empty-pool self-mutation path).
    let mut wins = 0;
    for (e, c) in evolved.iter().zip(&control) {
        let e_final = median(band(&e.series, 90_000, 100_000)
            .filter_map(|r| r.fitness.map(|f| f.mean))
            .collect());
        let c_final = median(band(&c.series, 90_000, 100_000)
            .filter_map(|r| r.fitness.map(|f| f.mean))
            .collect());
        if e_final > c_final {
            wins += 1;
        }
    }
    assert!(wins >= 8, "evolved beat the mutation-only control in only {wins}/10 replicates");

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "criterion-3 block took {elapsed:.0}s, budget 600s");
    report!(
        "ACCEPTANCE 3 task-adaptation: PASS (ratio {ratio:.2} >= 3, control beaten {wins}/10, \
         {elapsed:.0}s)"
    );
}

// ---------------------------------------------------------------------------
// criterion 4 — environment-driven selection without a task
// ---------------------------------------------------------------------------

fn energy_world_config(randomize_received: bool) -> ExperimentConfig {
    cfg(&format!(
        "seed = 9100\nn_robots = 100\nn_steps = 100000\nreplicates = 10\nsnapshot_every = 1000\n\
         [world]\nwidth = 25.0\nheight = 25.0\nfood_count = 36\nbroadcast_range = 1.0\n\
         [task]\nkind = \"none\"\ne_init = 150.0\ne_max = 250.0\ne_food = 64.0\ne_step = 1.0\n\
         [evolution]\nmating = \"proximity\"\nselection = \"random\"\n\
         replacement = \"limited\"\ntau_max = 2000\nrandomize_received = {randomize_received}\n",
    ))
}

#[test]
fn criterion_4_environment_driven_selection() {
    let (_e_dir, evolved) = run_batch(&energy_world_config(false));
    let (_c_dir, control) = run_batch(&energy_world_config(true));

    let tail_alive = |r: &RunResult| -> f64 {
        median(band(&r.series, 90_000, 100_000).map(|row| row.alive as f64).collect())
    };
    let evolved_alive: Vec<f64> = evolved.iter().map(tail_alive).collect();
    let control_alive: Vec<f64> = control.iter().map(tail_alive).collect();

    let evolved_median = median(evolved_alive.clone());
    assert!(
        evolved_median > 0.0,
        "evolved populations went extinct: tail-median alive {evolved_median}"
    );

    // The control replaces every received genome with a fresh random one,
    // severing heredity; it must collapse to near-extinction (<= 10% of the
    // population) in at least 8 of 10 replicates, and lose every pairing.
    let near_extinct =
        control_alive.iter().filter(|&&a| a <= 10.0).count();
    assert!(
        near_extinct >= 8,
        "control stayed viable in too many replicates: alive medians {control_alive:?}"
    );
    let wins = evolved_alive
        .iter()
        .zip(&control_alive)
        .filter(|(e, c)| e > c)
        .count();
    assert!(wins >= 8, "evolved beat the scrambled control in only {wins}/10 replicates");

    report!(
        "ACCEPTANCE 4 environment-driven-selection: PASS (evolved tail-median alive \
         {evolved_median:.0}/100, control near-extinct in {near_extinct}/10, wins {wins}/10)"
    );
}

// ---------------------------------------------------------------------------
// criterion 5 — selection-policy ordering and event-based fixation
// ---------------------------------------------------------------------------

fn foraging_config(selection: &str) -> ExperimentConfig {
    cfg(&format!(
        "seed = 9200\nn_robots = 20\nn_steps = 30000\nreplicates = 10\nsnapshot_every = 1000\n\
         [world]\nwidth = 20.0\nheight = 20.0\nfood_count = 80\n\
         [task]\nkind = \"foraging\"\n\
         [evolution]\nmating = \"panmictic\"\nselection = \"{selection}\"\ntau = 300\nsigma = 0.15\n",
    ))
}

#[test]
fn criterion_5_selection_policy_ordering() {
    let (_b_dir, best) = run_batch(&foraging_config("best"));
    let (_r_dir, random) = run_batch(&foraging_config("random"));
    let tail_diversity = |r: &RunResult| -> f64 {
        median(band(&r.series, 27_000, 30_000).filter_map(|row| row.diversity).collect())
    };
    let mut wins = 0;
    for (b, r) in best.iter().zip(&random) {
        if tail_diversity(b) < tail_diversity(r) {
            wins += 1;
        }
    }
    assert!(
        wins >= 8,
        "best-of-reservoir had lower final diversity in only {wins}/10 paired replicates"
    );

    // Event-based fixation, exactly, on a 4-robot mutation-off instance.
    // Bias-only genomes make each robot drive a small circle at a constant
    // per-step obstacle-avoidance increment, so every genome has a constant
    // fitness rate; the microbial-style overwrite must drive the population
    // to carry bit-identical copies of the best genome, and stay there.
    let config = cfg(
        "seed = 3\nn_robots = 4\n\
         [evolution]\nmating = \"panmictic\"\nselection = \"best\"\n\
         replacement = \"event_based\"\nsigma = 0.0\n",
    );
    let mut world = World::new(&config, 3).unwrap();
    let dim = config.controller_spec().genome_dimension();
    let corners = [(5.0, 5.0), (5.0, 15.0), (15.0, 5.0), (15.0, 15.0)];
    for k in 0..4u32 {
        let mut weights = vec![0.0; dim];
        weights[8] = 0.9 + 0.15 * k as f64; // left-wheel bias
        weights[17] = 0.3 + 0.1 * k as f64; // right-wheel bias
        world.set_active_genome(k, Genome { weights, lineage_id: k as u64, birth_step: 0 });
        world.robots_mut()[k as usize].pose = embevo_core::Pose {
            position: Vec2::new(corners[k as usize].0, corners[k as usize].1),
            heading: 0.0,
        };
    }
    let champion = world.robots()[3].active_genome.weights.clone();
    let mut events = Vec::new();
    for _ in 0..100 {
        world.tick(&mut events);
    }
    for checkpoint in 0..4 {
        for _ in 0..100 {
            world.tick(&mut events);
        }
        for r in world.robots() {
            assert!(r.alive);
            assert_eq!(
                r.active_genome.weights, champion,
                "robot {} does not carry the fixed genome at checkpoint {checkpoint}",
                r.id
            );
        }
    }
    report!(
        "ACCEPTANCE 5 selection-policy-ordering: PASS (diversity wins {wins}/10, \
         event-based fixation exact on 4 robots)"
    );
}

// ---------------------------------------------------------------------------
// criterion 6 — evaluation-time sensitivity
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_evaluation_time_sensitivity() {
    let (_d50, tau50) = run_batch(&adaptation_config(50, "proximity"));
    let (_d1000, tau1000) = run_batch(&adaptation_config(1000, "proximity"));
    let tau300 = tau300_runs();

    // One scalar per replicate: the median population-mean fitness over the
    // final 10% of steps.
    let finals = |runs: &[RunResult]| -> Vec<f64> {
        runs.iter()
            .map(|r| {
                median(band(&r.series, 90_000, 100_000)
                    .filter_map(|row| row.fitness.map(|f| f.mean))
                    .collect())
            })
            .collect()
    };
    let (f50, f300, f1000) = (finals(&tau50), finals(tau300), finals(&tau1000));
    let (_, p_a) = mann_whitney_u(&f50, &f300);
    let (_, p_b) = mann_whitney_u(&f300, &f1000);
    let (_, p_c) = mann_whitney_u(&f50, &f1000);
    let p_min = p_a.min(p_b).min(p_c);
    assert!(
        p_min < 0.05,
        "no pair of evaluation windows is distinguishable: p = {p_a:.4}, {p_b:.4}, {p_c:.4}"
    );
    report!(
        "ACCEPTANCE 6 evaluation-time-sensitivity: PASS (Mann-Whitney p: 50v300 {p_a:.2e}, \
         300v1000 {p_b:.2e}, 50v1000 {p_c:.2e})"
    );
}

// ---------------------------------------------------------------------------
// criterion 7 — operator oracle sweep
// ---------------------------------------------------------------------------

// A compact re-verification of each derived-value family against its
// independent oracle. The full-strength versions, one dedicated test per
// operator example, live in the module test suites (genome, controller,
// arena, evolution, tasks, metrics) and run in this same invocation.
#[test]
fn criterion_7_operator_oracle_sweep() {
    use embevo_core::controller::{Controller, ControllerSpec};
    use embevo_core::evolution::{select_parents, Candidate, EvolutionConfig, SelectionPolicy};
    use embevo_core::rng::{Purpose, Streams};
    use embevo_core::tasks;
    use rand_distr::Distribution;

    // Seeded-stream replay: identical state, identical genome.
    let streams = Streams::new(71);
    let bounds = WeightBounds::default();
    let a = Genome::random(18, bounds, 0, 0, &mut streams.robot(0, Purpose::Variation));
    let b = Genome::random(18, bounds, 0, 0, &mut streams.robot(0, Purpose::Variation));
    assert_eq!(a, b);

    // Monte-Carlo mutation spread vs the analytic sigma (2000 trials here;
    // the 10k-trial version lives in the genome module tests).
    let sigma = 0.1;
    let wide = WeightBounds::new(-100.0, 100.0);
    let base = Genome { weights: vec![0.0; 10], lineage_id: 0, birth_step: 0 };
    let mut rng = streams.robot(1, Purpose::Variation);
    let mut all_deltas = Vec::new();
    for _ in 0..2000 {
        let m = base.mutate(sigma, wide, &mut rng);
        all_deltas.extend(m.weights.iter().copied());
    }
    let mean = all_deltas.iter().sum::<f64>() / all_deltas.len() as f64;
    let std = (all_deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
        / (all_deltas.len() - 1) as f64)
        .sqrt();
    assert!((std - sigma).abs() <= 0.05 * sigma, "mutation std {std} vs sigma {sigma}");

    // One-point cut semantics and exhaustive uniform masks.
    let p1 = Genome { weights: vec![1.0; 4], lineage_id: 1, birth_step: 0 };
    let p2 = Genome { weights: vec![2.0; 4], lineage_id: 2, birth_step: 0 };
    assert_eq!(p1.one_point_at(&p2, 2).weights, vec![1.0, 1.0, 2.0, 2.0]);
    let mut masks = std::collections::HashSet::new();
    let mut xrng = streams.robot(2, Purpose::Variation);
    for _ in 0..400 {
        let child = p1.crossover(&p2, embevo_core::CrossoverMode::Uniform, &mut xrng);
        let mask: usize = child
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| usize::from(w == 1.0) << i)
            .sum();
        masks.insert(mask);
    }
    assert_eq!(masks.len(), 16);

    // 3-4-5 distance and a sampled triangle inequality.
    let za = Genome { weights: vec![0.0, 0.0], lineage_id: 0, birth_step: 0 };
    let zb = Genome { weights: vec![3.0, 4.0], lineage_id: 0, birth_step: 0 };
    assert_eq!(za.distance(&zb), 5.0);
    let mut trng = streams.robot(3, Purpose::Variation);
    for _ in 0..1000 {
        let g1 = Genome::random(6, bounds, 0, 0, &mut trng);
        let g2 = Genome::random(6, bounds, 0, 0, &mut trng);
        let g3 = Genome::random(6, bounds, 0, 0, &mut trng);
        assert!(g1.distance(&g3) <= g1.distance(&g2) + g2.distance(&g3) + 1e-9);
    }

    // Controller dimension formula and a hand-computed pass.
    assert_eq!(ControllerSpec::new(8, 0, 2).genome_dimension(), 18);
    let spec = ControllerSpec::new(2, 0, 2);
    let g = Genome { weights: vec![0.5, -0.25, 0.1, 0.0, 0.0, 0.0], lineage_id: 0, birth_step: 0 };
    let (left, _) = Controller::decode(&g, spec).act(&[0.8, 0.4]);
    assert!((left - 0.4f64.tanh()).abs() < 1e-12);

    // Tournament win odds vs the 9-pair enumeration (20k draws at 2%).
    let gs: Vec<Genome> =
        (0..3).map(|i| Genome { weights: vec![i as f64], lineage_id: i, birth_step: 0 }).collect();
    let pool: Vec<Candidate> = gs
        .iter()
        .enumerate()
        .map(|(i, g)| Candidate {
            genome: g,
            fitness: Some((i + 1) as f64),
            sender: i as u32,
            transmit_step: 0,
        })
        .collect();
    let tcfg = EvolutionConfig {
        selection: SelectionPolicy::Tournament,
        tournament_k: 2,
        ..Default::default()
    };
    let mut srng = streams.robot(4, Purpose::Selection);
    let mut wins = [0usize; 3];
    let trials = 20_000;
    for _ in 0..trials {
        let picked = select_parents(&pool, &gs[0], &tcfg, &mut srng).unwrap();
        wins[picked[0].1.sender as usize] += 1;
    }
    for (w, exact) in wins.iter().zip([1.0 / 9.0, 3.0 / 9.0, 5.0 / 9.0]) {
        assert!((*w as f64 / trials as f64 - exact).abs() <= 0.02);
    }

    // Task formulas against hand arithmetic.
    assert!((tasks::fitness_increment_obstacle_avoidance(1.0, 0.5, 0.5) - 0.28125).abs() < 1e-15);
    let diag = 800f64.sqrt();
    assert!(
        (tasks::fitness_increment_phototaxis(Vec2::new(10.0, 10.0), Vec2::new(0.0, 0.0), diag)
            - 0.5)
            .abs()
            <= 1e-9
    );
    let tcfg = embevo_core::TaskConfig {
        kind: embevo_core::TaskKind::None,
        e_init: 100.0,
        e_max: 200.0,
        e_food: 50.0,
        e_step: 1.0,
    };
    let mut energy = tcfg.e_init;
    let mut steps = 0;
    while energy > 0.0 {
        energy = tasks::energy_update(energy, 0, &tcfg);
        steps += 1;
    }
    assert_eq!(steps, 100, "E_init 100 at cost 1 dies at step 100");

    // The normal-sample oracle the mutation kernel depends on.
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    let mut nrng = streams.robot(5, Purpose::Variation);
    let z: f64 = normal.sample(&mut nrng);
    assert!(z.is_finite());

    report!(
        "ACCEPTANCE 7 operator-oracle-sweep: PASS (full per-example oracle tests run in the \
         module suites of this same invocation)"
    );
}

// ---------------------------------------------------------------------------
// criterion 8 — invariant sweep
// ---------------------------------------------------------------------------

// Randomised invariant checks at >= 1000 cases each; the per-module
// property-test suites (proptest) cover the same ground with shrinking.
#[test]
fn criterion_8_invariant_sweep() {
    use embevo_core::evolution::Reservoir;
    use embevo_core::genome::GenomePacket;
    use embevo_core::metrics::{diversity, polymorphism, Snapshot};
    use embevo_core::rng::{Purpose, Streams};
    use rand::Rng;

    let streams = Streams::new(81);
    let bounds = WeightBounds::default();

    // Variation closure, 1000 random cases.
    let mut vrng = streams.robot(0, Purpose::Variation);
    for case in 0..1000 {
        let dim = 1 + case % 24;
        let a = Genome::random(dim, bounds, 0, 0, &mut vrng);
        let b = Genome::random(dim, bounds, 1, 0, &mut vrng);
        let sigma = (case % 7) as f64 * 0.3;
        let m = a.mutate(sigma, bounds, &mut vrng);
        assert!(m.weights.iter().all(|&w| (bounds.min..=bounds.max).contains(&w)));
        assert_eq!(m.lineage_id, a.lineage_id);
        if dim >= 2 {
            let c = a.crossover(&b, embevo_core::CrossoverMode::OnePoint, &mut vrng);
            assert_eq!(c.lineage_id, a.lineage_id);
            assert!(c
                .weights
                .iter()
                .enumerate()
                .all(|(i, &w)| w == a.weights[i] || w == b.weights[i]));
        }
    }

    // Reservoir rules vs a naive reference model, 1000 random operations.
    let mut reservoir = Reservoir::new(5);
    let mut model: Vec<(u32, u64)> = Vec::new(); // (sender, transmit_step)
    let mut rrng = streams.robot(1, Purpose::Selection);
    for step in 0..1000u64 {
        let sender = rrng.random_range(0..12u32);
        reservoir.receive(GenomePacket {
            genome: Genome { weights: vec![0.0], lineage_id: 0, birth_step: 0 },
            sender_id: sender,
            fitness: Some(0.0),
            transmit_step: step,
        });
        model.retain(|(s, _)| *s != sender);
        if model.len() == 5 {
            model.remove(0);
        }
        model.push((sender, step));
        let got: Vec<(u32, u64)> =
            reservoir.entries().iter().map(|p| (p.sender_id, p.transmit_step)).collect();
        assert_eq!(got, model, "reservoir diverged from the reference model at op {step}");
    }

    // diversity = 0 <=> one cluster <=> weight-identical alive genomes,
    // over 1000 random snapshots (half of them degenerate by construction).
    let mut mrng = streams.robot(2, Purpose::Variation);
    for case in 0..1000 {
        let n = 2 + case % 6;
        let identical = case % 2 == 0;
        let template = Genome::random(5, bounds, 0, 0, &mut mrng);
        let robots: Vec<embevo_core::RobotState> = (0..n as u32)
            .map(|id| {
                let genome = if identical {
                    template.clone()
                } else {
                    Genome::random(5, bounds, u64::from(id), 0, &mut mrng)
                };
                embevo_core::RobotState {
                    id,
                    pose: embevo_core::Pose { position: Vec2::new(0.5, 0.5), heading: 0.0 },
                    active_genome: genome,
                    fitness_acc: 0.0,
                    energy: 0.0,
                    steps_since_replacement: 0,
                    alive: true,
                }
            })
            .collect();
        let snapshot = Snapshot::capture(0, &robots);
        let d = diversity(&snapshot).unwrap();
        let clusters = polymorphism(&snapshot, 1e-6);
        if identical {
            assert_eq!(d, 0.0);
            assert_eq!(clusters, 1);
        } else if d == 0.0 {
            assert_eq!(clusters, 1);
        } else {
            assert!(clusters >= 2 || d > 0.0);
        }
        let census = embevo_core::metrics::lineage_census(&snapshot);
        assert_eq!(census.values().sum::<usize>(), snapshot.alive_count());
    }

    // Controller output bounds, 1000 random genomes and sensor vectors.
    let spec = embevo_core::ControllerSpec::new(5, 3, 2);
    let mut crng = streams.robot(3, Purpose::Variation);
    for _ in 0..1000 {
        let g = Genome::random(spec.genome_dimension(), bounds, 0, 0, &mut crng);
        let sensors: Vec<f64> = (0..5).map(|_| crng.random_range(0.0..=1.0)).collect();
        let (l, r) = embevo_core::Controller::decode(&g, spec).act(&sensors);
        assert!((-1.0..=1.0).contains(&l) && (-1.0..=1.0).contains(&r));
    }

    report!(
        "ACCEPTANCE 8 invariant-sweep: PASS (1000-case sweeps; proptest suites run in this \
         same invocation)"
    );
}
