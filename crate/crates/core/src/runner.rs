//! Experiment orchestration: running one world, writing its outputs, and
//! fanning out over replicates.
//!
//! Outputs per replicate directory: `metrics.csv` (the snapshot time
//! series), `events.jsonl`, and optionally `trajectories.jsonl`; the batch
//! root holds `resolved.toml`, the fully explicit configuration echo. Every
//! output byte is a function of (config, seed) alone.

use crate::config::ExperimentConfig;
use crate::events::{Event, EventLog};
use crate::metrics::{self, FitnessStats, Snapshot};
use crate::world::World;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("world setup failed: {0}")]
    Setup(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

/// One row of the metrics time series, as written to `metrics.csv`.
#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub step: u64,
    pub alive: usize,
    pub fitness: Option<FitnessStats>,
    pub diversity: Option<f64>,
    pub lineages: usize,
    pub clusters: usize,
}

/// Final-snapshot statistics for one replicate.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub replicate: usize,
    pub seed: u64,
    pub final_step: u64,
    pub alive: usize,
    pub fitness_mean: Option<f64>,
    pub fitness_median: Option<f64>,
    pub diversity: Option<f64>,
    pub lineages: usize,
    pub clusters: usize,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "replicate {:>3} seed {:>6} step {:>8} alive {:>4}",
            self.replicate, self.seed, self.final_step, self.alive
        )?;
        if let (Some(mean), Some(median)) = (self.fitness_mean, self.fitness_median) {
            write!(f, " fitness mean {mean:.3} median {median:.3}")?;
        }
        if let Some(d) = self.diversity {
            write!(f, " diversity {d:.3}")?;
        }
        write!(f, " lineages {} clusters {}", self.lineages, self.clusters)
    }
}

/// Everything a caller might want back from one run.
pub struct RunResult {
    pub summary: RunSummary,
    pub series: Vec<SeriesRow>,
}

fn series_row(snapshot: &Snapshot, threshold: f64, with_fitness: bool) -> SeriesRow {
    SeriesRow {
        step: snapshot.step,
        alive: snapshot.alive_count(),
        fitness: if with_fitness { metrics::fitness_stats(snapshot) } else { None },
        diversity: metrics::diversity(snapshot),
        lineages: metrics::lineage_census(snapshot).len(),
        clusters: metrics::polymorphism(snapshot, threshold),
    }
}

/// Run one replicate, writing `metrics.csv`, `events.jsonl`, and
/// (optionally) `trajectories.jsonl` into `dir`.
pub fn run_single(
    cfg: &ExperimentConfig,
    replicate: usize,
    dir: &Path,
) -> Result<RunResult, RunError> {
    let seed = cfg.replicate_seed(replicate);
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let metrics_path = dir.join("metrics.csv");
    let mut csv =
        BufWriter::new(File::create(&metrics_path).map_err(io_err(&metrics_path))?);
    let events_path = dir.join("events.jsonl");
    let mut event_log = EventLog::new(
        cfg.events,
        Some(BufWriter::new(File::create(&events_path).map_err(io_err(&events_path))?)),
    );
    let mut trajectories = if cfg.trajectories {
        let path = dir.join("trajectories.jsonl");
        Some((BufWriter::new(File::create(&path).map_err(io_err(&path))?), path))
    } else {
        None
    };

    let threshold = cfg
        .metrics
        .polymorphism_threshold
        .expect("config was resolved, so the threshold is present");
    let with_fitness = cfg.task.defines_fitness();

    let mut world = World::new(cfg, seed).map_err(RunError::Setup)?;
    writeln!(csv, "{}", metrics::CSV_HEADER).map_err(io_err(&metrics_path))?;

    let mut series = Vec::new();
    let record = |world: &World,
                      csv: &mut BufWriter<File>,
                      series: &mut Vec<SeriesRow>|
     -> Result<(), RunError> {
        let snapshot = world.snapshot();
        writeln!(csv, "{}", metrics::csv_row(&snapshot, threshold, with_fitness))
            .map_err(io_err(&metrics_path))?;
        series.push(series_row(&snapshot, threshold, with_fitness));
        Ok(())
    };

    record(&world, &mut csv, &mut series)?;
    let mut events: Vec<Event> = Vec::new();
    for step in 1..=cfg.n_steps {
        events.clear();
        world.tick(&mut events);
        for event in &events {
            event_log.record(event).map_err(io_err(&events_path))?;
        }
        if let Some((out, path)) = trajectories.as_mut() {
            for r in world.robots() {
                writeln!(
                    out,
                    "{{\"step\":{},\"id\":{},\"x\":{},\"y\":{},\"theta\":{},\"energy\":{}}}",
                    step, r.id, r.pose.position.x, r.pose.position.y, r.pose.heading, r.energy
                )
                .map_err(|e| RunError::Io { path: path.clone(), source: e })?;
            }
        }
        if step % cfg.snapshot_every == 0 || step == cfg.n_steps {
            record(&world, &mut csv, &mut series)?;
        }
    }

    csv.flush().map_err(io_err(&metrics_path))?;
    event_log.finish().map_err(io_err(&events_path))?;
    if let Some((mut out, path)) = trajectories {
        out.flush().map_err(|e| RunError::Io { path, source: e })?;
    }

    let last = series.last().expect("at least the step-0 snapshot exists");
    Ok(RunResult {
        summary: RunSummary {
            replicate,
            seed,
            final_step: last.step,
            alive: last.alive,
            fitness_mean: last.fitness.map(|f| f.mean),
            fitness_median: last.fitness.map(|f| f.median),
            diversity: last.diversity,
            lineages: last.lineages,
            clusters: last.clusters,
        },
        series,
    })
}

fn replicate_dir(root: &Path, replicate: usize) -> PathBuf {
    root.join(format!("rep_{replicate:03}"))
}

/// Run all replicates of a config under `root`, one subdirectory each, plus
/// the resolved-config echo at the root.
///
/// Replicates have disjoint random streams, so parallel execution produces
/// byte-identical outputs to sequential; a failing replicate never aborts
/// its siblings.
pub fn replicate_batch(
    cfg: &ExperimentConfig,
    root: &Path,
    parallel: bool,
) -> Result<Vec<Result<RunResult, RunError>>, RunError> {
    std::fs::create_dir_all(root).map_err(io_err(root))?;
    let resolved_path = root.join("resolved.toml");
    std::fs::write(&resolved_path, cfg.to_resolved_toml()).map_err(io_err(&resolved_path))?;

    let run_one = |r: usize| run_single(cfg, r, &replicate_dir(root, r));
    let results = if parallel {
        (0..cfg.replicates).into_par_iter().map(run_one).collect()
    } else {
        (0..cfg.replicates).map(run_one).collect()
    };
    Ok(results)
}
