//! Population-level observables: fitness statistics, genotypic diversity,
//! lineage census, and cluster structure (mono- vs polymorphism).
//!
//! Everything here is a pure function of a `Snapshot`; nothing reaches back
//! into the engine.

use crate::arena::RobotState;
use crate::genome::{Genome, WeightBounds};
use petgraph::unionfind::UnionFind;
use rand::Rng;
use std::collections::BTreeMap;

/// Frozen view of the population at one step, including dead robots.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: u64,
    pub robots: Vec<RobotSnapshot>,
}

#[derive(Debug, Clone)]
pub struct RobotSnapshot {
    pub id: u32,
    pub lineage_id: u64,
    pub fitness_acc: f64,
    pub energy: f64,
    pub alive: bool,
    pub weights: Vec<f64>,
}

impl Snapshot {
    pub fn capture(step: u64, robots: &[RobotState]) -> Self {
        Self {
            step,
            robots: robots
                .iter()
                .map(|r| RobotSnapshot {
                    id: r.id,
                    lineage_id: r.active_genome.lineage_id,
                    fitness_acc: r.fitness_acc,
                    energy: r.energy,
                    alive: r.alive,
                    weights: r.active_genome.weights.clone(),
                })
                .collect(),
        }
    }

    pub fn alive_count(&self) -> usize {
        self.robots.iter().filter(|r| r.alive).count()
    }

    fn alive(&self) -> impl Iterator<Item = &RobotSnapshot> {
        self.robots.iter().filter(|r| r.alive)
    }
}

/// Order statistics over the alive robots' accumulated fitness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessStats {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// `None` when no robot is alive. The median of an even count is the mean of
/// the two middle values.
pub fn fitness_stats(snapshot: &Snapshot) -> Option<FitnessStats> {
    let mut values: Vec<f64> = snapshot.alive().map(|r| r.fitness_acc).collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median =
        if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 };
    Some(FitnessStats {
        mean: values.iter().sum::<f64>() / n as f64,
        median,
        min: values[0],
        max: values[n - 1],
    })
}

/// Mean pairwise genotypic distance over alive robots; `None` below two.
pub fn diversity(snapshot: &Snapshot) -> Option<f64> {
    let alive: Vec<&RobotSnapshot> = snapshot.alive().collect();
    if alive.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..alive.len() {
        for j in i + 1..alive.len() {
            total += weight_distance(&alive[i].weights, &alive[j].weights);
            pairs += 1;
        }
    }
    Some(total / pairs as f64)
}

/// Number of single-linkage clusters: connected components of the graph
/// joining alive robots at genotypic distance <= `threshold`.
pub fn polymorphism(snapshot: &Snapshot, threshold: f64) -> usize {
    assert!(threshold > 0.0, "cluster threshold must be positive");
    let alive: Vec<&RobotSnapshot> = snapshot.alive().collect();
    if alive.is_empty() {
        return 0;
    }
    let mut dsu: UnionFind<usize> = UnionFind::new(alive.len());
    for i in 0..alive.len() {
        for j in i + 1..alive.len() {
            if weight_distance(&alive[i].weights, &alive[j].weights) <= threshold {
                dsu.union(i, j);
            }
        }
    }
    let mut roots: Vec<usize> = (0..alive.len()).map(|i| dsu.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Count of alive robots per lineage; the counts sum to the alive total.
pub fn lineage_census(snapshot: &Snapshot) -> BTreeMap<u64, usize> {
    let mut census = BTreeMap::new();
    for r in snapshot.alive() {
        *census.entry(r.lineage_id).or_insert(0) += 1;
    }
    census
}

/// Default polymorphism threshold: 10% of the mean distance between two
/// uniform-random genomes of this experiment's shape, estimated by sampling.
pub fn estimate_polymorphism_threshold<R: Rng>(
    dimension: usize,
    bounds: WeightBounds,
    rng: &mut R,
) -> f64 {
    let pairs = 256;
    let mut total = 0.0;
    for _ in 0..pairs {
        let a = Genome::random(dimension, bounds, 0, 0, rng);
        let b = Genome::random(dimension, bounds, 0, 0, rng);
        total += a.distance(&b);
    }
    0.1 * (total / pairs as f64)
}

fn weight_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// The fixed CSV header for the metrics time series.
pub const CSV_HEADER: &str =
    "step,alive,fitness_mean,fitness_median,fitness_min,fitness_max,diversity,lineages,clusters";

/// One CSV row. Fitness cells are left empty when the experiment defines no
/// task (no fitness exists anywhere in such runs) or when no robot is alive;
/// diversity is empty below two alive robots.
pub fn csv_row(
    snapshot: &Snapshot,
    threshold: f64,
    task_defines_fitness: bool,
) -> String {
    let alive = snapshot.alive_count();
    let stats = if task_defines_fitness { fitness_stats(snapshot) } else { None };
    let (mean, median, min, max) = match stats {
        Some(s) => (fmt(s.mean), fmt(s.median), fmt(s.min), fmt(s.max)),
        None => (String::new(), String::new(), String::new(), String::new()),
    };
    let div = diversity(snapshot).map(fmt).unwrap_or_default();
    let lineages = lineage_census(snapshot).len();
    let clusters = polymorphism(snapshot, threshold);
    format!(
        "{},{},{},{},{},{},{},{},{}",
        snapshot.step, alive, mean, median, min, max, div, lineages, clusters
    )
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Two-sided Mann-Whitney U test for two independent samples.
///
/// Uses the exact null distribution (computed by dynamic programming over
/// rank arrangements) when both samples are small and tie-free, and the
/// normal approximation with tie correction otherwise. Returns `(U, p)`.
pub fn mann_whitney_u(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = ys.len();
    assert!(n > 0 && m > 0, "both samples must be nonempty");

    // U statistic for xs, counting ties as half.
    let mut u = 0.0;
    let mut has_ties = false;
    for x in xs {
        for y in ys {
            match x.total_cmp(y) {
                std::cmp::Ordering::Greater => u += 1.0,
                std::cmp::Ordering::Equal => {
                    u += 0.5;
                    has_ties = true;
                }
                std::cmp::Ordering::Less => {}
            }
        }
    }

    if !has_ties && n <= 12 && m <= 12 {
        let p = exact_two_sided_p(n, m, u as usize);
        return (u, p);
    }

    // Normal approximation with tie correction and continuity correction.
    let nm = (n * m) as f64;
    let total = (n + m) as f64;
    let mean = nm / 2.0;
    let mut pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = nm / 12.0 * (total + 1.0 - tie_term / (total * (total - 1.0)));
    if var <= 0.0 {
        return (u, 1.0); // all observations identical
    }
    let z = (u - mean).abs() - 0.5;
    let z = z.max(0.0) / var.sqrt();
    (u, 2.0 * normal_sf(z))
}

/// Exact two-sided p-value: 2 * P(U <= min(u, nm - u)) under the null, via
/// the standard count recurrence c(n, m, u) = c(n-1, m, u-m) + c(n, m-1, u).
fn exact_two_sided_p(n: usize, m: usize, u: usize) -> f64 {
    let max_u = n * m;
    // counts[i][j][v] = number of rank arrangements of i xs and j ys with U = v
    let mut counts = vec![vec![vec![0.0f64; max_u + 1]; m + 1]; n + 1];
    for row in counts.iter_mut().take(n + 1) {
        for cell in row.iter_mut().take(m + 1) {
            cell[0] = 1.0;
        }
    }
    for i in 1..=n {
        for j in 1..=m {
            for v in 1..=i * j {
                let a = if v >= j { counts[i - 1][j][v - j] } else { 0.0 };
                let b = counts[i][j - 1][v];
                counts[i][j][v] = a + b;
            }
        }
    }
    let total: f64 = counts[n][m][..=max_u].iter().sum();
    let tail = u.min(max_u - u);
    let cdf: f64 = counts[n][m][..=tail].iter().sum();
    (2.0 * cdf / total).min(1.0)
}

/// Standard normal survival function via erfc.
fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Abramowitz & Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erfc(x: f64) -> f64 {
    let sign_negative = x < 0.0;
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-x * x).exp();
    if sign_negative {
        1.0 + erf
    } else {
        1.0 - erf
    }
}
