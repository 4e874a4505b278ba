//! Discrete-time 2D world: differential-drive kinematics, ray-cast proximity
//! sensing, food items, and range queries over the robot population.
//!
//! All per-tick queries (sensing, neighbourhoods, collision) read a snapshot
//! of the previous tick's poses, so the update order of robots within a tick
//! cannot influence the outcome.

pub mod geometry;
pub mod grid;

use crate::genome::Genome;
use geometry::{point_segment_distance, ray_circle, ray_segment, wrap_angle, Circle, Segment, Vec2};
use grid::PoseGrid;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Position and heading of one robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

/// Everything physical about the world. All dimensions are metres and
/// seconds; none of them is hard-coded anywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub width: f64,
    pub height: f64,
    /// Extra wall segments as [ax, ay, bx, by]; the rectangular boundary is
    /// always present and does not need to be listed.
    pub walls: Vec<[f64; 4]>,
    /// Circular obstacles as [cx, cy, radius].
    pub obstacles: Vec<[f64; 3]>,
    pub food_count: usize,
    pub food_radius: f64,
    /// Light source position for phototaxis, as [x, y].
    pub light: Option<[f64; 2]>,
    /// Seconds per simulation step.
    pub dt: f64,
    pub robot_radius: f64,
    /// Top wheel speed in m/s; commands are in [-1, 1] of this.
    pub max_speed: f64,
    pub sensor_count: usize,
    pub sensor_range: f64,
    /// Genome transmission range for proximity mating.
    pub broadcast_range: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        // e-puck-like scale, consistent with the platforms this models.
        Self {
            width: 20.0,
            height: 20.0,
            walls: Vec::new(),
            obstacles: Vec::new(),
            food_count: 0,
            food_radius: 0.1,
            light: None,
            dt: 0.1,
            robot_radius: 0.06,
            max_speed: 0.3,
            sensor_count: 8,
            sensor_range: 1.0,
            broadcast_range: 1.0,
        }
    }
}

impl WorldConfig {
    pub fn light_position(&self) -> Option<Vec2> {
        self.light.map(|[x, y]| Vec2::new(x, y))
    }

    pub fn arena_diagonal(&self) -> f64 {
        (self.width * self.width + self.height * self.height).sqrt()
    }

    pub fn grid_cell_size(&self) -> f64 {
        self.sensor_range.max(self.broadcast_range)
    }
}

/// One robot as the simulation sees it.
///
/// `energy` only matters in the no-task mode; `fitness_acc` accumulates over
/// the current evaluation window and is reset to zero at every replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: u32,
    pub pose: Pose,
    pub active_genome: Genome,
    pub fitness_acc: f64,
    pub energy: f64,
    pub steps_since_replacement: u64,
    pub alive: bool,
}

/// Immutable static geometry: the boundary rectangle, extra walls, and
/// obstacles.
#[derive(Debug, Clone)]
pub struct StaticGeometry {
    pub width: f64,
    pub height: f64,
    segments: Vec<Segment>,
    obstacles: Vec<Circle>,
}

impl StaticGeometry {
    pub fn from_config(cfg: &WorldConfig) -> Self {
        let (w, h) = (cfg.width, cfg.height);
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(w, 0.0),
            Vec2::new(w, h),
            Vec2::new(0.0, h),
        ];
        let mut segments: Vec<Segment> = (0..4)
            .map(|i| Segment { a: corners[i], b: corners[(i + 1) % 4] })
            .collect();
        segments.extend(cfg.walls.iter().map(|&[ax, ay, bx, by]| Segment {
            a: Vec2::new(ax, ay),
            b: Vec2::new(bx, by),
        }));
        let obstacles = cfg
            .obstacles
            .iter()
            .map(|&[x, y, r]| Circle { center: Vec2::new(x, y), radius: r })
            .collect();
        Self { width: w, height: h, segments, obstacles }
    }

    /// Distance to the nearest static hit along a unit-direction ray, or
    /// infinity.
    pub fn raycast(&self, origin: Vec2, dir: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for seg in &self.segments {
            if let Some(t) = ray_segment(origin, dir, seg) {
                best = best.min(t);
            }
        }
        for c in &self.obstacles {
            if let Some(t) = ray_circle(origin, dir, c) {
                best = best.min(t);
            }
        }
        best
    }

    /// Would a robot body (circle) at `center` intersect static geometry or
    /// leave the arena?
    pub fn collides_circle(&self, center: Vec2, radius: f64) -> bool {
        if center.x < radius
            || center.y < radius
            || center.x > self.width - radius
            || center.y > self.height - radius
        {
            return true;
        }
        // Skip the boundary segments (first 4): the bounds check covers them.
        if self.segments[4..].iter().any(|s| point_segment_distance(center, s) < radius) {
            return true;
        }
        self.obstacles.iter().any(|c| center.distance(c.center) < radius + c.radius)
    }
}

/// Differential-drive Euler step with the cancel-translation collision rule.
///
/// Wheel commands are fractions of `max_speed` in [-1, 1]. On collision the
/// translation for this step is dropped but the rotation is kept, so a robot
/// pushed against a wall can always turn away. Robot bodies are tested
/// against the pose snapshot in `grid`; if two robots stepped into overlap
/// simultaneously, moves that increase their distance are still allowed.
pub fn step_kinematics(
    pose: Pose,
    command: (f64, f64),
    cfg: &WorldConfig,
    geom: &StaticGeometry,
    grid: &PoseGrid,
    self_id: u32,
) -> Pose {
    let (vl, vr) = (command.0.clamp(-1.0, 1.0), command.1.clamp(-1.0, 1.0));
    let v = cfg.max_speed * (vl + vr) / 2.0;
    let omega = cfg.max_speed * (vr - vl) / (2.0 * cfg.robot_radius);
    let heading = wrap_angle(pose.heading + omega * cfg.dt);
    if v == 0.0 {
        return Pose { position: pose.position, heading };
    }
    let candidate = pose.position + Vec2::from_angle(pose.heading).scale(v * cfg.dt);
    let blocked = geom.collides_circle(candidate, cfg.robot_radius)
        || grid.candidates(pose.position, self_id).into_iter().any(|other| {
            let q = grid.position(other);
            let after = candidate.distance(q);
            let before = pose.position.distance(q);
            after < 2.0 * cfg.robot_radius && after < before
        });
    Pose { position: if blocked { pose.position } else { candidate }, heading }
}

/// Evenly spaced ray offsets over [-pi/2, +pi/2] relative to the heading.
pub fn ray_offsets(sensor_count: usize) -> Vec<f64> {
    assert!(sensor_count >= 1);
    if sensor_count == 1 {
        return vec![0.0];
    }
    (0..sensor_count)
        .map(|i| {
            -std::f64::consts::FRAC_PI_2
                + i as f64 * std::f64::consts::PI / (sensor_count - 1) as f64
        })
        .collect()
}

/// Proximity readings for one robot: 1 at contact, 0 at or beyond
/// `sensor_range`. Rays see walls, obstacles, and other robot bodies
/// (dead robots still occupy space).
pub fn proximity_readings(
    pose: Pose,
    cfg: &WorldConfig,
    geom: &StaticGeometry,
    grid: &PoseGrid,
    self_id: u32,
    out: &mut Vec<f64>,
) {
    out.clear();
    let origin = pose.position;
    let nearby = grid.candidates(origin, self_id);
    for offset in ray_offsets(cfg.sensor_count) {
        let dir = Vec2::from_angle(pose.heading + offset);
        let mut dist = geom.raycast(origin, dir);
        for &other in &nearby {
            let body = Circle { center: grid.position(other), radius: cfg.robot_radius };
            if let Some(t) = ray_circle(origin, dir, &body) {
                dist = dist.min(t);
            }
        }
        let reading = if dist <= cfg.sensor_range { 1.0 - dist / cfg.sensor_range } else { 0.0 };
        out.push(reading.clamp(0.0, 1.0));
    }
}

/// Ids of all other alive robots within `range` (centre-to-centre, inclusive).
pub fn neighbours(grid: &PoseGrid, alive: &[bool], robot: u32, range: f64) -> Vec<u32> {
    let center = grid.position(robot);
    grid.in_range(center, range, robot)
        .into_iter()
        .filter(|&id| alive[id as usize])
        .collect()
}

/// Food items with immediate respawn, keeping the item count constant.
#[derive(Debug, Clone)]
pub struct FoodField {
    pub items: Vec<Vec2>,
}

impl FoodField {
    pub fn empty() -> Self {
        Self { items: Vec::new() }
    }

    pub fn place<R: Rng>(cfg: &WorldConfig, geom: &StaticGeometry, rng: &mut R) -> Self {
        let items =
            (0..cfg.food_count).map(|_| free_point(cfg.food_radius, geom, rng)).collect();
        Self { items }
    }

    /// Consume every item whose centre lies within `reach` of `center`;
    /// each one respawns uniformly at random in free space. Returns the
    /// number eaten.
    pub fn consume<R: Rng>(
        &mut self,
        center: Vec2,
        reach: f64,
        cfg: &WorldConfig,
        geom: &StaticGeometry,
        rng: &mut R,
    ) -> usize {
        let mut eaten = 0;
        for item in &mut self.items {
            if item.distance(center) <= reach {
                eaten += 1;
                *item = free_point(cfg.food_radius, geom, rng);
            }
        }
        eaten
    }

    pub fn nearest(&self, p: Vec2) -> Option<(Vec2, f64)> {
        self.items
            .iter()
            .map(|&item| (item, item.distance(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Uniform sample of a point with `clearance` from walls and obstacles.
fn free_point<R: Rng>(clearance: f64, geom: &StaticGeometry, rng: &mut R) -> Vec2 {
    for _ in 0..10_000 {
        let p = Vec2::new(
            rng.random_range(clearance..=geom.width - clearance),
            rng.random_range(clearance..=geom.height - clearance),
        );
        if !geom.collides_circle(p, clearance) {
            return p;
        }
    }
    panic!("no free space left to place an item; arena is over-filled");
}

/// Non-overlapping uniform-random poses for the initial population.
///
/// Fails (as a configuration problem) if the arena cannot fit the requested
/// number of robots.
pub fn place_robots<R: Rng>(
    n: usize,
    cfg: &WorldConfig,
    geom: &StaticGeometry,
    rng: &mut R,
) -> Result<Vec<Pose>, String> {
    let mut poses: Vec<Pose> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut placed = false;
        for _ in 0..10_000 {
            let p = Vec2::new(
                rng.random_range(cfg.robot_radius..=cfg.width - cfg.robot_radius),
                rng.random_range(cfg.robot_radius..=cfg.height - cfg.robot_radius),
            );
            if geom.collides_circle(p, cfg.robot_radius) {
                continue;
            }
            if poses.iter().any(|q| q.position.distance(p) < 2.0 * cfg.robot_radius) {
                continue;
            }
            let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            poses.push(Pose { position: p, heading });
            placed = true;
            break;
        }
        if !placed {
            return Err(format!("could not place {n} non-overlapping robots in the arena"));
        }
    }
    Ok(poses)
}
