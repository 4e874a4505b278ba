//! 2D primitives: vectors, segments, circles, and ray intersections.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Wall segment between two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

/// Circular obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Distance along a unit-direction ray to a segment, if it hits.
pub fn ray_segment(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let den = dir.cross(e);
    if den.abs() < 1e-12 {
        return None; // parallel or degenerate; grazing hits are ignored
    }
    let m = seg.a - origin;
    let t = m.cross(e) / den;
    let u = m.cross(dir) / den;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Distance along a unit-direction ray to a circle boundary, if it hits.
/// An origin inside the circle reports distance 0.
pub fn ray_circle(origin: Vec2, dir: Vec2, circle: &Circle) -> Option<f64> {
    let m = origin - circle.center;
    let b = m.dot(dir);
    let c = m.dot(m) - circle.radius * circle.radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    if t >= 0.0 {
        Some(t)
    } else {
        None
    }
}

/// Shortest distance from a point to a segment.
pub fn point_segment_distance(p: Vec2, seg: &Segment) -> f64 {
    let e = seg.b - seg.a;
    let len2 = e.dot(e);
    if len2 < 1e-24 {
        return p.distance(seg.a);
    }
    let t = ((p - seg.a).dot(e) / len2).clamp(0.0, 1.0);
    p.distance(seg.a + e.scale(t))
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t <= -std::f64::consts::PI {
        t += two_pi;
    } else if t > std::f64::consts::PI {
        t -= two_pi;
    }
    t
}
