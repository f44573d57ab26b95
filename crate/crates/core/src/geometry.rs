//! Planar primitives shared by every metric.
//!
//! All predicates work directly on `f64` coordinates. The orientation test
//! takes the sign of the double-precision cross product with no epsilon, so
//! only an exactly-zero product is reported as collinear.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_squared(other).sqrt()
    }

    /// Same point with the axes exchanged.
    pub fn transposed(&self) -> Point {
        Point::new(self.y, self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn length(&self) -> f64 {
        self.a.distance(&self.b)
    }

    pub fn reversed(&self) -> Segment {
        Segment::new(self.b, self.a)
    }

    pub fn transposed(&self) -> Segment {
        Segment::new(self.a.transposed(), self.b.transposed())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    Collinear,
    CounterClockwise,
}

impl Orientation {
    pub fn value(self) -> i8 {
        match self {
            Orientation::Clockwise => -1,
            Orientation::Collinear => 0,
            Orientation::CounterClockwise => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("zero-length edge at ({x}, {y})")]
    ZeroLength { x: f64, y: f64 },
}

/// Sign of `(b - a) x (c - a)`.
pub fn ccw(a: Point, b: Point, c: Point) -> Orientation {
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if cross > 0.0 {
        Orientation::CounterClockwise
    } else if cross < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

/// The four-orientation crossing predicate.
///
/// Touching configurations (one orientation is zero) satisfy the predicate,
/// which includes two edges meeting at a shared endpoint. Callers that
/// count crossings between graph edges must filter adjacent pairs.
#[inline]
pub fn properly_intersect(s1: &Segment, s2: &Segment) -> bool {
    // branch-free form of the ccw products; the oracle calls this O(|E|²) times
    #[inline(always)]
    fn sign(a: Point, b: Point, c: Point) -> i32 {
        let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        (cross > 0.0) as i32 - (cross < 0.0) as i32
    }
    let d1 = sign(s1.a, s1.b, s2.a) * sign(s1.a, s1.b, s2.b);
    let d2 = sign(s2.a, s2.b, s1.a) * sign(s2.a, s2.b, s1.b);
    (d1 <= 0) & (d2 <= 0)
}

/// Direction of `u - v` from the positive x-axis, in `[0, 2π)`.
pub fn incident_angle(v: Point, u: Point) -> Result<f64, GeometryError> {
    if v == u {
        return Err(GeometryError::ZeroLength { x: v.x, y: v.y });
    }
    let mut angle = (u.y - v.y).atan2(u.x - v.x);
    if angle < 0.0 {
        angle += TAU;
    }
    // A tiny negative angle rounds up to exactly 2π.
    if angle >= TAU {
        angle = 0.0;
    }
    Ok(angle + 0.0)
}

/// Undirected angle between the segment's supporting line and the x-axis,
/// in `[0, π)`.
pub fn axis_angle(s: &Segment) -> Result<f64, GeometryError> {
    if s.is_degenerate() {
        return Err(GeometryError::ZeroLength { x: s.a.x, y: s.a.y });
    }
    Ok(undirected_angle(s.b.x - s.a.x, s.b.y - s.a.y))
}

/// Undirected angle of the direction `(dx, dy)`, folded into `[0, π)`.
pub(crate) fn undirected_angle(dx: f64, dy: f64) -> f64 {
    let mut angle = dy.atan2(dx);
    if angle < 0.0 {
        angle += PI;
    }
    if angle >= PI {
        angle -= PI;
    }
    angle + 0.0
}

/// Acute angle between two lines given by their axis angles in `[0, π)`.
pub fn crossing_angle(theta1: f64, theta2: f64) -> f64 {
    let diff = (theta1 - theta2).abs();
    diff.min(PI - diff)
}

/// Ordinates where `s` crosses the vertical lines `x = x_left` and
/// `x = x_right`.
///
/// Returns `None` unless the segment's x-extent covers the whole strip. An
/// endpoint lying exactly on a boundary counts as crossing it, and the
/// ordinate reported there is that endpoint's own `y`.
pub fn clip_to_strip(s: &Segment, x_left: f64, x_right: f64) -> Option<(f64, f64)> {
    debug_assert!(x_left < x_right);
    let (p, q) = if s.a.x <= s.b.x { (s.a, s.b) } else { (s.b, s.a) };
    if p.x > x_left || q.x < x_right || p.x == q.x {
        return None;
    }
    Some((ordinate_at(p, q, x_left), ordinate_at(p, q, x_right)))
}

/// `y` of the line through `p` and `q` (with `p.x < q.x`) at `x`.
#[inline]
pub(crate) fn ordinate_at(p: Point, q: Point, x: f64) -> f64 {
    if x == p.x {
        p.y
    } else if x == q.x {
        q.y
    } else {
        p.y + (q.y - p.y) * ((x - p.x) / (q.x - p.x))
    }
}
