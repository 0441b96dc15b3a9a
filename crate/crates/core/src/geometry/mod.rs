//! Planar primitives, quarter-turn rigid transforms and the classification of
//! relative piece poses into adjacent, overlapping and neutral regions.

mod region;
mod shape;

pub use region::{
    classify_region, contact_length, contact_segments, contact_segments_placed, overlap_area, overlap_area_placed, ContactModel,
    GeometryConfig, RegionLabel,
};
pub use shape::{Edge, Mask, PieceShape, Polygon};

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Exact rotation by `quarter_turns` multiples of 90 degrees about the origin.
    pub fn rotate_quarter(self, quarter_turns: u32) -> Point2 {
        match quarter_turns % 4 {
            0 => self,
            1 => Point2::new(-self.y, self.x),
            2 => Point2::new(-self.x, -self.y),
            _ => Point2::new(self.y, -self.x),
        }
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Undirected orientation of `d`, wrapped to `[0, π)`.
pub fn undirected_angle(d: Point2) -> f64 {
    let a = d.y.atan2(d.x).rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// Smallest difference between two undirected orientations, in `[0, π/2]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// A straight annotated stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub start: Point2,
    pub end: Point2,
    /// Undirected orientation in `[0, π)`.
    pub angle: f64,
    pub category: u32,
}

impl LineSegment {
    pub fn new(start: Point2, end: Point2, category: u32) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::Geometry(format!(
                "non-finite segment endpoint {start} - {end}"
            )));
        }
        if start == end {
            return Err(Error::Geometry(format!("degenerate segment at {start}")));
        }
        Ok(LineSegment {
            start,
            end,
            angle: undirected_angle(end - start),
            category,
        })
    }

    /// Segment carrying a stored orientation, e.g. inherited from the source
    /// line it was clipped from.
    pub fn with_angle(start: Point2, end: Point2, angle: f64, category: u32) -> Result<Self> {
        let mut seg = LineSegment::new(start, end, category)?;
        if !(0.0..PI).contains(&angle) {
            return Err(Error::Geometry(format!("angle {angle} outside [0, pi)")));
        }
        seg.angle = angle;
        Ok(seg)
    }

    pub fn length(&self) -> f64 {
        self.start.dist(self.end)
    }

    pub fn endpoints(&self) -> [Point2; 2] {
        [self.start, self.end]
    }

    /// Rotate about the origin by quarter turns, then translate.
    pub fn transformed(&self, quarter_turns: u32, offset: Point2) -> LineSegment {
        let angle = (self.angle + f64::from(quarter_turns % 4) * PI / 2.0).rem_euclid(PI);
        LineSegment {
            start: self.start.rotate_quarter(quarter_turns) + offset,
            end: self.end.rotate_quarter(quarter_turns) + offset,
            angle: if angle >= PI { 0.0 } else { angle },
            category: self.category,
        }
    }
}

/// The discrete rotation set: `count` equally spaced angles.
///
/// Only counts dividing a full quarter-turn cycle are supported, so every
/// rotation maps the piece lattice onto itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct RotationSet(u32);

impl RotationSet {
    pub const FIXED: RotationSet = RotationSet(1);
    pub const QUARTER_TURNS: RotationSet = RotationSet(4);

    pub fn new(count: u32) -> Result<Self> {
        match count {
            1 | 2 | 4 => Ok(RotationSet(count)),
            _ => Err(Error::Config(format!(
                "rotation count must be 1, 2 or 4, got {count}"
            ))),
        }
    }

    pub fn count(self) -> u32 {
        self.0
    }

    pub fn angle(self, index: u32) -> f64 {
        f64::from(index % self.0) * 2.0 * PI / f64::from(self.0)
    }

    pub fn quarter_turns(self, index: u32) -> u32 {
        (index % self.0) * (4 / self.0)
    }

    pub fn compose(self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }

    pub fn inverse(self, a: u32) -> u32 {
        (self.0 - a % self.0) % self.0
    }

    /// Circular distance between two rotation indices.
    pub fn distance(self, a: u32, b: u32) -> u32 {
        let d = (a + self.0 - b % self.0) % self.0;
        d.min(self.0 - d)
    }
}

impl TryFrom<u32> for RotationSet {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        RotationSet::new(v)
    }
}

impl From<RotationSet> for u32 {
    fn from(r: RotationSet) -> u32 {
        r.0
    }
}

/// Grid step and rotation set shared by every pose of a puzzle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub grid_step: f64,
    pub rotations: RotationSet,
}

impl Lattice {
    pub fn new(grid_step: f64, rotations: RotationSet) -> Result<Self> {
        if !(grid_step.is_finite() && grid_step > 0.0) {
            return Err(Error::Config(format!("grid step must be positive, got {grid_step}")));
        }
        Ok(Lattice { grid_step, rotations })
    }
}

/// Absolute placement of a piece: local point `p` maps to `R(rotation) p + position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    pub rotation: u32,
}

impl Pose {
    pub fn new(position: Point2, rotation: u32) -> Self {
        Pose { position, rotation }
    }

    pub fn identity() -> Self {
        Pose::new(Point2::ORIGIN, 0)
    }

    /// Relative pose of `other` seen from the frame of `self`, snapped to the lattice.
    pub fn relative(&self, other: &Pose, lattice: &Lattice) -> RelativeStrategy {
        let q = lattice.rotations.quarter_turns(self.rotation);
        let d = (other.position - self.position).rotate_quarter((4 - q) % 4) * (1.0 / lattice.grid_step);
        RelativeStrategy {
            dx: d.x.round() as i32,
            dy: d.y.round() as i32,
            d_rotation: lattice
                .rotations
                .compose(other.rotation, lattice.rotations.inverse(self.rotation)),
        }
    }
}

/// Pose of piece `j` relative to piece `i` held at the origin with rotation 0,
/// in whole grid cells and rotation steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelativeStrategy {
    pub dx: i32,
    pub dy: i32,
    pub d_rotation: u32,
}

impl RelativeStrategy {
    pub const ZERO: RelativeStrategy = RelativeStrategy { dx: 0, dy: 0, d_rotation: 0 };

    pub fn new(dx: i32, dy: i32, d_rotation: u32) -> Self {
        RelativeStrategy { dx, dy, d_rotation }
    }

    /// Pose of `i` relative to `j`.
    pub fn inverse(&self, rotations: RotationSet) -> RelativeStrategy {
        let inv = rotations.inverse(self.d_rotation);
        let (dx, dy) = rotate_cells(-self.dx, -self.dy, rotations.quarter_turns(inv));
        RelativeStrategy { dx, dy, d_rotation: inv }
    }

    /// Quarter turns and canvas-unit translation applied to the second piece.
    pub fn placement(&self, lattice: &Lattice) -> (u32, Point2) {
        (
            lattice.rotations.quarter_turns(self.d_rotation),
            Point2::new(f64::from(self.dx), f64::from(self.dy)) * lattice.grid_step,
        )
    }

    pub fn chebyshev(&self) -> i32 {
        self.dx.abs().max(self.dy.abs())
    }
}

/// Exact quarter-turn rotation of an integer cell offset.
pub fn rotate_cells(x: i32, y: i32, quarter_turns: u32) -> (i32, i32) {
    match quarter_turns % 4 {
        0 => (x, y),
        1 => (-y, x),
        2 => (-x, -y),
        _ => (y, -x),
    }
}

/// Apply a pose to a set of piece-local lines.
pub fn transform_lines(lines: &[LineSegment], pose: &Pose, rotations: RotationSet) -> Vec<LineSegment> {
    let q = rotations.quarter_turns(pose.rotation);
    lines.iter().map(|l| l.transformed(q, pose.position)).collect()
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Parameter interval of the segment `a + t (b - a)`, `t ∈ [0, 1]`, lying inside
/// the axis-aligned box, or `None`.
pub fn clip_segment_to_box(a: Point2, b: Point2, min: Point2, max: Point2) -> Option<(f64, f64)> {
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d.x, a.x - min.x),
        (d.x, max.x - a.x),
        (-d.y, a.y - min.y),
        (d.y, max.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 < t1).then_some((t0, t1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> LineSegment {
        LineSegment::new(Point2::new(x0, y0), Point2::new(x1, y1), 0).unwrap()
    }

    #[test]
    fn identity_pose_is_noop() {
        let lines = vec![seg(0.0, 0.0, 1.0, 2.0), seg(-3.0, 1.0, 4.0, 1.5)];
        let out = transform_lines(&lines, &Pose::identity(), RotationSet::QUARTER_TURNS);
        assert_eq!(out, lines);
    }

    #[test]
    fn quarter_turn_about_origin() {
        let out = transform_lines(
            &[seg(0.0, 0.0, 1.0, 0.0)],
            &Pose::new(Point2::ORIGIN, 1),
            RotationSet::QUARTER_TURNS,
        );
        assert!(out[0].start.dist(Point2::new(0.0, 0.0)) < 1e-12);
        assert!(out[0].end.dist(Point2::new(0.0, 1.0)) < 1e-12);
        assert!((out[0].angle - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pure_translation() {
        let out = transform_lines(
            &[seg(0.0, 0.0, 1.0, 0.0)],
            &Pose::new(Point2::new(2.0, 3.0), 0),
            RotationSet::QUARTER_TURNS,
        );
        assert_eq!(out[0].start, Point2::new(2.0, 3.0));
        assert_eq!(out[0].end, Point2::new(3.0, 3.0));
        assert_eq!(out[0].angle, 0.0);
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert!(LineSegment::new(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0), 0).is_err());
        assert!(LineSegment::new(Point2::new(f64::NAN, 1.0), Point2::new(1.0, 1.0), 0).is_err());
    }

    #[test]
    fn rotation_set_only_lattice_preserving_counts() {
        assert!(RotationSet::new(3).is_err());
        assert!(RotationSet::new(8).is_err());
        let r = RotationSet::QUARTER_TURNS;
        assert_eq!(r.distance(0, 3), 1);
        assert_eq!(r.distance(1, 3), 2);
        assert_eq!(RotationSet::new(2).unwrap().quarter_turns(1), 2);
    }

    #[test]
    fn angle_difference_wraps_undirected() {
        assert!((angle_difference(0.01, PI - 0.01) - 0.02).abs() < 1e-12);
        assert!((angle_difference(0.0, PI / 2.0) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn relative_pose_round_trip() {
        let lattice = Lattice::new(2.0, RotationSet::QUARTER_TURNS).unwrap();
        let a = Pose::new(Point2::new(2.0, 4.0), 1);
        let b = Pose::new(Point2::new(6.0, 2.0), 3);
        let g = a.relative(&b, &lattice);
        assert_eq!(g, RelativeStrategy::new(-1, -2, 2));
        assert_eq!(b.relative(&a, &lattice), g.inverse(lattice.rotations));
    }

    proptest! {
        #[test]
        fn transform_is_rigid(
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 2..6),
            rot in 0u32..4, tx in -100.0f64..100.0, ty in -100.0f64..100.0,
        ) {
            let lines: Vec<LineSegment> = pts
                .iter()
                .filter_map(|&(a, b, c, d)| LineSegment::new(Point2::new(a, b), Point2::new(c, d), 1).ok())
                .collect();
            let out = transform_lines(&lines, &Pose::new(Point2::new(tx, ty), rot), RotationSet::QUARTER_TURNS);
            let ends: Vec<Point2> = lines.iter().flat_map(|l| l.endpoints()).collect();
            let moved: Vec<Point2> = out.iter().flat_map(|l| l.endpoints()).collect();
            for i in 0..ends.len() {
                for j in 0..ends.len() {
                    prop_assert!((ends[i].dist(ends[j]) - moved[i].dist(moved[j])).abs() < 1e-9);
                }
            }
            for (l, m) in lines.iter().zip(&out) {
                prop_assert_eq!(l.category, m.category);
                prop_assert!(angle_difference(m.angle, undirected_angle(m.end - m.start)) < 1e-9);
            }
        }

        #[test]
        fn relative_inverse_is_involution(dx in -5i32..=5, dy in -5i32..=5, r in 0u32..4) {
            let rs = RotationSet::QUARTER_TURNS;
            let g = RelativeStrategy::new(dx, dy, r);
            prop_assert_eq!(g.inverse(rs).inverse(rs), g);
        }
    }
}
