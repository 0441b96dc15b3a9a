//! Synthetic line drawings, the three cutting schemes and scrambling.

mod cut;
mod pattern;

pub use cut::{cut_irregular, cut_polygonal, cut_square, IrregularParams};
pub use pattern::{PatternKind, PolygonPattern};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LineSegment, PieceShape, Point2, Pose, RotationSet};

/// Minimum generated line length as a fraction of the canvas diagonal.
pub const MIN_LINE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub lines: Vec<LineSegment>,
    pub category_count: u32,
}

impl LineSet {
    pub fn total_length(&self) -> f64 {
        self.lines.iter().map(LineSegment::length).sum()
    }

    pub fn diagonal(&self) -> f64 {
        self.canvas_width.hypot(self.canvas_height)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub id: u32,
    pub shape: PieceShape,
    /// Line segments in piece-local coordinates, clipped to the shape.
    pub lines: Vec<LineSegment>,
    /// Evidence weight used to pick the anchor; the line count.
    pub anchor_hint: f64,
}

impl Piece {
    pub fn new(id: u32, shape: PieceShape, lines: Vec<LineSegment>) -> Self {
        let anchor_hint = lines.len() as f64;
        Piece {
            id,
            shape,
            lines,
            anchor_hint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutScheme {
    Square { rows: u32, cols: u32 },
    Polygonal { pattern: PolygonPattern },
    Irregular { seed: u64, rows: u32, cols: u32 },
}

impl CutScheme {
    /// Rows and columns of the underlying cell lattice.
    pub fn cells(&self) -> (u32, u32) {
        match *self {
            CutScheme::Square { rows, cols } | CutScheme::Irregular { rows, cols, .. } => (rows, cols),
            CutScheme::Polygonal { pattern } => (pattern.rows, pattern.cols),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Puzzle {
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub category_count: u32,
    pub grid_step: f64,
    pub rotations: RotationSet,
    pub cut: CutScheme,
    pub pieces: Vec<Piece>,
    /// Hidden solution; absent when the puzzle was loaded for solving.
    pub ground_truth: Option<BTreeMap<u32, Pose>>,
}

impl Puzzle {
    pub fn with_rotations(mut self, rotations: RotationSet) -> Self {
        self.rotations = rotations;
        self
    }

    pub fn piece(&self, id: u32) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    pub fn truth(&self) -> Result<&BTreeMap<u32, Pose>> {
        self.ground_truth
            .as_ref()
            .ok_or_else(|| Error::Puzzle("puzzle carries no ground truth".into()))
    }

    pub fn without_ground_truth(mut self) -> Self {
        self.ground_truth = None;
        self
    }

    pub fn is_square_cut(&self) -> bool {
        self.pieces.iter().all(|p| p.shape.is_square())
    }
}

/// Random straight lines with endpoints uniform over the canvas.
pub fn generate_lines(width: f64, height: f64, n_lines: usize, n_categories: u32, seed: u64) -> Result<LineSet> {
    if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
        return Err(Error::Config(format!("canvas must have positive area, got {width}x{height}")));
    }
    if n_lines == 0 || n_categories == 0 {
        return Err(Error::Config("need at least one line and one category".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_len = MIN_LINE_FRACTION * width.hypot(height);
    let mut lines = Vec::with_capacity(n_lines);
    while lines.len() < n_lines {
        let a = Point2::new(rng.gen_range(0.0..=width), rng.gen_range(0.0..=height));
        let b = Point2::new(rng.gen_range(0.0..=width), rng.gen_range(0.0..=height));
        if a.dist(b) < min_len {
            continue;
        }
        let category = rng.gen_range(0..n_categories);
        lines.push(LineSegment::new(a, b, category)?);
    }
    Ok(LineSet {
        canvas_width: width,
        canvas_height: height,
        lines,
        category_count: n_categories,
    })
}

/// Shuffle piece order, renumber ids and re-express every piece under a random
/// rotation from the puzzle's rotation set. Ground truth is updated so that it
/// still describes the solution.
pub fn scramble(puzzle: &Puzzle, seed: u64) -> Puzzle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..puzzle.pieces.len()).collect();
    order.shuffle(&mut rng);
    let rs = puzzle.rotations;
    let mut pieces = Vec::with_capacity(order.len());
    let mut truth = puzzle.ground_truth.as_ref().map(|_| BTreeMap::new());
    for (new_id, &old) in order.iter().enumerate() {
        let src = &puzzle.pieces[old];
        let spin = if rs.count() > 1 { rng.gen_range(0..rs.count()) } else { 0 };
        let q = rs.quarter_turns(spin);
        let lines = src.lines.iter().map(|l| l.transformed(q, Point2::ORIGIN)).collect();
        pieces.push(Piece {
            id: new_id as u32,
            shape: src.shape.rotated(q),
            lines,
            anchor_hint: src.anchor_hint,
        });
        if let (Some(t), Some(gt)) = (truth.as_mut(), puzzle.ground_truth.as_ref()) {
            if let Some(pose) = gt.get(&src.id) {
                t.insert(
                    new_id as u32,
                    Pose::new(pose.position, rs.compose(pose.rotation, rs.inverse(spin))),
                );
            }
        }
    }
    Puzzle {
        pieces,
        ground_truth: truth,
        ..puzzle.clone()
    }
}

/// Piece whose shape, given in local coordinates, sits at `origin` on the canvas;
/// the source lines are clipped to it.
pub(crate) fn carve_piece(id: u32, shape: PieceShape, origin: Point2, source: &LineSet) -> Piece {
    let (lo, hi) = shape.bbox();
    let mut lines = Vec::new();
    for l in &source.lines {
        let a = l.start - origin;
        let b = l.end - origin;
        if a.x.max(b.x) < lo.x || a.x.min(b.x) > hi.x || a.y.max(b.y) < lo.y || a.y.min(b.y) > hi.y {
            continue;
        }
        let d = b - a;
        for (t0, t1) in shape.clip_segment(a, b) {
            let (p, q) = (a + d * t0, a + d * t1);
            if p.dist(q) <= 1e-9 * source.diagonal() {
                continue;
            }
            if let Ok(mut seg) = LineSegment::new(p, q, l.category) {
                seg.angle = l.angle;
                lines.push(seg);
            }
        }
    }
    Piece::new(id, shape, lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_category_lines() {
        let ls = generate_lines(1000.0, 1000.0, 50, 1, 7).unwrap();
        assert_eq!(ls.lines.len(), 50);
        assert!(ls.lines.iter().all(|l| l.category == 0));
    }

    #[test]
    fn five_categories_and_min_length() {
        let ls = generate_lines(1000.0, 1000.0, 50, 5, 7).unwrap();
        assert!(ls.lines.iter().all(|l| l.category < 5));
        assert!(ls.lines.iter().any(|l| l.category > 0));
        let min = MIN_LINE_FRACTION * ls.diagonal();
        assert!(ls.lines.iter().all(|l| l.length() >= min));
    }

    #[test]
    fn minimal_instance_inside_canvas() {
        let ls = generate_lines(100.0, 100.0, 1, 1, 0).unwrap();
        assert_eq!(ls.lines.len(), 1);
        for p in ls.lines[0].endpoints() {
            assert!((0.0..=100.0).contains(&p.x) && (0.0..=100.0).contains(&p.y));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            generate_lines(500.0, 300.0, 20, 3, 42).unwrap(),
            generate_lines(500.0, 300.0, 20, 3, 42).unwrap()
        );
    }

    #[test]
    fn zero_area_canvas_rejected() {
        assert!(generate_lines(0.0, 100.0, 5, 1, 0).is_err());
        assert!(generate_lines(100.0, 100.0, 0, 1, 0).is_err());
    }

    #[test]
    fn scramble_without_rotations_only_permutes() {
        let ls = generate_lines(300.0, 300.0, 10, 1, 1).unwrap();
        let p = cut_square(&ls, 3, 3).unwrap().with_rotations(RotationSet::FIXED);
        let s = scramble(&p, 5);
        let truth = s.ground_truth.as_ref().unwrap();
        assert!(truth.values().all(|pose| pose.rotation == 0));
        let mut before: Vec<usize> = p.pieces.iter().map(|x| x.lines.len()).collect();
        let mut after: Vec<usize> = s.pieces.iter().map(|x| x.lines.len()).collect();
        before.sort();
        after.sort();
        assert_eq!(before, after);
        assert_eq!(s, scramble(&p, 5));
    }
}
