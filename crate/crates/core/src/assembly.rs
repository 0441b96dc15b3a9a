//! Reading a concrete placement out of a mixed-strategy profile.

use std::collections::BTreeMap;

use crate::geometry::{overlap_area_placed, transform_lines, ContactModel, PieceShape, Point2, Pose, RotationSet};
use crate::puzzle::{LineSet, Piece};
use crate::solver::{MixedStrategyProfile, StrategyGrid};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Placement {
    pub poses: BTreeMap<u32, Pose>,
    pub unplaced: Vec<u32>,
    /// Pieces that could not take their most probable strategy.
    pub conflicts_resolved: usize,
}

impl Placement {
    pub fn from_poses(poses: BTreeMap<u32, Pose>) -> Self {
        Placement {
            poses,
            ..Placement::default()
        }
    }

    pub fn piece_count(&self) -> usize {
        self.poses.len() + self.unplaced.len()
    }
}

/// Whether `b` at `pb` overlaps `a` at `pa` by more than the model tolerates.
pub fn poses_overlap(a: &PieceShape, pa: &Pose, b: &PieceShape, pb: &Pose, rotations: RotationSet, model: &ContactModel) -> bool {
    let qa = rotations.quarter_turns(pa.rotation);
    let qb = rotations.quarter_turns(pb.rotation);
    let back = (4 - qa) % 4;
    let t = (pb.position - pa.position).rotate_quarter(back);
    let q = (qb + back) % 4;
    overlap_area_placed(a, b, q, t) > model.overlap_epsilon(a, b)
}

/// Greedy decoding. Pieces go in order of decreasing confidence (the anchor
/// first); each takes its most probable strategy, or failing that the most
/// probable one that overlaps nothing already placed and still has
/// probability at least `1 / (2c)`. Pieces with no such strategy are left
/// unplaced. Row `i` of the profile belongs to `pieces[i]`.
pub fn decode(profile: &MixedStrategyProfile, grid: &StrategyGrid, pieces: &[Piece], model: &ContactModel) -> Placement {
    assert_eq!(profile.player_count(), pieces.len(), "one profile row per piece");
    let c = profile.strategy_count();
    let floor = 1.0 / (2.0 * c as f64);
    let rotations = grid.lattice().rotations;
    let anchor = profile.anchor().map(|a| a.0);

    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| {
        (Some(b) == anchor)
            .cmp(&(Some(a) == anchor))
            .then(profile.max_probability(b).total_cmp(&profile.max_probability(a)))
            .then(a.cmp(&b))
    });

    let reach = pieces.iter().map(|p| p.shape.reach()).fold(0.0, f64::max);
    let mut placed: Vec<(usize, Pose)> = Vec::new();
    let mut out = Placement::default();
    for i in order {
        let free = |pose: &Pose| {
            placed.iter().all(|(j, pj)| {
                pose.position.dist(pj.position) >= 2.0 * reach
                    || !poses_overlap(&pieces[*j].shape, pj, &pieces[i].shape, pose, rotations, model)
            })
        };
        let first = profile.argmax(i);
        let chosen = if free(&grid.pose(first)) {
            Some(first)
        } else {
            out.conflicts_resolved += 1;
            let row = profile.row(i);
            let mut cands: Vec<usize> = (0..c).filter(|&h| h != first && row[h] >= floor).collect();
            cands.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            cands.into_iter().find(|&h| free(&grid.pose(h)))
        };
        match chosen {
            Some(h) => {
                let pose = grid.pose(h);
                placed.push((i, pose));
                out.poses.insert(pieces[i].id, pose);
            }
            None => out.unplaced.push(pieces[i].id),
        }
    }
    out.unplaced.sort_unstable();
    out
}

/// All placed lines in one drawing, shifted so the placed pieces' bounding
/// box starts at the origin.
pub fn compose_lines(placement: &Placement, pieces: &[Piece], rotations: RotationSet) -> LineSet {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut lines = Vec::new();
    let mut category_count = 0;
    for p in pieces {
        let Some(pose) = placement.poses.get(&p.id) else { continue };
        let (a, b) = p.shape.rotated(rotations.quarter_turns(pose.rotation)).bbox();
        lo = Point2::new(lo.x.min(a.x + pose.position.x), lo.y.min(a.y + pose.position.y));
        hi = Point2::new(hi.x.max(b.x + pose.position.x), hi.y.max(b.y + pose.position.y));
        lines.extend(transform_lines(&p.lines, pose, rotations));
        category_count = p.lines.iter().map(|l| l.category + 1).fold(category_count, u32::max);
    }
    if lines.is_empty() && !lo.x.is_finite() {
        return LineSet {
            canvas_width: 0.0,
            canvas_height: 0.0,
            lines,
            category_count,
        };
    }
    let lines = lines.iter().map(|l| l.transformed(0, Point2::ORIGIN - lo)).collect();
    LineSet {
        canvas_width: hi.x - lo.x,
        canvas_height: hi.y - lo.y,
        lines,
        category_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GeometryConfig, Lattice};
    use crate::puzzle::{cut_square, generate_lines};

    fn three_squares() -> (Vec<Piece>, StrategyGrid, ContactModel) {
        let pieces: Vec<Piece> = (0..3)
            .map(|i| Piece::new(i, PieceShape::square(1.0).unwrap(), vec![]))
            .collect();
        let grid = StrategyGrid::centered(2, 2, Lattice::new(1.0, RotationSet::FIXED).unwrap()).unwrap();
        let model = ContactModel::for_shapes(&GeometryConfig::default(), pieces.iter().map(|p| &p.shape));
        (pieces, grid, model)
    }

    #[test]
    fn distinct_vertices_are_kept() {
        let (pieces, grid, model) = three_squares();
        let hs = [grid.center(), grid.index((1, 0), 0).unwrap(), grid.index((0, -2), 0).unwrap()];
        let x = MixedStrategyProfile::vertices(grid.strategy_count(), &hs, Some((0, hs[0]))).unwrap();
        let p = decode(&x, &grid, &pieces, &model);
        assert_eq!(p.conflicts_resolved, 0);
        assert!(p.unplaced.is_empty());
        for (i, h) in hs.iter().enumerate() {
            assert_eq!(p.poses[&(i as u32)], grid.pose(*h));
        }
    }

    #[test]
    fn confident_piece_wins_a_shared_cell() {
        let (pieces, grid, model) = three_squares();
        let c = grid.strategy_count();
        let a = grid.index((1, 0), 0).unwrap();
        let b = grid.index((-1, 0), 0).unwrap();
        let mut rows = vec![vec![0.0; c]; 3];
        rows[0][grid.center()] = 1.0;
        // Piece 1 prefers `a` with 0.3, piece 2 prefers `a` with 0.7, then `b`.
        let rest = |r: &mut Vec<f64>, spent: f64| {
            let k = r.iter().filter(|&&v| v == 0.0).count() as f64;
            let fill = (1.0 - spent) / k;
            r.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = fill);
        };
        rows[1][a] = 0.3;
        rest(&mut rows[1], 0.3);
        rows[2][a] = 0.7;
        rows[2][b] = 0.2;
        rest(&mut rows[2], 0.9);
        let x = MixedStrategyProfile::from_rows(&rows, Some((0, grid.center()))).unwrap();
        let p = decode(&x, &grid, &pieces, &model);
        assert_eq!(p.poses[&2], grid.pose(a));
        assert_eq!(p.conflicts_resolved, 1);
        // Piece 1's remaining mass is uniform; the lowest free index wins.
        let expected = (0..c).find(|&h| h != a && h != grid.center()).unwrap();
        assert_eq!(p.poses[&1], grid.pose(expected));
    }

    #[test]
    fn uniform_row_below_floor_is_unplaced() {
        let pieces: Vec<Piece> = (0..2)
            .map(|i| Piece::new(i, PieceShape::square(1.0).unwrap(), vec![]))
            .collect();
        let grid = StrategyGrid::centered(0, 0, Lattice::new(1.0, RotationSet::FIXED).unwrap()).unwrap();
        let model = ContactModel::for_shapes(&GeometryConfig::default(), pieces.iter().map(|p| &p.shape));
        let x = MixedStrategyProfile::vertices(1, &[0, 0], Some((0, 0))).unwrap();
        let p = decode(&x, &grid, &pieces, &model);
        assert_eq!(p.unplaced, vec![1]);
        assert_eq!(p.piece_count(), 2);
    }

    #[test]
    fn compose_ground_truth_restores_source() {
        let ls = generate_lines(300.0, 300.0, 20, 2, 8).unwrap();
        let puzzle = cut_square(&ls, 3, 3).unwrap();
        let placement = Placement::from_poses(puzzle.truth().unwrap().clone());
        let out = compose_lines(&placement, &puzzle.pieces, puzzle.rotations);
        assert!((out.canvas_width - 300.0).abs() < 1e-9 && (out.canvas_height - 300.0).abs() < 1e-9);
        assert!((out.total_length() - ls.total_length()).abs() < 1e-6);
        for l in &out.lines {
            let on_source = ls.lines.iter().any(|s| {
                crate::geometry::point_segment_distance(l.start, s.start, s.end) < 1e-6
                    && crate::geometry::point_segment_distance(l.end, s.start, s.end) < 1e-6
            });
            assert!(on_source);
        }
        let empty = compose_lines(&Placement::default(), &puzzle.pieces, puzzle.rotations);
        assert!(empty.lines.is_empty());
        let one = Placement::from_poses([(4, Pose::new(Point2::new(10.0, 0.0), 1))].into());
        let single = compose_lines(&one, &puzzle.pieces, puzzle.rotations);
        assert_eq!(single.lines.len(), puzzle.piece(4).unwrap().lines.len());
    }
}
