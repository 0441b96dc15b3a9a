use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{carve_piece, CutScheme, LineSet, PolygonPattern, Puzzle};
use crate::error::{Error, Result};
use crate::geometry::{Mask, PieceShape, Point2, Polygon, Pose, RotationSet};

fn cell_step(ls: &LineSet, rows: u32, cols: u32) -> Result<f64> {
    if rows == 0 || cols == 0 {
        return Err(Error::Puzzle("rows and cols must be at least 1".into()));
    }
    let sx = ls.canvas_width / f64::from(cols);
    let sy = ls.canvas_height / f64::from(rows);
    if (sx - sy).abs() > 1e-9 * sx.max(sy) {
        return Err(Error::Puzzle(format!(
            "a {}x{} canvas does not split into square cells over {cols}x{rows}",
            ls.canvas_width, ls.canvas_height
        )));
    }
    Ok(sx)
}

fn assemble(ls: &LineSet, step: f64, cut: CutScheme, parts: Vec<(PieceShape, Point2)>) -> Puzzle {
    let mut pieces = Vec::with_capacity(parts.len());
    let mut truth = BTreeMap::new();
    for (id, (shape, origin)) in parts.into_iter().enumerate() {
        pieces.push(carve_piece(id as u32, shape, origin, ls));
        truth.insert(id as u32, Pose::new(origin, 0));
    }
    Puzzle {
        canvas_width: ls.canvas_width,
        canvas_height: ls.canvas_height,
        category_count: ls.category_count,
        grid_step: step,
        rotations: RotationSet::QUARTER_TURNS,
        cut,
        pieces,
        ground_truth: Some(truth),
    }
}

fn cell_center(step: f64, col: i32, row: i32) -> Point2 {
    Point2::new((f64::from(col) + 0.5) * step, (f64::from(row) + 0.5) * step)
}

/// Even division of the canvas into `rows × cols` square cells.
pub fn cut_square(ls: &LineSet, rows: u32, cols: u32) -> Result<Puzzle> {
    let step = cell_step(ls, rows, cols)?;
    let mut parts = Vec::with_capacity((rows * cols) as usize);
    for r in 0..rows as i32 {
        for c in 0..cols as i32 {
            parts.push((PieceShape::square(step)?, cell_center(step, c, r)));
        }
    }
    Ok(assemble(ls, step, CutScheme::Square { rows, cols }, parts))
}

/// Pieces are unions of lattice cells; each piece's local origin is the
/// centre of its cell nearest the piece centroid, so every ground-truth pose
/// lies on the strategy lattice.
pub fn cut_polygonal(ls: &LineSet, pattern: PolygonPattern) -> Result<Puzzle> {
    let step = cell_step(ls, pattern.rows, pattern.cols)?;
    let mut parts = Vec::new();
    for cells in pattern.partition()? {
        let n = cells.len() as f64;
        let cx = cells.iter().map(|&(x, _)| f64::from(x) + 0.5).sum::<f64>() / n;
        let cy = cells.iter().map(|&(_, y)| f64::from(y) + 0.5).sum::<f64>() / n;
        let home = *cells
            .iter()
            .min_by(|a, b| {
                let da = (f64::from(a.0) + 0.5 - cx).powi(2) + (f64::from(a.1) + 0.5 - cy).powi(2);
                let db = (f64::from(b.0) + 0.5 - cx).powi(2) + (f64::from(b.1) + 0.5 - cy).powi(2);
                da.total_cmp(&db).then((a.1, a.0).cmp(&(b.1, b.0)))
            })
            .expect("pattern pieces are non-empty");
        let origin = cell_center(step, home.0, home.1);
        let poly = Polygon::from_cells(&cells, step, origin)?;
        parts.push((PieceShape::Polygon(poly), origin));
    }
    Ok(assemble(ls, step, CutScheme::Polygonal { pattern }, parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrregularParams {
    /// Peak displacement of the cutting curves, as a fraction of the cell size.
    pub amplitude: f64,
    /// Raster cells per lattice cell along each axis; must be even.
    pub oversampling: u32,
}

impl Default for IrregularParams {
    fn default() -> Self {
        IrregularParams {
            amplitude: 0.3,
            oversampling: 4,
        }
    }
}

/// Smooth random curve `offset(t)` with `|offset| ≤ amplitude`.
struct Wave {
    terms: Vec<(f64, f64, f64)>,
}

impl Wave {
    fn random(rng: &mut ChaCha8Rng, amplitude: f64, span: f64, cells: u32) -> Wave {
        let mut terms: Vec<(f64, f64, f64)> = (1..=3)
            .map(|m| {
                let freq = f64::from(m) * f64::from(cells.max(1)) / 2.0 / span;
                (rng.gen_range(0.2..1.0), freq, rng.gen_range(0.0..TAU))
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        for t in &mut terms {
            t.0 *= amplitude / total;
        }
        Wave { terms }
    }

    fn at(&self, t: f64) -> f64 {
        self.terms.iter().map(|&(a, f, ph)| a * (TAU * f * t + ph).sin()).sum()
    }
}

/// Partition by perturbed horizontal and vertical grid lines, rasterised into
/// masks at `oversampling` resolution.
pub fn cut_irregular(ls: &LineSet, seed: u64, rows: u32, cols: u32, params: IrregularParams) -> Result<Puzzle> {
    if rows < 2 || cols < 2 {
        return Err(Error::Puzzle("irregular cuts need at least 2 rows and 2 cols".into()));
    }
    if !(0.0..=0.3).contains(&params.amplitude) {
        return Err(Error::Config(format!(
            "curve amplitude must lie in [0, 0.3] cells, got {}",
            params.amplitude
        )));
    }
    if params.oversampling == 0 || params.oversampling % 2 != 0 {
        return Err(Error::Config("oversampling must be a positive even number".into()));
    }
    let step = cell_step(ls, rows, cols)?;
    let k = params.oversampling as i32;
    let res = step / f64::from(k);
    let amp = params.amplitude * step;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertical: Vec<Wave> = (1..cols)
        .map(|_| Wave::random(&mut rng, amp, ls.canvas_height, rows))
        .collect();
    let horizontal: Vec<Wave> = (1..rows)
        .map(|_| Wave::random(&mut rng, amp, ls.canvas_width, cols))
        .collect();

    let (w, h) = (cols as i32, rows as i32);
    let mut cells: Vec<Vec<(i32, i32)>> = vec![Vec::new(); (w * h) as usize];
    for v in 0..h * k {
        for u in 0..w * k {
            let x = (f64::from(u) + 0.5) * res;
            let y = (f64::from(v) + 0.5) * res;
            let col = vertical
                .iter()
                .enumerate()
                .filter(|(c, wave)| x > (*c as f64 + 1.0) * step + wave.at(y))
                .count() as i32;
            let row = horizontal
                .iter()
                .enumerate()
                .filter(|(r, wave)| y > (*r as f64 + 1.0) * step + wave.at(x))
                .count() as i32;
            // Raster index relative to the nominal cell centre.
            cells[(row * w + col) as usize].push((u - col * k - k / 2, v - row * k - k / 2));
        }
    }
    let mut parts = Vec::with_capacity(cells.len());
    for (idx, occ) in cells.iter().enumerate() {
        let (row, col) = (idx as i32 / w, idx as i32 % w);
        parts.push((PieceShape::Mask(Mask::from_indices(res, occ)?), cell_center(step, col, row)));
    }
    Ok(assemble(ls, step, CutScheme::Irregular { seed, rows, cols }, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LineSegment, PieceShape};
    use crate::puzzle::{generate_lines, PatternKind};

    fn lines() -> LineSet {
        generate_lines(600.0, 600.0, 40, 3, 9).unwrap()
    }

    fn piece_length(p: &Puzzle) -> f64 {
        p.pieces.iter().flat_map(|x| &x.lines).map(LineSegment::length).sum()
    }

    #[test]
    fn three_by_three() {
        let p = cut_square(&lines(), 3, 3).unwrap();
        assert_eq!(p.pieces.len(), 9);
        assert!((p.grid_step - 200.0).abs() < 1e-12);
    }

    #[test]
    fn one_by_one_is_whole_canvas() {
        let ls = lines();
        let p = cut_square(&ls, 1, 1).unwrap();
        assert_eq!(p.pieces.len(), 1);
        assert!((p.pieces[0].shape.area() - 600.0 * 600.0).abs() < 1e-6);
        assert_eq!(p.pieces[0].lines.len(), ls.lines.len());
    }

    #[test]
    fn full_width_line_split_at_border() {
        let ls = LineSet {
            canvas_width: 200.0,
            canvas_height: 100.0,
            lines: vec![LineSegment::new(Point2::new(0.0, 30.0), Point2::new(200.0, 70.0), 0).unwrap()],
            category_count: 1,
        };
        let p = cut_square(&ls, 1, 2).unwrap();
        let gt = p.ground_truth.as_ref().unwrap();
        let world: Vec<LineSegment> = p
            .pieces
            .iter()
            .map(|pc| pc.lines[0].transformed(0, gt[&pc.id].position))
            .collect();
        // Clip at x = 100: y = 30 + 40 * 0.5 = 50.
        let border = Point2::new(100.0, 50.0);
        assert!(world[0].end.dist(border) < 1e-9 || world[0].start.dist(border) < 1e-9);
        assert!(world[1].end.dist(border) < 1e-9 || world[1].start.dist(border) < 1e-9);
        assert!((world[0].angle - world[1].angle).abs() < 1e-12);
    }

    #[test]
    fn non_square_cells_rejected() {
        let ls = generate_lines(300.0, 200.0, 5, 1, 0).unwrap();
        assert!(cut_square(&ls, 3, 3).is_err());
        assert!(cut_polygonal(&ls, PolygonPattern::new(PatternKind::Brick, 6, 6).unwrap()).is_err());
    }

    #[test]
    fn polygonal_tiles_canvas() {
        for kind in [PatternKind::Brick, PatternKind::Ltromino, PatternKind::Mixed] {
            let ls = lines();
            let p = cut_polygonal(&ls, PolygonPattern::new(kind, 6, 6).unwrap()).unwrap();
            let area: f64 = p.pieces.iter().map(|x| x.shape.area()).sum();
            assert!((area - 360_000.0).abs() < 1e-6, "{kind}");
            let gt = p.ground_truth.as_ref().unwrap();
            for pose in gt.values() {
                let gx = pose.position.x / p.grid_step - 0.5;
                let gy = pose.position.y / p.grid_step - 0.5;
                assert!((gx - gx.round()).abs() < 1e-9 && (gy - gy.round()).abs() < 1e-9);
            }
            assert!((piece_length(&p) - ls.total_length()).abs() < 0.01 * ls.total_length());
        }
    }

    #[test]
    fn ltromino_pieces_have_six_vertices() {
        let ls = generate_lines(600.0, 400.0, 10, 1, 2).unwrap();
        let p = cut_polygonal(&ls, PolygonPattern::new(PatternKind::Ltromino, 2, 3).unwrap()).unwrap();
        for piece in &p.pieces {
            match &piece.shape {
                PieceShape::Polygon(poly) => assert_eq!(poly.vertices().len(), 6),
                _ => panic!("expected polygon"),
            }
        }
    }

    #[test]
    fn irregular_flat_curves_match_squares() {
        let ls = lines();
        let flat = IrregularParams {
            amplitude: 0.0,
            ..Default::default()
        };
        let irr = cut_irregular(&ls, 3, 3, 3, flat).unwrap();
        let sq = cut_square(&ls, 3, 3).unwrap();
        for (a, b) in irr.pieces.iter().zip(&sq.pieces) {
            assert!((a.shape.area() - b.shape.area()).abs() < 1e-6);
            assert_eq!(a.shape.bbox(), b.shape.bbox());
            assert_eq!(a.lines.len(), b.lines.len());
        }
        assert_eq!(irr.ground_truth, sq.ground_truth);
    }

    #[test]
    fn irregular_is_deterministic_and_tiles() {
        let ls = lines();
        let a = cut_irregular(&ls, 11, 4, 4, IrregularParams::default()).unwrap();
        let b = cut_irregular(&ls, 11, 4, 4, IrregularParams::default()).unwrap();
        assert_eq!(a, b);
        // Occupancy count over the shared raster: every cell exactly once.
        let gt = a.ground_truth.as_ref().unwrap();
        let mut count = std::collections::HashMap::new();
        for piece in &a.pieces {
            let PieceShape::Mask(m) = &piece.shape else { panic!() };
            let origin = gt[&piece.id].position;
            for (ca, cb) in m.occupied() {
                let c = m.cell_center(ca, cb) + origin;
                let key = ((c.x / m.resolution()).floor() as i64, (c.y / m.resolution()).floor() as i64);
                *count.entry(key).or_insert(0) += 1;
            }
        }
        assert_eq!(count.len(), 16 * 16);
        assert!(count.values().all(|&v| v == 1));
        assert!((piece_length(&a) - ls.total_length()).abs() < 0.01 * ls.total_length());
    }
}
