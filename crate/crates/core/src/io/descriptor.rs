use std::collections::BTreeMap;
use std::fmt::Write;

use super::{at, real, Record, Records};
use crate::error::{Error, Result};
use crate::geometry::{LineSegment, Mask, PieceShape, Point2, Polygon, Pose, RotationSet};
use crate::puzzle::{CutScheme, Piece, PolygonPattern, Puzzle};

const KIND: &str = "linepuzzle-descriptor";
const VERSION: u32 = 1;

/// Layout:
///
/// ```text
/// linepuzzle-descriptor 1
/// canvas <width> <height>
/// grid_step <step>
/// rotations <count>
/// categories <count>
/// cut square <rows> <cols> | cut polygonal <pattern> <rows> <cols> | cut irregular <seed> <rows> <cols>
/// pieces <n>
/// piece <id> <line count>
/// shape square <side> | shape polygon <n> <x y>... | shape mask <res> <x0> <y0> <w> <h> <run>...
/// line <x1> <y1> <x2> <y2> <angle> <category>
/// ...
/// end
/// ground_truth <n>
/// pose <id> <x> <y> <rotation>
/// ```
///
/// Mask runs alternate empty and occupied cells, row by row, starting empty.
pub fn write_descriptor(p: &Puzzle) -> String {
    let mut s = String::new();
    writeln!(s, "{KIND} {VERSION}").unwrap();
    writeln!(s, "canvas {} {}", real(p.canvas_width), real(p.canvas_height)).unwrap();
    writeln!(s, "grid_step {}", real(p.grid_step)).unwrap();
    writeln!(s, "rotations {}", p.rotations.count()).unwrap();
    writeln!(s, "categories {}", p.category_count).unwrap();
    match p.cut {
        CutScheme::Square { rows, cols } => writeln!(s, "cut square {rows} {cols}"),
        CutScheme::Polygonal { pattern } => writeln!(s, "cut polygonal {} {} {}", pattern.kind, pattern.rows, pattern.cols),
        CutScheme::Irregular { seed, rows, cols } => writeln!(s, "cut irregular {seed} {rows} {cols}"),
    }
    .unwrap();
    writeln!(s, "pieces {}", p.pieces.len()).unwrap();
    for piece in &p.pieces {
        writeln!(s, "piece {} {}", piece.id, piece.lines.len()).unwrap();
        write_shape(&mut s, &piece.shape);
        for l in &piece.lines {
            writeln!(
                s,
                "line {} {} {} {} {} {}",
                real(l.start.x),
                real(l.start.y),
                real(l.end.x),
                real(l.end.y),
                real(l.angle),
                l.category
            )
            .unwrap();
        }
    }
    writeln!(s, "end").unwrap();
    if let Some(truth) = &p.ground_truth {
        writeln!(s, "ground_truth {}", truth.len()).unwrap();
        for (id, pose) in truth {
            writeln!(
                s,
                "pose {id} {} {} {}",
                real(pose.position.x),
                real(pose.position.y),
                pose.rotation
            )
            .unwrap();
        }
    }
    s
}

fn write_shape(s: &mut String, shape: &PieceShape) {
    match shape {
        PieceShape::SquareCell { side } => writeln!(s, "shape square {}", real(*side)).unwrap(),
        PieceShape::Polygon(poly) => {
            write!(s, "shape polygon {}", poly.vertices().len()).unwrap();
            for v in poly.vertices() {
                write!(s, " {} {}", real(v.x), real(v.y)).unwrap();
            }
            s.push('\n');
        }
        PieceShape::Mask(m) => {
            write!(
                s,
                "shape mask {} {} {} {} {}",
                real(m.resolution()),
                real(m.corner().x),
                real(m.corner().y),
                m.width(),
                m.height()
            )
            .unwrap();
            let mut cur = false;
            let mut run = 0usize;
            for &c in m.cells() {
                if c == cur {
                    run += 1;
                } else {
                    write!(s, " {run}").unwrap();
                    cur = c;
                    run = 1;
                }
            }
            writeln!(s, " {run}").unwrap();
        }
    }
}

/// Full descriptor, ground truth included when present.
pub fn read_descriptor(text: &str) -> Result<Puzzle> {
    read(text, true)
}

/// Descriptor as the solver sees it: reading stops at `end`, so a ground
/// truth block is never parsed.
pub fn read_descriptor_for_solving(text: &str) -> Result<Puzzle> {
    read(text, false)
}

fn read(text: &str, with_truth: bool) -> Result<Puzzle> {
    let mut rec = Records::new(text);
    rec.header(KIND, VERSION)?;
    let r = rec.expect("canvas")?;
    r.arity(3)?;
    let (canvas_width, canvas_height) = (positive(&r, 1)?, positive(&r, 2)?);
    let r = rec.expect("grid_step")?;
    r.arity(2)?;
    let grid_step = positive(&r, 1)?;
    let r = rec.expect("rotations")?;
    r.arity(2)?;
    let rotations = RotationSet::new(r.parse(1)?).map_err(|e| at(r.line, e))?;
    let r = rec.expect("categories")?;
    r.arity(2)?;
    let category_count: u32 = r.parse(1)?;
    let cut = read_cut(&rec.expect("cut")?)?;
    let r = rec.expect("pieces")?;
    r.arity(2)?;
    let n: usize = r.parse(1)?;

    let mut pieces: Vec<Piece> = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let r = rec.expect("piece")?;
        r.arity(3)?;
        let id: u32 = r.parse(1)?;
        if pieces.iter().any(|p| p.id == id) {
            return Err(Error::format(r.line, format!("duplicate piece id {id}")));
        }
        let count: usize = r.parse(2)?;
        let shape = read_shape(&rec.expect("shape")?)?;
        let mut lines = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let r = rec.expect("line")?;
            r.arity(7)?;
            let category: u32 = r.parse(6)?;
            if category >= category_count {
                return Err(Error::format(r.line, format!("category {category} >= {category_count}")));
            }
            let l = LineSegment::with_angle(
                Point2::new(r.real(1)?, r.real(2)?),
                Point2::new(r.real(3)?, r.real(4)?),
                r.real(5)?,
                category,
            )
            .map_err(|e| at(r.line, e))?;
            lines.push(l);
        }
        pieces.push(Piece::new(id, shape, lines));
    }
    rec.expect("end")?.arity(1)?;

    let mut ground_truth = None;
    if with_truth {
        if let Some(r) = rec.next_record() {
            if r.fields[0] != "ground_truth" {
                return Err(Error::format(r.line, format!("unexpected '{}' after end", r.fields[0])));
            }
            r.arity(2)?;
            let k: usize = r.parse(1)?;
            let mut truth = BTreeMap::new();
            for _ in 0..k {
                let r = rec.expect("pose")?;
                r.arity(5)?;
                let id: u32 = r.parse(1)?;
                let rot: u32 = r.parse(4)?;
                if rot >= rotations.count() {
                    return Err(Error::format(r.line, format!("rotation {rot} outside the rotation set")));
                }
                if !pieces.iter().any(|p| p.id == id) || truth.contains_key(&id) {
                    return Err(Error::format(r.line, format!("unknown or repeated piece {id}")));
                }
                truth.insert(id, Pose::new(Point2::new(r.real(2)?, r.real(3)?), rot));
            }
            if truth.len() != pieces.len() {
                return Err(Error::format(r.line, "ground truth must cover every piece"));
            }
            if let Some(extra) = rec.next_record() {
                return Err(Error::format(extra.line, "trailing records after ground truth"));
            }
            ground_truth = Some(truth);
        }
    }
    Ok(Puzzle {
        canvas_width,
        canvas_height,
        category_count,
        grid_step,
        rotations,
        cut,
        pieces,
        ground_truth,
    })
}

fn positive(r: &Record, k: usize) -> Result<f64> {
    let v = r.real(k)?;
    if v <= 0.0 {
        return Err(Error::format(r.line, format!("'{}' must be positive", r.fields[0])));
    }
    Ok(v)
}

fn read_cut(r: &Record) -> Result<CutScheme> {
    match r.fields.get(1).copied() {
        Some("square") => {
            r.arity(4)?;
            Ok(CutScheme::Square {
                rows: r.parse(2)?,
                cols: r.parse(3)?,
            })
        }
        Some("polygonal") => {
            r.arity(5)?;
            let kind = r.fields[2].parse().map_err(|e| at(r.line, e))?;
            let pattern = PolygonPattern::new(kind, r.parse(3)?, r.parse(4)?).map_err(|e| at(r.line, e))?;
            Ok(CutScheme::Polygonal { pattern })
        }
        Some("irregular") => {
            r.arity(5)?;
            Ok(CutScheme::Irregular {
                seed: r.parse(2)?,
                rows: r.parse(3)?,
                cols: r.parse(4)?,
            })
        }
        other => Err(Error::format(r.line, format!("unknown cut scheme {other:?}"))),
    }
}

fn read_shape(r: &Record) -> Result<PieceShape> {
    match r.fields.get(1).copied() {
        Some("square") => {
            r.arity(3)?;
            PieceShape::square(r.real(2)?).map_err(|e| at(r.line, e))
        }
        Some("polygon") => {
            let n: usize = r.parse(2)?;
            r.arity(3 + 2 * n)?;
            let vs = (0..n)
                .map(|k| Ok(Point2::new(r.real(3 + 2 * k)?, r.real(4 + 2 * k)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PieceShape::Polygon(Polygon::new(vs).map_err(|e| at(r.line, e))?))
        }
        Some("mask") => {
            if r.fields.len() < 8 {
                return Err(Error::format(r.line, "mask needs resolution, corner, size and runs"));
            }
            let res = r.real(2)?;
            let corner = Point2::new(r.real(3)?, r.real(4)?);
            let (w, h): (usize, usize) = (r.parse(5)?, r.parse(6)?);
            let total = w
                .checked_mul(h)
                .filter(|&t| t <= 1 << 28)
                .ok_or_else(|| Error::format(r.line, "mask too large"))?;
            let mut cells = Vec::with_capacity(total);
            let mut cur = false;
            for k in 7..r.fields.len() {
                let run: usize = r.parse(k)?;
                if cells.len() + run > total {
                    return Err(Error::format(r.line, "mask runs exceed the mask size"));
                }
                cells.extend(std::iter::repeat(cur).take(run));
                cur = !cur;
            }
            if cells.len() != total {
                return Err(Error::format(r.line, format!("mask runs cover {} of {total} cells", cells.len())));
            }
            Ok(PieceShape::Mask(Mask::new(res, corner, w, h, cells).map_err(|e| at(r.line, e))?))
        }
        other => Err(Error::format(r.line, format!("unknown shape {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puzzle::{cut_irregular, cut_polygonal, cut_square, generate_lines, scramble, IrregularParams, PatternKind};

    fn puzzles() -> Vec<Puzzle> {
        let ls = generate_lines(300.0, 300.0, 30, 3, 5).unwrap();
        vec![
            scramble(&cut_square(&ls, 3, 3).unwrap(), 1),
            scramble(
                &cut_polygonal(&ls, PolygonPattern::new(PatternKind::Brick, 3, 3).unwrap()).unwrap(),
                2,
            ),
            scramble(&cut_irregular(&ls, 4, 3, 3, IrregularParams::default()).unwrap(), 3),
        ]
    }

    #[test]
    fn round_trip_is_identity() {
        for p in puzzles() {
            let text = write_descriptor(&p);
            let back = read_descriptor(&text).unwrap();
            assert_eq!(back, p);
            assert_eq!(write_descriptor(&back), text);
        }
    }

    #[test]
    fn solver_view_skips_ground_truth() {
        let p = &puzzles()[0];
        let text = write_descriptor(p);
        let solver = read_descriptor_for_solving(&text).unwrap();
        assert!(solver.ground_truth.is_none());
        let stripped = write_descriptor(&p.clone().without_ground_truth());
        assert_eq!(read_descriptor_for_solving(&stripped).unwrap(), solver);
        // A corrupt truth block is not even looked at.
        let corrupt = format!("{stripped}ground_truth 1\npose x\n");
        assert_eq!(read_descriptor_for_solving(&corrupt).unwrap(), solver);
        assert!(read_descriptor(&corrupt).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = write_descriptor(&puzzles()[0]);
        let broken = text.replacen("grid_step", "grid_stp", 1);
        match read_descriptor(&broken) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad_version = text.replacen("linepuzzle-descriptor 1", "linepuzzle-descriptor 9", 1);
        assert!(matches!(read_descriptor(&bad_version), Err(Error::Format { line: 1, .. })));
        assert!(matches!(read_descriptor(""), Err(Error::Format { .. })));
    }
}
