use super::Records;
use crate::error::{Error, Result};
use crate::geometry::{clip_segment_to_box, LineSegment, Point2};
use crate::puzzle::LineSet;

/// Ingested polylines split into straight segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Polylines {
    pub lines: LineSet,
    /// Category label of each category index, in order of first appearance.
    pub labels: Vec<String>,
}

/// Polyline records:
///
/// ```text
/// canvas <width> <height>
/// <label> <x>,<y> <x>,<y> ...
/// ```
///
/// Each record needs at least two points. Consecutive repeated points are
/// skipped and segments are clipped to the canvas.
pub fn read_polylines(text: &str) -> Result<Polylines> {
    let mut rec = Records::new(text);
    let r = rec.expect("canvas")?;
    r.arity(3)?;
    let (w, h) = (r.real(1)?, r.real(2)?);
    if w <= 0.0 || h <= 0.0 {
        return Err(Error::format(r.line, "canvas must have positive size"));
    }
    let (lo, hi) = (Point2::ORIGIN, Point2::new(w, h));
    let mut labels: Vec<String> = Vec::new();
    let mut lines = Vec::new();
    let mut records = 0;
    while let Some(r) = rec.next_record() {
        records += 1;
        if r.fields.len() < 3 {
            return Err(Error::format(r.line, "a polyline needs a label and at least two points"));
        }
        let label = r.fields[0];
        let category = match labels.iter().position(|l| l == label) {
            Some(k) => k,
            None => {
                labels.push(label.to_string());
                labels.len() - 1
            }
        } as u32;
        let mut pts: Vec<Point2> = Vec::with_capacity(r.fields.len() - 1);
        for tok in &r.fields[1..] {
            let p = parse_point(tok).ok_or_else(|| Error::format(r.line, format!("bad point '{tok}', expected x,y")))?;
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if pts.len() < 2 {
            return Err(Error::format(r.line, "polyline has fewer than two distinct points"));
        }
        for w in pts.windows(2) {
            let d = w[1] - w[0];
            if let Some((t0, t1)) = clip_segment_to_box(w[0], w[1], lo, hi) {
                if let Ok(seg) = LineSegment::new(w[0] + d * t0, w[0] + d * t1, category) {
                    lines.push(seg);
                }
            }
        }
    }
    if records == 0 {
        return Err(Error::format(rec.line() + 1, "no polylines"));
    }
    Ok(Polylines {
        lines: LineSet {
            canvas_width: w,
            canvas_height: h,
            lines,
            category_count: labels.len() as u32,
        },
        labels,
    })
}

fn parse_point(tok: &str) -> Option<Point2> {
    let (x, y) = tok.split_once(',')?;
    let p = Point2::new(x.parse().ok()?, y.parse().ok()?);
    p.is_finite().then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_points_give_two_segments() {
        let p = read_polylines("canvas 10 10\nroad 1,1 4,1 4,5\n").unwrap();
        assert_eq!(p.lines.lines.len(), 2);
        assert_eq!(p.lines.lines[0].end, p.lines.lines[1].start);
        assert_eq!(p.labels, vec!["road"]);
    }

    #[test]
    fn labels_become_categories() {
        let p = read_polylines("# map\ncanvas 10 10\nriver 0,0 1,1\nroad 2,2 3,3\nriver 5,5 6,5\n").unwrap();
        let cats: Vec<u32> = p.lines.lines.iter().map(|l| l.category).collect();
        assert_eq!(cats, vec![0, 1, 0]);
        assert_eq!(p.lines.category_count, 2);
    }

    #[test]
    fn segments_are_clipped_to_canvas() {
        let p = read_polylines("canvas 10 10\na -5,5 15,5\nb 20,20 30,30\n").unwrap();
        assert_eq!(p.lines.lines.len(), 1);
        assert!((p.lines.lines[0].length() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_input_reports_lines() {
        assert!(read_polylines("").is_err());
        assert!(read_polylines("canvas 10 10\n").is_err());
        match read_polylines("canvas 10 10\na 1,1 2,2\nb 1;1 2,2\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_polylines("canvas 10 10\na 1,1\n"), Err(Error::Format { line: 2, .. })));
    }
}
