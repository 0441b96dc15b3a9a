//! Deterministic SVG drawings of pieces and placements.

use std::fmt::Write;

use crate::assembly::Placement;
use crate::geometry::{Edge, LineSegment, Point2, Pose, RotationSet};
use crate::puzzle::{Piece, Puzzle};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

/// Stroke colour of a line category.
pub fn category_color(category: u32) -> String {
    match PALETTE.get(category as usize) {
        Some(c) => (*c).to_string(),
        None => format!("hsl({}, 65%, 45%)", (category as u64 * 137) % 360),
    }
}

struct Item<'a> {
    piece: &'a Piece,
    pose: Pose,
}

struct Panel {
    edges: Vec<(u32, Vec<Edge>)>,
    lines: Vec<LineSegment>,
    lo: Point2,
    hi: Point2,
}

fn panel(items: &[Item], rotations: RotationSet) -> Panel {
    let mut p = Panel {
        edges: Vec::new(),
        lines: Vec::new(),
        lo: Point2::new(f64::INFINITY, f64::INFINITY),
        hi: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    for it in items {
        let q = rotations.quarter_turns(it.pose.rotation);
        let edges: Vec<Edge> = it
            .piece
            .shape
            .boundary_edges()
            .iter()
            .map(|e| e.transformed(q, it.pose.position))
            .collect();
        for e in &edges {
            for v in [e.a, e.b] {
                p.lo = Point2::new(p.lo.x.min(v.x), p.lo.y.min(v.y));
                p.hi = Point2::new(p.hi.x.max(v.x), p.hi.y.max(v.y));
            }
        }
        p.edges.push((it.piece.id, edges));
        p.lines.extend(it.piece.lines.iter().map(|l| l.transformed(q, it.pose.position)));
    }
    if items.is_empty() {
        p.lo = Point2::ORIGIN;
        p.hi = Point2::new(1.0, 1.0);
    }
    p
}

fn n(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn draw(s: &mut String, p: &Panel, offset_x: f64, margin: f64, height: f64, title: &str) {
    // Flip y so the drawing keeps the canvas orientation.
    writeln!(
        s,
        "<g transform=\"translate({} {}) scale(1 -1)\">",
        n(offset_x + margin - p.lo.x),
        n(height - margin + p.lo.y)
    )
    .unwrap();
    let stroke = ((p.hi.x - p.lo.x).max(p.hi.y - p.lo.y) / 400.0).max(1e-3);
    for (id, edges) in &p.edges {
        let mut d = String::new();
        for e in edges {
            write!(d, "M{} {}L{} {}", n(e.a.x), n(e.a.y), n(e.b.x), n(e.b.y)).unwrap();
        }
        writeln!(
            s,
            "<path data-piece=\"{id}\" d=\"{d}\" fill=\"none\" stroke=\"#444\" stroke-width=\"{}\"/>",
            n(stroke)
        )
        .unwrap();
    }
    for l in &p.lines {
        writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
            n(l.start.x),
            n(l.start.y),
            n(l.end.x),
            n(l.end.y),
            category_color(l.category),
            n(2.0 * stroke)
        )
        .unwrap();
    }
    s.push_str("</g>\n");
    writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\">{title}</text>",
        n(offset_x + margin),
        n(0.75 * margin),
        n(0.5 * margin)
    )
    .unwrap();
}

fn document(panels: &[(&Panel, &str)]) -> String {
    let span = panels
        .iter()
        .map(|(p, _)| (p.hi.x - p.lo.x).max(p.hi.y - p.lo.y))
        .fold(1e-9, f64::max);
    let margin = 0.08 * span;
    let height = panels.iter().map(|(p, _)| p.hi.y - p.lo.y).fold(0.0, f64::max) + 2.0 * margin;
    let width: f64 = panels.iter().map(|(p, _)| p.hi.x - p.lo.x + 2.0 * margin).sum();
    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        n(width),
        n(height),
        n(width),
        n(height)
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    let mut x = 0.0;
    for (p, title) in panels {
        draw(&mut s, p, x, margin, height, title);
        x += p.hi.x - p.lo.x + 2.0 * margin;
    }
    s.push_str("</svg>\n");
    s
}

/// Every piece in its own frame, laid out on a grid in input order.
pub fn render_pieces(puzzle: &Puzzle) -> String {
    let cell = puzzle
        .pieces
        .iter()
        .map(|p| 2.0 * p.shape.reach())
        .fold(puzzle.grid_step, f64::max)
        * 1.15;
    let cols = (puzzle.pieces.len() as f64).sqrt().ceil().max(1.0) as usize;
    let items: Vec<Item> = puzzle
        .pieces
        .iter()
        .enumerate()
        .map(|(k, piece)| Item {
            piece,
            pose: Pose::new(Point2::new((k % cols) as f64 * cell, -((k / cols) as f64) * cell), 0),
        })
        .collect();
    document(&[(&panel(&items, puzzle.rotations), "pieces")])
}

fn placed<'a>(puzzle: &'a Puzzle, placement: &Placement) -> Vec<Item<'a>> {
    puzzle
        .pieces
        .iter()
        .filter_map(|piece| placement.poses.get(&piece.id).map(|&pose| Item { piece, pose }))
        .collect()
}

/// The placed pieces; with `compare`, the ground truth is drawn alongside.
pub fn render_placement(puzzle: &Puzzle, placement: &Placement, compare: bool) -> String {
    let rec = panel(&placed(puzzle, placement), puzzle.rotations);
    match (&puzzle.ground_truth, compare) {
        (Some(truth), true) => {
            let gt = panel(&placed(puzzle, &Placement::from_poses(truth.clone())), puzzle.rotations);
            document(&[(&gt, "ground truth"), (&rec, "reconstruction")])
        }
        _ => document(&[(&rec, "reconstruction")]),
    }
}
