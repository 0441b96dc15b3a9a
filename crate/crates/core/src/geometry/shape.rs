use std::collections::HashSet;

use super::Point2;
use crate::error::{Error, Result};

/// Oriented boundary edge; for counter-clockwise shapes the interior lies on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: Point2,
    pub b: Point2,
}

impl Edge {
    pub fn new(a: Point2, b: Point2) -> Self {
        Edge { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn transformed(&self, quarter_turns: u32, offset: Point2) -> Edge {
        Edge {
            a: self.a.rotate_quarter(quarter_turns) + offset,
            b: self.b.rotate_quarter(quarter_turns) + offset,
        }
    }
}

/// Simple polygon stored counter-clockwise, with a cached triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point2>,
    triangles: Vec<[Point2; 3]>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Geometry("polygon has non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        if area.abs() <= f64::EPSILON {
            return Err(Error::Geometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(Error::Geometry("polygon is self-intersecting".into()));
        }
        let triangles = triangulate(&vertices)?;
        Ok(Polygon { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[Point2; 3]] {
        &self.triangles
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Edge::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        let n = self.vertices.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Quarter-turn rotation about the origin.
    pub fn rotated(&self, quarter_turns: u32) -> Polygon {
        let rot = |p: &Point2| p.rotate_quarter(quarter_turns);
        Polygon {
            vertices: self.vertices.iter().map(rot).collect(),
            triangles: self
                .triangles
                .iter()
                .map(|t| [rot(&t[0]), rot(&t[1]), rot(&t[2])])
                .collect(),
        }
    }

    /// Polygon traced around a 4-connected, hole-free union of unit cells
    /// scaled by `step`; cell `(cx, cy)` covers `[cx, cx+1] × [cy, cy+1]` before
    /// scaling and the result is shifted by `-origin`.
    pub fn from_cells(cells: &[(i32, i32)], step: f64, origin: Point2) -> Result<Polygon> {
        let corners = trace_cell_boundary(cells)?;
        let vertices = corners
            .into_iter()
            .map(|(x, y)| Point2::new(f64::from(x) * step, f64::from(y) * step) - origin)
            .collect();
        Polygon::new(vertices)
    }
}

/// Binary occupancy raster. Cell `(a, b)` covers
/// `[x0 + a·res, x0 + (a+1)·res] × [y0 + b·res, y0 + (b+1)·res]`, `b` growing upward.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    resolution: f64,
    x0: f64,
    y0: f64,
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Mask {
    pub fn new(resolution: f64, corner: Point2, width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::Geometry(format!("mask resolution must be positive, got {resolution}")));
        }
        if cells.len() != width * height {
            return Err(Error::Geometry(format!(
                "mask has {} cells, expected {}x{}",
                cells.len(),
                width,
                height
            )));
        }
        if !cells.iter().any(|&c| c) {
            return Err(Error::Geometry("mask has no occupied cell".into()));
        }
        Ok(Mask {
            resolution,
            x0: corner.x,
            y0: corner.y,
            width,
            height,
            cells,
        })
    }

    /// Mask from integer cell indices on the lattice of pitch `resolution`
    /// anchored at the origin, cropped to their bounding box.
    pub fn from_indices(resolution: f64, occupied: &[(i32, i32)]) -> Result<Self> {
        if occupied.is_empty() {
            return Err(Error::Geometry("mask has no occupied cell".into()));
        }
        let (mut xmin, mut ymin, mut xmax, mut ymax) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for &(x, y) in occupied {
            xmin = xmin.min(x);
            ymin = ymin.min(y);
            xmax = xmax.max(x);
            ymax = ymax.max(y);
        }
        let width = (xmax - xmin + 1) as usize;
        let height = (ymax - ymin + 1) as usize;
        let mut cells = vec![false; width * height];
        for &(x, y) in occupied {
            cells[(y - ymin) as usize * width + (x - xmin) as usize] = true;
        }
        Mask::new(
            resolution,
            Point2::new(f64::from(xmin) * resolution, f64::from(ymin) * resolution),
            width,
            height,
            cells,
        )
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn corner(&self) -> Point2 {
        Point2::new(self.x0, self.y0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, a: i64, b: i64) -> bool {
        if a < 0 || b < 0 || a >= self.width as i64 || b >= self.height as i64 {
            return false;
        }
        self.cells[b as usize * self.width + a as usize]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn area(&self) -> f64 {
        self.occupied_count() as f64 * self.resolution * self.resolution
    }

    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |b| {
            (0..self.width).filter_map(move |a| self.cells[b * self.width + a].then_some((a, b)))
        })
    }

    pub fn cell_center(&self, a: usize, b: usize) -> Point2 {
        Point2::new(
            self.x0 + (a as f64 + 0.5) * self.resolution,
            self.y0 + (b as f64 + 0.5) * self.resolution,
        )
    }

    pub fn contains(&self, p: Point2) -> bool {
        let a = ((p.x - self.x0) / self.resolution).floor();
        let b = ((p.y - self.y0) / self.resolution).floor();
        a.is_finite() && b.is_finite() && self.get(a as i64, b as i64)
    }

    /// Quarter-turn rotation about the origin, then translation; exact re-indexing.
    pub fn transformed(&self, quarter_turns: u32, offset: Point2) -> Mask {
        let q = quarter_turns % 4;
        let (w, h) = (self.width, self.height);
        let (nw, nh) = if q % 2 == 0 { (w, h) } else { (h, w) };
        let far = Point2::new(
            self.x0 + w as f64 * self.resolution,
            self.y0 + h as f64 * self.resolution,
        );
        let c0 = self.corner().rotate_quarter(q);
        let c1 = far.rotate_quarter(q);
        let corner = Point2::new(c0.x.min(c1.x), c0.y.min(c1.y)) + offset;
        let mut cells = vec![false; nw * nh];
        for (a, b) in self.occupied() {
            let (na, nb) = match q {
                0 => (a, b),
                1 => (h - 1 - b, a),
                2 => (w - 1 - a, h - 1 - b),
                _ => (b, w - 1 - a),
            };
            cells[nb * nw + na] = true;
        }
        Mask {
            resolution: self.resolution,
            x0: corner.x,
            y0: corner.y,
            width: nw,
            height: nh,
            cells,
        }
    }

    /// Boundary edges, merged into maximal collinear runs, oriented with the
    /// interior on the left.
    pub fn boundary_edges(&self) -> Vec<Edge> {
        let r = self.resolution;
        let pt = |a: i64, b: i64| Point2::new(self.x0 + a as f64 * r, self.y0 + b as f64 * r);
        let mut edges = Vec::new();
        let (w, h) = (self.width as i64, self.height as i64);
        // Horizontal runs: bottom edges go +x, top edges go -x.
        for b in 0..=h {
            let mut bottom_run: Option<i64> = None;
            let mut top_run: Option<i64> = None;
            for a in 0..=w {
                let above = a < w && self.get(a, b);
                let below = a < w && self.get(a, b - 1);
                let is_bottom = above && !below;
                let is_top = below && !above;
                match (is_bottom, bottom_run) {
                    (true, None) => bottom_run = Some(a),
                    (false, Some(s)) => {
                        edges.push(Edge::new(pt(s, b), pt(a, b)));
                        bottom_run = None;
                    }
                    _ => {}
                }
                match (is_top, top_run) {
                    (true, None) => top_run = Some(a),
                    (false, Some(s)) => {
                        edges.push(Edge::new(pt(a, b), pt(s, b)));
                        top_run = None;
                    }
                    _ => {}
                }
            }
        }
        // Vertical runs: right edges go +y, left edges go -y.
        for a in 0..=w {
            let mut right_run: Option<i64> = None;
            let mut left_run: Option<i64> = None;
            for b in 0..=h {
                let west = b < h && self.get(a - 1, b);
                let east = b < h && self.get(a, b);
                let is_right = west && !east;
                let is_left = east && !west;
                match (is_right, right_run) {
                    (true, None) => right_run = Some(b),
                    (false, Some(s)) => {
                        edges.push(Edge::new(pt(a, s), pt(a, b)));
                        right_run = None;
                    }
                    _ => {}
                }
                match (is_left, left_run) {
                    (true, None) => left_run = Some(b),
                    (false, Some(s)) => {
                        edges.push(Edge::new(pt(a, b), pt(a, s)));
                        left_run = None;
                    }
                    _ => {}
                }
            }
        }
        edges
    }
}

/// Outline of a piece in its local frame.
#[derive(Debug, Clone, PartialEq)]
pub enum PieceShape {
    /// Axis-aligned square of the given side centred on the origin.
    SquareCell { side: f64 },
    Polygon(Polygon),
    Mask(Mask),
}

impl PieceShape {
    pub fn square(side: f64) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::Geometry(format!("square side must be positive, got {side}")));
        }
        Ok(PieceShape::SquareCell { side })
    }

    pub fn area(&self) -> f64 {
        match self {
            PieceShape::SquareCell { side } => side * side,
            PieceShape::Polygon(p) => p.area(),
            PieceShape::Mask(m) => m.area(),
        }
    }

    pub fn is_square(&self) -> bool {
        matches!(self, PieceShape::SquareCell { .. })
    }

    /// Axis-aligned bounding box `(min, max)` in the local frame.
    pub fn bbox(&self) -> (Point2, Point2) {
        match self {
            PieceShape::SquareCell { side } => {
                let h = side / 2.0;
                (Point2::new(-h, -h), Point2::new(h, h))
            }
            PieceShape::Polygon(p) => bounds(p.vertices().iter().copied()),
            PieceShape::Mask(m) => {
                let (mut lo, mut hi) = (
                    Point2::new(f64::INFINITY, f64::INFINITY),
                    Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
                );
                for (a, b) in m.occupied() {
                    let c = m.cell_center(a, b);
                    let h = m.resolution() / 2.0;
                    lo = Point2::new(lo.x.min(c.x - h), lo.y.min(c.y - h));
                    hi = Point2::new(hi.x.max(c.x + h), hi.y.max(c.y + h));
                }
                (lo, hi)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.dist(hi)
    }

    /// Largest absolute local coordinate, i.e. the half-width of the smallest
    /// origin-centred square containing the shape under every quarter turn.
    pub fn reach(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.x.abs().max(lo.y.abs()).max(hi.x.abs()).max(hi.y.abs())
    }

    pub fn contains(&self, p: Point2) -> bool {
        match self {
            PieceShape::SquareCell { side } => p.x.abs() <= side / 2.0 && p.y.abs() <= side / 2.0,
            PieceShape::Polygon(poly) => poly.contains(p),
            PieceShape::Mask(m) => m.contains(p),
        }
    }

    pub fn boundary_edges(&self) -> Vec<Edge> {
        match self {
            PieceShape::SquareCell { side } => {
                let h = side / 2.0;
                let c = [
                    Point2::new(-h, -h),
                    Point2::new(h, -h),
                    Point2::new(h, h),
                    Point2::new(-h, h),
                ];
                (0..4).map(|i| Edge::new(c[i], c[(i + 1) % 4])).collect()
            }
            PieceShape::Polygon(p) => p.edges().collect(),
            PieceShape::Mask(m) => m.boundary_edges(),
        }
    }

    /// The shape rotated about its local origin.
    pub fn rotated(&self, quarter_turns: u32) -> PieceShape {
        match self {
            PieceShape::SquareCell { side } => PieceShape::SquareCell { side: *side },
            PieceShape::Polygon(p) => PieceShape::Polygon(p.rotated(quarter_turns)),
            PieceShape::Mask(m) => PieceShape::Mask(m.transformed(quarter_turns, Point2::ORIGIN)),
        }
    }

    /// Parameter intervals of segment `a → b` lying inside the shape, sorted and merged.
    pub fn clip_segment(&self, a: Point2, b: Point2) -> Vec<(f64, f64)> {
        match self {
            PieceShape::SquareCell { side } => {
                let h = side / 2.0;
                super::clip_segment_to_box(a, b, Point2::new(-h, -h), Point2::new(h, h))
                    .into_iter()
                    .collect()
            }
            PieceShape::Polygon(p) => clip_segment_polygon(p, a, b),
            PieceShape::Mask(m) => {
                let r = m.resolution();
                let mut spans: Vec<(f64, f64)> = m
                    .occupied()
                    .filter_map(|(ca, cb)| {
                        let lo = Point2::new(m.x0 + ca as f64 * r, m.y0 + cb as f64 * r);
                        super::clip_segment_to_box(a, b, lo, lo + Point2::new(r, r))
                    })
                    .collect();
                merge_intervals(&mut spans)
            }
        }
    }
}

fn bounds(points: impl Iterator<Item = Point2>) -> (Point2, Point2) {
    points.fold(
        (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(lo, hi), p| {
            (
                Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    )
}

pub(crate) fn merge_intervals(spans: &mut [(f64, f64)]) -> Vec<(f64, f64)> {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for &(s, e) in spans.iter() {
        match out.last_mut() {
            Some(last) if s <= last.1 + 1e-12 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

fn clip_segment_polygon(poly: &Polygon, a: Point2, b: Point2) -> Vec<(f64, f64)> {
    let d = b - a;
    let mut ts = vec![0.0, 1.0];
    for e in poly.edges() {
        let f = e.b - e.a;
        let denom = d.cross(f);
        if denom.abs() < 1e-15 {
            continue;
        }
        let w = e.a - a;
        let t = w.cross(f) / denom;
        let u = w.cross(d) / denom;
        if (0.0..=1.0).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            ts.push(t);
        }
    }
    ts.sort_by(|x, y| x.total_cmp(y));
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut spans: Vec<(f64, f64)> = ts
        .windows(2)
        .filter(|w| poly.contains(a + d * ((w[0] + w[1]) / 2.0)))
        .map(|w| (w[0], w[1]))
        .collect();
    merge_intervals(&mut spans)
}

pub(crate) fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() / 2.0
}

fn segments_intersect(p1: Point2, p2: Point2, p3: Point2, p4: Point2) -> bool {
    let d1 = (p4 - p3).cross(p1 - p3);
    let d2 = (p4 - p3).cross(p2 - p3);
    let d3 = (p2 - p1).cross(p3 - p1);
    let d4 = (p2 - p1).cross(p4 - p1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2, d: f64| {
        d == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    on(p3, p4, p1, d1) || on(p3, p4, p2, d2) || on(p1, p2, p3, d3) || on(p1, p2, p4, d4)
}

fn is_simple(v: &[Point2]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    let d1 = (b - a).cross(p - a);
    let d2 = (c - b).cross(p - b);
    let d3 = (a - c).cross(p - c);
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

/// Ear clipping of a counter-clockwise simple polygon.
fn triangulate(vertices: &[Point2]) -> Result<Vec<[Point2; 3]>> {
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut tris = Vec::with_capacity(vertices.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let ear = (0..m).find(|&k| {
            let (a, b, c) = (vertices[idx[(k + m - 1) % m]], vertices[idx[k]], vertices[idx[(k + 1) % m]]);
            if (b - a).cross(c - b) <= 1e-12 {
                return false;
            }
            idx.iter().all(|&o| {
                let p = vertices[o];
                p == a || p == b || p == c || !point_in_triangle(p, a, b, c)
            })
        });
        let Some(k) = ear else {
            return Err(Error::Geometry("polygon triangulation failed".into()));
        };
        tris.push([vertices[idx[(k + m - 1) % m]], vertices[idx[k]], vertices[idx[(k + 1) % m]]]);
        idx.remove(k);
    }
    tris.push([vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]]);
    Ok(tris)
}

/// Counter-clockwise corner loop around a union of unit cells, with collinear
/// corners removed.
fn trace_cell_boundary(cells: &[(i32, i32)]) -> Result<Vec<(i32, i32)>> {
    let set: HashSet<(i32, i32)> = cells.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::Geometry("empty cell set".into()));
    }
    // Directed unit edges with the cell on the left.
    let mut next: std::collections::HashMap<(i32, i32), (i32, i32)> = Default::default();
    let mut push = |from: (i32, i32), to: (i32, i32)| -> Result<()> {
        if next.insert(from, to).is_some() {
            return Err(Error::Geometry("cell union is not a simple region".into()));
        }
        Ok(())
    };
    for &(x, y) in &set {
        if !set.contains(&(x, y - 1)) {
            push((x, y), (x + 1, y))?;
        }
        if !set.contains(&(x + 1, y)) {
            push((x + 1, y), (x + 1, y + 1))?;
        }
        if !set.contains(&(x, y + 1)) {
            push((x + 1, y + 1), (x, y + 1))?;
        }
        if !set.contains(&(x - 1, y)) {
            push((x, y + 1), (x, y))?;
        }
    }
    let start = *next.keys().min().expect("non-empty");
    let mut loop_pts = vec![start];
    let mut cur = next[&start];
    while cur != start {
        loop_pts.push(cur);
        cur = *next
            .get(&cur)
            .ok_or_else(|| Error::Geometry("open cell boundary".into()))?;
        if loop_pts.len() > next.len() {
            return Err(Error::Geometry("cell boundary does not close".into()));
        }
    }
    if loop_pts.len() != next.len() {
        return Err(Error::Geometry("cell union has holes or several components".into()));
    }
    let n = loop_pts.len();
    let corners = (0..n)
        .filter(|&i| {
            let (p, c, q) = (loop_pts[(i + n - 1) % n], loop_pts[i], loop_pts[(i + 1) % n]);
            (c.0 - p.0) * (q.1 - c.1) - (c.1 - p.1) * (q.0 - c.0) != 0
        })
        .map(|i| loop_pts[i])
        .collect();
    Ok(corners)
}
