use serde::{Deserialize, Serialize};

use super::shape::{Edge, Mask, PieceShape};
use super::{Lattice, Point2, RelativeStrategy};

/// Region of the proximity space a relative pose falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Adjacent,
    Overlapping,
    Neutral,
}

/// Scale-free geometric tolerances, resolved per puzzle into a [`ContactModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Overlap threshold as a fraction of the smaller piece area.
    pub overlap_fraction: f64,
    /// Contact band width as a fraction of the mean piece diameter.
    pub band_fraction: f64,
    /// Minimum contact length for adjacency, fraction of the mean piece diameter.
    pub contact_min_fraction: f64,
    /// Proximity radius in cells; `None` derives it from the piece extents.
    pub proximity_radius: Option<i32>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            overlap_fraction: 0.01,
            band_fraction: 0.02,
            contact_min_fraction: 0.05,
            proximity_radius: None,
        }
    }
}

/// Absolute tolerances for one puzzle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    pub overlap_fraction: f64,
    pub band: f64,
    pub contact_min: f64,
}

impl ContactModel {
    pub fn new(cfg: &GeometryConfig, mean_diameter: f64) -> Self {
        ContactModel {
            overlap_fraction: cfg.overlap_fraction,
            band: cfg.band_fraction * mean_diameter,
            contact_min: cfg.contact_min_fraction * mean_diameter,
        }
    }

    pub fn for_shapes<'a>(cfg: &GeometryConfig, shapes: impl IntoIterator<Item = &'a PieceShape>) -> Self {
        let (sum, n) = shapes
            .into_iter()
            .fold((0.0, 0usize), |(s, n), sh| (s + sh.diameter(), n + 1));
        ContactModel::new(cfg, if n == 0 { 0.0 } else { sum / n as f64 })
    }

    pub fn overlap_epsilon(&self, a: &PieceShape, b: &PieceShape) -> f64 {
        self.overlap_fraction * a.area().min(b.area())
    }
}

fn placed_bbox(shape: &PieceShape, q: u32, t: Point2) -> (Point2, Point2) {
    let (lo, hi) = shape.bbox();
    let c0 = lo.rotate_quarter(q) + t;
    let c1 = hi.rotate_quarter(q) + t;
    (
        Point2::new(c0.x.min(c1.x), c0.y.min(c1.y)),
        Point2::new(c0.x.max(c1.x), c0.y.max(c1.y)),
    )
}

fn boxes_overlap(a: (Point2, Point2), b: (Point2, Point2), pad: f64) -> bool {
    a.0.x <= b.1.x + pad && b.0.x <= a.1.x + pad && a.0.y <= b.1.y + pad && b.0.y <= a.1.y + pad
}

/// Area shared by `a` at the origin and `b` placed by `gamma`.
pub fn overlap_area(a: &PieceShape, b: &PieceShape, gamma: &RelativeStrategy, lattice: &Lattice) -> f64 {
    let (q, t) = gamma.placement(lattice);
    overlap_area_placed(a, b, q, t)
}

/// Area shared by `a` at the origin and `b` rotated by `q` quarter turns then shifted by `t`.
pub fn overlap_area_placed(a: &PieceShape, b: &PieceShape, q: u32, t: Point2) -> f64 {
    let abox = a.bbox();
    let bbox = placed_bbox(b, q, t);
    if !boxes_overlap(abox, bbox, 0.0) {
        return 0.0;
    }
    match (a, b) {
        (PieceShape::SquareCell { .. }, PieceShape::SquareCell { .. }) => {
            let w = abox.1.x.min(bbox.1.x) - abox.0.x.max(bbox.0.x);
            let h = abox.1.y.min(bbox.1.y) - abox.0.y.max(bbox.0.y);
            w.max(0.0) * h.max(0.0)
        }
        (PieceShape::Mask(ma), PieceShape::Mask(mb)) => mask_overlap(ma, &mb.transformed(q, t)),
        (PieceShape::Mask(ma), other) => {
            // Sample the raster against the other outline in its own frame.
            let inv = (4 - q % 4) % 4;
            sampled_overlap(ma, |p| other.contains((p - t).rotate_quarter(inv)))
        }
        (other, PieceShape::Mask(mb)) => sampled_overlap(&mb.transformed(q, t), |p| other.contains(p)),
        _ => {
            let ta = triangles_of(a, 0, Point2::ORIGIN);
            let tb = triangles_of(b, q, t);
            let mut area = 0.0;
            for x in &ta {
                let xb = tri_bbox(x);
                for y in &tb {
                    if boxes_overlap(xb, tri_bbox(y), 0.0) {
                        area += convex_intersection_area(x, y);
                    }
                }
            }
            area
        }
    }
}

fn sampled_overlap(m: &Mask, inside: impl Fn(Point2) -> bool) -> f64 {
    let hits = m.occupied().filter(|&(a, b)| inside(m.cell_center(a, b))).count();
    hits as f64 * m.resolution() * m.resolution()
}

fn mask_overlap(a: &Mask, b: &Mask) -> f64 {
    let r = a.resolution();
    let aligned = (a.resolution() - b.resolution()).abs() <= 1e-12 * r;
    let off = (b.corner() - a.corner()) * (1.0 / r);
    let (ox, oy) = (off.x.round(), off.y.round());
    if aligned && (off.x - ox).abs() < 1e-6 && (off.y - oy).abs() < 1e-6 {
        let (ox, oy) = (ox as i64, oy as i64);
        let hits = b
            .occupied()
            .filter(|&(ca, cb)| a.get(ca as i64 + ox, cb as i64 + oy))
            .count();
        hits as f64 * r * r
    } else {
        sampled_overlap(b, |p| a.contains(p))
    }
}

fn triangles_of(shape: &PieceShape, q: u32, t: Point2) -> Vec<[Point2; 3]> {
    let tf = |p: Point2| p.rotate_quarter(q) + t;
    match shape {
        PieceShape::SquareCell { side } => {
            let h = side / 2.0;
            let c = [
                tf(Point2::new(-h, -h)),
                tf(Point2::new(h, -h)),
                tf(Point2::new(h, h)),
                tf(Point2::new(-h, h)),
            ];
            vec![[c[0], c[1], c[2]], [c[0], c[2], c[3]]]
        }
        PieceShape::Polygon(p) => p
            .triangles()
            .iter()
            .map(|tr| [tf(tr[0]), tf(tr[1]), tf(tr[2])])
            .collect(),
        PieceShape::Mask(_) => unreachable!("masks are handled by raster paths"),
    }
}

fn tri_bbox(t: &[Point2; 3]) -> (Point2, Point2) {
    (
        Point2::new(t[0].x.min(t[1].x).min(t[2].x), t[0].y.min(t[1].y).min(t[2].y)),
        Point2::new(t[0].x.max(t[1].x).max(t[2].x), t[0].y.max(t[1].y).max(t[2].y)),
    )
}

/// Sutherland–Hodgman clip of two counter-clockwise convex polygons.
fn convex_intersection_area(subject: &[Point2], clip: &[Point2]) -> f64 {
    let mut out: Vec<Point2> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            return 0.0;
        }
        let (c0, c1) = (clip[i], clip[(i + 1) % n]);
        let edge = c1 - c0;
        let inside = |p: Point2| edge.cross(p - c0) >= 0.0;
        let input = std::mem::take(&mut out);
        let m = input.len();
        for k in 0..m {
            let (p, s) = (input[k], input[(k + m - 1) % m]);
            let (pin, sin) = (inside(p), inside(s));
            if pin != sin {
                let d = p - s;
                let denom = edge.cross(d);
                if denom != 0.0 {
                    let tt = edge.cross(c0 - s) / denom;
                    out.push(s + d * tt);
                }
            }
            if pin {
                out.push(p);
            }
        }
    }
    super::shape::signed_area(&out).max(0.0)
}

/// Portions of `a`'s boundary running within `band` of, and antiparallel to,
/// `b`'s boundary when `b` is placed by `gamma`. Returned in `a`'s frame.
pub fn contact_segments(
    a: &PieceShape,
    b: &PieceShape,
    gamma: &RelativeStrategy,
    lattice: &Lattice,
    band: f64,
) -> Vec<Edge> {
    let (q, t) = gamma.placement(lattice);
    contact_segments_placed(a, b, q, t, band)
}

pub fn contact_segments_placed(a: &PieceShape, b: &PieceShape, q: u32, t: Point2, band: f64) -> Vec<Edge> {
    let abox = a.bbox();
    let bbox = placed_bbox(b, q, t);
    if !boxes_overlap(abox, bbox, band) {
        return Vec::new();
    }
    let b_edges: Vec<Edge> = b
        .boundary_edges()
        .iter()
        .map(|e| e.transformed(q, t))
        .filter(|e| {
            let lo = Point2::new(e.a.x.min(e.b.x), e.a.y.min(e.b.y));
            let hi = Point2::new(e.a.x.max(e.b.x), e.a.y.max(e.b.y));
            boxes_overlap(abox, (lo, hi), band)
        })
        .collect();
    let mut out = Vec::new();
    for ea in a.boundary_edges() {
        let la = ea.length();
        if la == 0.0 {
            continue;
        }
        let ua = (ea.b - ea.a) * (1.0 / la);
        for eb in &b_edges {
            let lb = eb.length();
            if lb == 0.0 {
                continue;
            }
            let ub = (eb.b - eb.a) * (1.0 / lb);
            if ua.dot(ub) > -0.9999 {
                continue;
            }
            if ua.cross(eb.a - ea.a).abs() > band || ua.cross(eb.b - ea.a).abs() > band {
                continue;
            }
            let s0 = ua.dot(eb.a - ea.a);
            let s1 = ua.dot(eb.b - ea.a);
            let lo = s0.min(s1).max(0.0);
            let hi = s0.max(s1).min(la);
            if hi > lo {
                out.push(Edge::new(ea.a + ua * lo, ea.a + ua * hi));
            }
        }
    }
    out
}

/// Length of `a`'s boundary in contact with `b` placed by `gamma`.
pub fn contact_length(a: &PieceShape, b: &PieceShape, gamma: &RelativeStrategy, lattice: &Lattice, band: f64) -> f64 {
    contact_segments(a, b, gamma, lattice, band)
        .iter()
        .map(Edge::length)
        .sum()
}

pub fn classify_region(
    a: &PieceShape,
    b: &PieceShape,
    gamma: &RelativeStrategy,
    lattice: &Lattice,
    model: &ContactModel,
) -> RegionLabel {
    let (q, t) = gamma.placement(lattice);
    classify_placed(a, b, q, t, model)
}

pub(crate) fn classify_placed(a: &PieceShape, b: &PieceShape, q: u32, t: Point2, model: &ContactModel) -> RegionLabel {
    if overlap_area_placed(a, b, q, t) > model.overlap_epsilon(a, b) {
        return RegionLabel::Overlapping;
    }
    let contact: f64 = contact_segments_placed(a, b, q, t, model.band)
        .iter()
        .map(Edge::length)
        .sum();
    if contact > model.contact_min {
        RegionLabel::Adjacent
    } else {
        RegionLabel::Neutral
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polygon, RotationSet};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn unit() -> PieceShape {
        PieceShape::square(1.0).unwrap()
    }

    fn lattice() -> Lattice {
        Lattice::new(1.0, RotationSet::QUARTER_TURNS).unwrap()
    }

    fn model() -> ContactModel {
        ContactModel::for_shapes(&GeometryConfig::default(), [&unit()])
    }

    fn g(dx: i32, dy: i32, r: u32) -> RelativeStrategy {
        RelativeStrategy::new(dx, dy, r)
    }

    /// Unit square as a general polygon, to exercise the triangle path.
    fn unit_poly() -> PieceShape {
        PieceShape::Polygon(
            Polygon::new(vec![
                Point2::new(-0.5, -0.5),
                Point2::new(0.5, -0.5),
                Point2::new(0.5, 0.5),
                Point2::new(-0.5, 0.5),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn full_and_edge_overlap() {
        assert!((overlap_area(&unit(), &unit(), &g(0, 0, 0), &lattice()) - 1.0).abs() < 1e-12);
        assert_eq!(overlap_area(&unit(), &unit(), &g(1, 0, 0), &lattice()), 0.0);
        assert!((overlap_area(&unit_poly(), &unit_poly(), &g(0, 0, 1), &lattice()) - 1.0).abs() < 1e-12);
        assert!(overlap_area(&unit_poly(), &unit_poly(), &g(1, 0, 0), &lattice()).abs() < 1e-12);
    }

    #[test]
    fn half_offset_overlap_matches_monte_carlo() {
        // Rectangle intersection formula: (1 - 0.5) * 1.
        let half = Lattice::new(0.5, RotationSet::FIXED).unwrap();
        let exact = overlap_area(&unit_poly(), &unit_poly(), &g(1, 0, 0), &half);
        assert!((exact - 0.5).abs() < 1e-12);
        let boxed = overlap_area(&unit(), &unit(), &g(1, 0, 0), &half);
        assert!((boxed - 0.5).abs() < 1e-12);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let p = Point2::new(rng.gen_range(-0.5..1.0), rng.gen_range(-0.5..0.5));
            let in_a = p.x.abs() <= 0.5 && p.y.abs() <= 0.5;
            let in_b = (p.x - 0.5).abs() <= 0.5 && p.y.abs() <= 0.5;
            if in_a && in_b {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64 * 1.5;
        assert!((mc - exact).abs() < 1e-2, "monte carlo {mc}");
    }

    #[test]
    fn contact_side_far_and_corner() {
        let band = model().band;
        let side = contact_length(&unit(), &unit(), &g(1, 0, 0), &lattice(), band);
        assert!((side - 1.0).abs() <= band, "side {side}");
        assert_eq!(contact_length(&unit(), &unit(), &g(10, 0, 0), &lattice(), band), 0.0);
        let corner = contact_length(&unit(), &unit(), &g(1, 1, 0), &lattice(), band);
        assert!(corner < 0.1, "corner {corner}");
    }

    #[test]
    fn labels_for_canonical_offsets() {
        let m = model();
        let l = lattice();
        assert_eq!(classify_region(&unit(), &unit(), &g(0, 0, 0), &l, &m), RegionLabel::Overlapping);
        assert_eq!(classify_region(&unit(), &unit(), &g(1, 0, 0), &l, &m), RegionLabel::Adjacent);
        assert_eq!(classify_region(&unit(), &unit(), &g(5, 0, 0), &l, &m), RegionLabel::Neutral);
        assert_eq!(classify_region(&unit(), &unit(), &g(1, 1, 0), &l, &m), RegionLabel::Neutral);
    }

    #[test]
    fn brute_force_square_grid_labels() {
        let m = model();
        let l = lattice();
        for dx in -2..=2 {
            for dy in -2..=2 {
                for r in 0..4 {
                    let lab = classify_region(&unit(), &unit(), &g(dx, dy, r), &l, &m);
                    let lab_poly = classify_region(&unit_poly(), &unit_poly(), &g(dx, dy, r), &l, &m);
                    assert_eq!(lab, lab_poly);
                    if (dx.abs() == 1 && dy == 0) || (dy.abs() == 1 && dx == 0) {
                        assert_eq!(lab, RegionLabel::Adjacent);
                    }
                    if dx.abs() >= 2 && dy.abs() >= 2 {
                        assert_eq!(lab, RegionLabel::Neutral);
                    }
                }
            }
        }
    }

    #[test]
    fn masks_match_squares() {
        let cells: Vec<(i32, i32)> = (-2..2).flat_map(|x| (-2..2).map(move |y| (x, y))).collect();
        let mask = PieceShape::Mask(Mask::from_indices(0.25, &cells).unwrap());
        let m = model();
        let l = lattice();
        for dx in -2..=2 {
            for dy in -2..=2 {
                for r in 0..4 {
                    let gm = g(dx, dy, r);
                    assert_eq!(
                        classify_region(&mask, &mask, &gm, &l, &m),
                        classify_region(&unit(), &unit(), &gm, &l, &m)
                    );
                    let om = overlap_area(&mask, &unit_poly(), &gm, &l);
                    let os = overlap_area(&unit(), &unit(), &gm, &l);
                    assert!((om - os).abs() < 1e-9);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn overlap_symmetric_under_inverse(
            cells_a in proptest::collection::hash_set((0i32..3, 0i32..3), 1..6),
            dx in -2i32..=2, dy in -2i32..=2, r in 0u32..4,
        ) {
            let cells: Vec<(i32, i32)> = cells_a.into_iter().collect();
            let l = lattice();
            let rs = l.rotations;
            let gm = g(dx, dy, r);
            let mask = PieceShape::Mask(Mask::from_indices(0.5, &cells).unwrap());
            let a = overlap_area(&mask, &unit(), &gm, &l);
            let b = overlap_area(&unit(), &mask, &gm.inverse(rs), &l);
            prop_assert!((a - b).abs() <= 1e-6 * a.max(b).max(1e-12));
            if let Ok(p) = Polygon::from_cells(&cells, 0.5, Point2::ORIGIN) {
                let poly = PieceShape::Polygon(p);
                let a = overlap_area(&poly, &unit_poly(), &gm, &l);
                let b = overlap_area(&unit_poly(), &poly, &gm.inverse(rs), &l);
                prop_assert!((a - b).abs() <= 1e-6 * a.max(b).max(1e-12));
            }
        }
    }
}
