use linepuzzle_core::assembly::{compose_lines, Placement};
use linepuzzle_core::geometry::{Point2, Pose, RotationSet};
use linepuzzle_core::io::{read_descriptor, read_descriptor_for_solving, read_placement, write_descriptor, write_placement};
use linepuzzle_core::pipeline::{solve_puzzle, PipelineConfig};
use linepuzzle_core::puzzle::{
    cut_irregular, cut_polygonal, cut_square, generate_lines, scramble, IrregularParams, PatternKind, PolygonPattern,
    Puzzle,
};
use proptest::prelude::*;

fn puzzle(kind: u8, side: u32, lines: usize, cats: u32, seed: u64) -> Puzzle {
    let extent = 100.0 * f64::from(side);
    let ls = generate_lines(extent, extent, lines, cats, seed).unwrap();
    let p = match kind {
        0 => cut_square(&ls, side, side).unwrap(),
        1 => cut_polygonal(&ls, PolygonPattern::new(PatternKind::Brick, side, side).unwrap()).unwrap(),
        _ => cut_irregular(&ls, seed, side, side, IrregularParams::default()).unwrap(),
    };
    scramble(&p, seed ^ 0xa5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn descriptor_round_trip(kind in 0u8..3, side in 2u32..5, lines in 1usize..40, cats in 1u32..6, seed in 0u64..1000) {
        let p = puzzle(kind, side, lines, cats, seed);
        let text = write_descriptor(&p);
        prop_assert_eq!(read_descriptor(&text).unwrap(), p.clone());
        prop_assert_eq!(read_descriptor_for_solving(&text).unwrap(), p.without_ground_truth());
    }

    #[test]
    fn placement_round_trip(
        poses in proptest::collection::btree_map(0u32..50, (-1e4f64..1e4, -1e4f64..1e4, 0u32..4), 0..20),
        conflicts in 0usize..5,
    ) {
        let mut p = Placement::from_poses(
            poses.into_iter().map(|(id, (x, y, r))| (id, Pose::new(Point2::new(x, y), r))).collect(),
        );
        p.conflicts_resolved = conflicts;
        prop_assert_eq!(read_placement(&write_placement(&p)).unwrap(), p);
    }

    #[test]
    fn cutting_conserves_line_length(kind in 0u8..3, side in 2u32..5, seed in 0u64..1000) {
        let extent = 100.0 * f64::from(side);
        let ls = generate_lines(extent, extent, 30, 2, seed).unwrap();
        let p = puzzle(kind, side, 30, 2, seed);
        let cut: f64 = p.pieces.iter().flat_map(|q| &q.lines).map(|l| l.length()).sum();
        prop_assert!((cut - ls.total_length()).abs() <= 0.01 * ls.total_length());
    }

    #[test]
    fn truth_reassembles_source(side in 2u32..5, seed in 0u64..1000) {
        let extent = 100.0 * f64::from(side);
        let ls = generate_lines(extent, extent, 20, 3, seed).unwrap();
        let p = scramble(&cut_square(&ls, side, side).unwrap(), seed);
        let truth = Placement::from_poses(p.truth().unwrap().clone());
        let back = compose_lines(&truth, &p.pieces, p.rotations);
        let total: f64 = back.lines.iter().map(|l| l.length()).sum();
        prop_assert!((total - ls.total_length()).abs() <= 0.01 * ls.total_length());
        for l in &back.lines {
            let on_source = ls.lines.iter().any(|s| {
                let d = s.end - s.start;
                let len = d.norm();
                [l.start, l.end].iter().all(|&q| ((q - s.start).cross(d) / len).abs() < 1e-6)
                    && s.category == l.category
            });
            prop_assert!(on_source);
        }
    }
}

#[test]
fn solve_is_deterministic_and_ignores_truth() {
    let p = puzzle(0, 3, 50, 1, 12).with_rotations(RotationSet::QUARTER_TURNS);
    let cfg = PipelineConfig::default();
    let a = solve_puzzle(&p, &cfg).unwrap();
    let b = solve_puzzle(&p.clone().without_ground_truth(), &cfg).unwrap();
    assert_eq!(a.placement, b.placement);
    assert_eq!(a.report, b.report);
}
