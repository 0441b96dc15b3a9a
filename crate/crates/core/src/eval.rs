//! Direct (D) and neighbour (N) reconstruction scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::Placement;
use crate::error::{Error, Result};
use crate::geometry::{Lattice, Point2, Pose};
use crate::puzzle::{CutScheme, Puzzle};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub direct: f64,
    pub neighbors: Option<f64>,
    /// In increasing piece id order.
    pub per_piece_correct: Vec<bool>,
    pub translation_tolerance: f64,
    pub rotation_tolerance_steps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Defaults to 0 for squares and polygons and a quarter of the mean
    /// piece diameter for irregular cuts.
    pub translation_tolerance: Option<f64>,
    pub rotation_tolerance_steps: u32,
    /// Compare absolute poses as given, without the best global alignment.
    pub strict: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            translation_tolerance: None,
            rotation_tolerance_steps: 0,
            strict: false,
        }
    }
}

/// Fraction of pieces whose pose matches the truth. Unless `strict`, the
/// placement is first moved by the grid rotation and translation that
/// maximises the count; candidates map one placed piece exactly onto its
/// true pose. A zero translation tolerance still forgives rounding noise.
pub fn direct_metric(
    placement: &Placement,
    truth: &BTreeMap<u32, Pose>,
    lattice: &Lattice,
    tol_translation: f64,
    tol_rotation_steps: u32,
    strict: bool,
) -> Result<MetricReport> {
    check_ids(placement, truth)?;
    let rotations = lattice.rotations;
    let tol = tol_translation.max(1e-6 * lattice.grid_step);
    let score = |r: u32, t: Point2| -> Vec<bool> {
        let q = rotations.quarter_turns(r);
        truth
            .iter()
            .map(|(id, want)| {
                placement.poses.get(id).map_or(false, |got| {
                    let pos = got.position.rotate_quarter(q) + t;
                    let rot = rotations.compose(got.rotation, r);
                    pos.dist(want.position) <= tol && rotations.distance(rot, want.rotation) <= tol_rotation_steps
                })
            })
            .collect()
    };
    let mut best = score(0, Point2::ORIGIN);
    if !strict {
        for (id, got) in &placement.poses {
            let want = &truth[id];
            let r = rotations.compose(want.rotation, rotations.inverse(got.rotation));
            let t = want.position - got.position.rotate_quarter(rotations.quarter_turns(r));
            let cand = score(r, t);
            if count(&cand) > count(&best) {
                best = cand;
            }
        }
    }
    Ok(MetricReport {
        direct: count(&best) as f64 / truth.len() as f64,
        neighbors: None,
        per_piece_correct: best,
        translation_tolerance: tol_translation,
        rotation_tolerance_steps: tol_rotation_steps,
    })
}

fn count(v: &[bool]) -> usize {
    v.iter().filter(|&&b| b).count()
}

fn check_ids(placement: &Placement, truth: &BTreeMap<u32, Pose>) -> Result<()> {
    let mut ids: Vec<u32> = placement.poses.keys().chain(&placement.unplaced).copied().collect();
    ids.sort_unstable();
    if truth.is_empty() || !ids.iter().copied().eq(truth.keys().copied()) {
        return Err(Error::Puzzle("placement and ground truth cover different pieces".into()));
    }
    Ok(())
}

/// Fraction of ordered 4-neighbour pairs of the truth whose relative offset
/// and rotation survive in the placement.
pub fn neighbors_metric(placement: &Placement, truth: &BTreeMap<u32, Pose>, lattice: &Lattice) -> Result<f64> {
    check_ids(placement, truth)?;
    let step = lattice.grid_step;
    let mut total = 0usize;
    let mut good = 0usize;
    for (a, pa) in truth {
        for (b, pb) in truth {
            let d = pb.position - pa.position;
            let adjacent = (d.norm() - step).abs() < 1e-6 * step && (d.x.abs() < 1e-6 * step || d.y.abs() < 1e-6 * step);
            if a == b || !adjacent {
                continue;
            }
            total += 1;
            if let (Some(ga), Some(gb)) = (placement.poses.get(a), placement.poses.get(b)) {
                if ga.relative(gb, lattice) == pa.relative(pb, lattice) && on_lattice(ga, gb, lattice) {
                    good += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(Error::Puzzle("ground truth has no adjacent pieces".into()));
    }
    Ok(good as f64 / total as f64)
}

fn on_lattice(a: &Pose, b: &Pose, lattice: &Lattice) -> bool {
    let d = (b.position - a.position) * (1.0 / lattice.grid_step);
    (d.x - d.x.round()).abs() < 1e-6 && (d.y - d.y.round()).abs() < 1e-6
}

/// D, and N for puzzles made only of square cells, with default tolerances
/// for the cut scheme unless overridden.
pub fn evaluate(puzzle: &Puzzle, placement: &Placement, opts: &EvalOptions) -> Result<MetricReport> {
    let truth = puzzle.truth()?;
    let lattice = Lattice::new(puzzle.grid_step, puzzle.rotations)?;
    let tol = opts.translation_tolerance.unwrap_or_else(|| default_translation_tolerance(puzzle));
    let mut report = direct_metric(placement, truth, &lattice, tol, opts.rotation_tolerance_steps, opts.strict)?;
    if puzzle.pieces.iter().all(|p| p.shape.is_square()) && puzzle.pieces.len() > 1 {
        report.neighbors = Some(neighbors_metric(placement, truth, &lattice)?);
    }
    Ok(report)
}

pub fn default_translation_tolerance(puzzle: &Puzzle) -> f64 {
    match puzzle.cut {
        CutScheme::Irregular { .. } => {
            let n = puzzle.pieces.len().max(1) as f64;
            0.25 * puzzle.pieces.iter().map(|p| p.shape.diameter()).sum::<f64>() / n
        }
        _ => 0.0,
    }
}
