//! Good-continuation compatibility between pieces and the sparse partial
//! payoff tables built from it.
//!
//! For a candidate relative pose, each piece keeps only the lines reaching the
//! shared border. The two sets are matched by a linear assignment over
//! per-pair continuation costs; every line left unmatched adds a fixed
//! penalty. The total cost is truncated and normalised by `tau` into a score
//! in `[0, 1]`.

mod lap;
mod table;

pub use lap::lap_assign;
pub use table::{build_payoff_table, gamma_set, proximity_radius, PartialPayoffTable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    angle_difference, contact_segments, point_segment_distance, ContactModel, Edge, Lattice, LineSegment,
    PieceShape, Point2, RelativeStrategy,
};
use crate::puzzle::Piece;

/// User-facing matching parameters; unset values are derived from the puzzle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchParams {
    pub epsilon_angle_deg: f64,
    /// Defaults to the canvas diagonal.
    pub cost_max: Option<f64>,
    /// Per unmatched line; defaults to half of `cost_max`.
    pub penalty_k: Option<f64>,
    /// Fixed normaliser; calibrated from the best pair costs when unset.
    pub tau: Option<f64>,
    pub tau_multiplier: f64,
    pub tau_floor: f64,
    /// Defaults to the contact band width.
    pub coherence_band: Option<f64>,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            epsilon_angle_deg: 10.0,
            cost_max: None,
            penalty_k: None,
            tau: None,
            tau_multiplier: 2.0,
            tau_floor: 1e-6,
            coherence_band: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tau {
    Fixed(f64),
    Auto { multiplier: f64, floor: f64 },
}

/// Resolved matching constants for one puzzle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineMatchConfig {
    pub epsilon_angle: f64,
    pub cost_max: f64,
    pub penalty_k: f64,
    pub tau: Tau,
    pub coherence_band: f64,
}

impl LineMatchConfig {
    pub fn resolve(params: &MatchParams, canvas_diagonal: f64, contact: &ContactModel) -> Result<Self> {
        let cost_max = params.cost_max.unwrap_or(canvas_diagonal);
        let cfg = LineMatchConfig {
            epsilon_angle: params.epsilon_angle_deg.to_radians(),
            cost_max,
            penalty_k: params.penalty_k.unwrap_or(cost_max / 2.0),
            tau: match params.tau {
                Some(t) => Tau::Fixed(t),
                None => Tau::Auto {
                    multiplier: params.tau_multiplier,
                    floor: params.tau_floor,
                },
            },
            coherence_band: params.coherence_band.unwrap_or(contact.band),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.epsilon_angle > 0.0 && self.epsilon_angle < half_pi) {
            return Err(Error::Config(format!(
                "angle tolerance must lie in (0, 90) degrees, got {}",
                self.epsilon_angle.to_degrees()
            )));
        }
        if !(self.cost_max > 0.0 && self.penalty_k > 0.0 && self.coherence_band >= 0.0) {
            return Err(Error::Config("cost_max and penalty_k must be positive".into()));
        }
        match self.tau {
            Tau::Fixed(t) if !(t > 0.0) => Err(Error::Config(format!("tau must be positive, got {t}"))),
            Tau::Auto { multiplier, floor } if !(multiplier > 0.0 && floor > 0.0) => {
                Err(Error::Config("tau multiplier and floor must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Effort needed to continue `a` with `b`: the closest endpoint distance when
/// the orientations agree within tolerance and the categories match,
/// `cost_max` otherwise. Both lines must be in the same frame.
pub fn line_cost(a: &LineSegment, b: &LineSegment, cfg: &LineMatchConfig) -> f64 {
    if a.category != b.category || angle_difference(a.angle, b.angle) >= cfg.epsilon_angle {
        return cfg.cost_max;
    }
    let mut best = f64::INFINITY;
    for p in a.endpoints() {
        for q in b.endpoints() {
            best = best.min(p.dist(q));
        }
    }
    best
}

/// An endpoint within `band` of the contact zone whose continuation, a
/// further `band` past the endpoint, lands inside `other` (placed by `q`, `t`).
/// Lines leaving through a perpendicular edge next to a corner of the zone
/// are thereby skipped.
fn near_contact(l: &LineSegment, zone: &[Edge], band: f64, other: &PieceShape, q: u32, t: Point2) -> bool {
    let [a, b] = l.endpoints();
    [(a, b), (b, a)].iter().any(|&(p, o)| {
        if !zone.iter().any(|e| point_segment_distance(p, e.a, e.b) <= band) {
            return false;
        }
        let dir = p - o;
        let probe = p + dir * (band / dir.norm());
        other.contains((probe - t).rotate_quarter((4 - q) % 4))
    })
}

/// Lines of `piece` that reach the border it shares with `other` placed at
/// `gamma` and continue into `other`, in original order.
pub fn coherent_lines(
    piece: &Piece,
    other: &PieceShape,
    gamma: &RelativeStrategy,
    lattice: &Lattice,
    contact_band: f64,
    cfg: &LineMatchConfig,
) -> Vec<LineSegment> {
    let zone = contact_segments(&piece.shape, other, gamma, lattice, contact_band);
    if zone.is_empty() {
        return Vec::new();
    }
    let (q, t) = gamma.placement(lattice);
    piece
        .lines
        .iter()
        .filter(|l| near_contact(l, &zone, cfg.coherence_band, other, q, t))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCost {
    pub lap_cost: f64,
    pub penalty: f64,
    pub total: f64,
    /// `(index in L_i|γ, index in L_j|γ)`.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_count: usize,
    /// Both coherent sets were empty; `total` is then the neutral cost.
    pub empty: bool,
}

/// Cost of continuing lines across the border of `i` and `j` placed at
/// `gamma`. With no coherent lines on either side the total is
/// `neutral_empty_cost`.
pub fn pair_cost(
    i: &Piece,
    j: &Piece,
    gamma: &RelativeStrategy,
    lattice: &Lattice,
    contact_band: f64,
    cfg: &LineMatchConfig,
    neutral_empty_cost: f64,
) -> PairCost {
    let li = coherent_lines(i, &j.shape, gamma, lattice, contact_band, cfg);
    let inv = gamma.inverse(lattice.rotations);
    let (q, t) = gamma.placement(lattice);
    let lj: Vec<LineSegment> = coherent_lines(j, &i.shape, &inv, lattice, contact_band, cfg)
        .iter()
        .map(|l| l.transformed(q, t))
        .collect();
    match_line_sets(&li, &lj, cfg, neutral_empty_cost)
}

/// Assignment plus penalty for two line sets already in a common frame.
pub fn match_line_sets(
    li: &[LineSegment],
    lj: &[LineSegment],
    cfg: &LineMatchConfig,
    neutral_empty_cost: f64,
) -> PairCost {
    if li.is_empty() && lj.is_empty() {
        return PairCost {
            lap_cost: 0.0,
            penalty: 0.0,
            total: neutral_empty_cost,
            matches: Vec::new(),
            unmatched_count: 0,
            empty: true,
        };
    }
    let costs: Vec<Vec<f64>> = li
        .iter()
        .map(|a| lj.iter().map(|b| line_cost(a, b, cfg)).collect())
        .collect();
    let (matches, lap_cost) = lap_assign(&costs);
    let unmatched_count = li.len().abs_diff(lj.len());
    let penalty = cfg.penalty_k * unmatched_count as f64;
    PairCost {
        lap_cost,
        penalty,
        total: lap_cost + penalty,
        matches,
        unmatched_count,
        empty: false,
    }
}

/// `1 - min(c, tau) / tau`.
pub fn compatibility_score(c_tot: f64, tau: f64) -> f64 {
    1.0 - c_tot.min(tau) / tau
}

/// `multiplier × median` of the per-pair best costs, floored at `floor`.
/// Non-finite entries are ignored; with no data the floor is returned.
pub fn calibrate_tau(best_costs: &[f64], multiplier: f64, floor: f64) -> f64 {
    let mut v: Vec<f64> = best_costs.iter().copied().filter(|c| c.is_finite()).collect();
    if v.is_empty() {
        return floor;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let median = if m % 2 == 1 { v[m / 2] } else { (v[m / 2 - 1] + v[m / 2]) / 2.0 };
    (multiplier * median).max(floor)
}
