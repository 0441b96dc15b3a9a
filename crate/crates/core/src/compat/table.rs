use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{calibrate_tau, compatibility_score, pair_cost, LineMatchConfig, Tau};
use crate::error::{Error, Result};
use crate::geometry::{classify_region, ContactModel, Lattice, PieceShape, RegionLabel, RelativeStrategy, RotationSet};
use crate::puzzle::Piece;

/// Sparse partial payoffs `Ã_ij(γ)` keyed by piece index pair and relative
/// pose. Absent keys are neutral (0); `i = j` is `-1` for every pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialPayoffTable {
    n: usize,
    rotations: RotationSet,
    radius: i32,
    tau: f64,
    pairs: BTreeMap<(usize, usize), Vec<(RelativeStrategy, f64)>>,
}

impl PartialPayoffTable {
    pub fn new(n: usize, rotations: RotationSet, radius: i32, tau: f64) -> Self {
        PartialPayoffTable {
            n,
            rotations,
            radius,
            tau,
            pairs: BTreeMap::new(),
        }
    }

    pub fn piece_count(&self) -> usize {
        self.n
    }

    pub fn rotations(&self) -> RotationSet {
        self.rotations
    }

    /// Largest `|dx|`, `|dy|` of any stored pose.
    pub fn radius(&self) -> i32 {
        self.radius
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Store `value` for `(i, j, γ)` and `(j, i, γ⁻¹)`.
    pub fn insert_symmetric(&mut self, i: usize, j: usize, gamma: RelativeStrategy, value: f64) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::Config(format!("invalid payoff pair ({i}, {j}) for {} pieces", self.n)));
        }
        if gamma.chebyshev() > self.radius {
            return Err(Error::Config(format!("pose {gamma:?} outside radius {}", self.radius)));
        }
        self.insert_one(i, j, gamma, value);
        self.insert_one(j, i, gamma.inverse(self.rotations), value);
        Ok(())
    }

    /// Store one orientation only; the caller keeps the table symmetric.
    pub(crate) fn insert_raw(&mut self, i: usize, j: usize, gamma: RelativeStrategy, value: f64) -> Result<()> {
        if i == j || i >= self.n || j >= self.n || gamma.chebyshev() > self.radius || gamma.d_rotation >= self.rotations.count() {
            return Err(Error::Config(format!("invalid payoff entry ({i}, {j}, {gamma:?})")));
        }
        self.insert_one(i, j, gamma, value);
        Ok(())
    }

    /// Whether every entry has its mirror `(j, i, γ⁻¹)` with the same value.
    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j, g, v)| {
            let inv = g.inverse(self.rotations);
            let row = self.pair(j, i);
            row.binary_search_by(|e| e.0.cmp(&inv)).map_or(false, |k| row[k].1 == v)
        })
    }

    fn insert_one(&mut self, i: usize, j: usize, gamma: RelativeStrategy, value: f64) {
        let row = self.pairs.entry((i, j)).or_default();
        match row.binary_search_by(|e| e.0.cmp(&gamma)) {
            Ok(k) => row[k].1 = value,
            Err(k) => row.insert(k, (gamma, value)),
        }
    }

    pub fn get(&self, i: usize, j: usize, gamma: &RelativeStrategy) -> f64 {
        if i == j {
            return -1.0;
        }
        self.pairs
            .get(&(i, j))
            .and_then(|row| row.binary_search_by(|e| e.0.cmp(gamma)).ok().map(|k| row[k].1))
            .unwrap_or(0.0)
    }

    /// Stored entries of the ordered pair, sorted by pose.
    pub fn pair(&self, i: usize, j: usize) -> &[(RelativeStrategy, f64)] {
        self.pairs.get(&(i, j)).map_or(&[], Vec::as_slice)
    }

    /// All stored entries in lexicographic `(i, j, γ)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, RelativeStrategy, f64)> + '_ {
        self.pairs
            .iter()
            .flat_map(|(&(i, j), row)| row.iter().map(move |&(g, v)| (i, j, g, v)))
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Magnitude of the most negative stored payoff, 0 when none is negative.
    pub fn max_penalty(&self) -> f64 {
        self.iter().map(|e| -e.3).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        for row in t.pairs.values_mut() {
            for e in row.iter_mut() {
                e.1 *= factor;
            }
        }
        t
    }
}

/// Radius in cells covering every adjacent or overlapping pose of two pieces
/// plus a one-cell neutral margin.
pub fn proximity_radius<'a>(shapes: impl IntoIterator<Item = &'a PieceShape>, grid_step: f64) -> i32 {
    let reach = shapes.into_iter().map(PieceShape::reach).fold(0.0, f64::max);
    let cells = (2.0 * reach / grid_step - 1e-9).ceil() as i32;
    (cells + 1).max(2)
}

/// Every relative pose within `radius`, in lexicographic order.
pub fn gamma_set(radius: i32, rotations: RotationSet) -> Vec<RelativeStrategy> {
    let mut out = Vec::with_capacity(((2 * radius + 1).pow(2) as usize) * rotations.count() as usize);
    for dx in -radius..=radius {
        for dy in -radius..=radius {
            for r in 0..rotations.count() {
                out.push(RelativeStrategy::new(dx, dy, r));
            }
        }
    }
    out
}

enum Outcome {
    Overlap,
    Cost { total: f64, empty: bool },
}

fn evaluate_pair(
    a: &Piece,
    b: &Piece,
    gammas: &[RelativeStrategy],
    lattice: &Lattice,
    model: &ContactModel,
    cfg: &LineMatchConfig,
) -> Vec<(RelativeStrategy, Outcome)> {
    let mut out = Vec::new();
    for g in gammas {
        match classify_region(&a.shape, &b.shape, g, lattice, model) {
            RegionLabel::Overlapping => out.push((*g, Outcome::Overlap)),
            RegionLabel::Adjacent => {
                let pc = pair_cost(a, b, g, lattice, model.band, cfg, f64::INFINITY);
                out.push((
                    *g,
                    Outcome::Cost {
                        total: pc.total,
                        empty: pc.empty,
                    },
                ));
            }
            RegionLabel::Neutral => {}
        }
    }
    out
}

/// Partial payoff tables for every ordered pair of pieces, indexed by the
/// pieces' positions in `pieces`. Overlapping poses get `-1`; adjacent poses
/// get their compatibility score when positive; everything else is neutral.
/// Each unordered pair is evaluated once and written in both orientations.
pub fn build_payoff_table(
    pieces: &[Piece],
    lattice: &Lattice,
    radius: i32,
    model: &ContactModel,
    cfg: &LineMatchConfig,
) -> Result<PartialPayoffTable> {
    let n = pieces.len();
    if n < 2 {
        return Err(Error::Puzzle(format!("need at least two pieces, got {n}")));
    }
    let gammas = gamma_set(radius, lattice.rotations);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let results: Vec<Vec<(RelativeStrategy, Outcome)>> = pairs
        .par_iter()
        .map(|&(a, b)| evaluate_pair(&pieces[a], &pieces[b], &gammas, lattice, model, cfg))
        .collect();

    let tau = match cfg.tau {
        Tau::Fixed(t) => t,
        Tau::Auto { multiplier, floor } => {
            let best: Vec<f64> = results
                .iter()
                .filter_map(|row| {
                    row.iter()
                        .filter_map(|(_, o)| match o {
                            Outcome::Cost { total, empty: false } => Some(*total),
                            _ => None,
                        })
                        .min_by(f64::total_cmp)
                })
                .collect();
            calibrate_tau(&best, multiplier, floor)
        }
    };

    let mut table = PartialPayoffTable::new(n, lattice.rotations, radius, tau);
    for (&(a, b), row) in pairs.iter().zip(&results) {
        for (g, outcome) in row {
            let value = match *outcome {
                Outcome::Overlap => -1.0,
                Outcome::Cost { empty: true, .. } => continue,
                Outcome::Cost { total, .. } => compatibility_score(total, tau),
            };
            if value != 0.0 {
                table.insert_symmetric(a, b, *g, value)?;
            }
        }
    }
    Ok(table)
}
