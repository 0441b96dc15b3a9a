use std::collections::HashMap;

use super::{MixedStrategyProfile, StrategyGrid};
use crate::compat::PartialPayoffTable;
use crate::error::{Error, Result};
use crate::geometry::RelativeStrategy;

/// A game in which every player shares the same `c` pure strategies and the
/// payoff of player `i` is the sum of pairwise payoffs against every other
/// player. Payoffs returned here are unshifted.
pub trait PolymatrixGame: Sync {
    fn player_count(&self) -> usize;

    fn strategy_count(&self) -> usize;

    /// `A_ij(h, k)`; `-1` whenever `i = j`.
    fn payoff(&self, i: usize, h: usize, j: usize, k: usize) -> f64;

    /// Magnitude of the most negative off-diagonal payoff.
    fn max_penalty(&self) -> f64;

    /// Add `Σ_{j≠i} Σ_k x_jk A_ij(h, k)` to `out[h]` for every `h`.
    fn accumulate_row(&self, i: usize, x: &MixedStrategyProfile, out: &mut [f64]);
}

const NONE: u32 = u32::MAX;

/// A puzzle game: global payoffs are read from the partial table through the
/// relative pose of the two global strategies.
#[derive(Debug, Clone)]
pub struct PuzzleGame {
    table: PartialPayoffTable,
    grid: StrategyGrid,
    /// `targets[g * c + h]`: the strategy of `j` at relative pose `g` from
    /// strategy `h` of `i`, or `NONE` outside the grid.
    targets: Vec<u32>,
    /// Per ordered pair `i * n + j`: `(pose index, payoff)`.
    pairs: Vec<Vec<(usize, f64)>>,
    poses: HashMap<RelativeStrategy, usize>,
}

impl PuzzleGame {
    pub fn new(table: PartialPayoffTable, grid: StrategyGrid) -> Result<Self> {
        if table.rotations() != grid.lattice().rotations {
            return Err(Error::Config(format!(
                "payoff table has {} rotations, grid has {}",
                table.rotations().count(),
                grid.rotation_count()
            )));
        }
        let n = table.piece_count();
        let c = grid.strategy_count();
        let mut poses = HashMap::new();
        let mut targets = Vec::new();
        let mut pairs = vec![Vec::new(); n * n];
        for (i, j, g, v) in table.iter() {
            let gi = *poses.entry(g).or_insert_with(|| {
                targets.extend((0..c).map(|h| grid.neighbour(h, &g).map_or(NONE, |k| k as u32)));
                targets.len() / c - 1
            });
            pairs[i * n + j].push((gi, v));
        }
        Ok(PuzzleGame {
            table,
            grid,
            targets,
            pairs,
            poses,
        })
    }

    pub fn table(&self) -> &PartialPayoffTable {
        &self.table
    }

    pub fn grid(&self) -> &StrategyGrid {
        &self.grid
    }

    /// Relative pose of strategy `k` of `j` seen from strategy `h` of `i`.
    pub fn relative(&self, h: usize, k: usize) -> RelativeStrategy {
        self.grid.pose(h).relative(&self.grid.pose(k), self.grid.lattice())
    }

    /// Number of distinct relative poses with a stored payoff.
    pub fn pose_count(&self) -> usize {
        self.poses.len()
    }
}

impl PolymatrixGame for PuzzleGame {
    fn player_count(&self) -> usize {
        self.table.piece_count()
    }

    fn strategy_count(&self) -> usize {
        self.grid.strategy_count()
    }

    fn payoff(&self, i: usize, h: usize, j: usize, k: usize) -> f64 {
        if i == j {
            return -1.0;
        }
        self.table.get(i, j, &self.relative(h, k))
    }

    fn max_penalty(&self) -> f64 {
        self.table.max_penalty()
    }

    fn accumulate_row(&self, i: usize, x: &MixedStrategyProfile, out: &mut [f64]) {
        let n = self.player_count();
        let c = self.strategy_count();
        for j in (0..n).filter(|&j| j != i) {
            let xj = x.row(j);
            for &(gi, v) in &self.pairs[i * n + j] {
                let map = &self.targets[gi * c..(gi + 1) * c];
                for (o, &k) in out.iter_mut().zip(map) {
                    if k != NONE {
                        *o += v * xj[k as usize];
                    }
                }
            }
        }
    }
}

/// Explicit payoff matrices `A_ij` for every ordered pair of players.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePolymatrix {
    n: usize,
    c: usize,
    /// `[((i * n + j) * c + h) * c + k]`.
    payoffs: Vec<f64>,
}

impl DensePolymatrix {
    /// `blocks[i][j][h][k]`; the diagonal blocks are ignored.
    pub fn new(blocks: &[Vec<Vec<Vec<f64>>>]) -> Result<Self> {
        let n = blocks.len();
        let c = blocks.first().and_then(|b| b.first()).map_or(0, Vec::len);
        if n == 0 || c == 0 {
            return Err(Error::Config("empty game".into()));
        }
        let mut payoffs = vec![0.0; n * n * c * c];
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!("player {i} has {} blocks, expected {n}", row.len())));
            }
            for (j, m) in row.iter().enumerate() {
                if m.len() != c || m.iter().any(|r| r.len() != c) {
                    return Err(Error::Config(format!("block ({i}, {j}) is not {c}x{c}")));
                }
                for (h, r) in m.iter().enumerate() {
                    for (k, &v) in r.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(Error::Config(format!("non-finite payoff in block ({i}, {j})")));
                        }
                        payoffs[((i * n + j) * c + h) * c + k] = if i == j { -1.0 } else { v };
                    }
                }
            }
        }
        Ok(DensePolymatrix { n, c, payoffs })
    }

    /// Dense copy of any game, for oracles on small instances.
    pub fn from_game<G: PolymatrixGame + ?Sized>(game: &G) -> Self {
        let (n, c) = (game.player_count(), game.strategy_count());
        let mut payoffs = vec![0.0; n * n * c * c];
        for i in 0..n {
            for j in 0..n {
                for h in 0..c {
                    for k in 0..c {
                        payoffs[((i * n + j) * c + h) * c + k] = game.payoff(i, h, j, k);
                    }
                }
            }
        }
        DensePolymatrix { n, c, payoffs }
    }
}

impl PolymatrixGame for DensePolymatrix {
    fn player_count(&self) -> usize {
        self.n
    }

    fn strategy_count(&self) -> usize {
        self.c
    }

    fn payoff(&self, i: usize, h: usize, j: usize, k: usize) -> f64 {
        self.payoffs[((i * self.n + j) * self.c + h) * self.c + k]
    }

    fn max_penalty(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (0..self.n).filter(|&j| j != i) {
                let base = (i * self.n + j) * self.c * self.c;
                for &v in &self.payoffs[base..base + self.c * self.c] {
                    worst = worst.max(-v);
                }
            }
        }
        worst
    }

    fn accumulate_row(&self, i: usize, x: &MixedStrategyProfile, out: &mut [f64]) {
        for j in (0..self.n).filter(|&j| j != i) {
            let xj = x.row(j);
            for (h, o) in out.iter_mut().enumerate() {
                let base = ((i * self.n + j) * self.c + h) * self.c;
                *o += self.payoffs[base..base + self.c]
                    .iter()
                    .zip(xj)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
        }
    }
}
