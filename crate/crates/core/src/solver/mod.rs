//! Multi-population discrete replicator dynamics over a polymatrix game.
//!
//! Every piece is a player; its pure strategies are the (position, rotation)
//! pairs of a global grid centred on the anchor piece. Raw payoffs can be
//! negative, so each opponent contributes an extra `shift / n`, which keeps
//! every payoff non-negative without changing any best response.

mod game;

pub use game::{DensePolymatrix, PolymatrixGame, PuzzleGame};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotate_cells, Lattice, Point2, Pose, RelativeStrategy};
use crate::puzzle::Piece;

/// Admissible global poses: a rectangle of lattice cells centred on the origin
/// times every rotation. Strategy `h` is position `h / R`, rotation `h % R`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGrid {
    half_x: i32,
    half_y: i32,
    lattice: Lattice,
}

impl StrategyGrid {
    /// Cells `-half_x..=half_x` by `-half_y..=half_y`.
    pub fn centered(half_x: u32, half_y: u32, lattice: Lattice) -> Result<Self> {
        if half_x > 1 << 12 || half_y > 1 << 12 {
            return Err(Error::Config(format!("strategy grid {half_x}x{half_y} is too large")));
        }
        Ok(StrategyGrid {
            half_x: half_x as i32,
            half_y: half_y as i32,
            lattice,
        })
    }

    /// Grid that fits a `cols × rows` canvas whichever piece is the anchor.
    pub fn for_cells(cols: u32, rows: u32, lattice: Lattice) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::Config("canvas has no cells".into()));
        }
        StrategyGrid::centered(cols - 1, rows - 1, lattice)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn width(&self) -> usize {
        (2 * self.half_x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (2 * self.half_y + 1) as usize
    }

    pub fn position_count(&self) -> usize {
        self.width() * self.height()
    }

    pub fn rotation_count(&self) -> usize {
        self.lattice.rotations.count() as usize
    }

    pub fn strategy_count(&self) -> usize {
        self.position_count() * self.rotation_count()
    }

    pub fn index(&self, cell: (i32, i32), rotation: u32) -> Option<usize> {
        let (x, y) = cell;
        if x.abs() > self.half_x || y.abs() > self.half_y || rotation >= self.lattice.rotations.count() {
            return None;
        }
        let pos = (y + self.half_y) as usize * self.width() + (x + self.half_x) as usize;
        Some(pos * self.rotation_count() + rotation as usize)
    }

    pub fn cell(&self, h: usize) -> (i32, i32) {
        let pos = h / self.rotation_count();
        (
            (pos % self.width()) as i32 - self.half_x,
            (pos / self.width()) as i32 - self.half_y,
        )
    }

    pub fn rotation(&self, h: usize) -> u32 {
        (h % self.rotation_count()) as u32
    }

    pub fn position(&self, h: usize) -> Point2 {
        let (x, y) = self.cell(h);
        Point2::new(f64::from(x), f64::from(y)) * self.lattice.grid_step
    }

    pub fn pose(&self, h: usize) -> Pose {
        Pose::new(self.position(h), self.rotation(h))
    }

    /// Centre cell, rotation 0.
    pub fn center(&self) -> usize {
        self.index((0, 0), 0).expect("origin is always on the grid")
    }

    /// Strategy of a second player at relative pose `gamma` from strategy `h`.
    pub fn neighbour(&self, h: usize, gamma: &RelativeStrategy) -> Option<usize> {
        let r = self.rotation(h);
        let (x, y) = self.cell(h);
        let (ox, oy) = rotate_cells(gamma.dx, gamma.dy, self.lattice.rotations.quarter_turns(r));
        self.index((x + ox, y + oy), self.lattice.rotations.compose(r, gamma.d_rotation))
    }
}

/// Row-stochastic `n × c` matrix of mixed strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategyProfile {
    n: usize,
    c: usize,
    x: Vec<f64>,
    anchor: Option<(usize, usize)>,
}

impl MixedStrategyProfile {
    pub fn uniform(n: usize, c: usize, anchor: Option<(usize, usize)>) -> Result<Self> {
        let mut p = MixedStrategyProfile {
            n,
            c,
            x: vec![1.0 / c as f64; n * c],
            anchor: None,
        };
        p.check_shape()?;
        if let Some(a) = anchor {
            p.set_anchor(a)?;
        }
        Ok(p)
    }

    /// Validates non-negativity and unit row sums within `1e-9`.
    pub fn from_rows(rows: &[Vec<f64>], anchor: Option<(usize, usize)>) -> Result<Self> {
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(n * c);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != c {
                return Err(Error::Config(format!("row {i} has {} entries, expected {c}", r.len())));
            }
            x.extend_from_slice(r);
        }
        let p = MixedStrategyProfile { n, c, x, anchor: None };
        p.check_shape()?;
        let err = p.simplex_error();
        if err > 1e-9 || err.is_nan() {
            return Err(Error::Config(format!("profile rows leave the simplex by {err:e}")));
        }
        let mut p = p;
        if let Some(a) = anchor {
            if p.row(a.0).iter().enumerate().any(|(h, &v)| v != if h == a.1 { 1.0 } else { 0.0 }) {
                return Err(Error::Config(format!("anchor row {} is not a vertex", a.0)));
            }
            p.set_anchor(a)?;
        }
        Ok(p)
    }

    /// Every row an indicator vector.
    pub fn vertices(c: usize, strategies: &[usize], anchor: Option<(usize, usize)>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = strategies
            .iter()
            .map(|&h| (0..c).map(|k| if k == h { 1.0 } else { 0.0 }).collect())
            .collect();
        if strategies.iter().any(|&h| h >= c) {
            return Err(Error::Config(format!("strategy out of range 0..{c}")));
        }
        MixedStrategyProfile::from_rows(&rows, anchor)
    }

    fn check_shape(&self) -> Result<()> {
        if self.n == 0 || self.c == 0 {
            return Err(Error::Config(format!("empty profile {}x{}", self.n, self.c)));
        }
        Ok(())
    }

    fn set_anchor(&mut self, (i, h): (usize, usize)) -> Result<()> {
        if i >= self.n || h >= self.c {
            return Err(Error::Config(format!("anchor ({i}, {h}) outside {}x{}", self.n, self.c)));
        }
        let row = &mut self.x[i * self.c..(i + 1) * self.c];
        row.fill(0.0);
        row[h] = 1.0;
        self.anchor = Some((i, h));
        Ok(())
    }

    pub fn player_count(&self) -> usize {
        self.n
    }

    pub fn strategy_count(&self) -> usize {
        self.c
    }

    pub fn anchor(&self) -> Option<(usize, usize)> {
        self.anchor
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.c..(i + 1) * self.c]
    }

    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.x[i * self.c + h]
    }

    /// Row-major probabilities.
    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    /// Most probable strategy, lowest index on ties.
    pub fn argmax(&self, i: usize) -> usize {
        let row = self.row(i);
        let mut best = 0;
        for (h, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = h;
            }
        }
        best
    }

    pub fn max_probability(&self, i: usize) -> f64 {
        self.row(i)[self.argmax(i)]
    }

    /// Largest violation of non-negativity or unit row sum.
    pub fn simplex_error(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let neg = row.iter().fold(0.0f64, |m, &v| m.max(-v));
                let sum: f64 = row.iter().sum();
                neg.max((sum - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference.
    pub fn max_change(&self, other: &MixedStrategyProfile) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `n × c` payoff matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub n: usize,
    pub c: usize,
    pub values: Vec<f64>,
}

impl PayoffMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.c..(i + 1) * self.c]
    }

    pub fn scaled(&self, factor: f64) -> PayoffMatrix {
        PayoffMatrix {
            n: self.n,
            c: self.c,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once no probability moves by this much in one step.
    pub convergence_epsilon: f64,
    /// Total shift added to each expected payoff, `shift / n` per opponent.
    /// Defaults to `n` times the largest penalty (at least `n`).
    pub payoff_shift: Option<f64>,
    pub init_noise: f64,
    pub nash_epsilon: f64,
    pub seed: u64,
    /// Independent runs with seeds `seed, seed + 1, ...`; the one with the
    /// smallest Nash residual is kept.
    pub restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 5000,
            convergence_epsilon: 1e-6,
            payoff_shift: None,
            init_noise: 0.01,
            nash_epsilon: 1e-4,
            seed: 0,
            restarts: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.convergence_epsilon > 0.0) {
            return bad(format!("convergence_epsilon must be positive, got {}", self.convergence_epsilon));
        }
        if !(self.nash_epsilon > 0.0) {
            return bad(format!("nash_epsilon must be positive, got {}", self.nash_epsilon));
        }
        if !(0.0..0.5).contains(&self.init_noise) {
            return bad(format!("init_noise must be in [0, 0.5), got {}", self.init_noise));
        }
        if let Some(s) = self.payoff_shift {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("payoff_shift must be positive, got {s}"));
            }
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        Ok(())
    }

    /// The shift to use for `game`, checked to keep payoffs non-negative.
    pub fn resolve_shift<G: PolymatrixGame + ?Sized>(&self, game: &G) -> Result<f64> {
        let n = game.player_count() as f64;
        let required = n * game.max_penalty();
        match self.payoff_shift {
            None => Ok(required.max(n)),
            Some(s) if s >= required => Ok(s),
            Some(s) => Err(Error::Config(format!(
                "payoff_shift {s} is below {required}, payoffs would go negative"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub final_profile: MixedStrategyProfile,
    pub iterations_run: usize,
    pub converged: bool,
    pub nash_residual: f64,
    /// Mean unshifted expected payoff over players, one entry per iteration.
    pub payoff_trajectory: Vec<f64>,
    /// Largest probability change, one entry per iteration.
    pub change_trajectory: Vec<f64>,
    pub payoff_shift: f64,
    pub seed: u64,
    /// Every restart in order, including the one reported above.
    pub runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub nash_residual: f64,
}

/// `A_ij(h, k) + shift / n`.
pub fn global_payoff<G: PolymatrixGame + ?Sized>(game: &G, shift: f64, i: usize, h: usize, j: usize, k: usize) -> f64 {
    game.payoff(i, h, j, k) + shift / game.player_count() as f64
}

/// `π_ih = Σ_{j≠i} Σ_k x_jk (A_ij(h, k) + shift / n)`.
pub fn expected_payoffs<G: PolymatrixGame + ?Sized>(game: &G, x: &MixedStrategyProfile, shift: f64) -> PayoffMatrix {
    let (n, c) = (x.player_count(), x.strategy_count());
    debug_assert_eq!((n, c), (game.player_count(), game.strategy_count()));
    let base = (n - 1) as f64 * shift / n as f64;
    let mut values = vec![base; n * c];
    values
        .par_chunks_mut(c)
        .enumerate()
        .for_each(|(i, out)| game.accumulate_row(i, x, out));
    PayoffMatrix { n, c, values }
}

/// One replicator update `x_ih ← x_ih π_ih / Σ_k x_ik π_ik`, rows renormalised;
/// the anchor row is copied unchanged.
pub fn replicator_step(x: &MixedStrategyProfile, payoffs: &PayoffMatrix) -> Result<MixedStrategyProfile> {
    let mut next = x.clone();
    replicator_into(x, payoffs, &mut next)?;
    Ok(next)
}

fn replicator_into(x: &MixedStrategyProfile, payoffs: &PayoffMatrix, next: &mut MixedStrategyProfile) -> Result<()> {
    let c = x.c;
    for i in 0..x.n {
        let row = x.row(i);
        let out = &mut next.x[i * c..(i + 1) * c];
        if x.anchor.map(|a| a.0) == Some(i) {
            out.copy_from_slice(row);
            continue;
        }
        let pi = payoffs.row(i);
        let avg: f64 = row.iter().zip(pi).map(|(a, b)| a * b).sum();
        if !(avg > 0.0) {
            return Err(Error::Solver(format!(
                "piece {i} has average payoff {avg}; the payoff shift is too small"
            )));
        }
        let mut sum = 0.0;
        for ((o, &a), &p) in out.iter_mut().zip(row).zip(pi) {
            *o = a * p / avg;
            sum += *o;
        }
        for o in out.iter_mut() {
            *o /= sum;
        }
    }
    Ok(())
}

/// Uniform rows, each entry scaled by a seeded factor in `1 ± noise` and
/// renormalised; the anchor row is its indicator.
pub fn initialize(n: usize, c: usize, anchor: Option<(usize, usize)>, cfg: &SolverConfig) -> Result<MixedStrategyProfile> {
    let mut p = MixedStrategyProfile::uniform(n, c, None)?;
    if cfg.init_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for i in 0..n {
            let row = &mut p.x[i * c..(i + 1) * c];
            for v in row.iter_mut() {
                *v *= 1.0 + rng.gen_range(-cfg.init_noise..=cfg.init_noise);
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    if let Some(a) = anchor {
        p.set_anchor(a)?;
    }
    Ok(p)
}

/// Largest best-response gap `max_h π_ih − Σ_h x_ih π_ih` over non-anchor players.
pub fn nash_residual(x: &MixedStrategyProfile, payoffs: &PayoffMatrix) -> f64 {
    (0..x.n)
        .filter(|&i| x.anchor.map(|a| a.0) != Some(i))
        .map(|i| {
            let pi = payoffs.row(i);
            let best = pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let avg: f64 = x.row(i).iter().zip(pi).map(|(a, b)| a * b).sum();
            (best - avg).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Stepwise replicator run, for callers that inspect every iterate.
pub struct Replicator<'g, G: PolymatrixGame + ?Sized> {
    game: &'g G,
    shift: f64,
    x: MixedStrategyProfile,
    spare: MixedStrategyProfile,
    iteration: usize,
}

impl<'g, G: PolymatrixGame + ?Sized> Replicator<'g, G> {
    pub fn new(game: &'g G, anchor: Option<(usize, usize)>, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let shift = cfg.resolve_shift(game)?;
        let x = initialize(game.player_count(), game.strategy_count(), anchor, cfg)?;
        Ok(Replicator {
            game,
            shift,
            spare: x.clone(),
            x,
            iteration: 0,
        })
    }

    pub fn profile(&self) -> &MixedStrategyProfile {
        &self.x
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn payoffs(&self) -> PayoffMatrix {
        expected_payoffs(self.game, &self.x, self.shift)
    }

    /// Advance one step; returns the mean unshifted payoff before the step and
    /// the largest probability change.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        let pi = self.payoffs();
        let n = self.x.n as f64;
        let base = (n - 1.0) * self.shift / n;
        let mean = (0..self.x.n)
            .map(|i| self.x.row(i).iter().zip(pi.row(i)).map(|(a, b)| a * b).sum::<f64>() - base)
            .sum::<f64>()
            / n;
        replicator_into(&self.x, &pi, &mut self.spare)?;
        self.iteration += 1;
        if self.spare.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite probability at iteration {}", self.iteration)));
        }
        std::mem::swap(&mut self.x, &mut self.spare);
        Ok((mean, self.x.max_change(&self.spare)))
    }
}

/// Iterate until no probability moves by `convergence_epsilon` or the
/// iteration budget runs out. Restarts, when configured, keep the run with
/// the smallest Nash residual.
pub fn solve<G: PolymatrixGame + ?Sized>(
    game: &G,
    anchor: Option<(usize, usize)>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let mut best: Option<SolveReport> = None;
    let mut runs = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let run_cfg = SolverConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..*cfg
        };
        let report = solve_once(game, anchor, &run_cfg)?;
        runs.push(report.runs[0]);
        if best.as_ref().map_or(true, |b| report.nash_residual < b.nash_residual) {
            best = Some(report);
        }
    }
    let mut best = best.expect("at least one run");
    best.runs = runs;
    Ok(best)
}

fn solve_once<G: PolymatrixGame + ?Sized>(
    game: &G,
    anchor: Option<(usize, usize)>,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    let mut run = Replicator::new(game, anchor, cfg)?;
    let mut payoff_trajectory = Vec::new();
    let mut change_trajectory = Vec::new();
    let mut settled = false;
    while run.iteration() < cfg.max_iterations {
        let (mean, change) = run.step()?;
        payoff_trajectory.push(mean);
        change_trajectory.push(change);
        if change < cfg.convergence_epsilon {
            settled = true;
            break;
        }
    }
    let residual = nash_residual(run.profile(), &run.payoffs());
    let converged = settled && residual < cfg.nash_epsilon;
    Ok(SolveReport {
        iterations_run: run.iteration(),
        converged,
        nash_residual: residual,
        payoff_trajectory,
        change_trajectory,
        payoff_shift: run.shift(),
        seed: cfg.seed,
        runs: vec![RunSummary {
            seed: cfg.seed,
            iterations: run.iteration(),
            converged,
            nash_residual: residual,
        }],
        final_profile: run.x,
    })
}

/// Piece with the most lines (lowest index on ties) at the grid centre, rotation 0.
pub fn default_anchor(pieces: &[Piece], grid: &StrategyGrid) -> Result<(usize, usize)> {
    let mut best: Option<usize> = None;
    for (i, p) in pieces.iter().enumerate() {
        if best.map_or(true, |b| p.anchor_hint > pieces[b].anchor_hint) {
            best = Some(i);
        }
    }
    best.map(|i| (i, grid.center()))
        .ok_or_else(|| Error::Puzzle("no pieces to anchor".into()))
}
