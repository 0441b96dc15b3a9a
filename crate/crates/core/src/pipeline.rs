//! Payoff table, replicator solve and decoding for one puzzle.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::assembly::{decode, Placement};
use crate::compat::{build_payoff_table, proximity_radius, LineMatchConfig, MatchParams, PartialPayoffTable};
use crate::error::{Error, Result};
use crate::geometry::{ContactModel, GeometryConfig, Lattice};
use crate::puzzle::Puzzle;
use crate::solver::{default_anchor, solve, PuzzleGame, SolveReport, SolverConfig, StrategyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub geometry: GeometryConfig,
    pub matching: MatchParams,
    pub solver: SolverConfig,
    /// Anchor piece id; the piece with the most lines when unset.
    pub anchor: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimings {
    pub payoff_build: Duration,
    pub solve: Duration,
    pub decode: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub placement: Placement,
    pub report: SolveReport,
    pub anchor_id: u32,
    pub strategy_count: usize,
    pub radius: i32,
    pub tau: f64,
    pub table_entries: usize,
    pub timings: PhaseTimings,
}

/// Everything the solver derives from a puzzle before iterating.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub lattice: Lattice,
    pub model: ContactModel,
    pub matching: LineMatchConfig,
    pub radius: i32,
    pub grid: StrategyGrid,
}

pub fn prepare(puzzle: &Puzzle, cfg: &PipelineConfig) -> Result<Prepared> {
    let lattice = Lattice::new(puzzle.grid_step, puzzle.rotations)?;
    let shapes = || puzzle.pieces.iter().map(|p| &p.shape);
    let model = ContactModel::for_shapes(&cfg.geometry, shapes());
    let diag = puzzle.canvas_width.hypot(puzzle.canvas_height);
    let matching = LineMatchConfig::resolve(&cfg.matching, diag, &model)?;
    let radius = match cfg.geometry.proximity_radius {
        Some(r) if r >= 1 => r,
        Some(r) => return Err(Error::Config(format!("proximity_radius must be at least 1, got {r}"))),
        None => proximity_radius(shapes(), puzzle.grid_step),
    };
    let cols = (puzzle.canvas_width / puzzle.grid_step).round() as u32;
    let rows = (puzzle.canvas_height / puzzle.grid_step).round() as u32;
    let grid = StrategyGrid::for_cells(cols, rows, lattice)?;
    Ok(Prepared {
        lattice,
        model,
        matching,
        radius,
        grid,
    })
}

pub fn payoff_table(puzzle: &Puzzle, prep: &Prepared) -> Result<PartialPayoffTable> {
    build_payoff_table(&puzzle.pieces, &prep.lattice, prep.radius, &prep.model, &prep.matching)
}

/// Solve a puzzle. Only pieces, canvas size, grid step and rotation set are
/// read; any ground truth is ignored.
pub fn solve_puzzle(puzzle: &Puzzle, cfg: &PipelineConfig) -> Result<SolveOutcome> {
    cfg.solver.validate()?;
    let prep = prepare(puzzle, cfg)?;

    let t0 = Instant::now();
    let table = payoff_table(puzzle, &prep)?;
    let payoff_build = t0.elapsed();
    let tau = table.tau();
    let table_entries = table.len();

    let anchor = match cfg.anchor {
        None => default_anchor(&puzzle.pieces, &prep.grid)?,
        Some(id) => {
            let i = puzzle
                .pieces
                .iter()
                .position(|p| p.id == id)
                .ok_or_else(|| Error::Config(format!("anchor piece {id} does not exist")))?;
            (i, prep.grid.center())
        }
    };
    let game = PuzzleGame::new(table, prep.grid.clone())?;
    let t1 = Instant::now();
    let report = solve(&game, Some(anchor), &cfg.solver)?;
    let solve_time = t1.elapsed();

    let t2 = Instant::now();
    let placement = decode(&report.final_profile, &prep.grid, &puzzle.pieces, &prep.model);
    let decode_time = t2.elapsed();

    Ok(SolveOutcome {
        placement,
        report,
        anchor_id: puzzle.pieces[anchor.0].id,
        strategy_count: prep.grid.strategy_count(),
        radius: prep.radius,
        tau,
        table_entries,
        timings: PhaseTimings {
            payoff_build,
            solve: solve_time,
            decode: decode_time,
        },
    })
}
