use std::fmt::Write;

use super::{at, real, Records};
use crate::compat::PartialPayoffTable;
use crate::error::{Error, Result};
use crate::geometry::{RelativeStrategy, RotationSet};
use crate::solver::SolveReport;

/// Per-iteration record of a replicator run, without the final profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub mean_payoff: Vec<f64>,
    pub max_change: Vec<f64>,
    pub converged: bool,
    pub nash_residual: f64,
    pub payoff_shift: f64,
    pub seed: u64,
}

impl From<&SolveReport> for SolveTrace {
    fn from(r: &SolveReport) -> Self {
        SolveTrace {
            mean_payoff: r.payoff_trajectory.clone(),
            max_change: r.change_trajectory.clone(),
            converged: r.converged,
            nash_residual: r.nash_residual,
            payoff_shift: r.payoff_shift,
            seed: r.seed,
        }
    }
}

const TRACE: &str = "linepuzzle-trace";
const TABLE: &str = "linepuzzle-table";
const VERSION: u32 = 1;

/// ```text
/// linepuzzle-trace 1
/// run <seed> <shift> <converged> <residual>
/// <iteration> <mean payoff> <max change>
/// ```
pub fn write_trace(t: &SolveTrace) -> String {
    let mut s = format!("{TRACE} {VERSION}\n");
    writeln!(
        s,
        "run {} {} {} {}",
        t.seed,
        real(t.payoff_shift),
        t.converged,
        real(t.nash_residual)
    )
    .unwrap();
    s.push_str("# iteration mean_payoff max_change\n");
    for (k, (p, c)) in t.mean_payoff.iter().zip(&t.max_change).enumerate() {
        writeln!(s, "{} {} {}", k + 1, real(*p), real(*c)).unwrap();
    }
    s
}

pub fn read_trace(text: &str) -> Result<SolveTrace> {
    let mut rec = Records::new(text);
    rec.header(TRACE, VERSION)?;
    let r = rec.expect("run")?;
    r.arity(5)?;
    let mut t = SolveTrace {
        seed: r.parse(1)?,
        payoff_shift: r.real(2)?,
        converged: r.parse(3)?,
        nash_residual: r.real(4)?,
        mean_payoff: Vec::new(),
        max_change: Vec::new(),
    };
    while let Some(r) = rec.next_record() {
        r.arity(3)?;
        let k: usize = r.parse(0)?;
        if k != t.mean_payoff.len() + 1 {
            return Err(Error::format(r.line, format!("expected iteration {}, got {k}", t.mean_payoff.len() + 1)));
        }
        t.mean_payoff.push(r.real(1)?);
        t.max_change.push(r.real(2)?);
    }
    Ok(t)
}

/// ```text
/// linepuzzle-table 1
/// table <pieces> <rotations> <radius> <tau>
/// <i> <j> <dx> <dy> <drot> <payoff>
/// ```
///
/// Entries in lexicographic order, both orientations of every pair.
pub fn write_table(t: &PartialPayoffTable) -> String {
    let mut s = format!("{TABLE} {VERSION}\n");
    writeln!(
        s,
        "table {} {} {} {}",
        t.piece_count(),
        t.rotations().count(),
        t.radius(),
        real(t.tau())
    )
    .unwrap();
    for (i, j, g, v) in t.iter() {
        writeln!(s, "{i} {j} {} {} {} {}", g.dx, g.dy, g.d_rotation, real(v)).unwrap();
    }
    s
}

pub fn read_table(text: &str) -> Result<PartialPayoffTable> {
    let mut rec = Records::new(text);
    rec.header(TABLE, VERSION)?;
    let r = rec.expect("table")?;
    r.arity(5)?;
    let rotations = RotationSet::new(r.parse(2)?).map_err(|e| at(r.line, e))?;
    let mut t = PartialPayoffTable::new(r.parse(1)?, rotations, r.parse(3)?, r.real(4)?);
    let mut last: Option<(usize, usize, RelativeStrategy)> = None;
    while let Some(r) = rec.next_record() {
        r.arity(6)?;
        let key = (
            r.parse(0)?,
            r.parse(1)?,
            RelativeStrategy::new(r.parse(2)?, r.parse(3)?, r.parse(4)?),
        );
        if last.map_or(false, |l| l >= key) {
            return Err(Error::format(r.line, "entries out of order"));
        }
        let v = r.real(5)?;
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::format(r.line, format!("payoff {v} outside [-1, 1]")));
        }
        t.insert_raw(key.0, key.1, key.2, v).map_err(|e| at(r.line, e))?;
        last = Some(key);
    }
    if !t.is_symmetric() {
        return Err(Error::format(rec.line(), "payoff table is not symmetric"));
    }
    Ok(t)
}
