use std::fmt::Write;

use super::{real, Records};
use crate::error::{Error, Result};
use crate::eval::MetricReport;

/// One evaluated puzzle.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub puzzle: String,
    pub direct: f64,
    pub neighbors: Option<f64>,
    pub pieces: usize,
    pub translation_tolerance: f64,
    pub rotation_tolerance_steps: u32,
}

impl MetricRecord {
    pub fn new(puzzle: impl Into<String>, m: &MetricReport) -> Self {
        MetricRecord {
            puzzle: puzzle.into(),
            direct: m.direct,
            neighbors: m.neighbors,
            pieces: m.per_piece_correct.len(),
            translation_tolerance: m.translation_tolerance,
            rotation_tolerance_steps: m.rotation_tolerance_steps,
        }
    }
}

const KIND: &str = "linepuzzle-metrics";
const VERSION: u32 = 1;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), real)
}

/// ```text
/// linepuzzle-metrics 1
/// record <puzzle> <D> <N or -> <pieces> <translation tol> <rotation tol>
/// mean <D> <N or ->
/// ```
///
/// The mean of N covers the records that have it. Puzzle names may not
/// contain whitespace.
pub fn write_metrics(records: &[MetricRecord]) -> Result<String> {
    let mut s = format!("{KIND} {VERSION}\n");
    for r in records {
        if r.puzzle.is_empty() || r.puzzle.contains(char::is_whitespace) || r.puzzle.starts_with('#') {
            return Err(Error::Config(format!("puzzle name {:?} cannot be written", r.puzzle)));
        }
        writeln!(
            s,
            "record {} {} {} {} {} {}",
            r.puzzle,
            real(r.direct),
            opt(r.neighbors),
            r.pieces,
            real(r.translation_tolerance),
            r.rotation_tolerance_steps
        )
        .unwrap();
    }
    let (d, n) = means(records);
    writeln!(s, "mean {} {}", opt(d), opt(n)).unwrap();
    Ok(s)
}

/// Mean D over all records and mean N over records that report N.
pub fn means(records: &[MetricRecord]) -> (Option<f64>, Option<f64>) {
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    (
        mean(records.iter().map(|r| r.direct).collect()),
        mean(records.iter().filter_map(|r| r.neighbors).collect()),
    )
}

pub fn read_metrics(text: &str) -> Result<Vec<MetricRecord>> {
    let mut rec = Records::new(text);
    rec.header(KIND, VERSION)?;
    let mut out = Vec::new();
    loop {
        let r = rec
            .next_record()
            .ok_or_else(|| Error::format(rec.line() + 1, "missing 'mean' record"))?;
        match r.fields[0] {
            "record" => {
                r.arity(7)?;
                let neighbors = match r.fields[3] {
                    "-" => None,
                    _ => Some(r.real(3)?),
                };
                out.push(MetricRecord {
                    puzzle: r.fields[1].to_string(),
                    direct: r.real(2)?,
                    neighbors,
                    pieces: r.parse(4)?,
                    translation_tolerance: r.real(5)?,
                    rotation_tolerance_steps: r.parse(6)?,
                });
            }
            "mean" => {
                r.arity(3)?;
                if let Some(extra) = rec.next_record() {
                    return Err(Error::format(extra.line, "records after 'mean'"));
                }
                return Ok(out);
            }
            other => return Err(Error::format(r.line, format!("unknown record '{other}'"))),
        }
    }
}
