//! `linepuzzle`: generate, ingest, solve, evaluate and render puzzles.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linepuzzle_core::puzzle::PatternKind;
use linepuzzle_core::Error;

use config::CutKind;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    /// Attach the offending file to a core error.
    pub fn at(path: &std::path::Path) -> impl FnOnce(Error) -> CliError + '_ {
        move |e| {
            let mut c = CliError::from(e);
            c.message = format!("{}: {}", path.display(), c.message);
            c
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 1,
            Error::Solver(_) => 3,
            Error::Geometry(_) | Error::Puzzle(_) | Error::Format { .. } | Error::Io(_) => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser, Debug)]
#[command(name = "linepuzzle", version, about = "Reassemble line-drawing jigsaw puzzles")]
struct Cli {
    /// Config file, TOML or JSON (by extension). Defaults to $LINEPUZZLE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random line drawing cut into a scrambled puzzle descriptor.
    Generate(GenerateArgs),
    /// Polyline file cut into a scrambled puzzle descriptor.
    Ingest(IngestArgs),
    /// Solve a descriptor into a placement.
    Solve(SolveArgs),
    /// Score placements against ground truth.
    Evaluate(EvaluateArgs),
    /// Draw a descriptor, optionally with a placement, as SVG.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct CutArgs {
    #[arg(long, value_enum)]
    cut: Option<CutKind>,
    #[arg(long)]
    rows: Option<u32>,
    #[arg(long)]
    cols: Option<u32>,
    /// Tiling for polygonal cuts: brick, ltromino or mixed.
    #[arg(long)]
    pattern: Option<PatternKind>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rotation set size: 1, 2 or 4.
    #[arg(long)]
    rotations: Option<u32>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long)]
    categories: Option<u32>,
    #[command(flatten)]
    cut: CutArgs,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Polyline file.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    cut: CutArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum AnchorArg {
    Auto,
    Piece(u32),
}

fn parse_anchor(s: &str) -> Result<AnchorArg, String> {
    match s {
        "auto" => Ok(AnchorArg::Auto),
        _ => s
            .parse()
            .map(AnchorArg::Piece)
            .map_err(|_| format!("expected 'auto' or a piece id, got '{s}'")),
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Puzzle descriptor.
    #[arg(long = "in")]
    input: PathBuf,
    /// Placement file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_anchor)]
    anchor: Option<AnchorArg>,
    #[arg(long)]
    rotations: Option<u32>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Convergence threshold on the largest probability change.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the per-iteration trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the payoff table dump here.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Descriptor with ground truth.
    #[arg(long = "in", requires = "placement", conflicts_with = "batch")]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    placement: Option<PathBuf>,
    /// Directory of `*.puzzle` descriptors, each with a `<name>.placement`.
    #[arg(long, required_unless_present = "input")]
    batch: Option<PathBuf>,
    /// Where batch placements live; defaults to the batch directory.
    #[arg(long, requires = "batch")]
    placements: Option<PathBuf>,
    /// Metrics file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare poses without global alignment.
    #[arg(long)]
    strict: bool,
    /// Translation tolerance in canvas units.
    #[arg(long)]
    tol_t: Option<f64>,
    /// Rotation tolerance in rotation steps.
    #[arg(long)]
    tol_r: Option<u32>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, conflicts_with = "truth")]
    placement: Option<PathBuf>,
    /// Draw the ground-truth placement.
    #[arg(long)]
    truth: bool,
    /// Put the ground truth beside the placement.
    #[arg(long)]
    compare: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::from(Error::Config("x".into())).code, 1);
        assert_eq!(CliError::from(Error::Format { line: 3, message: "x".into() }).code, 2);
        assert_eq!(CliError::from(Error::Puzzle("x".into())).code, 2);
        assert_eq!(CliError::from(Error::Solver("x".into())).code, 3);
    }
}
