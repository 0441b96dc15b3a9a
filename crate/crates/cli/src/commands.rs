use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use linepuzzle_core::eval::evaluate;
use linepuzzle_core::geometry::RotationSet;
use linepuzzle_core::io::{
    read_descriptor, read_descriptor_for_solving, read_placement, read_polylines, write_descriptor, write_metrics,
    write_placement, write_table, write_trace, MetricRecord, SolveTrace,
};
use linepuzzle_core::pipeline::{payoff_table, prepare, solve_puzzle};
use linepuzzle_core::puzzle::{
    cut_irregular, cut_polygonal, cut_square, generate_lines, scramble, LineSet, PolygonPattern, Puzzle,
};
use linepuzzle_core::render::{render_pieces, render_placement};
use linepuzzle_core::assembly::Placement;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{CutKind, GenerateSettings, Settings};
use crate::{AnchorArg, Cli, CliError, Command, CutArgs, EvaluateArgs, GenerateArgs, IngestArgs, RenderArgs, SolveArgs};

type Res<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> Res<()> {
    let (mut settings, config_path) = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(a) => generate(&mut settings, config_path, a),
        Command::Ingest(a) => ingest(&mut settings, config_path, a),
        Command::Solve(a) => solve(&mut settings, config_path, a),
        Command::Evaluate(a) => evaluate_cmd(&mut settings, config_path, a),
        Command::Render(a) => render(settings, config_path, a),
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn manifest_path(explicit: Option<PathBuf>, out: &Path) -> PathBuf {
    explicit.unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", out.display())))
}

struct Manifest<'a> {
    command: &'a str,
    settings: &'a Settings,
    config_path: Option<PathBuf>,
    seed: u64,
    inputs: Value,
    outputs: Value,
    timings_ms: Value,
    extra: Value,
}

impl Manifest<'_> {
    fn write(self, path: &Path) -> Res<()> {
        let mut v = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_file": self.config_path.map(|p| p.display().to_string()),
            "config": self.settings,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings_ms": self.timings_ms,
        });
        if let Value::Object(extra) = self.extra {
            v.as_object_mut().unwrap().extend(extra);
        }
        let text = serde_json::to_string_pretty(&v).expect("manifest serialises") + "\n";
        write(path, &text)
    }
}

fn apply_cut_flags(g: &mut GenerateSettings, a: &CutArgs) -> Res<()> {
    if let Some(v) = a.cut {
        g.cut = v;
    }
    if let Some(v) = a.rows {
        g.rows = v;
    }
    if let Some(v) = a.cols {
        g.cols = v;
    }
    if let Some(v) = a.pattern {
        if g.cut != CutKind::Polygonal {
            return Err(CliError::usage("--pattern only applies to --cut polygonal"));
        }
        g.pattern = v;
    }
    if let Some(v) = a.seed {
        g.seed = v;
    }
    if let Some(v) = a.rotations {
        g.rotations = v;
    }
    Ok(())
}

/// Cut, attach the rotation set and scramble.
fn make_puzzle(ls: &LineSet, g: &GenerateSettings) -> Res<Puzzle> {
    let rotations = RotationSet::new(g.rotations)?;
    let cut = match g.cut {
        CutKind::Square => cut_square(ls, g.rows, g.cols)?,
        CutKind::Polygonal => cut_polygonal(ls, PolygonPattern::new(g.pattern, g.rows, g.cols)?)?,
        CutKind::Irregular => cut_irregular(ls, g.seed, g.rows, g.cols, g.irregular)?,
    };
    Ok(scramble(&cut.with_rotations(rotations), g.seed.wrapping_add(1)))
}

fn generate(s: &mut Settings, config_path: Option<PathBuf>, a: GenerateArgs) -> Res<()> {
    let g = &mut s.generate;
    if let Some(v) = a.width {
        g.width = v;
    }
    if let Some(v) = a.height {
        g.height = v;
    }
    if let Some(v) = a.lines {
        g.lines = v;
    }
    if let Some(v) = a.categories {
        g.categories = v;
    }
    apply_cut_flags(g, &a.cut)?;
    let t0 = Instant::now();
    let ls = generate_lines(g.width, g.height, g.lines, g.categories, g.seed)?;
    let puzzle = make_puzzle(&ls, g)?;
    let elapsed = t0.elapsed();
    write(&a.out, &write_descriptor(&puzzle))?;
    eprintln!("wrote {} pieces to {}", puzzle.pieces.len(), a.out.display());
    let mpath = manifest_path(a.manifest, &a.out);
    Manifest {
        command: "generate",
        settings: s,
        config_path,
        seed: s.generate.seed,
        inputs: json!({}),
        outputs: json!({ "descriptor": a.out, "manifest": mpath }),
        timings_ms: json!({ "generate": ms(elapsed) }),
        extra: json!({ "pieces": puzzle.pieces.len() }),
    }
    .write(&mpath)
}

fn ingest(s: &mut Settings, config_path: Option<PathBuf>, a: IngestArgs) -> Res<()> {
    apply_cut_flags(&mut s.generate, &a.cut)?;
    let t0 = Instant::now();
    let poly = read_polylines(&read(&a.input)?).map_err(CliError::at(&a.input))?;
    let puzzle = make_puzzle(&poly.lines, &s.generate)?;
    let elapsed = t0.elapsed();
    write(&a.out, &write_descriptor(&puzzle))?;
    eprintln!(
        "{} segments in {} categories, {} pieces written to {}",
        poly.lines.lines.len(),
        poly.labels.len(),
        puzzle.pieces.len(),
        a.out.display()
    );
    let mpath = manifest_path(a.manifest, &a.out);
    Manifest {
        command: "ingest",
        settings: s,
        config_path,
        seed: s.generate.seed,
        inputs: json!({ "polylines": a.input }),
        outputs: json!({ "descriptor": a.out, "manifest": mpath }),
        timings_ms: json!({ "ingest": ms(elapsed) }),
        extra: json!({ "categories": poly.labels, "segments": poly.lines.lines.len(), "pieces": puzzle.pieces.len() }),
    }
    .write(&mpath)
}

fn solve(s: &mut Settings, config_path: Option<PathBuf>, a: SolveArgs) -> Res<()> {
    match a.anchor {
        Some(AnchorArg::Auto) => s.solve.anchor = None,
        Some(AnchorArg::Piece(id)) => s.solve.anchor = Some(id),
        None => {}
    }
    if let Some(v) = a.rotations {
        s.solve.rotations = Some(v);
    }
    if let Some(v) = a.max_iters {
        s.solver.max_iterations = v;
    }
    if let Some(v) = a.eps {
        s.solver.convergence_epsilon = v;
    }
    if let Some(v) = a.restarts {
        s.solver.restarts = v;
    }
    if let Some(v) = a.seed {
        s.solver.seed = v;
    }
    s.solver.validate()?;

    let mut puzzle = read_descriptor_for_solving(&read(&a.input)?).map_err(CliError::at(&a.input))?;
    if let Some(r) = s.solve.rotations {
        puzzle = puzzle.with_rotations(RotationSet::new(r)?);
    }
    let cfg = s.pipeline();
    if let Some(path) = &a.table {
        let table = payoff_table(&puzzle, &prepare(&puzzle, &cfg)?)?;
        write(path, &write_table(&table))?;
    }
    let out = solve_puzzle(&puzzle, &cfg)?;
    write(&a.out, &write_placement(&out.placement))?;
    if let Some(path) = &a.trace {
        write(path, &write_trace(&SolveTrace::from(&out.report)))?;
    }
    let r = &out.report;
    eprintln!(
        "placed {}/{} pieces, {} iterations, residual {:.3e}{}",
        out.placement.poses.len(),
        puzzle.pieces.len(),
        r.iterations_run,
        r.nash_residual,
        if r.converged { "" } else { " (not converged)" }
    );
    let mpath = manifest_path(a.manifest, &a.out);
    Manifest {
        command: "solve",
        settings: s,
        config_path,
        seed: s.solver.seed,
        inputs: json!({ "descriptor": a.input }),
        outputs: json!({ "placement": a.out, "trace": a.trace, "table": a.table, "manifest": mpath }),
        timings_ms: json!({
            "payoff_build": ms(out.timings.payoff_build),
            "solve": ms(out.timings.solve),
            "decode": ms(out.timings.decode),
        }),
        extra: json!({
            "result": {
                "anchor": out.anchor_id,
                "strategy_count": out.strategy_count,
                "proximity_radius": out.radius,
                "tau": out.tau,
                "table_entries": out.table_entries,
                "selected_seed": r.seed,
                "iterations": r.iterations_run,
                "converged": r.converged,
                "nash_residual": r.nash_residual,
                "payoff_shift": r.payoff_shift,
                "placed": out.placement.poses.len(),
                "unplaced": out.placement.unplaced,
                "conflicts_resolved": out.placement.conflicts_resolved,
            },
            "runs": r.runs,
        }),
    }
    .write(&mpath)
}

fn score(name: String, descriptor: &Path, placement: &Path, s: &Settings) -> Res<MetricRecord> {
    let puzzle = read_descriptor(&read(descriptor)?).map_err(CliError::at(descriptor))?;
    let placed = read_placement(&read(placement)?).map_err(CliError::at(placement))?;
    let report = evaluate(&puzzle, &placed, &s.evaluate).map_err(CliError::at(descriptor))?;
    Ok(MetricRecord::new(name, &report))
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn evaluate_cmd(s: &mut Settings, config_path: Option<PathBuf>, a: EvaluateArgs) -> Res<()> {
    if a.strict {
        s.evaluate.strict = true;
    }
    if let Some(v) = a.tol_t {
        s.evaluate.translation_tolerance = Some(v);
    }
    if let Some(v) = a.tol_r {
        s.evaluate.rotation_tolerance_steps = v;
    }
    let t0 = Instant::now();
    let jobs: Vec<(String, PathBuf, PathBuf)> = match (&a.input, &a.placement, &a.batch) {
        (Some(d), Some(p), None) => vec![(stem(d), d.clone(), p.clone())],
        (None, None, Some(dir)) => {
            let pdir = a.placements.clone().unwrap_or_else(|| dir.clone());
            let entries = std::fs::read_dir(dir)
                .map_err(|e| CliError::input(format!("cannot list {}: {e}", dir.display())))?;
            let mut descriptors: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "puzzle"))
                .collect();
            descriptors.sort();
            if descriptors.is_empty() {
                return Err(CliError::input(format!("no *.puzzle files in {}", dir.display())));
            }
            descriptors
                .into_iter()
                .map(|d| {
                    let name = stem(&d);
                    let p = pdir.join(format!("{name}.placement"));
                    (name, d, p)
                })
                .collect()
        }
        _ => return Err(CliError::usage("give either --in with --placement, or --batch")),
    };
    let records: Vec<MetricRecord> = jobs
        .par_iter()
        .map(|(name, d, p)| score(name.clone(), d, p, s))
        .collect::<Res<_>>()?;
    let text = write_metrics(&records)?;
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    let mpath = a.manifest.or_else(|| a.out.as_ref().map(|o| manifest_path(None, o)));
    if let Some(mpath) = mpath {
        let inputs: Vec<Value> = jobs
            .iter()
            .map(|(_, d, p)| json!({ "descriptor": d, "placement": p }))
            .collect();
        Manifest {
            command: "evaluate",
            settings: s,
            config_path,
            seed: 0,
            inputs: json!(inputs),
            outputs: json!({ "metrics": a.out, "manifest": mpath }),
            timings_ms: json!({ "evaluate": ms(t0.elapsed()) }),
            extra: json!({}),
        }
        .write(&mpath)?;
    }
    Ok(())
}

fn render(s: Settings, config_path: Option<PathBuf>, a: RenderArgs) -> Res<()> {
    let t0 = Instant::now();
    let puzzle = read_descriptor(&read(&a.input)?).map_err(CliError::at(&a.input))?;
    let placement = match (&a.placement, a.truth) {
        (Some(p), _) => Some(read_placement(&read(p)?).map_err(CliError::at(p))?),
        (None, true) => Some(Placement::from_poses(puzzle.truth()?.clone())),
        (None, false) => None,
    };
    let svg = match placement {
        Some(p) => {
            if a.compare && puzzle.ground_truth.is_none() {
                return Err(CliError::input(format!("{} has no ground truth to compare with", a.input.display())));
            }
            render_placement(&puzzle, &p, a.compare)
        }
        None if a.compare => return Err(CliError::usage("--compare needs --placement or --truth")),
        None => render_pieces(&puzzle),
    };
    write(&a.out, &svg)?;
    let mpath = manifest_path(a.manifest, &a.out);
    Manifest {
        command: "render",
        settings: &s,
        config_path,
        seed: 0,
        inputs: json!({ "descriptor": a.input, "placement": a.placement, "truth": a.truth, "compare": a.compare }),
        outputs: json!({ "svg": a.out, "manifest": mpath }),
        timings_ms: json!({ "render": ms(t0.elapsed()) }),
        extra: json!({}),
    }
    .write(&mpath)
}
