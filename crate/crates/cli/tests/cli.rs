use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use linepuzzle_core::io::{read_descriptor, read_metrics};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_linepuzzle"));
    c.env_remove("LINEPUZZLE_CONFIG");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn manifest(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&read(p)).unwrap()
}

fn sample_map() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_map.poly")
}

#[test]
fn generate_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = ["generate", "--cut", "irregular", "--rows", "4", "--cols", "4", "--seed", "1"];
    ok(d.path(), &[&args[..], &["--out", "a.puzzle"]].concat());
    ok(d.path(), &[&args[..], &["--out", "b.puzzle"]].concat());
    assert_eq!(read(d.path().join("a.puzzle")), read(d.path().join("b.puzzle")));
    let p = read_descriptor(&read(d.path().join("a.puzzle"))).unwrap();
    assert_eq!(p.pieces.len(), 16);
}

#[test]
fn generate_dispatches_cuts() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--cut", "polygonal", "--pattern", "brick", "--rows", "4", "--cols", "4", "--out", "p.puzzle"]);
    let p = read_descriptor(&read(d.path().join("p.puzzle"))).unwrap();
    assert!(!p.is_square_cut());
    ok(d.path(), &["generate", "--lines", "50", "--categories", "1", "--out", "s.puzzle"]);
    let s = read_descriptor(&read(d.path().join("s.puzzle"))).unwrap();
    assert_eq!(s.pieces.len(), 9);
    assert!(s.is_square_cut());
}

#[test]
fn usage_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["generate", "--cut", "square", "--pattern", "brick", "--out", "x"][..],
        &["solve", "--in", "x"],
        &["solve", "--in", "x", "--out", "y", "--anchor", "first"],
        &["frobnicate"],
        &["evaluate"],
        &["generate", "--rotations", "3", "--out", "x"],
    ] {
        assert_eq!(run(d.path(), args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn input_errors_exit_2_with_line_numbers() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.puzzle"), "linepuzzle-descriptor 1\ncanvas 10\n").unwrap();
    let out = run(d.path(), &["solve", "--in", "bad.puzzle", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(run(d.path(), &["solve", "--in", "missing", "--out", "x"]).status.code(), Some(2));
    std::fs::write(d.path().join("empty.poly"), "").unwrap();
    assert_eq!(run(d.path(), &["ingest", "--in", "empty.poly", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn solve_then_evaluate_is_perfect_on_baseline() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--lines", "50", "--categories", "1", "--seed", "2", "--out", "a.puzzle"]);
    ok(d.path(), &["solve", "--in", "a.puzzle", "--out", "a.placement", "--trace", "a.trace"]);
    let out = ok(d.path(), &["evaluate", "--in", "a.puzzle", "--placement", "a.placement"]);
    let recs = read_metrics(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(recs[0].direct, 1.0);
    assert_eq!(recs[0].neighbors, Some(1.0));
    assert!(read(d.path().join("a.trace")).starts_with("linepuzzle-trace 1\n"));
}

fn strip_truth(text: &str) -> String {
    let end = text.find("\nend\n").expect("descriptor has an end record");
    text[..end + 5].to_string()
}

fn without(mut v: Value, keys: &[&str]) -> Value {
    for k in keys {
        v.as_object_mut().unwrap().remove(*k);
    }
    v
}

#[test]
fn ground_truth_does_not_reach_the_solver() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--width", "400", "--height", "300", "--rows", "3", "--cols", "4", "--seed", "9", "--out", "full.puzzle"]);
    let full = read(d.path().join("full.puzzle"));
    let bare = strip_truth(&full);
    assert!(full.contains("ground_truth") && !bare.contains("ground_truth"));
    std::fs::write(d.path().join("bare.puzzle"), &bare).unwrap();
    for name in ["full", "bare"] {
        ok(
            d.path(),
            &[
                "solve",
                "--in",
                &format!("{name}.puzzle"),
                "--out",
                &format!("{name}.placement"),
                "--trace",
                &format!("{name}.trace"),
                "--table",
                &format!("{name}.table"),
                "--manifest",
                &format!("{name}.json"),
            ],
        );
    }
    for ext in ["placement", "trace", "table"] {
        assert_eq!(read(d.path().join(format!("full.{ext}"))), read(d.path().join(format!("bare.{ext}"))), "{ext}");
    }
    let strip = |v| without(v, &["timings_ms", "inputs", "outputs"]);
    assert_eq!(strip(manifest(d.path().join("full.json"))), strip(manifest(d.path().join("bare.json"))));
}

#[test]
fn manifest_config_reproduces_outputs() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--cut", "polygonal", "--pattern", "mixed", "--rows", "4", "--cols", "4", "--categories", "5", "--seed", "4", "--out", "g.puzzle"]);
    let m = manifest(d.path().join("g.puzzle.manifest.json"));
    std::fs::write(d.path().join("g.json"), m["config"].to_string()).unwrap();
    ok(d.path(), &["--config", "g.json", "generate", "--out", "g2.puzzle"]);
    assert_eq!(read(d.path().join("g.puzzle")), read(d.path().join("g2.puzzle")));

    ok(d.path(), &["solve", "--in", "g.puzzle", "--out", "s.placement", "--seed", "17", "--max-iters", "300", "--anchor", "2"]);
    let m = manifest(d.path().join("s.placement.manifest.json"));
    assert_eq!(m["config"]["solver"]["max_iterations"], 300);
    assert_eq!(m["result"]["anchor"], 2);
    std::fs::write(d.path().join("s.json"), m["config"].to_string()).unwrap();
    let again = bin()
        .current_dir(d.path())
        .env("LINEPUZZLE_CONFIG", "s.json")
        .args(["solve", "--in", "g.puzzle", "--out", "s2.placement"])
        .output()
        .unwrap();
    assert!(again.status.success());
    assert_eq!(read(d.path().join("s.placement")), read(d.path().join("s2.placement")));
}

#[test]
fn flags_override_config_file() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.toml"), "[generate]\nrows = 2\ncols = 2\nseed = 5\n").unwrap();
    ok(d.path(), &["--config", "c.toml", "generate", "--out", "a.puzzle"]);
    ok(d.path(), &["--config", "c.toml", "generate", "--rows", "3", "--cols", "3", "--out", "b.puzzle"]);
    assert_eq!(read_descriptor(&read(d.path().join("a.puzzle"))).unwrap().pieces.len(), 4);
    assert_eq!(read_descriptor(&read(d.path().join("b.puzzle"))).unwrap().pieces.len(), 9);
    std::fs::write(d.path().join("bad.toml"), "[generate]\nrowz = 2\n").unwrap();
    assert_eq!(run(d.path(), &["--config", "bad.toml", "generate", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn restarts_are_recorded_and_best_kept() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--seed", "6", "--out", "a.puzzle"]);
    ok(d.path(), &["solve", "--in", "a.puzzle", "--out", "a.placement", "--restarts", "3", "--seed", "10"]);
    let m = manifest(d.path().join("a.placement.manifest.json"));
    let runs = m["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let seeds: Vec<u64> = runs.iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, vec![10, 11, 12]);
    let best = runs
        .iter()
        .min_by(|a, b| a["nash_residual"].as_f64().unwrap().total_cmp(&b["nash_residual"].as_f64().unwrap()))
        .unwrap();
    assert_eq!(m["result"]["selected_seed"], best["seed"]);
}

#[test]
fn fixed_orientation_uses_positions_only() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--rotations", "1", "--out", "a.puzzle"]);
    ok(d.path(), &["solve", "--in", "a.puzzle", "--out", "a.placement", "--rotations", "1"]);
    let m = manifest(d.path().join("a.placement.manifest.json"));
    // A 3×3 canvas gives a 5×5 grid of relative positions.
    assert_eq!(m["result"]["strategy_count"], 25);
}

#[test]
fn batch_evaluation_reports_every_puzzle() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--seed", "1", "--out", "sq.puzzle"]);
    ok(d.path(), &["generate", "--cut", "irregular", "--rows", "3", "--cols", "3", "--seed", "2", "--out", "irr.puzzle"]);
    for name in ["sq", "irr"] {
        ok(d.path(), &["solve", "--in", &format!("{name}.puzzle"), "--out", &format!("{name}.placement")]);
    }
    ok(d.path(), &["evaluate", "--batch", ".", "--out", "metrics.txt"]);
    let text = read(d.path().join("metrics.txt"));
    let recs = read_metrics(&text).unwrap();
    let names: Vec<&str> = recs.iter().map(|r| r.puzzle.as_str()).collect();
    assert_eq!(names, vec!["irr", "sq"]);
    assert_eq!(recs[0].neighbors, None);
    assert!(recs[1].neighbors.is_some());
    assert!(text.lines().last().unwrap().starts_with("mean "));
    assert!(d.path().join("metrics.txt.manifest.json").exists());
}

#[test]
fn ingest_sample_map_end_to_end() {
    let d = tempfile::tempdir().unwrap();
    let map = sample_map();
    ok(d.path(), &["ingest", "--in", map.to_str().unwrap(), "--rows", "4", "--cols", "4", "--out", "m.puzzle"]);
    ok(d.path(), &["solve", "--in", "m.puzzle", "--out", "m.placement"]);
    let out = ok(d.path(), &["evaluate", "--in", "m.puzzle", "--placement", "m.placement"]);
    let recs = read_metrics(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(recs[0].direct > 0.0);
    let m = manifest(d.path().join("m.puzzle.manifest.json"));
    assert_eq!(m["categories"].as_array().unwrap().len(), 5);
}

#[test]
fn ingest_clips_at_cut_borders() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("one.poly"), "canvas 100 100\nroad 10,25 90,25 90,75\n").unwrap();
    ok(d.path(), &["ingest", "--in", "one.poly", "--rows", "2", "--cols", "2", "--rotations", "1", "--out", "o.puzzle"]);
    let p = read_descriptor(&read(d.path().join("o.puzzle"))).unwrap();
    let total: f64 = p.pieces.iter().flat_map(|pc| &pc.lines).map(|l| l.length()).sum();
    assert!((total - 130.0).abs() < 1.3, "{total}");
    // Horizontal run split at x = 50, vertical run at y = 50.
    assert_eq!(p.pieces.iter().map(|pc| pc.lines.len()).sum::<usize>(), 4);
}

#[test]
fn render_outputs() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--categories", "5", "--lines", "40", "--seed", "3", "--out", "a.puzzle"]);
    ok(d.path(), &["render", "--in", "a.puzzle", "--out", "sheet.svg"]);
    ok(d.path(), &["render", "--in", "a.puzzle", "--out", "sheet2.svg"]);
    assert_eq!(read(d.path().join("sheet.svg")), read(d.path().join("sheet2.svg")));
    let sheet = read(d.path().join("sheet.svg"));
    let colors: std::collections::BTreeSet<&str> = sheet
        .lines()
        .filter(|l| l.starts_with("<line"))
        .filter_map(|l| l.split("stroke=\"").nth(1)?.split('"').next())
        .collect();
    assert_eq!(colors.len(), 5);
    ok(d.path(), &["render", "--in", "a.puzzle", "--truth", "--compare", "--out", "cmp.svg"]);
    let cmp = read(d.path().join("cmp.svg"));
    assert!(cmp.contains("ground truth") && cmp.contains("reconstruction"));
    assert_eq!(run(d.path(), &["render", "--in", "a.puzzle", "--compare", "--out", "x.svg"]).status.code(), Some(1));
}

#[test]
fn render_matches_golden() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["generate", "--width", "200", "--height", "200", "--rows", "2", "--cols", "2", "--lines", "6", "--categories", "3", "--seed", "5", "--out", "g.puzzle"]);
    ok(d.path(), &["render", "--in", "g.puzzle", "--truth", "--out", "g.svg"]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/truth_2x2.svg");
    assert_eq!(read(d.path().join("g.svg")), read(golden));
}
