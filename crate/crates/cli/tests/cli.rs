use std::path::Path;
use std::process::{Command, Output};

const SWEEP: &str = r#"{
  "command": "converge-sweep",
  "seed": 11,
  "trees": {"kind": "kstep", "depth": 12, "d1": [2, 4, 6], "d2": [8, 10]},
  "reps": 50,
  "uct": {"exploration": 1.0},
  "stop": {"max_iterations": 200000, "min_hold": 200}
}"#;

fn sss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sss")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    sss(&args)
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn converge_sweep_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "converge-sweep", SWEEP, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = dir.path().join("out/converge_sweep.csv");
    let header = csv::Reader::from_path(&path).unwrap().headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["d1", "d2", "mean_t_star", "stddev", "non_converged", "runs"]);
    let rows = csv_rows(&path);
    assert_eq!(rows.len(), 6);
    let cells: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(cells, [("2", "8"), ("2", "10"), ("4", "8"), ("4", "10"), ("6", "8"), ("6", "10")]);
    assert!(rows.iter().all(|r| r[5] == "50"));
}

#[test]
fn rerun_is_byte_identical_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_in(a.path(), "converge-sweep", SWEEP, &["--jobs", "1"]).status.success());
    assert!(run_in(b.path(), "converge-sweep", SWEEP, &["--jobs", "3"]).status.success());
    let x = std::fs::read(a.path().join("out/converge_sweep.csv")).unwrap();
    let y = std::fs::read(b.path().join("out/converge_sweep.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn seed_flag_overrides_config() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let shifted = SWEEP.replace("\"seed\": 11", "\"seed\": 12");
    assert!(run_in(a.path(), "converge-sweep", SWEEP, &["--seed", "12"]).status.success());
    assert!(run_in(b.path(), "converge-sweep", &shifted, &[]).status.success());
    assert!(run_in(c.path(), "converge-sweep", SWEEP, &[]).status.success());
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("out/converge_sweep.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn dropping_a_cell_leaves_the_others_unchanged() {
    let full = tempfile::tempdir().unwrap();
    let part = tempfile::tempdir().unwrap();
    assert!(run_in(full.path(), "converge-sweep", SWEEP, &[]).status.success());
    let fewer = SWEEP.replace("[2, 4, 6]", "[2, 6]");
    assert!(run_in(part.path(), "converge-sweep", &fewer, &[]).status.success());
    let all = csv_rows(&full.path().join("out/converge_sweep.csv"));
    let some = csv_rows(&part.path().join("out/converge_sweep.csv"));
    assert_eq!(some.len(), 4);
    for row in &some {
        assert!(all.contains(row), "{row:?}");
    }
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "converge-sweep", r#"{"trees": {"kind": "kstep", "#, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_field_is_named_in_the_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "converge-sweep", &SWEEP.replace("\"reps\"", "\"repz\""), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("repz"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SWEEP.replace("\"exploration\": 1.0", "\"exploration\": -1.0");
    let o = run_in(dir.path(), "converge-sweep", &bad, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("out/converge_sweep.csv").exists());
}

#[test]
fn help_lists_csv_columns() {
    let o = sss(&["converge-sweep", "--help"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("d1, d2, mean_t_star, stddev, non_converged, runs"), "{text}");
}

#[test]
fn scenario_curve_and_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let curve = r#"{"subtree_depth": 8,
        "curve": {"p": 0.5, "q": 0.5, "catch_up": 10, "epsilon_min": 0.02, "epsilon_max": 0.5, "points": 25}}"#;
    assert!(run_in(dir.path(), "scenario-compare", curve, &[]).status.success());
    let rows = csv_rows(&dir.path().join("out/scenario_b_curve.csv"));
    assert_eq!(rows.len(), 25);
    assert!(!dir.path().join("out/scenario_a.csv").exists());

    // Observations from the exact two-step model with C = 2.5 must fit back to it.
    let (a, b, c) = (3.0f64, 2.0f64, 2.5f64);
    let obs: Vec<String> = [(2u32, 8u32), (2, 10), (4, 10), (4, 12), (6, 12), (8, 14)]
        .iter()
        .map(|&(d1, d2)| {
            let y = a * c.powf(d1 as f64 / 2.0) + b * 2f64.powf(d1 as f64 / 2.0) * c.powf((d2 - d1) as f64 / 2.0);
            format!("[{d1}, {d2}, {y}]")
        })
        .collect();
    let fit = format!(r#"{{"command": "model-fit", "observations": [{}]}}"#, obs.join(", "));
    let o = run_in(dir.path(), "model-fit", &fit, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("out/model_fit.json")).unwrap()).unwrap();
    assert!((v["C"].as_f64().unwrap() - 2.5).abs() < 1e-4, "{v}");
}

#[test]
fn tournament_scores_sum_to_games() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"seed": 3, "games_per_match": 6, "transcripts": true, "matches": [
        {"a": {"kind": "minimax_r", "k": 2, "budget": 100}, "b": {"kind": "random"}}]}"#;
    assert!(run_in(dir.path(), "tournament", cfg, &[]).status.success());
    let rows = csv_rows(&dir.path().join("out/tournament.csv"));
    assert_eq!(rows.len(), 1);
    let sa: f64 = rows[0][5].parse().unwrap();
    let sb: f64 = rows[0][6].parse().unwrap();
    assert_eq!(sa + sb, 6.0);
    let lines = std::fs::read_to_string(dir.path().join("out/transcripts.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 6);
}

#[test]
fn command_field_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), "tournament", SWEEP, &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trap_scan_emits_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"lines": [[2, 2]], "delta": 0.3, "k": 2}"#;
    assert!(run_in(dir.path(), "trap-scan", cfg, &[]).status.success());
    let text = std::fs::read_to_string(dir.path().join("out/traps.jsonl")).unwrap();
    assert!(!text.is_empty());
    for l in text.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["gain"].as_f64().unwrap() >= 0.3);
        assert_eq!(v["witness"][0], v["trapping_move"]);
    }
}
