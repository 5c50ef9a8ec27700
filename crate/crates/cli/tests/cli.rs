use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dogame::oracle_1d::make_polynomial_game;
use dogame::{expected_utility, FiniteMixedStrategy};
use serde_json::Value;

fn dogame(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dogame"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("DOGAME_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn trace_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,lower,upper,gap,subgame_value,size_x,size_y,time_s"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn g1_run_reaches_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = dogame(&["run", "--game", "g1", "--algo", "double-oracle", "--epsilon", "1e-3", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert!((json["value"].as_f64().unwrap() + 0.48).abs() <= 1e-3);
    assert_eq!(json["terminated_by"], "gap");
    assert_eq!(json["seed"], 7);
    assert_eq!(json["config"]["epsilon"], "0.001");
    for row in trace_rows(dir.path()) {
        let v: Vec<f64> = row[1..4].iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[2] - (v[1] - v[0])).abs() <= 1e-10 * (1.0 + v[0].abs().max(v[1].abs())));
    }
}

#[test]
fn blotto_grid_run_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--game", "blotto", "--n", "3", "--c", "0.0625", "--init", "grid", "--oracle", "enumeration", "--epsilon", "1e-6"];
    let o = dogame(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = trace_rows(dir.path());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5], "153");
}

#[test]
fn non_integral_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dogame(&["run", "--game", "blotto", "--c", "0.3", "--init", "grid"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("c:") && err.contains("not an integer"), "{err}");
}

#[test]
fn iteration_cap_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dogame(&["run", "--game", "g2", "--epsilon", "0", "--max-iters", "3", "--resolution", "1e-3"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(trace_rows(dir.path()).len(), 3);
}

#[test]
fn invalid_settings_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (args, field) in [
        (vec!["run", "--epsilon", "-0.5"], "epsilon"),
        (vec!["run", "--game", "blotto", "--a", "1,1"], "a:"),
        (vec!["run", "--game", "poker"], "game"),
        (vec!["run", "--oracle", "magic"], "oracle"),
    ] {
        let o = dogame(&args, dir.path());
        assert_eq!(o.status.code(), Some(1));
        assert!(stderr(&o).contains(field), "{}", stderr(&o));
    }
    let o = dogame(&["run", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_config_and_seed_give_identical_traces() {
    for algo in ["double-oracle", "fictitious-play"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let args = ["run", "--game", "g2", "--algo", algo, "--seed", "11", "--max-iters", "30", "--resolution", "1e-3"];
        dogame(&args, a.path());
        dogame(&args, b.path());
        let x = fs::read(a.path().join("trace.csv")).unwrap();
        let y = fs::read(b.path().join("trace.csv")).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y);
    }
}

#[test]
fn result_mixtures_round_trip() {
    for algo in ["double-oracle", "fictitious-play"] {
        let dir = tempfile::tempdir().unwrap();
        let o = dogame(&["run", "--game", "g1", "--algo", algo, "--seed", "2", "--max-iters", "40", "--resolution", "1e-3"], dir.path());
        assert!(o.status.code() == Some(0) || o.status.code() == Some(2), "{}", stderr(&o));
        let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
        let p: FiniteMixedStrategy = serde_json::from_value(json["p"].clone()).unwrap();
        let q: FiniteMixedStrategy = serde_json::from_value(json["q"].clone()).unwrap();
        let u = expected_utility(&p, &q, &make_polynomial_game()).unwrap();
        let rows = trace_rows(dir.path());
        let last: f64 = rows.last().unwrap()[4].parse().unwrap();
        assert!((u - last).abs() <= 1e-9, "{algo}: {u} vs {last}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "game = g1\nepsilon = 0\nmax_iters = 4\nresolution = 0.01\n").unwrap();
    let out = dir.path().join("out");
    let o = dogame(&["run", "--config", cfg.to_str().unwrap(), "--max-iters", "2"], &out);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert_eq!(trace_rows(&out).len(), 2);
    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["max_iters"], "2");
    assert_eq!(json["config"]["resolution"], "0.01");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dogame"))
        .args(["run", "--game", "g1", "--resolution", "1e-2"])
        .env("DOGAME_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn matrix_game_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("rps.csv");
    fs::write(&m, "# rock paper scissors\n0, -1, 1\n1, 0, -1\n-1, 1, 0\n").unwrap();
    let o = dogame(&["run", "--game", "matrix", "--matrix", m.to_str().unwrap(), "--epsilon", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert!(json["value"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn compare_double_oracle_ahead_of_fictitious_play() {
    for game in ["g1", "g2"] {
        let dir = tempfile::tempdir().unwrap();
        let o = dogame(&["compare", "--game", game, "--max-iters", "200", "--epsilon", "0", "--seed", "5", "--resolution", "1e-3"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = fs::read_to_string(dir.path().join("compare.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iter,do_lower,do_upper,fp_lower,fp_upper"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 200);
        let do_gap = rows[19][2] - rows[19][1];
        let fp_gap = rows[199][4] - rows[199][3];
        assert!(do_gap < fp_gap, "{game}: {do_gap} vs {fp_gap}");
    }
}

#[test]
fn compare_rejects_identical_algorithms_and_mismatched_games() {
    let dir = tempfile::tempdir().unwrap();
    let o = dogame(&["compare", "--game", "g1", "--algos", "double-oracle,double-oracle"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("algorithm"));

    let a = dir.path().join("a.cfg");
    let b = dir.path().join("b.cfg");
    fs::write(&a, "game = g1\nalgorithm = double-oracle\nseed = 1\n").unwrap();
    fs::write(&b, "game = g1\nalgorithm = fictitious-play\nseed = 2\n").unwrap();
    let o = dogame(
        &["compare", "--config", a.to_str().unwrap(), "--config-b", b.to_str().unwrap(), "--max-iters", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}
