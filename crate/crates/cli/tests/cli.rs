use std::path::Path;
use std::process::{Command, Output};

use hocbf::sim::ScenarioConfig;
use hocbf::Mode;
use hocbf_cli::{execute, read_csv, rows};

fn hocbf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hocbf"))
        .args(args)
        .current_dir(dir)
        .env_remove("HOCBF_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn transform_run_is_safe_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["run", "--mode", "transform", "--scenario", "paper_sec4", "--out", "t", "--format", "csv,json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("t");
    let s = json(&out.join("summary.json"));
    assert!(s["min_center_clearance"].as_f64().unwrap() >= -1e-3);
    assert_eq!(s["mode"], "transform");
    assert_eq!(json(&out.join("config-echo.json"))["mode"], "transform");
    assert!(out.join("trajectory.csv").exists() && out.join("trajectory.json").exists());
}

#[test]
fn standard_run_never_steers_and_misses_the_goal() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["run", "--mode", "standard", "--out", "s"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = json(&dir.path().join("s/summary.json"));
    assert_eq!(s["max_abs_u1"].as_f64(), Some(0.0));
    assert_eq!(s["reached_goal"], false);
    let trajectory = read_csv(std::fs::File::open(dir.path().join("s/trajectory.csv")).unwrap()).unwrap();
    assert!(trajectory.iter().all(|r| r.u1 == 0.0 && r.nu.is_none()));
}

#[test]
fn csv_matches_the_in_memory_log_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["run", "--mode", "integral", "--out", "i"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let parsed = read_csv(std::fs::File::open(dir.path().join("i/trajectory.csv")).unwrap()).unwrap();
    let a = execute(&ScenarioConfig::paper_sec4().with_mode(Mode::Integral)).unwrap();
    assert_eq!(parsed, rows(&a.log));
    assert!(parsed.iter().all(|r| r.nu.is_some()));
}

#[test]
fn negative_step_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "mode = \"integral\"\ndt = -0.1\n").unwrap();
    let o = hocbf(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("`dt`") && e.contains("line 2"), "{e}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[obstacle]\ncentre = [1.0, 2.0]\n").unwrap();
    let o = hocbf(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2, column 1"), "{}", stderr(&o));
}

#[test]
fn infeasible_steps_exit_two() {
    // on the start-goal axis the steering coefficient vanishes
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("axis.toml"), "mode = \"integral\"\n[obstacle]\ncenter = [35.0, 15.0]\n").unwrap();
    let o = hocbf(&["run", "--config", "axis.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let s = json(&dir.path().join("out/summary.json"));
    assert!(s["infeasible_steps"].as_u64().unwrap() > 0);
}

#[test]
fn collision_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("coarse.toml"), "mode = \"standard\"\ndt = 1.0\n").unwrap();
    let o = hocbf(&["run", "--config", "coarse.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("out/summary.json"))["safe"], false);
}

#[test]
fn out_dir_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hocbf"))
        .args(["run", "--mode", "transform"])
        .current_dir(dir.path())
        .env("HOCBF_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("from-env/summary.json").exists());
}

#[test]
fn compare_ranks_modes_and_repeats_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["compare", "--out", "c", "--parallel"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = json(&dir.path().join("c/compare.json"));
    let modes = c["modes"].as_array().unwrap();
    let by = |m: &str| modes.iter().find(|r| r["mode"] == m).unwrap();
    assert_eq!(by("standard")["reached_goal"], false);
    assert_eq!(by("integral")["reached_goal"], true);
    assert_eq!(by("transform")["reached_goal"], true);
    assert_eq!(by("integral")["relative_degree"], 3);
    assert_eq!(by("transform")["relative_degree"], 2);
    assert_eq!(c["ranking"]["relative_degree"][2], "integral");
    for m in ["standard", "integral", "transform"] {
        assert!(dir.path().join("c").join(m).join("trajectory.csv").exists());
    }

    let o = hocbf(&["compare", "--mode", "transform,transform", "--out", "d"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = json(&dir.path().join("d/compare.json"));
    let (a, b) = (&c["modes"][0], &c["modes"][1]);
    for key in ["objective", "min_center_clearance", "infeasible_steps", "final_distance"] {
        assert_eq!(a[key], b[key], "{key}");
    }
    assert_eq!(
        std::fs::read(dir.path().join("d/transform/trajectory.csv")).unwrap(),
        std::fs::read(dir.path().join("d/transform-1/trajectory.csv")).unwrap()
    );
}

#[test]
fn compare_needs_two_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["compare", "--mode", "integral"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degree_subcommand_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], serde_json::Value); 3] = [
        (&["degree", "--model", "unicycle", "--barrier", "obstacle"], serde_json::json!({"u1": 3, "u2": 2})),
        (&["degree", "--barrier", "center"], serde_json::json!({"u1": 2, "u2": 2})),
        (&["degree", "--model", "single-integrator", "--barrier", "coordinate"], serde_json::json!({"u": 1})),
    ];
    for (args, expect) in cases {
        let o = hocbf(args, dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["degrees"], expect);
    }
    let o = hocbf(&["degree", "--model", "double-integrator", "--barrier", "coordinate", "--cap", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fuzz_scenario_follows_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = hocbf(&["run", "--scenario", "fuzz", "--seed", "4", "--mode", "transform", "--out", "f"], dir.path());
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
    let echo = json(&dir.path().join("f/config-echo.json"));
    assert_eq!(echo["name"], "fuzz_4");
    assert_eq!(echo["seed"], 4);
}

#[test]
fn shipped_scenario_file_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/scenario.toml");
    let parsed = hocbf_cli::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(parsed, ScenarioConfig::paper_sec4());
}
