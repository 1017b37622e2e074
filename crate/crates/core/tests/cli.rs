use std::process::{Command, Output};

use johnson_search::RunReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_johnson-search"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn spectrum_json() {
    let o = run(&["spectrum", "--n", "6", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["schedule"]["t_run"], 4);
    assert_eq!(v["table"]["rows"][1]["intersection"]["a"], 4);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = ["simulate", "--n", "9", "--k", "3", "--engine", "full", "--stride", "3"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows = RunReport::rows_from_csv(&stdout(&a)).unwrap();
    // 2 t_run = 24 steps, a multiple of the stride.
    assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), (0..=24).step_by(3).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r.p_alt.is_some()));
}

#[test]
fn simulate_reduced_json_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let o = run(&[
        "simulate", "--n", "100", "--k", "2", "--steps", "78", "--stride", "100", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!((report.rows[1].p_succ - 0.5054836274650062).abs() < 1e-12);
    assert_eq!(report.rows[1].p_alt, None);
}

#[test]
fn marked_vertex_is_one_based() {
    let o = run(&["simulate", "--n", "8", "--k", "2", "--engine", "full", "--steps", "2", "--marked", "3,8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["marked"], serde_json::json!([3, 8]));

    for bad in ["0,1", "1,9", "1,1", "1,2,3", "x"] {
        let o = run(&["simulate", "--n", "8", "--k", "2", "--marked", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
}

#[test]
fn sweep_csv() {
    let o = run(&["sweep", "--k", "2", "--n", "400,100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,t_run,p_succ,abs_dev,t_opt,p_max");
    assert!(lines[1].starts_with("100,78,"));
    assert!(lines[2].starts_with("400,314,"));
}

#[test]
fn validate_exit_codes() {
    let o = run(&["validate", "--n", "5", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);

    let o = run(&["validate", "--n", "5", "--k", "2", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("check failed"));

    let o = run(&["validate", "--n", "30", "--k", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!stderr(&o).contains("--engine reduced"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["spectrum", "--n", "2", "--k", "1"][..],
        &["spectrum", "--n", "5", "--k", "3"],
        &["spectrum", "--n", "5", "--k", "0"],
        &["simulate", "--n", "8", "--k", "2", "--stride", "0"],
        &["sweep", "--k", "2"],
        &["bogus"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    let o = run(&["spectrum", "--n", "2", "--k", "1"]);
    assert!(stderr(&o).contains("degenerate instance"));
}

#[test]
fn full_engine_refuses_large_instances() {
    let o = run(&["simulate", "--n", "40", "--k", "4", "--engine", "full", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--engine reduced"));
    assert!(o.stdout.is_empty());
}
