use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_node-sense"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(text.lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim()).expect("stderr is JSON")
}

/// Top-level keys in the order they appear in the raw text.
fn key_order(raw: &[u8], keys: &[&str]) -> bool {
    let text = std::str::from_utf8(raw).unwrap();
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).expect(k))
        .collect();
    pos.windows(2).all(|w| w[0] < w[1])
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mc_pi_shape() {
    let out = run(&["mc", "pi", "--samples", "1000", "--seed", "7"]);
    let v = stdout_json(&out);
    assert_eq!(v.as_object().unwrap().len(), 5);
    assert!(key_order(
        &out.stdout,
        &["accepted", "total", "ratio", "estimate", "std_error"]
    ));
    assert_eq!(v["total"], 1000);
    assert_eq!(
        v["estimate"].as_f64().unwrap(),
        4.0 * v["ratio"].as_f64().unwrap()
    );
}

#[test]
fn seed_is_global_and_changes_the_draws() {
    let a = run(&["--seed", "7", "mc", "pi", "--samples", "5000"]);
    let b = run(&["mc", "pi", "--samples", "5000", "--seed", "7"]);
    let c = run(&["mc", "pi", "--samples", "5000", "--seed", "8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn mc_integrate_constant_is_exact() {
    let out = run(&[
        "mc",
        "integrate",
        "--fn",
        "builtin:constant",
        "--b1",
        "-2",
        "--b2",
        "1",
        "--height",
        "1.5",
        "--samples",
        "2000",
        "--seed",
        "99",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["ratio"], 1.0);
    assert_eq!(v["estimate"], 4.5);
    assert_eq!(v["std_error"], 0.0);
}

#[test]
fn mc_nodes_scales_ratio_by_total() {
    let out = run(&[
        "mc",
        "nodes",
        "--total",
        "400",
        "--fn",
        "poly:0,1",
        "--b1",
        "0",
        "--b2",
        "1",
        "--height",
        "1",
        "--samples",
        "20000",
        "--seed",
        "1",
    ]);
    let v = stdout_json(&out);
    assert_eq!(
        v["estimate"].as_f64().unwrap(),
        400.0 * v["ratio"].as_f64().unwrap()
    );
    assert!(
        (v["estimate"].as_f64().unwrap() - 200.0).abs()
            < 3.0 * v["std_error"].as_f64().unwrap() + 1e-9
    );
}

#[test]
fn mc_csv_output() {
    let out = run(&["mc", "pi", "--samples", "100", "--output", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "accepted,total,ratio,estimate,std_error");
    assert_eq!(lines.len(), 2);
}

#[test]
fn out_of_bounds_function_is_a_domain_error() {
    let out = run(&[
        "mc",
        "integrate",
        "--fn",
        "poly:0,3",
        "--b1",
        "0",
        "--b2",
        "1",
        "--height",
        "1",
        "--samples",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "function_out_of_bounds");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["bogus"][..],
        &["mc", "pi"],
        &["mc", "pi", "--samples", "10", "--frobnicate"],
        &[
            "mc",
            "integrate",
            "--fn",
            "builtin:cube",
            "--b1",
            "0",
            "--b2",
            "1",
            "--height",
            "1",
            "--samples",
            "5",
        ],
        &["mc", "pi", "--samples", "0"],
        &["mc", "pi", "--samples", "10", "--streams", "0"],
        &["fit", "--method", "diagonal", "--input", "x.csv"],
        &["predict", "midway", "--t1", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn version_names_the_rng() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.contains(node_sense::rng::RNG_NAME), "{text}");
}

#[test]
fn fit_vertical_collinear() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "x,y\n0,1\n1,3\n2,5\n");
    let out = run(&["fit", "--method", "vertical", "--input", s(&p)]);
    let v = stdout_json(&out);
    assert_eq!(v.as_object().unwrap().len(), 10);
    assert!(key_order(
        &out.stdout,
        &["method", "a", "b", "r", "r2", "se_a", "se_b", "s", "residual", "n"]
    ));
    assert_eq!(v["method"], "vertical");
    assert!((v["a"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["b"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["r"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["n"], 3);
}

#[test]
fn fit_identical_x_is_degenerate_vertical() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "x,y\n2,1\n2,4\n2,9\n");
    let out = run(&["fit", "--method", "vertical", "--input", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "degenerate_vertical");
    assert!(out.stdout.is_empty());

    // The perpendicular method handles the same data as the line x = 2.
    let v = stdout_json(&run(&[
        "fit",
        "--method",
        "perpendicular",
        "--input",
        s(&p),
    ]));
    assert_eq!(v["vertical_x"], 2.0);
    assert_eq!(v["residual"], 0.0);
}

#[test]
fn fit_emits_line_samples() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "x,y\n0,1\n1,3\n2,5\n");
    let line = dir.path().join("line.csv");
    let out = run(&[
        "fit",
        "--input",
        s(&p),
        "--emit-line",
        s(&line),
        "--range",
        "-1:1",
        "--steps",
        "4",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&line).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], "x,y");
    assert_eq!(rows[1], "-1.0,-1.0");
    assert_eq!(rows[5], "1.0,3.0");
}

#[test]
fn emit_line_without_range_is_usage_error() {
    let out = run(&["fit", "--input", "p.csv", "--emit-line", "l.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_rows_report_line_numbers() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "x,y\n0,1\n\n1,3\n2,oops\n");
    let out = run(&["fit", "--input", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "malformed_input");
    assert_eq!(e["line"], 5);

    let p = write(&dir, "q.csv", "a,b\n0,1\n");
    let e = stderr_json(&run(&["fit", "--input", s(&p)]));
    assert_eq!(e["line"], 1);

    let e = stderr_json(&run(&[
        "fit",
        "--input",
        s(&dir.path().join("missing.csv")),
    ]));
    assert_eq!(e["error"], "input");
}

#[test]
fn coverage_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let cells = write(&dir, "cells.csv", "id,x,y\nnear,3,4\nfar,30,40\n");
    let out = run(&[
        "coverage",
        "--center",
        "0,0",
        "--radius",
        "10",
        "--cells",
        s(&cells),
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "id,score,membership\nnear,0.25,inside\nfar,25.0,outside\n"
    );
    let out = run(&[
        "coverage",
        "--center",
        "0,0",
        "--radius",
        "5",
        "--cells",
        s(&cells),
        "--output",
        "json",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v[0]["membership"], "boundary");
    assert_eq!(v[0]["score"], 1.0);

    let out = run(&[
        "coverage",
        "--center",
        "0,0",
        "--radius",
        "-1",
        "--cells",
        s(&cells),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coverage_negative_center_and_epsilon() {
    let dir = TempDir::new().unwrap();
    let cells = write(&dir, "cells.csv", "id,x,y\nc,-3,0\n");
    let out = run(&[
        "coverage",
        "--center",
        "-6,0",
        "--radius",
        "3.0000001",
        "--cells",
        s(&cells),
        "--epsilon",
        "1e-3",
    ]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("boundary"));
}

#[test]
fn exp_fit_round_trip() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("t,y\n");
    for i in 0..6 {
        let t = i as f64 * 0.5;
        csv += &format!("{t},{}\n", 3.0 * (-0.4 * t).exp());
    }
    let p = write(&dir, "s.csv", &csv);
    let v = stdout_json(&run(&[
        "exp",
        "fit",
        "--model",
        "growth-decay",
        "--input",
        s(&p),
    ]));
    assert_eq!(v["kind"], "decay");
    assert!((v["scale"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((v["rate"].as_f64().unwrap() - 0.4).abs() < 1e-12);

    let mut csv = String::from("t,y\n");
    for i in 1..6 {
        let t = i as f64;
        csv += &format!("{t},{}\n", -50.0 * (-0.2 * t).exp_m1());
    }
    let p = write(&dir, "m.csv", &csv);
    let v = stdout_json(&run(&[
        "exp",
        "fit",
        "--model",
        "modified",
        "--input",
        s(&p),
        "--capacity",
        "50",
    ]));
    assert_eq!(v["kind"], "modified-growth");
    assert!((v["rate"].as_f64().unwrap() - 0.2).abs() < 1e-12);

    let out = run(&["exp", "fit", "--model", "modified", "--input", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exp_fit_flat_series_is_zero_rate() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "s.csv", "t,y\n0,2\n1,2\n2,2\n");
    let out = run(&["exp", "fit", "--model", "growth-decay", "--input", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "zero_rate");
}

#[test]
fn exp_eval_and_curve() {
    let out = run(&[
        "exp", "eval", "--kind", "growth", "--scale", "2", "--rate", "0", "--t", "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "exp",
        "eval",
        "--kind",
        "modified-growth",
        "--scale",
        "10",
        "--rate",
        "1",
        "--t",
        "0",
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.0\n");

    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    let v = stdout_json(&run(&[
        "exp",
        "curve",
        "--kind",
        "decay",
        "--scale",
        "1",
        "--rate",
        "1",
        "--t1",
        "0",
        "--t2",
        "2",
        "--steps",
        "2",
        "--out",
        s(&curve),
    ]));
    assert_eq!(v["rows"], 3);
    let text = std::fs::read_to_string(&curve).unwrap();
    assert!(text.starts_with("t,value\n0.0,1.0\n1.0,"), "{text}");
}

#[test]
fn predict_commands() {
    let v = stdout_json(&run(&["predict", "means", "--t1", "2", "--t2", "8"]));
    assert_eq!(
        (v["am"].as_f64(), v["hm"].as_f64(), v["gm"].as_f64()),
        (Some(5.0), Some(3.2), Some(4.0))
    );
    let v = stdout_json(&run(&[
        "predict", "midway", "--t1", "1", "--p1", "2", "--t2", "3", "--p2", "8",
    ]));
    assert_eq!((v["t"].as_f64(), v["p"].as_f64()), (Some(2.0), Some(4.0)));
    let v = stdout_json(&run(&[
        "predict", "extreme", "--t1", "1", "--p1", "2", "--t2", "3", "--p2", "8",
    ]));
    assert_eq!((v["t"].as_f64(), v["p"].as_f64()), (Some(5.0), Some(32.0)));

    let out = run(&[
        "predict", "midway", "--t1", "1", "--p1", "-2", "--t2", "3", "--p2", "8",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "non_positive_position");
}

#[test]
fn sim_trace_and_log() {
    let dir = TempDir::new().unwrap();
    let ev = write(
        &dir,
        "e.csv",
        "time,op,cell,node\n1,join,0,A\n2,join,0,B\n3,join,0,C\n4,leave,0,A\n",
    );
    let log = dir.path().join("log.csv");
    let out = run(&[
        "sim",
        "--events",
        s(&ev),
        "--ips",
        "8",
        "--cells",
        "2",
        "--log",
        s(&log),
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["cells"][0]["leader"], "C");
    assert_eq!(v["cells"][0]["version"], 3);
    assert_eq!(v["cells"][1]["members"].as_array().unwrap().len(), 0);
    assert_eq!(v["log"].as_array().unwrap().len(), 4);

    let text = std::fs::read_to_string(&log).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "time,op,cell,node,result,leader,version,ip");
    assert_eq!(rows[4], "4,leave,0,A,leader_handoff,C,3,10.0.0.0");

    let csv = run(&[
        "sim",
        "--events",
        s(&ev),
        "--ips",
        "8",
        "--cells",
        "2",
        "--output",
        "csv",
    ]);
    assert_eq!(csv.stdout, text.as_bytes());
}

#[test]
fn sim_domain_errors() {
    let dir = TempDir::new().unwrap();
    let ev = write(&dir, "e.csv", "time,op,cell,node\n1,join,0,A\n2,join,0,B\n");
    let out = run(&["sim", "--events", s(&ev), "--ips", "2", "--cells", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "pool_exhausted");

    let ev = write(&dir, "f.csv", "time,op,cell,node\n1,leave,0,A\n");
    let out = run(&["sim", "--events", s(&ev), "--ips", "4", "--cells", "2"]);
    assert_eq!(stderr_json(&out)["error"], "not_member");

    let ev = write(&dir, "g.csv", "time,op,cell,node\n1,join,0,A\n1,join,1,B\n");
    let out = run(&["sim", "--events", s(&ev), "--ips", "4", "--cells", "2"]);
    assert_eq!(stderr_json(&out)["error"], "non_monotonic_time");

    let ev = write(&dir, "h.csv", "time,op,cell,node\n1,hop,0,A\n");
    let out = run(&["sim", "--events", s(&ev), "--ips", "4", "--cells", "2"]);
    assert_eq!(stderr_json(&out)["line"], 2);
}

#[test]
fn warnings_respect_quiet() {
    let dir = TempDir::new().unwrap();
    let ev = write(&dir, "e.csv", "time,op,cell,node\n");
    let loud = run(&["sim", "--events", s(&ev), "--ips", "5", "--cells", "2"]);
    assert!(loud.status.success());
    assert!(String::from_utf8_lossy(&loud.stderr).contains("reserve"));
    let quiet = run(&[
        "sim",
        "--events",
        s(&ev),
        "--ips",
        "5",
        "--cells",
        "2",
        "--quiet",
    ]);
    assert!(quiet.stderr.is_empty());
    assert_eq!(loud.stdout, quiet.stdout);
}
