//! Binary-level checks: flag surface, exit codes, file round-trips.

use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_triplicate"));
    c.env_remove("TRIPLICATE_SEED");
    c
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn triplicate");
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn table1_prints_published_rows() {
    let out = run_ok(&["table1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,normal,laplace");
    assert_eq!(lines.len(), 6);
    assert!(text.contains("0.01,2.576,3.256"), "table was:\n{text}");
    assert!(text.contains("0.005,2.807,3.746"));
    assert!(text.contains("0.1,1.645,1.628"));
}

#[test]
fn usage_errors_exit_2() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["threshold", "--alpha", "2.0"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = bin()
        .args(["density", "--grid-min", "1", "--grid-max", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_input_exits_3() {
    let out = bin()
        .args(["gof", "--input", "/nonexistent/nowhere.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1.0,2.0\n").unwrap();
    let out = bin()
        .args(["gof", "--input", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    std::fs::write(&path, "x1,x2\n1.0,oops\n").unwrap();
    let out = bin()
        .args(["gof", "--input", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unreachable_tolerance_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "density",
            "--grid-min",
            "0",
            "--grid-max",
            "0.1",
            "--step",
            "0.1",
            "--tol",
            "1e-30",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

// Seeded regression for the full pipeline, frozen from the first verified
// run: a 199-batch Laplace-error dataset supports the Laplace model and
// rejects the normal one.
#[test]
fn gen_data_gof_round_trip_regression() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pairs.csv");
    run_ok(&[
        "gen-data",
        "--model",
        "laplace",
        "--n",
        "199",
        "--sigma",
        "0.4",
        "--seed",
        "7",
        "--output",
        data.to_str().unwrap(),
    ]);

    let out = run_ok(&[
        "gof",
        "--input",
        data.to_str().unwrap(),
        "--reps",
        "2000",
        "--seed",
        "7",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    assert_eq!(report["normal"]["t_n"].as_f64().unwrap(), 0.5467362774);
    assert_eq!(report["normal"]["p_value"].as_f64().unwrap(), 0.0179910045);
    assert_eq!(report["laplace"]["t_n"].as_f64().unwrap(), 0.1958623054);
    assert_eq!(report["laplace"]["p_value"].as_f64().unwrap(), 0.2708645677);
    assert_eq!(report["normal"]["sample_sd"].as_f64().unwrap(), 1.400021368);
    assert!(
        report["laplace"]["p_value"].as_f64().unwrap()
            > report["normal"]["p_value"].as_f64().unwrap()
    );
}

#[test]
fn gof_accepts_a_diff_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diffs.csv");
    let mut body = String::from("diff\n");
    for i in 0..60 {
        body.push_str(&format!("{}\n", 0.4 * ((i as f64 * 0.77).sin())));
    }
    std::fs::write(&path, body).unwrap();
    let out = run_ok(&[
        "gof",
        "--input",
        path.to_str().unwrap(),
        "--diff-column",
        "--reps",
        "200",
        "--seed",
        "3",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for model in ["normal", "laplace"] {
        let p = report[model]["p_value"].as_f64().unwrap();
        assert!(p > 0.0 && p <= 1.0);
        assert_eq!(report[model]["n"].as_u64().unwrap(), 60);
    }
}

#[test]
fn env_var_supplies_default_seed() {
    let explicit = run_ok(&["gen-data", "--model", "normal", "--n", "20", "--seed", "9"]);
    let via_env = bin()
        .args(["gen-data", "--model", "normal", "--n", "20"])
        .env("TRIPLICATE_SEED", "9")
        .output()
        .unwrap();
    assert!(via_env.status.success());
    assert_eq!(explicit.stdout, via_env.stdout);

    let default = run_ok(&["gen-data", "--model", "normal", "--n", "20"]);
    assert_ne!(explicit.stdout, default.stdout);
}

#[test]
fn simulate_emits_summary_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist.csv");
    let out = run_ok(&[
        "simulate",
        "--model",
        "normal",
        "--alpha",
        "0.1",
        "--samples",
        "50000",
        "--seed",
        "11",
        "--histogram",
        hist.to_str().unwrap(),
    ]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["n"].as_u64().unwrap(), 50_000);
    let rate = summary["rejection_rate"].as_f64().unwrap();
    assert!((rate - 0.1).abs() < 0.01, "rate {rate}");
    assert_eq!(
        summary["conditional_count"].as_u64().unwrap(),
        (rate * 50_000.0).round() as u64
    );
    assert!(summary.get("conditional_samples").is_none());

    let hist_text = std::fs::read_to_string(&hist).unwrap();
    assert!(hist_text.starts_with("bin_lo,bin_hi,count,density\n"));
    let total: u64 = hist_text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, summary["conditional_count"].as_u64().unwrap());
}

#[test]
fn density_files_have_symmetric_h() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "density",
        "--model",
        "normal",
        "--grid-min",
        "-2",
        "--grid-max",
        "2",
        "--step",
        "0.5",
        "--tol",
        "1e-7",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(dir.path().join("density_normal.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let n = rows.len();
    for i in 0..n {
        let h_here = rows[i][3];
        let h_mirror = rows[n - 1 - i][3];
        assert!(
            (h_here - h_mirror).abs() <= 2e-7,
            "h asymmetry at x = {}",
            rows[i][0]
        );
    }
    // exceedance column nonincreasing, near 1/2 at x = 0
    for w in rows.windows(2) {
        assert!(w[0][4] >= w[1][4]);
    }
    assert!((rows[4][4] - 0.5).abs() < 1e-5);
}
