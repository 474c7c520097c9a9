use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwalk(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qwalk"));
    cmd.args(args).env_remove("QWALK_OUTPUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("QWALK_OUTPUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = qwalk(args, None);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV with `#` metadata lines, header removed.
fn csv_rows(text: &str, header: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some(header));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn meta_lines(text: &str) -> Vec<&str> {
    text.lines().take_while(|l| l.starts_with('#')).collect()
}

#[test]
fn evolve_quarter_twelfth_stays_in_barriers() {
    let text = stdout_ok(&["evolve", "--alpha", "1/12", "--steps", "1000"]);
    let rows = csv_rows(&text, "n,prob_L,prob_R,prob");
    assert!(!rows.is_empty());
    let mut total = 0.0;
    for r in &rows {
        let n: i64 = r[0].parse().unwrap();
        assert!((-3..=3).contains(&n), "row at n = {n}");
        let (l, rr, p): (f64, f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((l + rr - p).abs() < 1e-15);
        total += p;
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn evolve_cw_order_and_explicit_spinor() {
    let text = stdout_ok(&[
        "evolve", "--alpha", "3/20", "--steps", "300", "--order", "cw", "--left", "0.6", "--right", "0.8i",
    ]);
    for r in csv_rows(&text, "n,prob_L,prob_R,prob") {
        let n: i64 = r[0].parse().unwrap();
        assert!((-5..=5).contains(&n));
    }
    assert!(meta_lines(&text).contains(&"# order: cw"));
}

#[test]
fn properties_quarter_all_true() {
    let v: Value = serde_json::from_str(&stdout_ok(&["properties", "--alpha", "1/4"])).unwrap();
    assert_eq!(v["all_pass"], true);
    for p in ["p1", "p2", "p3", "p4", "p5"] {
        assert_eq!(v[p]["pass"], true, "{p}");
    }
    let args: Vec<f64> = v["args"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
    let expected = [-FRAC_PI_2, 0.0, FRAC_PI_2, PI];
    assert_eq!(args.len(), 4);
    for (a, e) in args.iter().zip(expected) {
        assert!((a - e).abs() < 1e-9, "{args:?}");
    }
    assert_eq!(v["meta"]["alpha_spec"], "1/4");
    assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
}

// true minimum gap is about 2.6e-7, below the simplicity threshold
#[test]
fn properties_violation_exits_three() {
    let out = qwalk(&["properties", "--alpha", "3/76"], None);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_pass"], false);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("P4"), "{err}");
}

#[test]
fn recurrence_half_pi_zero_at_odd_times() {
    let text = stdout_ok(&["recurrence", "--alpha", "pi/2", "--steps", "1000"]);
    let rows = csv_rows(&text, "t,prob_origin");
    assert_eq!(rows.len(), 1001);
    for (i, r) in rows.iter().enumerate() {
        let t: usize = r[0].parse().unwrap();
        assert_eq!(t, i);
        if t % 2 == 1 {
            assert_eq!(r[1], "0", "t = {t}");
        }
    }
    let p2: f64 = rows[2][1].parse().unwrap();
    assert!(p2 > 0.0);
}

#[test]
fn spectrum_json_shape() {
    let v: Value = serde_json::from_str(&stdout_ok(&["spectrum", "--alpha", "5/12"])).unwrap();
    assert_eq!(v["p"], 5);
    assert_eq!(v["q"], 3);
    assert!((v["alpha"].as_f64().unwrap() - 5.0 / 12.0).abs() < 1e-15);
    let ev = v["eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 12);
    let mut prev = f64::NEG_INFINITY;
    for e in ev {
        let (re, im, arg) = (e["re"].as_f64().unwrap(), e["im"].as_f64().unwrap(), e["arg"].as_f64().unwrap());
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-9);
        assert!(arg >= prev);
        prev = arg;
    }
}

#[test]
fn butterfly_rows_per_eigenvalue() {
    let text = stdout_ok(&["butterfly", "--qmax", "4"]);
    let rows = csv_rows(&text, "alpha,p,q,arg");
    // odd P in (0, 4Q) coprime to Q: 2, 4, 4, 8 fractions of sizes 4, 8, 12, 16
    assert_eq!(rows.len(), 2 * 4 + 4 * 8 + 4 * 12 + 8 * 16);
    let keys: Vec<(u64, u64, f64)> = rows
        .iter()
        .map(|r| (r[2].parse().unwrap(), r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert!(keys.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)
        || ((w[0].0, w[0].1) == (w[1].0, w[1].1) && w[0].2 <= w[1].2)));
}

#[test]
fn duality_and_approximate_reports() {
    let v: Value = serde_json::from_str(&stdout_ok(&["duality-check", "--alpha", "7/20"])).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["ring_size"], 20);
    assert_eq!(v["finite_ring_proxy"], true);

    let v: Value = serde_json::from_str(&stdout_ok(&["approximate", "--alpha", "golden", "--count", "3"])).unwrap();
    let found: Vec<(u64, u64)> = v["approximants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["p"].as_u64().unwrap(), a["q"].as_u64().unwrap()))
        .collect();
    assert_eq!(found, [(3, 1), (5, 2), (47, 19)]);
}

#[test]
fn spread_reports_checkpoints() {
    let v: Value = serde_json::from_str(&stdout_ok(&["spread", "--alpha", "1/2", "--steps", "200"])).unwrap();
    let times = v["times"].as_array().unwrap();
    assert_eq!(times.len(), 21);
    assert_eq!(times.last().unwrap(), 200);
    let slope = v["fitted_exponent"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 1e-9, "{slope}");

    let v: Value = serde_json::from_str(&stdout_ok(&["spread", "--alpha", "random", "--seed", "3", "--steps", "40"])).unwrap();
    assert_eq!(v["near_barriers"]["rigorous"], false);
    assert_eq!(v["meta"]["seed"], "3");
}

#[test]
fn identical_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["evolve", "--alpha", "pi/2", "--steps", "300"],
        &["recurrence", "--alpha", "random", "--seed", "11", "--steps", "200"],
        &["butterfly", "--qmax", "6"],
    ];
    for args in cases {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        for d in [&a, &b] {
            std::fs::create_dir_all(d).unwrap();
            assert_eq!(qwalk(args, Some(d)).status.code(), Some(0), "{args:?}");
        }
        let names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1, "{names:?}");
        let x = std::fs::read(a.join(&names[0])).unwrap();
        let y = std::fs::read(b.join(&names[0])).unwrap();
        assert_eq!(x, y, "{args:?}");
        std::fs::remove_dir_all(&a).unwrap();
        std::fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn output_flag_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let explicit = dir.path().join("dist.json");
    let out = qwalk(
        &["evolve", "--alpha", "1/4", "--steps", "10", "--format", "json", "--output", explicit.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&explicit).unwrap()).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["n", "prob_L", "prob_R", "prob"]));
    assert_eq!(v["meta"]["alpha_spec"], "1/4");

    let out = qwalk(&["properties", "--alpha", "1/4"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("properties-1_4.json").is_file());
}

#[test]
fn every_output_carries_metadata() {
    for args in [
        &["evolve", "--alpha", "1/4", "--steps", "3"][..],
        &["recurrence", "--alpha", "golden", "--steps", "3"],
        &["butterfly", "--qmax", "1"],
    ] {
        let text = stdout_ok(args);
        let meta = meta_lines(&text);
        assert!(meta.iter().any(|l| l.starts_with("# alpha_spec:")), "{args:?}");
        assert!(meta.iter().any(|l| l.starts_with("# seed:")), "{args:?}");
        assert!(meta.contains(&format!("# version: {}", env!("CARGO_PKG_VERSION")).as_str()));
    }
}

#[test]
fn usage_errors_exit_one_with_single_line() {
    let cases: [&[&str]; 7] = [
        &["evolve", "--alpha", "2/12"],
        &["evolve", "--alpha", "1/4", "--unknown"],
        &["evolve"],
        &["spectrum", "--alpha", "golden"],
        &["approximate", "--alpha", "3/4"],
        &["properties", "--alpha", "1/4", "--format", "csv"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = qwalk(args, None);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
    let err = String::from_utf8(qwalk(&["evolve", "--alpha", "2/12"], None).stderr).unwrap();
    assert!(err.contains("P must be odd"), "{err}");
}

#[test]
fn missing_output_directory_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no/such/dir/out.csv");
    let out = qwalk(&["evolve", "--alpha", "1/4", "--steps", "2", "-o", target.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}
