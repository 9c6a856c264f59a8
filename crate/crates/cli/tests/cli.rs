use std::process::{Command, Output};

fn qgld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgld"))
        .args(args)
        .env("QGLD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Column `name` of every data row.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| {
            // delta labels like "element:1,2" are quoted; none of the tested columns follow them
            let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(l.as_bytes());
            r.records().next().unwrap().unwrap()[idx].to_string()
        })
        .collect()
}

#[test]
fn gradient_table_row() {
    let out = stdout(&qgld(&[
        "gradient", "--matrix", "sigma-x", "--delta", "element:1,2", "--state", "plus", "--L", "1e-6",
    ]));
    let g: f64 = column(&out, "gradient_quantum")[0].parse().unwrap();
    assert!((g - 0.999999).abs() < 1e-5);
    assert!(out.starts_with("p,E_p,delta_kind,L,m,gradient_quantum,gradient_oracle,abs_error\n"));
}

#[test]
fn gradient_identity_delta_on_minus() {
    let out = stdout(&qgld(&["gradient", "--matrix", "sigma-x", "--delta", "identity", "--state", "minus"]));
    let g: f64 = column(&out, "gradient_quantum")[0].parse().unwrap();
    assert!((g - 1.0).abs() < 1e-5);
}

#[test]
fn gradient_over_all_eigenvectors_with_peak_readout() {
    let out = stdout(&qgld(&[
        "gradient", "--matrix", "diag:1,2,3,4", "--delta", "element:3,3", "--m", "6", "--centered",
    ]));
    let q: Vec<f64> = column(&out, "gradient_quantum").iter().map(|s| s.parse().unwrap()).collect();
    let o: Vec<f64> = column(&out, "gradient_oracle").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(q.len(), 4);
    for (a, b) in q.iter().zip(&o) {
        // W = 2 and M = 64: half a bin is 2π·2/128
        assert!((a - b).abs() <= std::f64::consts::PI * 2.0 / 64.0 + 1e-12, "{a} vs {b}");
    }
}

#[test]
fn shots_are_reproducible() {
    let args = [
        "gradient", "--matrix", "hadamard", "--delta", "element:1,2", "--shots", "2000", "--seed", "5",
    ];
    assert_eq!(stdout(&qgld(&args)), stdout(&qgld(&args)));
}

#[test]
fn missing_matrix_file_exits_2() {
    let o = qgld(&["gradient", "--matrix", "/no/such/file.json", "--delta", "element:1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_inputs_exit_2_without_panicking() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"re": [[1, 2], [3]]}"#).unwrap();
    for args in [
        vec!["gradient", "--matrix", bad.to_str().unwrap(), "--delta", "element:1,2"],
        vec!["gradient", "--matrix", "sigma-x", "--delta", "element:0,9"],
        vec!["gradient", "--matrix", "sigma-x", "--delta", "element:1,2", "--L", "0.5"],
        vec!["qgld", "--matrix", "sigma-x", "--phi", "e7"],
        vec!["qgld", "--matrix", "sigma-x", "--k", "3"],
        vec!["lanczos", "--matrix", "identity:4", "--b", "9"],
        vec!["gradient", "--matrix"],
    ] {
        let o = qgld(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!String::from_utf8_lossy(&o.stderr).contains("panicked"));
    }
}

#[test]
fn singular_matrix_exits_3() {
    let o = qgld(&["qgld", "--matrix", "diag:1,0", "--phi", "plus"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    // the pseudo-inverse mode skips the zero eigenvalue instead
    let out = stdout(&qgld(&["qgld", "--matrix", "diag:1,0", "--phi", "plus", "--pseudo-inverse"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn table1_matches_reference_values() {
    let out = stdout(&qgld(&["reproduce-table1"]));
    let diffs = column(&out, "abs_diff");
    assert_eq!(diffs.len(), 10);
    for d in diffs {
        assert!(d.parse::<f64>().unwrap() < 1e-5);
    }
}

#[test]
fn qgld_presets() {
    let out = stdout(&qgld(&["qgld", "--matrix", "sigma-z", "--phi", "plus"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["total"].as_f64().unwrap().abs() < 2e-6);
    let out = stdout(&qgld(&["qgld", "--matrix", "identity:4", "--phi", "random", "--seed", "3"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["total"].as_f64().unwrap() - 1.0).abs() < 2e-6);
}

#[test]
fn qgld_modes() {
    for mode in ["sigma", "sampled"] {
        let out = stdout(&qgld(&["qgld", "--matrix", "diag:2,4", "--phi", "plus", "--mode", mode, "--shots", "64"]));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["mode"], mode);
        assert!((v["classical_reference"].as_f64().unwrap() - 0.375).abs() < 1e-14);
        assert!((v["total"].as_f64().unwrap() - 0.375).abs() < 0.05);
    }
    let out = stdout(&qgld(&["qgld", "--matrix", "random-spd:8", "--phi", "random", "--b", "2", "--seed", "4"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["total"].as_f64().unwrap() - v["classical_reference"].as_f64().unwrap()).abs() < 1e-4);
}

#[test]
fn sweep_error_decreases() {
    let args = [
        "qgld", "--matrix", "random-spd:8", "--phi", "random", "--seed", "7", "--sweep", "1e-2,1e-3,1e-4",
    ];
    let out = stdout(&qgld(&args));
    let errs: Vec<f64> = column(&out, "abs_error").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    // byte-identical on rerun, whatever the thread count
    let single = Command::new(env!("CARGO_BIN_EXE_qgld"))
        .args(args)
        .env("QGLD_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&single), out);
}

#[test]
fn lanczos_trace_converges() {
    let out = stdout(&qgld(&["lanczos", "--matrix", "decaying:32", "--b", "2", "--k", "10", "--seed", "1"]));
    let errs: Vec<f64> = column(&out, "abs_error").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(errs.len(), 10);
    assert!(errs[9] < 1e-8);
    for o in column(&out, "orthogonality") {
        assert!(o.parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = qgld(&["reproduce-table1", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 10);
}

#[test]
fn matrix_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    std::fs::write(&path, r#"{"dim": 2, "re": [[2, 0], [0, 4]]}"#).unwrap();
    let out = stdout(&qgld(&["qgld", "--matrix", path.to_str().unwrap(), "--phi", "plus"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["total"].as_f64().unwrap() - 0.375).abs() < 2e-6);
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_qgld"))
        .args(["reproduce-table1"])
        .env("QGLD_THREADS", "zero")
        .output()
        .unwrap();
    // table 1 runs serially and never consults the pool
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_qgld"))
        .args(["gradient", "--matrix", "sigma-x", "--delta", "element:1,2"])
        .env("QGLD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
