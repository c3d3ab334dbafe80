use std::f64::consts::FRAC_PI_4;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn clustersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clustersim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = clustersim(args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn sweep_to(path: &Path, extra: &[&str]) -> Vec<u8> {
    let out = path.to_str().unwrap();
    let mut args = vec!["sweep", "--out", out];
    args.extend_from_slice(extra);
    ok(&args);
    std::fs::read(path).unwrap()
}

struct CsvRow {
    p: f64,
    alpha: f64,
    metric: String,
    value: f64,
}

fn parse_csv(bytes: &[u8]) -> (String, Vec<CsvRow>) {
    let text = std::str::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 9, "{l}");
            CsvRow {
                p: f[1].parse().unwrap(),
                alpha: f[2].parse().unwrap(),
                metric: f[7].to_string(),
                value: f[8].parse().unwrap(),
            }
        })
        .collect();
    (header, rows)
}

#[test]
fn negativity_sweep_covers_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = sweep_to(
        &dir.path().join("neg.csv"),
        &["--channel", "dephasing", "--metric", "negativity", "--subset", "1"],
    );
    assert!(!bytes.contains(&b'\r'));
    let (header, rows) = parse_csv(&bytes);
    assert_eq!(header, "channel,p,alpha,beta,theta1,theta2,theta3,metric,value");
    assert_eq!(rows.len(), 41 * 101);
    // At p = 0 a single qubit cut of the cluster has N = |sin 2α| / 2.
    for r in rows.iter().filter(|r| r.p == 0.0) {
        assert!((r.value - (2.0 * r.alpha).sin().abs() / 2.0).abs() < 1e-10, "alpha {}", r.alpha);
    }
    let peak = rows.iter().find(|r| r.p == 0.0 && (r.alpha - FRAC_PI_4).abs() < 1e-9).unwrap();
    assert!((peak.value - 0.5).abs() < 1e-10);
    // Past the threshold 2√2 − 2 every value is zero.
    assert!(rows.iter().filter(|r| r.p > 0.83).all(|r| r.value < 1e-12));
    assert!(rows.iter().all(|r| r.metric == "negativity"));
}

#[test]
fn sweeps_are_reproducible_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--channel", "amp", "--metric", "gate_fidelity", "--p", "0:1:6", "--theta2", "0:2pi:5", "--theta1", "0:pi:3",
    ];
    let mut serial = args.to_vec();
    serial.extend(["--jobs", "1"]);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "4"]);
    let a = sweep_to(&dir.path().join("a.csv"), &serial);
    let b = sweep_to(&dir.path().join("b.csv"), &serial);
    let c = sweep_to(&dir.path().join("c.csv"), &parallel);
    assert_eq!(a, b);
    assert_eq!(a, c);
    let (_, rows) = parse_csv(&a);
    assert_eq!(rows.len(), 6 * 5 * 3);
    assert!(rows.iter().filter(|r| r.p == 0.0).all(|r| (r.value - 1.0).abs() < 1e-10));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"channel": "depol", "metric": "cluster_fidelity", "p": "0:1:3", "alpha": "pi/4"}"#,
    )
    .unwrap();
    let bytes = sweep_to(
        &dir.path().join("o.csv"),
        &["--config", cfg.to_str().unwrap(), "--channel", "dephasing"],
    );
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("dephasing,")));
    assert!(text.contains(",cluster_fidelity,1\n"));
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"channel": "amp", "pee": "0:1:3"}"#).unwrap();
    let o = clustersim(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pee"));

    for args in [
        &["sweep", "--channel", "amp", "--p", "0:2:3"][..],
        &["sweep", "--channel", "bitflip"],
        &["sweep", "--channel", "amp", "--alpha", "0:1"],
        &["sweep", "--metric", "negativity"],
        &["superop", "--channel", "amp", "--p", "1.5"],
    ] {
        assert_eq!(clustersim(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn kraus_amplitude_sweep_emits_four_metrics_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = sweep_to(
        &dir.path().join("k.csv"),
        &["--channel", "amp", "--metric", "kraus_amplitudes", "--p", "0.99", "--theta2", "0"],
    );
    let (_, rows) = parse_csv(&bytes);
    let names: Vec<&str> = rows.iter().map(|r| r.metric.as_str()).collect();
    assert_eq!(names, ["kraus_amplitude_1", "kraus_amplitude_2", "kraus_amplitude_3", "kraus_amplitude_4"]);
    assert!((rows[0].value - 0.70536).abs() < 1e-4);
}

#[test]
fn esd_thresholds() {
    let run = |args: &[&str]| ok(args).trim().to_string();
    let deph = run(&["esd", "--channel", "dephasing", "--subset", "1"]);
    let p: f64 = deph.strip_prefix("esd p=").unwrap().parse().unwrap();
    assert!((p - (8f64.sqrt() - 2.0)).abs() < 1e-5);

    let depol = run(&["esd", "--channel", "depol", "--subset", "1,2"]);
    let p: f64 = depol.strip_prefix("esd p=").unwrap().parse().unwrap();
    assert!(p <= 0.455, "{p}");

    for s in ["1", "1,2", "1,3", "1,4"] {
        assert_eq!(run(&["esd", "--channel", "amp", "--subset", s]), "no-esd");
    }
}

#[test]
fn esd_without_initial_entanglement_exits_two() {
    let o = clustersim(&["esd", "--channel", "dephasing", "--subset", "1", "--alpha", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
                .collect()
        })
        .collect()
}

#[test]
fn noiseless_superoperator_is_unitary_conjugation() {
    let v: Value = serde_json::from_str(&ok(&[
        "superop", "--channel", "amp", "--p", "0", "--theta1", "0.3", "--theta2", "1.1", "--theta3", "2.5",
    ]))
    .unwrap();
    let s = matrix(&v);
    // U ⊗ conj U is unitary: rows are orthonormal.
    for i in 0..4 {
        for j in 0..4 {
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..4 {
                let (a, b) = s[i][k];
                let (c, d) = s[j][k];
                re += a * c + b * d;
                im += b * c - a * d;
            }
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-10 && im.abs() < 1e-10, "({i},{j})");
        }
    }
}

#[test]
fn full_dephasing_superoperator_at_zero_rotation() {
    let v: Value = serde_json::from_str(&ok(&["superop", "--channel", "dephasing", "--p", "1"])).unwrap();
    let s = matrix(&v);
    // Complete dephasing of every qubit leaves only the populations, mapped
    // to the maximally mixed state: S = |𝟙⟩⟨𝟙| / 2.
    for (i, row) in s.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            let want = if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 } else { 0.0 };
            assert!((re - want).abs() < 1e-10 && im.abs() < 1e-10, "({i},{j}) = {re}+{im}i");
        }
    }
}

#[test]
fn superoperator_sources_agree() {
    for channel in ["dephasing", "amp"] {
        let v: Value = serde_json::from_str(&ok(&[
            "superop", "--channel", channel, "--p", "0.37", "--theta2", "0.8", "--source", "both",
        ]))
        .unwrap();
        assert!(v["max_residual"].as_f64().unwrap() < 1e-9, "{channel}");
        assert_eq!(v["reconstructed"]["source"], "reconstructed");
        assert_eq!(v["closed_form"]["source"], "closed-form");
    }
    let v: Value = serde_json::from_str(&ok(&[
        "superop", "--channel", "depol", "--p", "0.37", "--theta1", "0.9", "--theta2", "0.8", "--source", "both",
    ]))
    .unwrap();
    // The two suspect entries differ by a phase e^{2iθ1}; elsewhere the sources agree.
    assert!(v["max_residual_outside_suspect_entries"].as_f64().unwrap() < 1e-9);
    assert!(v["max_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn kraus_output_is_complete() {
    let v: Value = serde_json::from_str(&ok(&["kraus", "--channel", "dephasing", "--p", "0.2", "--theta2", "pi/3"])).unwrap();
    let amps: Vec<f64> = v["decomposition"]["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_f64().unwrap())
        .collect();
    assert_eq!(amps.len(), 4);
    assert!((amps.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(amps.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(v["decomposition"]["kraus"].as_array().unwrap().len(), 4);
    assert!(v["convention"].as_str().unwrap().starts_with("phase;"));
}

#[test]
fn haar_sample_is_seeded() {
    let a = ok(&["haar-sample", "--seed", "7", "--count", "5"]);
    assert_eq!(a, ok(&["haar-sample", "--seed", "7", "--count", "5"]));
    assert_ne!(a, ok(&["haar-sample", "--seed", "8", "--count", "5"]));
    assert_eq!(a.lines().count(), 6);
    assert_eq!(a.lines().next(), Some("theta1,theta2,theta3"));
}

#[test]
fn validate_exit_code_matches_report() {
    let o = clustersim(&["validate"]);
    let text = stdout(&o);
    let verdicts: Vec<&str> = text.lines().filter(|l| l.contains(" criterion ")).collect();
    assert_eq!(verdicts.len(), 8, "{text}");
    let all_pass = verdicts.iter().all(|l| l.starts_with("PASS"));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    assert!(text.contains("witness crossings:"));
    assert!(text.contains("gate fidelity prefactor"));

    let one = clustersim(&["validate", "--criterion", "1"]);
    assert_eq!(one.status.code(), Some(0));
    assert!(stdout(&one).starts_with("PASS criterion 1"));
    assert_eq!(clustersim(&["validate", "--criterion", "9"]).status.code(), Some(2));
}

#[test]
fn json_sweep_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--channel", "depol", "--metric", "witness", "--p", "0:0.5:3", "--alpha", "pi/4"];
    let mut json_args = common.to_vec();
    json_args.extend(["--format", "json"]);
    let rows: Value = serde_json::from_slice(&sweep_to(&dir.path().join("w.json"), &json_args)).unwrap();
    let (_, csv_rows) = parse_csv(&sweep_to(&dir.path().join("w.csv"), &common));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), csv_rows.len());
    for (j, c) in rows.iter().zip(&csv_rows) {
        let v = j["value"].as_f64().unwrap();
        assert!((v - c.value).abs() <= 1e-11 * v.abs().max(1.0));
    }
    // The matched witness detects the pure cluster.
    assert!(csv_rows[0].value < 0.0);
}
