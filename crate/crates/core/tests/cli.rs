use std::path::PathBuf;
use std::process::{Command, Output};

use edp_dirac::cli::{Cell, Table};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edp-dirac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn linear_n20_spectrum_has_unit_spacing() {
    let cfg = config("linear_n20.json");
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,energy,kappa,wavenumber_ok,lambda_condition_ok,sign_condition_ok"
    );
    let energies: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 21);
    assert!((energies[0] - (0.5 + 1.75f64.sqrt())).abs() < 1e-12);
    for w in energies.windows(2) {
        assert!((w[1] - w[0] - 1.0).abs() < 1e-12);
    }
    assert!(text.lines().skip(1).all(|l| l.ends_with("true,true,true")));
}

#[test]
fn inverse_spectrum_is_negative_and_increasing() {
    let cfg = config("inverse.json");
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let energies: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 21);
    assert!(energies.iter().all(|&e| e < 0.0));
    assert!(energies.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn spectrum_verify_appends_oracle_columns() {
    let cfg = config("linear.json");
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with(
        "n,energy,kappa,wavenumber_ok,lambda_condition_ok,sign_condition_ok,energy_shoot,abs_dev\n"
    ));
    for line in text.lines().skip(1) {
        let dev: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(dev < 1e-6, "{line}");
    }
}

#[test]
fn wavenumber_below_mu_is_a_solver_error() {
    let cfg = config("linear.json");
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--k-y",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wavenumber"), "{err}");
}

#[test]
fn configuration_errors_exit_two() {
    let out = run(&["spectrum", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(config("linear.json"))
        .unwrap()
        .replace("\"points\": 401", "\"points\": 1");
    std::fs::write(&bad, text).unwrap();
    let out = run(&[
        "density",
        "--config",
        bad.to_str().unwrap(),
        "--levels",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = config("linear.json");
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--epsilon",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_columns_are_peak_normalized() {
    for name in ["linear.json", "linear_ky3.json"] {
        let cfg = config(name);
        let out = run(&[
            "density",
            "--config",
            cfg.to_str().unwrap(),
            "--levels",
            "0,1,2",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let (header, rows) = csv_rows(&stdout(&out));
        assert_eq!(header.len(), 7);
        assert_eq!(header[1], "density_plus_n0");
        assert_eq!(header[6], "density_minus_n2");
        assert_eq!(rows.len(), 401);
        for col in 1..7 {
            let values: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            assert!(values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert_eq!(values.iter().copied().fold(0.0, f64::max), 1.0);
            assert!(values[0] < 1e-4 && values[400] < 1e-4);
        }
    }
}

#[test]
fn empty_level_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let cfg = config("linear.json");
    let out = run(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--levels=",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(path).unwrap(), "x\n");
}

#[test]
fn norm_report_is_diagonal() {
    let cfg = config("linear.json");
    let out = run(&[
        "norm",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "0..3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header[7], "normalized_abs");
    assert_eq!(rows.len(), 16);
    for row in rows {
        let expected = if row[0] == row[1] { 1.0 } else { 0.0 };
        assert!((row[7] - expected).abs() < 1e-7, "{row:?}");
        if row[0] == row[1] {
            assert!(row[4] > 0.0);
        }
    }
}

#[test]
fn verify_passes_both_examples_and_fails_mu_linear() {
    for name in ["linear.json", "inverse.json"] {
        let cfg = config(name);
        let out = run(&["verify", "--config", cfg.to_str().unwrap(), "--n-max", "3"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        assert!(stdout(&out).lines().skip(1).all(|l| l.contains(",PASS,")));
    }
    let cfg = config("mu_linear.json");
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("sign_condition,FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL sign_condition"));
}

#[test]
fn csv_output_is_deterministic() {
    let cfg = config("linear_ky3.json");
    let args = [
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--levels",
        "0..2",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn json_spectrum_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.json");
    let cfg = config("inverse.json");
    let out = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--verify",
        "--n-max",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    let table: Table = serde_json::from_str(&written).unwrap();
    assert_eq!(table.rows.len(), 5);
    assert!(matches!(table.rows[0][0], Cell::Int(0)));
    assert!(matches!(table.rows[0][3], Cell::Bool(true)));
    assert_eq!(table.to_json(), written);
}
