use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use kerr_revival::exact::fractional_revival;
use kerr_revival::ModelParams;
use num_complex::Complex64;
use serde_json::Value;

fn kr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerr-revival")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = kr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    kr(args).status.code().unwrap()
}

/// Data rows of a CSV output, skipping `#` lines and the column header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn report(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

#[test]
fn exact_correlation_revives() {
    let csv = ok(&["correlation", "--t-min", "0", "--t-max", "2.5T2", "--steps", "501"]);
    assert!(csv.lines().any(|l| l == "t,t/T1,re,im,abs"));
    let r = rows(&csv);
    assert_eq!(r.len(), 501);
    for k in [200, 400] {
        assert!((r[k][0] - k as f64 / 200.0 * PI).abs() < 1e-12);
        assert!((r[k][4] - 1.0).abs() < 1e-10, "|C| at row {k}: {}", r[k][4]);
    }
    // collapsed between revivals
    assert!(r[100][4] < 0.2);
}

#[test]
fn degenerate_range_gives_one_row() {
    let csv = ok(&["correlation", "--t-min", "1.25", "--t-max", "1.25", "--steps", "40"]);
    assert_eq!(rows(&csv).len(), 1);
}

#[test]
fn vanvleck_correlation_tracks_exact_away_from_zero() {
    let r = report(&[
        "compare", "--method", "exact", "--against", "vanvleck", "--metric", "modulus", "--t-min", "2T1",
        "--t-max", "2.5T2", "--steps", "8001",
    ]);
    assert!(r["max_abs"].as_f64().unwrap() <= 0.02, "{r}");
    let ratio = r["time_independence_ratio"].as_f64().unwrap();
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert_eq!(r["windows"].as_array().unwrap().len(), 2);
}

#[test]
fn comparing_a_method_with_itself_is_exact() {
    let r = report(&["compare", "--method", "exact", "--against", "exact", "--t-max", "T2", "--steps", "50"]);
    for key in ["max_abs", "l2", "max_rel"] {
        assert_eq!(r[key].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn theta_quantum_error_is_below_five_over_nu() {
    let r = report(&[
        "compare", "--method", "exact", "--against", "theta-quantum", "--t-min", "0", "--t-max", "T2", "--steps",
        "400",
    ]);
    assert!(r["max_rel"].as_f64().unwrap() <= 5.0 / 98.0, "{r}");
}

#[test]
fn exact_wavefunction_at_revival_is_phased_initial_state() {
    let csv = ok(&["wavefunction", "--t", "T2", "--q-min", "-3", "--q-max", "3", "--q-steps", "61"]);
    let psi0 = ModelParams::reference().coherent_state();
    let phase = Complex64::from_polar(1.0, -0.25 * PI);
    for row in rows(&csv) {
        let expected = phase * psi0.wavefunction(row[0]);
        assert!((Complex64::new(row[1], row[2]) - expected).norm() < 1e-9, "q = {}", row[0]);
    }
}

#[test]
fn vanvleck_wavefunction_overlays_exact_at_fractional_revival() {
    let r = report(&[
        "compare", "--quantity", "wavefunction", "--method", "exact", "--against", "vanvleck", "--t", "T2/3",
        "--q-min", "-2", "--q-max", "2", "--q-steps", "41",
    ]);
    assert!(r["max_rel"].as_f64().unwrap() <= 0.02, "{r}");
    assert!(r["time_independence_ratio"].is_null());
}

#[test]
fn tdwkb_wavefunction_follows_exact_at_four_revivals() {
    let r = report(&[
        "compare", "--quantity", "wavefunction", "--method", "exact", "--against", "tdwkb", "--t", "4T2",
        "--q-min", "-1.8", "--q-max", "1.8", "--q-steps", "37",
    ]);
    assert_eq!(r["config"]["picture"], "interaction");
    // agreement is at the ten-percent level of max|psi| here
    assert!(r["max_rel"].as_f64().unwrap() < 0.12, "{r}");
}

#[test]
fn wigner_initial_state_is_one_gaussian() {
    let csv = ok(&["wigner", "--q-steps", "85", "--p-steps", "85"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 85 * 85);
    let top = r.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert!(top[0].abs() < 0.3 && (top[1] - 14.0).abs() < 0.3, "peak at {top:?}");
    assert!((top[2] - 1.0 / PI).abs() < 0.02);
}

#[test]
fn wigner_quarter_revival_has_four_lobes() {
    let csv = ok(&["wigner", "--t", "T2/4", "--q-steps", "85", "--p-steps", "85"]);
    let r = rows(&csv);
    let max = r.iter().map(|x| x[2]).fold(f64::MIN, f64::max);
    let lobes = fractional_revival(&ModelParams::reference(), 1, 4);
    assert_eq!(lobes.len(), 4);
    for (q, p) in lobes.iter().map(|c| (c.q, c.p)) {
        let near = r
            .iter()
            .filter(|x| (x[0] - q).hypot(x[1] - p) < 1.0)
            .map(|x| x[2])
            .fold(f64::MIN, f64::max);
        assert!(near > 0.5 * max, "lobe at ({q}, {p}): {near} vs max {max}");
    }
}

#[test]
fn output_is_deterministic_and_header_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["correlation", "--method", "vanvleck", "--t-max", "T2", "--steps", "37", "--tol", "1e-8"];
    let path = |p: &Path| p.to_str().unwrap().to_string();
    let pa = path(&a);
    ok(&[&args[..], &["--out", &pa]].concat());
    let first = std::fs::read_to_string(&a).unwrap();
    ok(&[&args[..], &["--out", &pa]].concat());
    assert_eq!(std::fs::read_to_string(&a).unwrap(), first);

    let cfg = kerr_revival::cli::config_from_output(&first).unwrap();
    assert_eq!(cfg.weight_cutoff, 1e-8);
    assert_eq!(cfg.steps, 37);

    // rerunning from the header reproduces the file, with flags taking precedence
    let pb = path(&b);
    ok(&["correlation", "--config", &pa, "--out", &pb]);
    let second = std::fs::read_to_string(&b).unwrap();
    let body = |s: &str| s.lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&first), body(&second));
    ok(&["correlation", "--config", &pa, "--steps", "5", "--out", &pb]);
    assert_eq!(rows(&std::fs::read_to_string(&b).unwrap()).len(), 5);
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let csv = ok(&["correlation", "--t", "0.5"]);
    let row = csv.lines().last().unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["correlation", "--t", "1"]), 0);
    // configuration errors
    assert_eq!(code(&["correlation", "--gamma", "-1"]), 2);
    assert_eq!(code(&["correlation", "--bogus"]), 2);
    assert_eq!(code(&["wavefunction", "--method", "tdwkb", "--picture", "lab"]), 2);
    assert_eq!(code(&["wigner", "--method", "vanvleck"]), 2);
    assert_eq!(code(&["compare", "--method", "exact"]), 2);
    assert_eq!(code(&["correlation", "--config", "/nonexistent/config.json"]), 2);
    // numerical-domain errors, caught before any evaluation
    let out = kr(&["correlation", "--method", "vanvleck", "--t-min", "0", "--t-max", "T2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples violate"));
    assert_eq!(code(&["correlation", "--method", "theta-semiclassical", "--t", "T1"]), 3);
    assert_eq!(code(&["wavefunction", "--method", "tdwkb", "--t", "0.001"]), 3);
    assert_eq!(code(&["wigner", "--q-steps", "20"]), 3);
}
