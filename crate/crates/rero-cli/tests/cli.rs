//! Interface tests for the binary: flag handling, exit codes, output
//! formats, the config file, and the per-command examples.

mod common;

use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Output};

fn rero(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rero"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Parse a header + single data row into a column map.
fn csv_row(out: &Output) -> HashMap<String, String> {
    let text = stdout(out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let row: Vec<&str> = lines.next().expect("data row").split(',').collect();
    assert_eq!(header.len(), row.len());
    header
        .iter()
        .zip(row)
        .map(|(h, v)| (h.to_string(), v.to_string()))
        .collect()
}

fn csv_rows(out: &Output) -> Vec<HashMap<String, String>> {
    let text = stdout(out);
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header")
        .split(',')
        .map(str::to_string)
        .collect();
    lines
        .map(|line| {
            header
                .iter()
                .cloned()
                .zip(line.split(',').map(str::to_string))
                .collect()
        })
        .collect()
}

fn field_f64(row: &HashMap<String, String>, name: &str) -> f64 {
    row[name].parse().unwrap_or_else(|_| panic!("field {name} = {:?}", row[name]))
}

#[test]
fn bound_mse_examples() {
    let out = rero(&[
        "bound", "--metric", "mse", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta",
        "0.6931471805599453",
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    assert!((field_f64(&row, "gamma") - 0.5).abs() <= 1e-9);
    assert_eq!(row["direction"], "error_at_most_eta");

    // eta = 0: perfect reconstruction has probability zero.
    let out = rero(&[
        "bound", "--metric", "mse", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta", "0",
    ]);
    assert_eq!(field_f64(&csv_row(&out), "gamma"), 0.0);

    // Metric defaults to mse.
    let out = rero(&["bound", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta", "0"]);
    assert!(out.status.success());
}

#[test]
fn bound_psnr_examples() {
    // An astronomically high fidelity demand maps to a vanishing gamma.
    let out = rero(&[
        "bound", "--metric", "psnr", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta-db",
        "1e9", "--data-range", "1",
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    assert!(field_f64(&row, "gamma") <= 1e-12);
    assert_eq!(row["direction"], "score_at_least_eta");

    // psnr metric without the range is a usage error.
    let out = rero(&[
        "bound", "--metric", "psnr", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta-db",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("data-range"));
}

#[test]
fn calibrate_examples() {
    let out = rero(&["calibrate", "--n", "2", "--min-norm", "1", "--eta", "1", "--gamma", "0.5"]);
    assert!(out.status.success());
    let sigma = field_f64(&csv_row(&out), "sigma");
    assert!((sigma - 1.201_122_408_786_449_8).abs() <= 1e-9);

    // Quadrupling eta doubles sigma.
    let out = rero(&["calibrate", "--n", "2", "--min-norm", "1", "--eta", "4", "--gamma", "0.5"]);
    let sigma4 = field_f64(&csv_row(&out), "sigma");
    assert!((sigma4 - 2.0 * sigma).abs() <= 1e-9);

    let out = rero(&["calibrate", "--n", "2", "--min-norm", "1", "--eta", "1", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("strictly inside (0, 1)"));
}

#[test]
fn corridor_examples() {
    let out = rero(&[
        "corridor", "--n", "2", "--sigma", "1", "--min-norm", "1", "--gamma-prior", "0.5",
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    assert_eq!(field_f64(&row, "eta_lower"), 0.0);
    assert!((field_f64(&row, "eta_upper") - std::f64::consts::LN_2).abs() <= 1e-9);

    // Wider prior success probability widens the corridor.
    let narrow = rero(&[
        "corridor", "--n", "2", "--sigma", "1", "--min-norm", "1", "--gamma-prior", "0.001",
    ]);
    let wide = rero(&[
        "corridor", "--n", "2", "--sigma", "1", "--min-norm", "1", "--gamma-prior", "0.9",
    ]);
    assert!(
        field_f64(&csv_row(&narrow), "eta_upper") < field_f64(&csv_row(&wide), "eta_upper")
    );

    let out = rero(&[
        "corridor", "--n", "2", "--sigma", "1", "--min-norm", "1", "--gamma-prior", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_summary_against_theory() {
    // Norm-1.01 protocol configuration, 500 trials: the empirical median
    // lands inside the theoretical interquartile band.
    let out = rero(&[
        "simulate", "--target", "0.505,-0.505,0.505,-0.505", "--sigma", "0.1", "--trials",
        "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    let median = field_f64(&row, "mse_q50");
    assert!(field_f64(&row, "theo_mse_q25") <= median);
    assert!(median <= field_f64(&row, "theo_mse_q75"));
    assert_eq!(row["trials"], "500");
    assert_eq!(row["psnr_sentinels"], "0");
    let ks = field_f64(&row, "ks_stat");
    assert!(ks < common::KS_CRIT_5PCT / (500f64).sqrt() * 2.0, "ks = {ks}");
}

#[test]
fn simulate_near_noiseless_mse_vanishes() {
    let out = rero(&[
        "simulate", "--target", "0.505,-0.505,0.505,-0.505", "--sigma", "1e-15", "--trials",
        "100",
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    assert!(field_f64(&row, "mse_mean") <= 1e-25);
}

#[test]
fn simulate_noiseless_sentinel() {
    // Noise far below one ulp of the entries: exact recovery, infinite PSNR.
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("trials.csv");
    let out = rero(&[
        "simulate", "--target", "0.505,-0.505,0.505,-0.505", "--sigma", "1e-18", "--trials",
        "50", "--dump", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let row = csv_row(&out);
    assert_eq!(field_f64(&row, "mse_mean"), 0.0);
    assert_eq!(row["psnr_mean"], "inf");
    assert_eq!(row["psnr_sentinels"], "50");

    let dump_text = std::fs::read_to_string(&dump).unwrap();
    let mut lines = dump_text.lines();
    assert_eq!(lines.next().unwrap(), "trial,mse,psnr");
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"));
    assert!(first.ends_with(",inf"));
    assert_eq!(dump_text.lines().count(), 51);
}

#[test]
fn simulate_byte_identical_under_same_seed() {
    let args = [
        "simulate", "--n", "4", "--norm", "1.01", "--sigma", "0.5", "--trials", "200", "--seed",
        "9",
    ];
    let a = rero(&args);
    let b = rero(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let mut other_seed = args;
    other_seed[9] = "10";
    let c = rero(&other_seed);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_gamma_decreases_in_sigma() {
    let out = rero(&[
        "sweep", "--variable", "sigma", "--grid", "log:0.1:10:8", "--emit", "gamma", "--n",
        "16", "--min-norm", "1", "--eta", "0.05",
    ]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 8);
    let gammas: Vec<f64> = rows.iter().map(|r| field_f64(r, "gamma")).collect();
    assert!(gammas.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{gammas:?}");
}

#[test]
fn sweep_calibrated_sigma_increases_in_eta() {
    let out = rero(&[
        "sweep", "--variable", "eta", "--grid", "0.1,0.2,0.5,1,2,5", "--emit", "sigma", "--n",
        "1", "--min-norm", "1", "--gamma", "0.1",
    ]);
    assert!(out.status.success());
    let sigmas: Vec<f64> = csv_rows(&out).iter().map(|r| field_f64(r, "sigma")).collect();
    assert_eq!(sigmas.len(), 6);
    assert!(sigmas.windows(2).all(|w| w[0] < w[1]), "{sigmas:?}");
}

#[test]
fn sweep_mean_mse_nondecreasing_in_rest_norm() {
    let out = rero(&[
        "sweep", "--variable", "rest-norm", "--grid", "0,1,2,4", "--emit", "mse", "--target",
        "0.5,-0.5,0.5,-0.5", "--sigma", "0.25", "--trials", "2000", "--seed", "5",
    ]);
    assert!(out.status.success());
    let means: Vec<f64> = csv_rows(&out).iter().map(|r| field_f64(r, "mse_mean")).collect();
    assert_eq!(means.len(), 4);
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
}

#[test]
fn sweep_rejects_malformed_specs() {
    // Swept variable duplicated as a fixed flag.
    let out = rero(&[
        "sweep", "--variable", "sigma", "--grid", "1,2", "--emit", "gamma", "--n", "2",
        "--min-norm", "1", "--eta", "1", "--sigma", "3",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Non-increasing grid.
    let out = rero(&[
        "sweep", "--variable", "sigma", "--grid", "2,1", "--emit", "gamma", "--n", "2",
        "--min-norm", "1", "--eta", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("strictly increasing"));

    // Unknown emit quantity.
    let out = rero(&[
        "sweep", "--variable", "sigma", "--grid", "1,2", "--emit", "entropy", "--n", "2",
        "--min-norm", "1", "--eta", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Fractional row counts.
    let out = rero(&[
        "sweep", "--variable", "m", "--grid", "1.5,2.5", "--emit", "mse", "--target", "1,0",
        "--sigma", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_column_selection() {
    let out = rero(&[
        "sweep", "--variable", "eta", "--grid", "0.5,1", "--emit", "gamma", "--n", "2",
        "--min-norm", "1", "--sigma", "1", "--columns", "gamma,eta",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("gamma,eta\n"));

    let out = rero(&[
        "sweep", "--variable", "eta", "--grid", "0.5,1", "--emit", "gamma", "--n", "2",
        "--min-norm", "1", "--sigma", "1", "--columns", "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown column"));
}

#[test]
fn json_format_emits_json_lines() {
    let out = rero(&[
        "bound", "--metric", "mse", "--n", "2", "--sigma", "1", "--min-norm", "1", "--eta",
        "0.6931471805599453", "--format", "json",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((value["gamma"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    assert_eq!(value["n"], serde_json::json!(2));
}

#[test]
fn config_file_supplies_missing_flags() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        file,
        "# shared sweep context\nn = 2\nmin-norm = 1\nsigma = 1\nformat = json"
    )
    .unwrap();
    let path = file.path().to_str().unwrap();

    let out = rero(&["bound", "--config", path, "--eta", "0.6931471805599453"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((value["gamma"].as_f64().unwrap() - 0.5).abs() <= 1e-9);

    // Flags override the file: a different sigma changes the certificate.
    let out = rero(&["bound", "--config", path, "--eta", "0.6931471805599453", "--sigma", "2"]);
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(value["gamma"].as_f64().unwrap() < 0.5);

    // Unknown keys are rejected with a diagnostic.
    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "sigmaa = 1").unwrap();
    let out = rero(&["bound", "--config", bad.path().to_str().unwrap(), "--eta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key"));
}

#[test]
fn diagnostics_are_single_lines_on_stderr() {
    let out = rero(&["calibrate", "--n", "2", "--min-norm", "1", "--eta", "1", "--gamma", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: "));
    assert!(!err.contains('\x1b'));
}
