use std::f64::consts::PI;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projqaoa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn table(o: &Output) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let header = r.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["experiment", "n", "p", "layer", "gamma", "beta", "magnitude_sq", "residual", "wall_time", "status"]
    );
    r.records().map(|x| x.unwrap()).collect()
}

fn num(rec: &csv::StringRecord, col: usize) -> f64 {
    rec[col].parse().unwrap()
}

const QUICK_VERIFY: [&str; 8] = ["verify", "--n", "6", "--probes", "20", "--grid", "300", "--skip-training"];

#[test]
fn verify_passes_and_reports_every_check() {
    let o = run(&QUICK_VERIFY);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(report.lines().count(), table(&run(&QUICK_VERIFY)).len());
}

#[test]
fn corrupted_formula_fails_verification() {
    let mut args = QUICK_VERIFY.to_vec();
    args.push("--corrupt");
    let o = run(&args);
    assert_eq!(code(&o), 1);
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.contains("FAIL formula_consistency"));
}

#[test]
fn verify_is_deterministic() {
    let mut args = QUICK_VERIFY.to_vec();
    args.extend(["--seed", "7", "--no-wall-time"]);
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn oversized_verify_is_a_resource_failure() {
    assert_eq!(code(&run(&["verify", "--n", "13", "--skip-training"])), 3);
}

#[test]
fn single_qubit_optimal_angles() {
    let o = run(&["optimal-angles", "--n", "1"]);
    assert_eq!(code(&o), 0);
    let rows = table(&o);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "optimal_angles.root");
    assert!((num(&rows[0], 4) - PI / 2.0).abs() < 1e-14);
    assert!((num(&rows[0], 5) - PI / 4.0).abs() < 1e-14);
    assert!((num(&rows[0], 6) - 1.0).abs() < 1e-14);
}

#[test]
fn optimal_angle_residuals_and_monotone_scaling() {
    let o = run(&["optimal-angles", "--n-range", "1:30"]);
    assert_eq!(code(&o), 0);
    let roots: Vec<_> = table(&o).into_iter().filter(|r| &r[0] == "optimal_angles.root").collect();
    assert_eq!(roots.len(), 30);
    let mut prev = f64::INFINITY;
    for r in &roots {
        assert!(num(r, 7).abs() < 1e-12);
        let n = num(r, 1);
        let d = ((n + 2.0) * num(r, 5) - PI).abs();
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn last_layer_defects() {
    let o = run(&["last-layer", "--n-range", "6:8", "--p", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&o);
    let last: Vec<_> = rows
        .iter()
        .filter(|r| &r[0] == "last_layer" && r[2] == r[3] && &r[9] == "converged")
        .collect();
    assert_eq!(last.len(), 15);
    for r in last {
        let limit = if &r[2] == "1" { 1e-6 } else { 0.01 };
        assert!(num(r, 7).abs() < limit);
    }
    assert!(rows.iter().any(|r| &r[0] == "last_layer.fit"));
}

#[test]
fn last_layer_rejects_deep_circuits() {
    assert_eq!(code(&run(&["last-layer", "--n", "6", "--p", "6"])), 2);
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(code(&run(&["optimal-angles", "--n-range", "5"])), 2);
    assert_eq!(code(&run(&["optimal-angles", "--n-range", "9:3"])), 2);
    assert_eq!(code(&run(&["optimal-angles", "--bogus"])), 2);
    assert_eq!(code(&run(&["saturation", "--n", "4", "--seeds", "0"])), 2);
    assert_eq!(code(&run(&["saturation", "--n", "4", "--noise", "phase", "--sigma", "-1"])), 2);
    assert_eq!(code(&run(&["train", "--n", "4", "--p", "2", "--noise", "phase"])), 2);
    assert_eq!(code(&run(&["train", "--n", "4", "--p", "2", "--restarts", "0"])), 2);
}

#[test]
fn saturation_table_and_summary() {
    let o = run(&["saturation", "--n", "4", "--seeds", "2", "--p-max", "8"]);
    assert_eq!(code(&o), 0);
    let rows = table(&o);
    let per_depth = rows.iter().filter(|r| r[0].ends_with("seed=0")).count();
    assert_eq!(per_depth, 8);
    assert_eq!(rows.iter().filter(|r| r[0].ends_with("/pstar")).count(), 2);
    let mode = rows.iter().find(|r| r[0].ends_with("/mode")).unwrap();
    assert_eq!(&mode[1], "4");
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.contains("modal p*"));
}

#[test]
fn phase_noise_moves_saturation_off_n() {
    let o = run(&["saturation", "--n", "5", "--noise", "phase", "--seeds", "20", "--p-max", "12", "--check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn undertraining_moves_saturation_off_n() {
    let o = run(&["saturation", "--n", "5", "--noise", "undertrain", "--seeds", "20", "--check"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("angles.json");
    let o = run(&["optimal-angles", "--n-range", "5:6", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.starts_with(b"|(n+2)"));
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0]["experiment"], "optimal_angles.root");
    assert_eq!(rows[0]["n"], 5);
    assert!(rows[0]["gamma"].is_number());
    let csv_rows = table(&run(&["optimal-angles", "--n", "5"]));
    let gamma = text.lines().find(|l| l.contains("\"gamma\"")).unwrap();
    let literal = gamma.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = literal.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    assert_eq!(literal.parse::<f64>().unwrap(), num(&csv_rows[0], 4));
}

#[test]
fn csv_output_to_file_is_unix_utf8() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = run(&["train", "--n", "5", "--p", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn layerwise_train_reports_saturation() {
    let o = run(&["train", "--n", "4", "--p-max", "6", "--strategy", "layerwise", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let rows = table(&o);
    assert_eq!(rows.len(), 6);
    let mags: Vec<f64> = rows.iter().map(|r| num(r, 6)).collect();
    assert!(mags.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(String::from_utf8(o.stderr).unwrap().contains("p* ="));
}

#[test]
fn concentration_rows() {
    let o = run(&["concentration", "--n-range", "8:12"]);
    assert_eq!(code(&o), 0);
    let rows = table(&o);
    assert_eq!(rows.iter().filter(|r| &r[0] == "concentration").count(), 5);
    let slope = rows.iter().find(|r| &r[0] == "concentration.slope").unwrap();
    assert!(num(slope, 7) <= -1.5);
}
