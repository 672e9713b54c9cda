//! Experiment runner for `projqaoa`. Every subcommand produces a table of
//! [`ResultRow`]s plus human-readable report lines, and lists the assertions
//! that failed.

pub mod args;
pub mod output;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use projqaoa::analytic::{asymptotic_angles, beta_equation_residual, overlap_sq_on_line, solve_optimal_p1};
use projqaoa::train::{
    concentration_scan, detect_saturation, optimize_global_ladder, optimize_layerwise, NoiseModel,
    OptimizerConfig, Strategy, TrainingTrace,
};
use projqaoa::verify::{run_all, VerifyOptions};
use projqaoa::{AngleSchedule, QaoaError};
use rayon::prelude::*;

pub use args::{Cli, Command};
pub use output::{emit, format_float, write_rows, Format, ResultRow, COLUMNS};

use args::{
    AnglesArgs, ConcentrationArgs, LastLayerArgs, NoiseArg, OutputArgs, SaturationArgs, StrategyArg,
    TrainArgs, TrainingArgs, VerifyArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver or resource failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for solver, resource and output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<QaoaError> for CliError {
    fn from(e: QaoaError) -> Self {
        match e {
            QaoaError::InvalidArgument(_) | QaoaError::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            QaoaError::ResourceLimit { .. } | QaoaError::SolverFailure(_) => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub report: Vec<String>,
    pub failures: Vec<String>,
    /// Set when some rows record a solver failure instead of a result.
    pub solver_failure: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.solver_failure {
            3
        } else if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

fn timed(keep: bool, t0: Instant) -> Option<f64> {
    keep.then(|| t0.elapsed().as_secs_f64())
}

fn optimizer_config(t: &TrainingArgs) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig {
        restarts: t.restarts,
        max_iterations: t.max_iterations,
        rng_seed: t.seed,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn noise_model(kind: NoiseArg, sigma: f64, iterations: usize) -> Result<NoiseModel, CliError> {
    let model = match kind {
        NoiseArg::None => NoiseModel::None,
        NoiseArg::Phase => NoiseModel::PhaseNoise { sigma },
        NoiseArg::Undertrain => NoiseModel::Undertrain { iterations },
    };
    model.validate()?;
    Ok(model)
}

fn noise_label(model: NoiseModel) -> String {
    match model {
        NoiseModel::None => "none".into(),
        NoiseModel::PhaseNoise { sigma } => format!("phase(sigma={sigma})"),
        NoiseModel::Undertrain { iterations } => format!("undertrain({iterations})"),
    }
}

/// Representative of the inversion orbit whose chosen layer has `β ∈ [0, π/2]`.
fn oriented(s: &AngleSchedule, layer: usize) -> AngleSchedule {
    let c = s.canonicalized();
    if c.betas()[layer] > PI / 2.0 {
        c.inverted().canonicalized()
    } else {
        c
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    (intercept, slope, rms)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let opts = VerifyOptions {
        max_n: a.n,
        probes: a.probes,
        seed: a.seed,
        grid: a.grid,
        training: !a.skip_training,
        corrupt_closed_form: a.corrupt,
    };
    let t0 = Instant::now();
    let checks = run_all(&opts)?;
    let wall = timed(!a.output.no_wall_time, t0);
    let mut out = Outcome::default();
    for c in checks {
        let status = if c.passed() { "pass" } else { "fail" };
        out.report.push(format!(
            "{} {:<32} max_error={:<12} tolerance={:e} samples={}",
            status.to_uppercase(),
            c.name,
            format!("{:.3e}", c.max_error),
            c.tolerance,
            c.samples
        ));
        if !c.passed() {
            out.failures.push(c.name.to_string());
        }
        out.rows.push(ResultRow {
            n: Some(a.n),
            residual: Some(c.max_error),
            wall_time: wall,
            status: status.into(),
            ..ResultRow::new(format!("verify.{}", c.name))
        });
    }
    Ok(out)
}

pub fn cmd_optimal_angles(a: &AnglesArgs) -> Result<Outcome, CliError> {
    let range = a.qubits.resolve(1..=24)?;
    let keep_time = !a.output.no_wall_time;
    let per_n: Vec<(Vec<ResultRow>, Option<f64>, bool)> = range
        .clone()
        .into_par_iter()
        .map(|n| {
            let t0 = Instant::now();
            let mut rows = Vec::new();
            match solve_optimal_p1(n) {
                Ok(sol) => {
                    let residual = beta_equation_residual(n, sol.beta);
                    let ok = residual.abs() < 1e-12;
                    let wall = timed(keep_time, t0);
                    rows.push(ResultRow {
                        n: Some(n),
                        p: Some(1),
                        layer: Some(1),
                        gamma: Some(sol.gamma),
                        beta: Some(sol.beta),
                        magnitude_sq: Some(sol.magnitude_sq),
                        residual: Some(residual),
                        wall_time: wall,
                        status: if ok { "ok" } else { "residual_fail" }.into(),
                        ..ResultRow::new("optimal_angles.root")
                    });
                    if let Ok(asym) = asymptotic_angles(n) {
                        rows.push(ResultRow {
                            n: Some(n),
                            p: Some(1),
                            layer: Some(1),
                            gamma: Some(asym.gamma),
                            beta: Some(asym.beta),
                            magnitude_sq: Some(overlap_sq_on_line(n, asym.beta)),
                            residual: Some(asym.beta - sol.beta),
                            wall_time: wall,
                            status: "ok".into(),
                            ..ResultRow::new("optimal_angles.asymptotic")
                        });
                    }
                    (rows, Some(sol.beta), ok)
                }
                Err(e) => {
                    rows.push(ResultRow {
                        n: Some(n),
                        p: Some(1),
                        wall_time: timed(keep_time, t0),
                        status: format!("solver_failure: {e}"),
                        ..ResultRow::new("optimal_angles.root")
                    });
                    (rows, None, false)
                }
            }
        })
        .collect();

    let mut out = Outcome::default();
    let mut scaled = Vec::new();
    for (n, (rows, beta, ok)) in range.zip(per_n) {
        out.rows.extend(rows);
        match beta {
            Some(b) => {
                scaled.push(((n as f64 + 2.0) * b - PI).abs());
                if !ok {
                    out.failures.push(format!("n={n}: optimal-beta residual above 1e-12"));
                }
            }
            None => {
                out.solver_failure = true;
                out.failures.push(format!("n={n}: no single-layer root found"));
            }
        }
    }
    let monotone = scaled.windows(2).all(|w| w[1] < w[0]);
    out.report.push(format!(
        "|(n+2)β − π| decreases monotonically across the range: {monotone}"
    ));
    Ok(out)
}

pub fn cmd_lastlayer(a: &LastLayerArgs) -> Result<Outcome, CliError> {
    if !(1..=5).contains(&a.p) {
        return Err(CliError::Config(format!("--p must be in 1..=5, got {}", a.p)));
    }
    let range = a.qubits.resolve(6..=12)?;
    let cfg = optimizer_config(&a.training)?;
    let keep_time = !a.output.no_wall_time;
    let ladders: Vec<(Ladder, Option<f64>)> = range
        .clone()
        .into_par_iter()
        .map(|n| {
            let t0 = Instant::now();
            let ladder = optimize_global_ladder(n, a.p, &cfg)?;
            Ok((ladder, timed(keep_time, t0)))
        })
        .collect::<Result<_, QaoaError>>()?;

    let mut out = Outcome::default();
    // (depth, layer) -> (β, γ) samples over n
    let mut series: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut worst = [0.0f64; 2];
    for (n, (ladder, wall)) in range.zip(ladders) {
        for (schedule, trace) in ladder {
            let depth = schedule.depth();
            let shown = oriented(&schedule, depth - 1);
            let converged = trace.converged();
            for k in 0..depth {
                let (gamma, beta) = shown.layer(k);
                let defect = shown.line_defect(k);
                let mut status = if converged { "converged" } else { "not_converged" }.to_string();
                if k + 1 == depth && converged {
                    let limit = if depth == 1 { 1e-6 } else { 0.01 };
                    let slot = usize::from(depth > 1);
                    worst[slot] = worst[slot].max(defect.abs());
                    if defect.abs() >= limit {
                        status = "defect_fail".into();
                        out.failures.push(format!("n={n} p={depth}: last-layer defect {defect:.3e}"));
                    }
                }
                if converged {
                    let entry = series.entry((depth, k + 1)).or_default();
                    entry.0.push(beta);
                    entry.1.push(gamma);
                }
                out.rows.push(ResultRow {
                    n: Some(n),
                    p: Some(depth),
                    layer: Some(k + 1),
                    gamma: Some(gamma),
                    beta: Some(beta),
                    magnitude_sq: Some(trace.final_magnitude_sq()),
                    residual: Some(defect),
                    wall_time: wall,
                    status,
                    ..ResultRow::new("last_layer")
                });
            }
        }
    }
    for ((depth, layer), (betas, gammas)) in &series {
        if betas.len() < 2 {
            continue;
        }
        let (intercept, slope, rms) = linear_fit(betas, gammas);
        out.rows.push(ResultRow {
            p: Some(*depth),
            layer: Some(*layer),
            gamma: Some(intercept),
            beta: Some(slope),
            residual: Some(rms),
            status: "fit: gamma=intercept beta=slope".into(),
            ..ResultRow::new("last_layer.fit")
        });
    }
    out.report.push(format!(
        "max |γ_p + 2β_p − π| over converged runs: p = 1: {:.3e}, p ≥ 2: {:.3e}",
        worst[0], worst[1]
    ));
    Ok(out)
}

type Ladder = Vec<(AngleSchedule, TrainingTrace)>;

fn modal(values: &[Option<usize>]) -> Option<usize> {
    let mut counts: BTreeMap<Option<usize>, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(*v).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts.into_iter().find(|(_, c)| *c == best).and_then(|(v, _)| v)
}

pub fn cmd_saturation(a: &SaturationArgs) -> Result<Outcome, CliError> {
    let range = a.qubits.resolve(4..=6)?;
    if a.seeds == 0 {
        return Err(CliError::Config("--seeds must be >= 1".into()));
    }
    if a.epsilon.is_nan() || a.epsilon <= 0.0 {
        return Err(CliError::Config("--epsilon must be > 0".into()));
    }
    let noise = noise_model(a.noise, a.sigma, a.undertrain_iterations)?;
    let base = optimizer_config(&a.training)?;
    let keep_time = !a.output.no_wall_time;
    let label = noise_label(noise);

    let cells: Vec<(usize, u64)> = range
        .clone()
        .flat_map(|n| (0..a.seeds).map(move |s| (n, a.training.seed + s)))
        .collect();
    let traces: Vec<(TrainingTrace, Option<f64>)> = cells
        .par_iter()
        .map(|&(n, seed)| {
            let cfg = OptimizerConfig {
                rng_seed: seed,
                improvement_epsilon: a.epsilon,
                ..base.clone()
            };
            let t0 = Instant::now();
            let trace = optimize_layerwise(n, a.p_max.unwrap_or(2 * n + 2), &cfg, noise)?;
            Ok((trace, timed(keep_time, t0)))
        })
        .collect::<Result<_, QaoaError>>()?;

    let mut out = Outcome::default();
    let mut by_n: BTreeMap<usize, Vec<Option<usize>>> = BTreeMap::new();
    for (&(n, seed), (trace, wall)) in cells.iter().zip(&traces) {
        let experiment = format!("saturation/{label}/seed={seed}");
        for r in &trace.records {
            let (gamma, beta) = r.schedule.layer(r.depth - 1);
            out.rows.push(ResultRow {
                n: Some(n),
                p: Some(r.depth),
                layer: Some(r.depth),
                gamma: Some(gamma),
                beta: Some(beta),
                magnitude_sq: Some(r.magnitude_sq),
                residual: Some(r.improvement),
                wall_time: *wall,
                status: if r.converged { "converged" } else { "not_converged" }.into(),
                ..ResultRow::new(experiment.clone())
            });
        }
        let pstar = detect_saturation(trace, a.epsilon);
        by_n.entry(n).or_default().push(pstar);
        out.rows.push(ResultRow {
            n: Some(n),
            p: pstar,
            magnitude_sq: Some(trace.final_magnitude_sq()),
            wall_time: *wall,
            status: if pstar.is_some() { "saturated" } else { "no_saturation" }.into(),
            ..ResultRow::new(format!("{experiment}/pstar"))
        });
    }
    for (n, pstars) in by_n {
        let mode = modal(&pstars);
        let at_n = pstars.iter().filter(|p| **p == Some(n)).count();
        let frac = at_n as f64 / pstars.len() as f64;
        out.rows.push(ResultRow {
            n: Some(n),
            p: mode,
            residual: Some(frac),
            status: format!("modal p* over {} seeds; residual = fraction with p* = n", pstars.len()),
            ..ResultRow::new(format!("saturation/{label}/mode"))
        });
        let shown = mode.map_or("none".to_string(), |m| m.to_string());
        out.report.push(format!("n={n} noise={label}: modal p* = {shown}, p* = n in {at_n}/{} seeds", pstars.len()));
        if a.check {
            let ok = match noise {
                NoiseModel::None => mode == Some(n),
                _ => frac < 0.5,
            };
            if !ok {
                out.failures.push(format!("n={n}: saturation check failed (modal p* = {shown})"));
            }
        }
    }
    Ok(out)
}

pub fn cmd_concentration(a: &ConcentrationArgs) -> Result<Outcome, CliError> {
    if a.p == 0 {
        return Err(CliError::Config("--p must be >= 1".into()));
    }
    let range = a.qubits.resolve(8..=16)?;
    let cfg = optimizer_config(&a.training)?;
    let t0 = Instant::now();
    let rows = concentration_scan(range, a.p, &cfg)?;
    let wall = timed(!a.output.no_wall_time, t0);
    let mut out = Outcome::default();
    let mut ns = Vec::new();
    let mut deltas = Vec::new();
    for row in &rows {
        for (k, (gamma, beta)) in row.schedule.layers().enumerate() {
            out.rows.push(ResultRow {
                n: Some(row.n),
                p: Some(a.p),
                layer: Some(k + 1),
                gamma: Some(gamma),
                beta: Some(beta),
                magnitude_sq: Some(row.magnitude_sq),
                residual: row.delta,
                wall_time: wall,
                status: if row.converged { "converged" } else { "not_converged" }.into(),
                ..ResultRow::new("concentration")
            });
        }
        if let Some(d) = row.delta.filter(|d| *d > 0.0) {
            ns.push((row.n as f64).ln());
            deltas.push(d.ln());
        }
    }
    if ns.len() >= 2 {
        let (_, slope, _) = linear_fit(&ns, &deltas);
        out.rows.push(ResultRow {
            p: Some(a.p),
            residual: Some(slope),
            status: "log-log slope of successive differences".into(),
            ..ResultRow::new("concentration.slope")
        });
        out.report.push(format!("log-log slope of |θ(n) − θ(n−1)|: {slope:.3}"));
    }
    Ok(out)
}

pub fn cmd_train(a: &TrainArgs) -> Result<Outcome, CliError> {
    let mut cfg = optimizer_config(&a.training)?;
    let noise = noise_model(a.noise, a.sigma, a.undertrain_iterations)?;
    let keep_time = !a.output.no_wall_time;
    let mut out = Outcome::default();
    let t0 = Instant::now();
    match a.strategy {
        StrategyArg::Global => {
            if noise != NoiseModel::None {
                return Err(CliError::Config("noise models apply to layerwise training only".into()));
            }
            cfg.strategy = Strategy::Global;
            let ladder = optimize_global_ladder(a.n, a.p, &cfg)?;
            let wall = timed(keep_time, t0);
            let (schedule, trace) = ladder.last().expect("p >= 1");
            let rec = trace.last().expect("one record");
            for (k, (gamma, beta)) in schedule.layers().enumerate() {
                out.rows.push(ResultRow {
                    n: Some(a.n),
                    p: Some(a.p),
                    layer: Some(k + 1),
                    gamma: Some(gamma),
                    beta: Some(beta),
                    magnitude_sq: Some(rec.magnitude_sq),
                    residual: Some(schedule.line_defect(k)),
                    wall_time: wall,
                    status: if rec.converged { "converged" } else { "not_converged" }.into(),
                    ..ResultRow::new("train.global")
                });
            }
            out.report.push(format!("n={} p={}: |g|² = {}", a.n, a.p, format_float(rec.magnitude_sq)));
        }
        StrategyArg::Layerwise => {
            cfg.strategy = Strategy::Layerwise;
            let trace = optimize_layerwise(a.n, a.p, &cfg, noise)?;
            let wall = timed(keep_time, t0);
            let experiment = format!("train.layerwise/{}", noise_label(noise));
            for r in &trace.records {
                let (gamma, beta) = r.schedule.layer(r.depth - 1);
                out.rows.push(ResultRow {
                    n: Some(a.n),
                    p: Some(r.depth),
                    layer: Some(r.depth),
                    gamma: Some(gamma),
                    beta: Some(beta),
                    magnitude_sq: Some(r.magnitude_sq),
                    residual: Some(r.improvement),
                    wall_time: wall,
                    status: if r.converged { "converged" } else { "not_converged" }.into(),
                    ..ResultRow::new(experiment.clone())
                });
            }
            let shown = trace.saturation_depth.map_or("none".to_string(), |p| p.to_string());
            out.report.push(format!(
                "n={} p_max={}: final |g|² = {}, p* = {shown}",
                a.n,
                a.p,
                format_float(trace.final_magnitude_sq())
            ));
        }
    }
    Ok(out)
}

fn output_args(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Verify(a) => &a.output,
        Command::OptimalAngles(a) => &a.output,
        Command::LastLayer(a) => &a.output,
        Command::Saturation(a) => &a.output,
        Command::Concentration(a) => &a.output,
        Command::Train(a) => &a.output,
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Verify(a) => cmd_verify(a),
        Command::OptimalAngles(a) => cmd_optimal_angles(a),
        Command::LastLayer(a) => cmd_lastlayer(a),
        Command::Saturation(a) => cmd_saturation(a),
        Command::Concentration(a) => cmd_concentration(a),
        Command::Train(a) => cmd_train(a),
    }
}

/// Runs a parsed command line, writes its table and report, and returns the
/// process exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let out = output_args(&cli.command);
    if let Err(e) = emit(&outcome.rows, out.format, out.out.as_deref()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let lines = outcome
        .report
        .iter()
        .cloned()
        .chain(outcome.failures.iter().map(|f| format!("FAIL: {f}")));
    for line in lines {
        // Keep stdout clean when it carries the table.
        if out.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    outcome.exit_code()
}
