//! Cross-validation suite: every independent evaluation path is compared
//! against the others on seeded random probes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{
    overlap_complex_p1, overlap_sq_on_line, overlap_sq_p1, recursive_overlap, solve_optimal_p1,
    solve_p1_branch, stationarity_residuals,
};
use crate::error::{QaoaError, Result};
use crate::oracle::{
    mixer_restriction, project_to_dicke, run_statevector, statevector_overlap, TargetSpec,
    DEFAULT_ORACLE_CAP,
};
use crate::schedule::AngleSchedule;
use crate::symsim::SymmetricSimulator;
use crate::train::{
    gradient_ascent, optimize_global, optimize_layerwise, AscentOptions, NoiseModel, OptimizerConfig,
    TrainingTrace,
};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Largest qubit count used by the random-probe checks.
    pub max_n: usize,
    /// Random probes per check.
    pub probes: usize,
    pub seed: u64,
    /// Points per axis of the `[0, π)²` grid used to certify the `p = 1` optimum.
    pub grid: usize,
    /// Include the optimizer checks (slower).
    pub training: bool,
    /// Harness self-test: perturbs the closed-form overlap by `1e-9`.
    pub corrupt_closed_form: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_n: 10,
            probes: 100,
            seed: 0,
            grid: 2000,
            training: true,
            corrupt_closed_form: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_error: f64,
    /// The check passes when `max_error < tolerance`.
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

/// Uniform schedule with `γ ∈ [0, 2π)`, `β ∈ [0, π)`.
pub fn random_schedule(rng: &mut impl Rng, p: usize) -> AngleSchedule {
    let layers: Vec<(f64, f64)> = (0..p)
        .map(|_| (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..PI)))
        .collect();
    AngleSchedule::from_layers(&layers).expect("finite angles")
}

fn random_schedule_upto(rng: &mut impl Rng, max_p: usize) -> AngleSchedule {
    let p = rng.random_range(1..=max_p);
    random_schedule(rng, p)
}

struct Acc {
    name: &'static str,
    tolerance: f64,
    max_error: f64,
    samples: usize,
}

impl Acc {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            max_error: f64::NEG_INFINITY,
            samples: 0,
        }
    }

    fn record(&mut self, err: f64) {
        // NaN must fail the check.
        self.max_error = if err.is_nan() { f64::INFINITY } else { self.max_error.max(err) };
        self.samples += 1;
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            max_error: if self.samples == 0 { f64::INFINITY } else { self.max_error },
            tolerance: self.tolerance,
            samples: self.samples,
        }
    }
}

fn stream(opts: &VerifyOptions, check: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x100).wrapping_add(check))
}

fn simulators(max_n: usize) -> Result<Vec<SymmetricSimulator>> {
    (1..=max_n).map(SymmetricSimulator::new).collect()
}

fn norm_preservation(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> CheckOutcome {
    let mut rng = stream(opts, 1);
    let mut acc = Acc::new("norm_preservation", 1e-12);
    for _ in 0..opts.probes {
        let sim = &sims[rng.random_range(0..sims.len())];
        let s = random_schedule_upto(&mut rng, 8);
        acc.record((sim.run(&s).norm_sqr() - 1.0).abs());
    }
    acc.finish()
}

fn oracle_equivalence(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 2);
    let mut acc = Acc::new("oracle_equivalence", 1e-12);
    for _ in 0..opts.probes {
        let sim = &sims[rng.random_range(0..sims.len())];
        let n = sim.n();
        let s = random_schedule_upto(&mut rng, 4);
        let sv = statevector_overlap(n, &s, &TargetSpec::zeros(n))?;
        acc.record((sim.simulate(&s).g - sv.g).norm());
    }
    Ok(acc.finish())
}

fn eigenphase(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> CheckOutcome {
    let mut rng = stream(opts, 3);
    let mut acc = Acc::new("eigenphase", 1e-12);
    for sim in sims {
        let init = sim.initial_state();
        for _ in 0..4 {
            let beta = rng.random_range(-PI..PI);
            let s = AngleSchedule::from_layers(&[(0.0, beta)]).expect("finite");
            let out = sim.run(&s);
            let phase = Complex64::from_polar(1.0, -beta * sim.n() as f64);
            for (a, b) in out.amps().iter().zip(init.amps()) {
                acc.record((a - phase * b).norm());
            }
        }
    }
    acc.finish()
}

fn inversion_symmetry(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> CheckOutcome {
    let mut rng = stream(opts, 4);
    let mut acc = Acc::new("inversion_symmetry", 1e-12);
    for _ in 0..opts.probes {
        let sim = &sims[rng.random_range(0..sims.len())];
        let s = random_schedule_upto(&mut rng, 4);
        let g = sim.simulate(&s).g;
        let h = sim.simulate(&s.inverted()).g;
        let sign = if (sim.n() * s.depth()).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc.record((h.norm() - g.norm()).abs().max((h - sign * g.conj()).norm()));
    }
    acc.finish()
}

fn gradient_vs_finite_differences(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 5);
    let mut acc = Acc::new("gradient_vs_finite_differences", 1e-6);
    let h = 1e-5;
    let max_n = sims.len().min(8);
    for _ in 0..opts.probes {
        let sim = &sims[rng.random_range(0..max_n)];
        let s = random_schedule_upto(&mut rng, 3);
        let grad = sim.gradient(&s)?;
        let x = s.to_flat();
        for (i, gi) in grad.iter().enumerate() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fp = sim.simulate(&AngleSchedule::from_flat(&xp)?).magnitude_sq;
            let fm = sim.simulate(&AngleSchedule::from_flat(&xm)?).magnitude_sq;
            acc.record((gi - (fp - fm) / (2.0 * h)).abs());
        }
    }
    Ok(acc.finish())
}

fn target_invariance(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 6);
    let mut acc = Acc::new("target_invariance", 1e-12);
    for n in 1..=opts.max_n {
        let s = random_schedule_upto(&mut rng, 3);
        let reference = statevector_overlap(n, &s, &TargetSpec::zeros(n))?.g;
        let targets: Vec<usize> = if n <= 6 {
            (0..1usize << n).collect()
        } else {
            (0..20).map(|_| rng.random_range(0..1usize << n)).collect()
        };
        for t in targets {
            let g = statevector_overlap(n, &s, &TargetSpec::from_index(n, t)?)?.g;
            acc.record((g - reference).norm());
        }
    }
    Ok(acc.finish())
}

fn symmetric_closure(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 7);
    let mut acc = Acc::new("symmetric_closure", 1e-12);
    for _ in 0..opts.probes {
        let n = rng.random_range(1..=opts.max_n);
        let s = random_schedule_upto(&mut rng, 4);
        let psi = run_statevector(n, &s, &TargetSpec::zeros(n))?;
        acc.record(project_to_dicke(&psi).residual_norm);
    }
    Ok(acc.finish())
}

fn mixer_restriction_check(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 8);
    let mut acc = Acc::new("mixer_restriction", 1e-12);
    for sim in sims.iter().take(8) {
        let beta = rng.random_range(0.0..PI);
        let full = mixer_restriction(sim.n(), beta)?;
        for (a, b) in sim.mixer(beta).matrix().iter().zip(&full) {
            acc.record((a - b).norm());
        }
    }
    Ok(acc.finish())
}

fn formula_consistency(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 9);
    let mut acc = Acc::new("formula_consistency", 1e-12);
    let corruption = if opts.corrupt_closed_form { 1e-9 } else { 0.0 };
    for _ in 0..opts.probes.max(200) {
        let sim = &sims[rng.random_range(0..sims.len())];
        let n = sim.n();
        let gamma = rng.random_range(0.0..2.0 * PI);
        let beta = rng.random_range(0.0..PI);
        let s = AngleSchedule::from_layers(&[(gamma, beta)])?;
        let values = [
            overlap_sq_p1(n, gamma, beta) + corruption,
            overlap_complex_p1(n, gamma, beta).norm_sqr(),
            sim.simulate(&s).magnitude_sq,
            statevector_overlap(n, &s, &TargetSpec::zeros(n))?.magnitude_sq,
        ];
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        acc.record(hi - lo);
        acc.record((overlap_complex_p1(n, gamma, beta) - sim.simulate(&s).g).norm());
    }
    Ok(acc.finish())
}

fn line_restriction(opts: &VerifyOptions) -> CheckOutcome {
    let mut rng = stream(opts, 10);
    let mut acc = Acc::new("line_restriction", 1e-14);
    for _ in 0..opts.probes {
        let n = rng.random_range(1..=24);
        let beta = rng.random_range(0.0..PI);
        acc.record((overlap_sq_on_line(n, beta) - overlap_sq_p1(n, PI - 2.0 * beta, beta)).abs());
    }
    acc.finish()
}

fn stationarity_at_root() -> Result<CheckOutcome> {
    let mut acc = Acc::new("stationarity_at_root", 1e-10);
    for n in 1..=24 {
        let sol = solve_optimal_p1(n)?;
        match stationarity_residuals(n, sol.gamma, sol.beta).residuals() {
            Some((rg, rb)) => acc.record(rg.abs().max(rb.abs())),
            None => acc.record(f64::INFINITY),
        }
    }
    Ok(acc.finish())
}

/// Distance between two single-layer angle pairs modulo the inversion orbit
/// and the `(2π, π)` periods.
pub fn p1_orbit_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |x: f64, y: f64, period: f64| {
        let r = (x - y).rem_euclid(period);
        r.min(period - r)
    };
    let direct = d(a.0, b.0, 2.0 * PI).max(d(a.1, b.1, PI));
    let inverted = d(2.0 * PI - a.0, b.0, 2.0 * PI).max(d(PI - a.1, b.1, PI));
    direct.min(inverted)
}

/// Grid certificate for the single-layer optimum at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCertificate {
    pub grid_argmax: (f64, f64),
    pub grid_max: f64,
    pub root_value: f64,
    /// Offset of the grid argmax from the root, in grid cells.
    pub cell_offset: f64,
    /// Distance to the root after local ascent from the grid argmax.
    pub polished_distance: f64,
}

impl GridCertificate {
    /// No grid point beats the root and the best grid point lies in its basin.
    pub fn holds(&self, tol: f64) -> bool {
        self.grid_max <= self.root_value + 1e-15 && self.polished_distance < tol
    }
}

pub fn certify_p1_on_grid(n: usize, points: usize) -> Result<GridCertificate> {
    if points < 2 {
        return Err(QaoaError::InvalidArgument("grid needs at least 2 points per axis".into()));
    }
    let sol = solve_optimal_p1(n)?;
    let cell = PI / points as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..points {
        let gamma = i as f64 * cell;
        for j in 0..points {
            let beta = j as f64 * cell;
            let v = overlap_sq_p1(n, gamma, beta);
            if v > best.0 {
                best = (v, gamma, beta);
            }
        }
    }
    let sim = SymmetricSimulator::new(n)?;
    let polished = gradient_ascent(
        |x| {
            sim.value_and_gradient(&AngleSchedule::from_flat(x).expect("two angles"))
                .expect("p = 1")
        },
        &[best.1, best.2],
        AscentOptions {
            max_step_length: cell * 10.0,
            ..Default::default()
        },
    );
    let root = (sol.gamma, sol.beta);
    Ok(GridCertificate {
        grid_argmax: (best.1, best.2),
        grid_max: best.0,
        root_value: sol.magnitude_sq,
        cell_offset: p1_orbit_distance((best.1, best.2), root) / cell,
        polished_distance: p1_orbit_distance((polished.x[0], polished.x[1]), root),
    })
}

fn grid_certification(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("grid_certification", 1e-6);
    for n in 2..=12 {
        let cert = certify_p1_on_grid(n, opts.grid)?;
        let excess = (cert.grid_max - cert.root_value - 1e-15).max(0.0);
        acc.record(if excess > 0.0 { f64::INFINITY } else { cert.polished_distance });
    }
    Ok(acc.finish())
}

fn branch_ordering() -> Result<CheckOutcome> {
    // Error is the largest increase from one odd branch to the next; must be negative.
    let mut acc = Acc::new("branch_ordering", 0.0);
    for n in 8..=16 {
        let v: Vec<f64> = [1, 3, 5]
            .iter()
            .map(|&k| solve_p1_branch(n, k).map(|s| s.magnitude_sq))
            .collect::<Result<_>>()?;
        acc.record((v[1] - v[0]).max(v[2] - v[1]));
    }
    Ok(acc.finish())
}

fn recursion_equivalence(opts: &VerifyOptions, sims: &[SymmetricSimulator]) -> Result<CheckOutcome> {
    let mut rng = stream(opts, 11);
    let mut acc = Acc::new("recursion_equivalence", 1e-12);
    for _ in 0..opts.probes {
        let sim = &sims[rng.random_range(0..sims.len())];
        let s = random_schedule_upto(&mut rng, 4);
        let g = recursive_overlap(sim.n(), s.gammas(), s.betas())?;
        acc.record((g - sim.simulate(&s).g).norm());
    }
    Ok(acc.finish())
}

fn p1_agreement(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("global_p1_agreement", 1e-6);
    let cfg = OptimizerConfig {
        rng_seed: opts.seed,
        ..Default::default()
    };
    for n in 2..=12 {
        let (s, _) = optimize_global(n, 1, &cfg)?;
        let sol = solve_optimal_p1(n)?;
        acc.record(p1_orbit_distance(s.layer(0), (sol.gamma, sol.beta)));
    }
    Ok(acc.finish())
}

fn layerwise_monotonicity(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("layerwise_monotonicity", 1e-12);
    let cfg = OptimizerConfig {
        rng_seed: opts.seed,
        ..Default::default()
    };
    for n in 2..=opts.max_n.min(7) {
        let t = optimize_layerwise(n, n + 3, &cfg, NoiseModel::None)?;
        let mut prev = 2f64.powi(-(n as i32));
        for r in &t.records {
            acc.record(prev - r.magnitude_sq);
            prev = r.magnitude_sq;
        }
    }
    Ok(acc.finish())
}

fn global_dominance(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("global_dominance", 1e-9);
    let cfg = OptimizerConfig {
        rng_seed: opts.seed,
        ..Default::default()
    };
    for n in 1..=opts.max_n.min(8) {
        let layerwise = optimize_layerwise(n, 3, &cfg, NoiseModel::None)?;
        for p in 1..=3 {
            let (_, global) = optimize_global(n, p, &cfg)?;
            acc.record(layerwise.records[p - 1].magnitude_sq - global.final_magnitude_sq());
        }
    }
    Ok(acc.finish())
}

fn trace_difference(a: &TrainingTrace, b: &TrainingTrace) -> f64 {
    if a.records.len() != b.records.len() || a.saturation_depth != b.saturation_depth {
        return f64::INFINITY;
    }
    a.records
        .iter()
        .zip(&b.records)
        .flat_map(|(x, y)| {
            let xs = x.schedule.to_flat().into_iter().chain([x.magnitude_sq, x.gradient_norm]);
            let ys = y.schedule.to_flat().into_iter().chain([y.magnitude_sq, y.gradient_norm]);
            xs.zip(ys).map(|(u, v)| if u.to_bits() == v.to_bits() { 0.0 } else { f64::INFINITY })
        })
        .fold(0.0, f64::max)
}

fn seed_determinism(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("seed_determinism", f64::MIN_POSITIVE);
    let cfg = OptimizerConfig {
        rng_seed: opts.seed,
        ..Default::default()
    };
    let noise = NoiseModel::PhaseNoise { sigma: 0.05 };
    let a = optimize_layerwise(5, 8, &cfg, noise)?;
    let b = optimize_layerwise(5, 8, &cfg, noise)?;
    acc.record(trace_difference(&a, &b));
    let (_, a) = optimize_global(5, 2, &cfg)?;
    let (_, b) = optimize_global(5, 2, &cfg)?;
    acc.record(trace_difference(&a, &b));
    Ok(acc.finish())
}

fn noise_sanity(opts: &VerifyOptions) -> Result<CheckOutcome> {
    let mut acc = Acc::new("zero_noise_sanity", f64::MIN_POSITIVE);
    let cfg = OptimizerConfig {
        rng_seed: opts.seed,
        ..Default::default()
    };
    let quiet = optimize_layerwise(5, 8, &cfg, NoiseModel::PhaseNoise { sigma: 0.0 })?;
    let none = optimize_layerwise(5, 8, &cfg, NoiseModel::None)?;
    acc.record(trace_difference(&quiet, &none));
    Ok(acc.finish())
}

/// Runs every check in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    if opts.max_n == 0 {
        return Err(QaoaError::InvalidArgument("max_n must be >= 1".into()));
    }
    if opts.max_n > DEFAULT_ORACLE_CAP {
        return Err(QaoaError::ResourceLimit {
            what: "statevector qubits",
            requested: opts.max_n,
            cap: DEFAULT_ORACLE_CAP,
        });
    }
    if opts.probes == 0 {
        return Err(QaoaError::InvalidArgument("probes must be >= 1".into()));
    }
    let sims = simulators(opts.max_n)?;
    let mut out = vec![
        norm_preservation(opts, &sims),
        oracle_equivalence(opts, &sims)?,
        eigenphase(opts, &sims),
        inversion_symmetry(opts, &sims),
        gradient_vs_finite_differences(opts, &sims)?,
        target_invariance(opts)?,
        symmetric_closure(opts)?,
        mixer_restriction_check(opts, &sims)?,
        formula_consistency(opts, &sims)?,
        line_restriction(opts),
        stationarity_at_root()?,
        grid_certification(opts)?,
        branch_ordering()?,
        recursion_equivalence(opts, &sims)?,
    ];
    if opts.training {
        out.extend([
            p1_agreement(opts)?,
            layerwise_monotonicity(opts)?,
            global_dominance(opts)?,
            seed_determinism(opts)?,
            noise_sanity(opts)?,
        ]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            max_n: 6,
            probes: 20,
            grid: 300,
            training: false,
            ..Default::default()
        }
    }

    #[test]
    fn quick_suite_passes() {
        for c in run_all(&quick()).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn corruption_is_caught() {
        let opts = VerifyOptions {
            corrupt_closed_form: true,
            ..quick()
        };
        let failed: Vec<_> = run_all(&opts)
            .unwrap()
            .into_iter()
            .filter(|c| !c.passed())
            .map(|c| c.name)
            .collect();
        assert_eq!(failed, vec!["formula_consistency"]);
    }

    #[test]
    fn oversized_request_is_a_resource_error() {
        let opts = VerifyOptions {
            max_n: 13,
            ..quick()
        };
        assert!(matches!(run_all(&opts), Err(QaoaError::ResourceLimit { .. })));
    }

    #[test]
    fn orbit_distance_handles_periods() {
        assert!(p1_orbit_distance((0.1, 0.2), (0.1 + 2.0 * PI, 0.2 - PI)) < 1e-12);
        assert!(p1_orbit_distance((0.5, 0.3), (2.0 * PI - 0.5, PI - 0.3)) < 1e-12);
    }
}
