//! Outer-loop angle training: multistart global optimization, layerwise
//! training with optional under-training or coherent angle noise, saturation
//! detection and concentration scans.

pub mod ascent;
mod layerwise;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{asymptotic_angles, solve_optimal_p1, ASYMPTOTIC_MIN_N};
use crate::error::{QaoaError, Result};
use crate::schedule::AngleSchedule;
use crate::symsim::SymmetricSimulator;

pub use ascent::{gradient_ascent, AscentMethod, AscentOptions, AscentOutcome};
pub use layerwise::optimize_layerwise;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Global,
    Layerwise,
}

/// How the restart points are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// First restart at the large-`n` single-layer angles tiled over every
    /// layer; the rest uniform on `[0, π)²`.
    AsymptoticSeed,
    UniformRandom,
    /// First restart at all-zero angles; the rest uniform.
    Zeros,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub strategy: Strategy,
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub improvement_epsilon: f64,
    pub init: InitScheme,
    pub rng_seed: u64,
    pub method: AscentMethod,
    /// Extra starting points tried in addition to the `restarts` generated ones.
    pub warm_starts: Vec<AngleSchedule>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Global,
            restarts: 20,
            max_iterations: 10_000,
            gradient_tolerance: 1e-10,
            improvement_epsilon: 1e-8,
            init: InitScheme::AsymptoticSeed,
            rng_seed: 0,
            method: AscentMethod::default(),
            warm_starts: Vec::new(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(QaoaError::InvalidArgument("restarts must be >= 1".into()));
        }
        if self.gradient_tolerance.is_nan()
            || self.gradient_tolerance <= 0.0
            || self.improvement_epsilon.is_nan()
            || self.improvement_epsilon <= 0.0
        {
            return Err(QaoaError::InvalidArgument("tolerances must be > 0".into()));
        }
        Ok(())
    }

    fn ascent_options(&self) -> AscentOptions {
        AscentOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            method: self.method,
            max_step_length: PI,
        }
    }
}

/// Perturbations applied during layerwise training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    /// After each layer is trained, every stored angle receives independent
    /// Gaussian noise with standard deviation `sigma` (radians).
    PhaseNoise { sigma: f64 },
    /// Each layer's local optimization stops after this many iterations.
    Undertrain { iterations: usize },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::PhaseNoise { sigma } if sigma < 0.0 || !sigma.is_finite() => Err(
                QaoaError::InvalidArgument(format!("phase noise sigma must be >= 0, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }
}

/// One trained depth.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerRecord {
    pub depth: usize,
    /// Angles as trained, before any noise is applied.
    pub schedule: AngleSchedule,
    pub magnitude_sq: f64,
    /// Gain over the previous depth (over `|g_0|² = 2^{-n}` at depth 1).
    pub improvement: f64,
    pub gradient_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrace {
    pub n: usize,
    pub records: Vec<LayerRecord>,
    pub saturation_depth: Option<usize>,
}

impl TrainingTrace {
    pub fn last(&self) -> Option<&LayerRecord> {
        self.records.last()
    }

    pub fn final_magnitude_sq(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.magnitude_sq)
    }

    pub fn converged(&self) -> bool {
        self.records.iter().all(|r| r.converged)
    }
}

/// Smallest depth after which every recorded improvement is below `epsilon`;
/// `None` if the last recorded layer still improved by at least `epsilon`.
pub fn detect_saturation(trace: &TrainingTrace, epsilon: f64) -> Option<usize> {
    saturation_depth(&trace.records, epsilon)
}

pub(crate) fn saturation_depth(records: &[LayerRecord], epsilon: f64) -> Option<usize> {
    let last = records.last()?;
    if last.improvement >= epsilon {
        return None;
    }
    Some(
        records
            .iter()
            .rev()
            .find(|r| r.improvement >= epsilon)
            .map_or(0, |r| r.depth),
    )
}

pub(crate) fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(worker as u64))
}

/// Single-layer seed angles: the asymptotic expansion where it applies, the
/// exact root below that.
pub(crate) fn seed_angles(n: usize) -> (f64, f64) {
    if n >= ASYMPTOTIC_MIN_N {
        let a = asymptotic_angles(n).expect("n checked");
        (a.gamma, a.beta)
    } else {
        let s = solve_optimal_p1(n).expect("k = 1 bracket holds for small n");
        (s.gamma, s.beta)
    }
}

pub(crate) fn uniform_layer(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.random_range(0.0..PI), rng.random_range(0.0..PI))
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub outcome: AscentOutcome,
    pub canonical_norm: f64,
}

const TIE_TOL: f64 = 1e-12;

/// Highest value wins; near-ties go to the smaller canonical norm, then the
/// lower index.
pub(crate) fn pick_best(candidates: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        let better = if (c.outcome.value - b.outcome.value).abs() <= TIE_TOL {
            c.canonical_norm < b.canonical_norm
        } else {
            c.outcome.value > b.outcome.value
        };
        if better {
            best = i;
        }
    }
    best
}

fn global_starts(n: usize, p: usize, config: &OptimizerConfig, worker: usize) -> Vec<f64> {
    let tiled = |(g, b): (f64, f64)| {
        let mut v = vec![g; p];
        v.extend(std::iter::repeat_n(b, p));
        v
    };
    match (config.init, worker) {
        (InitScheme::AsymptoticSeed, 0) => tiled(seed_angles(n)),
        (InitScheme::Zeros, 0) => vec![0.0; 2 * p],
        _ => {
            let mut rng = worker_rng(config.rng_seed, worker);
            let layers: Vec<_> = (0..p).map(|_| uniform_layer(&mut rng)).collect();
            AngleSchedule::from_layers(&layers).expect("finite").to_flat()
        }
    }
}

fn optimize_depth(
    sim: &SymmetricSimulator,
    p: usize,
    config: &OptimizerConfig,
    extra_starts: &[AngleSchedule],
) -> Result<(AngleSchedule, TrainingTrace)> {
    let n = sim.n();
    let mut starts: Vec<Vec<f64>> = extra_starts.iter().map(AngleSchedule::to_flat).collect();
    starts.extend((0..config.restarts).map(|w| global_starts(n, p, config, w)));

    let opts = config.ascent_options();
    let candidates: Vec<Candidate> = starts
        .par_iter()
        .map(|x0| {
            let outcome = gradient_ascent(
                |x| {
                    let s = AngleSchedule::from_flat(x).expect("even length");
                    sim.value_and_gradient(&s).expect("p >= 1")
                },
                x0,
                opts,
            );
            let canonical_norm = AngleSchedule::from_flat(&outcome.x)
                .expect("even length")
                .canonicalized()
                .norm();
            Candidate {
                outcome,
                canonical_norm,
            }
        })
        .collect();

    let best = &candidates[pick_best(&candidates)].outcome;
    let schedule = AngleSchedule::from_flat(&best.x)?;
    let record = LayerRecord {
        depth: p,
        schedule: schedule.clone(),
        magnitude_sq: best.value,
        improvement: best.value - 2f64.powi(-(n as i32)),
        gradient_norm: best.gradient_norm,
        converged: best.converged,
    };
    let trace = TrainingTrace {
        n,
        records: vec![record],
        saturation_depth: None,
    };
    Ok((schedule, trace))
}

/// An exact identity layer is a stationary point, so layers inserted into a
/// shallower optimum are slightly offset.
const LADDER_OFFSET: (f64, f64) = (0.1, 0.05);

/// Global optimization at every depth `1..=p_max`. Besides its own restarts,
/// depth `p` starts from the depth `p − 1` optimum with one extra layer
/// inserted at each position. Warm starts in `config` are used at their own
/// depth.
pub fn optimize_global_ladder(
    n: usize,
    p_max: usize,
    config: &OptimizerConfig,
) -> Result<Vec<(AngleSchedule, TrainingTrace)>> {
    config.validate()?;
    if p_max == 0 {
        return Err(QaoaError::InvalidArgument("depth must be >= 1".into()));
    }
    let sim = SymmetricSimulator::new(n)?;
    let mut out: Vec<(AngleSchedule, TrainingTrace)> = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let mut extra: Vec<AngleSchedule> = config
            .warm_starts
            .iter()
            .filter(|w| w.depth() == p)
            .cloned()
            .collect();
        if let Some((prev, _)) = out.last() {
            let layers: Vec<(f64, f64)> = prev.layers().collect();
            for at in 0..=layers.len() {
                let mut grown = layers.clone();
                grown.insert(at, LADDER_OFFSET);
                extra.push(AngleSchedule::from_layers(&grown)?);
            }
        }
        out.push(optimize_depth(&sim, p, config, &extra)?);
    }
    Ok(out)
}

/// Multistart optimization of all `2p` angles at once. The optima at depths
/// below `p` are found first and reused as starting points.
pub fn optimize_global(n: usize, p: usize, config: &OptimizerConfig) -> Result<(AngleSchedule, TrainingTrace)> {
    if let Some(w) = config.warm_starts.iter().find(|w| w.depth() != p) {
        return Err(QaoaError::InvalidArgument(format!(
            "warm start of depth {} given for depth {p}",
            w.depth()
        )));
    }
    let mut ladder = optimize_global_ladder(n, p, config)?;
    Ok(ladder.pop().expect("p >= 1"))
}

/// Per-`n` optimum of a concentration scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub n: usize,
    /// Canonicalized optimal schedule.
    pub schedule: AngleSchedule,
    pub magnitude_sq: f64,
    pub converged: bool,
    /// `‖θ(n) − θ(n−1)‖`, minimized over the inversion orbit of `θ(n)`.
    pub delta: Option<f64>,
}

fn flat_distance(a: &AngleSchedule, b: &AngleSchedule) -> f64 {
    a.to_flat()
        .iter()
        .zip(b.to_flat())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Distance between schedules modulo the inversion `(γ, β) → (2π − γ, π − β)`.
pub fn orbit_distance(a: &AngleSchedule, b: &AngleSchedule) -> f64 {
    let a = a.canonicalized();
    let b = b.canonicalized();
    flat_distance(&a, &b).min(flat_distance(&a.inverted().canonicalized(), &b))
}

/// Global optimization for each `n`, warm-started from the previous optimum.
pub fn concentration_scan(
    n_range: impl IntoIterator<Item = usize>,
    p: usize,
    config: &OptimizerConfig,
) -> Result<Vec<ConcentrationRow>> {
    let mut rows: Vec<ConcentrationRow> = Vec::new();
    for n in n_range {
        let mut cfg = config.clone();
        cfg.init = InitScheme::AsymptoticSeed;
        if let Some(prev) = rows.last() {
            cfg.warm_starts.push(prev.schedule.clone());
        }
        let (schedule, trace) = optimize_global(n, p, &cfg)?;
        let schedule = schedule.canonicalized();
        let delta = rows.last().map(|prev| orbit_distance(&schedule, &prev.schedule));
        let rec = trace.last().expect("one record");
        rows.push(ConcentrationRow {
            n,
            schedule,
            magnitude_sq: rec.magnitude_sq,
            converged: rec.converged,
            delta,
        });
    }
    Ok(rows)
}
