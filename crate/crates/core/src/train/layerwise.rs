use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{
    gradient_ascent, pick_best, saturation_depth, seed_angles, uniform_layer, worker_rng, Candidate,
    InitScheme, LayerRecord, NoiseModel, OptimizerConfig, TrainingTrace,
};
use crate::error::{QaoaError, Result};
use crate::schedule::AngleSchedule;
use crate::symsim::SymmetricSimulator;

const NOISE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

fn layer_starts(n: usize, depth: usize, config: &OptimizerConfig) -> Vec<[f64; 2]> {
    // The identity layer reproduces the previous overlap, which keeps noiseless
    // traces monotone.
    let mut starts = vec![[0.0, 0.0]];
    let stream = config.rng_seed.wrapping_add((depth as u64) << 32);
    for w in 0..config.restarts {
        let (g, b) = match (config.init, w) {
            (InitScheme::AsymptoticSeed, 0) => seed_angles(n),
            (InitScheme::Zeros, 0) => continue,
            _ => uniform_layer(&mut worker_rng(stream, w)),
        };
        starts.push([g, b]);
    }
    starts
}

/// Layer-by-layer training up to `p_max`: each step appends one layer and
/// optimizes only its two angles, earlier angles frozen.
pub fn optimize_layerwise(
    n: usize,
    p_max: usize,
    config: &OptimizerConfig,
    noise: NoiseModel,
) -> Result<TrainingTrace> {
    config.validate()?;
    noise.validate()?;
    if p_max == 0 {
        return Err(QaoaError::InvalidArgument("p_max must be >= 1".into()));
    }
    let sim = SymmetricSimulator::new(n)?;
    let mut opts = config.ascent_options();
    if let NoiseModel::Undertrain { iterations } = noise {
        opts.max_iterations = iterations;
    }
    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ NOISE_STREAM);

    let mut schedule = AngleSchedule::empty();
    let mut previous = sim.simulate(&schedule).magnitude_sq;
    let mut records = Vec::with_capacity(p_max);

    for depth in 1..=p_max {
        let frozen = sim.run(&schedule);
        let candidates: Vec<Candidate> = layer_starts(n, depth, config)
            .par_iter()
            .map(|x0| {
                let outcome = gradient_ascent(
                    |x| {
                        let layer = AngleSchedule::from_flat(x).expect("two angles");
                        sim.value_and_gradient_from(&frozen, &layer).expect("same n")
                    },
                    x0,
                    opts,
                );
                let canonical_norm = AngleSchedule::from_flat(&outcome.x)
                    .expect("two angles")
                    .canonicalized()
                    .norm();
                Candidate {
                    outcome,
                    canonical_norm,
                }
            })
            .collect();
        let best = &candidates[pick_best(&candidates)].outcome;
        schedule.push_layer(best.x[0], best.x[1]);
        records.push(LayerRecord {
            depth,
            schedule: schedule.clone(),
            magnitude_sq: best.value,
            improvement: best.value - previous,
            gradient_norm: best.gradient_norm,
            converged: best.converged,
        });
        previous = best.value;

        if let NoiseModel::PhaseNoise { sigma } = noise {
            if sigma > 0.0 && depth < p_max {
                let normal = Normal::new(0.0, sigma).expect("sigma validated");
                let gammas = schedule.gammas().iter().map(|g| g + normal.sample(&mut noise_rng)).collect();
                let betas = schedule.betas().iter().map(|b| b + normal.sample(&mut noise_rng)).collect();
                schedule = AngleSchedule::new(gammas, betas)?;
                previous = sim.simulate(&schedule).magnitude_sq;
            }
        }
    }

    let saturation = saturation_depth(&records, config.improvement_epsilon);
    Ok(TrainingTrace {
        n,
        records,
        saturation_depth: saturation,
    })
}
