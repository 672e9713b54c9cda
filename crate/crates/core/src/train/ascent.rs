//! Local maximization with Armijo backtracking.
//!
//! Two search directions are available: limited-memory BFGS (the default) and
//! plain steepest ascent with Barzilai–Borwein trial steps. Either way the
//! trial step is halved until the sufficient-increase test passes. Near
//! convergence the predicted increase drops below the rounding level of the
//! objective, so the test tolerates a few ulps of `|f|`.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AscentMethod {
    /// Two-loop L-BFGS direction with the given number of correction pairs.
    Lbfgs { memory: usize },
    /// Raw gradient direction, BB1/BB2 alternating trial steps.
    Steepest,
}

impl Default for AscentMethod {
    fn default() -> Self {
        AscentMethod::Lbfgs { memory: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub method: AscentMethod,
    /// Upper bound on the Euclidean length of a single step.
    pub max_step_length: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-10,
            method: AscentMethod::default(),
            max_step_length: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
const MAX_STEP: f64 = 1e6;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Curvature pairs of `-f` (the minimization view), newest last.
struct History {
    capacity: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl History {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy.is_nan() || sy <= 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Ascent direction `H ∇f` from the two-loop recursion.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let scale = match self.pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / dot(grad, grad).sqrt().max(f64::MIN_POSITIVE),
        };
        q.iter_mut().for_each(|v| *v *= scale);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += si * (a - b));
        }
        q.iter().map(|v| -v).collect()
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }
}

/// Maximizes `objective`, which returns the value and gradient at a point.
pub fn gradient_ascent<F>(mut objective: F, x0: &[f64], opts: AscentOptions) -> AscentOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    let mut gnorm = dot(&g, &g).sqrt();
    let mut iterations = 0;

    let memory = match opts.method {
        AscentMethod::Lbfgs { memory } => memory.max(1),
        AscentMethod::Steepest => 1,
    };
    let mut history = History::new(memory);
    let mut bb_step = 1.0;

    while iterations < opts.max_iterations && gnorm >= opts.gradient_tolerance {
        let (direction, mut step) = match opts.method {
            AscentMethod::Lbfgs { .. } => (history.direction(&g), 1.0),
            AscentMethod::Steepest => {
                if let Some((s, y, _)) = history.pairs.back() {
                    let sy = dot(s, y);
                    let bb = if iterations % 2 == 0 {
                        dot(s, s) / sy
                    } else {
                        sy / dot(y, y)
                    };
                    if bb.is_finite() && bb > 0.0 {
                        bb_step = bb.clamp(MIN_STEP, MAX_STEP);
                    }
                }
                (g.clone(), bb_step)
            }
        };
        let mut slope = dot(&direction, &g);
        let direction = if slope > 0.0 {
            direction
        } else {
            history.clear();
            slope = gnorm * gnorm;
            step = 1.0 / gnorm.max(f64::MIN_POSITIVE);
            g.clone()
        };

        let dnorm = dot(&direction, &direction).sqrt();
        if step * dnorm > opts.max_step_length {
            step = opts.max_step_length / dnorm;
        }

        let slack = 8.0 * f64::EPSILON * f.abs().max(f64::MIN_POSITIVE);
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = objective(&trial);
            if ft.is_finite() && ft >= f + ARMIJO_C * step * slope - slack {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((trial, ft, gt)) = accepted else {
            if history.pairs.is_empty() {
                break;
            }
            // Stale curvature; retry once along the raw gradient.
            history.clear();
            continue;
        };
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        if s.iter().all(|d| *d == 0.0) {
            break;
        }
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| b - a).collect();
        history.push(s, y);
        x = trial;
        f = ft;
        g = gt;
        gnorm = dot(&g, &g).sqrt();
    }

    AscentOutcome {
        x,
        value: f,
        gradient_norm: gnorm,
        iterations,
        converged: gnorm < opts.gradient_tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(v: &[f64]) -> (f64, Vec<f64>) {
        // f = -(x-1)² - 10(y+2)²
        let (x, y) = (v[0], v[1]);
        (
            -(x - 1.0).powi(2) - 10.0 * (y + 2.0).powi(2),
            vec![-2.0 * (x - 1.0), -20.0 * (y + 2.0)],
        )
    }

    fn both_methods() -> [AscentOptions; 2] {
        [
            AscentOptions::default(),
            AscentOptions {
                method: AscentMethod::Steepest,
                ..Default::default()
            },
        ]
    }

    #[test]
    fn concave_quadratic() {
        for opts in both_methods() {
            let out = gradient_ascent(quadratic, &[5.0, 5.0], opts);
            assert!(out.converged, "{opts:?}");
            assert!((out.x[0] - 1.0).abs() < 1e-9 && (out.x[1] + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ill_conditioned_trig() {
        // f = cos(x) + cos(30 y), maxima on the lattice (2πk, 2πm/30)
        for opts in both_methods() {
            let out = gradient_ascent(
                |v| {
                    (
                        v[0].cos() + (30.0 * v[1]).cos(),
                        vec![-v[0].sin(), -30.0 * (30.0 * v[1]).sin()],
                    )
                },
                &[0.7, 0.02],
                opts,
            );
            assert!(out.converged, "{out:?}");
            assert!((out.value - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn never_decreases_the_objective() {
        let start = [3.0, -7.0];
        let f0 = quadratic(&start).0;
        for opts in both_methods() {
            let out = gradient_ascent(quadratic, &start, AscentOptions { max_iterations: 3, ..opts });
            assert!(out.value >= f0);
        }
    }

    #[test]
    fn step_length_is_capped() {
        let opts = AscentOptions {
            max_iterations: 1,
            max_step_length: 0.25,
            ..Default::default()
        };
        let out = gradient_ascent(|v| (v[0], vec![1.0]), &[0.0], opts);
        assert!((out.x[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn respects_iteration_cap() {
        let out = gradient_ascent(
            |v| (-(v[0] - 3.0).powi(2), vec![-2.0 * (v[0] - 3.0)]),
            &[0.0],
            AscentOptions {
                max_iterations: 0,
                ..Default::default()
            },
        );
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0]);
        assert!(!out.converged);
    }

    #[test]
    fn stationary_start_is_kept() {
        let out = gradient_ascent(|v| (v[0].cos(), vec![-v[0].sin()]), &[0.0], Default::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }
}
