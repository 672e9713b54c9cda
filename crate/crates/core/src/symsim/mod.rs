//! Exact QAOA simulation inside the `(n+1)`-dimensional permutation-symmetric
//! subspace.
//!
//! The initial state `|+⟩^{⊗n}`, the mixer `Σ_j X_j` and the projector onto
//! `|0…0⟩` are all invariant under qubit permutations, so the whole trajectory
//! lives in the span of the Dicke states `|D_0⟩ … |D_n⟩`. Amplitude `k` multiplies
//! the unit-norm Dicke state of Hamming weight `k`; the target `|0…0⟩` is `|D_0⟩`.

mod basis;
mod gradient;

use std::sync::Arc;

use num_complex::Complex64;

pub use basis::{MixerBasis, BASIS_HARD_CAP};
pub(crate) use basis::binomial;

use crate::error::{QaoaError, Result};
use crate::schedule::AngleSchedule;

/// Default upper bound on the qubit count for symmetric-subspace simulation.
pub const DEFAULT_MAX_QUBITS: usize = 30;

/// Permutation-symmetric `n`-qubit state in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DickeState {
    /// Wraps raw Dicke amplitudes, `amps.len() = n + 1`. The vector must be
    /// normalized to within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(QaoaError::InvalidArgument(
                "a Dicke state needs at least two amplitudes (n >= 1)".into(),
            ));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QaoaError::InvalidArgument(format!(
                "Dicke amplitudes not normalized: |ψ|² = {norm}"
            )));
        }
        Ok(Self {
            n: amps.len() - 1,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨0…0|ψ⟩`.
    pub fn target_amplitude(&self) -> Complex64 {
        self.amps[0]
    }
}

/// Dense `exp(-iβ Σ_j X_j)` restricted to the symmetric subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct MixerPropagator {
    n: usize,
    beta: f64,
    matrix: Vec<Complex64>,
}

impl MixerPropagator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Largest entry of `|M M† − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let v: Complex64 = (0..dim).map(|k| self.get(r, k) * self.get(c, k).conj()).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// Overlap `g_p = ⟨t|ψ_p⟩` together with `|g_p|²` and the `P⊥` energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub g: Complex64,
    pub magnitude_sq: f64,
    /// `⟨ψ|(1 − |t⟩⟨t|)|ψ⟩ = 1 − |g|²`.
    pub energy_pperp: f64,
}

impl OverlapResult {
    pub fn from_amplitude(g: Complex64) -> Self {
        let magnitude_sq = g.norm_sqr();
        Self {
            g,
            magnitude_sq,
            energy_pperp: 1.0 - magnitude_sq,
        }
    }
}

/// Symmetric-subspace simulator for a fixed qubit count.
///
/// Cheap to clone; the mixer basis is shared.
#[derive(Debug, Clone)]
pub struct SymmetricSimulator {
    n: usize,
    basis: Arc<MixerBasis>,
}

impl SymmetricSimulator {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_MAX_QUBITS)
    }

    pub fn with_cap(n: usize, max_qubits: usize) -> Result<Self> {
        check_qubits(n, max_qubits)?;
        Ok(Self {
            n,
            basis: MixerBasis::shared(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &MixerBasis {
        &self.basis
    }

    /// `|+⟩^{⊗n}`: `amps[k] = sqrt(C(n,k)) 2^{-n/2}`.
    pub fn initial_state(&self) -> DickeState {
        let n = self.n;
        let amps = (0..=n)
            .map(|k| {
                let ln = 0.5 * ((binomial(n, k) as f64).ln() - n as f64 * std::f64::consts::LN_2);
                Complex64::new(ln.exp(), 0.0)
            })
            .collect();
        DickeState { n, amps }
    }

    pub fn mixer(&self, beta: f64) -> MixerPropagator {
        MixerPropagator {
            n: self.n,
            beta,
            matrix: self.basis.propagator(beta),
        }
    }

    /// Final state of the circuit.
    pub fn run(&self, schedule: &AngleSchedule) -> DickeState {
        let mut state = self.initial_state();
        for (gamma, beta) in schedule.layers() {
            phase_target(&mut state.amps, gamma);
            self.basis.evolve(&mut state.amps, beta);
        }
        state
    }

    pub fn simulate(&self, schedule: &AngleSchedule) -> OverlapResult {
        OverlapResult::from_amplitude(self.run(schedule).target_amplitude())
    }

    /// `∂|g_p|²/∂γ_1..γ_p` followed by `∂|g_p|²/∂β_1..β_p`.
    pub fn gradient(&self, schedule: &AngleSchedule) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(schedule)?.1)
    }

    /// `|g_p|²` and its gradient in one forward/backward sweep.
    pub fn value_and_gradient(&self, schedule: &AngleSchedule) -> Result<(f64, Vec<f64>)> {
        if schedule.is_empty() {
            return Err(QaoaError::InvalidArgument(
                "gradient needs at least one layer".into(),
            ));
        }
        Ok(gradient::value_and_gradient(self, self.initial_state().amps(), schedule))
    }

    /// Runs `schedule` starting from `initial` instead of `|+⟩^{⊗n}`.
    pub fn run_from(&self, initial: &DickeState, schedule: &AngleSchedule) -> Result<DickeState> {
        self.check_state(initial)?;
        let mut state = initial.clone();
        for (gamma, beta) in schedule.layers() {
            phase_target(&mut state.amps, gamma);
            self.basis.evolve(&mut state.amps, beta);
        }
        Ok(state)
    }

    /// Value and gradient of `|⟨0…0|circuit|initial⟩|²` with respect to the
    /// angles of `schedule` only.
    pub fn value_and_gradient_from(
        &self,
        initial: &DickeState,
        schedule: &AngleSchedule,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_state(initial)?;
        if schedule.is_empty() {
            return Err(QaoaError::InvalidArgument(
                "gradient needs at least one layer".into(),
            ));
        }
        Ok(gradient::value_and_gradient(self, initial.amps(), schedule))
    }

    fn check_state(&self, state: &DickeState) -> Result<()> {
        if state.n != self.n {
            return Err(QaoaError::DimensionMismatch {
                expected: self.n + 1,
                got: state.n + 1,
            });
        }
        Ok(())
    }
}

fn check_qubits(n: usize, max_qubits: usize) -> Result<()> {
    if n == 0 {
        return Err(QaoaError::InvalidArgument("qubit count must be >= 1".into()));
    }
    if n > max_qubits {
        return Err(QaoaError::InvalidArgument(format!(
            "qubit count {n} exceeds configured maximum {max_qubits}"
        )));
    }
    Ok(())
}

fn phase_target(amps: &mut [Complex64], gamma: f64) {
    amps[0] *= Complex64::from_polar(1.0, -gamma);
}

/// `|+⟩^{⊗n}` in the Dicke basis.
pub fn dicke_init(n: usize) -> Result<DickeState> {
    check_qubits(n, DEFAULT_MAX_QUBITS)?;
    Ok(SymmetricSimulator::new(n)?.initial_state())
}

/// `exp(-iγ |0…0⟩⟨0…0|)`: phases amplitude 0 only.
pub fn apply_projector_phase(state: &DickeState, gamma: f64) -> DickeState {
    let mut out = state.clone();
    phase_target(&mut out.amps, gamma);
    out
}

/// `exp(-iβ Σ_j X_j)` on the symmetric subspace.
pub fn build_mixer(n: usize, beta: f64) -> Result<MixerPropagator> {
    Ok(SymmetricSimulator::new(n)?.mixer(beta))
}

pub fn apply_mixer(state: &DickeState, propagator: &MixerPropagator) -> Result<DickeState> {
    let dim = propagator.dim();
    if state.amps.len() != dim {
        return Err(QaoaError::DimensionMismatch {
            expected: dim,
            got: state.amps.len(),
        });
    }
    let amps = (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| propagator.get(r, c) * state.amps[c])
                .sum()
        })
        .collect();
    Ok(DickeState { n: state.n, amps })
}

/// Runs the circuit from `|+⟩^{⊗n}` and returns the overlap with `|0…0⟩`.
pub fn simulate(n: usize, schedule: &AngleSchedule) -> Result<OverlapResult> {
    Ok(SymmetricSimulator::new(n)?.simulate(schedule))
}

pub fn gradient(n: usize, schedule: &AngleSchedule) -> Result<Vec<f64>> {
    SymmetricSimulator::new(n)?.gradient(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(actual: &[Complex64], expected: &[Complex64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).norm() < tol, "{a} vs {e}");
        }
    }

    #[test]
    fn init_small_cases() {
        assert_amps(dicke_init(1).unwrap().amps(), &[c(FRAC_1_SQRT_2, 0.0); 2], 1e-15);
        assert_amps(
            dicke_init(2).unwrap().amps(),
            &[c(0.5, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.0)],
            1e-15,
        );
    }

    #[test]
    fn init_n8_binomial_sum() {
        let s = dicke_init(8).unwrap();
        let total: f64 = s.amps().iter().map(|a| a.re * a.re).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amps()[4].re, 70f64.sqrt() / 16.0, epsilon = 1e-15);
        assert!(s.amps().iter().all(|a| a.im == 0.0 && a.re >= 0.0));
    }

    #[test]
    fn init_rejects_bad_n() {
        assert!(matches!(dicke_init(0), Err(QaoaError::InvalidArgument(_))));
        assert!(matches!(dicke_init(31), Err(QaoaError::InvalidArgument(_))));
        assert!(SymmetricSimulator::with_cap(40, 40).is_ok());
    }

    #[test]
    fn projector_phase_examples() {
        let s = dicke_init(2).unwrap();
        assert_eq!(apply_projector_phase(&s, 0.0), s);
        let flipped = apply_projector_phase(&s, PI);
        assert_abs_diff_eq!(flipped.amps()[0].re, -0.5, epsilon = 1e-15);
        let quarter = apply_projector_phase(&s, PI / 2.0);
        assert_amps(
            quarter.amps(),
            &[c(0.0, -0.5), c(FRAC_1_SQRT_2, 0.0), c(0.5, 0.0)],
            1e-15,
        );
    }

    #[test]
    fn single_qubit_mixer_is_x_rotation() {
        for beta in [0.0, 0.3, 1.2, -2.0] {
            let m = build_mixer(1, beta).unwrap();
            let (cb, sb) = (beta.cos(), beta.sin());
            assert_amps(
                m.matrix(),
                &[c(cb, 0.0), c(0.0, -sb), c(0.0, -sb), c(cb, 0.0)],
                1e-15,
            );
        }
    }

    #[test]
    fn zero_angle_mixer_is_identity() {
        for n in [1, 4, 17] {
            let m = build_mixer(n, 0.0).unwrap();
            for r in 0..=n {
                for col in 0..=n {
                    let e = if r == col { 1.0 } else { 0.0 };
                    assert!((m.get(r, col) - e).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mixers_are_unitary() {
        for n in [1, 3, 10, 30] {
            for beta in [0.1, 0.77, 2.9] {
                assert!(build_mixer(n, beta).unwrap().unitarity_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn half_pi_mixer_flips_weight() {
        // exp(-iπ/2 Σ X) = (-i)^n X^{⊗n}, which sends D_k to D_{n-k}.
        for n in [1usize, 2, 5, 8] {
            let m = build_mixer(n, PI / 2.0).unwrap();
            let phase = Complex64::new(0.0, -1.0).powu(n as u32);
            for r in 0..=n {
                for col in 0..=n {
                    let e = if r + col == n { phase } else { c(0.0, 0.0) };
                    assert!((m.get(r, col) - e).norm() < 1e-12, "n={n} ({r},{col})");
                }
            }
        }
    }

    #[test]
    fn apply_mixer_examples() {
        let s1 = DickeState::from_amplitudes(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = apply_mixer(&s1, &build_mixer(1, PI / 2.0).unwrap()).unwrap();
        assert_amps(out.amps(), &[c(0.0, 0.0), c(0.0, -1.0)], 1e-15);

        let s = dicke_init(5).unwrap();
        assert_amps(apply_mixer(&s, &build_mixer(5, 0.0).unwrap()).unwrap().amps(), s.amps(), 1e-14);

        let err = apply_mixer(&s, &build_mixer(4, 0.3).unwrap()).unwrap_err();
        assert_eq!(err, QaoaError::DimensionMismatch { expected: 5, got: 6 });
    }

    #[test]
    fn plus_state_is_mixer_eigenvector() {
        for n in [1usize, 3, 9, 20] {
            let s = dicke_init(n).unwrap();
            for beta in [0.2, 1.1, 2.7] {
                let out = apply_mixer(&s, &build_mixer(n, beta).unwrap()).unwrap();
                let phase = Complex64::from_polar(1.0, -beta * n as f64);
                let expected: Vec<_> = s.amps().iter().map(|a| a * phase).collect();
                assert_amps(out.amps(), &expected, 1e-12);
            }
        }
    }

    #[test]
    fn empty_circuit_overlap() {
        for n in [1usize, 6, 30] {
            let r = simulate(n, &AngleSchedule::empty()).unwrap();
            assert_abs_diff_eq!(r.g.re, 2f64.powf(-(n as f64) / 2.0), epsilon = 1e-15);
            assert_abs_diff_eq!(r.g.im, 0.0);
            assert_abs_diff_eq!(r.energy_pperp, 1.0 - r.magnitude_sq);
        }
    }

    #[test]
    fn single_qubit_optimum_reaches_target() {
        let s = AngleSchedule::from_layers(&[(PI / 2.0, PI / 4.0)]).unwrap();
        assert_abs_diff_eq!(simulate(1, &s).unwrap().magnitude_sq, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(DickeState::from_amplitudes(vec![c(1.0, 0.0)]).is_err());
        assert!(DickeState::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn gradient_rejects_empty_schedule() {
        assert!(gradient(3, &AngleSchedule::empty()).is_err());
    }
}
