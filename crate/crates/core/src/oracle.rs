//! Brute-force `2^n` statevector simulation in the computational basis.
//!
//! Ground truth for the symmetric-subspace simulator, and the only backend that
//! handles targets other than `|0…0⟩`. Qubit `j` is bit `j` of the basis index.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QaoaError, Result};
use crate::schedule::AngleSchedule;
use crate::symsim::{binomial, DickeState, OverlapResult};

/// Default qubit cap for the statevector oracle.
pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Computational-basis target `|t_1 … t_n⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetSpec {
    bits: Vec<bool>,
}

impl TargetSpec {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![false; n])
    }

    /// Target whose basis index is `index` (bit `j` of the index is qubit `j`).
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        if n < usize::BITS as usize && index >> n != 0 {
            return Err(QaoaError::InvalidArgument(format!(
                "target index {index} out of range for {n} qubits"
            )));
        }
        Ok(Self::new((0..n).map(|j| index >> j & 1 == 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| 1usize << j)
            .sum()
    }
}

impl FromStr for TargetSpec {
    type Err = QaoaError;

    /// Parses `"0110"`; the first character is qubit 0.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QaoaError::InvalidArgument(format!(
                    "bad target character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Full `n`-qubit state, `amps.len() = 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|+⟩^{⊗n}`.
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            n,
            amps: vec![a; dim],
        }
    }

    /// Computational basis state with the given index.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(QaoaError::InvalidArgument(format!(
                "statevector length {} is not 2^n with n >= 1",
                amps.len()
            )));
        }
        Ok(Self {
            n: amps.len().trailing_zeros() as usize,
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

    /// `exp(-iγ |t⟩⟨t|)`.
    pub fn apply_target_phase(&mut self, target_index: usize, gamma: f64) {
        self.amps[target_index] *= Complex64::from_polar(1.0, -gamma);
    }

    /// `exp(-iβ Σ_j X_j)` as `n` single-qubit rotations.
    pub fn apply_mixer(&mut self, beta: f64) {
        let (c, s) = (beta.cos(), beta.sin());
        let cos = Complex64::new(c, 0.0);
        let misin = Complex64::new(0.0, -s);
        for j in 0..self.n {
            let stride = 1usize << j;
            for block in (0..self.amps.len()).step_by(stride << 1) {
                for i in block..block + stride {
                    let a = self.amps[i];
                    let b = self.amps[i + stride];
                    self.amps[i] = cos * a + misin * b;
                    self.amps[i + stride] = misin * a + cos * b;
                }
            }
        }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(QaoaError::InvalidArgument("qubit count must be >= 1".into()));
    }
    if n > cap {
        return Err(QaoaError::ResourceLimit {
            what: "oracle qubits",
            requested: n,
            cap,
        });
    }
    Ok(())
}

/// Final statevector of the circuit with problem projector `|t⟩⟨t|`.
pub fn run_statevector(n: usize, schedule: &AngleSchedule, target: &TargetSpec) -> Result<StateVector> {
    run_statevector_with_cap(n, schedule, target, DEFAULT_ORACLE_CAP)
}

pub fn run_statevector_with_cap(
    n: usize,
    schedule: &AngleSchedule,
    target: &TargetSpec,
    cap: usize,
) -> Result<StateVector> {
    check_cap(n, cap)?;
    if target.len() != n {
        return Err(QaoaError::DimensionMismatch {
            expected: n,
            got: target.len(),
        });
    }
    let idx = target.index();
    let mut psi = StateVector::plus(n);
    for (gamma, beta) in schedule.layers() {
        psi.apply_target_phase(idx, gamma);
        psi.apply_mixer(beta);
    }
    Ok(psi)
}

/// `⟨t|ψ_p⟩` by brute force.
pub fn statevector_overlap(n: usize, schedule: &AngleSchedule, target: &TargetSpec) -> Result<OverlapResult> {
    statevector_overlap_with_cap(n, schedule, target, DEFAULT_ORACLE_CAP)
}

pub fn statevector_overlap_with_cap(
    n: usize,
    schedule: &AngleSchedule,
    target: &TargetSpec,
    cap: usize,
) -> Result<OverlapResult> {
    let psi = run_statevector_with_cap(n, schedule, target, cap)?;
    Ok(OverlapResult::from_amplitude(psi.amps[target.index()]))
}

/// Symmetric-subspace component of a statevector and the norm of what is left.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricProjection {
    /// `⟨D_k|ψ⟩`, not renormalized.
    pub amps: Vec<Complex64>,
    /// `‖ψ − Σ_k ⟨D_k|ψ⟩ |D_k⟩‖`.
    pub residual_norm: f64,
}

impl SymmetricProjection {
    /// Renormalized symmetric component as a [`DickeState`].
    pub fn to_state(&self) -> Result<DickeState> {
        let norm = self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QaoaError::InvalidArgument(
                "state has no symmetric component".into(),
            ));
        }
        DickeState::from_amplitudes(self.amps.iter().map(|a| a / norm).collect())
    }
}

pub fn project_to_dicke(state: &StateVector) -> SymmetricProjection {
    let n = state.n;
    let mut sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for (x, a) in state.amps.iter().enumerate() {
        sums[x.count_ones() as usize] += a;
    }
    let amps: Vec<Complex64> = sums
        .iter()
        .enumerate()
        .map(|(k, s)| s / (binomial(n, k) as f64).sqrt())
        .collect();
    // The symmetric component has entry ⟨D_k|ψ⟩/sqrt(C(n,k)) on every x of weight k.
    let residual_sq: f64 = state
        .amps
        .iter()
        .enumerate()
        .map(|(x, a)| {
            let k = x.count_ones() as usize;
            (a - amps[k] / (binomial(n, k) as f64).sqrt()).norm_sqr()
        })
        .sum();
    SymmetricProjection {
        amps,
        residual_norm: residual_sq.sqrt(),
    }
}

/// `⟨D_r| exp(-iβ Σ X_j) |D_c⟩` from the full-space mixer.
pub fn mixer_restriction(n: usize, beta: f64) -> Result<Vec<Complex64>> {
    check_cap(n, DEFAULT_ORACLE_CAP)?;
    let dim = n + 1;
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let norm = (binomial(n, col) as f64).sqrt().recip();
        let amps = (0..1usize << n)
            .map(|x| {
                if x.count_ones() as usize == col {
                    Complex64::new(norm, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let mut psi = StateVector { n, amps };
        psi.apply_mixer(beta);
        let proj = project_to_dicke(&psi);
        for row in 0..dim {
            m[row * dim + col] = proj.amps[row];
        }
    }
    Ok(m)
}
