//! Spectral basis of the collective mixer inside the symmetric subspace.
//!
//! With `|D_k⟩` the unit Dicke state of Hamming weight `k`, the restriction of
//! `Σ_j X_j` is the tridiagonal matrix with `H[k][k+1] = sqrt((k+1)(n-k))`. Its
//! eigenvectors are the images of Dicke states under `H^{⊗n}` (Hadamard on every
//! qubit), which turns `Σ X_j` into `Σ Z_j`. The overlaps are Krawtchouk
//! polynomials:
//!
//! ```text
//! W[k][j] = ⟨D_k|H^{⊗n}|D_j⟩ = 2^{-n/2} sqrt(C(n,j) / C(n,k)) K_k(j; n)
//! K_k(j; n) = Σ_i (-1)^i C(j,i) C(n-j,k-i)
//! ```
//!
//! so `H_sym = W diag(n - 2j) W` with `W` real, symmetric and orthogonal.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{QaoaError, Result};

/// Largest qubit count for which binomials and Krawtchouk values stay exact in
/// 64-bit integers.
pub const BASIS_HARD_CAP: usize = 60;

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn krawtchouk(n: usize, k: usize, j: usize) -> i128 {
    (0..=k.min(j))
        .filter(|&i| k - i <= n - j)
        .map(|i| {
            let term = binomial(j, i) as i128 * binomial(n - j, k - i) as i128;
            if i % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Eigendecomposition of the symmetric-subspace mixer for a fixed `n`.
#[derive(Debug, Clone)]
pub struct MixerBasis {
    n: usize,
    /// Row-major `(n+1)×(n+1)`; column `j` is the eigenvector for `n - 2j`.
    vectors: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl MixerBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QaoaError::InvalidArgument("qubit count must be >= 1".into()));
        }
        if n > BASIS_HARD_CAP {
            return Err(QaoaError::ResourceLimit {
                what: "qubits",
                requested: n,
                cap: BASIS_HARD_CAP,
            });
        }
        let dim = n + 1;
        let binom: Vec<f64> = (0..dim).map(|k| binomial(n, k) as f64).collect();
        let scale = 2f64.powf(-(n as f64) / 2.0);
        let mut vectors = vec![0.0; dim * dim];
        for k in 0..dim {
            for j in k..dim {
                let w = scale * (binom[j] / binom[k]).sqrt() * krawtchouk(n, k, j) as f64;
                vectors[k * dim + j] = w;
                vectors[j * dim + k] = w;
            }
        }
        let eigenvalues = (0..dim).map(|j| n as f64 - 2.0 * j as f64).collect();
        Ok(Self {
            n,
            vectors,
            eigenvalues,
        })
    }

    /// Process-wide cached basis for `n`.
    pub fn shared(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<MixerBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(b) = cache.read().expect("basis cache poisoned").get(&n) {
            return Ok(Arc::clone(b));
        }
        let basis = Arc::new(Self::new(n)?);
        let mut guard = cache.write().expect("basis cache poisoned");
        Ok(Arc::clone(guard.entry(n).or_insert(basis)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector matrix entry `W[row][col]`.
    pub fn vector(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.dim() + col]
    }

    /// Off-diagonal element `H_sym[k][k+1]`.
    pub fn hopping(&self, k: usize) -> f64 {
        (((k + 1) * (self.n - k)) as f64).sqrt()
    }

    fn transform(&self, input: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.vectors[k * dim..(k + 1) * dim];
            *o = row.iter().zip(input).map(|(w, a)| a * *w).sum();
        }
    }

    /// `amps ← exp(-iβ H_sym) amps`.
    pub fn evolve(&self, amps: &mut [Complex64], beta: f64) {
        debug_assert_eq!(amps.len(), self.dim());
        let mut spectral = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.transform(amps, &mut spectral);
        for (s, lambda) in spectral.iter_mut().zip(&self.eigenvalues) {
            *s *= Complex64::from_polar(1.0, -beta * lambda);
        }
        self.transform(&spectral, amps);
    }

    /// `out ← H_sym amps`.
    pub fn apply_hamiltonian(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        for k in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            if k > 0 {
                acc += amps[k - 1] * self.hopping(k - 1);
            }
            if k + 1 < dim {
                acc += amps[k + 1] * self.hopping(k);
            }
            out[k] = acc;
        }
    }

    /// Dense `exp(-iβ H_sym)`, row-major.
    pub fn propagator(&self, beta: f64) -> Vec<Complex64> {
        let dim = self.dim();
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|l| Complex64::from_polar(1.0, -beta * l))
            .collect();
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in r..dim {
                let v: Complex64 = (0..dim)
                    .map(|j| phases[j] * (self.vector(r, j) * self.vector(c, j)))
                    .sum();
                m[r * dim + c] = v;
                m[c * dim + r] = v;
            }
        }
        m
    }
}
