//! Circuit angle schedules.

use std::f64::consts::PI;

use crate::error::{QaoaError, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Ordered layer angles `(γ_k, β_k)`, `k = 1..p`, applied first layer first.
///
/// Raw values may be any reals. Use [`AngleSchedule::canonicalized`] to map them
/// into `γ ∈ [0, 2π)`, `β ∈ [0, π)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngleSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(QaoaError::DimensionMismatch {
                expected: gammas.len(),
                got: betas.len(),
            });
        }
        if gammas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(QaoaError::InvalidArgument(
                "schedule angles must be finite".into(),
            ));
        }
        Ok(Self { gammas, betas })
    }

    /// The empty (p = 0) circuit.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a schedule from layer pairs `(γ_k, β_k)`.
    pub fn from_layers(layers: &[(f64, f64)]) -> Result<Self> {
        let (gammas, betas) = layers.iter().copied().unzip();
        Self::new(gammas, betas)
    }

    /// Builds a schedule from the flat layout `[γ_1..γ_p, β_1..β_p]`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(QaoaError::InvalidArgument(format!(
                "flat parameter vector must have even length, got {}",
                flat.len()
            )));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    /// Same layout as [`AngleSchedule::from_flat`] and the gradient.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Angles of layer `k` (zero-based).
    pub fn layer(&self, k: usize) -> (f64, f64) {
        (self.gammas[k], self.betas[k])
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.betas.iter().copied())
    }

    pub fn push_layer(&mut self, gamma: f64, beta: f64) {
        self.gammas.push(gamma);
        self.betas.push(beta);
    }

    /// Schedule with one more layer appended.
    pub fn with_layer(&self, gamma: f64, beta: f64) -> Self {
        let mut out = self.clone();
        out.push_layer(gamma, beta);
        out
    }

    /// First `p` layers.
    pub fn truncated(&self, p: usize) -> Self {
        Self {
            gammas: self.gammas[..p].to_vec(),
            betas: self.betas[..p].to_vec(),
        }
    }

    /// Maps every angle into `γ ∈ [0, 2π)`, `β ∈ [0, π)`.
    ///
    /// Shifting β by π multiplies the overlap by the global phase `(-1)^n`, so
    /// `|g_p|` is unchanged.
    pub fn canonicalized(&self) -> Self {
        Self {
            gammas: self.gammas.iter().map(|g| canonical(g.rem_euclid(TWO_PI), TWO_PI)).collect(),
            betas: self.betas.iter().map(|b| canonical(b.rem_euclid(PI), PI)).collect(),
        }
    }

    /// Applies `(γ, β) → (2π − γ, π − β)` to every layer. The overlap maps to
    /// `(−1)^{np} g*`.
    pub fn inverted(&self) -> Self {
        Self {
            gammas: self.gammas.iter().map(|g| TWO_PI - g).collect(),
            betas: self.betas.iter().map(|b| PI - b).collect(),
        }
    }

    /// Euclidean norm of the flat parameter vector.
    pub fn norm(&self) -> f64 {
        self.gammas
            .iter()
            .chain(&self.betas)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// `wrap(γ_k + 2β_k − π)` for layer `k`; zero on the line `γ = π − 2β`.
    pub fn line_defect(&self, k: usize) -> f64 {
        let (g, b) = self.layer(k);
        wrap_angle(g + 2.0 * b - PI)
    }
}

// rem_euclid can round up to the modulus itself for tiny negative inputs.
fn canonical(x: f64, modulus: f64) -> f64 {
    if x >= modulus {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(matches!(
            AngleSchedule::new(vec![0.1, 0.2], vec![0.3]),
            Err(QaoaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn flat_layout_is_gammas_then_betas() {
        let s = AngleSchedule::from_layers(&[(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(s.to_flat(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(AngleSchedule::from_flat(&s.to_flat()).unwrap(), s);
        assert!(AngleSchedule::from_flat(&[1.0]).is_err());
    }

    #[test]
    fn canonical_ranges() {
        let s = AngleSchedule::from_layers(&[(-0.5, -0.25), (7.0, 4.0), (-1e-18, -1e-18)]).unwrap();
        let c = s.canonicalized();
        for (g, b) in c.layers() {
            assert!((0.0..TWO_PI).contains(&g));
            assert!((0.0..PI).contains(&b));
        }
        assert!((c.gammas()[0] - (TWO_PI - 0.5)).abs() < 1e-15);
        assert!((c.betas()[1] - (4.0 - PI)).abs() < 1e-15);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn line_defect_is_zero_on_line_and_flips_under_inversion() {
        let s = AngleSchedule::from_layers(&[(PI - 0.6, 0.3), (1.0, 0.4)]).unwrap();
        assert!(s.line_defect(0).abs() < 1e-15);
        let d = s.line_defect(1);
        assert!((s.inverted().line_defect(1) + d).abs() < 1e-14);
    }
}
