//! Closed forms for the single-layer circuit, its stationarity conditions, the
//! optimal-β equation and the depth recursion.
//!
//! All single-layer formulas assume the target `|0…0⟩`; the overlap does not
//! depend on the target.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{QaoaError, Result};
use crate::schedule::wrap_angle;

/// `cos^m β`; falls back to log space with an explicit sign when the direct
/// power leaves the normal range.
pub fn cos_pow(beta: f64, m: u32) -> f64 {
    let c = beta.cos();
    let direct = c.powi(m as i32);
    if m == 0 || c == 0.0 || direct.abs() >= f64::MIN_POSITIVE {
        return direct;
    }
    let sign = if c < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    sign * (m as f64 * c.abs().ln()).exp()
}

fn half_pow2(n: usize) -> f64 {
    2f64.powf(-(n as f64) / 2.0)
}

/// `|g_1(γ, β)|² = 2^{-n}[1 + 2cosⁿβ(cos(γ − nβ) − cos nβ) + 2cos^{2n}β(1 − cos γ)]`.
pub fn overlap_sq_p1(n: usize, gamma: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let cn = cos_pow(beta, n as u32);
    let bracket = 1.0
        + 2.0 * cn * ((gamma - nf * beta).cos() - (nf * beta).cos())
        + 2.0 * cn * cn * (1.0 - gamma.cos());
    bracket * 2f64.powi(-(n as i32))
}

/// `g_1(γ, β) = 2^{-n/2}[e^{-iγ}cosⁿβ + (e^{-iβn} − cosⁿβ)]`.
pub fn overlap_complex_p1(n: usize, gamma: f64, beta: f64) -> Complex64 {
    let cn = cos_pow(beta, n as u32);
    let g = Complex64::from_polar(cn, -gamma) + Complex64::from_polar(1.0, -beta * n as f64) - cn;
    g * half_pow2(n)
}

/// `|g_1|²` on the line `γ = π − 2β`:
/// `2^{-n}[1 + 4cos^{n+1}β(cos^{n+1}β − cos((n+1)β))]`.
pub fn overlap_sq_on_line(n: usize, beta: f64) -> f64 {
    let c1 = cos_pow(beta, n as u32 + 1);
    let bracket = 1.0 + 4.0 * c1 * (c1 - ((n as f64 + 1.0) * beta).cos());
    bracket * 2f64.powi(-(n as i32))
}

/// `sin((n+2)β) − sin(2β)cosⁿβ`; its roots are the stationary β on the line.
///
/// The product on the right is formed in log space so it stays meaningful for
/// very large `n`.
pub fn beta_equation_residual(n: usize, beta: f64) -> f64 {
    let lhs = ((n as f64 + 2.0) * beta).sin();
    let s = (2.0 * beta).sin();
    let c = beta.cos();
    if s == 0.0 || (c == 0.0 && n > 0) {
        return lhs;
    }
    let negative = (s < 0.0) ^ (c < 0.0 && n % 2 == 1);
    let magnitude = (s.abs().ln() + n as f64 * c.abs().ln()).exp();
    lhs - if negative { -magnitude } else { magnitude }
}

/// Leading-order `|g|²` on root branch `k`, with `β ≈ kπ/(n+2)`:
/// `2^{-n}[1 + 4cos^{n+2}(kπ/(n+2))(cosⁿ(kπ/(n+2)) − (−1)^k)]`.
pub fn branch_overlap_leading(n: usize, k: u32) -> f64 {
    let x = k as f64 * PI / (n as f64 + 2.0);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let bracket = 1.0 + 4.0 * cos_pow(x, n as u32 + 2) * (cos_pow(x, n as u32) - sign);
    bracket * 2f64.powi(-(n as i32))
}

/// Commutator amplitude `A = ⟨+|[P, H_x] e^{iβH_x}|0⟩ = −n cos^{n−1}β e^{−iβ} / 2^{n/2}`.
pub fn commutator_amplitude(n: usize, beta: f64) -> Complex64 {
    let mag = -(n as f64) * cos_pow(beta, n as u32 - 1) * half_pow2(n);
    Complex64::from_polar(mag, -beta)
}

/// Bisection on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(QaoaError::SolverFailure(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo}, {f_hi})"
        )));
    }
    // 200 halvings exhaust any f64 interval.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const ROOT_TOL: f64 = 1e-14;

/// Stationary single-layer angles on the line `γ = π − 2β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Solution {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub magnitude_sq: f64,
    /// Root family, `β ≈ kπ/(n+2)`.
    pub branch_k: u32,
}

/// Root of the β equation on branch `k`, searched in
/// `((k − ½)π/(n+2), (k + ½)π/(n+2))`.
pub fn solve_p1_branch(n: usize, k: u32) -> Result<P1Solution> {
    if n == 0 {
        return Err(QaoaError::InvalidArgument("qubit count must be >= 1".into()));
    }
    if k == 0 {
        return Err(QaoaError::InvalidArgument("branch index must be >= 1".into()));
    }
    let unit = PI / (n as f64 + 2.0);
    let lo = (k as f64 - 0.5) * unit;
    let hi = (k as f64 + 0.5) * unit;
    let beta = bisect(|b| beta_equation_residual(n, b), lo, hi, ROOT_TOL).map_err(|e| {
        QaoaError::SolverFailure(format!("n = {n}, branch {k}: {e}"))
    })?;
    Ok(P1Solution {
        n,
        beta,
        gamma: PI - 2.0 * beta,
        magnitude_sq: overlap_sq_on_line(n, beta),
        branch_k: k,
    })
}

/// Optimal single-layer angles: the `k = 1` root of the β equation.
pub fn solve_optimal_p1(n: usize) -> Result<P1Solution> {
    solve_p1_branch(n, 1)
}

/// Large-`n` expansion `β = π/n − 4π/n²`, `γ = π − 2π/n + 8π/n²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticAngles {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
}

/// Minimum `n` for which the expansion is offered.
pub const ASYMPTOTIC_MIN_N: usize = 5;

pub fn asymptotic_angles(n: usize) -> Result<AsymptoticAngles> {
    if n < ASYMPTOTIC_MIN_N {
        return Err(QaoaError::InvalidArgument(format!(
            "asymptotic angles need n >= {ASYMPTOTIC_MIN_N}, got {n}"
        )));
    }
    let nf = n as f64;
    let beta = PI / nf - 4.0 * PI / (nf * nf);
    Ok(AsymptoticAngles {
        n,
        beta,
        gamma: PI - 2.0 * beta,
    })
}

/// Degenerate points excluded from the stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathology {
    /// `sin(γ/2) = 0`: the problem phase is trivial.
    TrivialPhase,
    /// `cos β = 0`: the commutator amplitude vanishes.
    MixerNode,
    /// `g = 0`.
    ZeroOverlap,
}

/// Residuals of the single-layer stationarity conditions `arg g = −γ` and
/// `arg A = (γ + π)/2`, both wrapped to `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stationarity {
    Regular { r_gamma: f64, r_beta: f64 },
    Pathological(Pathology),
}

impl Stationarity {
    pub fn residuals(&self) -> Option<(f64, f64)> {
        match *self {
            Stationarity::Regular { r_gamma, r_beta } => Some((r_gamma, r_beta)),
            Stationarity::Pathological(_) => None,
        }
    }
}

const PATHOLOGY_TOL: f64 = 1e-12;

pub fn stationarity_residuals(n: usize, gamma: f64, beta: f64) -> Stationarity {
    if (gamma / 2.0).sin().abs() < PATHOLOGY_TOL {
        return Stationarity::Pathological(Pathology::TrivialPhase);
    }
    if beta.cos().abs() < PATHOLOGY_TOL {
        return Stationarity::Pathological(Pathology::MixerNode);
    }
    let g = overlap_complex_p1(n, gamma, beta);
    if g.norm() < PATHOLOGY_TOL {
        return Stationarity::Pathological(Pathology::ZeroOverlap);
    }
    Stationarity::Regular {
        r_gamma: wrap_angle(g.arg() + gamma),
        r_beta: wrap_angle((PI - beta) - (gamma + PI) / 2.0),
    }
}

/// `g_0` followed by a mixer of angle `b`: `2^{-n/2} e^{−ibn}`.
pub fn base_overlap(n: usize, b: f64) -> Complex64 {
    Complex64::from_polar(half_pow2(n), -b * n as f64)
}

/// One step of the depth recursion
///
/// ```text
/// g_{p+1}(γ, β, γ', β') = g_p(γ, β̃) + g_p(γ, β) cosⁿβ' (e^{−iγ'} − 1)
/// ```
///
/// where `β̃` is `β` with the final mixer angle advanced by `β'` (the two
/// adjacent mixers merge). `g_eval` evaluates `g_p` for angle vectors of length
/// `p`. For `p = 0` the shifted term is [`base_overlap`].
pub fn recursion_step<F>(
    n: usize,
    g_eval: F,
    gammas: &[f64],
    betas: &[f64],
    gamma_new: f64,
    beta_new: f64,
) -> Result<Complex64>
where
    F: Fn(&[f64], &[f64]) -> Complex64,
{
    if gammas.len() != betas.len() {
        return Err(QaoaError::DimensionMismatch {
            expected: gammas.len(),
            got: betas.len(),
        });
    }
    let unshifted = g_eval(gammas, betas);
    let shifted = match betas.split_last() {
        None => base_overlap(n, beta_new),
        Some((last, head)) => {
            let mut tilde = head.to_vec();
            tilde.push(last + beta_new);
            g_eval(gammas, &tilde)
        }
    };
    let kick = Complex64::from_polar(1.0, -gamma_new) - 1.0;
    Ok(shifted + unshifted * cos_pow(beta_new, n as u32) * kick)
}

/// `g_p` built entirely from the recursion and the `p = 0` base case.
pub fn recursive_overlap(n: usize, gammas: &[f64], betas: &[f64]) -> Result<Complex64> {
    if gammas.len() != betas.len() {
        return Err(QaoaError::DimensionMismatch {
            expected: gammas.len(),
            got: betas.len(),
        });
    }
    Ok(trailing_mixer_overlap(n, gammas, betas, 0.0))
}

// ⟨0|U(b)|ψ_p⟩
fn trailing_mixer_overlap(n: usize, gammas: &[f64], betas: &[f64], b: f64) -> Complex64 {
    match (gammas.split_last(), betas.split_last()) {
        (Some((&g_last, g_head)), Some((&b_last, b_head))) => {
            let merged = b_last + b;
            let kick = Complex64::from_polar(1.0, -g_last) - 1.0;
            trailing_mixer_overlap(n, g_head, b_head, merged)
                + kick * cos_pow(merged, n as u32) * trailing_mixer_overlap(n, g_head, b_head, 0.0)
        }
        _ => base_overlap(n, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn overlap_sq_trivial_points() {
        for n in [1usize, 3, 10] {
            let base = 2f64.powi(-(n as i32));
            for beta in [0.0, 0.4, 2.2] {
                assert_abs_diff_eq!(overlap_sq_p1(n, 0.0, beta), base, epsilon = 1e-15);
            }
            for gamma in [0.3, 1.9, 3.0] {
                assert_abs_diff_eq!(overlap_sq_p1(n, gamma, PI / 2.0), base, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn overlap_complex_trivial_points() {
        let n = 7;
        let beta = 0.37;
        let g = overlap_complex_p1(n, 0.0, beta);
        let expected = Complex64::from_polar(2f64.powf(-3.5), -beta * 7.0);
        assert!((g - expected).norm() < 1e-15);
        let g = overlap_complex_p1(n, 1.1, 0.0);
        let expected = Complex64::from_polar(2f64.powf(-3.5), -1.1);
        assert!((g - expected).norm() < 1e-15);
    }

    #[test]
    fn line_formula_examples() {
        assert_abs_diff_eq!(overlap_sq_on_line(6, 0.0), 2f64.powi(-6), epsilon = 1e-16);
        assert_abs_diff_eq!(overlap_sq_on_line(1, FRAC_PI_4), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn line_formula_is_restriction_of_general_formula() {
        for n in 1..=20usize {
            for i in 0..50 {
                let beta = -1.0 + 0.083 * i as f64;
                let a = overlap_sq_on_line(n, beta);
                let b = overlap_sq_p1(n, PI - 2.0 * beta, beta);
                assert!((a - b).abs() < 1e-14, "n={n} beta={beta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn beta_equation_examples() {
        assert_eq!(beta_equation_residual(5, 0.0), 0.0);
        assert!(beta_equation_residual(1, FRAC_PI_4).abs() < 1e-15);
        let r = beta_equation_residual(9, 0.3);
        let direct = (11.0 * 0.3f64).sin() - (0.6f64).sin() * 0.3f64.cos().powi(9);
        assert_abs_diff_eq!(r, direct, epsilon = 1e-15);
        // odd power of a negative cosine
        let r = beta_equation_residual(3, 2.0);
        let direct = (10.0f64).sin() - (4.0f64).sin() * 2.0f64.cos().powi(3);
        assert_abs_diff_eq!(r, direct, epsilon = 1e-15);
    }

    #[test]
    fn cos_pow_log_space_branch() {
        let beta = 1.5f64;
        let m = 400;
        let direct = beta.cos().powi(m);
        assert!(direct.abs() < f64::MIN_POSITIVE);
        let v = cos_pow(beta, m as u32);
        assert!((0.0..f64::MIN_POSITIVE).contains(&v));
        assert_eq!(cos_pow(2.0, 3), 2.0f64.cos().powi(3));
    }

    #[test]
    fn single_qubit_solution() {
        let s = solve_optimal_p1(1).unwrap();
        assert_abs_diff_eq!(s.beta, FRAC_PI_4, epsilon = 1e-14);
        assert_abs_diff_eq!(s.gamma, PI / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.magnitude_sq, 1.0, epsilon = 1e-14);
        assert_eq!(s.branch_k, 1);
    }

    #[test]
    fn solver_root_is_tight() {
        for n in [2usize, 8, 24, 64, 300] {
            let s = solve_optimal_p1(n).unwrap();
            assert!(beta_equation_residual(n, s.beta).abs() < 1e-12, "n={n}");
            assert!(s.beta > 0.0 && s.beta < PI / 2.0);
            assert_eq!(s.gamma, PI - 2.0 * s.beta);
        }
    }

    #[test]
    fn solver_rejects_bad_input() {
        assert!(matches!(solve_optimal_p1(0), Err(QaoaError::InvalidArgument(_))));
        assert!(matches!(solve_p1_branch(8, 0), Err(QaoaError::InvalidArgument(_))));
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(QaoaError::SolverFailure(_))
        ));
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn asymptotic_angles_arithmetic() {
        let a = asymptotic_angles(10).unwrap();
        assert_abs_diff_eq!(a.beta, 0.06 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(a.gamma, PI - 2.0 * PI / 10.0 + 8.0 * PI / 100.0, epsilon = 1e-15);
        assert!(asymptotic_angles(4).is_err());
        let big = asymptotic_angles(1_000_000).unwrap();
        assert!(big.beta < 1e-5);
        assert_abs_diff_eq!(big.beta * 1e6, PI, epsilon = 1e-4);
        assert_abs_diff_eq!(big.gamma, PI, epsilon = 1e-5);
    }

    #[test]
    fn stationarity_on_line_and_off() {
        let (_, r_beta) = stationarity_residuals(6, PI - 1.0, 0.5).residuals().unwrap();
        assert_eq!(r_beta, 0.0);
        let (r_gamma, _) = stationarity_residuals(6, 0.5, 0.5).residuals().unwrap();
        assert!(r_gamma.abs() > 1e-3);
    }

    #[test]
    fn stationarity_flags_pathologies() {
        assert_eq!(
            stationarity_residuals(4, 0.0, 0.3),
            Stationarity::Pathological(Pathology::TrivialPhase)
        );
        assert_eq!(
            stationarity_residuals(4, 1.0, PI / 2.0),
            Stationarity::Pathological(Pathology::MixerNode)
        );
        // n = 1: e^{-iγ}cosβ = i sinβ cancels e^{-iβ} - cosβ at β = π/4, γ = 3π/2.
        assert_eq!(
            stationarity_residuals(1, 1.5 * PI, FRAC_PI_4),
            Stationarity::Pathological(Pathology::ZeroOverlap)
        );
    }

    #[test]
    fn commutator_amplitude_argument() {
        for n in [2usize, 5, 11] {
            for beta in [0.1, 0.7, 1.3] {
                let a = commutator_amplitude(n, beta);
                assert_abs_diff_eq!(wrap_angle(a.arg() - (PI - beta)), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn recursion_base_case_reproduces_closed_form() {
        let n = 5;
        let (gamma, beta) = (0.8, 0.45);
        let g = recursion_step(n, |_, _| base_overlap(n, 0.0), &[], &[], gamma, beta).unwrap();
        assert!((g - overlap_complex_p1(n, gamma, beta)).norm() < 1e-15);
    }

    #[test]
    fn recursion_with_zero_gamma_is_a_mixer_shift() {
        let n = 6;
        let eval = |g: &[f64], b: &[f64]| recursive_overlap(n, g, b).unwrap();
        let g = recursion_step(n, eval, &[0.4, 1.2], &[0.3, 0.9], 0.0, 0.25).unwrap();
        let shifted = recursive_overlap(n, &[0.4, 1.2], &[0.3, 1.15]).unwrap();
        assert!((g - shifted).norm() < 1e-15);
    }

    #[test]
    fn branch_leading_overlap_prefers_smallest_odd_k() {
        for n in [20usize, 40] {
            let v1 = branch_overlap_leading(n, 1);
            let v3 = branch_overlap_leading(n, 3);
            let v2 = branch_overlap_leading(n, 2);
            assert!(v1 > v3 && v1 > v2);
        }
    }
}
