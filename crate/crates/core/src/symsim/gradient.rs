//! Adjoint gradient of `|g_p|²`.
//!
//! With `χ_k = V(γ_k) φ_{k-1}` the state right after the phase of layer `k`, and
//! `c_kᵀ = ⟨0|U_p V_p ⋯ U_{k+1} V_{k+1} U_k` the back-propagated bra, the overlap
//! factors as `g = c_kᵀ χ_k` for every `k`, so
//!
//! ```text
//! ∂g/∂γ_k = -i c_k[0] χ_k[0]
//! ∂g/∂β_k = -i c_kᵀ H_sym χ_k
//! ```
//!
//! The mixer is complex-symmetric, so `c_{k-1} = U_{k-1} (V_k c_k)` without any
//! transposes.

use num_complex::Complex64;

use super::SymmetricSimulator;
use crate::schedule::AngleSchedule;

pub(super) fn value_and_gradient(
    sim: &SymmetricSimulator,
    initial: &[Complex64],
    schedule: &AngleSchedule,
) -> (f64, Vec<f64>) {
    let basis = sim.basis();
    let p = schedule.depth();
    let dim = basis.dim();
    let minus_i = Complex64::new(0.0, -1.0);

    let mut chis: Vec<Vec<Complex64>> = Vec::with_capacity(p);
    let mut state = initial.to_vec();
    for (gamma, beta) in schedule.layers() {
        state[0] *= Complex64::from_polar(1.0, -gamma);
        chis.push(state.clone());
        basis.evolve(&mut state, beta);
    }
    let g = state[0];

    let mut grad = vec![0.0; 2 * p];
    let mut bra = vec![Complex64::new(0.0, 0.0); dim];
    bra[0] = Complex64::new(1.0, 0.0);
    basis.evolve(&mut bra, schedule.betas()[p - 1]);

    let mut h_chi = vec![Complex64::new(0.0, 0.0); dim];
    for k in (0..p).rev() {
        let chi = &chis[k];
        let dg_gamma = minus_i * bra[0] * chi[0];
        basis.apply_hamiltonian(chi, &mut h_chi);
        let dg_beta = minus_i * bra.iter().zip(&h_chi).map(|(b, h)| b * h).sum::<Complex64>();
        grad[k] = 2.0 * (g.conj() * dg_gamma).re;
        grad[p + k] = 2.0 * (g.conj() * dg_beta).re;
        if k > 0 {
            bra[0] *= Complex64::from_polar(1.0, -schedule.gammas()[k]);
            basis.evolve(&mut bra, schedule.betas()[k - 1]);
        }
    }
    (g.norm_sqr(), grad)
}
