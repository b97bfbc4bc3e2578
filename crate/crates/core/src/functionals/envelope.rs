use std::f64::consts::SQRT_2;

use super::energy::{quadratic_energy, DataNorms};
use crate::dynamics::State;

/// Constants of the a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnvelopeConstants {
    /// Sharp Gagliardo–Nirenberg constant `‖u‖₄² ≤ C₀‖u‖₂‖∇u‖₂`.
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub c0: f64,
    /// Prefactor of the exponential `H¹ ⊕ L² ⊕ L²` envelope.
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub c3: f64,
    /// Time-independent bound under `‖φ‖₂ < √2/C₀`; `None` when that fails.
    pub c6: Option<f64>,
    /// Constants of the `L^∞`/`H²` inequalities, report-only when given.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

impl EnvelopeConstants {
    pub fn smallness_holds(&self, dn: &DataNorms) -> bool {
        smallness_holds(self.c0, dn)
    }
}

/// `‖φ‖₂ < √2 / C₀`.
pub fn smallness_holds(c0: f64, dn: &DataNorms) -> bool {
    c0 * dn.phi_l2 < SQRT_2
}

/// `√2 / C₀`, the admissible charge radius.
pub fn smallness_threshold(c0: f64) -> f64 {
    SQRT_2 / c0
}

pub fn envelope_constants(dn: &DataNorms, c0: f64) -> EnvelopeConstants {
    let c3 = 2.0 * dn.phi_grad.powi(2)
        + dn.psi0_l2.powi(2)
        + dn.psi1_l2.powi(2)
        + dn.psi1_inv_grad.powi(2)
        + c0 * dn.psi0_l2 * dn.phi_l2 * dn.phi_grad
        + c0 * c0 * dn.phi_l2.powi(2) * dn.psi0_l2.powi(2);
    let c6 = smallness_holds(c0, dn).then(|| {
        let inner = dn.phi_grad.powi(2)
            + 0.5 * (dn.psi0_l2.powi(2) + dn.psi1_l2.powi(2) + dn.psi1_inv_grad.powi(2))
            + c0 * dn.phi_l2 * dn.phi_grad * dn.psi0_l2;
        inner / (1.0 - c0 * dn.phi_l2 / SQRT_2)
    });
    EnvelopeConstants {
        c0,
        c3,
        c6,
        c1: None,
        c2: None,
    }
}

/// `C₃ exp(C₀² ‖φ‖₂² t)`.
pub fn envelope_h1(t: f64, ec: &EnvelopeConstants, dn: &DataNorms) -> f64 {
    ec.c3 * (ec.c0 * ec.c0 * dn.phi_l2 * dn.phi_l2 * t).exp()
}

pub fn envelope_small(ec: &EnvelopeConstants) -> Option<f64> {
    ec.c6
}

/// `‖∇u‖² + ‖v‖² + ‖∂t v‖² + ‖(-Δ)^{-1/2}∂t v‖²`, bounded by [`envelope_h1`].
pub fn envelope_h1_lhs(state: &State) -> f64 {
    state.u.weighted_norm_sq(|l| l)
        + state.v.norm_sq()
        + state.vt.weighted_norm_sq(|l| 1.0 + 1.0 / l)
}

/// Left side of the ε-uniform bound, dominated by [`envelope_small`].
pub fn envelope_small_lhs(state: &State, eps: f64) -> f64 {
    quadratic_energy(state, eps)
}
