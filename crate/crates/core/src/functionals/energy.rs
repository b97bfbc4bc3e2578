use crate::dynamics::{dudt, State, SystemParams};
use crate::error::{invalid, Result};
use crate::operators::yosida_op;
use crate::spectral::{abs_sq, h1_norm, Field};

/// `‖u‖₂²`.
pub fn charge(state: &State) -> f64 {
    state.u.norm_sq()
}

fn grad_sq(f: &Field) -> f64 {
    f.weighted_norm_sq(|l| l)
}

fn inv_grad_sq(f: &Field) -> f64 {
    f.weighted_norm_sq(|l| 1.0 / l)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return invalid(format!("ε must lie in [0, 1], got {eps}"));
    }
    Ok(())
}

/// Quadratic part `‖∇u‖₂² + ½(‖v‖₂² + ‖(-Δ)^{-1/2}∂t v‖₂² + ε‖∂t v‖₂²)`, which is
/// also the left side of the ε-uniform bound.
pub fn quadratic_energy(state: &State, eps: f64) -> f64 {
    grad_sq(&state.u)
        + 0.5 * (state.v.norm_sq() + inv_grad_sq(&state.vt) + eps * state.vt.norm_sq())
}

/// Conserved energy `E_ε = quadratic part + (v | |u|²)`; `ε = 1` is the
/// improved-Boussinesq energy. The coupling uses one dealiased product and a
/// coefficient-space inner product.
pub fn energy(state: &State, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let rho = abs_sq(&state.u, true)?;
    Ok(quadratic_energy(state, eps) + state.v.inner(&rho)?.re)
}

/// Energy of the Yosida-regularized system, with coupling `(J_n v | |J_n u|²)`.
pub fn energy_regularized(state: &State, eps: f64, n: u64) -> Result<f64> {
    check_eps(eps)?;
    let j = yosida_op(n, state.grid())?;
    let rho = abs_sq(&j.apply(&state.u)?, true)?;
    Ok(quadratic_energy(state, eps) + j.apply(&state.v)?.inner(&rho)?.re)
}

/// Which modified energy to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModifiedEnergyForm {
    /// `‖∂t u‖² + ½(‖∇v‖² + ‖∂t v‖² + ε‖∇∂t v‖²) + ‖φ‖²`.
    Epsilon,
    /// `‖∂t u‖² + ½(‖∇v‖² + ‖∇∂t v‖² + ‖∂t v‖²)`, used for regularized runs.
    Regularized,
}

/// Modified energy controlling the `H² ⊕ H¹ ⊕ H¹` norm; `∂t u` comes from [`dudt`].
pub fn modified_energy(
    state: &State,
    eps: f64,
    params: &SystemParams,
    phi_l2: f64,
    form: ModifiedEnergyForm,
) -> Result<f64> {
    check_eps(eps)?;
    let ut = dudt(state, params)?;
    let base = ut.norm_sq() + 0.5 * (grad_sq(&state.v) + state.vt.norm_sq());
    Ok(match form {
        ModifiedEnergyForm::Epsilon => base + 0.5 * eps * grad_sq(&state.vt) + phi_l2 * phi_l2,
        ModifiedEnergyForm::Regularized => base + 0.5 * grad_sq(&state.vt),
    })
}

/// `‖u_a − u_b‖_{H¹} + ‖v_a − v_b‖₂ + ‖(-Δ)^{-1/2}(∂t v_a − ∂t v_b)‖₂`.
pub fn difference_metric(a: &State, b: &State) -> Result<f64> {
    let scale = 1.0_f64.max(a.t.abs()).max(b.t.abs());
    if (a.t - b.t).abs() > 1e-9 * scale {
        return invalid(format!("states at different times {} and {}", a.t, b.t));
    }
    let du = a.u.sub(&b.u)?;
    let dv = a.v.sub(&b.v)?;
    let dvt = a.vt.sub(&b.vt)?;
    Ok(h1_norm(&du) + dv.norm_sq().sqrt() + inv_grad_sq(&dvt).sqrt())
}

/// `H¹ ⊕ L² ⊕ L²` distance (used for the Yosida sweep).
pub fn h1_l2_l2_distance(a: &State, b: &State) -> Result<f64> {
    let du = a.u.sub(&b.u)?;
    let dv = a.v.sub(&b.v)?;
    let dvt = a.vt.sub(&b.vt)?;
    Ok((h1_norm(&du).powi(2) + dv.norm_sq() + dvt.norm_sq()).sqrt())
}

/// `H² ⊕ H¹ ⊕ H¹` size of a state, reported for the boundedness check.
pub fn h2_h1_h1_norm(state: &State) -> f64 {
    let h2u = state.u.weighted_norm_sq(|l| 1.0 + l + l * l);
    let h1v = state.v.weighted_norm_sq(|l| 1.0 + l);
    let h1vt = state.vt.weighted_norm_sq(|l| 1.0 + l);
    (h2u + h1v + h1vt).sqrt()
}

/// Norms of the initial data entering the envelope constants.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct DataNorms {
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub phi_l2: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub phi_grad: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub phi_lap: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub psi0_l2: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub psi0_grad: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub psi1_l2: f64,
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub psi1_grad: f64,
    /// `‖(-Δ)^{-1/2} ψ₁‖₂`.
    #[serde(deserialize_with = "crate::serde_nan::f64_or_nan")]
    pub psi1_inv_grad: f64,
}

impl DataNorms {
    pub fn from_state(data: &State) -> Self {
        Self {
            phi_l2: data.u.norm_sq().sqrt(),
            phi_grad: grad_sq(&data.u).sqrt(),
            phi_lap: data.u.weighted_norm_sq(|l| l * l).sqrt(),
            psi0_l2: data.v.norm_sq().sqrt(),
            psi0_grad: grad_sq(&data.v).sqrt(),
            psi1_l2: data.vt.norm_sq().sqrt(),
            psi1_grad: grad_sq(&data.vt).sqrt(),
            psi1_inv_grad: inv_grad_sq(&data.vt).sqrt(),
        }
    }

    pub fn is_valid(&self) -> bool {
        [
            self.phi_l2,
            self.phi_grad,
            self.phi_lap,
            self.psi0_l2,
            self.psi0_grad,
            self.psi1_l2,
            self.psi1_grad,
            self.psi1_inv_grad,
        ]
        .iter()
        .all(|x| x.is_finite() && *x >= 0.0)
    }
}
