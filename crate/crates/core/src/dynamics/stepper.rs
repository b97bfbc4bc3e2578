//! Second-order splitting: half wave substep, full Schrödinger substep, half wave substep.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::state::{State, SystemParams};
use crate::error::Result;
use crate::operators::{omega, schrodinger_propagator, yosida_op, DiagonalOperator};
use crate::spectral::{abs_sq, product_collocated, Field, Grid2D, Kind};

/// Per-mode coefficients of the exact ion-sound flow over one time span.
#[derive(Debug, Clone)]
struct WaveKernel {
    cos: Array2<f64>,
    sinc: Array2<f64>,
    wsin: Array2<f64>,
}

impl WaveKernel {
    fn new(grid: &Grid2D, eps: f64, dt: f64) -> Self {
        let w = grid.eigenvalues().mapv(|l| omega(eps, l));
        Self {
            cos: w.mapv(|w| (dt * w).cos()),
            sinc: w.mapv(|w| (dt * w).sin() / w),
            wsin: w.mapv(|w| w * (dt * w).sin()),
        }
    }

    fn apply(&self, v: &Field, vt: &Field, f: &Field) -> Result<(Field, Field)> {
        let grid = v.grid();
        let (v0, vt0, f0) = (real(v), real(vt), real(f));
        let y = v0 + f0;
        let v1 = &y * &self.cos + &(vt0 * &self.sinc) - f0;
        let vt1 = vt0 * &self.cos - &(&y * &self.wsin);
        Ok((Field::from_real(grid, v1)?, Field::from_real(grid, vt1)?))
    }
}

fn real(f: &Field) -> &Array2<f64> {
    f.real_coeffs().expect("ion-sound fields are real")
}

/// Exact solution of `∂t² v = -ω_ε² (v + f)` with `f` frozen, over `dt` (any sign).
pub fn wave_substep(v: &Field, vt: &Field, f: &Field, dt: f64, eps: f64) -> Result<(Field, Field)> {
    v.check_same_grid(vt)?;
    v.check_same_grid(f)?;
    crate::operators::omega_op(eps, v.grid())?;
    WaveKernel::new(v.grid(), eps, dt).apply(&v.re(), &vt.re(), &f.re())
}

/// Multiply nodal values of `u` by `exp(-i dt v)`: the exact flow of `i ∂t u = v u`
/// for real `v` in collocation form. Unitary.
fn potential_phase(u: &Field, v: &Field, dt: f64) -> Result<Field> {
    u.check_same_grid(v)?;
    let mut su = u.synthesize();
    let sv = v.synthesize();
    Zip::from(&mut su)
        .and(&sv)
        .for_each(|z, &p| *z *= Complex64::from_polar(1.0, -dt * p.re));
    Field::analyze(&su, u.grid()).map(|f| f.to_complex())
}

/// `U(dt/2) Φ U(dt/2) u` with `Φ` the nodal phase `exp(-i dt v)`.
pub fn schrodinger_substep(u: &Field, v_frozen: &Field, dt: f64) -> Result<Field> {
    let half = schrodinger_propagator(0.5 * dt, u.grid());
    let w = half.apply(u)?;
    let w = potential_phase(&w, &v_frozen.re(), dt)?;
    half.apply(&w)
}

/// Operators reused across steps of constant size.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: SystemParams,
    grid: Arc<Grid2D>,
    dt: f64,
    half_wave: WaveKernel,
    half_schrodinger: DiagonalOperator,
    yosida: Option<DiagonalOperator>,
}

impl Stepper {
    pub fn new(grid: &Arc<Grid2D>, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        Self::with_dt(grid, params, params.dt)
    }

    /// Stepper for an arbitrary (possibly negative) step.
    pub fn with_dt(grid: &Arc<Grid2D>, params: &SystemParams, dt: f64) -> Result<Self> {
        let yosida = params.yosida_n.map(|n| yosida_op(n, grid)).transpose()?;
        crate::operators::omega_op(params.eps, grid)?;
        Ok(Self {
            params: params.clone(),
            grid: grid.clone(),
            dt,
            half_wave: WaveKernel::new(grid, params.eps, 0.5 * dt),
            half_schrodinger: schrodinger_propagator(0.5 * dt, grid),
            yosida,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Frozen `|u|²` forcing of the ion-sound equation.
    pub fn source(&self, u: &Field) -> Result<Field> {
        source_term(u, &self.params, self.yosida.as_ref())
    }

    pub fn step(&self, state: &State) -> Result<State> {
        if **state.grid() != *self.grid {
            return Err(crate::Error::GridMismatch("state and stepper grids differ".into()));
        }
        let f0 = self.source(&state.u)?;
        let (v_half, vt_half) = self.half_wave.apply(&state.v, &state.vt, &f0)?;
        let u1 = self.schrodinger(&state.u, &v_half)?;
        let f1 = self.source(&u1)?;
        let (v1, vt1) = self.half_wave.apply(&v_half, &vt_half, &f1)?;
        Ok(State {
            t: state.t + self.dt,
            u: u1,
            v: v1,
            vt: vt1,
        })
    }

    fn schrodinger(&self, u: &Field, v: &Field) -> Result<Field> {
        let w = self.half_schrodinger.apply(u)?;
        let w = if !self.params.coupled {
            w
        } else if let Some(j) = &self.yosida {
            regularized_potential_flow(&w, v, j, self.dt)?
        } else {
            potential_phase(&w, v, self.dt)?
        };
        self.half_schrodinger.apply(&w)
    }
}

fn source_term(u: &Field, params: &SystemParams, yosida: Option<&DiagonalOperator>) -> Result<Field> {
    if !params.coupled {
        return Ok(Field::zeros(u.grid(), Kind::Real));
    }
    match yosida {
        Some(j) => j.apply(&abs_sq(&j.apply(u)?, params.dealias)?),
        None => abs_sq(u, params.dealias),
    }
}

/// `J (Jv · Ju)` with the product taken at the collocation nodes, matching the
/// nodal phase used by the splitting. Without regularization this is `vu`.
pub(crate) fn potential_term(v: &Field, u: &Field, yosida: Option<&DiagonalOperator>) -> Result<Field> {
    match yosida {
        Some(j) => j.apply(&product_collocated(&j.apply(v)?, &j.apply(u)?)?),
        None => product_collocated(v, u),
    }
}

/// `exp(-i dt A) u` for the Hermitian `A u = J(Jv · Ju)`, summed as a Taylor
/// series until the terms fall below round-off.
fn regularized_potential_flow(u: &Field, v: &Field, j: &DiagonalOperator, dt: f64) -> Result<Field> {
    let jv = j.apply(v)?;
    let mut sum = u.clone();
    let mut term = u.clone();
    let scale = sum.norm_sq().sqrt();
    if scale == 0.0 {
        return Ok(sum);
    }
    for k in 1..=60 {
        let a = j.apply(&product_collocated(&jv, &j.apply(&term)?)?)?;
        term = a.scale_complex(Complex64::new(0.0, -dt / k as f64));
        sum = sum.axpy(1.0, &term)?;
        if term.norm_sq().sqrt() <= 1e-17 * scale {
            break;
        }
    }
    Ok(sum)
}

/// One splitting step of size `params.dt`.
pub fn strang_step(state: &State, params: &SystemParams) -> Result<State> {
    Stepper::new(state.grid(), params)?.step(state)
}

/// One splitting step of arbitrary signed size; negative `dt` runs the scheme backwards.
pub fn strang_step_by(state: &State, params: &SystemParams, dt: f64) -> Result<State> {
    Stepper::with_dt(state.grid(), params, dt)?.step(state)
}

/// `∂t u = i(Δu − P(v, u))` of the semi-discrete system advanced by the splitting,
/// with `P(v, u) = J(Jv · Ju)` (or `vu` without regularization).
pub fn dudt(state: &State, params: &SystemParams) -> Result<Field> {
    let lap = DiagonalOperator::from_fn(state.grid(), "Δ", |l| -l);
    let mut rhs = lap.apply(&state.u)?;
    if params.coupled {
        let j = params.yosida_n.map(|n| yosida_op(n, state.grid())).transpose()?;
        rhs = rhs.sub(&potential_term(&state.v, &state.u, j.as_ref())?)?;
    }
    Ok(rhs.scale_complex(Complex64::new(0.0, 1.0)))
}

/// Right-hand side pieces for the Duhamel solver: `P(v, u)` and the `|u|²` source.
pub(crate) fn nonlinear_terms(
    u: &Field,
    v: &Field,
    params: &SystemParams,
    yosida: Option<&DiagonalOperator>,
) -> Result<(Field, Field)> {
    if !params.coupled {
        return Ok((Field::zeros(u.grid(), Kind::Complex), Field::zeros(u.grid(), Kind::Real)));
    }
    Ok((potential_term(v, u, yosida)?, source_term(u, params, yosida)?))
}
