use super::stepper::Stepper;
use super::state::{State, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::functionals::{
    charge, energy, energy_regularized, envelope_h1, envelope_h1_lhs, envelope_small,
    envelope_small_lhs, gn_quotient, modified_energy, DataNorms, EnvelopeConstants,
    ModifiedEnergyForm,
};

/// Quantities recorded at one monitor sample (one `series.csv` row).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub charge: f64,
    /// `E_ε`, or the regularized energy for Yosida runs.
    pub energy_eps: f64,
    pub modified_energy: f64,
    /// Full `H¹` norm of `u`.
    pub h1_u: f64,
    /// Full `H²` norm of `u`.
    pub h2_u: f64,
    pub l2_v: f64,
    pub h1_v: f64,
    pub l2_vt: f64,
    /// `‖(-Δ)^{-1/2} ∂t v‖₂`.
    pub hm_half_vt: f64,
    /// `None` when `u = 0`.
    pub gn_quotient: Option<f64>,
    pub envelope_h1: f64,
    pub envelope_small: Option<f64>,
    pub envelope_h1_lhs: f64,
    pub envelope_small_lhs: f64,
}

/// Data-dependent constants needed to evaluate [`Diagnostics`].
#[derive(Debug, Clone)]
pub struct MonitorContext {
    pub data: DataNorms,
    pub constants: EnvelopeConstants,
}

impl MonitorContext {
    pub fn new(data: DataNorms, constants: EnvelopeConstants) -> Self {
        Self { data, constants }
    }

    pub fn diagnostics(&self, state: &State, params: &SystemParams) -> Result<Diagnostics> {
        let eps = params.eps;
        let (energy_eps, form) = match params.yosida_n {
            Some(n) => (energy_regularized(state, eps, n)?, ModifiedEnergyForm::Regularized),
            None => (energy(state, eps)?, ModifiedEnergyForm::Epsilon),
        };
        let h = |f: &crate::spectral::Field, w: fn(f64) -> f64| f.weighted_norm_sq(w).sqrt();
        Ok(Diagnostics {
            t: state.t,
            charge: charge(state),
            energy_eps,
            modified_energy: modified_energy(state, eps, params, self.data.phi_l2, form)?,
            h1_u: h(&state.u, |l| 1.0 + l),
            h2_u: h(&state.u, |l| 1.0 + l + l * l),
            l2_v: state.v.norm_sq().sqrt(),
            h1_v: h(&state.v, |l| 1.0 + l),
            l2_vt: state.vt.norm_sq().sqrt(),
            hm_half_vt: h(&state.vt, |l| 1.0 / l),
            gn_quotient: if state.u.is_zero() {
                None
            } else {
                Some(gn_quotient(&state.u)?)
            },
            envelope_h1: envelope_h1(state.t, &self.constants, &self.data),
            envelope_small: envelope_small(&self.constants),
            envelope_h1_lhs: envelope_h1_lhs(state),
            envelope_small_lhs: envelope_small_lhs(state, eps),
        })
    }
}

/// Samples of one run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
    /// States at every sample when requested, else empty.
    pub states: Vec<State>,
    pub final_state: State,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrateOptions {
    /// Keep the full state at every monitor sample.
    pub keep_states: bool,
    /// Skip functional evaluation (diagnostics stays empty).
    pub skip_diagnostics: bool,
}

/// Advance `state0` to `t_final` with constant steps, shortening the last one to
/// land on `t_final`, and sample every `monitor_stride` steps (and at the end).
pub fn integrate(
    state0: &State,
    t_final: f64,
    params: &SystemParams,
    monitor_stride: usize,
    ctx: &MonitorContext,
) -> Result<TrajectoryRecord> {
    integrate_with(state0, t_final, params, monitor_stride, ctx, IntegrateOptions::default())
}

pub fn integrate_with(
    state0: &State,
    t_final: f64,
    params: &SystemParams,
    monitor_stride: usize,
    ctx: &MonitorContext,
    opts: IntegrateOptions,
) -> Result<TrajectoryRecord> {
    let mut times = Vec::new();
    let mut diagnostics = Vec::new();
    let mut states = Vec::new();
    let (final_state, steps) = integrate_observed(
        state0,
        t_final,
        params,
        monitor_stride,
        ctx,
        opts,
        |s, d| {
            times.push(s.t);
            diagnostics.extend(d.cloned());
            if opts.keep_states {
                states.push(s.clone());
            }
            Ok(())
        },
    )?;
    Ok(TrajectoryRecord {
        times,
        diagnostics,
        states,
        final_state,
        steps,
    })
}

/// Streaming form of [`integrate_with`]: `observer` sees every sample as it is
/// produced (diagnostics are `None` when skipped). Returns the final state and
/// the number of steps taken.
pub fn integrate_observed(
    state0: &State,
    t_final: f64,
    params: &SystemParams,
    monitor_stride: usize,
    ctx: &MonitorContext,
    opts: IntegrateOptions,
    mut observer: impl FnMut(&State, Option<&Diagnostics>) -> Result<()>,
) -> Result<(State, usize)> {
    params.validate()?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return invalid(format!("horizon must be positive, got {t_final}"));
    }
    if monitor_stride == 0 {
        return invalid("monitor stride must be at least 1");
    }
    let grid = state0.grid().clone();
    let dt = params.dt;
    let full_steps = ((t_final / dt) * (1.0 + 1e-12)).floor() as usize;
    let remainder = t_final - full_steps as f64 * dt;
    let tail = (remainder > 1e-12 * t_final).then_some(remainder);
    let total_steps = full_steps + usize::from(tail.is_some());

    let stepper = Stepper::new(&grid, params)?;
    let t0 = state0.t;
    let mut sample = |s: &State| -> Result<()> {
        if opts.skip_diagnostics {
            observer(s, None)
        } else {
            let d = ctx.diagnostics(s, params)?;
            observer(s, Some(&d))
        }
    };

    let mut state = state0.clone();
    sample(&state)?;
    for step in 1..=total_steps {
        let last_t = state.t;
        state = if step <= full_steps {
            let mut s = stepper.step(&state)?;
            s.t = t0 + step as f64 * dt;
            s
        } else {
            let r = tail.unwrap_or(0.0);
            let mut s = Stepper::with_dt(&grid, params, r)?.step(&state)?;
            s.t = t0 + t_final;
            s
        };
        if !state.is_finite() {
            return Err(Error::NumericalAbort {
                t: state.t,
                last_finite_t: last_t,
            });
        }
        if step % monitor_stride == 0 || step == total_steps {
            sample(&state)?;
        }
    }
    Ok((state, total_steps))
}
