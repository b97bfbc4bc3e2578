//! C ABI over `sib-core`.
//!
//! Every entry point returns a [`SibStatus`]; on failure a description is kept
//! per thread and can be read with [`sib_last_error_message`]. Simulations are
//! opaque handles created by `sib_simulation_new*` and released with
//! [`sib_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sib_core::dynamics::{MonitorContext, State, Stepper, SystemParams};
use sib_core::experiments::{
    build_data, cmd_check, cmd_estimate_c0, cmd_order_test, cmd_run, cmd_sweep_eps, cmd_sweep_n,
    RunConfig,
};
use sib_core::functionals::{envelope_constants, estimate_gn_constant, DataNorms};
use sib_core::spectral::Grid2D;
use sib_core::Error;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SibStatus {
    SibOk = 0,
    SibErrNullPointer = 1,
    SibErrInvalidArgument = 2,
    SibErrGridMismatch = 3,
    SibErrNumericalAbort = 4,
    SibErrNoConvergence = 5,
    SibErrConfig = 6,
    SibErrIo = 7,
    SibErrBufferTooSmall = 8,
    SibErrPanic = 9,
}

/// Which field of the state to copy out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SibField {
    /// Complex envelope, interleaved real and imaginary parts.
    SibFieldU = 0,
    SibFieldV = 1,
    SibFieldVt = 2,
}

/// Scalar diagnostics at the current time; unavailable entries are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SibDiagnostics {
    pub t: f64,
    pub charge: f64,
    pub energy_eps: f64,
    pub modified_energy: f64,
    pub h1_u: f64,
    pub h2_u: f64,
    pub l2_v: f64,
    pub h1_v: f64,
    pub l2_vt: f64,
    pub hm_half_vt: f64,
    pub gn_quotient: f64,
    pub envelope_h1: f64,
    pub envelope_small: f64,
}

/// Opaque simulation handle.
pub struct SibSimulation {
    stepper: Stepper,
    params: SystemParams,
    state: State,
    monitor: MonitorContext,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> SibStatus {
    match e {
        Error::InvalidArgument(_) => SibStatus::SibErrInvalidArgument,
        Error::GridMismatch(_) => SibStatus::SibErrGridMismatch,
        Error::NumericalAbort { .. } => SibStatus::SibErrNumericalAbort,
        Error::NoConvergence { .. } => SibStatus::SibErrNoConvergence,
        Error::Config(_) => SibStatus::SibErrConfig,
        Error::Io(_) | Error::Json(_) => SibStatus::SibErrIo,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SibStatus, String)>) -> SibStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SibStatus::SibOk
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SibStatus::SibErrPanic
        }
    }
}

fn core<T>(r: sib_core::Result<T>) -> Result<T, (SibStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SibStatus, String) {
    (SibStatus::SibErrNullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SibStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SibStatus::SibErrInvalidArgument, format!("{what} is not UTF-8")))
}

/// Length in bytes of the last error message of this thread, excluding the terminator.
#[no_mangle]
pub extern "C" fn sib_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copy the last error message into `buf` (NUL-terminated, truncated to `len`).
/// Returns the number of bytes written excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sib_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sib_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn new_simulation(config: &RunConfig, c0: f64) -> sib_core::Result<SibSimulation> {
    let r = config.resolve()?;
    let (_, data) = build_data(config, &r)?;
    let params = SystemParams {
        eps: r.eps,
        yosida_n: config.system.yosida_n,
        dt: r.dt,
        dealias: config.system.dealias,
        coupled: config.system.coupled && config.data.preset != sib_core::experiments::Preset::Linear,
    };
    params.validate()?;
    let state = match params.yosida_n {
        Some(n) if config.data.regularize => data.regularized(n)?,
        _ => data,
    };
    let c0 = r.c0.unwrap_or(c0);
    let dn = DataNorms::from_state(&state);
    let monitor = MonitorContext::new(dn, envelope_constants(&dn, c0));
    Ok(SibSimulation {
        stepper: Stepper::new(state.grid(), &params)?,
        params,
        state,
        monitor,
    })
}

/// Create a simulation of the standard data `φ = ψ₀ = sin(πx/lx) sin(πy/ly)`,
/// `ψ₁ = 0`. `yosida_n = 0` runs the unregularized system; `c0` enters the
/// envelope diagnostics only.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_new(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    eps: f64,
    dt: f64,
    yosida_n: u64,
    c0: f64,
    out: *mut *mut SibSimulation,
) -> SibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut config = RunConfig::default();
        config.grid.lx = lx.into();
        config.grid.ly = ly.into();
        config.grid.nx = nx;
        config.grid.ny = ny;
        config.system.eps = eps.into();
        config.system.dt = dt.into();
        config.system.yosida_n = (yosida_n > 0).then_some(yosida_n);
        let sim = core(new_simulation(&config, c0))?;
        *out = Box::into_raw(Box::new(sim));
        Ok(())
    })
}

/// Create a simulation from a TOML configuration document.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_new_from_config(
    config_toml: *const c_char,
    c0: f64,
    out: *mut *mut SibSimulation,
) -> SibStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(config_toml, "config_toml")?;
        let config = core(RunConfig::from_toml(text))?;
        let sim = core(new_simulation(&config, c0))?;
        *out = Box::into_raw(Box::new(sim));
        Ok(())
    })
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `sim` must come from `sib_simulation_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_free(sim: *mut SibSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance by `steps` splitting steps of the configured size.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_step(sim: *mut SibSimulation, steps: u64) -> SibStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        for _ in 0..steps {
            let last = sim.state.t;
            let next = core(sim.stepper.step(&sim.state))?;
            if !next.is_finite() {
                let e = Error::NumericalAbort {
                    t: next.t,
                    last_finite_t: last,
                };
                return Err((status_of(&e), e.to_string()));
            }
            sim.state = next;
        }
        Ok(())
    })
}

/// Current simulation time.
///
/// # Safety
/// `sim` must be a live handle and `t` writable.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_time(sim: *const SibSimulation, t: *mut f64) -> SibStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let t = t.as_mut().ok_or_else(|| null("t"))?;
        *t = sim.state.t;
        Ok(())
    })
}

/// Grid dimensions `nx`, `ny` of the simulation.
///
/// # Safety
/// `sim` must be a live handle; `nx`, `ny` writable.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_shape(
    sim: *const SibSimulation,
    nx: *mut usize,
    ny: *mut usize,
) -> SibStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let (a, b) = sim.state.grid().shape();
        *nx.as_mut().ok_or_else(|| null("nx"))? = a;
        *ny.as_mut().ok_or_else(|| null("ny"))? = b;
        Ok(())
    })
}

/// Evaluate the monitored functionals at the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_diagnostics(
    sim: *const SibSimulation,
    out: *mut SibDiagnostics,
) -> SibStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = core(sim.monitor.diagnostics(&sim.state, &sim.params))?;
        *out = SibDiagnostics {
            t: d.t,
            charge: d.charge,
            energy_eps: d.energy_eps,
            modified_energy: d.modified_energy,
            h1_u: d.h1_u,
            h2_u: d.h2_u,
            l2_v: d.l2_v,
            h1_v: d.h1_v,
            l2_vt: d.l2_vt,
            hm_half_vt: d.hm_half_vt,
            gn_quotient: d.gn_quotient.unwrap_or(f64::NAN),
            envelope_h1: d.envelope_h1,
            envelope_small: d.envelope_small.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Copy eigen-coefficients of one field into `buf`, `k` fastest. `u` needs
/// `2·nx·ny` doubles (re, im interleaved); `v` and `vt` need `nx·ny`.
///
/// # Safety
/// `sim` must be a live handle and `buf` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sib_simulation_coefficients(
    sim: *const SibSimulation,
    field: SibField,
    buf: *mut f64,
    len: usize,
) -> SibStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let (nx, ny) = sim.state.grid().shape();
        let values: Vec<f64> = match field {
            SibField::SibFieldU => {
                let c = sim.state.u.complex_coeffs();
                (0..ny)
                    .flat_map(|l| (0..nx).map(move |k| (k, l)))
                    .flat_map(|(k, l)| [c[[k, l]].re, c[[k, l]].im])
                    .collect()
            }
            SibField::SibFieldV | SibField::SibFieldVt => {
                let f = if field == SibField::SibFieldV { &sim.state.v } else { &sim.state.vt };
                let c = f.re();
                let c = c.real_coeffs().expect("real field");
                (0..ny).flat_map(|l| (0..nx).map(move |k| c[[k, l]])).collect()
            }
        };
        if len < values.len() {
            return Err((
                SibStatus::SibErrBufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Estimate the sharp Gagliardo–Nirenberg constant on an `nx × ny` grid over `(0, lx) × (0, ly)`.
///
/// # Safety
/// `c0` and `converged` must be writable (`converged` may be null).
#[no_mangle]
pub unsafe extern "C" fn sib_estimate_c0(
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    max_iter: usize,
    tol: f64,
    c0: *mut f64,
    converged: *mut c_int,
) -> SibStatus {
    guard(|| {
        let c0 = c0.as_mut().ok_or_else(|| null("c0"))?;
        let grid: std::sync::Arc<Grid2D> = core(Grid2D::new(lx, ly, nx, ny))?;
        let e = core(estimate_gn_constant(&grid, max_iter, tol))?;
        *c0 = e.value;
        if let Some(c) = converged.as_mut() {
            *c = c_int::from(e.converged);
        }
        Ok(())
    })
}

/// Run a batch command (`run`, `sweep-eps`, `sweep-n`, `check`, `estimate-c0`,
/// `order-test`) with list arguments taken from the configuration. The command's
/// exit code (0 pass, 1 assertion failure, 2 invalid configuration, 3 numerical
/// abort) is stored in `exit_code`.
///
/// # Safety
/// String arguments must be NUL-terminated; `config_toml` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn sib_run_command(
    command: *const c_char,
    config_toml: *const c_char,
    out_dir: *const c_char,
    exit_code: *mut c_int,
) -> SibStatus {
    guard(|| {
        let exit_code = exit_code.as_mut().ok_or_else(|| null("exit_code"))?;
        let command = str_arg(command, "command")?;
        let out = Path::new(str_arg(out_dir, "out_dir")?);
        let config = if config_toml.is_null() {
            RunConfig::default()
        } else {
            core(RunConfig::from_toml(str_arg(config_toml, "config_toml")?))?
        };
        let outcome = match command {
            "run" => cmd_run(&config, out),
            "sweep-eps" => cmd_sweep_eps(&config, None, out),
            "sweep-n" => cmd_sweep_n(&config, None, out),
            "check" => cmd_check(&config, out),
            "estimate-c0" => cmd_estimate_c0(&config, out),
            "order-test" => cmd_order_test(&config, None, out),
            other => {
                return Err((SibStatus::SibErrInvalidArgument, format!("unknown command {other:?}")));
            }
        };
        *exit_code = outcome.code();
        Ok(())
    })
}
