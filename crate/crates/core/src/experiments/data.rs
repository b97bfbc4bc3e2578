//! Initial data built from a configuration.

use std::sync::Arc;

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Expression, ModeSpec, Preset, Resolved, RunConfig};
use crate::dynamics::State;
use crate::error::Result;
use crate::spectral::{Field, Grid2D, Kind};
use crate::Complex64;

/// Grid and unregularized data `(φ, ψ₀, ψ₁)` at `t = 0`.
pub fn build_data(config: &RunConfig, r: &Resolved) -> Result<(Arc<Grid2D>, State)> {
    let grid = Grid2D::new(r.lx, r.ly, config.grid.nx, config.grid.ny)?;
    // orthonormal coefficient of sin(kπx/Lx) sin(lπy/Ly)
    let unit = (r.lx * r.ly).sqrt() / 2.0;
    let d = &config.data;
    let state = match d.preset {
        Preset::Zero => State::zeros(&grid),
        Preset::Standard | Preset::Linear => {
            let a = Complex64::new(unit, 0.0);
            State::new(
                0.0,
                Field::mode(&grid, Kind::Complex, 1, 1, a)?,
                Field::mode(&grid, Kind::Real, 1, 1, a)?,
                Field::zeros(&grid, Kind::Real),
            )?
        }
        Preset::Random => random_data(&grid, config.run.seed, d.random_modes, d.random_amplitude * unit)?,
        Preset::Custom => {
            let u = modes(&grid, &d.u, unit, Kind::Complex)?;
            let u = add_expr(u, d.u_expr.as_deref(), Complex64::new(1.0, 0.0))?;
            let u = add_expr(u, d.u_expr_im.as_deref(), Complex64::new(0.0, 1.0))?;
            let v = add_expr(modes(&grid, &d.v, unit, Kind::Real)?, d.v_expr.as_deref(), 1.0.into())?;
            let vt = add_expr(modes(&grid, &d.vt, unit, Kind::Real)?, d.vt_expr.as_deref(), 1.0.into())?;
            State::new(0.0, u, v, vt)?
        }
    };
    let state = State {
        u: state.u.scale(r.phi_scale),
        ..state
    };
    Ok((grid, state))
}

fn modes(grid: &Arc<Grid2D>, list: &[ModeSpec], unit: f64, kind: Kind) -> Result<Field> {
    let mut c = Array2::<Complex64>::zeros(grid.shape());
    for m in list {
        c[[m.k - 1, m.l - 1]] += Complex64::new(m.re, m.im) * unit;
    }
    match kind {
        Kind::Complex => Field::from_complex(grid, c),
        Kind::Real => Field::from_real(grid, c.mapv(|z| z.re)),
    }
}

/// `f + factor · P(expr)` with the expression sampled at the collocation nodes.
fn add_expr(f: Field, expr: Option<&str>, factor: Complex64) -> Result<Field> {
    let Some(src) = expr else { return Ok(f) };
    let e = Expression::parse(src)?;
    let grid = f.grid().clone();
    let (xs, ys) = (grid.nodes_x(), grid.nodes_y());
    let (lx, ly) = (grid.lx(), grid.ly());
    let mut samples = Array2::<f64>::zeros(grid.shape());
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            samples[[i, j]] = e.eval(&[("x", x), ("y", y), ("lx", lx), ("ly", ly)])?;
        }
    }
    let g = Field::analyze_real(&samples, &grid)?;
    match f.kind() {
        Kind::Real => f.axpy(factor.re, &g),
        Kind::Complex => f.axpy(1.0, &g.scale_complex(factor)),
    }
}

/// Coefficients with uniformly random phases and amplitude `∝ 1/(k² + l²)` on
/// `k, l ≤ modes`; deterministic in `seed`.
pub fn random_data(grid: &Arc<Grid2D>, seed: u64, modes: usize, amp: f64) -> Result<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = grid.shape();
    let mut u = Array2::<Complex64>::zeros((nx, ny));
    let mut v = Array2::<f64>::zeros((nx, ny));
    let mut vt = Array2::<f64>::zeros((nx, ny));
    for k in 0..modes.min(nx) {
        for l in 0..modes.min(ny) {
            let w = amp * 2.0 / ((k + 1).pow(2) + (l + 1).pow(2)) as f64;
            u[[k, l]] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * w;
            v[[k, l]] = rng.random_range(-1.0..1.0) * w;
            vt[[k, l]] = rng.random_range(-1.0..1.0) * w;
        }
    }
    State::new(
        0.0,
        Field::from_complex(grid, u)?,
        Field::from_real(grid, v)?,
        Field::from_real(grid, vt)?,
    )
}
