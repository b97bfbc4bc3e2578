//! Helpers shared by the integration tests. Oracles here are written from first
//! principles and do not call into the transforms under test.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sib_core::dynamics::State;
use sib_core::spectral::{Field, Grid2D, Kind};

pub fn square(n: usize) -> Arc<Grid2D> {
    Grid2D::new(PI, PI, n, n).unwrap()
}

/// `sin x sin y` on `(0, π)²`, which is `(π/2) e₁₁`.
pub fn sinsin(grid: &Arc<Grid2D>, kind: Kind) -> Field {
    Field::mode(grid, kind, 1, 1, Complex64::new(PI / 2.0, 0.0)).unwrap()
}

/// `φ = ψ₀ = sin x sin y`, `ψ₁ = 0`.
pub fn standard_state(grid: &Arc<Grid2D>) -> State {
    State::new(
        0.0,
        sinsin(grid, Kind::Complex),
        sinsin(grid, Kind::Real),
        Field::zeros(grid, Kind::Real),
    )
    .unwrap()
}

/// Random coefficients on the lowest `modes × modes` block with `1/(k² + l²)` decay.
pub fn random_field(grid: &Arc<Grid2D>, kind: Kind, modes: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = grid.shape();
    let mut c = Array2::<Complex64>::zeros((nx, ny));
    for k in 0..modes.min(nx) {
        for l in 0..modes.min(ny) {
            let w = 1.0 / ((k + 1).pow(2) + (l + 1).pow(2)) as f64;
            let im = if kind == Kind::Complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            c[[k, l]] = Complex64::new(rng.random_range(-1.0..1.0), im) * w;
        }
    }
    match kind {
        Kind::Real => Field::from_real(grid, c.mapv(|z| z.re)).unwrap(),
        Kind::Complex => Field::from_complex(grid, c).unwrap(),
    }
}

pub fn random_state(grid: &Arc<Grid2D>, modes: usize, scale: f64, seed: u64) -> State {
    State::new(
        0.0,
        random_field(grid, Kind::Complex, modes, seed).scale(scale),
        random_field(grid, Kind::Real, modes, seed + 1).scale(scale),
        random_field(grid, Kind::Real, modes, seed + 2).scale(scale),
    )
    .unwrap()
}

/// Orthonormal basis element `e_{k,l}(x, y)`, 1-based.
pub fn basis(grid: &Grid2D, k: usize, l: usize, x: f64, y: f64) -> f64 {
    let (lx, ly) = (grid.lx(), grid.ly());
    2.0 / (lx * ly).sqrt() * (k as f64 * PI * x / lx).sin() * (l as f64 * PI * y / ly).sin()
}

/// Value of a field at an arbitrary point by direct summation of its series.
pub fn eval(f: &Field, x: f64, y: f64) -> Complex64 {
    let g = f.grid();
    let (nx, ny) = g.shape();
    let mut s = Complex64::new(0.0, 0.0);
    for l in 1..=ny {
        for k in 1..=nx {
            let c = f.coeff(k, l);
            if c != Complex64::new(0.0, 0.0) {
                s += c * basis(g, k, l, x, y);
            }
        }
    }
    s
}

/// Gauss–Legendre nodes and weights on `[a, b]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `sqrt(Σ|a−b|²)/sqrt(Σ|b|²)` over coefficients.
pub fn rel_l2(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().norm_sq().sqrt() / b.norm_sq().sqrt()
}

pub fn h1(f: &Field) -> f64 {
    f.weighted_norm_sq(|l| 1.0 + l).sqrt()
}

/// `‖u_a − u_b‖_{H¹}`.
pub fn h1_u_distance(a: &State, b: &State) -> f64 {
    h1(&a.u.sub(&b.u).unwrap())
}

/// Ground state of `Q'' + Q'/r − Q + Q³ = 0`, `Q'(0) = 0`, decaying at infinity, by
/// bisection on `Q(0)` with RK4 shooting. Returns `(Q(0), ‖Q‖₂²)` over the plane;
/// the sharp Gagliardo–Nirenberg constant is `√2/‖Q‖₂`.
pub fn ground_state_oracle() -> (f64, f64) {
    const H: f64 = 1e-3;
    const R_MAX: f64 = 30.0;
    let rhs = |r: f64, q: f64, p: f64| (p, -p / r + q - q * q * q);
    // Integrate from the series start; returns (overshoot, mass up to the exit point).
    let shoot = |q0: f64| -> (bool, f64) {
        let mut r = 1e-4;
        let mut q = q0 + (q0 - q0 * q0 * q0) * r * r / 4.0;
        let mut p = (q0 - q0 * q0 * q0) * r / 2.0;
        let mut mass = PI * q0 * q0 * r * r;
        while r < R_MAX {
            let (k1q, k1p) = rhs(r, q, p);
            let (k2q, k2p) = rhs(r + H / 2.0, q + H / 2.0 * k1q, p + H / 2.0 * k1p);
            let (k3q, k3p) = rhs(r + H / 2.0, q + H / 2.0 * k2q, p + H / 2.0 * k2p);
            let (k4q, k4p) = rhs(r + H, q + H * k3q, p + H * k3p);
            let qn = q + H / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            let pn = p + H / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            // trapezoid for 2π ∫ Q² r dr
            mass += PI * H * (q * q * r + qn * qn * (r + H));
            q = qn;
            p = pn;
            r += H;
            if q < 0.0 {
                return (true, mass);
            }
            if p > 0.0 {
                return (false, mass);
            }
        }
        (false, mass)
    };
    let (mut lo, mut hi) = (1.5, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid).0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let q0 = 0.5 * (lo + hi);
    (q0, shoot(q0).1)
}
