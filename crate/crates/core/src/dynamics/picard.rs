//! Duhamel–Picard solver: fixed-point iteration of the integral form
//!
//! ```text
//! u(t) = U(t)φ − i ∫₀ᵗ U(t−s) P(v, u)(s) ds
//! v(t) = K̇(t)ψ₀ + K(t)ψ₁ + ∫₀ᵗ K(t−s) S|u|²(s) ds
//! ```
//!
//! with `K(t) = ω⁻¹ sin tω`, `K̇(t) = cos tω`, `S = (1−εΔ)⁻¹Δ`. The nonlinear
//! terms are interpolated in time on Gauss–Legendre nodes of each panel and the
//! oscillatory kernels are integrated exactly against the interpolants, mode by
//! mode. `∂t v` comes from the differentiated formula (kernels `K̈ = −ω² K` and `K̇`).

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::state::{State, SystemParams};
use super::stepper::nonlinear_terms;
use crate::error::{invalid, Error, Result};
use crate::operators::{omega, source_op, yosida_op};
use crate::spectral::{Field, Grid2D};

/// Gauss–Legendre nodes on `(0, 1)`, ascending.
pub fn gauss_legendre_nodes(m: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(m);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(0.5 * (1.0 - x));
    }
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Monomial coefficients `a[i][k]` of the Lagrange basis `ℓ_i(θ) = Σ_k a[i][k] θ^k`.
fn lagrange_monomials(nodes: &[f64]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    (0..m)
        .map(|i| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (j, &xj) in nodes.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * xj;
                }
                poly = next;
                denom *= nodes[i] - xj;
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}

/// `I_k(z) = ∫₀¹ e^{z(1−θ)} θ^k dθ` for `k < count`.
fn exp_moments(z: Complex64, count: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); count];
    if z.norm() < count.max(1) as f64 {
        // I_k = Σ_j z^j k! / (j + k + 1)!
        for (k, slot) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0 / (k as f64 + 1.0), 0.0);
            let mut sum = term;
            for j in 1..200 {
                term *= z / (j as f64 + k as f64 + 1.0);
                sum += term;
                if term.norm() < 1e-18 * sum.norm().max(1e-300) {
                    break;
                }
            }
            *slot = sum;
        }
    } else {
        out[0] = (z.exp() - 1.0) / z;
        for k in 1..count {
            out[k] = (out[k - 1] * k as f64 - 1.0) / z;
        }
    }
    out
}

/// Per-mode quadrature tables on one panel of width `h`.
struct PanelTables {
    m: usize,
    /// `e^{-iλτ_q}`, `q = 0..=m` (the last point is the panel end).
    u_free: Vec<Array2<Complex64>>,
    /// `∫₀^{τ_q} e^{-iλ(τ_q−s)} ℓ_i(s) ds`, index `q * m + i`.
    u_weight: Vec<Array2<Complex64>>,
    w_cos: Vec<Array2<f64>>,
    w_sinc: Vec<Array2<f64>>,
    w_wsin: Vec<Array2<f64>>,
    /// `∫ K(τ_q − s) ℓ_i(s) ds` and `∫ K̇(τ_q − s) ℓ_i(s) ds`.
    v_weight: Vec<Array2<f64>>,
    vt_weight: Vec<Array2<f64>>,
}

impl PanelTables {
    fn new(grid: &Grid2D, eps: f64, h: f64, m: usize) -> Self {
        let nodes = gauss_legendre_nodes(m);
        let mut theta = nodes.clone();
        theta.push(1.0);
        let lag = lagrange_monomials(&nodes);
        let lam = grid.eigenvalues();
        let om = lam.mapv(|l| omega(eps, l));

        let weights = |rate: &Array2<Complex64>| -> Vec<Array2<Complex64>> {
            let mut out = vec![Array2::<Complex64>::zeros(grid.shape()); (m + 1) * m];
            for (idx, &r) in rate.indexed_iter() {
                for (q, &th) in theta.iter().enumerate() {
                    let mom = exp_moments(r * (h * th), m);
                    for (i, a) in lag.iter().enumerate() {
                        let mut w = Complex64::default();
                        for (k, &ak) in a.iter().enumerate() {
                            w += mom[k] * (ak * th.powi(k as i32 + 1));
                        }
                        out[q * m + i][idx] = w * h;
                    }
                }
            }
            out
        };
        let u_weight = weights(&lam.mapv(|l| Complex64::new(0.0, -l)));
        let wave = weights(&om.mapv(|w| Complex64::new(0.0, w)));
        let v_weight = wave
            .iter()
            .map(|w| Zip::from(w).and(&om).map_collect(|w, &o| w.im / o))
            .collect();
        let vt_weight = wave.iter().map(|w| w.mapv(|w| w.re)).collect();
        let u_free = theta
            .iter()
            .map(|&th| lam.mapv(|l| Complex64::from_polar(1.0, -l * h * th)))
            .collect();
        let w_cos = theta.iter().map(|&th| om.mapv(|w| (w * h * th).cos())).collect();
        let w_sinc = theta.iter().map(|&th| om.mapv(|w| (w * h * th).sin() / w)).collect();
        let w_wsin = theta.iter().map(|&th| om.mapv(|w| w * (w * h * th).sin())).collect();
        Self {
            m,
            u_free,
            u_weight,
            w_cos,
            w_sinc,
            w_wsin,
            v_weight,
            vt_weight,
        }
    }
}

/// Values on the time nodes of every panel plus the end state.
#[derive(Clone)]
struct Trajectory {
    u: Vec<Array2<Complex64>>,
    v: Vec<Array2<f64>>,
    end: (Array2<Complex64>, Array2<f64>, Array2<f64>),
}

/// Outcome of [`picard_duhamel_report`].
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub state: State,
    pub iterations: usize,
    /// Distance between successive iterates, one entry per iteration.
    pub residuals: Vec<f64>,
}

/// State at `state0.t + t_final` from the Duhamel fixed point; panels are at most
/// `params.dt` wide with `quad_nodes` Gauss–Legendre nodes each.
pub fn picard_duhamel(
    state0: &State,
    t_final: f64,
    params: &SystemParams,
    quad_nodes: usize,
    tol: f64,
    max_iter: usize,
) -> Result<State> {
    picard_duhamel_report(state0, t_final, params, quad_nodes, tol, max_iter).map(|r| r.state)
}

pub fn picard_duhamel_report(
    state0: &State,
    t_final: f64,
    params: &SystemParams,
    quad_nodes: usize,
    tol: f64,
    max_iter: usize,
) -> Result<PicardReport> {
    params.validate()?;
    if quad_nodes < 2 {
        return invalid("Picard solver needs at least 2 quadrature nodes per panel");
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return invalid(format!("horizon must be positive, got {t_final}"));
    }
    if max_iter == 0 {
        return invalid("max_iter must be at least 1");
    }
    let grid = state0.grid().clone();
    let panels = ((t_final / params.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = t_final / panels as f64;
    let m = quad_nodes;
    let tables = PanelTables::new(&grid, params.eps, h, m);
    let yosida = params.yosida_n.map(|n| yosida_op(n, &grid)).transpose()?;
    let source = source_op(params.eps, &grid)?;

    let u0 = state0.u.complex_coeffs();
    let v0 = state0.v.real_coeffs().cloned().unwrap_or_else(|| state0.v.re().real_coeffs().unwrap().clone());
    let vt0 = state0.vt.re().real_coeffs().unwrap().clone();

    let zero_n = vec![Array2::<Complex64>::zeros(grid.shape()); panels * m];
    let zero_g = vec![Array2::<f64>::zeros(grid.shape()); panels * m];
    let mut traj = sweep(&tables, panels, &u0, &v0, &vt0, &zero_n, &zero_g);

    let mut residuals = Vec::new();
    for it in 1..=max_iter {
        let mut n_terms = Vec::with_capacity(panels * m);
        let mut g_terms = Vec::with_capacity(panels * m);
        for (u, v) in traj.u.iter().zip(&traj.v) {
            let uf = Field::from_complex(&grid, u.clone())?;
            let vf = Field::from_real(&grid, v.clone())?;
            let (p, f) = nonlinear_terms(&uf, &vf, params, yosida.as_ref())?;
            n_terms.push(p.complex_coeffs());
            g_terms.push(source.apply(&f)?.re().real_coeffs().unwrap().clone());
        }
        let next = sweep(&tables, panels, &u0, &v0, &vt0, &n_terms, &g_terms);
        let res = distance(&grid, &traj, &next);
        traj = next;
        residuals.push(res);
        if !res.is_finite() {
            break;
        }
        if res <= tol {
            let (u, v, vt) = traj.end;
            let state = State::new(
                state0.t + t_final,
                Field::from_complex(&grid, u)?,
                Field::from_real(&grid, v)?,
                Field::from_real(&grid, vt)?,
            )?;
            return Ok(PicardReport {
                state,
                iterations: it,
                residuals,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: residuals.len(),
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// One application of the integral map given nonlinear terms on all nodes.
fn sweep(
    t: &PanelTables,
    panels: usize,
    u0: &Array2<Complex64>,
    v0: &Array2<f64>,
    vt0: &Array2<f64>,
    n_terms: &[Array2<Complex64>],
    g_terms: &[Array2<f64>],
) -> Trajectory {
    let m = t.m;
    let (mut ua, mut va, mut vta) = (u0.clone(), v0.clone(), vt0.clone());
    let mut u_nodes = Vec::with_capacity(panels * m);
    let mut v_nodes = Vec::with_capacity(panels * m);
    let minus_i = Complex64::new(0.0, -1.0);
    for p in 0..panels {
        let nn = &n_terms[p * m..(p + 1) * m];
        let gg = &g_terms[p * m..(p + 1) * m];
        let mut end = None;
        for q in 0..=m {
            let mut u = &ua * &t.u_free[q];
            let mut v = &va * &t.w_cos[q] + &(&vta * &t.w_sinc[q]);
            for i in 0..m {
                let wu = &t.u_weight[q * m + i];
                Zip::from(&mut u).and(wu).and(&nn[i]).for_each(|u, &w, &n| *u += minus_i * w * n);
                let wv = &t.v_weight[q * m + i];
                Zip::from(&mut v).and(wv).and(&gg[i]).for_each(|v, &w, &g| *v += w * g);
            }
            if q < m {
                u_nodes.push(u);
                v_nodes.push(v);
            } else {
                let mut vt = &vta * &t.w_cos[q] - &(&va * &t.w_wsin[q]);
                for (i, g) in gg.iter().enumerate() {
                    let wv = &t.vt_weight[q * m + i];
                    Zip::from(&mut vt).and(wv).and(g).for_each(|x, &w, &g| *x += w * g);
                }
                end = Some((u, v, vt));
            }
        }
        let (u, v, vt) = end.expect("panel end evaluated");
        ua = u;
        va = v;
        vta = vt;
    }
    Trajectory {
        u: u_nodes,
        v: v_nodes,
        end: (ua, va, vta),
    }
}

/// Max over nodes (and the end state) of the `H¹ ⊕ L²` distance.
fn distance(grid: &Grid2D, a: &Trajectory, b: &Trajectory) -> f64 {
    let lam = grid.eigenvalues();
    let pair = |ua: &Array2<Complex64>, ub: &Array2<Complex64>, va: &Array2<f64>, vb: &Array2<f64>| {
        let du = Zip::from(ua).and(ub).and(lam).fold(0.0, |s, &x, &y, &l| s + (1.0 + l) * (x - y).norm_sqr());
        let dv = Zip::from(va).and(vb).fold(0.0, |s, &x, &y| s + (x - y) * (x - y));
        (du + dv).sqrt()
    };
    let mut d = pair(&a.end.0, &b.end.0, &a.end.1, &b.end.1);
    let dvt = Zip::from(&a.end.2).and(&b.end.2).fold(0.0, |s, &x, &y| s + (x - y) * (x - y));
    d = d.max(dvt.sqrt());
    for i in 0..a.u.len() {
        d = d.max(pair(&a.u[i], &b.u[i], &a.v[i], &b.v[i]));
    }
    d
}
