//! Gagliardo–Nirenberg quotient and its sharp constant.

use std::sync::Arc;

use ndarray::Array2;

use crate::error::{invalid, Result};
use crate::operators::DiagonalOperator;
use crate::spectral::{cube_real, lp_norm, Field, Grid2D};

/// `‖u‖₄² / (‖u‖₂ ‖∇u‖₂)`.
pub fn gn_quotient(u: &Field) -> Result<f64> {
    let l2 = u.norm_sq().sqrt();
    if l2 == 0.0 {
        return invalid("Gagliardo–Nirenberg quotient of the zero field");
    }
    let grad = u.weighted_norm_sq(|l| l).sqrt();
    Ok(lp_norm(u, 4.0)?.powi(2) / (l2 * grad))
}

/// Result of [`estimate_gn_constant`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct GnEstimate {
    /// Best quotient reached; a lower bound for the sharp constant.
    pub value: f64,
    pub iterations: usize,
    /// `false` when `max_iter` ran out before the increment fell below `tol`.
    pub converged: bool,
    /// Quotient after each accepted iterate, nondecreasing.
    pub history: Vec<f64>,
}

struct Quotient {
    value: f64,
    l2_sq: f64,
    grad_sq: f64,
    cube: Field,
}

fn evaluate(u: &Field) -> Quotient {
    let cube = cube_real(u);
    let l4_4 = u.inner(&cube).map(|z| z.re).unwrap_or(0.0);
    let l2_sq = u.norm_sq();
    let grad_sq = u.weighted_norm_sq(|l| l);
    Quotient {
        value: l4_4.max(0.0).sqrt() / (l2_sq * grad_sq).sqrt(),
        l2_sq,
        grad_sq,
        cube,
    }
}

fn normalized(f: &Field) -> Field {
    let n = f.norm_sq().sqrt();
    if n > 0.0 {
        f.scale(1.0 / n)
    } else {
        f.clone()
    }
}

/// Centered Gaussian bump of width `min(lx, ly)/16`, as a real field.
pub fn gaussian_bump(grid: &Arc<Grid2D>) -> Result<Field> {
    let (x, y) = (grid.nodes_x(), grid.nodes_y());
    let (cx, cy) = (0.5 * grid.lx(), 0.5 * grid.ly());
    let sigma = grid.lx().min(grid.ly()) / 16.0;
    let s = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let r2 = (x[i] - cx).powi(2) + (y[j] - cy).powi(2);
        (-0.5 * r2 / (sigma * sigma)).exp()
    });
    Field::analyze_real(&s, grid)
}

/// Estimate the sharp constant by ascent on the quotient from a centered bump.
pub fn estimate_gn_constant(grid: &Arc<Grid2D>, max_iter: usize, tol: f64) -> Result<GnEstimate> {
    estimate_gn_constant_from(&gaussian_bump(grid)?, max_iter, tol)
}

/// Normalized Euler–Lagrange iteration `u ← normalize((-Δ + μ)⁻¹ u³)` with
/// `μ = ‖∇u‖₂²/‖u‖₂²`, the multiplier of a critical point of the quotient at
/// the current scale. Steps that would lower the quotient are damped by
/// halving until they do not, so the recorded values never decrease.
pub fn estimate_gn_constant_from(initial: &Field, max_iter: usize, tol: f64) -> Result<GnEstimate> {
    let u0 = initial.re();
    if u0.is_zero() {
        return invalid("estimator needs a nonzero starting field");
    }
    if !(tol >= 0.0) {
        return invalid(format!("tolerance must be nonnegative, got {tol}"));
    }
    let grid = u0.grid().clone();
    let mut u = normalized(&u0);
    let mut q = evaluate(&u);
    let mut history = vec![q.value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mu = q.grad_sq / q.l2_sq;
        let resolvent = DiagonalOperator::from_fn(&grid, "(-Δ+μ)⁻¹", move |l| 1.0 / (l + mu));
        let target = normalized(&resolvent.apply(&q.cube)?);
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..40 {
            let cand = if alpha == 1.0 {
                target.clone()
            } else {
                normalized(&u.axpy(alpha, &target.sub(&u)?)?)
            };
            let qc = evaluate(&cand);
            if qc.value >= q.value {
                accepted = Some((cand, qc));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, qn)) = accepted else {
            converged = true;
            break;
        };
        let gain = qn.value - q.value;
        u = next;
        q = qn;
        history.push(q.value);
        if gain < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("Gagliardo–Nirenberg estimator stopped after {iterations} iterations without converging");
    }
    Ok(GnEstimate {
        value: q.value,
        iterations,
        converged,
        history,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;
    use crate::spectral::Kind;

    #[test]
    fn quotient_of_eigenfunction() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        let f = Field::mode(&g, Kind::Real, 1, 1, Complex64::new(PI / 2.0, 0.0)).unwrap();
        let q = gn_quotient(&f).unwrap();
        assert!((q - 3.0 * 2f64.sqrt() / (4.0 * PI)).abs() < 1e-12);
        assert!((gn_quotient(&f.scale(-7.5)).unwrap() - q).abs() < 1e-12 * q);
        assert!(gn_quotient(&f.scale(0.0)).is_err());
    }

    #[test]
    fn single_mode_start_ascends() {
        let g = Grid2D::new(2.0 * PI, 2.0 * PI, 8, 8).unwrap();
        let f = Field::mode(&g, Kind::Real, 1, 1, Complex64::new(1.0, 0.0)).unwrap();
        let est = estimate_gn_constant_from(&f, 1, 0.0).unwrap();
        assert!(est.history.len() <= 2);
        assert!(est.value >= est.history[0]);
    }
}
