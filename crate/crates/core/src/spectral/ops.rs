//! Pointwise products and norms.

use ndarray::Zip;
use num_complex::Complex64;

use super::field::{Field, Kind, Samples};
use super::transform;
use crate::error::{invalid, Result};

/// Padded node count per axis used by [`product_dealiased`] for `n` retained modes.
///
/// A product of two sine series with `n` modes is a cosine polynomial of degree
/// `2n`; sampling it on `2n - 1` interior nodes (plus the two boundary zeros)
/// determines it exactly, which also satisfies the 3/2 padding rule.
pub fn dealias_nodes(n: usize) -> usize {
    (2 * n - 1).max((3 * n).div_ceil(2))
}

fn result_kind(a: &Field, b: &Field) -> Kind {
    if a.kind() == Kind::Real && b.kind() == Kind::Real {
        Kind::Real
    } else {
        Kind::Complex
    }
}

/// Coefficients of `a · b` with no aliasing into retained modes.
///
/// Both factors are zero-padded and evaluated on a refined node set, multiplied
/// pointwise, and the product (a cosine polynomial along each axis) is projected
/// exactly onto the retained sine modes. The result is the L² projection of the
/// true product.
pub fn product_dealiased(a: &Field, b: &Field) -> Result<Field> {
    a.check_same_grid(b)?;
    let grid = a.grid();
    let mx = dealias_nodes(grid.nx());
    let my = dealias_nodes(grid.ny());
    let mut sa = a.synthesize_at(mx, my);
    let sb = b.synthesize_at(mx, my);
    Zip::from(&mut sa).and(&sb).for_each(|x, &y| *x *= y);
    let c = transform::project_cosine_samples(&sa, grid);
    Ok(Field::from_coeff_array(grid, c, result_kind(a, b)))
}

/// Collocation product: multiply at the grid's own nodes and re-analyze.
/// Aliased; kept for comparison runs with dealiasing disabled.
pub fn product_collocated(a: &Field, b: &Field) -> Result<Field> {
    a.check_same_grid(b)?;
    let mut sa = a.synthesize();
    let sb = b.synthesize();
    Zip::from(&mut sa).and(&sb).for_each(|x, &y| *x *= y);
    let c = transform::analyze_padded(&sa, a.grid());
    Ok(Field::from_coeff_array(a.grid(), c, result_kind(a, b)))
}

pub fn product(a: &Field, b: &Field, dealias: bool) -> Result<Field> {
    if dealias {
        product_dealiased(a, b)
    } else {
        product_collocated(a, b)
    }
}

/// `|u|²` as a real field.
pub fn abs_sq(u: &Field, dealias: bool) -> Result<Field> {
    Ok(product(u, &u.conj(), dealias)?.re())
}

/// Exact projection of `u³` for a real field: a triple product of sine series is
/// again a sine series of degree `3n`, recovered exactly from `3n` nodes.
pub(crate) fn cube_real(u: &Field) -> Field {
    let grid = u.grid();
    let (mx, my) = (3 * grid.nx(), 3 * grid.ny());
    let mut s = u.synthesize_at(mx, my);
    s.mapv_inplace(|z| Complex64::new(z.re * z.re * z.re, 0.0));
    Field::from_coeff_array(grid, transform::analyze_padded(&s, grid), Kind::Real)
}

/// Exponents accepted by [`sobolev_norm`].
pub const SOBOLEV_EXPONENTS: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

/// `(Σ λ^s |c|²)^{1/2}`, i.e. `‖(-Δ)^{s/2} f‖₂`. `s = 1` gives `‖∇f‖₂`,
/// `s = 2` gives `‖Δf‖₂` and `s = -1` gives `‖(-Δ)^{-1/2} f‖₂`.
pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    if !SOBOLEV_EXPONENTS.contains(&s) {
        return invalid(format!("unsupported Sobolev exponent {s}"));
    }
    Ok(if s == 0.0 {
        f.norm_sq().sqrt()
    } else {
        f.weighted_norm_sq(|l| l.powf(s)).sqrt()
    })
}

/// `(‖f‖₂² + ‖∇f‖₂²)^{1/2}`.
pub fn h1_norm(f: &Field) -> f64 {
    f.weighted_norm_sq(|l| 1.0 + l).sqrt()
}

/// `‖f‖_p` by trapezoid quadrature on the 2×-refined node set (boundary values vanish).
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return invalid(format!("L^p exponent must be finite and ≥ 2, got {p}"));
    }
    let grid = f.grid();
    let (mx, my) = (2 * grid.nx() + 1, 2 * grid.ny() + 1);
    let s: Samples = f.synthesize_at(mx, my);
    let max = s.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return Ok(0.0);
    }
    let w = grid.lx() / (mx + 1) as f64 * grid.ly() / (my + 1) as f64;
    // scale by the max to keep large p finite
    let sum: f64 = s.iter().map(|z| (z.norm() / max).powf(p)).sum();
    Ok(max * (w * sum).powf(1.0 / p))
}
