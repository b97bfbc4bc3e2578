mod common;

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sib_core::functionals::estimate_gn_constant;
use sib_core::spectral::{
    lp_norm, product, product_dealiased, sobolev_norm, Field, Grid2D, Kind, SOBOLEV_EXPONENTS,
};

use common::*;

/// Galerkin coefficients of `a·b` by tensor Gauss–Legendre quadrature of `a b e_{k,l}`,
/// with `a`, `b` evaluated from their series at every quadrature node.
fn product_oracle(a: &Field, b: &Field, nodes: usize) -> Field {
    let g = a.grid().clone();
    let (xs, wx) = gauss_legendre(nodes, 0.0, g.lx());
    let (ys, wy) = gauss_legendre(nodes, 0.0, g.ly());
    let mut ab = Array2::<Complex64>::zeros((nodes, nodes));
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            ab[[i, j]] = eval(a, x, y) * eval(b, x, y) * wx[i] * wy[j];
        }
    }
    let (nx, ny) = g.shape();
    let c = Array2::from_shape_fn((nx, ny), |(k, l)| {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                s += ab[[i, j]] * basis(&g, k + 1, l + 1, x, y);
            }
        }
        s
    });
    Field::from_complex(&g, c).unwrap()
}

#[test]
fn dealiased_product_matches_quadrature_oracle() {
    let g = Grid2D::new(PI, 2.0, 7, 6).unwrap();
    let a = random_field(&g, Kind::Complex, 7, 11);
    let b = random_field(&g, Kind::Real, 7, 12);
    let got = product_dealiased(&a, &b).unwrap();
    let want = product_oracle(&a, &b, 96);
    let err = rel_l2(&got.to_complex(), &want);
    assert!(err < 1e-10, "relative L² error {err:e}");

    let rr = product_dealiased(&b, &b).unwrap();
    assert_eq!(rr.kind(), Kind::Real);
    let want = product_oracle(&b, &b, 96);
    assert!(rel_l2(&rr.to_complex(), &want) < 1e-10);
}

#[test]
fn square_of_sinsin_has_closed_form_norm() {
    // sin²x has sine coefficients a_k = -4√(2/π) / (k(k² − 4)) for odd k, zero for even k,
    // so the projection onto N × N modes has norm Σ_{k≤N} a_k² and tends to ∫sin⁴ = 3π/8.
    let a = |k: usize| {
        let k = k as f64;
        -4.0 * (2.0 / PI).sqrt() / (k * (k * k - 4.0))
    };
    let mut last = f64::INFINITY;
    for n in [8, 16, 32, 64] {
        let f = sinsin(&square(n), Kind::Real);
        let p = product(&f, &f, true).unwrap();
        let want: f64 = (1..=n).step_by(2).map(|k| a(k).powi(2)).sum();
        let got = p.norm_sq().sqrt();
        assert!((got - want).abs() < 1e-13, "n = {n}: {got} vs {want}");
        let gap = 3.0 * PI / 8.0 - got;
        assert!(gap > 0.0 && gap < last);
        last = gap;
    }
    assert!(last < 1e-8);
}

#[test]
fn round_trips_are_identities() {
    let g = Grid2D::new(2.0, 3.0, 24, 17).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = Array2::from_shape_fn(g.shape(), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let back = Field::analyze(&samples, &g).unwrap().synthesize();
    let num: f64 = (&back - &samples).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(num / den < 1e-13, "synthesize∘analyze error {:e}", num / den);

    let f = random_field(&g, Kind::Complex, 24, 4);
    let f2 = Field::analyze(&f.synthesize(), &g).unwrap();
    assert!(rel_l2(&f2.to_complex(), &f) < 1e-13);
}

#[test]
fn synthesis_matches_direct_series() {
    let g = Grid2D::new(PI, 1.5, 9, 8).unwrap();
    let f = random_field(&g, Kind::Complex, 9, 5);
    let s = f.synthesize();
    for (i, &x) in g.nodes_x().iter().enumerate() {
        for (j, &y) in g.nodes_y().iter().enumerate() {
            assert!((s[[i, j]] - eval(&f, x, y)).norm() < 1e-13);
        }
    }
}

#[test]
fn parseval_between_quadrature_and_coefficients() {
    for seed in 0..10 {
        let g = Grid2D::new(PI, 2.5, 20, 16).unwrap();
        let f = random_field(&g, Kind::Complex, 12, seed);
        let q = lp_norm(&f, 2.0).unwrap();
        let s = sobolev_norm(&f, 0.0).unwrap();
        assert!((q - s).abs() <= 1e-6 * s, "seed {seed}: {q} vs {s}");
    }
}

#[test]
fn lp_norm_of_sinsin() {
    let f = sinsin(&square(16), Kind::Real);
    let l4 = lp_norm(&f, 4.0).unwrap();
    assert!((l4 - (3.0 * PI / 8.0).sqrt()).abs() < 1e-10);
    assert!((lp_norm(&f, 2.0).unwrap() - PI / 2.0).abs() < 1e-6);
    assert_eq!(lp_norm(&Field::zeros(&square(4), Kind::Real), 6.0).unwrap(), 0.0);
}

#[test]
fn gagliardo_nirenberg_bound_on_random_fields() {
    let c0 = estimate_gn_constant(&Grid2D::new(2.0 * PI, 2.0 * PI, 128, 128).unwrap(), 200, 1e-10)
        .unwrap()
        .value;
    for seed in 0..20 {
        let g = Grid2D::new(PI, 1.0 + seed as f64 * 0.1, 24, 24).unwrap();
        let f = random_field(&g, Kind::Complex, 1 + (seed as usize % 10), seed);
        let l4 = lp_norm(&f, 4.0).unwrap();
        let bound = c0 * sobolev_norm(&f, 0.0).unwrap() * sobolev_norm(&f, 1.0).unwrap();
        assert!(l4 * l4 <= bound * (1.0 + 1e-6), "seed {seed}: {} > {bound}", l4 * l4);
    }
}

#[test]
fn lp_quotient_does_not_grow_with_p() {
    // ‖f‖_p / (√p ‖f‖₂^{2/p} ‖∇f‖₂^{1−2/p}) stays bounded in p.
    for seed in 0..5 {
        let g = square(24);
        let f = random_field(&g, Kind::Real, 6, seed);
        let l2 = sobolev_norm(&f, 0.0).unwrap();
        let grad = sobolev_norm(&f, 1.0).unwrap();
        let q: Vec<f64> = [2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&p: &f64| {
                lp_norm(&f, p).unwrap() / (p.sqrt() * l2.powf(2.0 / p) * grad.powf(1.0 - 2.0 / p))
            })
            .collect();
        assert!(q.iter().all(|v| v.is_finite()));
        let head = q[..4].iter().cloned().fold(0.0, f64::max);
        assert!(q[4] <= head, "seed {seed}: {q:?}");
    }
}

#[test]
fn sobolev_norms_of_eigenfunction() {
    let f = sinsin(&square(8), Kind::Real);
    let expect = |s: f64| PI / 2.0 * 2f64.powf(s / 2.0);
    for s in SOBOLEV_EXPONENTS {
        assert!((sobolev_norm(&f, s).unwrap() - expect(s)).abs() < 1e-14, "s = {s}");
    }
    assert!(sobolev_norm(&f, 3.0).is_err());
}

#[test]
fn collocated_and_dealiased_products_agree_for_low_modes() {
    // Both products are exact when the product stays inside the resolved band.
    let g = square(32);
    let a = random_field(&g, Kind::Real, 4, 1);
    let b = random_field(&g, Kind::Real, 4, 2);
    let exact = product(&a, &b, true).unwrap();
    let nodal = product(&a, &b, false).unwrap();
    assert!(rel_l2(&nodal, &exact) < 1e-2);
}
