mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use sib_core::operators::{
    bessel_op, omega, omega_op, power_op, schrodinger_propagator, source_op, wave_propagator,
    yosida_op, DiagonalOperator,
};
use sib_core::spectral::{sobolev_norm, Grid2D, Kind, SOBOLEV_EXPONENTS};

use common::*;

#[test]
fn yosida_symbol_inequalities_on_every_mode() {
    let g = Grid2D::new(PI, 2.0, 48, 40).unwrap();
    for e in 0..=10 {
        let n = 1u64 << e;
        let j = yosida_op(n, &g).unwrap();
        let s = j.real_symbol().unwrap();
        for (&sigma, &lam) in s.iter().zip(g.eigenvalues().iter()) {
            assert!(sigma <= 1.0);
            assert!(lam.sqrt() * sigma <= (n as f64).sqrt());
            assert!(lam.sqrt() * sigma <= lam.sqrt());
            assert!(lam * sigma <= lam);
        }
    }
}

#[test]
fn yosida_converges_to_identity() {
    let g = square(24);
    for seed in 0..5 {
        let f = random_field(&g, Kind::Complex, 24, seed);
        let norm = f.norm_sq().sqrt();
        let mut prev = f64::INFINITY;
        for e in 0..=10 {
            let n = 1u64 << e;
            let err = yosida_op(n, &g).unwrap().apply(&f).unwrap().sub(&f).unwrap().norm_sq().sqrt();
            assert!(err <= prev, "seed {seed}, n = {n}");
            assert!(err <= g.lambda_max() / n as f64 * norm);
            prev = err;
        }
        let big = yosida_op(1 << 20, &g).unwrap().apply(&f).unwrap().sub(&f).unwrap();
        assert!(big.norm_sq().sqrt() < 1e-3 * norm);
    }
}

#[test]
fn bessel_identity_on_random_fields() {
    // ‖(1−Δ)^{1/2}(−Δ)^{−1/2} f‖² = ‖f‖² + ‖(−Δ)^{−1/2} f‖²
    let g = Grid2D::new(1.0, 3.0, 20, 30).unwrap();
    let a = bessel_op(0.5, &g).compose(&power_op(-0.5, &g)).unwrap();
    for seed in 0..100 {
        let f = random_field(&g, Kind::Complex, 20, seed);
        let lhs = a.apply(&f).unwrap().norm_sq();
        let rhs = f.norm_sq() + power_op(-0.5, &g).apply(&f).unwrap().norm_sq();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }
}

#[test]
fn schrodinger_group_is_unitary_in_every_norm() {
    let g = square(32);
    let f = random_field(&g, Kind::Complex, 32, 7);
    for t in [-3.0, 0.1, 1.0, 17.5] {
        let ft = schrodinger_propagator(t, &g).apply(&f).unwrap();
        for s in SOBOLEV_EXPONENTS {
            let a = sobolev_norm(&ft, s).unwrap();
            let b = sobolev_norm(&f, s).unwrap();
            assert!((a - b).abs() <= 1e-12 * b, "t = {t}, s = {s}");
        }
        let back = schrodinger_propagator(-t, &g).apply(&ft).unwrap();
        assert!(rel_l2(&back, &f) < 1e-14);
    }
    let z = schrodinger_propagator(PI / 2.0, &g).at(1, 1);
    assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn wave_kernels_conserve_oscillator_energy() {
    let g = Grid2D::new(PI, 1.7, 24, 20).unwrap();
    for eps in [0.0, 0.3, 1.0] {
        for t in [0.0, 1e-3, 0.37, 2.0, 50.0] {
            let (c, s) = wave_propagator(t, eps, &g).unwrap();
            let w = omega_op(eps, &g).unwrap();
            let (c, s, w) = (c.real_symbol().unwrap(), s.real_symbol().unwrap(), w.real_symbol().unwrap());
            for ((&c, &s), &w) in c.iter().zip(s.iter()).zip(w.iter()) {
                assert!((c * c + w * w * s * s - 1.0).abs() < 1e-14);
            }
        }
    }
    // ε = 0: mode (1, 1) on (0, π)² has ω = √2.
    let (c, s) = wave_propagator(PI, 0.0, &square(4)).unwrap();
    assert!((c.at(1, 1).re - (2f64.sqrt() * PI).cos()).abs() < 1e-15);
    assert!((s.at(1, 1).re - (2f64.sqrt() * PI).sin() / 2f64.sqrt()).abs() < 1e-15);
    // λ(1, 1) = 4 on the square of side π/√2, so at t = π the kernels are (1, 0).
    let side = PI / 2f64.sqrt();
    let (c, s) = wave_propagator(PI, 0.0, &Grid2D::new(side, side, 2, 2).unwrap()).unwrap();
    assert!((c.at(1, 1).re - 1.0).abs() < 1e-12);
    assert!(s.at(1, 1).re.abs() < 1e-12);
}

#[test]
fn source_is_minus_omega_squared() {
    let g = Grid2D::new(2.0, 1.0, 30, 30).unwrap();
    for eps in [0.0, 0.25, 1.0] {
        let s = source_op(eps, &g).unwrap();
        let w = omega_op(eps, &g).unwrap();
        for (a, b) in s.real_symbol().unwrap().iter().zip(w.real_symbol().unwrap().iter()) {
            assert!((a + b * b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}

#[test]
fn improved_dispersion_saturates() {
    let mut prev = 0.0;
    for lam in [1.0, 10.0, 100.0, 1e3, 1e4] {
        let w = omega(1.0, lam);
        assert!(w > prev && w < 1.0);
        prev = w;
    }
    assert!((omega(1.0, 1e4) - (1e4f64 / (1.0 + 1e4)).sqrt()).abs() < 1e-15);
    assert!((omega(1.0, 1e4) - 0.99995).abs() < 1e-6);
}

#[test]
fn power_inverse_pair_composes_to_identity() {
    let g = Grid2D::new(PI, 0.5, 16, 16).unwrap();
    let id = power_op(-0.5, &g).compose(&power_op(0.5, &g)).unwrap();
    for z in id.real_symbol().unwrap().iter() {
        assert!((z - 1.0).abs() < 1e-14);
    }
    let ident = DiagonalOperator::identity(&g);
    let f = random_field(&g, Kind::Real, 16, 3);
    assert!(rel_l2(&ident.apply(&f).unwrap(), &f) == 0.0);
}

#[test]
fn operators_reject_foreign_grids() {
    let a = square(8);
    let b = square(8);
    let f = random_field(&b, Kind::Real, 4, 1);
    // equal geometry on a different allocation is accepted
    assert!(yosida_op(4, &a).unwrap().apply(&f).is_ok());
    let c = square(9);
    assert!(yosida_op(4, &c).unwrap().apply(&f).is_err());
    assert!(yosida_op(0, &a).is_err());
    assert!(omega_op(1.5, &a).is_err());
}
