mod common;

use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use sib_core::dynamics::{strang_step, wave_substep, SystemParams};
use sib_core::functionals::{charge, difference_metric, gn_quotient};
use sib_core::operators::{omega, schrodinger_propagator};
use sib_core::spectral::{lp_norm, sobolev_norm, Field, Grid2D, Kind};

use common::*;

fn grid() -> impl Strategy<Value = std::sync::Arc<Grid2D>> {
    (0.5f64..4.0, 0.5f64..4.0, 1usize..20, 1usize..20)
        .prop_map(|(lx, ly, nx, ny)| Grid2D::new(lx, ly, nx, ny).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analyze_inverts_synthesize(g in grid(), seed in any::<u64>()) {
        let f = random_field(&g, Kind::Complex, 20, seed);
        let back = Field::analyze(&f.synthesize(), &g).unwrap();
        prop_assert!(rel_l2(&back.to_complex(), &f) < 1e-12);
    }

    #[test]
    fn synthesize_inverts_analyze(g in grid(), values in proptest::collection::vec(-1.0f64..1.0, 400)) {
        let (nx, ny) = g.shape();
        let s = Array2::from_shape_fn((nx, ny), |(i, j)| Complex64::new(values[i * ny + j], values[399 - i * ny - j]));
        let back = Field::analyze(&s, &g).unwrap().synthesize();
        let num: f64 = (&back - &s).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(num <= 1e-12 * den.max(1e-300));
    }

    #[test]
    fn parseval(g in grid(), seed in any::<u64>()) {
        let f = random_field(&g, Kind::Complex, 20, seed);
        let a = lp_norm(&f, 2.0).unwrap();
        let b = sobolev_norm(&f, 0.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * b);
    }

    #[test]
    fn yosida_symbol_bounds(lambda in 1e-6f64..1e8, n in 1u64..(1 << 20)) {
        let s = 1.0 / (1.0 + lambda / n as f64);
        prop_assert!(s <= 1.0);
        prop_assert!(lambda.sqrt() * s <= (n as f64).sqrt());
        prop_assert!(lambda.sqrt() * s <= lambda.sqrt());
        prop_assert!(lambda * s <= lambda);
    }

    #[test]
    fn improved_dispersion_below_zakharov(lambda in 1e-6f64..1e8, eps in 0.0f64..=1.0) {
        let w = omega(eps, lambda);
        prop_assert!(w <= lambda.sqrt());
        if eps > 0.0 {
            prop_assert!(w <= 1.0 / eps.sqrt());
        }
    }

    #[test]
    fn free_schrodinger_is_unitary(g in grid(), seed in any::<u64>(), t in -100.0f64..100.0) {
        let f = random_field(&g, Kind::Complex, 20, seed);
        let ft = schrodinger_propagator(t, &g).apply(&f).unwrap();
        for s in [0.0, 1.0, 2.0, -1.0] {
            let (a, b) = (sobolev_norm(&ft, s).unwrap(), sobolev_norm(&f, s).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn oscillator_first_integral(g in grid(), seed in any::<u64>(), dt in -1.0f64..1.0, eps in 0.0f64..=1.0) {
        let (v, vt, f) = (
            random_field(&g, Kind::Real, 20, seed),
            random_field(&g, Kind::Real, 20, seed ^ 1),
            random_field(&g, Kind::Real, 20, seed ^ 2),
        );
        let (v1, vt1) = wave_substep(&v, &vt, &f, dt, eps).unwrap();
        let e = |v: &Field, vt: &Field| {
            let w = g.eigenvalues().mapv(|l| omega(eps, l).powi(2));
            let vf = v.axpy(1.0, &f).unwrap();
            let (a, b) = (vf.real_coeffs().unwrap(), vt.real_coeffs().unwrap());
            (&w * &(a * a)).sum() + (b * b).sum()
        };
        let (e0, e1) = (e(&v, &vt), e(&v1, &vt1));
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0);
    }

    #[test]
    fn strang_step_conserves_charge(seed in any::<u64>(), eps in 0.0f64..=1.0, dt in 1e-4f64..1e-2, scale in 0.01f64..2.0) {
        let g = Grid2D::new(std::f64::consts::PI, 2.0, 12, 10).unwrap();
        let s = random_state(&g, 8, scale, seed);
        let p = SystemParams::new(eps, dt).unwrap();
        let s1 = strang_step(&s, &p).unwrap();
        prop_assert!((charge(&s1) - charge(&s)).abs() <= 1e-12 * charge(&s));
    }

    #[test]
    fn gn_quotient_is_scale_invariant(g in grid(), seed in any::<u64>(), c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let f = random_field(&g, Kind::Complex, 20, seed);
        let q = gn_quotient(&f).unwrap();
        prop_assert!((gn_quotient(&f.scale(c)).unwrap() - q).abs() <= 1e-12 * q);
        prop_assert!(q <= 0.4135);
    }

    #[test]
    fn difference_metric_is_a_metric(seed in any::<u64>()) {
        let g = Grid2D::new(1.0, 1.0, 8, 8).unwrap();
        let (a, b, c) = (random_state(&g, 8, 1.0, seed), random_state(&g, 8, 1.0, seed ^ 7), random_state(&g, 8, 1.0, seed ^ 13));
        let d = |x, y| difference_metric(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-14 * d(&a, &b));
        prop_assert!(d(&a, &c) <= (d(&a, &b) + d(&b, &c)) * (1.0 + 1e-14));
    }
}
