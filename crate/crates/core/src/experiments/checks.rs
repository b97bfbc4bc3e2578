//! Algebraic checks of the operator calculus: the Yosida symbol inequalities,
//! the `(1-Δ)^{1/2}(-Δ)^{-1/2}` norm identity and propagator unitarity.

use std::sync::Arc;

use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::CheckConfig;
use super::io::Assertion;
use crate::error::Result;
use crate::operators::{bessel_op, omega, power_op, schrodinger_propagator, source_op, wave_propagator, yosida_op};
use crate::spectral::{Field, Grid2D};

/// Failures are listed individually up to this many per check.
const MAX_LISTED: usize = 10;

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct CheckReport {
    pub assertions: Vec<Assertion>,
    /// Human-readable descriptions of violating modes.
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Largest violation `lhs - rhs` of an inequality `lhs ≤ rhs` over modes.
struct Inequality {
    name: &'static str,
    worst: f64,
    failures: usize,
    listed: Vec<String>,
}

impl Inequality {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            worst: f64::NEG_INFINITY,
            failures: 0,
            listed: Vec::new(),
        }
    }

    fn check(&mut self, lhs: f64, rhs: f64, describe: impl FnOnce() -> String) {
        let gap = lhs - rhs;
        self.worst = self.worst.max(gap);
        if !(lhs <= rhs) {
            self.failures += 1;
            if self.listed.len() < MAX_LISTED {
                self.listed.push(format!("{}: {} (lhs {lhs:e} > rhs {rhs:e})", self.name, describe()));
            }
        }
    }

    fn finish(self, report: &mut CheckReport) {
        let mut a = Assertion::at_most(self.name, self.worst, 0.0);
        a.passed = self.failures == 0;
        if self.failures > 0 {
            a.detail = format!("{} violating cases", self.failures);
        }
        report.assertions.push(a);
        report.violations.extend(self.listed);
    }
}

/// Yosida symbol, or a corrupted one when the fault hook is set.
fn yosida_symbol(grid: &Arc<Grid2D>, n: u64, fault: bool) -> Result<Array2<f64>> {
    let s = yosida_op(n, grid)?.real_symbol().expect("real symbol").clone();
    Ok(if fault { s.mapv(|x| x * 1.1) } else { s })
}

fn random_field(grid: &Arc<Grid2D>, rng: &mut ChaCha8Rng) -> Result<Field> {
    let c = Array2::from_shape_simple_fn(grid.shape(), || rng.random_range(-1.0..1.0));
    Field::from_real(grid, c)
}

pub fn run_checks(grid: &Arc<Grid2D>, cfg: &CheckConfig, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let lam = grid.eigenvalues();
    let ns: Vec<u64> = (0..=cfg.max_log2_n).map(|p| 1u64 << p).collect();

    let mut ineq = [
        Inequality::new("yosida_bounded"),
        Inequality::new("yosida_gradient_by_sqrt_n"),
        Inequality::new("yosida_gradient_contractive"),
        Inequality::new("yosida_laplacian_contractive"),
    ];
    for &n in &ns {
        let sigma = yosida_symbol(grid, n, cfg.inject_fault)?;
        let nf = n as f64;
        for ((i, j), &s) in sigma.indexed_iter() {
            let l = lam[[i, j]];
            let at = || format!("n={n} mode=({}, {}) λ={l} σ={s}", i + 1, j + 1);
            ineq[0].check(s, 1.0, at);
            ineq[1].check(l.sqrt() * s, nf.sqrt(), at);
            ineq[2].check(l.sqrt() * s, l.sqrt(), at);
            ineq[3].check(l * s, l, at);
        }
    }
    for q in ineq {
        q.finish(&mut report);
    }

    // strong convergence J_n f → f, monotone and within λ_max/n
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut monotone = Inequality::new("yosida_error_nonincreasing");
    let mut bounded = Inequality::new("yosida_error_bound");
    let fields: Vec<Field> = (0..cfg.random_fields.max(1))
        .map(|_| random_field(grid, &mut rng))
        .collect::<Result<_>>()?;
    for (idx, f) in fields.iter().take(10).enumerate() {
        let norm = f.norm_sq().sqrt();
        let mut prev = f64::INFINITY;
        for &n in &ns {
            let sigma = yosida_symbol(grid, n, cfg.inject_fault)?;
            let jf = Field::from_real(grid, &sigma * f.real_coeffs().expect("real"))?;
            let err = jf.sub(f)?.norm_sq().sqrt();
            monotone.check(err, prev, || format!("field {idx} n={n}"));
            bounded.check(err, grid.lambda_max() / n as f64 * norm, || format!("field {idx} n={n}"));
            prev = err;
        }
    }
    monotone.finish(&mut report);
    bounded.finish(&mut report);

    // ‖(1-Δ)^{1/2}(-Δ)^{-1/2} f‖² = ‖f‖² + ‖(-Δ)^{-1/2} f‖²
    let op = bessel_op(0.5, grid).compose(&power_op(-0.5, grid))?;
    let inv = power_op(-0.5, grid);
    let mut worst: f64 = 0.0;
    for f in &fields {
        let lhs = op.apply(f)?.norm_sq();
        let rhs = f.norm_sq() + inv.apply(f)?.norm_sq();
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    report
        .assertions
        .push(Assertion::at_most("norm_identity_relative_residual", worst, 1e-10));

    // propagators
    let mut unit = 0.0f64;
    let mut group = 0.0f64;
    for &t in &cfg.times {
        let u = schrodinger_propagator(t, grid);
        let back = schrodinger_propagator(-t, grid);
        for (k, l) in modes(grid) {
            unit = unit.max((u.at(k, l).norm() - 1.0).abs());
            group = group.max((u.at(k, l) * back.at(k, l) - 1.0).norm());
        }
    }
    report.assertions.push(Assertion::at_most("schrodinger_unitary", unit, 1e-14));
    report.assertions.push(Assertion::at_most("schrodinger_group", group, 1e-14));
    let mut trig = 0.0f64;
    let mut source = 0.0f64;
    for &eps in &cfg.eps_list {
        let s = source_op(eps, grid)?;
        for (k, l) in modes(grid) {
            let w = omega(eps, grid.eigenvalue(k, l));
            source = source.max((s.at(k, l).re + w * w).abs() / (w * w));
        }
        for &t in &cfg.times {
            let (c, sn) = wave_propagator(t, eps, grid)?;
            for (k, l) in modes(grid) {
                let w = omega(eps, grid.eigenvalue(k, l));
                let (c, sn) = (c.at(k, l).re, sn.at(k, l).re);
                trig = trig.max((c * c + w * w * sn * sn - 1.0).abs());
            }
        }
    }
    report.assertions.push(Assertion::at_most("wave_energy_identity", trig, 1e-14));
    report.assertions.push(Assertion::at_most("source_is_minus_omega_squared", source, 1e-14));
    Ok(report)
}

fn modes(grid: &Grid2D) -> impl Iterator<Item = (usize, usize)> {
    let (nx, ny) = grid.shape();
    (1..=nx).flat_map(move |k| (1..=ny).map(move |l| (k, l)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn suite_passes_and_fault_is_caught() {
        let g = Grid2D::new(PI, 2.0, 12, 9).unwrap();
        let cfg = CheckConfig {
            random_fields: 5,
            ..CheckConfig::default()
        };
        let ok = run_checks(&g, &cfg, 1).unwrap();
        assert!(ok.passed(), "{:?}", ok.assertions);
        let bad = run_checks(&g, &CheckConfig { inject_fault: true, ..cfg }, 1).unwrap();
        assert!(!bad.passed());
        assert!(bad.violations.iter().any(|v| v.contains("yosida_bounded") && v.contains("mode=")));
    }
}
