//! Diagonal functional calculus of the Dirichlet Laplacian.
//!
//! Every operator here is a multiplier `σ(λ)` on the eigenbasis coefficients.
//! Since the Dirichlet spectrum is bounded below by `λ(1,1) > 0`, negative
//! powers and `ω⁻¹` need no special casing.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::spectral::{Coeffs, Field, Grid2D};

#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// A spectral multiplier on one grid.
#[derive(Clone)]
pub struct DiagonalOperator {
    grid: Arc<Grid2D>,
    symbol: Symbol,
    tag: String,
}

impl fmt::Debug for DiagonalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalOperator")
            .field("tag", &self.tag)
            .field("shape", &self.grid.shape())
            .finish()
    }
}

impl DiagonalOperator {
    /// Real multiplier `σ = f(λ)`.
    pub fn from_fn(grid: &Arc<Grid2D>, tag: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            symbol: Symbol::Real(grid.eigenvalues().mapv(f)),
            tag: tag.into(),
        }
    }

    pub fn from_complex_fn(
        grid: &Arc<Grid2D>,
        tag: impl Into<String>,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        Self {
            grid: grid.clone(),
            symbol: Symbol::Complex(grid.eigenvalues().mapv(f)),
            tag: tag.into(),
        }
    }

    pub fn from_symbol(grid: &Arc<Grid2D>, tag: impl Into<String>, symbol: Symbol) -> Result<Self> {
        let dim = match &symbol {
            Symbol::Real(s) => s.dim(),
            Symbol::Complex(s) => s.dim(),
        };
        if dim != grid.shape() {
            return invalid(format!("symbol table {dim:?} does not cover grid modes {:?}", grid.shape()));
        }
        Ok(Self {
            grid: grid.clone(),
            symbol,
            tag: tag.into(),
        })
    }

    pub fn identity(grid: &Arc<Grid2D>) -> Self {
        Self::from_fn(grid, "I", |_| 1.0)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn real_symbol(&self) -> Option<&Array2<f64>> {
        match &self.symbol {
            Symbol::Real(s) => Some(s),
            Symbol::Complex(_) => None,
        }
    }

    /// Symbol value at the 1-based mode `(k, l)`.
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        match &self.symbol {
            Symbol::Real(s) => Complex64::new(s[[k - 1, l - 1]], 0.0),
            Symbol::Complex(s) => s[[k - 1, l - 1]],
        }
    }

    fn complex_symbol(&self) -> Array2<Complex64> {
        match &self.symbol {
            Symbol::Real(s) => s.mapv(|x| Complex64::new(x, 0.0)),
            Symbol::Complex(s) => s.clone(),
        }
    }

    /// `self ∘ other`: pointwise product of symbols.
    pub fn compose(&self, other: &DiagonalOperator) -> Result<Self> {
        if *self.grid != *other.grid {
            return Err(crate::Error::GridMismatch(format!("composing {} with {}", self.tag, other.tag)));
        }
        let symbol = match (&self.symbol, &other.symbol) {
            (Symbol::Real(a), Symbol::Real(b)) => Symbol::Real(a * b),
            _ => Symbol::Complex(self.complex_symbol() * other.complex_symbol()),
        };
        Ok(Self {
            grid: self.grid.clone(),
            symbol,
            tag: format!("{}∘{}", self.tag, other.tag),
        })
    }

    /// `c'(k,l) = σ(k,l) c(k,l)`. A real field hit by a complex symbol comes
    /// back complex.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        if *self.grid != **f.grid() {
            return Err(crate::Error::GridMismatch(format!(
                "operator {} on {:?} applied to field on {:?}",
                self.tag,
                self.grid.shape(),
                f.grid().shape()
            )));
        }
        match (&self.symbol, f.coeffs()) {
            (Symbol::Real(s), Coeffs::Real(c)) => Field::from_real(f.grid(), s * c),
            (Symbol::Real(s), Coeffs::Complex(c)) => {
                let mut out = c.clone();
                Zip::from(&mut out).and(s).for_each(|z, &s| *z *= s);
                Field::from_complex(f.grid(), out)
            }
            (Symbol::Complex(s), _) => {
                let mut out = f.complex_coeffs();
                Zip::from(&mut out).and(s).for_each(|z, &s| *z *= s);
                Field::from_complex(f.grid(), out)
            }
        }
    }
}

/// Yosida approximation of the identity `J_n = (I - Δ/n)⁻¹`, symbol `1 / (1 + λ/n)`.
pub fn yosida_op(n: u64, grid: &Arc<Grid2D>) -> Result<DiagonalOperator> {
    if n < 1 {
        return invalid("Yosida index must be ≥ 1");
    }
    let nf = n as f64;
    Ok(DiagonalOperator::from_fn(grid, format!("J_{n}"), move |l| {
        1.0 / (1.0 + l / nf)
    }))
}

/// `(-Δ)^s`, symbol `λ^s`.
pub fn power_op(s: f64, grid: &Arc<Grid2D>) -> DiagonalOperator {
    DiagonalOperator::from_fn(grid, format!("(-Δ)^{s}"), move |l| l.powf(s))
}

/// `(1 - Δ)^s`, symbol `(1 + λ)^s`.
pub fn bessel_op(s: f64, grid: &Arc<Grid2D>) -> DiagonalOperator {
    DiagonalOperator::from_fn(grid, format!("(1-Δ)^{s}"), move |l| (1.0 + l).powf(s))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return invalid(format!("ε must lie in [0, 1], got {eps}"));
    }
    Ok(())
}

/// Ion-sound dispersion `ω_ε(λ) = sqrt(λ / (1 + ελ))`.
pub fn omega(eps: f64, lambda: f64) -> f64 {
    (lambda / (1.0 + eps * lambda)).sqrt()
}

/// `ω_ε = (-Δ)^{1/2} (1 - εΔ)^{-1/2}`; `ε = 1` is the improved-Boussinesq
/// dispersion, `ε = 0` the Zakharov one.
pub fn omega_op(eps: f64, grid: &Arc<Grid2D>) -> Result<DiagonalOperator> {
    check_eps(eps)?;
    Ok(DiagonalOperator::from_fn(grid, format!("ω_{eps}"), move |l| omega(eps, l)))
}

/// Free Schrödinger group `U(t) = exp(itΔ)`, symbol `e^{-iλt}`.
pub fn schrodinger_propagator(t: f64, grid: &Arc<Grid2D>) -> DiagonalOperator {
    DiagonalOperator::from_complex_fn(grid, format!("U({t})"), move |l| {
        Complex64::from_polar(1.0, -l * t)
    })
}

/// `(cos tω_ε, ω_ε⁻¹ sin tω_ε)`, the `K̇(t)` and `K(t)` kernels of the ion-sound equation.
pub fn wave_propagator(
    t: f64,
    eps: f64,
    grid: &Arc<Grid2D>,
) -> Result<(DiagonalOperator, DiagonalOperator)> {
    check_eps(eps)?;
    let cos_part = DiagonalOperator::from_fn(grid, format!("cos({t}ω_{eps})"), move |l| {
        (t * omega(eps, l)).cos()
    });
    let sinc_part = DiagonalOperator::from_fn(grid, format!("sin({t}ω_{eps})/ω_{eps}"), move |l| {
        let w = omega(eps, l);
        (t * w).sin() / w
    });
    Ok((cos_part, sinc_part))
}

/// `(1 - εΔ)⁻¹Δ`, symbol `-λ/(1 + ελ) = -ω_ε²`; maps `v + |u|²` to `∂t² v`.
pub fn source_op(eps: f64, grid: &Arc<Grid2D>) -> Result<DiagonalOperator> {
    check_eps(eps)?;
    Ok(DiagonalOperator::from_fn(grid, format!("S_{eps}"), move |l| -l / (1.0 + eps * l)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::Kind;

    fn grid() -> Arc<Grid2D> {
        Grid2D::new(PI, PI, 8, 8).unwrap()
    }

    #[test]
    fn yosida_symbol_values() {
        let g = grid();
        let j2 = yosida_op(2, &g).unwrap();
        assert!((j2.at(1, 1).re - 0.5).abs() < 1e-15);
        let big = yosida_op(1_000_000, &g).unwrap();
        assert!((big.at(1, 1).re - 1.0 / (1.0 + 2e-6)).abs() < 1e-15);
        assert!(yosida_op(0, &g).is_err());
    }

    #[test]
    fn yosida_gradient_bound_at_lambda_100() {
        // √λ σ at n = 1, λ = 100 is 10/101 ≤ √n
        let v = 100f64.sqrt() / (1.0 + 100.0);
        assert!((v - 10.0 / 101.0).abs() < 1e-15 && v <= 1.0);
        let g = Grid2D::new(PI, PI, 10, 10).unwrap();
        let j1 = yosida_op(1, &g).unwrap();
        let s = j1.real_symbol().unwrap();
        for (&l, &sig) in g.eigenvalues().iter().zip(s.iter()) {
            assert!(l.sqrt() * sig <= 1.0);
        }
    }

    #[test]
    fn power_symbols() {
        let g = grid();
        assert!(power_op(0.0, &g).real_symbol().unwrap().iter().all(|&x| x == 1.0));
        assert!((power_op(0.5, &g).at(1, 1).re - 2f64.sqrt()).abs() < 1e-15);
        let id = power_op(-0.5, &g).compose(&power_op(0.5, &g)).unwrap();
        assert!(id.real_symbol().unwrap().iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn omega_symbols() {
        let g = grid();
        assert!((omega_op(0.0, &g).unwrap().at(1, 1).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((omega_op(1.0, &g).unwrap().at(1, 1).re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((omega(1.0, 1e4) - (1e4f64 / (1.0 + 1e4)).sqrt()).abs() < 1e-15);
        assert!((omega(1.0, 1e4) - 0.99995).abs() < 1e-6);
        // bounded dispersion: monotone increase towards 1
        let mut prev = 0.0;
        for l in [1.0, 10.0, 100.0, 1e3, 1e4, 1e6] {
            let w = omega(1.0, l);
            assert!(w > prev && w < 1.0);
            prev = w;
        }
        assert!(omega_op(1.5, &g).is_err());
        assert!(omega_op(-0.1, &g).is_err());
    }

    #[test]
    fn schrodinger_group() {
        let g = grid();
        let u0 = schrodinger_propagator(0.0, &g);
        assert!(u0.at(3, 2) == Complex64::new(1.0, 0.0));
        let u = schrodinger_propagator(PI / 2.0, &g);
        assert!((u.at(1, 1) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let id = schrodinger_propagator(0.37, &g)
            .compose(&schrodinger_propagator(-0.37, &g))
            .unwrap();
        for k in 1..=8 {
            for l in 1..=8 {
                assert!((id.at(k, l) - 1.0).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn wave_kernels() {
        let g = grid();
        let (c, s) = wave_propagator(0.0, 0.3, &g).unwrap();
        assert!(c.real_symbol().unwrap().iter().all(|&x| x == 1.0));
        assert!(s.real_symbol().unwrap().iter().all(|&x| x == 0.0));
        // ε = 0 with λ ≈ 4: on a very long strip mode (2, 1) has λ = 4, so ω = 2 and t = π is a full period
        let g2 = Grid2D::new(PI, 1e9, 2, 1).unwrap();
        let (c, s) = wave_propagator(PI, 0.0, &g2).unwrap();
        let lam = g2.eigenvalue(2, 1);
        assert!((lam - 4.0).abs() < 1e-12);
        assert!((c.at(2, 1).re - 1.0).abs() < 1e-10);
        assert!(s.at(2, 1).re.abs() < 1e-10);
        for t in [0.1, 1.0, 7.3, -2.0] {
            for eps in [0.0, 0.5, 1.0] {
                let (c, s) = wave_propagator(t, eps, &g).unwrap();
                let w = omega_op(eps, &g).unwrap();
                for k in 1..=8 {
                    for l in 1..=8 {
                        let (cv, sv, wv) = (c.at(k, l).re, s.at(k, l).re, w.at(k, l).re);
                        assert!((cv * cv + wv * wv * sv * sv - 1.0).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn source_symbols() {
        let g = grid();
        assert!((source_op(0.0, &g).unwrap().at(1, 1).re + 2.0).abs() < 1e-15);
        assert!((source_op(1.0, &g).unwrap().at(1, 1).re + 2.0 / 3.0).abs() < 1e-15);
        for eps in [0.0, 0.25, 1.0] {
            let s = source_op(eps, &g).unwrap();
            let w = omega_op(eps, &g).unwrap();
            for k in 1..=8 {
                for l in 1..=8 {
                    let sv = s.at(k, l).re;
                    assert!((sv + w.at(k, l).re.powi(2)).abs() < 1e-14 * sv.abs());
                }
            }
        }
    }

    #[test]
    fn apply_scales_coefficients() {
        let g = grid();
        let f = Field::mode(&g, Kind::Real, 1, 1, Complex64::new(PI / 2.0, 0.0)).unwrap();
        let same = DiagonalOperator::identity(&g).apply(&f).unwrap();
        assert_eq!(same.coeff(1, 1), f.coeff(1, 1));
        let half = yosida_op(2, &g).unwrap().apply(&f).unwrap();
        assert!((half.coeff(1, 1).re - PI / 4.0).abs() < 1e-15);
        assert_eq!(half.kind(), Kind::Real);
        let promoted = schrodinger_propagator(0.1, &g).apply(&f).unwrap();
        assert_eq!(promoted.kind(), Kind::Complex);
        let other = Field::zeros(&Grid2D::new(PI, PI, 4, 4).unwrap(), Kind::Real);
        assert!(half_apply_err(&g, &other));
    }

    fn half_apply_err(g: &Arc<Grid2D>, f: &Field) -> bool {
        yosida_op(2, g).unwrap().apply(f).is_err()
    }
}
