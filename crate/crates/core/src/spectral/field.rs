use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::grid::Grid2D;
use super::transform;
use crate::error::{invalid, Error, Result};

/// Scalar kind of a [`Field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Complex,
}

/// Coefficients against the orthonormal eigenbasis
/// `e_{k,l}(x, y) = (2/√(lx ly)) sin(kπx/lx) sin(lπy/ly)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeffs {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

/// A function on the grid's rectangle represented in the sine eigenbasis.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid2D>,
    coeffs: Coeffs,
}

/// Nodal values on the grid's interior collocation nodes, indexed `[j - 1, m - 1]`.
pub type Samples = Array2<Complex64>;

impl Field {
    pub fn zeros(grid: &Arc<Grid2D>, kind: Kind) -> Self {
        let shape = grid.shape();
        let coeffs = match kind {
            Kind::Real => Coeffs::Real(Array2::zeros(shape)),
            Kind::Complex => Coeffs::Complex(Array2::zeros(shape)),
        };
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn from_real(grid: &Arc<Grid2D>, coeffs: Array2<f64>) -> Result<Self> {
        check_shape(grid, coeffs.dim())?;
        Ok(Self {
            grid: grid.clone(),
            coeffs: Coeffs::Real(coeffs),
        })
    }

    pub fn from_complex(grid: &Arc<Grid2D>, coeffs: Array2<Complex64>) -> Result<Self> {
        check_shape(grid, coeffs.dim())?;
        Ok(Self {
            grid: grid.clone(),
            coeffs: Coeffs::Complex(coeffs),
        })
    }

    /// Single basis element `amp · e_{k,l}` (1-based mode).
    pub fn mode(grid: &Arc<Grid2D>, kind: Kind, k: usize, l: usize, amp: Complex64) -> Result<Self> {
        if k == 0 || l == 0 || k > grid.nx() || l > grid.ny() {
            return invalid(format!("mode ({k}, {l}) outside {}×{} grid", grid.nx(), grid.ny()));
        }
        let mut f = Self::zeros(grid, kind);
        match &mut f.coeffs {
            Coeffs::Real(c) => {
                if amp.im != 0.0 {
                    return invalid("complex amplitude on a real field");
                }
                c[[k - 1, l - 1]] = amp.re;
            }
            Coeffs::Complex(c) => c[[k - 1, l - 1]] = amp,
        }
        Ok(f)
    }

    /// Project nodal samples onto the eigenbasis (DST-I with orthonormal scaling).
    /// Real-kind output when every sample is real.
    pub fn analyze(samples: &Samples, grid: &Arc<Grid2D>) -> Result<Self> {
        if samples.dim() != grid.shape() {
            return invalid(format!(
                "sample table is {:?}, grid nodes are {:?}",
                samples.dim(),
                grid.shape()
            ));
        }
        let c = transform::analyze_padded(samples, grid);
        let real = samples.iter().all(|z| z.im == 0.0);
        Ok(Self::from_coeff_array(grid, c, if real { Kind::Real } else { Kind::Complex }))
    }

    /// Analyze real nodal values.
    pub fn analyze_real(samples: &Array2<f64>, grid: &Arc<Grid2D>) -> Result<Self> {
        Self::analyze(&samples.mapv(|x| Complex64::new(x, 0.0)), grid)
    }

    pub fn synthesize(&self) -> Samples {
        self.synthesize_at(self.grid.nx(), self.grid.ny())
    }

    /// Values at the interior nodes of an `mx × my` refinement (zero-padded synthesis).
    pub(crate) fn synthesize_at(&self, mx: usize, my: usize) -> Samples {
        transform::synthesize_padded(&self.complex_coeffs(), &self.grid, mx, my)
    }

    /// Build from a complex coefficient array produced by a transform,
    /// discarding imaginary round-off for real kinds.
    pub(crate) fn from_coeff_array(grid: &Arc<Grid2D>, c: Array2<Complex64>, kind: Kind) -> Self {
        let coeffs = match kind {
            Kind::Real => Coeffs::Real(c.mapv(|z| z.re)),
            Kind::Complex => Coeffs::Complex(c),
        };
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn kind(&self) -> Kind {
        match self.coeffs {
            Coeffs::Real(_) => Kind::Real,
            Coeffs::Complex(_) => Kind::Complex,
        }
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    pub fn real_coeffs(&self) -> Option<&Array2<f64>> {
        match &self.coeffs {
            Coeffs::Real(c) => Some(c),
            Coeffs::Complex(_) => None,
        }
    }

    pub fn complex_coeffs(&self) -> Array2<Complex64> {
        match &self.coeffs {
            Coeffs::Real(c) => c.mapv(|x| Complex64::new(x, 0.0)),
            Coeffs::Complex(c) => c.clone(),
        }
    }

    /// Coefficient of the 1-based mode `(k, l)`.
    pub fn coeff(&self, k: usize, l: usize) -> Complex64 {
        match &self.coeffs {
            Coeffs::Real(c) => Complex64::new(c[[k - 1, l - 1]], 0.0),
            Coeffs::Complex(c) => c[[k - 1, l - 1]],
        }
    }

    pub fn to_complex(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: Coeffs::Complex(self.complex_coeffs()),
        }
    }

    /// Real part as a real-kind field.
    pub fn re(&self) -> Self {
        match &self.coeffs {
            Coeffs::Real(_) => self.clone(),
            Coeffs::Complex(c) => Self {
                grid: self.grid.clone(),
                coeffs: Coeffs::Real(c.mapv(|z| z.re)),
            },
        }
    }

    pub fn conj(&self) -> Self {
        match &self.coeffs {
            Coeffs::Real(_) => self.clone(),
            Coeffs::Complex(c) => Self {
                grid: self.grid.clone(),
                coeffs: Coeffs::Complex(c.mapv(|z| z.conj())),
            },
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        let coeffs = match &self.coeffs {
            Coeffs::Real(c) => Coeffs::Real(c * a),
            Coeffs::Complex(c) => Coeffs::Complex(c.mapv(|z| z * a)),
        };
        Self {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    pub fn scale_complex(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            coeffs: Coeffs::Complex(self.complex_coeffs().mapv(|z| z * a)),
        }
    }

    /// `self + a · other`; promotes to complex if either side is complex.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = match (&self.coeffs, &other.coeffs) {
            (Coeffs::Real(x), Coeffs::Real(y)) => Coeffs::Real(x + &(y * a)),
            _ => {
                let mut x = self.complex_coeffs();
                let y = other.complex_coeffs();
                Zip::from(&mut x).and(&y).for_each(|x, &y| *x += y * a);
                Coeffs::Complex(x)
            }
        };
        Ok(Self {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `Σ |c(k,l)|²`, the squared L² norm.
    pub fn norm_sq(&self) -> f64 {
        self.weighted_norm_sq(|_| 1.0)
    }

    /// `Σ w(λ) |c(k,l)|²`.
    pub fn weighted_norm_sq(&self, w: impl Fn(f64) -> f64) -> f64 {
        let lam = self.grid.eigenvalues();
        match &self.coeffs {
            Coeffs::Real(c) => Zip::from(c).and(lam).fold(0.0, |acc, &c, &l| acc + w(l) * c * c),
            Coeffs::Complex(c) => {
                Zip::from(c).and(lam).fold(0.0, |acc, &c, &l| acc + w(l) * c.norm_sqr())
            }
        }
    }

    /// L² inner product `∫ self · conj(other)`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let x = self.complex_coeffs();
        let y = other.complex_coeffs();
        Ok(Zip::from(&x)
            .and(&y)
            .fold(Complex64::default(), |acc, &a, &b| acc + a * b.conj()))
    }

    pub fn is_finite(&self) -> bool {
        match &self.coeffs {
            Coeffs::Real(c) => c.iter().all(|x| x.is_finite()),
            Coeffs::Complex(c) => c.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.coeffs {
            Coeffs::Real(c) => c.iter().all(|&x| x == 0.0),
            Coeffs::Complex(c) => c.iter().all(|z| z.re == 0.0 && z.im == 0.0),
        }
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}×{} on {}×{} vs {}×{} on {}×{}",
                self.grid.nx(),
                self.grid.ny(),
                self.grid.lx(),
                self.grid.ly(),
                other.grid.nx(),
                other.grid.ny(),
                other.grid.lx(),
                other.grid.ly()
            )))
        }
    }
}

fn check_shape(grid: &Grid2D, dim: (usize, usize)) -> Result<()> {
    if dim != grid.shape() {
        return invalid(format!("coefficient table is {dim:?}, grid has {:?} modes", grid.shape()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn sinsin(grid: &Arc<Grid2D>, kx: f64, ky: f64) -> Array2<f64> {
        let x = grid.nodes_x();
        let y = grid.nodes_y();
        Array2::from_shape_fn(grid.shape(), |(i, j)| (kx * x[i]).sin() * (ky * y[j]).sin())
    }

    #[test]
    fn analyze_single_mode() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        let f = Field::analyze_real(&sinsin(&g, 1.0, 1.0), &g).unwrap();
        assert_eq!(f.kind(), Kind::Real);
        assert!((f.coeff(1, 1).re - PI / 2.0).abs() < 1e-13);
        assert!((f.norm_sq().sqrt() - PI / 2.0).abs() < 1e-13);

        let f = Field::analyze_real(&sinsin(&g, 2.0, 1.0), &g).unwrap();
        assert!((f.coeff(2, 1).re - PI / 2.0).abs() < 1e-13);
        assert!((f.norm_sq() - PI * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_round_trips() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        let f = Field::analyze_real(&Array2::zeros((8, 8)), &g).unwrap();
        assert!(f.is_zero());
        assert!(f.synthesize().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn unit_coefficient_synthesizes_scaled_sine() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        let f = Field::mode(&g, Kind::Real, 1, 1, Complex64::new(1.0, 0.0)).unwrap();
        let s = f.synthesize();
        let expect = sinsin(&g, 1.0, 1.0) * (2.0 / PI);
        for (a, b) in s.iter().zip(expect.iter()) {
            assert!((a.re - b).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        assert!(Field::analyze_real(&Array2::zeros((7, 8)), &g).is_err());
        assert!(Field::from_real(&g, Array2::zeros((8, 9))).is_err());
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = Field::zeros(&Grid2D::new(PI, PI, 8, 8).unwrap(), Kind::Real);
        let b = Field::zeros(&Grid2D::new(PI, PI, 8, 4).unwrap(), Kind::Real);
        assert!(matches!(a.axpy(1.0, &b), Err(Error::GridMismatch(_))));
        // equal-by-value grids are compatible
        let c = Field::zeros(&Grid2D::new(PI, PI, 8, 8).unwrap(), Kind::Real);
        assert!(a.axpy(1.0, &c).is_ok());
    }
}
