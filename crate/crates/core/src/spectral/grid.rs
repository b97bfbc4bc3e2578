use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{invalid, Result};

/// Rectangle `(0, lx) × (0, ly)` truncated to `nx × ny` sine modes.
///
/// Mode `(k, l)` (1-based) is stored at array index `[k - 1, l - 1]`.
#[derive(Debug, Clone)]
pub struct Grid2D {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
    eigenvalues: Array2<f64>,
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.lx == other.lx && self.ly == other.ly && self.nx == other.nx && self.ny == other.ny
    }
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Arc<Self>> {
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return invalid(format!("rectangle sides must be positive, got {lx} × {ly}"));
        }
        if nx == 0 || ny == 0 {
            return invalid(format!("mode counts must be at least 1, got {nx} × {ny}"));
        }
        let eigenvalues = Array2::from_shape_fn((nx, ny), |(i, j)| {
            let kx = (i + 1) as f64 * PI / lx;
            let ky = (j + 1) as f64 * PI / ly;
            kx * kx + ky * ky
        });
        Ok(Arc::new(Self {
            lx,
            ly,
            nx,
            ny,
            eigenvalues,
        }))
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Dirichlet eigenvalue of `-Δ` for the 1-based mode `(k, l)`.
    pub fn eigenvalue(&self, k: usize, l: usize) -> f64 {
        self.eigenvalues[[k - 1, l - 1]]
    }

    /// Eigenvalue table indexed like coefficient arrays.
    pub fn eigenvalues(&self) -> &Array2<f64> {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[[0, 0]]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[[self.nx - 1, self.ny - 1]]
    }

    /// Interior collocation nodes `x_j = j lx / (nx + 1)`, `j = 1..=nx`.
    pub fn nodes_x(&self) -> Vec<f64> {
        nodes(self.lx, self.nx)
    }

    pub fn nodes_y(&self) -> Vec<f64> {
        nodes(self.ly, self.ny)
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

pub(crate) fn nodes(len: f64, n: usize) -> Vec<f64> {
    let h = len / (n + 1) as f64;
    (1..=n).map(|j| j as f64 * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_on_square() {
        let g = Grid2D::new(PI, PI, 8, 8).unwrap();
        assert!((g.eigenvalue(1, 1) - 2.0).abs() < 1e-14);
        assert!((g.eigenvalue(2, 1) - 5.0).abs() < 1e-14);
        assert_eq!(g.lambda_min(), g.eigenvalue(1, 1));
    }

    #[test]
    fn eigenvalues_on_rectangle() {
        let g = Grid2D::new(2.0 * PI, PI, 4, 4).unwrap();
        assert!((g.eigenvalue(1, 1) - 1.25).abs() < 1e-14);
    }

    #[test]
    fn spectrum_positive_and_monotone() {
        let g = Grid2D::new(1.3, 0.7, 9, 5).unwrap();
        for k in 1..=9 {
            for l in 1..=5 {
                assert!(g.eigenvalue(k, l) > 0.0);
                if k > 1 {
                    assert!(g.eigenvalue(k, l) > g.eigenvalue(k - 1, l));
                }
                if l > 1 {
                    assert!(g.eigenvalue(k, l) > g.eigenvalue(k, l - 1));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Grid2D::new(0.0, 1.0, 4, 4).is_err());
        assert!(Grid2D::new(1.0, -1.0, 4, 4).is_err());
        assert!(Grid2D::new(1.0, 1.0, 0, 4).is_err());
        assert!(Grid2D::new(f64::NAN, 1.0, 4, 4).is_err());
    }

    #[test]
    fn nodes_are_interior() {
        let g = Grid2D::new(PI, 2.0, 3, 4).unwrap();
        let x = g.nodes_x();
        assert_eq!(x.len(), 3);
        assert!((x[0] - PI / 4.0).abs() < 1e-15);
        assert!((g.nodes_y()[3] - 1.6).abs() < 1e-15);
    }
}
