//! Discrete functions on a Dirichlet rectangle in the double-sine eigenbasis.

mod field;
mod grid;
mod ops;
pub(crate) mod transform;

pub use field::{Coeffs, Field, Kind, Samples};
pub use grid::Grid2D;
pub(crate) use ops::cube_real;
pub use ops::{
    abs_sq, dealias_nodes, h1_norm, lp_norm, product, product_collocated, product_dealiased,
    sobolev_norm, SOBOLEV_EXPONENTS,
};

/// Build a grid; see [`Grid2D::new`].
pub fn make_grid(lx: f64, ly: f64, nx: usize, ny: usize) -> crate::Result<std::sync::Arc<Grid2D>> {
    Grid2D::new(lx, ly, nx, ny)
}
