//! Pseudospectral simulation of the Schrödinger–improved-Boussinesq family
//!
//! ```text
//! i ∂t u + Δu = v u
//! ∂t² v − Δv − ε Δ ∂t² v = Δ|u|²
//! ```
//!
//! on a rectangle with homogeneous Dirichlet boundary conditions. `ε = 1` is the
//! improved-Boussinesq coupling and `ε = 0` is the Zakharov system. Every field is
//! stored against the orthonormal double-sine eigenbasis of the Dirichlet
//! Laplacian, so all linear operators are diagonal multipliers.
//!
//! Layout:
//! - [`spectral`]: grids, fields, sine transforms, dealiased products, norms.
//! - [`operators`]: diagonal functional calculus of −Δ.
//! - [`dynamics`]: Strang splitting stepper and a Duhamel–Picard oracle.
//! - [`functionals`]: conserved quantities, envelope bounds, Gagliardo–Nirenberg constant.
//! - [`experiments`]: configuration, output files and the batch commands behind the `sib` binary.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod operators;
pub mod spectral;
mod serde_nan;

pub use error::{Error, Result};
pub use num_complex::Complex64;
