//! Scalar functionals: conserved quantities, modified energies, envelope bounds
//! and the Gagliardo–Nirenberg constant.

mod energy;
mod envelope;
mod gn;

pub use energy::{
    charge, difference_metric, energy, energy_regularized, h1_l2_l2_distance, h2_h1_h1_norm,
    modified_energy, quadratic_energy, DataNorms, ModifiedEnergyForm,
};
pub use envelope::{
    envelope_constants, envelope_h1, envelope_h1_lhs, envelope_small, envelope_small_lhs,
    smallness_holds, smallness_threshold, EnvelopeConstants,
};
pub use gn::{estimate_gn_constant, estimate_gn_constant_from, gaussian_bump, gn_quotient, GnEstimate};

