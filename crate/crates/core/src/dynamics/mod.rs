//! Time integration of the coupled system: a Strang splitting (production path)
//! and a Duhamel–Picard fixed-point solver used as an independent oracle.

mod integrate;
mod picard;
mod state;
mod stepper;

pub use integrate::{
    integrate, integrate_observed, integrate_with, Diagnostics, IntegrateOptions, MonitorContext, TrajectoryRecord,
};
pub use picard::{gauss_legendre_nodes, picard_duhamel, picard_duhamel_report, PicardReport};
pub use state::{State, SystemParams};
pub use stepper::{
    dudt, schrodinger_substep, strang_step, strang_step_by, wave_substep, Stepper,
};
