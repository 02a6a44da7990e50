//! Transient magneto-thermal solution: implicit Euler steps of both fields,
//! the working-point (Picard) iteration, quench state, z-mesh adaptation and
//! energies.

mod adapt;
mod model;
mod picard;
mod steps;
mod transient;

pub use adapt::{adapt_z_mesh, elements_to_refine, refinement_indicators, transfer_block, AdaptOptions};
pub use model::{MagneticLinear, MagneticSystem, Q3DModel, ThermalSystem, WorkingPoint};
pub use picard::{
    picard_iterate, picard_timestep, update_quench_state, LinearSolvers, PicardOptions, PicardOutcome, QuenchState,
};
pub use steps::{
    implicit_euler_step, magnetic_energy, magnetic_step, magnetostatic_solve, thermal_energy, thermal_step,
};
pub use transient::{
    initial_state, run_transient, GaussianBump, Q3DField, SimulationState, StepRecord, TransientConfig,
    TransientResult,
};
