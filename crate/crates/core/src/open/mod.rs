//! Open-system dynamics: the dephasing master equation and its reduced
//! closures.

pub mod closures;
pub mod master;

pub use closures::{
    decay_crossing, decoherence_time, diffusion_constant, diffusion_oracle, lorentzian_oracle, lorentzian_width,
    slave_field, strong_decoherence_reduced,
};
pub use master::{decoherence_lattice, evolve_master, evolve_master_on, DephasingConfig, MasterRun};
