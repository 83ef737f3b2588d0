//! Quantum dynamics of a single kink (domain wall) in a transverse-field
//! Ising chain.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * the one-kink tight-binding model ([`lattice`], [`hamiltonian`]),
//! * closed and root-found bound states of single and double weak-link traps
//!   ([`bound_states`]),
//! * exact unitary propagation through an eigenbasis, a Bessel kernel or a
//!   split-step integrator for time-dependent traps ([`unitary`]),
//! * interference-pattern analysis ([`fringes`]),
//! * dephasing master-equation evolution together with its strong- and
//!   weak-decoherence closures ([`open`]),
//! * a brute-force full Hilbert space simulator of the microscopic chain used
//!   to validate the one-kink reduction ([`spin_chain`]).
//!
//! Units: ħ = 1 and energies are measured in units of the Ising coupling.
//! The hopping strength `g` is the transverse field.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod bound_states;
pub mod distribution;
pub mod error;
pub mod fringes;
pub mod hamiltonian;
pub mod lattice;
pub mod linalg;
pub mod open;
pub mod spin_chain;
pub mod state;
pub mod unitary;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, Tridiagonal};
pub use lattice::{Boundary, LatticeSpec};
pub use state::{KinkDensityMatrix, KinkState, ProbabilityTrace, TraceMetadata};
