//! Simulation and analysis of adiabatic force sensing with the quantum Rabi
//! model.
//!
//! A spin coupled to one bosonic mode is prepared in the ground state of a
//! strong transverse field, which is then ramped down exponentially. A weak
//! force on the oscillator breaks the parity symmetry of the Rabi Hamiltonian
//! and biases the final cat state; the sign and size of the force show up in
//! `<sigma_x>` at the end of the ramp.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! enables parallel parameter sweeps.
//!
//! Module map:
//! - [`hilbert`]: truncated spin ⊗ Fock space, operators and states.
//! - [`linalg`]: dense Hermitian eigensolver and a small CSR type.
//! - [`units`]: physical constants and the kHz convention.
//! - [`model`]: the time-dependent Hamiltonian, ramp, trap and force mapping.
//! - [`ode`]: adaptive Dormand–Prince 5(4) integrator.
//! - [`dynamics`]: Schrödinger and Lindblad evolution along the ramp.
//! - [`spectrum`]: instantaneous spectrum, gaps and adiabatic parameter.
//! - [`demkov`]: the effective two-level model and closed-form metrology.
//! - [`metrology`]: sensing runs, SNR and parameter sweeps.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod demkov;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod linalg;
pub mod metrology;
pub mod model;
pub mod ode;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
