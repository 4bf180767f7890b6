//! Simulation and analysis toolkit for a two-qubit device whose qubits talk
//! to each other through two fixed-frequency coplanar resonators.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: truncated tensor-product Fock spaces, ladder operators and a
//!   Hermitian eigensolver facade.
//! * [`device`]: device parameters, the four-mode Hamiltonian, the
//!   perturbative effective qubit-qubit coupling and its zero crossing.
//! * [`spectroscopy`]: exact-diagonalization sweeps, dressed-state labels and
//!   avoided-crossing gaps.
//! * [`dynamics`]: Lindblad evolution under staged flux schedules and the
//!   vacuum-Rabi chevron.
//! * [`fitting`]: decay, damped-cosine and chevron-hyperbola fits.
//!
//! Frequencies cross every public boundary as linear GHz (couplings and
//! detunings as MHz where noted) and times as ns. Internally Hamiltonians are
//! stored in angular units, rad/ns.

pub mod device;
pub mod dynamics;
mod error;
pub mod fitting;
pub mod fock;
pub mod spectroscopy;
pub mod units;

pub use error::{Error, Result};
