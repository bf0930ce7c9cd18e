//! Reconstruction of dipolar rotor-chain ground states from synthetic
//! projective measurements with multinomial restricted Boltzmann machines.
//!
//! The crate covers the whole pipeline: the truncated rotor basis
//! ([`basis`]), the chain Hamiltonian ([`hamiltonian`]), exact ground states
//! ([`eigensolver`]), sign-structure diagnostics ([`signs`]), exact sampling
//! of measurement data ([`sampling`]), RBM training ([`rbm`]), Monte Carlo
//! energy estimators ([`estimators`]) and the experiment drivers behind the
//! `rotor-recon` binary ([`experiments`]).

pub mod basis;
pub mod eigensolver;
pub mod error;
pub mod hamiltonian;
pub mod operator;
pub mod rng;
pub mod rbm;
pub mod sampling;
pub mod signs;
pub mod estimators;
pub mod experiments;

pub use error::{Error, Result};
