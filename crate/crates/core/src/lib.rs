//! Steady-state energy-loss simulator for periodically driven transmon
//! qubits under the Floquet–Markov formalism, with radiative, dielectric,
//! and quasiparticle-generation baths, and the resonator-side bookkeeping
//! needed to compare the computed loss against measured dissipation.

extern crate blas_src;

pub mod charge;
pub mod constants;
pub mod dissipation;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod resonator;
pub mod spectra;

pub use error::{Error, Result};
