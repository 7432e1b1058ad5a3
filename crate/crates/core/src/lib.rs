//! Disordered qubit lattice: band-projected exact diagonalization, level
//! statistics and Fermi-Dirac thermalization diagnostics.

pub mod eigensolve;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod output;
pub mod spectral;
pub mod thermo;

pub use error::{Error, Result};
