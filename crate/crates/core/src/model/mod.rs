//! Lattice, disorder, band basis and Hamiltonian construction.

mod basis;
mod disorder;
mod hamiltonian;
mod lattice;

pub use basis::{binomial, BandBasis, DEFAULT_MAX_STATES, MAX_SITES};
pub use disorder::{DisorderRealization, ModelParams};
pub use hamiltonian::{
    shifted_energy, spin_energy, BandHamiltonian, FullHamiltonian, OffDiagonal, FULL_MAX_SITES,
};
pub use lattice::{square_factorization, Lattice};
