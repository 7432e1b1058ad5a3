//! Random detunings and couplings.
//!
//! The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`.
//! Every draw consumes one `u64`, mapped to `u = (x >> 11) * 2^-53` in
//! `[0, 1)`. Detunings are drawn first for all sites in index order,
//! `delta_i = delta * (u - 1/2)`, then couplings for all bonds in lattice bond
//! order, `J_ij = J * (2u - 1)`. Because couplings are `J` times a draw that
//! does not depend on `J`, realizations with the same seed and different `J`
//! share their random structure.

use super::Lattice;
use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// Physical parameters, energies in units of the detuning width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Detuning width `delta`: `delta_i` is uniform in `[-delta/2, delta/2]`.
    pub delta: f64,
    /// Coupling amplitude `J`: `J_ij` is uniform in `[-J, J]`.
    pub coupling: f64,
    /// Mean qubit splitting, only used by the full-Hamiltonian validation.
    pub delta0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            delta: 1.0,
            coupling: 0.0,
            delta0: 25.0,
        }
    }
}

impl ModelParams {
    pub fn new(delta: f64, coupling: f64) -> Self {
        Self {
            delta,
            coupling,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::param(
                "J",
                format!("must be non-negative, got {}", self.coupling),
            ));
        }
        Ok(())
    }

    pub fn validate_full(&self) -> Result<()> {
        self.validate()?;
        if !(self.delta0 > self.delta) {
            return Err(Error::param(
                "delta0",
                format!("must exceed delta ({}), got {}", self.delta, self.delta0),
            ));
        }
        Ok(())
    }
}

/// One draw of the disorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    /// Per-site detunings, indexed like lattice sites.
    pub deltas: Vec<f64>,
    /// Per-bond couplings, indexed like `Lattice::bonds`.
    pub couplings: Vec<f64>,
}

impl DisorderRealization {
    pub fn sample(params: &ModelParams, lattice: &Lattice, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let deltas = (0..lattice.n_sites())
            .map(|_| params.delta * (unit() - 0.5))
            .collect();
        let couplings = (0..lattice.bonds().len())
            .map(|_| params.coupling * (2.0 * unit() - 1.0))
            .collect();
        Ok(Self {
            seed,
            deltas,
            couplings,
        })
    }

    pub fn sum_deltas(&self) -> f64 {
        self.deltas.iter().sum()
    }

    /// Single-particle energies `delta_i + delta/2`, all in `[0, delta]`.
    pub fn epsilons(&self, delta: f64) -> Vec<f64> {
        self.deltas.iter().map(|d| d + 0.5 * delta).collect()
    }
}
