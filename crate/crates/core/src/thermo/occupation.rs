use crate::error::{Error, Result};
use crate::model::{shifted_energy, BandBasis};
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-8;

/// `S_q = -sum_k W_k log2 W_k` with `0 log 0 = 0`.
pub fn eigenstate_entropy(weights: &[f64]) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > NORM_TOL || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::NotNormalized { sum });
    }
    Ok(-weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.log2())
        .sum::<f64>())
}

/// Entropy of an eigenvector's squared components in the register basis.
pub fn vector_entropy(vector: &[f64]) -> Result<f64> {
    let w: Vec<f64> = vector.iter().map(|c| c * c).collect();
    eigenstate_entropy(&w)
}

/// `n_i = sum over states with spin i up of |<psi_k|phi>|^2`.
pub fn occupation_numbers(vector: &[f64], basis: &BandBasis) -> Result<Vec<f64>> {
    if vector.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: vector.len(),
        });
    }
    let mut occ = vec![0.0; basis.n_sites()];
    for (&mask, &c) in basis.states().iter().zip(vector) {
        let w = c * c;
        let mut rest = mask;
        while rest != 0 {
            occ[rest.trailing_zeros() as usize] += w;
            rest &= rest - 1;
        }
    }
    Ok(occ)
}

/// Occupation numbers of one eigenstate together with its energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationProfile {
    /// Eigenstate index, ascending energy, 0-based.
    pub m: usize,
    pub occupations: Vec<f64>,
    /// Band-relative eigenvalue `E_m`.
    pub energy: f64,
    /// `E'_m = E_m / 2 + sum_i delta_i / 2`.
    pub shifted_energy: f64,
    /// `E'_m - E'_0` with `E'_0` the lowest shifted energy of the band.
    pub excitation: f64,
}

impl OccupationProfile {
    pub fn new(
        m: usize,
        vector: &[f64],
        basis: &BandBasis,
        energy: f64,
        ground_energy: f64,
        sum_deltas: f64,
    ) -> Result<Self> {
        let shifted = shifted_energy(energy, sum_deltas);
        Ok(Self {
            m,
            occupations: occupation_numbers(vector, basis)?,
            energy,
            shifted_energy: shifted,
            excitation: shifted - shifted_energy(ground_energy, sum_deltas),
        })
    }

    pub fn total(&self) -> f64 {
        self.occupations.iter().sum()
    }
}

/// `sqrt(mean_i (a_i - b_i)^2)` between two occupation profiles.
pub fn rms_difference(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len() as f64;
    Ok((a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt())
}

/// `sigma_s` between eigenstates `m` and `m + 1` of the same realization.
pub fn sigma_s(profiles: &[OccupationProfile], m: usize) -> Result<f64> {
    let next = profiles.get(m + 1).ok_or(Error::LevelOutOfRange {
        index: m + 1,
        len: profiles.len(),
    })?;
    rms_difference(&profiles[m].occupations, &next.occupations)
}
