//! Order-of-magnitude estimates for the chaos border and mixing scales.

use crate::model::{binomial, BandHamiltonian};
use serde::{Deserialize, Serialize};

/// Chaos-border constant from the level-statistics crossover.
pub const C_CHAOS: f64 = 3.7;
/// Constant from the thermalization crossover.
pub const C_THERMALIZATION: f64 = 3.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryEstimates {
    pub n: usize,
    pub delta: f64,
    pub coupling: f64,
    pub c: f64,
    /// `J_c = C delta / n`.
    pub j_c: f64,
    /// Spacing of directly coupled states, `delta / n`.
    pub delta_c: f64,
    /// `n^{3/2} 2^{-n} delta`.
    pub delta_n_scaling: f64,
    /// Mean central-window gap of a supplied spectrum.
    pub delta_n_empirical: Option<f64>,
    /// Breit-Wigner width `J^2 n / delta`.
    pub gamma_bw: f64,
    /// `1 / Gamma`.
    pub tau_chi: f64,
    /// Central band dimension `C(n, floor(n/2))`.
    pub n_b: u64,
    /// `sqrt(n dE / delta)` for a supplied excitation energy.
    pub n_eff: Option<f64>,
}

pub fn theory_estimates(n: usize, delta: f64, coupling: f64, c: f64) -> TheoryEstimates {
    let nf = n as f64;
    let gamma_bw = coupling * coupling * nf / delta;
    TheoryEstimates {
        n,
        delta,
        coupling,
        c,
        j_c: c * delta / nf,
        delta_c: delta / nf,
        delta_n_scaling: nf.powf(1.5) * 2f64.powi(-(n as i32)) * delta,
        delta_n_empirical: None,
        gamma_bw,
        tau_chi: if gamma_bw > 0.0 {
            1.0 / gamma_bw
        } else {
            f64::INFINITY
        },
        n_b: binomial(n, n / 2),
        n_eff: None,
    }
}

impl TheoryEstimates {
    /// Fills `delta_n_empirical` with the mean gap of the central window.
    pub fn with_spectrum(mut self, eigs: &[f64], fraction: f64) -> Self {
        if let Ok(w) = crate::spectral::central_window(eigs.len(), fraction) {
            let lv = &eigs[w];
            self.delta_n_empirical = Some((lv[lv.len() - 1] - lv[0]) / (lv.len() - 1) as f64);
        }
        self
    }

    pub fn with_excitation(mut self, de: f64) -> Self {
        self.n_eff = Some((self.n as f64 * de / self.delta).max(0.0).sqrt());
        self
    }
}

/// Band-center level spacing of a Gaussian density of states with the
/// operator's exact spectral mean and variance (no diagonalization needed):
/// `sqrt(2 pi var) / N_B`.
pub fn center_spacing_from_moments(h: &BandHamiltonian) -> f64 {
    let n = h.dim() as f64;
    let mean = h.trace() / n;
    let var = h.frobenius_sq() / n - mean * mean;
    (2.0 * std::f64::consts::PI * var).sqrt() / n
}
