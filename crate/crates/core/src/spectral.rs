//! Level-spacing statistics and the Poisson/Wigner-Dyson crossover parameter.
//!
//! Spacings are normalized by the mean gap of the window they come from, with
//! no further unfolding. `eta` compares the spacing CDF at `s0`, the first
//! crossing of the Poisson and Wigner densities, with both reference CDFs:
//!
//! ```text
//! eta = (F(s0) - F_W(s0)) / (F_P(s0) - F_W(s0))
//! ```
//!
//! which is the ratio of integrals of `P - P_W` and `P_P - P_W` over
//! `[0, s0]` without binning. Poisson gives 1 and Wigner-Dyson gives 0.

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

/// First positive crossing of `exp(-s)` and `(pi s / 2) exp(-pi s^2 / 4)`.
pub const S0: f64 = 0.472_912_935_181_154_7;

const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0xb007_57a9;

pub fn poisson_density(s: f64) -> f64 {
    (-s).exp()
}

pub fn wigner_density(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

pub fn poisson_cdf(s: f64) -> f64 {
    -(-s).exp_m1()
}

pub fn wigner_cdf(s: f64) -> f64 {
    -(-0.25 * PI * s * s).exp_m1()
}

/// Normalized gaps from one window of one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub spacings: Vec<f64>,
    /// Mean energy of the window, measured from the spectrum mean, divided
    /// by the band width.
    pub e_over_b: f64,
}

impl SpacingSample {
    pub fn count(&self) -> usize {
        self.spacings.len()
    }

    /// Concatenates samples; `e_over_b` becomes the count-weighted mean.
    pub fn pool<'a>(samples: impl IntoIterator<Item = &'a SpacingSample>) -> SpacingSample {
        let mut spacings = Vec::new();
        let mut weighted = 0.0;
        for s in samples {
            weighted += s.e_over_b * s.count() as f64;
            spacings.extend_from_slice(&s.spacings);
        }
        let e_over_b = if spacings.is_empty() {
            0.0
        } else {
            weighted / spacings.len() as f64
        };
        SpacingSample { spacings, e_over_b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaResult {
    pub eta: f64,
    pub n_spacings: usize,
    /// Bootstrap standard error.
    pub stderr: f64,
}

/// Index range of the `2 * fraction * N` levels around index `N / 2`.
///
/// The half width is `round_half_up(fraction * N)`, clamped to the spectrum.
pub fn central_window(n_levels: usize, fraction: f64) -> Result<Range<usize>> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(Error::param(
            "window",
            format!("fraction must be in (0, 0.5], got {fraction}"),
        ));
    }
    let half = (fraction * n_levels as f64 + 0.5 + 1e-9).floor() as usize;
    let center = n_levels / 2;
    let range = center.saturating_sub(half)..(center + half).min(n_levels);
    if range.len() < 3 {
        return Err(Error::TooFewLevels {
            got: range.len(),
            need: 3,
        });
    }
    Ok(range)
}

/// `s_k = (E_{k+1} - E_k) / <gap>` over consecutive sorted levels.
pub fn normalized_spacings(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 3 {
        return Err(Error::TooFewLevels {
            got: levels.len(),
            need: 3,
        });
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::DegenerateSpacings);
    }
    Ok(gaps.into_iter().map(|g| g / mean).collect())
}

/// Spacing sample of the central `fraction` window of a sorted spectrum.
pub fn central_spacings(eigs: &[f64], fraction: f64) -> Result<SpacingSample> {
    let w = central_window(eigs.len(), fraction)?;
    let band = band_width(eigs);
    let center = eigs.iter().sum::<f64>() / eigs.len() as f64;
    let levels = &eigs[w];
    let mean_e = levels.iter().sum::<f64>() / levels.len() as f64;
    Ok(SpacingSample {
        spacings: normalized_spacings(levels)?,
        e_over_b: if band > 0.0 {
            (mean_e - center) / band
        } else {
            0.0
        },
    })
}

fn band_width(eigs: &[f64]) -> f64 {
    match (eigs.first(), eigs.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    }
}

fn eta_of_fraction(below: f64) -> f64 {
    let fw = wigner_cdf(S0);
    (below - fw) / (poisson_cdf(S0) - fw)
}

/// `eta` from the empirical CDF at `S0`, with a bootstrap error bar.
pub fn eta_from_spacings(spacings: &[f64]) -> Result<EtaResult> {
    let n = spacings.len();
    if n == 0 {
        return Err(Error::TooFewLevels { got: 0, need: 1 });
    }
    let below: Vec<bool> = spacings.iter().map(|&s| s <= S0).collect();
    let hits = below.iter().filter(|&&b| b).count();
    let eta = eta_of_fraction(hits as f64 / n as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED ^ n as u64);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut c = 0usize;
        for _ in 0..n {
            if below[(rng.next_u64() % n as u64) as usize] {
                c += 1;
            }
        }
        let e = eta_of_fraction(c as f64 / n as f64);
        sum += e;
        sum_sq += e * e;
    }
    let b = BOOTSTRAP_RESAMPLES as f64;
    let var = (sum_sq / b - (sum / b).powi(2)).max(0.0) * b / (b - 1.0);
    Ok(EtaResult {
        eta,
        n_spacings: n,
        stderr: var.sqrt(),
    })
}

/// Density-normalized spacing histogram with reference curves at bin centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingHistogram {
    pub bin_width: f64,
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
    pub poisson: Vec<f64>,
    pub wigner: Vec<f64>,
}

impl SpacingHistogram {
    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }

    /// `eta` from the binned density: integral of `P - P_W` over `[0, S0]`,
    /// with the bin containing `S0` counted fractionally.
    pub fn eta(&self) -> f64 {
        let mut integral = 0.0;
        for (k, d) in self.density.iter().enumerate() {
            let lo = k as f64 * self.bin_width;
            let hi = lo + self.bin_width;
            if lo >= S0 {
                break;
            }
            integral += d * (hi.min(S0) - lo);
        }
        eta_of_fraction(integral)
    }
}

pub fn ps_histogram(spacings: &[f64], bin_width: f64) -> Result<SpacingHistogram> {
    if !(bin_width > 0.0) {
        return Err(Error::param(
            "bin_width",
            format!("must be positive, got {bin_width}"),
        ));
    }
    if spacings.is_empty() {
        return Err(Error::TooFewLevels { got: 0, need: 1 });
    }
    let s_max = spacings.iter().cloned().fold(0.0, f64::max);
    let bins = ((s_max / bin_width).floor() as usize + 1).max(1);
    let mut counts = vec![0usize; bins];
    for &s in spacings {
        let k = ((s / bin_width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let norm = 1.0 / (spacings.len() as f64 * bin_width);
    let centers: Vec<f64> = (0..bins).map(|k| (k as f64 + 0.5) * bin_width).collect();
    Ok(SpacingHistogram {
        bin_width,
        density: counts.iter().map(|&c| c as f64 * norm).collect(),
        poisson: centers.iter().map(|&s| poisson_density(s)).collect(),
        wigner: centers.iter().map(|&s| wigner_density(s)).collect(),
        centers,
    })
}

/// Splits the lower half of a sorted spectrum into `n_windows` equal-count
/// windows and returns one spacing sample per window, lowest energy first.
pub fn energy_windows(eigs: &[f64], n_windows: usize) -> Result<Vec<SpacingSample>> {
    if n_windows == 0 {
        return Err(Error::param("windows", "need at least one window"));
    }
    let half = eigs.len() / 2;
    let band = band_width(eigs);
    let center = eigs.iter().sum::<f64>() / eigs.len().max(1) as f64;
    let per = half / n_windows;
    if per < 3 {
        return Err(Error::TooFewLevels { got: per, need: 3 });
    }
    if per < 50 {
        log::warn!("energy windows hold only {per} levels each");
    }
    (0..n_windows)
        .map(|w| {
            let levels = &eigs[w * half / n_windows..(w + 1) * half / n_windows];
            let mean_e = levels.iter().sum::<f64>() / levels.len() as f64;
            Ok(SpacingSample {
                spacings: normalized_spacings(levels)?,
                e_over_b: if band > 0.0 {
                    (mean_e - center) / band
                } else {
                    0.0
                },
            })
        })
        .collect()
}

/// One point of an energy-resolved `eta` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEta {
    pub e_over_b: f64,
    pub eta: EtaResult,
}

/// Energy-resolved `eta` pooled over several spectra.
pub fn eta_vs_energy(spectra: &[Vec<f64>], n_windows: usize) -> Result<Vec<EnergyEta>> {
    let per: Vec<Vec<SpacingSample>> = spectra
        .iter()
        .map(|e| energy_windows(e, n_windows))
        .collect::<Result<_>>()?;
    (0..n_windows)
        .map(|w| {
            let pooled = SpacingSample::pool(per.iter().map(|p| &p[w]));
            Ok(EnergyEta {
                e_over_b: pooled.e_over_b,
                eta: eta_from_spacings(&pooled.spacings)?,
            })
        })
        .collect()
}
