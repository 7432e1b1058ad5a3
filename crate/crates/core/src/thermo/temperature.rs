//! Canonical and thermodynamic temperatures.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Bracket for the canonical inverse temperature, in units of `1 / delta`.
pub const BETA_CAN_MAX: f64 = 1e3;

/// Fermi-Dirac, canonical and thermodynamic temperatures of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSet {
    pub t_fd: f64,
    pub t_can: f64,
    pub t_th: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTemperature {
    pub beta: f64,
    /// `1 / beta`: `+inf` at `beta = 0`, `+-0` when the target sits on a band edge.
    pub t: f64,
    /// Target outside the open spectral range, or beyond the `beta` bracket.
    pub out_of_range: bool,
}

/// Canonical mean energy `sum E_m exp(-beta E'_m) / sum exp(-beta E'_m)`.
pub fn canonical_energy(energies: &[f64], eprimes: &[f64], beta: f64) -> f64 {
    canonical_moments(energies, eprimes, beta).0
}

/// Canonical mean of `E` and `dE/dbeta = -Cov(E, E')`. Weights are shifted
/// by their maximum and terms below `exp(-700)` are dropped.
fn canonical_moments(energies: &[f64], eprimes: &[f64], beta: f64) -> (f64, f64) {
    let shift = eprimes
        .iter()
        .map(|&e| -beta * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut se, mut sp, mut sep) = (0.0, 0.0, 0.0, 0.0);
    for (&e, &ep) in energies.iter().zip(eprimes) {
        let x = -beta * ep - shift;
        if x < -700.0 {
            continue;
        }
        let w = x.exp();
        z += w;
        se += w * e;
        sp += w * ep;
        sep += w * e * ep;
    }
    let mean_e = se / z;
    (mean_e, -(sep / z - mean_e * sp / z))
}

/// Solves `E(beta) = target` for the canonical temperature in
/// `[-BETA_CAN_MAX, BETA_CAN_MAX] / delta`, by Newton steps kept inside a
/// shrinking bisection bracket (`E` decreases with `beta`).
pub fn t_canonical(
    energies: &[f64],
    eprimes: &[f64],
    target: f64,
    delta: f64,
) -> Result<CanonicalTemperature> {
    if energies.len() != eprimes.len() {
        return Err(Error::DimensionMismatch {
            expected: energies.len(),
            got: eprimes.len(),
        });
    }
    if energies.len() < 2 {
        return Err(Error::TooFewLevels {
            got: energies.len(),
            need: 2,
        });
    }
    let (e_min, e_max) = energies
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| {
            (a.min(e), b.max(e))
        });
    if target <= e_min {
        return Ok(CanonicalTemperature {
            beta: f64::INFINITY,
            t: 0.0,
            out_of_range: true,
        });
    }
    if target >= e_max {
        return Ok(CanonicalTemperature {
            beta: f64::NEG_INFINITY,
            t: -0.0,
            out_of_range: true,
        });
    }
    let bmax = BETA_CAN_MAX / delta;
    let (mut lo, mut hi) = (-bmax, bmax);
    if target >= canonical_energy(energies, eprimes, lo) {
        return Ok(CanonicalTemperature {
            beta: lo,
            t: 1.0 / lo,
            out_of_range: true,
        });
    }
    if target <= canonical_energy(energies, eprimes, hi) {
        return Ok(CanonicalTemperature {
            beta: hi,
            t: 1.0 / hi,
            out_of_range: true,
        });
    }
    let scale = (e_max - e_min).max(f64::MIN_POSITIVE);
    let mut beta = 0.0;
    for _ in 0..200 {
        let (e, slope) = canonical_moments(energies, eprimes, beta);
        let f = e - target;
        if f.abs() <= 1e-14 * scale {
            break;
        }
        if f > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        let newton = beta - f / slope;
        beta = if slope < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * beta.abs().max(1e-12) {
            break;
        }
    }
    Ok(CanonicalTemperature {
        beta,
        t: if beta == 0.0 {
            f64::INFINITY
        } else {
            1.0 / beta
        },
        out_of_range: false,
    })
}

/// Gaussian density of states matched to the first two moments of `E'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosFit {
    pub mean: f64,
    /// Population variance of `E'` over the band.
    pub sigma2: f64,
}

pub fn dos_fit(eprimes: &[f64]) -> Result<DosFit> {
    if eprimes.len() < 2 {
        return Err(Error::TooFewLevels {
            got: eprimes.len(),
            need: 2,
        });
    }
    let n = eprimes.len() as f64;
    let mean = eprimes.iter().sum::<f64>() / n;
    let sigma2 = eprimes.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    Ok(DosFit { mean, sigma2 })
}

/// `T_th = -sigma^2 / (E' - mean)`, from `1/T = d ln rho / dE'` of the Gaussian.
/// With `rho ~ exp(-x^2 / 2 sigma^2)`; the form `exp(-x^2 / sigma^2)` would
/// halve `T_th`.
pub fn t_thermodynamic(dos: &DosFit, eprime: f64) -> f64 {
    let x = eprime - dos.mean;
    if x == 0.0 {
        f64::INFINITY
    } else {
        -dos.sigma2 / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_energy_is_infinite_temperature() {
        let e = [-1.0, -0.2, 0.4, 0.8];
        let ep: Vec<f64> = e.iter().map(|x| 0.5 * x + 0.1).collect();
        let mean = canonical_energy(&e, &ep, 0.0);
        let t = t_canonical(&e, &ep, mean, 1.0).unwrap();
        assert!(t.t.abs() > 1e10 || t.t == f64::INFINITY);
    }

    #[test]
    fn two_level_closed_form() {
        let a = 0.7;
        let e = [-a, a];
        let ep = [-a / 2.0, a / 2.0];
        for target in [-0.6, -0.3, -0.01, 0.2, 0.55] {
            let t = t_canonical(&e, &ep, target, 1.0).unwrap();
            let exact = -a / (2.0 * (target / a).atanh());
            assert!(
                (t.t - exact).abs() <= 1e-9 * exact.abs(),
                "{target}: {} vs {exact}",
                t.t
            );
            assert_eq!(t.t.signum(), exact.signum());
        }
    }

    #[test]
    fn band_edges_are_flagged() {
        let e = [-1.0, 0.0, 1.0];
        let ep = [-0.5, 0.0, 0.5];
        let lo = t_canonical(&e, &ep, -1.0, 1.0).unwrap();
        assert!(lo.out_of_range && lo.beta == f64::INFINITY);
        let hi = t_canonical(&e, &ep, 2.0, 1.0).unwrap();
        assert!(hi.out_of_range && hi.beta == f64::NEG_INFINITY);
    }

    #[test]
    fn canonical_energy_decreases() {
        let e: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let ep: Vec<f64> = e.iter().map(|x| 0.5 * x).collect();
        let mut prev = f64::INFINITY;
        for k in -100..=100 {
            let b = k as f64 * 0.5;
            let v = canonical_energy(&e, &ep, b);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn thermodynamic_signs() {
        let dos = dos_fit(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(dos.mean, 1.5);
        assert_eq!(dos.sigma2, 1.25);
        assert_eq!(t_thermodynamic(&dos, 1.5), f64::INFINITY);
        assert!(t_thermodynamic(&dos, 0.5) > 0.0);
        assert!(t_thermodynamic(&dos, 2.5) < 0.0);
        assert_eq!(t_thermodynamic(&dos, 0.5), 1.25);
        assert!(dos_fit(&[1.0]).is_err());
    }
}
