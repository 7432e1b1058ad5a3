//! Constrained Fermi-Dirac fits of occupation profiles.
//!
//! Single-particle energies are `eps_i = delta_i + delta / 2`. For a given
//! inverse temperature the chemical potential is fixed by the particle
//! number, `sum_i f(eps_i) = n_up`, so `beta` is the only free parameter.
//! The fit minimizes the unweighted squared deviation over sites.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cell::Cell;

/// Largest `|beta|` scanned, in units of `1 / delta`.
pub const BETA_MAX: f64 = 1e3;
/// Absolute `beta` resolution of the golden-section refinement, in units of `1 / delta`.
pub const BETA_RESOLUTION: f64 = 1e-6;
const GRID_HALF: usize = 64;
const BETA_MIN_GRID: f64 = 1e-3;

/// `1 / (exp(x) + 1)` without overflow.
pub fn logistic(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Chemical potential with `sum_i 1 / (exp(beta (eps_i - mu)) + 1) = n_up`.
///
/// Bisection on `[min eps - 10/|beta|, max eps + 10/|beta|]`, taking a Newton
/// step whenever it lands inside the current bracket. At `beta = 0` the
/// constraint does not involve `mu`; `mu = delta / 2` by convention.
pub fn fd_mu_solve(beta: f64, eps: &[f64], n_up: usize, delta: f64) -> Result<f64> {
    mu_solve_from(beta, eps, n_up, delta, None)
}

/// `fd_mu_solve` with an optional first iterate.
fn mu_solve_from(
    beta: f64,
    eps: &[f64],
    n_up: usize,
    delta: f64,
    guess: Option<f64>,
) -> Result<f64> {
    let n = eps.len();
    if n_up == 0 || n_up >= n {
        return Err(Error::NoChemicalPotential { n_up, n_sites: n });
    }
    if beta == 0.0 {
        return Ok(0.5 * delta);
    }
    let target = n_up as f64;
    let (lo_e, hi_e) = eps
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| {
            (a.min(e), b.max(e))
        });
    let pad = 10.0 / beta.abs();
    // g(mu) = sum f - target is increasing in mu for beta > 0, decreasing otherwise
    let sign = beta.signum();
    let (mut lo, mut hi) = (lo_e - pad, hi_e + pad);
    let eval = |mu: f64| {
        let mut s = 0.0;
        let mut ds = 0.0;
        for &e in eps {
            let f = logistic(beta * (e - mu));
            s += f;
            ds += beta * f * (1.0 - f);
        }
        (s - target, ds)
    };
    // work with h(mu) = sign * g(mu), increasing on the bracket
    let mut mu = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let (g, dg) = eval(mu);
        let h = sign * g;
        if h.abs() < 1e-13 * target.max(1.0) {
            return Ok(mu);
        }
        if h > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        if hi - lo <= 4.0 * f64::EPSILON * mu.abs().max(1.0) {
            return Ok(mu);
        }
        let newton = mu - g / dg;
        mu = if dg != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(mu)
}

/// Fermi-Dirac occupations under the particle-number constraint.
///
/// At `beta = 0` every site holds `n_up / n`, the limit of the constrained
/// distribution (this is `1/2` for even `n`).
pub fn fd_occupations(beta: f64, eps: &[f64], n_up: usize, delta: f64) -> Result<(f64, Vec<f64>)> {
    occupations_from(beta, eps, n_up, delta, None)
}

fn occupations_from(
    beta: f64,
    eps: &[f64],
    n_up: usize,
    delta: f64,
    guess: Option<f64>,
) -> Result<(f64, Vec<f64>)> {
    let mu = mu_solve_from(beta, eps, n_up, delta, guess)?;
    if beta == 0.0 {
        let p = n_up as f64 / eps.len() as f64;
        return Ok((mu, vec![p; eps.len()]));
    }
    Ok((mu, eps.iter().map(|&e| logistic(beta * (e - mu))).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdFit {
    /// Inverse temperature, signed.
    pub beta: f64,
    /// Chemical potential in `eps` coordinates.
    pub mu: f64,
    /// `1 / beta`; `+inf` at `beta = 0`.
    pub t_fd: f64,
    /// Root-mean-square deviation of the data from the fitted distribution.
    pub sigma_fd: f64,
    /// Fitted occupations, aligned with the input sites.
    pub fitted: Vec<f64>,
    /// Profile was flat; `beta = 0` without a search.
    pub flat: bool,
}

/// Squared deviation at `beta`; `last_mu` carries the previous chemical
/// potential between nearby evaluations as a starting point.
fn sse(
    occ: &[f64],
    eps: &[f64],
    beta: f64,
    n_up: usize,
    delta: f64,
    last_mu: &Cell<Option<f64>>,
) -> Result<f64> {
    let (mu, fd) = occupations_from(beta, eps, n_up, delta, last_mu.get())?;
    if beta != 0.0 {
        last_mu.set(Some(mu));
    }
    Ok(occ.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum())
}

/// The 129-point scan grid: 0 and `+-` log-spaced magnitudes in `[1e-3, 1e3] / delta`.
pub fn beta_grid(delta: f64) -> Vec<f64> {
    let mut mags: Vec<f64> = (0..GRID_HALF)
        .map(|k| {
            let t = k as f64 / (GRID_HALF - 1) as f64;
            BETA_MIN_GRID * (BETA_MAX / BETA_MIN_GRID).powf(t) / delta
        })
        .collect();
    mags.reverse();
    let mut grid: Vec<f64> = mags.iter().map(|b| -b).collect();
    grid.push(0.0);
    mags.reverse();
    grid.extend(mags);
    grid
}

/// Least-squares Fermi-Dirac fit; `beta` is found by a grid scan followed by
/// golden-section refinement between the neighbours of the best grid point.
pub fn fd_fit(occ: &[f64], eps: &[f64], n_up: usize, delta: f64) -> Result<FdFit> {
    if occ.len() != eps.len() {
        return Err(Error::DimensionMismatch {
            expected: eps.len(),
            got: occ.len(),
        });
    }
    let first = occ.first().copied().unwrap_or(0.0);
    let flat = occ.iter().all(|&x| (x - first).abs() < 1e-12);
    let beta = if flat {
        0.0
    } else {
        let grid = beta_grid(delta);
        let last_mu = Cell::new(None);
        let mut best = (f64::INFINITY, 0usize);
        for (i, &b) in grid.iter().enumerate() {
            let v = sse(occ, eps, b, n_up, delta, &last_mu)?;
            if v < best.0 {
                best = (v, i);
            }
        }
        let i = best.1;
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        golden_section(
            |b| sse(occ, eps, b, n_up, delta, &last_mu),
            lo,
            hi,
            grid[i],
            best.0,
            BETA_RESOLUTION / delta,
        )?
    };
    let (mu, fitted) = fd_occupations(beta, eps, n_up, delta)?;
    let n = occ.len() as f64;
    let sigma_fd = (occ
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FdFit {
        beta,
        mu,
        t_fd: if beta == 0.0 {
            f64::INFINITY
        } else {
            1.0 / beta
        },
        sigma_fd,
        fitted,
        flat,
    })
}

/// `sigma_FD` of a profile against an existing fit.
pub fn sigma_fd(occ: &[f64], fit: &FdFit) -> Result<f64> {
    super::rms_difference(occ, &fit.fitted)
}

/// Minimizes `f` on `[lo, hi]`; returns the best point seen, never worse than `x0`.
fn golden_section(
    f: impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    f0: f64,
    tol: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut best = (f0, x0);
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b)?;
        }
        for (v, x) in [(fa, a), (fb, b)] {
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spread(n: usize) -> Vec<f64> {
        // deterministic irregular energies in [0, 1]
        (0..n)
            .map(|i| (i as f64 * 0.618_034 + 0.1).fract())
            .collect()
    }

    fn constraint(beta: f64, eps: &[f64], n_up: usize) -> f64 {
        let (_, fd) = fd_occupations(beta, eps, n_up, 1.0).unwrap();
        fd.iter().sum::<f64>() - n_up as f64
    }

    #[test]
    fn infinite_temperature() {
        let eps = spread(8);
        assert_eq!(fd_mu_solve(0.0, &eps, 4, 1.0).unwrap(), 0.5);
        let (_, fd) = fd_occupations(0.0, &eps, 4, 1.0).unwrap();
        assert!(fd.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn zero_temperature_fills_lowest_levels() {
        let eps = spread(10);
        let mut sorted = eps.clone();
        sorted.sort_by(f64::total_cmp);
        let mu = fd_mu_solve(1e3, &eps, 5, 1.0).unwrap();
        assert!(mu > sorted[4] && mu < sorted[5], "{mu} {sorted:?}");
    }

    #[test]
    fn particle_hole_symmetric_set() {
        let eps = [0.1, 0.3, 0.7, 0.9];
        for beta in [-30.0, -2.0, 0.5, 4.0, 100.0] {
            let mu = fd_mu_solve(beta, &eps, 2, 1.0).unwrap();
            assert!((mu - 0.5).abs() < 1e-10, "beta {beta}: mu {mu}");
        }
    }

    #[test]
    fn no_solution_outside_open_filling() {
        let eps = spread(6);
        assert!(matches!(
            fd_mu_solve(1.0, &eps, 0, 1.0),
            Err(Error::NoChemicalPotential { .. })
        ));
        assert!(matches!(
            fd_mu_solve(1.0, &eps, 6, 1.0),
            Err(Error::NoChemicalPotential { .. })
        ));
    }

    #[test]
    fn grid_shape() {
        let g = beta_grid(1.0);
        assert_eq!(g.len(), 129);
        assert_eq!(g[64], 0.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[128] - 1e3).abs() < 1e-9 && (g[65] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn round_trip_at_beta_four() {
        let eps = spread(16);
        let (_, occ) = fd_occupations(4.0, &eps, 8, 1.0).unwrap();
        let fit = fd_fit(&occ, &eps, 8, 1.0).unwrap();
        assert!((fit.t_fd - 0.25).abs() < 1e-4, "{fit:?}");
        assert!(fit.sigma_fd < 1e-6);
        assert_eq!(sigma_fd(&occ, &fit).unwrap(), fit.sigma_fd);
    }

    #[test]
    fn flat_half_profile_is_infinite_temperature() {
        let eps = spread(12);
        let fit = fd_fit(&[0.5; 12], &eps, 6, 1.0).unwrap();
        assert!(fit.flat && fit.beta == 0.0 && fit.t_fd == f64::INFINITY);
        assert_eq!(fit.sigma_fd, 0.0);
    }

    #[test]
    fn binary_profile_at_center_has_maximal_sigma() {
        // up spins placed symmetrically about the band center: no beta helps
        let eps = [0.1, 0.2, 0.8, 0.9];
        let occ = [1.0, 0.0, 0.0, 1.0];
        let fit = fd_fit(&occ, &eps, 2, 1.0).unwrap();
        assert!((fit.sigma_fd - 0.5).abs() < 1e-9, "{fit:?}");
    }

    #[test]
    fn odd_site_count_limit() {
        let eps = spread(9);
        let (_, fd) = fd_occupations(0.0, &eps, 4, 1.0).unwrap();
        assert!(fd.iter().all(|&x| (x - 4.0 / 9.0).abs() < 1e-15));
        let (_, near) = fd_occupations(1e-6, &eps, 4, 1.0).unwrap();
        for (a, b) in fd.iter().zip(&near) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn sigma_never_exceeds_half() {
        let eps = spread(10);
        for mask in [0b1111100000u32, 0b1010101010, 0b0000011111, 0b1100110010] {
            let occ: Vec<f64> = (0..10).map(|i| (mask >> i & 1) as f64).collect();
            let fit = fd_fit(&occ, &eps, 5, 1.0).unwrap();
            assert!(fit.sigma_fd <= 0.5 + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn constraint_holds(beta in -1e3f64..1e3, seed in 0usize..50) {
            let eps: Vec<f64> = spread(16 + seed % 5).iter().map(|e| (e + seed as f64 * 0.013).fract()).collect();
            let n_up = eps.len() / 2;
            prop_assert!(constraint(beta, &eps, n_up).abs() < 1e-8);
        }

        #[test]
        fn round_trip_recovers_beta(beta in -50.0f64..50.0, shift in 0.0f64..1.0) {
            let eps: Vec<f64> = spread(16).iter().map(|e| (e + shift).fract()).collect();
            let (_, occ) = fd_occupations(beta, &eps, 8, 1.0).unwrap();
            let fit = fd_fit(&occ, &eps, 8, 1.0).unwrap();
            prop_assert!((fit.beta - beta).abs() <= 1e-3, "beta {} fit {}", beta, fit.beta);
        }
    }
}
