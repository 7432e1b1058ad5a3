//! Band-projected and full Hamiltonians.
//!
//! Inside a fixed-magnetization band only the flip-flop part of
//! `sigma^x_i sigma^x_j` survives, so the band operator is the diagonal
//! `sum_i delta_i s_i` plus an element `J_ij` between states that differ by
//! exchanging anti-aligned spins `i` and `j`. The constant
//! `Delta0 * (2 n_up - n)` is dropped.

use super::{BandBasis, DisorderRealization, Lattice};
use crate::error::{Error, Result};

/// Largest site count accepted by [`FullHamiltonian`].
pub const FULL_MAX_SITES: usize = 14;

/// One stored off-diagonal element (`row < col`); the mirror is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonal {
    pub row: u32,
    pub col: u32,
    pub value: f64,
}

/// Sparse real symmetric Hamiltonian on the band sector.
#[derive(Debug, Clone)]
pub struct BandHamiltonian {
    pub diag: Vec<f64>,
    /// Upper-triangle entries sorted by `(row, col)`.
    pub offdiag: Vec<OffDiagonal>,
    pub sum_deltas: f64,
}

impl BandHamiltonian {
    pub fn build(lattice: &Lattice, real: &DisorderRealization, basis: &BandBasis) -> Result<Self> {
        let n = lattice.n_sites();
        if real.deltas.len() != n || basis.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if real.deltas.len() != n {
                    real.deltas.len()
                } else {
                    basis.n_sites()
                },
            });
        }
        if real.couplings.len() != lattice.bonds().len() {
            return Err(Error::DimensionMismatch {
                expected: lattice.bonds().len(),
                got: real.couplings.len(),
            });
        }
        let diag = basis
            .states()
            .iter()
            .map(|&mask| spin_energy(mask, &real.deltas))
            .collect();

        let mut offdiag = Vec::new();
        for (k, &mask) in basis.states().iter().enumerate() {
            let mut row = Vec::new();
            for (&(i, j), &coupling) in lattice.bonds().iter().zip(&real.couplings) {
                let pair = (1u32 << i) | (1u32 << j);
                let bits = mask & pair;
                if bits == 0 || bits == pair || coupling == 0.0 {
                    continue;
                }
                let target = mask ^ pair;
                let t = basis.rank(target).ok_or(Error::RankLookup {
                    mask: target as u64,
                })?;
                if k < t {
                    row.push(OffDiagonal {
                        row: k as u32,
                        col: t as u32,
                        value: coupling,
                    });
                }
            }
            row.sort_by_key(|e| e.col);
            offdiag.extend(row);
        }
        Ok(Self {
            diag,
            offdiag,
            sum_deltas: real.sum_deltas(),
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for (k, &d) in self.diag.iter().enumerate() {
            a[k * n + k] = d;
        }
        for e in &self.offdiag {
            let (r, c) = (e.row as usize, e.col as usize);
            a[r * n + c] += e.value;
            a[c * n + r] += e.value;
        }
        a
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.diag.iter().map(|d| d * d).sum::<f64>()
            + 2.0 * self.offdiag.iter().map(|e| e.value * e.value).sum::<f64>()
    }
}

/// `sum_i delta_i s_i` with `s_i = +1` for set bits.
pub fn spin_energy(mask: u32, deltas: &[f64]) -> f64 {
    deltas
        .iter()
        .enumerate()
        .map(|(i, d)| if mask >> i & 1 == 1 { *d } else { -*d })
        .sum()
}

/// `E' = E/2 + sum_i delta_i / 2`; equals `sum_{i up} delta_i` for a basis state.
pub fn shifted_energy(energy: f64, sum_deltas: f64) -> f64 {
    0.5 * energy + 0.5 * sum_deltas
}

/// The unprojected Hamiltonian on all `2^n` states, for validation.
///
/// Diagonal `sum_i (Delta0 + delta_i) s_i`; every bond connects each state to
/// the one with both spins of the bond flipped, covering both the exchange and
/// the double-flip parts of `sigma^x sigma^x`.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    pub n_sites: usize,
    pub diag: Vec<f64>,
    pub offdiag: Vec<OffDiagonal>,
}

impl FullHamiltonian {
    pub fn build(lattice: &Lattice, real: &DisorderRealization, delta0: f64) -> Result<Self> {
        let n = lattice.n_sites();
        if n > FULL_MAX_SITES {
            return Err(Error::Capacity {
                what: "full Hamiltonian sites",
                requested: n,
                limit: FULL_MAX_SITES,
                hint: "; the full operator is for validation only",
            });
        }
        let gammas: Vec<f64> = real.deltas.iter().map(|d| delta0 + d).collect();
        let dim = 1usize << n;
        let diag = (0..dim as u32).map(|s| spin_energy(s, &gammas)).collect();
        let mut offdiag = Vec::new();
        for s in 0..dim as u32 {
            let mut row = Vec::new();
            for (&(i, j), &coupling) in lattice.bonds().iter().zip(&real.couplings) {
                let t = s ^ ((1u32 << i) | (1u32 << j));
                if s < t && coupling != 0.0 {
                    row.push(OffDiagonal {
                        row: s,
                        col: t,
                        value: coupling,
                    });
                }
            }
            row.sort_by_key(|e| e.col);
            offdiag.extend(row);
        }
        Ok(Self {
            n_sites: n,
            diag,
            offdiag,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for (k, &d) in self.diag.iter().enumerate() {
            a[k * n + k] = d;
        }
        for e in &self.offdiag {
            let (r, c) = (e.row as usize, e.col as usize);
            a[r * n + c] += e.value;
            a[c * n + r] += e.value;
        }
        a
    }

    /// Constant offset of the band with `n_up` up spins.
    pub fn band_offset(&self, n_up: usize, delta0: f64) -> f64 {
        delta0 * (2.0 * n_up as f64 - self.n_sites as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn setup(
        rows: usize,
        cols: usize,
        j: f64,
        seed: u64,
    ) -> (Lattice, DisorderRealization, BandBasis) {
        let l = Lattice::periodic(rows, cols).unwrap();
        let r = DisorderRealization::sample(&ModelParams::new(1.0, j), &l, seed).unwrap();
        let b = BandBasis::central(l.n_sites()).unwrap();
        (l, r, b)
    }

    #[test]
    fn diagonal_follows_spin_signs() {
        let l = Lattice::periodic(2, 2).unwrap();
        let real = DisorderRealization {
            seed: 0,
            deltas: vec![0.1, -0.2, 0.3, 0.05],
            couplings: vec![0.0; 4],
        };
        let b = BandBasis::central(4).unwrap();
        let h = BandHamiltonian::build(&l, &real, &b).unwrap();
        // spins 0 and 1 up: delta1 + delta2 - delta3 - delta4
        let k = b.rank(0b0011).unwrap();
        assert!((h.diag[k] - (0.1 - 0.2 - 0.3 - 0.05)).abs() < 1e-15);
        assert!(h.offdiag.is_empty());
    }

    #[test]
    fn offdiag_count_matches_antialigned_bonds() {
        let (l, r, b) = setup(3, 4, 0.4, 3);
        let h = BandHamiltonian::build(&l, &r, &b).unwrap();
        let anti: usize = b
            .states()
            .iter()
            .map(|&m| {
                l.bonds()
                    .iter()
                    .filter(|&&(i, j)| (m >> i & 1) != (m >> j & 1))
                    .count()
            })
            .sum();
        assert_eq!(2 * h.offdiag.len(), anti);
        assert!(h.offdiag.iter().all(|e| e.row < e.col));
        let bound: f64 = r.deltas.iter().map(|d| d.abs()).sum();
        assert!(h.diag.iter().all(|d| d.abs() <= bound + 1e-12));
    }

    #[test]
    fn dense_copy_is_symmetric() {
        let (l, r, b) = setup(3, 3, 0.5, 11);
        let h = BandHamiltonian::build(&l, &r, &b).unwrap();
        let n = h.dim();
        let a = h.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a[i * n + j], a[j * n + i]);
            }
        }
    }

    #[test]
    fn exchange_partner_has_coupling() {
        let (l, r, b) = setup(3, 3, 0.5, 2);
        let h = BandHamiltonian::build(&l, &r, &b).unwrap();
        let a = h.to_dense();
        let n = h.dim();
        let mask = b.state(7);
        for (&(i, j), &c) in l.bonds().iter().zip(&r.couplings) {
            if (mask >> i & 1) != (mask >> j & 1) {
                let t = b.rank(mask ^ (1 << i | 1 << j)).unwrap();
                assert_eq!(a[7 * n + t], c);
            }
        }
    }

    #[test]
    fn shifted_energy_identities() {
        assert_eq!(shifted_energy(-0.7, 0.7), 0.0);
        let deltas = [0.3, -0.1, 0.25, -0.4, 0.05, 0.2];
        let sum: f64 = deltas.iter().sum();
        for mask in [0b000111u32, 0b101010, 0b010011] {
            let up: f64 = (0..6)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| deltas[i])
                .sum();
            let e = spin_energy(mask, &deltas);
            assert!((shifted_energy(e, sum) - up).abs() < 1e-15);
        }
    }

    #[test]
    fn full_hamiltonian_shape() {
        let (l, r, _) = setup(2, 2, 0.3, 1);
        let f = FullHamiltonian::build(&l, &r, 25.0).unwrap();
        assert_eq!(f.dim(), 16);
        // each state couples through all 4 bonds
        assert_eq!(f.offdiag.len(), 16 * 4 / 2);
        let big = Lattice::periodic(3, 5).unwrap();
        let rb = DisorderRealization::sample(&ModelParams::new(1.0, 0.1), &big, 0).unwrap();
        assert!(matches!(
            FullHamiltonian::build(&big, &rb, 25.0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn full_uncoupled_has_n_plus_one_bands() {
        let (l, r, _) = setup(3, 3, 0.0, 4);
        let delta0 = 25.0;
        let f = FullHamiltonian::build(&l, &r, delta0).unwrap();
        let mut bands: Vec<i64> = f.diag.iter().map(|e| (e / delta0).round() as i64).collect();
        bands.sort();
        bands.dedup();
        assert_eq!(bands.len(), 10);
        for (s, e) in f.diag.iter().enumerate() {
            let up = (s as u32).count_ones() as usize;
            assert!((e - f.band_offset(up, delta0)).abs() <= 4.5);
        }
    }
}
