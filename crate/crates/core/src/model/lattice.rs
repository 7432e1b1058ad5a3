//! Periodic square lattice geometry.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A `rows x cols` periodic square lattice and its nearest-neighbour bonds.
///
/// Sites are numbered row-major. Bonds are generated by visiting sites in
/// index order and emitting the bond to the right neighbour, then the bond to
/// the neighbour below, both with periodic wraparound. A bond already emitted
/// (which happens when a dimension equals 2) is skipped, so each unordered
/// pair appears once. Each bond is stored as `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    rows: usize,
    cols: usize,
    bonds: Vec<(usize, usize)>,
}

impl Lattice {
    pub fn periodic(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::DegenerateLattice { rows, cols });
        }
        let n = rows * cols;
        let mut bonds = Vec::with_capacity(2 * n);
        let mut seen = std::collections::HashSet::with_capacity(2 * n);
        let mut duplicates = 0usize;
        for site in 0..n {
            let (r, c) = (site / cols, site % cols);
            let right = r * cols + (c + 1) % cols;
            let down = ((r + 1) % rows) * cols + c;
            for other in [right, down] {
                let pair = (site.min(other), site.max(other));
                if seen.insert(pair) {
                    bonds.push(pair);
                } else {
                    duplicates += 1;
                }
            }
        }
        if duplicates > 0 {
            log::warn!(
                "{rows}x{cols} lattice: {duplicates} wraparound bonds coincide with direct bonds and were merged"
            );
        }
        Ok(Self { rows, cols, bonds })
    }

    /// Most-square periodic lattice with `n` sites (`rows <= cols`).
    pub fn for_sites(n: usize) -> Result<Self> {
        let (rows, cols) = square_factorization(n).ok_or_else(|| {
            Error::param(
                "n",
                format!("{n} sites have no factorization with both sides >= 2"),
            )
        })?;
        Self::periodic(rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }
}

/// `rows x cols = n` with `2 <= rows <= cols` and `rows` as large as possible.
pub fn square_factorization(n: usize) -> Option<(usize, usize)> {
    let mut rows = (n as f64).sqrt() as usize;
    while rows >= 2 {
        if n.is_multiple_of(rows) {
            return Some((rows, n / rows));
        }
        rows -= 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        let l = Lattice::periodic(3, 3).unwrap();
        assert_eq!((l.n_sites(), l.bonds().len()), (9, 18));
        let l = Lattice::periodic(4, 4).unwrap();
        assert_eq!((l.n_sites(), l.bonds().len()), (16, 32));
        for (r, c) in [(3, 4), (3, 5), (4, 6), (5, 5)] {
            let l = Lattice::periodic(r, c).unwrap();
            assert_eq!(l.bonds().len(), 2 * r * c);
        }
    }

    #[test]
    fn two_by_two_deduplicates() {
        let l = Lattice::periodic(2, 2).unwrap();
        assert_eq!(l.bonds(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn bonds_are_valid_and_unique() {
        for (r, c) in [(2, 3), (2, 5), (3, 3), (4, 5)] {
            let l = Lattice::periodic(r, c).unwrap();
            let mut sorted = l.bonds().to_vec();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), l.bonds().len());
            for &(a, b) in l.bonds() {
                assert!(a < b && b < l.n_sites());
            }
        }
    }

    #[test]
    fn ordering_is_right_then_down() {
        let l = Lattice::periodic(3, 3).unwrap();
        assert_eq!(&l.bonds()[..4], &[(0, 1), (0, 3), (1, 2), (1, 4)]);
    }

    #[test]
    fn rejects_thin_lattices() {
        assert!(matches!(
            Lattice::periodic(1, 5),
            Err(Error::DegenerateLattice { .. })
        ));
    }

    #[test]
    fn default_factorizations() {
        let expect = [
            (9, (3, 3)),
            (12, (3, 4)),
            (15, (3, 5)),
            (16, (4, 4)),
            (18, (3, 6)),
            (24, (4, 6)),
        ];
        for (n, rc) in expect {
            assert_eq!(square_factorization(n), Some(rc));
        }
        assert_eq!(square_factorization(7), None);
    }
}
