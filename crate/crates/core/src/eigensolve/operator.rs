use crate::error::{Error, Result};
use crate::model::{BandHamiltonian, FullHamiltonian, OffDiagonal};

/// A real symmetric linear map.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Row-major dense copy.
    fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                a[i * n + j] = col[i];
            }
        }
        a
    }
}

fn sparse_apply(diag: &[f64], offdiag: &[OffDiagonal], x: &[f64], y: &mut [f64]) {
    for ((yi, di), xi) in y.iter_mut().zip(diag).zip(x) {
        *yi = di * xi;
    }
    for e in offdiag {
        let (r, c) = (e.row as usize, e.col as usize);
        y[r] += e.value * x[c];
        y[c] += e.value * x[r];
    }
}

impl SymmetricOperator for BandHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        sparse_apply(&self.diag, &self.offdiag, x, y);
    }

    fn to_dense(&self) -> Vec<f64> {
        BandHamiltonian::to_dense(self)
    }
}

impl SymmetricOperator for FullHamiltonian {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        sparse_apply(&self.diag, &self.offdiag, x, y);
    }

    fn to_dense(&self) -> Vec<f64> {
        FullHamiltonian::to_dense(self)
    }
}

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseSymmetric {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }
}

impl SymmetricOperator for DenseSymmetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (row, yi) in self.data.chunks_exact(self.n).zip(y.iter_mut()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn to_dense(&self) -> Vec<f64> {
        self.data.clone()
    }
}

/// `-A`, used to turn a highest-eigenvalue problem into a lowest one.
pub struct Negated<'a, A: ?Sized>(pub &'a A);

impl<A: SymmetricOperator + ?Sized> SymmetricOperator for Negated<'_, A> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Size-checked `H v`.
pub fn matvec<A: SymmetricOperator + ?Sized>(op: &A, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    let mut y = vec![0.0; v.len()];
    op.apply(v, &mut y);
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BandBasis, DisorderRealization, Lattice, ModelParams};
    use proptest::prelude::*;

    fn band(j: f64, seed: u64) -> (BandBasis, BandHamiltonian) {
        let l = Lattice::periodic(3, 3).unwrap();
        let r = DisorderRealization::sample(&ModelParams::new(1.0, j), &l, seed).unwrap();
        let b = BandBasis::central(9).unwrap();
        let h = BandHamiltonian::build(&l, &r, &b).unwrap();
        (b, h)
    }

    #[test]
    fn unit_vector_gives_column() {
        let (_, h) = band(0.4, 1);
        let dense = h.to_dense();
        let n = h.dim();
        for k in [0, 17, n - 1] {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let y = matvec(&h, &e).unwrap();
            for i in 0..n {
                assert_eq!(y[i], dense[i * n + k]);
            }
        }
    }

    #[test]
    fn diagonal_is_elementwise() {
        let (_, h) = band(0.0, 3);
        let x: Vec<f64> = (0..h.dim()).map(|i| i as f64 * 0.1 - 3.0).collect();
        let y = matvec(&h, &x).unwrap();
        for i in 0..h.dim() {
            assert_eq!(y[i], h.diag[i] * x[i]);
        }
    }

    #[test]
    fn size_mismatch_is_error() {
        let (_, h) = band(0.2, 0);
        assert!(matches!(
            matvec(&h, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn default_dense_matches_explicit() {
        struct Wrap<'a>(&'a BandHamiltonian);
        impl SymmetricOperator for Wrap<'_> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                self.0.apply(x, y)
            }
        }
        let (_, h) = band(0.3, 8);
        assert_eq!(Wrap(&h).to_dense(), h.to_dense());
    }

    #[test]
    fn magnetization_is_conserved() {
        // Embed band vectors into the full space and check the full operator
        // restricted by the flip-flop part never leaves the band.
        let (b, h) = band(0.5, 4);
        for k in [0, 40, 125] {
            let mut e = vec![0.0; h.dim()];
            e[k] = 1.0;
            let y = matvec(&h, &e).unwrap();
            for (i, v) in y.iter().enumerate() {
                if *v != 0.0 {
                    assert_eq!(b.state(i).count_ones(), 4);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn matvec_is_symmetric(seed in 0u64..1000, us in proptest::collection::vec(-1.0f64..1.0, 126), vs in proptest::collection::vec(-1.0f64..1.0, 126)) {
            let (_, h) = band(0.6, seed);
            let hu = matvec(&h, &us).unwrap();
            let hv = matvec(&h, &vs).unwrap();
            let a: f64 = us.iter().zip(&hv).map(|(x, y)| x * y).sum();
            let b: f64 = hu.iter().zip(&vs).map(|(x, y)| x * y).sum();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn matvec_is_linear(seed in 0u64..100, s in -3.0f64..3.0, us in proptest::collection::vec(-1.0f64..1.0, 126), vs in proptest::collection::vec(-1.0f64..1.0, 126)) {
            let (_, h) = band(0.6, seed);
            let comb: Vec<f64> = us.iter().zip(&vs).map(|(u, v)| s * u + v).collect();
            let lhs = matvec(&h, &comb).unwrap();
            let hu = matvec(&h, &us).unwrap();
            let hv = matvec(&h, &vs).unwrap();
            for i in 0..126 {
                prop_assert!((lhs[i] - (s * hu[i] + hv[i])).abs() < 1e-12);
            }
        }
    }
}
