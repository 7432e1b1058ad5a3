//! Eigenvalues and eigenvectors of band Hamiltonians.
//!
//! Two routes: full dense diagonalization for moderate dimensions and a
//! Lanczos iteration with partial reorthogonalization for a few extremal pairs
//! of large sectors.

mod dense;
mod lanczos;
mod operator;
mod tridiagonal;

pub use dense::{dense_eigen, dense_full_diag, DEFAULT_DENSE_CAP};
pub use lanczos::{iterative_extremal, LanczosOptions, Side};
pub use operator::{matvec, DenseSymmetric, Negated, SymmetricOperator};

use serde::{Deserialize, Serialize};

/// Eigenvalues closer than this are flagged as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Default residual tolerance for returned eigenpairs.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Dense,
    Iterative,
}

/// Column-major set of eigenvectors, one column per eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvectors {
    dim: usize,
    data: Vec<f64>,
}

impl Eigenvectors {
    pub fn from_columns(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % dim.max(1), 0);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    /// All columns, column-major.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, m: usize) -> &[f64] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }
}

/// Sorted eigenvalues with optional aligned eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Eigenvectors>,
    pub method: Method,
    /// `max ||H v - lambda v||` over the returned pairs; `None` without vectors.
    pub residual_bound: Option<f64>,
    /// Indices `i` with `eigenvalues[i + 1] - eigenvalues[i] < DEGENERACY_TOL`.
    pub degenerate: Vec<usize>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, m: usize) -> Option<&[f64]> {
        self.eigenvectors.as_ref().map(|v| v.column(m))
    }
}

pub(crate) fn degenerate_indices(sorted: &[f64]) -> Vec<usize> {
    sorted
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] < DEGENERACY_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// Largest residual `||A v - lambda v||` over the given pairs.
pub fn max_residual<A: SymmetricOperator + ?Sized>(
    op: &A,
    eigenvalues: &[f64],
    vectors: &Eigenvectors,
) -> f64 {
    let mut y = vec![0.0; op.dim()];
    let mut worst = 0.0f64;
    for (m, &lambda) in eigenvalues.iter().enumerate() {
        let v = vectors.column(m);
        op.apply(v, &mut y);
        let r: f64 = y
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    worst
}
