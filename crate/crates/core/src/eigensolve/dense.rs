use super::{
    degenerate_indices, max_residual, Eigenvectors, Method, SpectrumResult, SymmetricOperator,
};
use crate::error::{Error, Result};
use faer::{Mat, Side};

/// Default largest dimension accepted by [`dense_full_diag`].
pub const DEFAULT_DENSE_CAP: usize = 16_000;

/// All eigenpairs of `op` by dense diagonalization.
pub fn dense_full_diag<A: SymmetricOperator + ?Sized>(
    op: &A,
    want_vectors: bool,
    cap: usize,
) -> Result<SpectrumResult> {
    let n = op.dim();
    if n > cap {
        return Err(Error::Capacity {
            what: "dense diagonalization dimension",
            requested: n,
            limit: cap,
            hint: "; use the iterative solver for extremal states",
        });
    }
    let (eigenvalues, vectors) = dense_eigen(n, &op.to_dense(), want_vectors)?;
    let residual_bound = vectors.as_ref().map(|v| max_residual(op, &eigenvalues, v));
    Ok(SpectrumResult {
        degenerate: degenerate_indices(&eigenvalues),
        eigenvalues,
        eigenvectors: vectors,
        method: Method::Dense,
        residual_bound,
    })
}

/// Eigen-decomposition of a row-major symmetric `n x n` matrix, ascending.
pub fn dense_eigen(
    n: usize,
    a: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Eigenvectors>)> {
    if n == 0 {
        return Ok((
            Vec::new(),
            want_vectors.then(|| Eigenvectors::from_columns(0, Vec::new())),
        ));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    if !want_vectors {
        let mut vals = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Dense(format!("{e:?}")))?;
        vals.sort_by(f64::total_cmp);
        return Ok((vals, None));
    }
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Dense(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let vals = order.iter().map(|&i| s[i]).collect();
    let mut data = Vec::with_capacity(n * n);
    for &j in &order {
        let col = u.col(j);
        // fix the sign so the largest-magnitude component is positive
        let mut pivot = 0.0f64;
        for i in 0..n {
            if col[i].abs() > pivot.abs() {
                pivot = col[i];
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        data.extend((0..n).map(|i| sign * col[i]));
    }
    Ok((vals, Some(Eigenvectors::from_columns(n, data))))
}
