//! Lanczos iteration with partial reorthogonalization.
//!
//! Loss of orthogonality is tracked with the usual `omega` recurrence; once an
//! estimated overlap exceeds `eps^(3/4)` two consecutive Krylov vectors are
//! orthogonalized against the whole basis (classical Gram-Schmidt, repeated
//! while a pass removes more than ~30% of the norm). At checkpoints only the
//! eigenvalues and last eigenvector row of the tridiagonal projection are
//! computed. Once the estimates `|beta_m * y_{m,i}|` of the wanted pairs drop
//! below tolerance, the Ritz vectors are formed, re-orthonormalized with a
//! small Rayleigh-Ritz step and their true residuals are checked against the
//! operator.

use super::tridiagonal::eigen_last_row;
use super::{
    degenerate_indices, dense_eigen, max_residual, Eigenvectors, Method, Negated, SpectrumResult,
    SymmetricOperator, DEFAULT_RESIDUAL_TOL,
};
use crate::error::{Error, Result};
use faer::{Col, ColRef, Mat, MatRef};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lowest,
    Highest,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Residual tolerance `||H v - lambda v||` for every returned pair.
    pub tol: f64,
    /// Largest Krylov dimension; `None` picks `max(20 k + 200, 400)`, reduced
    /// to what the memory budget holds and capped by the operator size.
    pub max_krylov: Option<usize>,
    /// Bytes allowed for the stored Krylov basis.
    pub memory_budget: usize,
    /// Seed of the start vector.
    pub seed: u64,
    pub want_vectors: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_RESIDUAL_TOL,
            max_krylov: None,
            memory_budget: 3 << 30,
            seed: 0x5eed_1a2c,
            want_vectors: true,
        }
    }
}

/// `k` extremal eigenpairs of `op`, returned in ascending order.
pub fn iterative_extremal<A: SymmetricOperator + ?Sized>(
    op: &A,
    k: usize,
    side: Side,
    opts: &LanczosOptions,
) -> Result<SpectrumResult> {
    match side {
        Side::Lowest => lowest(op, k, opts),
        Side::Highest => {
            let mut r = lowest(&Negated(op), k, opts)?;
            r.eigenvalues.iter_mut().for_each(|e| *e = -*e);
            r.eigenvalues.reverse();
            if let Some(v) = r.eigenvectors.take() {
                let dim = v.dim();
                let mut data = Vec::with_capacity(dim * v.count());
                for m in (0..v.count()).rev() {
                    data.extend_from_slice(v.column(m));
                }
                r.eigenvectors = Some(Eigenvectors::from_columns(dim, data));
            }
            r.degenerate = degenerate_indices(&r.eigenvalues);
            Ok(r)
        }
    }
}

struct Krylov {
    n: usize,
    basis: Vec<f64>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl Krylov {
    fn len(&self) -> usize {
        self.alphas.len()
    }

    fn basis_ref(&self, m: usize) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.basis[..m * self.n], self.n, m)
    }

    /// Removes the span of the first `m` basis vectors from `w`, repeating
    /// the pass when it cancels most of the norm.
    fn orthogonalize(&self, w: &mut [f64], m: usize) {
        if m == 0 {
            return;
        }
        let v = self.basis_ref(m);
        for _ in 0..3 {
            let before = norm(w);
            let c: Col<f64> = v.transpose() * ColRef::from_slice(w);
            let proj: Col<f64> = v * &c;
            for (wi, pi) in w.iter_mut().zip(proj.iter()) {
                *wi -= pi;
            }
            if norm(w) > std::f64::consts::FRAC_1_SQRT_2 * before {
                break;
            }
        }
    }

    /// Dense copy of the tridiagonal projection of size `m`.
    fn tridiagonal(&self, m: usize) -> Vec<f64> {
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            t[i * m + i] = self.alphas[i];
            if i + 1 < m {
                t[i * m + i + 1] = self.betas[i];
                t[(i + 1) * m + i] = self.betas[i];
            }
        }
        t
    }
}

/// Orthonormalizes the `k` columns of `x` and rediagonalizes `op` on their
/// span, restoring full orthogonality lost to the semi-orthogonal basis.
fn rayleigh_ritz<A: SymmetricOperator + ?Sized>(
    op: &A,
    mut x: Vec<f64>,
    k: usize,
) -> Result<(Vec<f64>, Eigenvectors)> {
    let n = op.dim();
    for i in 0..k {
        let (done, rest) = x.split_at_mut(i * n);
        let col = &mut rest[..n];
        if i > 0 {
            let q = MatRef::from_column_major_slice(&done[..], n, i);
            for _ in 0..2 {
                let c: Col<f64> = q.transpose() * ColRef::from_slice(col);
                let proj: Col<f64> = q * &c;
                for (a, b) in col.iter_mut().zip(proj.iter()) {
                    *a -= b;
                }
            }
        }
        let s = norm(col);
        col.iter_mut().for_each(|v| *v /= s);
    }
    let mut hq = vec![0.0; k * n];
    for i in 0..k {
        op.apply(&x[i * n..(i + 1) * n], &mut hq[i * n..(i + 1) * n]);
    }
    let q = MatRef::from_column_major_slice(&x, n, k);
    let g: Mat<f64> = q.transpose() * MatRef::from_column_major_slice(&hq, n, k);
    let small: Vec<f64> = (0..k * k)
        .map(|ij| {
            let (i, j) = (ij / k, ij % k);
            0.5 * (g[(i, j)] + g[(j, i)])
        })
        .collect();
    let (values, z) = dense_eigen(k, &small, true)?;
    let z = z.expect("vectors requested");
    let zm = MatRef::from_column_major_slice(z.data(), k, k);
    let out: Mat<f64> = q * zm;
    let mut data = Vec::with_capacity(k * n);
    for j in 0..k {
        data.extend(out.col(j).iter().copied());
    }
    Ok((values, Eigenvectors::from_columns(n, data)))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn lowest<A: SymmetricOperator + ?Sized>(
    op: &A,
    k: usize,
    opts: &LanczosOptions,
) -> Result<SpectrumResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("need 1 <= k <= {n}, got {k}")));
    }
    // the default Krylov dimension shrinks to fit the memory budget
    let fit = opts.memory_budget / (8 * n).max(1);
    let max_m = match opts.max_krylov {
        Some(m) => m,
        None => (20 * k + 200).max(400).min(fit.max(k + 20)),
    }
    .min(n)
    .max(k);
    let bytes = max_m.saturating_mul(n).saturating_mul(8);
    if bytes > opts.memory_budget {
        return Err(Error::Capacity {
            what: "Krylov basis bytes",
            requested: bytes,
            limit: opts.memory_budget,
            hint: "; lower k or the Krylov dimension",
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut kry = Krylov {
        n,
        basis: Vec::with_capacity(max_m * n),
        alphas: Vec::with_capacity(max_m),
        betas: Vec::with_capacity(max_m),
    };
    kry.basis.extend(random_unit(n, &mut rng));

    let mut w = vec![0.0; n];
    let mut omega_prev: Vec<f64> = Vec::with_capacity(max_m + 1);
    let mut omega: Vec<f64> = vec![1.0];
    let mut omega_next: Vec<f64> = Vec::with_capacity(max_m + 1);
    let mut force_reorth = false;
    let mut anorm = 0.0f64;
    let mut best = f64::INFINITY;
    let mut next_check = (k + 20).min(max_m);
    loop {
        let j = kry.len();
        let vj = &kry.basis[j * n..(j + 1) * n];
        op.apply(vj, &mut w);
        let alpha: f64 = w.iter().zip(vj).map(|(a, b)| a * b).sum();
        kry.alphas.push(alpha);
        for (wi, vi) in w.iter_mut().zip(vj) {
            *wi -= alpha * vi;
        }
        if j > 0 {
            let beta_prev = kry.betas[j - 1];
            let vp = &kry.basis[(j - 1) * n..j * n];
            for (wi, vi) in w.iter_mut().zip(vp) {
                *wi -= beta_prev * vi;
            }
        }
        let m = j + 1;
        let mut beta = norm(&w);
        anorm = anorm.max(alpha.abs() + beta + kry.betas.last().copied().unwrap_or(0.0));
        let floor = f64::EPSILON * (n as f64).sqrt();

        let scale = kry
            .alphas
            .iter()
            .map(|a| a.abs())
            .fold(0.0, f64::max)
            .max(1.0);
        if beta <= 1e-12 * scale && m < max_m {
            // invariant subspace; continue from a fresh orthogonal direction
            let mut fresh = random_unit(n, &mut rng);
            kry.orthogonalize(&mut fresh, m);
            let s = norm(&fresh);
            fresh.iter_mut().for_each(|x| *x /= s);
            w.copy_from_slice(&fresh);
            beta = 0.0;
            omega_next.clear();
            omega_next.resize(m, floor);
        } else {
            // estimated overlaps of the next vector with the basis
            omega_next.clear();
            for i in 0..j {
                let mut t = kry.betas[i] * omega[i + 1] + (kry.alphas[i] - alpha) * omega[i];
                if i > 0 {
                    t += kry.betas[i - 1] * omega[i - 1];
                }
                if j > 0 {
                    t -= kry.betas[j - 1] * omega_prev[i];
                }
                omega_next.push((t + (2.0 * f64::EPSILON * anorm).copysign(t)) / beta);
            }
            omega_next.push(floor);
            let lost = omega_next.iter().any(|o| o.abs() > f64::EPSILON.powf(0.75));
            if force_reorth || lost {
                kry.orthogonalize(&mut w, m);
                beta = norm(&w);
                omega_next.iter_mut().for_each(|o| *o = floor);
                // the following vector inherits the lost components
                force_reorth = !force_reorth;
            }
            w.iter_mut().for_each(|x| *x /= beta);
        }
        omega_next.push(1.0);
        std::mem::swap(&mut omega_prev, &mut omega);
        std::mem::swap(&mut omega, &mut omega_next);

        if m >= next_check || m == max_m {
            let (_, last) = eigen_last_row(&kry.alphas, &kry.betas)?;
            let estimate = last[..k]
                .iter()
                .map(|y| (beta * y).abs())
                .fold(0.0, f64::max);
            best = best.min(estimate);
            if estimate <= 0.1 * opts.tol || m == n || m == max_m {
                let (_, y) = dense_eigen(m, &kry.tridiagonal(m), true)?;
                let y = y.expect("vectors requested");
                let basis = kry.basis_ref(m);
                let mut ritz = Vec::with_capacity(k * n);
                for i in 0..k {
                    let x: Col<f64> = basis * ColRef::from_slice(y.column(i));
                    ritz.extend(x.iter().copied());
                }
                let (values, vectors) = rayleigh_ritz(op, ritz, k)?;
                let resid = max_residual(op, &values, &vectors);
                best = best.min(resid);
                if resid <= opts.tol {
                    return Ok(SpectrumResult {
                        degenerate: degenerate_indices(&values),
                        eigenvalues: values,
                        eigenvectors: opts.want_vectors.then_some(vectors),
                        method: Method::Iterative,
                        residual_bound: Some(resid),
                    });
                }
                if m == max_m || m == n {
                    return Err(Error::NoConvergence {
                        iterations: m,
                        best_residual: best,
                    });
                }
            }
            next_check = (m + (m / 8).max(10)).min(max_m);
        }
        kry.betas.push(beta);
        kry.basis.extend_from_slice(&w);
    }
}
