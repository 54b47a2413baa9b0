//! Dense Hermitian eigensolver.
//!
//! An `n×n` Hermitian matrix `H = X + iY` acts on `ℂⁿ ≅ ℝ²ⁿ` as the real
//! symmetric matrix
//!
//! ```text
//! [ X  -Y ]
//! [ Y   X ]
//! ```
//!
//! whose spectrum is that of `H` with every eigenvalue doubled. The real
//! matrix is diagonalized with cyclic Jacobi rotations and the doubled
//! eigenvalues are paired back up.
//!
//! Zone sweeps need eigenvalues at tens of thousands of points, where the
//! Jacobi route is about ten times slower than Householder reduction plus
//! implicit QR. [`eigenvalues_fast`] provides that second route; the two
//! are checked against each other in tests.

use crate::floquet::FloquetMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on full Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm, relative to the full norm, at which a sweep stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
/// Relative spread under which sorted real eigenvalues are treated as one
/// cluster when rebuilding complex eigenvectors.
const CLUSTER_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Eigenvalues sorted non-decreasingly, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; `vectors[j]` belongs to `values[j]`.
    pub vectors: Option<Vec<Vec<Complex64>>>,
}

impl EigenResult {
    pub fn vector(&self, j: usize) -> Option<&[Complex64]> {
        self.vectors.as_ref().map(|v| v[j].as_slice())
    }
}

/// Full eigendecomposition of a Hermitian Floquet matrix.
pub fn eigensolve(m: &FloquetMatrix, want_vectors: bool) -> Result<EigenResult, EigenError> {
    let n = m.dim();
    if m.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let size = 2 * n;
    let mut a = vec![0.0; size * size];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            a[i * size + j] = z.re;
            a[(i + n) * size + (j + n)] = z.re;
            a[i * size + (j + n)] = -z.im;
            a[(i + n) * size + j] = z.im;
        }
    }
    let (diag, basis) = jacobi_symmetric(&mut a, size, want_vectors)?;

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let sorted: Vec<f64> = order.iter().map(|&i| diag[i]).collect();

    let values: Vec<f64> = (0..n).map(|j| 0.5 * (sorted[2 * j] + sorted[2 * j + 1])).collect();

    let vectors = basis.map(|v| complex_vectors(&v, size, n, &order, &sorted, m.frobenius_norm()));
    Ok(EigenResult { values, vectors })
}

/// Eigenvalues only.
pub fn eigenvalues(m: &FloquetMatrix) -> Result<Vec<f64>, EigenError> {
    eigensolve(m, false).map(|r| r.values)
}

/// Sorted eigenvalues through Householder tridiagonalization and implicit
/// QR iteration.
pub fn eigenvalues_fast(m: &FloquetMatrix) -> Result<Vec<f64>, EigenError> {
    let n = m.dim();
    if m.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let dense = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 10_000).ok_or(EigenError::NoConvergence {
        sweeps: 10_000,
        off_norm: f64::NAN,
    })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Cyclic Jacobi on a dense real symmetric matrix stored row-major.
/// Returns the diagonal and, if requested, the rotation basis (columns).
fn jacobi_symmetric(
    a: &mut [f64],
    size: usize,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>), EigenError> {
    let mut v = want_vectors.then(|| {
        let mut v = vec![0.0; size * size];
        for i in 0..size {
            v[i * size + i] = 1.0;
        }
        v
    });
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOL * norm;

    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for p in 0..size {
            for q in (p + 1)..size {
                s += a[p * size + q] * a[p * size + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(a);
        if off <= threshold || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..size {
            for q in (p + 1)..size {
                let apq = a[p * size + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * size + p];
                let aqq = a[q * size + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..size {
                    let akp = a[k * size + p];
                    let akq = a[k * size + q];
                    a[k * size + p] = c * akp - s * akq;
                    a[k * size + q] = s * akp + c * akq;
                }
                for k in 0..size {
                    let apk = a[p * size + k];
                    let aqk = a[q * size + k];
                    a[p * size + k] = c * apk - s * aqk;
                    a[q * size + k] = s * apk + c * aqk;
                }
                a[p * size + q] = 0.0;
                a[q * size + p] = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..size {
                        let vkp = v[k * size + p];
                        let vkq = v[k * size + q];
                        v[k * size + p] = c * vkp - s * vkq;
                        v[k * size + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let diag = (0..size).map(|i| a[i * size + i]).collect();
    Ok((diag, v))
}

/// Maps the real eigenvectors `(x; y)` to complex vectors `x + iy` and picks
/// an orthonormal complex basis inside every cluster of equal eigenvalues.
fn complex_vectors(
    basis: &[f64],
    size: usize,
    n: usize,
    order: &[usize],
    sorted: &[f64],
    scale: f64,
) -> Vec<Vec<Complex64>> {
    let tol = CLUSTER_TOL * scale.max(f64::MIN_POSITIVE);
    let column = |c: usize| -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new(basis[i * size + c], basis[(i + n) * size + c]))
            .collect()
    };

    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < size {
        let mut end = start + 1;
        while end < size && sorted[end] - sorted[end - 1] <= tol {
            end += 1;
        }
        // Pairs (2j, 2j+1) whose first member falls in [start, end).
        let wanted = end.div_ceil(2) - start.div_ceil(2);
        let mut pool: Vec<Vec<Complex64>> = (start..end).map(|r| column(order[r])).collect();
        let mut picked: Vec<Vec<Complex64>> = Vec::with_capacity(wanted);
        for _ in 0..wanted {
            // Pivoted Gram-Schmidt: take the candidate with the largest
            // component outside the span picked so far.
            for cand in pool.iter_mut() {
                for q in &picked {
                    let proj: Complex64 = q.iter().zip(cand.iter()).map(|(a, b)| a.conj() * b).sum();
                    for (c, qi) in cand.iter_mut().zip(q.iter()) {
                        *c -= proj * qi;
                    }
                }
            }
            let (best, norm) = pool
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let mut q = pool.swap_remove(best);
            for z in q.iter_mut() {
                *z /= norm;
            }
            picked.push(q);
        }
        out.extend(picked);
        start = end;
    }
    out
}
