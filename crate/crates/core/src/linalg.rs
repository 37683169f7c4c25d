//! Symmetric positive definite solves: Jacobi-preconditioned conjugate
//! gradients and a sparse Cholesky factorization (faer, with its
//! fill-reducing ordering).

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Default relative residual target for [`cg_solve`].
pub const DEFAULT_CG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(a: &CsrMatrix, v: &[f64]) -> Result<()> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: v.len(),
        });
    }
    Ok(())
}

/// Preconditioned conjugate gradients warm-started from `x0`.
///
/// Stops once `||A x - rhs|| <= rel_tol ||rhs||`. Exhausting `max_iter` is
/// reported through `SolveStats::converged`, not as an error; non-positive
/// curvature `p^T A p <= 0` is an error.
pub fn cg_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    check_dims(a, rhs)?;
    check_dims(a, x0)?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let rhs_norm = dot(rhs, rhs).sqrt();
    let mut x = x0.to_vec();
    if rhs_norm == 0.0 && x.iter().all(|v| *v == 0.0) {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let scale = if rhs_norm > 0.0 { rhs_norm } else { 1.0 };
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let mut res = dot(&r, &r).sqrt();
    if res <= rel_tol * rhs_norm {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                relative_residual: res / scale,
                converged: true,
            },
        ));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "conjugate gradients met curvature {curvature:e} at iteration {it}"
            )));
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= rel_tol * rhs_norm {
            // confirm against the true residual, recursion drift can fake convergence
            let ax = a.mul_vec(&x);
            let true_res = rhs
                .iter()
                .zip(&ax)
                .map(|(b, y)| (b - y).powi(2))
                .sum::<f64>()
                .sqrt();
            if true_res <= rel_tol * rhs_norm {
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        relative_residual: true_res / scale,
                        converged: true,
                    },
                ));
            }
            for i in 0..n {
                r[i] = rhs[i] - ax[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok((
        x,
        SolveStats {
            iterations: max_iter,
            relative_residual: res / scale,
            converged: false,
        },
    ))
}

/// Sparse `L L^T` factorization of an SPD matrix, reusable across right-hand sides.
pub struct CholeskyFactor {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl std::fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CholeskyFactor")
            .field("n", &self.n)
            .finish()
    }
}

impl CholeskyFactor {
    /// Factors the lower triangle of `a`; fails with
    /// [`Error::NotPositiveDefinite`] on a non-positive pivot.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let mut triplets = Vec::with_capacity(a.nnz() / 2 + n);
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    triplets.push(Triplet::new(i, j, v));
                }
            }
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Usage(format!("cannot build sparse matrix: {e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::NotPositiveDefinite(format!("Cholesky failed: {e:?}")))?;
        Ok(CholeskyFactor { n, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rhs.len(),
            });
        }
        let mut b = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.llt.solve_in_place(b.as_mut());
        Ok((0..self.n).map(|i| b[(i, 0)]).collect())
    }
}
