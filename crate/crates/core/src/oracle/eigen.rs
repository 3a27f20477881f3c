//! Cyclic Jacobi eigendecomposition of a 3×3 Hermitian matrix.
//!
//! Each rotation first removes the phase of the pivot `h_pq` with a diagonal
//! unitary, then applies a real Jacobi rotation to the resulting real
//! symmetric 2×2 block. Convergence is quadratic; a handful of sweeps reach
//! machine precision for any 3×3 input.

use thiserror::Error;

use super::matrix::{Matrix3, C64};

const MAX_SWEEPS: usize = 64;
const RESIDUAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("input matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("input matrix has non-finite entries")]
    NonFinite,
    #[error("Jacobi sweeps did not converge (off-diagonal norm {0:e})")]
    NotConverged(f64),
    #[error("eigen residual {0:e} above tolerance")]
    Residual(f64),
}

/// Eigenvalues in ascending order, with matching eigenvectors as columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigen {
    pub values: [f64; 3],
    pub vectors: Matrix3,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Matrix3 {
        self.vectors * Matrix3::real_diagonal(self.values) * self.vectors.adjoint()
    }

    /// `V diag(φ(λ)) V†` for a scalar function of the eigenvalues.
    pub fn apply(&self, func: impl Fn(f64) -> C64) -> Matrix3 {
        let diag = Matrix3::diagonal(self.values.map(func));
        self.vectors * diag * self.vectors.adjoint()
    }
}

fn off_diagonal_norm(a: &Matrix3) -> f64 {
    let mut sum = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                sum += a.get(i, j).norm_sqr();
            }
        }
    }
    sum.sqrt()
}

pub fn hermitian_eigen(h: &Matrix3) -> Result<HermitianEigen, EigenError> {
    if !h.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let scale = h.frobenius_norm();
    let defect = h.max_abs_diff(&h.adjoint());
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(EigenError::NotHermitian(defect));
    }
    if scale == 0.0 {
        return Ok(HermitianEigen {
            values: [0.0; 3],
            vectors: Matrix3::identity(),
        });
    }

    let mut a = *h;
    let mut v = Matrix3::identity();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= f64::EPSILON * 1e-2 * scale {
            converged = true;
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a.get(p, q);
            let magnitude = apq.norm();
            if magnitude <= f64::MIN_POSITIVE {
                continue;
            }
            let phase = apq / magnitude;
            let app = a.get(p, p).re;
            let aqq = a.get(q, q).re;
            let theta = (aqq - app) / (2.0 * magnitude);
            let t = if theta == 0.0 {
                1.0
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let conj_phase = phase.conj();

            let mut rot = Matrix3::identity();
            rot.0[p][p] = C64::new(c, 0.0);
            rot.0[p][q] = C64::new(s, 0.0);
            rot.0[q][p] = conj_phase * -s;
            rot.0[q][q] = conj_phase * c;

            a = rot.adjoint() * a * rot;
            a.0[p][q] = C64::new(0.0, 0.0);
            a.0[q][p] = C64::new(0.0, 0.0);
            v = v * rot;
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if off > 1e-14 * scale {
            return Err(EigenError::NotConverged(off));
        }
    }

    let mut order = [0usize, 1, 2];
    let diag = [a.get(0, 0).re, a.get(1, 1).re, a.get(2, 2).re];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut vectors = Matrix3::zeros();
    for (col, &src) in order.iter().enumerate() {
        for row in 0..3 {
            vectors.0[row][col] = v.get(row, src);
        }
    }
    let result = HermitianEigen {
        values: order.map(|i| diag[i]),
        vectors,
    };

    let residual = result.reconstruct().max_abs_diff(h);
    if residual > RESIDUAL_TOLERANCE * scale {
        return Err(EigenError::Residual(residual));
    }
    Ok(result)
}
