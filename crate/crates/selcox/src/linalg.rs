//! Small dense linear-algebra helpers over nalgebra, tuned for the
//! symmetric positive-semidefinite matrices produced by Cox information.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solve `a x = b` for symmetric positive-definite `a` via Cholesky.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().cholesky().map(|ch| ch.solve(b))
}

/// Inverse of a symmetric positive-definite matrix, `None` if Cholesky fails.
pub fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    a.clone().cholesky().map(|ch| ch.inverse())
}

/// Moore-Penrose pseudo-inverse through the symmetric eigendecomposition.
/// Eigenvalues below `tol * max_eigenvalue` are treated as zero.
pub fn sym_pseudo_inverse(a: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, usize) {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = if max_ev > 0.0 { tol * max_ev } else { tol };
    let mut inv_ev = DVector::zeros(n);
    let mut rank = 0usize;
    for i in 0..n {
        if eig.eigenvalues[i].abs() > cutoff {
            inv_ev[i] = 1.0 / eig.eigenvalues[i];
            rank += 1;
        }
    }
    let v = &eig.eigenvectors;
    let pinv = v * DMatrix::from_diagonal(&inv_ev) * v.transpose();
    (pinv, rank)
}

/// Solve with Cholesky, falling back to the pseudo-inverse when the matrix
/// is not numerically positive definite. Returns the solution and whether
/// the fallback was needed.
pub fn solve_or_pinv(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, bool) {
    if let Some(x) = spd_solve(a, b) {
        if x.iter().all(|v| v.is_finite()) {
            return (x, false);
        }
    }
    let (pinv, _) = sym_pseudo_inverse(a, 1e-12);
    (&pinv * b, true)
}

/// Inverse that requires positive definiteness, mapping failure onto the
/// crate error naming the offending subset.
pub fn spd_inverse_or_err(a: &DMatrix<f64>, subset: &[usize]) -> Result<DMatrix<f64>> {
    spd_inverse(a).ok_or_else(|| Error::SingularInformation {
        subset: subset.to_vec(),
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
