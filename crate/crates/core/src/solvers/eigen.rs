//! Hermitian eigen helpers.

use crate::error::SolverError;
use crate::linalg::{c, hermitian_eigen, normalize_phase, CMat, CVec};

/// Maximizer of `uᴴCu / uᴴEu` with its quotient value.
#[derive(Debug, Clone, PartialEq)]
pub struct Rayleigh {
    pub vector: CVec,
    pub value: f64,
}

/// Principal generalized eigenvector of `(C, E)` for Hermitian PSD `C` and
/// Hermitian PD `E`, unit norm, first significant coordinate real-positive.
pub fn max_generalized_rayleigh(cm: &CMat, e: &CMat) -> Result<Rayleigh, SolverError> {
    let n = cm.nrows();
    if cm.ncols() != n || e.nrows() != n || e.ncols() != n {
        return Err(SolverError::Dimension(format!("C is {}x{}, E is {}x{}", n, cm.ncols(), e.nrows(), e.ncols())));
    }
    let chol = e.clone().cholesky().ok_or(SolverError::Singular)?;
    let l = chol.l();
    let scale = l.diagonal().iter().map(|d| d.re).fold(f64::INFINITY, f64::min);
    if !(scale > 1e-150) {
        return Err(SolverError::Singular);
    }
    // A = L⁻¹ C L⁻ᴴ
    let linv_c = l.solve_lower_triangular(cm).ok_or(SolverError::Singular)?;
    let a_adj = l.solve_lower_triangular(&linv_c.adjoint()).ok_or(SolverError::Singular)?;
    let a = a_adj.adjoint();
    let (vals, vecs) = hermitian_eigen(&a);
    let top = vals.len() - 1;
    let y = vecs.column(top).into_owned();
    let mut u = l.adjoint().solve_upper_triangular(&y).ok_or(SolverError::Singular)?;
    let norm = u.norm();
    u /= c(norm, 0.0);
    normalize_phase(&mut u);
    Ok(Rayleigh { value: vals[top], vector: u })
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration with a
/// residual bound, so the result is an upper estimate (to `tol`) of `λ_max`.
/// Falls back to a full decomposition if the iteration stalls.
pub fn lambda_max_power(q: &CMat, tol: f64, max_iter: usize) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let fro = q.norm();
    if fro == 0.0 {
        return 0.0;
    }
    // Deterministic, generically non-orthogonal start.
    let mut x = CVec::from_fn(n, |i, _| c(1.0 + 0.37 * i as f64 / n as f64, 0.11 * (i % 7) as f64));
    x /= c(x.norm(), 0.0);
    let mut theta_prev = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        let y = q * &x;
        let theta = x.dotc(&y).re;
        let resid = (&y - &x * c(theta, 0.0)).norm();
        if resid <= tol * fro || (theta - theta_prev).abs() <= tol * tol * fro {
            return theta + resid;
        }
        theta_prev = theta;
        let ny = y.norm();
        if ny == 0.0 {
            break;
        }
        x = y / c(ny, 0.0);
    }
    let (vals, _) = hermitian_eigen(q);
    vals[n - 1]
}
