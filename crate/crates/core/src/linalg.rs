//! Dense complex linear-algebra helpers shared by the solvers and subproblems.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub fn cis(theta: f64) -> C64 {
    Complex::from_polar(1.0, theta)
}

/// Projects a complex number onto the unit circle; zero maps to 1.
#[inline]
pub fn unit_phase(z: C64) -> C64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        c(1.0, 0.0)
    }
}

pub fn squared_norm(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `aᴴ b`
pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

/// `xᴴ Q x`, real part only (exact for Hermitian `Q`).
pub fn quad_form(q: &CMat, x: &CVec) -> f64 {
    x.dotc(&(q * x)).re
}

/// Largest deviation from Hermitian symmetry.
pub fn hermitian_defect(q: &CMat) -> f64 {
    let n = q.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((q[(i, j)] - q[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(Q + Qᴴ) / 2`
pub fn hermitian_part(q: &CMat) -> CMat {
    (q + q.adjoint()).scale(0.5)
}

/// Real embedding `[[Re Q, -Im Q], [Im Q, Re Q]]`, so that `xᴴQx = zᵀ Q̂ z`
/// with `z = [Re x; Im x]` for Hermitian `Q`.
pub fn real_embedding(q: &CMat) -> RMat {
    let (r, cols) = q.shape();
    let mut out = RMat::zeros(2 * r, 2 * cols);
    for i in 0..r {
        for j in 0..cols {
            let v = q[(i, j)];
            out[(i, j)] = v.re;
            out[(i, j + cols)] = -v.im;
            out[(i + r, j)] = v.im;
            out[(i + r, j + cols)] = v.re;
        }
    }
    out
}

pub fn to_real(v: &CVec) -> RVec {
    let n = v.len();
    RVec::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

pub fn from_real(z: &RVec) -> CVec {
    let n = z.len() / 2;
    CVec::from_fn(n, |i, _| c(z[i], z[i + n]))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(q: &CMat) -> (RVec, CMat) {
    let eig = hermitian_part(q).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = RVec::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vecs = CMat::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Rotates `v` so that its first non-negligible coordinate is real positive.
pub fn normalize_phase(v: &mut CVec) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12 * scale).copied() {
        let rot = unit_phase(z).conj();
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Dense `diag(v)`.
pub fn diag(v: &CVec) -> CMat {
    CMat::from_diagonal(v)
}

/// Column-major stacking of the columns of `w`.
pub fn stack_columns(w: &CMat) -> CVec {
    CVec::from_iterator(w.len(), w.iter().copied())
}

/// Inverse of [`stack_columns`].
pub fn unstack_columns(v: &CVec, rows: usize) -> CMat {
    CMat::from_iterator(rows, v.len() / rows, v.iter().copied())
}
