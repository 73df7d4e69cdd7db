//! Slow reference evaluations used to cross-check the fast paths.
//!
//! Everything here materializes the full diagonal reflection matrices, loops
//! over users and beams explicitly, or searches exhaustively. None of it is
//! used by the optimizer itself; the `selftest` command and the test suites
//! compare the production code against these.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::ChannelSet;
use crate::linalg::{c, cis, diag, CMat, CVec, RMat, RVec, C64};
use crate::metrics::StarState;
use crate::scenario::Side;
use crate::solvers::{RealConstraint, RealQcqp, RealQuad};

pub fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_cvec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| random_c64(rng))
}

pub fn random_cmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_c64(rng))
}

pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| cis(2.0 * PI * rng.random::<f64>()))
}

/// Random Hermitian PSD matrix of rank `rank` plus `ridge·I`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize, ridge: f64) -> CMat {
    let b = random_cmat(rng, n, rank);
    &b * b.adjoint() + CMat::identity(n, n) * c(ridge, 0.0)
}

/// Unit-scale channels for algebraic checks (no pathloss).
pub fn random_channel_set<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, k_r: usize, k_t: usize) -> ChannelSet {
    let k = k_r + k_t;
    ChannelSet {
        g: random_cmat(rng, n, m),
        f: (0..k).map(|_| random_cvec(rng, n)).collect(),
        h_d: (0..k).map(|_| random_cvec(rng, m)).collect(),
        h_dt: random_cvec(rng, m),
        user_side: std::iter::repeat_n(Side::Reflect, k_r)
            .chain(std::iter::repeat_n(Side::Transmit, k_t))
            .collect(),
    }
}

pub fn random_star<R: Rng + ?Sized>(rng: &mut R, n: usize) -> StarState {
    StarState {
        a_r: RVec::from_fn(n, |_, _| 0.2 + 1.3 * rng.random::<f64>()),
        a_t: RVec::from_fn(n, |_, _| 0.2 + 1.3 * rng.random::<f64>()),
        phi_r: random_phases(rng, n),
        phi_t: random_phases(rng, n),
    }
}

fn side_matrix(star: &StarState, side: Side) -> CMat {
    diag(&star.psi(side))
}

/// `h̃_kᴴ` as a 1×M row, built from the dense `Ψ`.
pub fn dense_equivalent_row(k: usize, star: &StarState, set: &ChannelSet) -> CMat {
    let psi = side_matrix(star, set.user_side[k]);
    let row = set.h_d[k].adjoint() + set.f[k].adjoint() * psi * &set.g;
    CMat::from_iterator(1, row.len(), row.iter().copied())
}

pub fn dense_sinr(k: usize, w: &CMat, star: &StarState, set: &ChannelSet, sigma_k_sq: f64, sigma_v_sq: f64) -> f64 {
    let row = dense_equivalent_row(k, star, set);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for j in 0..w.ncols() {
        let g = (&row * w.column(j))[(0, 0)].norm_sqr();
        if j == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    let psi = side_matrix(star, set.user_side[k]);
    let noise = sigma_v_sq * (set.f[k].adjoint() * psi).norm_squared() + sigma_k_sq;
    signal / (interference + noise)
}

pub fn dense_sum_rate(w: &CMat, star: &StarState, set: &ChannelSet, sigma_k_sq: f64, sigma_v_sq: f64) -> f64 {
    (0..set.k())
        .map(|k| (1.0 + dense_sinr(k, w, star, set, sigma_k_sq, sigma_v_sq)).log2())
        .sum()
}

pub fn dense_radar_snr(u: &CVec, w: &CMat, h_dt: &CVec, xi_sq: f64, sigma_z_sq: f64) -> f64 {
    let ht = h_dt * h_dt.adjoint();
    let cmat = &ht * w * w.adjoint() * ht.adjoint();
    let num = u.dotc(&(&cmat * u)).re;
    let den = u.dotc(&(CMat::identity(u.len(), u.len()) * c(sigma_z_sq, 0.0) * u)).re;
    xi_sq * num / den
}

pub fn dense_ris_power(w: &CMat, star: &StarState, g: &CMat, sigma_v_sq: f64) -> f64 {
    let mut total = 0.0;
    for side in [Side::Reflect, Side::Transmit] {
        let psi = side_matrix(star, side);
        for j in 0..w.ncols() {
            total += (&psi * g * w.column(j)).norm_squared();
        }
        total += sigma_v_sq * psi.norm_squared();
    }
    total
}

/// FP surrogate (natural log) evaluated term by term with dense matrices:
/// `Σ log(1+γ_k) − Σ γ_k + Σ_k [2√(1+γ_k) Re{ρ_k* h̃_kᴴ w_k} − |ρ_k|²·(total_k)]`.
pub fn dense_fp_objective(
    gamma: &RVec,
    rho: &CVec,
    w: &CMat,
    star: &StarState,
    set: &ChannelSet,
    sigma_k_sq: f64,
    sigma_v_sq: f64,
) -> f64 {
    let mut value = 0.0;
    for k in 0..set.k() {
        let row = dense_equivalent_row(k, star, set);
        let psi = side_matrix(star, set.user_side[k]);
        let mut total = sigma_v_sq * (set.f[k].adjoint() * psi).norm_squared() + sigma_k_sq;
        for j in 0..w.ncols() {
            total += (&row * w.column(j))[(0, 0)].norm_sqr();
        }
        let own = (&row * w.column(k))[(0, 0)];
        value += (1.0 + gamma[k]).ln() - gamma[k];
        value += 2.0 * (1.0 + gamma[k]).sqrt() * (rho[k].conj() * own).re - rho[k].norm_sqr() * total;
    }
    value
}

/// Exhaustive search of `φᴴΩφ − 2Re{φᴴμ}` over `points` phases per entry.
pub fn phase_grid_minimum(omega: &CMat, mu: &CVec, points: usize) -> (f64, CVec) {
    let n = mu.len();
    let grid: Vec<C64> = (0..points).map(|i| cis(2.0 * PI * i as f64 / points as f64)).collect();
    let mut idx = vec![0usize; n];
    let mut best = (f64::INFINITY, CVec::zeros(n));
    loop {
        let phi = CVec::from_fn(n, |i, _| grid[idx[i]]);
        let v = phi.dotc(&(omega * &phi)).re - 2.0 * phi.dotc(mu).re;
        if v < best.0 {
            best = (v, phi);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < points {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// A convex QCQP in real variables for the dual oracle:
/// minimize `xᵀPx − 2qᵀx` subject to `xᵀA_i x − 2b_iᵀx ≤ r_i`.
/// Linear constraints are encoded with `A_i = 0`.
#[derive(Debug, Clone)]
pub struct DenseQcqp {
    pub p: RMat,
    pub q: RVec,
    pub constraints: Vec<(RMat, RVec, f64)>,
}

impl DenseQcqp {
    pub fn objective(&self, x: &RVec) -> f64 {
        x.dot(&(&self.p * x)) - 2.0 * self.q.dot(x)
    }

    pub fn constraint(&self, i: usize, x: &RVec) -> f64 {
        let (a, b, r) = &self.constraints[i];
        x.dot(&(a * x)) - 2.0 * b.dot(x) - r
    }

    /// Minimizer of the Lagrangian for multipliers `lambda` (requires a
    /// positive definite Lagrangian Hessian).
    fn lagrangian_argmin(&self, lambda: &[f64]) -> Option<RVec> {
        let mut h = self.p.clone();
        let mut g = self.q.clone();
        for ((a, b, _), &l) in self.constraints.iter().zip(lambda) {
            h += a * l;
            g += b * l;
        }
        h.cholesky().map(|ch| ch.solve(&g))
    }

    /// Lagrange dual function value.
    pub fn dual_value(&self, lambda: &[f64]) -> Option<f64> {
        let x = self.lagrangian_argmin(lambda)?;
        let mut v = self.objective(&x);
        for (i, &l) in lambda.iter().enumerate() {
            v += l * self.constraint(i, &x);
        }
        Some(v)
    }

    /// Projected gradient ascent on the dual (`λ ≥ 0`) with backtracking.
    /// Returns the dual optimum, a lower bound on the primal optimum.
    pub fn dual_projected_gradient(&self, max_iter: usize, tol: f64) -> f64 {
        let mcons = self.constraints.len();
        let mut lambda = vec![0.0; mcons];
        let mut value = self.dual_value(&lambda).unwrap_or(f64::NEG_INFINITY);
        if !value.is_finite() {
            lambda.iter_mut().for_each(|l| *l = 1.0);
            value = self.dual_value(&lambda).expect("dual undefined at start");
        }
        let mut step = 1.0;
        for _ in 0..max_iter {
            let x = self.lagrangian_argmin(&lambda).expect("dual iterate left the domain");
            let grad: Vec<f64> = (0..mcons).map(|i| self.constraint(i, &x)).collect();
            let mut accepted = false;
            let mut next = lambda.clone();
            for _ in 0..60 {
                for i in 0..mcons {
                    next[i] = (lambda[i] + step * grad[i]).max(0.0);
                }
                if let Some(v) = self.dual_value(&next) {
                    let moved: f64 = (0..mcons).map(|i| (next[i] - lambda[i]) * grad[i]).sum();
                    let dist: f64 = (0..mcons).map(|i| (next[i] - lambda[i]).powi(2)).sum();
                    if v >= value + moved - dist / (2.0 * step) - 1e-15 * value.abs() {
                        accepted = true;
                        let gain = v - value;
                        value = v;
                        std::mem::swap(&mut lambda, &mut next);
                        step *= 1.5;
                        if dist.sqrt() < tol * (1.0 + lambda.iter().map(|l| l.abs()).sum::<f64>()) && gain.abs() < tol * (1.0 + value.abs()) {
                            return value;
                        }
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        value
    }
}

fn random_rmat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_rvec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RVec {
    RVec::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random convex QCQP with a positive definite objective, `quad` ellipsoidal
/// constraints and `lin` halfspaces, all strictly satisfied at the origin.
/// Returned in both the solver's and the oracle's form.
pub fn random_convex_qcqp<R: Rng + ?Sized>(rng: &mut R, n: usize, quad: usize, lin: usize) -> (RealQcqp, DenseQcqp) {
    let b = random_rmat(rng, n, n);
    let p = b.transpose() * &b + RMat::identity(n, n) * 0.1;
    let q = random_rvec(rng, n) * 3.0;
    let mut dense = Vec::new();
    for _ in 0..quad {
        let rank = rng.random_range(1..=n);
        let cm = random_rmat(rng, rank, n);
        let a = cm.transpose() * cm;
        dense.push((a, random_rvec(rng, n) * 0.5, rng.random_range(0.5..2.0)));
    }
    for _ in 0..lin {
        dense.push((RMat::zeros(n, n), random_rvec(rng, n), rng.random_range(0.2..1.0)));
    }
    let constraints = dense
        .iter()
        .map(|(a, bv, r)| RealConstraint {
            p: if a.iter().all(|&v| v == 0.0) { RealQuad::Zero } else { RealQuad::Dense(a.clone()) },
            q: bv * -2.0,
            r: -r,
        })
        .collect();
    let real = RealQcqp {
        p0: RealQuad::Dense(p.clone()),
        q0: &q * -2.0,
        constraints,
    };
    (real, DenseQcqp { p, q, constraints: dense })
}
