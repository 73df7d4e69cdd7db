//! STAR-RIS coefficient blocks for the three operating protocols and the
//! passive baseline.
//!
//! With `W`, `γ`, `ρ` fixed, the negated surrogate restricted to one side is
//! `ψᴴDψ − 2Re{dᴴψ} + const` and the surface power is `Σ_side ψᴴΠψ`.

use crate::channels::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{c, unit_phase, CMat, CVec, RMat, RVec};
use crate::metrics::{incident_power, BeamformingState, StarState, SystemParams};
use crate::scenario::{PhaseSolver, Side};
use crate::solvers::{
    minimize_unit_modulus_ccm, minimize_unit_modulus_mm, QcqpProblem, QuadMatrix, QuadraticForm, RealConstraint, RealQcqp,
    RealQuad,
};
use crate::subproblems::{accept, solve_near, solve_real_near, BlockOutcome, BlockStatus};

/// Stopping rule of the phase stages.
pub const PHASE_TOL: f64 = 1e-9;
pub const PHASE_ITER_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct StarProblemData {
    /// `D_r`, `D_t`
    pub quad_r: CMat,
    pub quad_t: CMat,
    /// `d_r`, `d_t`
    pub lin_r: CVec,
    pub lin_t: CVec,
    /// Diagonal of `Π = diag(Σ_j |Gw_j|²) + σ_v² I`.
    pub pi: RVec,
    pub p_ris: Option<f64>,
}

pub fn star_problem_data(state: &BeamformingState, channels: &ChannelSet, params: &SystemParams) -> Result<StarProblemData> {
    let (m, n, k) = (channels.m(), channels.n(), channels.k());
    if state.w.nrows() != m || state.w.ncols() != k + m || state.rho.len() != k || state.gamma.len() != k {
        return Err(Error::Dimension("beamforming state does not match channels".into()));
    }
    let gw_conj = (&channels.g * &state.w).map(|z| z.conj());
    let mut quad_r = CMat::zeros(n, n);
    let mut quad_t = CMat::zeros(n, n);
    let mut lin_r = CVec::zeros(n);
    let mut lin_t = CVec::zeros(n);
    for i in 0..k {
        let f = &channels.f[i];
        // column j: a_ij = diag(f_i)·conj(G w_j), so h̃_iᴴw_j = c_ij + a_ijᴴψ
        let a = CMat::from_fn(n, k + m, |r, j| f[r] * gw_conj[(r, j)]);
        let cvec = state.w.ad_mul(&channels.h_d[i]).map(|z| z.conj());
        let rho2 = state.rho[i].norm_sqr();
        let mut quad = &a * a.adjoint();
        for r in 0..n {
            quad[(r, r)] += c(params.sigma_v_sq * f[r].norm_sqr(), 0.0);
        }
        let lin = a.column(i) * (state.rho[i] * (1.0 + state.gamma[i]).sqrt()) - (&a * cvec) * c(rho2, 0.0);
        let (qs, ls) = match channels.user_side[i] {
            Side::Reflect => (&mut quad_r, &mut lin_r),
            Side::Transmit => (&mut quad_t, &mut lin_t),
        };
        *qs += quad * c(rho2, 0.0);
        *ls += lin;
    }
    let pi = incident_power(&state.w, &channels.g).add_scalar(params.sigma_v_sq);
    Ok(StarProblemData {
        quad_r,
        quad_t,
        lin_r,
        lin_t,
        pi,
        p_ris: params.p_ris,
    })
}

impl StarProblemData {
    pub fn n(&self) -> usize {
        self.pi.len()
    }

    fn side(&self, side: Side) -> (&CMat, &CVec) {
        match side {
            Side::Reflect => (&self.quad_r, &self.lin_r),
            Side::Transmit => (&self.quad_t, &self.lin_t),
        }
    }

    pub fn side_objective(&self, side: Side, psi: &CVec) -> f64 {
        let (q, d) = self.side(side);
        psi.dotc(&(q * psi)).re - 2.0 * d.dotc(psi).re
    }

    /// Negated surrogate up to a constant.
    pub fn objective(&self, star: &StarState) -> f64 {
        self.side_objective(Side::Reflect, &star.psi_r()) + self.side_objective(Side::Transmit, &star.psi_t())
    }

    /// `ψ_rᴴΠψ_r + ψ_tᴴΠψ_t`
    pub fn ris_power(&self, star: &StarState) -> f64 {
        (0..self.n())
            .map(|i| (star.a_r[i].powi(2) + star.a_t[i].powi(2)) * self.pi[i])
            .sum()
    }
}

/// Real amplitude-stage terms for fixed phases: the side objective equals
/// `aᵀΩ_s a − 2μ_sᵀa` when `ψ_s = a∘φ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTerms {
    pub omega_r: RMat,
    pub mu_r: RVec,
    pub omega_t: RMat,
    pub mu_t: RVec,
}

pub fn amplitude_terms(data: &StarProblemData, phi_r: &CVec, phi_t: &CVec) -> AmplitudeTerms {
    let side = |q: &CMat, d: &CVec, phi: &CVec| {
        let n = phi.len();
        let mut omega = RMat::from_fn(n, n, |i, j| (phi[i].conj() * q[(i, j)] * phi[j]).re);
        omega = (&omega + omega.transpose()) * 0.5;
        let mu = RVec::from_fn(n, |i, _| (d[i].conj() * phi[i]).re);
        (omega, mu)
    };
    let (omega_r, mu_r) = side(&data.quad_r, &data.lin_r, phi_r);
    let (omega_t, mu_t) = side(&data.quad_t, &data.lin_t, phi_t);
    AmplitudeTerms {
        omega_r,
        mu_r,
        omega_t,
        mu_t,
    }
}

/// Phase-stage terms for fixed amplitudes: the side objective equals
/// `φᴴΩ̂φ − 2Re{φᴴμ̂}` with `Ω̂ = diag(a)D diag(a)`, `μ̂ = a∘d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTerms {
    pub omega_hat: CMat,
    pub mu_hat: CVec,
}

pub fn phase_terms(data: &StarProblemData, side: Side, a: &RVec) -> PhaseTerms {
    let (q, d) = data.side(side);
    let n = a.len();
    PhaseTerms {
        omega_hat: CMat::from_fn(n, n, |i, j| q[(i, j)] * (a[i] * a[j])),
        mu_hat: CVec::from_fn(n, |i, _| d[i] * a[i]),
    }
}

fn check_star(star: &StarState, data: &StarProblemData) -> Result<()> {
    let n = data.n();
    if star.a_r.len() != n || star.a_t.len() != n || star.phi_r.len() != n || star.phi_t.len() != n {
        return Err(Error::Dimension(format!("STAR-RIS state must have {n} elements")));
    }
    Ok(())
}

/// Joint QCQP over `(ψ_r, ψ_t)` followed by polar decomposition.
pub fn solve_star_ued(
    state: &BeamformingState,
    star: &StarState,
    channels: &ChannelSet,
    params: &SystemParams,
) -> Result<BlockOutcome<StarState>> {
    let data = star_problem_data(state, channels, params)?;
    solve_ued_with(&data, star)
}

/// UED block on pre-assembled terms.
pub fn solve_ued_with(data: &StarProblemData, star: &StarState) -> Result<BlockOutcome<StarState>> {
    check_star(star, data)?;
    let n = data.n();
    let mut q = CMat::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&data.quad_r);
    q.view_mut((n, n), (n, n)).copy_from(&data.quad_t);
    let mut b = CVec::zeros(2 * n);
    b.rows_mut(0, n).copy_from(&data.lin_r);
    b.rows_mut(n, n).copy_from(&data.lin_t);
    let quad_constraints = match data.p_ris {
        Some(budget) => vec![(
            QuadraticForm::new(QuadMatrix::Diagonal(RVec::from_fn(2 * n, |i, _| data.pi[i % n])), CVec::zeros(2 * n)),
            budget,
        )],
        // passive: |ψ_r,n|² + |ψ_t,n|² ≤ 1
        None => (0..n)
            .map(|e| {
                let mask = RVec::from_fn(2 * n, |i, _| if i % n == e { 1.0 } else { 0.0 });
                (QuadraticForm::new(QuadMatrix::Diagonal(mask), CVec::zeros(2 * n)), 1.0)
            })
            .collect(),
    };
    let problem = QcqpProblem {
        objective: QuadraticForm::new(QuadMatrix::Dense(q), b),
        quad_constraints,
        linear_constraints: vec![],
        ball_constraints: vec![],
    };
    let mut x0 = CVec::zeros(2 * n);
    x0.rows_mut(0, n).copy_from(&star.psi_r());
    x0.rows_mut(n, n).copy_from(&star.psi_t());
    let prev_feasible = problem.is_feasible(&x0, 1e-9);
    let prev_obj = problem.objective.eval(&x0);
    Ok(match solve_near(&problem, &x0) {
        Ok((x, kkt)) => {
            let obj = problem.objective.eval(&x);
            let candidate = StarState::from_psi(&x.rows(0, n).into_owned(), &x.rows(n, n).into_owned());
            accept(star.clone(), prev_obj, prev_feasible, candidate, obj, kkt)
        }
        Err(e) => BlockOutcome {
            value: star.clone(),
            status: BlockStatus::Failed(e.to_string()),
            kkt: None,
        },
    })
}

/// Equal amplitudes on both sides: amplitude QCQP, then one phase pass per side.
pub fn solve_star_eed(
    state: &BeamformingState,
    star: &StarState,
    channels: &ChannelSet,
    params: &SystemParams,
    solver: PhaseSolver,
) -> Result<BlockOutcome<StarState>> {
    let n = channels.n();
    let ones = RVec::from_element(n, 1.0);
    solve_split(state, star, channels, params, solver, &ones, &ones, false)
}

/// Each element serves one side; amplitudes masked by side.
#[allow(clippy::too_many_arguments)]
pub fn solve_star_sd(
    state: &BeamformingState,
    star: &StarState,
    channels: &ChannelSet,
    params: &SystemParams,
    mask: &[Side],
    solver: PhaseSolver,
    freeze_amplitudes: bool,
) -> Result<BlockOutcome<StarState>> {
    let n = channels.n();
    if mask.len() != n {
        return Err(Error::MaskLength {
            expected: n,
            got: mask.len(),
        });
    }
    let beta_r = RVec::from_fn(n, |i, _| if mask[i] == Side::Reflect { 1.0 } else { 0.0 });
    let beta_t = RVec::from_fn(n, |i, _| if mask[i] == Side::Transmit { 1.0 } else { 0.0 });
    solve_split(state, star, channels, params, solver, &beta_r, &beta_t, freeze_amplitudes)
}

/// Shared EED/SD machinery with `a_r = β_r∘a`, `a_t = β_t∘a`.
#[allow(clippy::too_many_arguments)]
fn solve_split(
    state: &BeamformingState,
    star: &StarState,
    channels: &ChannelSet,
    params: &SystemParams,
    solver: PhaseSolver,
    beta_r: &RVec,
    beta_t: &RVec,
    freeze: bool,
) -> Result<BlockOutcome<StarState>> {
    let data = star_problem_data(state, channels, params)?;
    solve_split_with(&data, star, solver, beta_r, beta_t, freeze)
}

/// EED/SD block on pre-assembled terms; `β_r`, `β_t` are the per-element
/// side weights (all ones for EED, the side masks for SD).
pub fn solve_split_with(
    data: &StarProblemData,
    star: &StarState,
    solver: PhaseSolver,
    beta_r: &RVec,
    beta_t: &RVec,
    freeze: bool,
) -> Result<BlockOutcome<StarState>> {
    check_star(star, data)?;
    let n = data.n();
    let budget = data.p_ris.ok_or(Error::Invalid {
        field: "mode",
        reason: "equal-energy and space-division blocks need a surface power budget".into(),
    })?;
    let mut current = star.clone();
    let mut statuses = Vec::new();
    let mut kkt = None;

    if !freeze {
        let terms = amplitude_terms(data, &current.phi_r, &current.phi_t);
        let omega = RMat::from_fn(n, n, |i, j| {
            beta_r[i] * beta_r[j] * terms.omega_r[(i, j)] + beta_t[i] * beta_t[j] * terms.omega_t[(i, j)]
        });
        let mu = beta_r.component_mul(&terms.mu_r) + beta_t.component_mul(&terms.mu_t);
        let weight = RVec::from_fn(n, |i, _| (beta_r[i].powi(2) + beta_t[i].powi(2)) * data.pi[i]);
        let mut constraints = vec![RealConstraint {
            p: RealQuad::Diagonal(weight),
            q: RVec::zeros(n),
            r: -budget,
        }];
        for i in 0..n {
            let mut e = RVec::zeros(n);
            e[i] = -1.0;
            constraints.push(RealConstraint {
                p: RealQuad::Zero,
                q: e,
                r: 0.0,
            });
        }
        let problem = RealQcqp {
            p0: RealQuad::Dense(omega),
            q0: &mu * -2.0,
            constraints,
        };
        // common amplitude: the larger of the masked copies
        let a0 = RVec::from_fn(n, |i, _| {
            let r = if beta_r[i] > 0.0 { current.a_r[i] / beta_r[i] } else { 0.0 };
            let t = if beta_t[i] > 0.0 { current.a_t[i] / beta_t[i] } else { 0.0 };
            r.max(t)
        });
        let prev_feasible = problem.max_constraint(&a0) <= 1e-9;
        let prev_obj = problem.objective(&a0);
        match solve_real_near(&problem, &a0) {
            Ok((a, report)) => {
                let a = a.map(|v| v.max(0.0));
                let obj = problem.objective(&a);
                kkt = Some(report.clone());
                let out = accept(a0, prev_obj, prev_feasible, a, obj, report);
                current.a_r = beta_r.component_mul(&out.value);
                current.a_t = beta_t.component_mul(&out.value);
                statuses.push(out.status);
            }
            Err(e) => statuses.push(BlockStatus::Failed(e.to_string())),
        }
    }

    for (side, beta) in [(Side::Reflect, beta_r), (Side::Transmit, beta_t)] {
        let active: Vec<usize> = (0..n).filter(|&i| beta[i] > 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let a_full = match side {
            Side::Reflect => &current.a_r,
            Side::Transmit => &current.a_t,
        };
        let a = RVec::from_iterator(active.len(), active.iter().map(|&i| a_full[i]));
        let full = phase_terms(data, side, a_full);
        let omega = CMat::from_fn(active.len(), active.len(), |i, j| full.omega_hat[(active[i], active[j])]);
        let mu = CVec::from_iterator(active.len(), active.iter().map(|&i| full.mu_hat[i]));
        debug_assert_eq!(a.len(), mu.len());
        let phi_full = match side {
            Side::Reflect => &current.phi_r,
            Side::Transmit => &current.phi_t,
        };
        let phi0 = CVec::from_iterator(active.len(), active.iter().map(|&i| unit_phase(phi_full[i])));
        let result = match solver {
            PhaseSolver::Mm => minimize_unit_modulus_mm(&omega, &mu, &phi0, PHASE_TOL, PHASE_ITER_CAP),
            PhaseSolver::Ccm => minimize_unit_modulus_ccm(&omega, &mu, &phi0, PHASE_TOL, PHASE_ITER_CAP),
        };
        match result {
            Ok(r) if r.objective <= r.history[0] => {
                let target = match side {
                    Side::Reflect => &mut current.phi_r,
                    Side::Transmit => &mut current.phi_t,
                };
                for (pos, &i) in active.iter().enumerate() {
                    target[i] = r.phi[pos];
                }
                statuses.push(BlockStatus::Updated);
            }
            Ok(_) => statuses.push(BlockStatus::KeptPrevious),
            Err(e) => statuses.push(BlockStatus::Failed(e.to_string())),
        }
    }

    let status = statuses
        .iter()
        .find(|s| matches!(s, BlockStatus::Failed(_)))
        .or_else(|| statuses.iter().find(|s| **s == BlockStatus::Restored))
        .or_else(|| statuses.iter().find(|s| **s == BlockStatus::Updated))
        .cloned()
        .unwrap_or(BlockStatus::KeptPrevious);
    Ok(BlockOutcome {
        value: current,
        status,
        kkt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{fp_objective, Noise};
    use crate::linalg::{cis, hermitian_defect, hermitian_eigen};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> SystemParams {
        SystemParams {
            sigma_k_sq: 0.3,
            sigma_v_sq: 0.1,
            sigma_z_sq: 0.2,
            xi_sq: 1.0,
            gamma_t: 0.5,
            p_bs: 4.0,
            p_ris: Some(20.0),
        }
    }

    fn instance(seed: u64, k_r: usize, k_t: usize, n: usize) -> (ChannelSet, BeamformingState, StarState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 3;
        let k = k_r + k_t;
        let set = oracle::random_channel_set(&mut rng, m, n, k_r, k_t);
        let w = oracle::random_cmat(&mut rng, m, k + m) * c(0.3, 0.0);
        let mut st = BeamformingState::new(w, oracle::random_cvec(&mut rng, m));
        st.gamma = RVec::from_fn(k, |_, _| rng.random::<f64>() * 2.0);
        st.rho = oracle::random_cvec(&mut rng, k);
        let star = oracle::random_star(&mut rng, n).scaled(0.3);
        (set, st, star)
    }

    fn min_eig_ok(q: &CMat) -> bool {
        let (vals, _) = hermitian_eigen(q);
        vals[0] >= -1e-10 * q.norm().max(1.0)
    }

    #[test]
    fn assembled_forms_match_dense_surrogate() {
        for seed in 0..10 {
            let (set, st, star) = instance(seed, 2, 1, 6);
            let p = params();
            let data = star_problem_data(&st, &set, &p).unwrap();
            assert!(hermitian_defect(&data.quad_r) <= 1e-10 && hermitian_defect(&data.quad_t) <= 1e-10);
            assert!(min_eig_ok(&data.quad_r) && min_eig_ok(&data.quad_t));
            let dense = |s: &StarState| oracle::dense_fp_objective(&st.gamma, &st.rho, &st.w, s, &set, p.sigma_k_sq, p.sigma_v_sq);
            let off = StarState::off(6);
            let f0 = dense(&off);
            let f1 = dense(&star);
            assert!((f0 - f1 - data.objective(&star)).abs() <= 1e-10 * f1.abs().max(1.0));
            let power = oracle::dense_ris_power(&st.w, &star, &set.g, p.sigma_v_sq);
            assert!((data.ris_power(&star) - power).abs() <= 1e-10 * power);

            let terms = amplitude_terms(&data, &star.phi_r, &star.phi_t);
            let a_r_obj = star.a_r.dot(&(&terms.omega_r * &star.a_r)) - 2.0 * terms.mu_r.dot(&star.a_r);
            assert!((a_r_obj - data.side_objective(Side::Reflect, &star.psi_r())).abs() <= 1e-10 * a_r_obj.abs().max(1.0));
            let a_t_obj = star.a_t.dot(&(&terms.omega_t * &star.a_t)) - 2.0 * terms.mu_t.dot(&star.a_t);
            assert!((a_t_obj - data.side_objective(Side::Transmit, &star.psi_t())).abs() <= 1e-10 * a_t_obj.abs().max(1.0));

            let ph = phase_terms(&data, Side::Transmit, &star.a_t);
            let phase_obj = star.phi_t.dotc(&(&ph.omega_hat * &star.phi_t)).re - 2.0 * star.phi_t.dotc(&ph.mu_hat).re;
            assert!((phase_obj - a_t_obj).abs() <= 1e-10 * phase_obj.abs().max(1.0));
            assert!(min_eig_ok(&ph.omega_hat));
        }
    }

    #[test]
    fn zero_linear_terms_give_zero_surface() {
        let (set, st, star) = instance(11, 1, 1, 4);
        let mut data = star_problem_data(&st, &set, &params()).unwrap();
        data.lin_r.fill(c(0.0, 0.0));
        data.lin_t.fill(c(0.0, 0.0));
        let out = solve_ued_with(&data, &star).unwrap();
        assert!(out.value.amplitude_energy() < 1e-8, "{}", out.value.amplitude_energy());
        assert!(data.objective(&out.value).abs() < 1e-8);
        let ones = RVec::from_element(4, 1.0);
        let mut eed_start = star.clone();
        eed_start.a_t = eed_start.a_r.clone();
        let eed = solve_split_with(&data, &eed_start, PhaseSolver::Mm, &ones, &ones, false).unwrap();
        assert!(eed.value.a_r.amax() < 1e-4, "{}", eed.value.a_r.amax());
    }

    #[test]
    fn polar_round_trip() {
        let (set, st, star) = instance(12, 2, 2, 5);
        let out = solve_star_ued(&st, &star, &set, &params()).unwrap();
        let s = &out.value;
        let psi = s.psi_r();
        let back = StarState::from_psi(&psi, &s.psi_t());
        assert!((back.psi_r() - &psi).norm() <= 1e-12 * psi.norm().max(1.0));
    }

    #[test]
    fn ued_matches_grid_on_tiny_instance() {
        // N=2, M=1, one reflect user: the transmit side carries nothing.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let set = oracle::random_channel_set(&mut rng, 1, 2, 1, 0);
        let mut st = BeamformingState::new(CMat::from_element(1, 2, c(0.6, 0.2)), CVec::from_element(1, c(1.0, 0.0)));
        st.gamma = RVec::from_element(1, 1.3);
        st.rho = CVec::from_element(1, c(0.8, -0.4));
        let p = SystemParams {
            p_ris: Some(0.5),
            ..params()
        };
        let data = star_problem_data(&st, &set, &p).unwrap();
        let out = solve_star_ued(&st, &StarState::off(2).scaled(0.0), &set, &p).unwrap();
        let got = data.objective(&out.value);

        let amax: Vec<f64> = (0..2).map(|i| (0.5 / data.pi[i]).sqrt()).collect();
        let mut best = f64::INFINITY;
        for ia in 0..50 {
            for ib in 0..50 {
                let a = [amax[0] * ia as f64 / 49.0, amax[1] * ib as f64 / 49.0];
                if a[0] * a[0] * data.pi[0] + a[1] * a[1] * data.pi[1] > 0.5 {
                    continue;
                }
                for pa in 0..64 {
                    for pb in 0..64 {
                        let psi = CVec::from_vec(vec![
                            cis(2.0 * std::f64::consts::PI * pa as f64 / 64.0) * a[0],
                            cis(2.0 * std::f64::consts::PI * pb as f64 / 64.0) * a[1],
                        ]);
                        best = best.min(data.side_objective(Side::Reflect, &psi));
                    }
                }
            }
        }
        assert!(got <= best + 1e-9, "{got} vs grid {best}");
        assert!(best - got <= 0.02 * got.abs().max(1e-12), "{got} vs grid {best}");
    }

    #[test]
    fn eed_stays_in_budget_and_improves() {
        for seed in 0..6 {
            let (set, st, star) = instance(30 + seed, 2, 2, 6);
            let mut star = star;
            star.a_t = star.a_r.clone();
            let p = params();
            let noise = Noise::from(&p);
            let before = fp_objective(&st.gamma, &st.rho, &st.w, &star, &set, noise).unwrap();
            for solver in [PhaseSolver::Mm, PhaseSolver::Ccm] {
                let out = solve_star_eed(&st, &star, &set, &p, solver).unwrap();
                let s = &out.value;
                assert_eq!(s.a_r, s.a_t);
                assert!(s.a_r.iter().all(|&a| a >= 0.0));
                let power = crate::metrics::ris_power(&st.w, s, &set.g, p.sigma_v_sq);
                assert!(power <= 20.0 * (1.0 + 1e-6));
                let after = fp_objective(&st.gamma, &st.rho, &st.w, s, &set, noise).unwrap();
                assert!(after >= before - 1e-9 * before.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sd_masks_amplitudes() {
        let (set, st, star) = instance(40, 1, 1, 6);
        let mask = crate::scenario::alternating_mask(6);
        let out = solve_star_sd(&st, &star, &set, &params(), &mask, PhaseSolver::Mm, false).unwrap();
        for (i, side) in mask.iter().enumerate() {
            match side {
                Side::Reflect => assert_eq!(out.value.a_t[i], 0.0),
                Side::Transmit => assert_eq!(out.value.a_r[i], 0.0),
            }
        }
        let bad = solve_star_sd(&st, &star, &set, &params(), &mask[..5], PhaseSolver::Mm, false);
        assert!(matches!(bad, Err(Error::MaskLength { .. })));
    }

    #[test]
    fn all_reflect_mask_without_transmit_users() {
        let (set, st, star) = instance(41, 2, 0, 5);
        let mask = vec![Side::Reflect; 5];
        let data = star_problem_data(&st, &set, &params()).unwrap();
        assert_eq!(data.quad_t.norm(), 0.0);
        assert_eq!(data.lin_t.norm(), 0.0);
        let out = solve_star_sd(&st, &star, &set, &params(), &mask, PhaseSolver::Ccm, false).unwrap();
        assert!(out.value.a_t.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn passive_respects_unit_gain() {
        let (set, st, star) = instance(42, 2, 1, 5);
        let p = SystemParams {
            sigma_v_sq: 0.0,
            p_ris: None,
            ..params()
        };
        let out = solve_star_ued(&st, &star.scaled(0.5), &set, &p).unwrap();
        let s = &out.value;
        for i in 0..5 {
            assert!(s.a_r[i].powi(2) + s.a_t[i].powi(2) <= 1.0 + 1e-9);
        }
    }
}
