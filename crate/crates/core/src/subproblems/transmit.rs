//! DFBS transmit beamforming block.
//!
//! With the auxiliaries fixed, the surrogate is a concave quadratic in the
//! stacked beams `w̃ = vec(W)`. The radar SNR floor is replaced by its
//! first-order expansion at the previous beams `w_s`, which gives a convex
//! QCQP with one linear, one ball, and one quadratic constraint.

use crate::channels::ChannelSet;
use crate::error::{Error, Result, SolverError};
use crate::linalg::{c, stack_columns, unstack_columns, CMat, CVec, RVec};
use crate::metrics::{equivalent_channels, BeamformingState, StarState, SystemParams};
use crate::scenario::Side;
use crate::solvers::{LinearConstraint, QcqpProblem, QuadMatrix, QuadraticForm, Sense};
use crate::subproblems::{accept, solve_near, BlockOutcome, BlockStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitProblemData {
    pub m: usize,
    /// `vec(W)` at assembly time.
    pub w_tilde: CVec,
    /// Linear terms of reflection-side and transmission-side users.
    pub alpha_r: CVec,
    pub alpha_t: CVec,
    /// `I ⊗ Σ_k |ρ_k|² h̃_k h̃_kᴴ` per side.
    pub q_r: CMat,
    pub q_t: CMat,
    /// `I ⊗ |uᴴh_dt|² h_dt h_dtᴴ`
    pub y: CMat,
    /// `Γ_t σ_z² ‖u‖² / ξ²`
    pub eta: f64,
    /// `I ⊗ Gᴴ diag(|ψ|²) G` per side.
    pub xi_r: CMat,
    pub xi_t: CMat,
    /// Right side of the surface power constraint; `None` drops it.
    pub c3_bound: Option<f64>,
    pub p_bs: f64,
    /// Expansion point of the radar constraint.
    pub w_s: CVec,
    /// False when `Γ_t = 0`: the SNR floor is vacuous and is dropped.
    pub radar_active: bool,
}

/// `I_reps ⊗ a`
pub fn kron_identity(a: &CMat, reps: usize) -> CMat {
    let m = a.nrows();
    let mut out = CMat::zeros(m * reps, m * reps);
    for r in 0..reps {
        out.view_mut((r * m, r * m), (m, m)).copy_from(a);
    }
    out
}

pub fn assemble_transmit_problem(
    state: &BeamformingState,
    star: &StarState,
    channels: &ChannelSet,
    params: &SystemParams,
    w_s: &CMat,
) -> Result<TransmitProblemData> {
    let (m, k) = (channels.m(), channels.k());
    let cols = k + m;
    if w_s.nrows() != m || w_s.ncols() != cols || state.w.shape() != w_s.shape() {
        return Err(Error::Dimension(format!("beams must be {m}x{cols}")));
    }
    if state.gamma.len() != k || state.rho.len() != k || state.u.len() != m {
        return Err(Error::Dimension("auxiliaries or radar filter".into()));
    }
    let h = equivalent_channels(channels, star)?;

    let mut a_r = CMat::zeros(m, m);
    let mut a_t = CMat::zeros(m, m);
    let mut alpha_r = CVec::zeros(m * cols);
    let mut alpha_t = CVec::zeros(m * cols);
    for i in 0..k {
        let outer = &h[i] * h[i].adjoint() * c(state.rho[i].norm_sqr(), 0.0);
        let lin = &h[i] * (state.rho[i] * (1.0 + state.gamma[i]).sqrt());
        let (a, alpha) = match channels.user_side[i] {
            Side::Reflect => (&mut a_r, &mut alpha_r),
            Side::Transmit => (&mut a_t, &mut alpha_t),
        };
        *a += outer;
        alpha.rows_mut(i * m, m).copy_from(&lin);
    }

    let h_dt = &channels.h_dt;
    let gain = state.u.dotc(h_dt).norm_sqr();
    let y_block = h_dt * h_dt.adjoint() * c(gain, 0.0);
    let eta = params.gamma_t * params.sigma_z_sq * state.u.norm_squared() / params.xi_sq;

    let surface = |psi: &CVec| {
        let weights = CVec::from_iterator(psi.len(), psi.iter().map(|z| c(z.norm_sqr(), 0.0)));
        let wg = CMat::from_fn(channels.g.nrows(), m, |n, j| channels.g[(n, j)] * weights[n]);
        channels.g.ad_mul(&wg)
    };
    let psi_r = star.psi_r();
    let psi_t = star.psi_t();
    let c3_bound = params
        .p_ris
        .map(|p| p - params.sigma_v_sq * (psi_r.norm_squared() + psi_t.norm_squared()));

    Ok(TransmitProblemData {
        m,
        w_tilde: stack_columns(&state.w),
        alpha_r,
        alpha_t,
        q_r: kron_identity(&a_r, cols),
        q_t: kron_identity(&a_t, cols),
        y: kron_identity(&y_block, cols),
        eta,
        xi_r: kron_identity(&surface(&psi_r), cols),
        xi_t: kron_identity(&surface(&psi_t), cols),
        c3_bound,
        p_bs: params.p_bs,
        w_s: stack_columns(w_s),
        radar_active: params.gamma_t > 0.0,
    })
}

impl TransmitProblemData {
    /// `w̃ᴴ(Q_r + Q_t)w̃ − 2Re{(α_r + α_t)ᴴw̃}`, the negated surrogate up to a constant.
    pub fn objective(&self, w: &CVec) -> f64 {
        let q = &self.q_r + &self.q_t;
        let alpha = &self.alpha_r + &self.alpha_t;
        w.dotc(&(q * w)).re - 2.0 * alpha.dotc(w).re
    }

    /// `w̃ᴴYw̃` at the expansion point must reach `η` for the expansion to be useful.
    pub fn expansion_radar_value(&self) -> f64 {
        self.w_s.dotc(&(&self.y * &self.w_s)).re
    }

    pub fn to_qcqp(&self) -> QcqpProblem {
        let mut linear_constraints = Vec::new();
        if self.radar_active {
            // Re{(2Yw_s)ᴴw̃} ≥ η + w_sᴴYw_s
            let yw = &self.y * &self.w_s;
            linear_constraints.push(LinearConstraint {
                a: &yw * c(2.0, 0.0),
                c: self.eta + self.w_s.dotc(&yw).re,
                sense: Sense::Ge,
            });
        }
        let quad_constraints = match self.c3_bound {
            Some(bound) => vec![(
                QuadraticForm::new(QuadMatrix::Dense(&self.xi_r + &self.xi_t), CVec::zeros(self.w_s.len())),
                bound,
            )],
            None => vec![],
        };
        QcqpProblem {
            objective: QuadraticForm::new(QuadMatrix::Dense(&self.q_r + &self.q_t), &self.alpha_r + &self.alpha_t),
            quad_constraints,
            linear_constraints,
            ball_constraints: vec![self.p_bs],
        }
    }
}

/// Solves the convexified transmit problem; keeps the previous beams if the
/// solver fails or does not improve on them.
pub fn solve_transmit_beamforming(data: &TransmitProblemData) -> BlockOutcome<CMat> {
    let previous = unstack_columns(&data.w_tilde, data.m);
    if let Some(bound) = data.c3_bound {
        if bound <= 0.0 {
            return BlockOutcome {
                value: previous,
                status: BlockStatus::Failed("surface noise alone exceeds the surface budget".into()),
                kkt: None,
            };
        }
    }
    let p = data.to_qcqp();
    let prev_feasible = p.is_feasible(&data.w_tilde, 1e-9);
    let start = if prev_feasible { &data.w_tilde } else { &data.w_s };
    match solve_near(&p, start) {
        Ok((x, kkt)) => {
            let prev_obj = data.objective(&data.w_tilde);
            let obj = data.objective(&x);
            let out = accept(data.w_tilde.clone(), prev_obj, prev_feasible, x, obj, kkt);
            BlockOutcome {
                value: unstack_columns(&out.value, data.m),
                status: out.status,
                kkt: out.kkt,
            }
        }
        Err(SolverError::Infeasible(_)) if data.radar_active && !prev_feasible => restore_radar(data, &p, previous),
        Err(e) => BlockOutcome {
            value: previous,
            status: BlockStatus::Failed(e.to_string()),
            kkt: None,
        },
    }
}

/// The expanded SNR floor is out of reach from `w_s`: maximize the expansion
/// `2Re{(Yw_s)ᴴw̃}` (a lower bound on `w̃ᴴYw̃`) within the power budgets so the
/// next linearization starts from a stronger radar beam.
fn restore_radar(data: &TransmitProblemData, p: &QcqpProblem, previous: CMat) -> BlockOutcome<CMat> {
    let n = data.w_s.len();
    let restoration = QcqpProblem {
        objective: QuadraticForm::new(QuadMatrix::Diagonal(RVec::zeros(n)), &data.y * &data.w_s),
        quad_constraints: p.quad_constraints.clone(),
        linear_constraints: vec![],
        ball_constraints: p.ball_constraints.clone(),
    };
    match solve_near(&restoration, &data.w_tilde) {
        Ok((x, kkt)) => BlockOutcome {
            value: unstack_columns(&x, data.m),
            status: BlockStatus::Restoring,
            kkt: Some(kkt),
        },
        Err(e) => BlockOutcome {
            value: previous,
            status: BlockStatus::Failed(e.to_string()),
            kkt: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::{fp_objective, update_gamma, update_rho, Noise};
    use crate::linalg::hermitian_defect;
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
            p_ris: Some(50.0),
        }
    }

    fn instance(seed: u64) -> (ChannelSet, BeamformingState, StarState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_channel_set(&mut rng, 3, 6, 2, 1);
        let w = oracle::random_cmat(&mut rng, 3, 6) * c(0.4, 0.0);
        let star = oracle::random_star(&mut rng, 6);
        let mut st = BeamformingState::new(w, oracle::random_cvec(&mut rng, 3));
        st.gamma = crate::linalg::RVec::from_fn(3, |_, _| rng.random::<f64>() * 2.0);
        st.rho = oracle::random_cvec(&mut rng, 3);
        (set, st, star)
    }

    #[test]
    fn quadratic_terms_match_unstacked_loops() {
        for seed in 0..10 {
            let (set, st, star) = instance(seed);
            let data = assemble_transmit_problem(&st, &star, &set, &params(), &st.w).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            let w = oracle::random_cmat(&mut rng, 3, 6);
            let wt = stack_columns(&w);
            for (side, q, alpha) in [(Side::Reflect, &data.q_r, &data.alpha_r), (Side::Transmit, &data.q_t, &data.alpha_t)] {
                let mut quad = 0.0;
                let mut lin = c(0.0, 0.0);
                for k in 0..3 {
                    if set.user_side[k] != side {
                        continue;
                    }
                    let row = oracle::dense_equivalent_row(k, &star, &set);
                    for j in 0..6 {
                        quad += st.rho[k].norm_sqr() * (&row * w.column(j))[(0, 0)].norm_sqr();
                    }
                    lin += st.rho[k].conj() * (1.0 + st.gamma[k]).sqrt() * (&row * w.column(k))[(0, 0)];
                }
                let got = wt.dotc(&(q * &wt)).re;
                assert!((got - quad).abs() <= 1e-10 * quad.max(1.0));
                assert!((alpha.dotc(&wt) - lin).norm() <= 1e-10 * lin.norm().max(1.0));
                assert!(hermitian_defect(q) <= 1e-10);
            }
            // reflect users first: α_t vanishes on the reflect blocks and on the radar beams
            assert!(data.alpha_r.rows(2 * 3, 4 * 3).iter().all(|z| z.norm() == 0.0));
            assert!(data.alpha_t.rows(0, 2 * 3).iter().all(|z| z.norm() == 0.0));
            assert!(data.alpha_t.rows(3 * 3, 3 * 3).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn objective_is_negated_surrogate() {
        let (set, st, star) = instance(3);
        let p = params();
        let data = assemble_transmit_problem(&st, &star, &set, &p, &st.w).unwrap();
        let noise = Noise::from(&p);
        let f0 = fp_objective(&st.gamma, &st.rho, &CMat::zeros(3, 6), &star, &set, noise).unwrap();
        let f1 = fp_objective(&st.gamma, &st.rho, &st.w, &star, &set, noise).unwrap();
        let q = data.objective(&data.w_tilde);
        assert!((f1 - f0 + q).abs() < 1e-10 * f1.abs().max(1.0));
    }

    #[test]
    fn radar_and_surface_terms() {
        let (set, st, star) = instance(4);
        let p = params();
        let data = assemble_transmit_problem(&st, &star, &set, &p, &st.w).unwrap();
        let snr = crate::metrics::radar_snr_worst(&st.u, &st.w, &set.h_dt, p.xi_sq, p.sigma_z_sq).unwrap();
        // SNR ≥ Γ_t ⇔ w̃ᴴYw̃ ≥ η
        let ratio = data.expansion_radar_value() / data.eta;
        assert!((ratio - snr / p.gamma_t).abs() <= 1e-10 * ratio);
        let power = crate::metrics::ris_power(&st.w, &star, &set.g, p.sigma_v_sq);
        let xi = &data.xi_r + &data.xi_t;
        let used = data.w_tilde.dotc(&(xi * &data.w_tilde)).re;
        let noise = p.sigma_v_sq * star.amplitude_energy();
        assert!((used + noise - power).abs() <= 1e-10 * power);
        assert!((data.c3_bound.unwrap() - (50.0 - noise)).abs() < 1e-12);
        // The expansion is tight at w_s and below the quadratic elsewhere.
        let qp = data.to_qcqp();
        let lc = &qp.linear_constraints[0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let at = |x: &CVec| lc.a.dotc(x).re - lc.c + data.eta;
        assert!((at(&data.w_s) - data.expansion_radar_value()).abs() <= 1e-10 * data.expansion_radar_value());
        for _ in 0..20 {
            let x = stack_columns(&oracle::random_cmat(&mut rng, 3, 6));
            assert!(x.dotc(&(&data.y * &x)).re >= at(&x) - 1e-10);
        }
    }

    #[test]
    fn loose_budgets_give_stationary_point() {
        let (set, mut st, star) = instance(5);
        let p = SystemParams {
            gamma_t: 0.0,
            p_bs: 1e6,
            p_ris: Some(1e9),
            ..params()
        };
        st.gamma = update_gamma(&st.w, &star, &set, Noise::from(&p)).unwrap();
        st.rho = update_rho(&st.gamma, &st.w, &star, &set, Noise::from(&p)).unwrap();
        let data = assemble_transmit_problem(&st, &star, &set, &p, &st.w).unwrap();
        assert!(data.to_qcqp().linear_constraints.is_empty());
        let out = solve_transmit_beamforming(&data);
        assert_eq!(out.status, BlockStatus::Updated);
        // min over the range of Q: −αᴴQ⁺α via a regularized solve
        let q = &data.q_r + &data.q_t;
        let alpha = &data.alpha_r + &data.alpha_t;
        let reg = &q + CMat::identity(q.nrows(), q.nrows()) * c(1e-12 * q.norm(), 0.0);
        let x = reg.lu().solve(&alpha).unwrap();
        let best = -alpha.dotc(&x).re;
        let got = data.objective(&stack_columns(&out.value));
        assert!((got - best).abs() <= 1e-6 * best.abs(), "{got} vs {best}");
    }

    #[test]
    fn respects_budget_and_improves_surrogate() {
        for seed in 0..10 {
            let (set, mut st, star) = instance(20 + seed);
            let p = params();
            let noise = Noise::from(&p);
            // make the start feasible
            let scale = (0.5 * p.p_bs / crate::metrics::squared_norm_mat(&st.w)).sqrt();
            st.w *= c(scale, 0.0);
            st.u = set.h_dt.clone();
            st.gamma = update_gamma(&st.w, &star, &set, noise).unwrap();
            st.rho = update_rho(&st.gamma, &st.w, &star, &set, noise).unwrap();
            let data = assemble_transmit_problem(&st, &star, &set, &p, &st.w).unwrap();
            let out = solve_transmit_beamforming(&data);
            assert!(matches!(out.status, BlockStatus::Updated | BlockStatus::KeptPrevious | BlockStatus::Restored));
            assert!(crate::metrics::squared_norm_mat(&out.value) <= p.p_bs * (1.0 + 1e-6));
            if data.to_qcqp().is_feasible(&data.w_tilde, 1e-9) {
                let before = fp_objective(&st.gamma, &st.rho, &st.w, &star, &set, noise).unwrap();
                let after = fp_objective(&st.gamma, &st.rho, &out.value, &star, &set, noise).unwrap();
                assert!(after >= before - 1e-9 * before.abs().max(1.0));
            }
        }
    }

    #[test]
    fn unreachable_floor_moves_toward_radar() {
        for seed in 0..5 {
            let (set, mut st, star) = instance(40 + seed);
            let mut p = params();
            p.gamma_t = 1e9;
            let scale = (0.5 * p.p_bs / crate::metrics::squared_norm_mat(&st.w)).sqrt();
            st.w *= c(scale, 0.0);
            st.u = set.h_dt.clone();
            let data = assemble_transmit_problem(&st, &star, &set, &p, &st.w).unwrap();
            let out = solve_transmit_beamforming(&data);
            assert_eq!(out.status, BlockStatus::Restoring);
            let w = stack_columns(&out.value);
            assert!(w.norm_squared() <= p.p_bs * (1.0 + 1e-6));
            assert!(data.to_qcqp().quad_constraints.iter().all(|(q, b)| q.eval(&w) <= b * (1.0 + 1e-6)));
            let after = w.dotc(&(&data.y * &w)).re;
            assert!(after >= data.expansion_radar_value(), "{after}");
        }
    }
}
