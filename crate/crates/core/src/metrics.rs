//! Physical-layer metrics: SINR, sum rate, worst-case radar SNR, active
//! STAR-RIS power draw, and constraint checking.

use crate::channels::{equivalent_channel, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{squared_norm, unit_phase, CMat, CVec, RVec};
use crate::scenario::{ModeSpec, ScenarioConfig, Side};

/// DFBS transmit matrix, radar receive filter, and FP auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingState {
    /// M×(K+M): reflect-user beams, transmit-user beams, radar beams.
    pub w: CMat,
    pub u: CVec,
    pub gamma: RVec,
    pub rho: CVec,
}

impl BeamformingState {
    pub fn new(w: CMat, u: CVec) -> Self {
        let k = w.ncols().saturating_sub(w.nrows());
        BeamformingState {
            w,
            u,
            gamma: RVec::zeros(k),
            rho: CVec::zeros(k),
        }
    }
}

/// STAR-RIS amplitudes and phases; `ψ = a ∘ φ` per side.
#[derive(Debug, Clone, PartialEq)]
pub struct StarState {
    pub a_r: RVec,
    pub a_t: RVec,
    pub phi_r: CVec,
    pub phi_t: CVec,
}

impl StarState {
    pub fn n(&self) -> usize {
        self.a_r.len()
    }

    /// All amplitudes zero, all phases one.
    pub fn off(n: usize) -> Self {
        StarState {
            a_r: RVec::zeros(n),
            a_t: RVec::zeros(n),
            phi_r: CVec::from_element(n, crate::linalg::c(1.0, 0.0)),
            phi_t: CVec::from_element(n, crate::linalg::c(1.0, 0.0)),
        }
    }

    pub fn psi_r(&self) -> CVec {
        combine(&self.a_r, &self.phi_r)
    }

    pub fn psi_t(&self) -> CVec {
        combine(&self.a_t, &self.phi_t)
    }

    pub fn psi(&self, side: Side) -> CVec {
        match side {
            Side::Reflect => self.psi_r(),
            Side::Transmit => self.psi_t(),
        }
    }

    /// Polar decomposition `φ = exp(j·arg ψ)`, `a = |ψ|`; a zero entry gets phase 1.
    pub fn from_psi(psi_r: &CVec, psi_t: &CVec) -> Self {
        let split = |psi: &CVec| {
            (
                RVec::from_iterator(psi.len(), psi.iter().map(|z| z.norm())),
                CVec::from_iterator(psi.len(), psi.iter().map(|&z| unit_phase(z))),
            )
        };
        let (a_r, phi_r) = split(psi_r);
        let (a_t, phi_t) = split(psi_t);
        StarState { a_r, a_t, phi_r, phi_t }
    }

    /// `‖ψ_r‖² + ‖ψ_t‖²`
    pub fn amplitude_energy(&self) -> f64 {
        self.a_r.norm_squared() + self.a_t.norm_squared()
    }

    /// Multiplies every amplitude by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        StarState {
            a_r: &self.a_r * s,
            a_t: &self.a_t * s,
            ..self.clone()
        }
    }
}

fn combine(a: &RVec, phi: &CVec) -> CVec {
    CVec::from_fn(a.len(), |i, _| phi[i] * a[i])
}

/// Noise powers and budgets as seen by the optimizer for a given mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub sigma_k_sq: f64,
    pub sigma_v_sq: f64,
    pub sigma_z_sq: f64,
    pub xi_sq: f64,
    pub gamma_t: f64,
    pub p_bs: f64,
    /// `None` for the passive surrogate, whose per-element unit-gain
    /// constraint replaces the RIS power budget.
    pub p_ris: Option<f64>,
}

impl SystemParams {
    pub fn from_scenario(sc: &ScenarioConfig) -> Self {
        let passive = sc.mode == ModeSpec::PassiveBaseline;
        SystemParams {
            sigma_k_sq: sc.sigma_k_sq,
            sigma_v_sq: if passive { 0.0 } else { sc.sigma_v_sq },
            sigma_z_sq: sc.sigma_z_sq,
            xi_sq: sc.xi_sq,
            gamma_t: sc.gamma_t,
            p_bs: if passive { sc.total_power() } else { sc.p_bs },
            p_ris: if passive { None } else { Some(sc.p_ris) },
        }
    }

    pub fn is_passive(&self) -> bool {
        self.p_ris.is_none()
    }
}

/// Equivalent channel of every user through its own side of the surface.
pub fn equivalent_channels(channels: &ChannelSet, star: &StarState) -> Result<Vec<CVec>> {
    let psi_r = star.psi_r();
    let psi_t = star.psi_t();
    (0..channels.k())
        .map(|k| {
            let psi = match channels.user_side[k] {
                Side::Reflect => &psi_r,
                Side::Transmit => &psi_t,
            };
            equivalent_channel(&channels.h_d[k], &channels.f[k], psi, &channels.g)
        })
        .collect()
}

/// Per-user received powers, shared by the SINR and FP evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPowers {
    /// `|h̃_kᴴ w_k|²`
    pub signal: f64,
    /// `Σ_{j≠k} |h̃_kᴴ w_j|²`
    pub interference: f64,
    /// `σ_v²‖f_kᴴ Ψ‖² + σ_k²`
    pub noise: f64,
}

impl UserPowers {
    pub fn total(&self) -> f64 {
        self.signal + self.interference + self.noise
    }

    pub fn sinr(&self) -> f64 {
        self.signal / (self.interference + self.noise)
    }
}

fn check_dims(w: &CMat, star: &StarState, channels: &ChannelSet) -> Result<()> {
    let (m, n, k) = (channels.m(), channels.n(), channels.k());
    if w.nrows() != m || w.ncols() != k + m {
        return Err(Error::Dimension(format!(
            "W is {}x{}, expected {m}x{}",
            w.nrows(),
            w.ncols(),
            k + m
        )));
    }
    if star.a_r.len() != n || star.a_t.len() != n || star.phi_r.len() != n || star.phi_t.len() != n {
        return Err(Error::Dimension(format!("STAR-RIS state must have {n} elements")));
    }
    Ok(())
}

/// Received powers of user `k` given its equivalent channel `h_eq`.
pub fn user_powers_with(
    k: usize,
    h_eq: &CVec,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    sigma_k_sq: f64,
    sigma_v_sq: f64,
) -> UserPowers {
    let gains = w.ad_mul(h_eq); // entries w_jᴴ h̃, |·|² = |h̃ᴴ w_j|²
    let signal = gains[k].norm_sqr();
    let interference = gains.iter().map(|z| z.norm_sqr()).sum::<f64>() - signal;
    let a = match channels.user_side[k] {
        Side::Reflect => &star.a_r,
        Side::Transmit => &star.a_t,
    };
    let ris_noise: f64 = channels.f[k].iter().zip(a.iter()).map(|(f, a)| f.norm_sqr() * a * a).sum();
    UserPowers {
        signal,
        interference: interference.max(0.0),
        noise: sigma_v_sq * ris_noise + sigma_k_sq,
    }
}

pub fn user_powers(
    k: usize,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    sigma_k_sq: f64,
    sigma_v_sq: f64,
) -> Result<UserPowers> {
    check_dims(w, star, channels)?;
    if k >= channels.k() {
        return Err(Error::UserIndex {
            index: k,
            count: channels.k(),
        });
    }
    let psi = star.psi(channels.user_side[k]);
    let h_eq = equivalent_channel(&channels.h_d[k], &channels.f[k], &psi, &channels.g)?;
    Ok(user_powers_with(k, &h_eq, w, star, channels, sigma_k_sq, sigma_v_sq))
}

/// SINR of user `k` through its side of the surface.
pub fn user_sinr(
    k: usize,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    sigma_k_sq: f64,
    sigma_v_sq: f64,
) -> Result<f64> {
    Ok(user_powers(k, w, star, channels, sigma_k_sq, sigma_v_sq)?.sinr())
}

/// All user SINRs.
pub fn sinrs(w: &CMat, star: &StarState, channels: &ChannelSet, sigma_k_sq: f64, sigma_v_sq: f64) -> Result<Vec<f64>> {
    check_dims(w, star, channels)?;
    let h = equivalent_channels(channels, star)?;
    Ok((0..channels.k())
        .map(|k| user_powers_with(k, &h[k], w, star, channels, sigma_k_sq, sigma_v_sq).sinr())
        .collect())
}

/// `Σ_k log2(1 + SINR_k)` in bits/s/Hz.
pub fn sum_rate(w: &CMat, star: &StarState, channels: &ChannelSet, sigma_k_sq: f64, sigma_v_sq: f64) -> Result<f64> {
    Ok(sinrs(w, star, channels, sigma_k_sq, sigma_v_sq)?
        .into_iter()
        .map(|s| (1.0 + s).log2())
        .sum())
}

/// `ξ²·uᴴ H_t W Wᴴ H_tᴴ u / (σ_z²·uᴴu)` with `H_t = h_dt h_dtᴴ`.
pub fn radar_snr_worst(u: &CVec, w: &CMat, h_dt: &CVec, xi_sq: f64, sigma_z_sq: f64) -> Result<f64> {
    let uu = squared_norm(u);
    if uu == 0.0 {
        return Err(Error::ZeroFilter);
    }
    if u.len() != h_dt.len() || w.nrows() != h_dt.len() {
        return Err(Error::Dimension("radar filter / target channel / W rows".into()));
    }
    // uᴴ H_t W = (uᴴh)(hᴴW)
    let uh = u.dotc(h_dt);
    let beam = w.ad_mul(h_dt); // conj of hᴴW
    Ok(xi_sq * uh.norm_sqr() * squared_norm(&beam) / (sigma_z_sq * uu))
}

/// Per-element incident power `Σ_j |(G w_j)_n|²`.
pub fn incident_power(w: &CMat, g: &CMat) -> RVec {
    let gw = g * w;
    RVec::from_fn(g.nrows(), |n, _| gw.row(n).iter().map(|z| z.norm_sqr()).sum())
}

/// `Σ_j ‖Ψ_r G w_j‖² + σ_v²‖Ψ_r‖² + Σ_j ‖Ψ_t G w_j‖² + σ_v²‖Ψ_t‖²`
pub fn ris_power(w: &CMat, star: &StarState, g: &CMat, sigma_v_sq: f64) -> f64 {
    let inc = incident_power(w, g);
    (0..star.n())
        .map(|n| (star.a_r[n].powi(2) + star.a_t[n].powi(2)) * (inc[n] + sigma_v_sq))
        .sum()
}

/// Constraint slacks; nonnegative means satisfied. Budget constraints are
/// relative to their budget.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    /// Radar SNR floor: `SNR/Γ_t − 1` (or `+∞` when `Γ_t = 0`).
    pub c1: f64,
    /// DFBS power: `1 − ‖W‖²/P_B`.
    pub c2: f64,
    /// STAR-RIS power: `1 − P_RIS/P_R` (`+∞` for the passive surrogate).
    pub c3: f64,
    /// Smallest amplitude, relative to the largest one.
    pub c4: f64,
    /// `−max_n ||φ_n| − 1|`.
    pub c5: f64,
    /// Passive surrogate only: `min_n 1 − |ψ_r,n|² − |ψ_t,n|²`.
    pub passive: f64,
    /// Mode structure (EED equal amplitudes, SD masked amplitudes), `−max deviation`.
    pub structure: f64,
    pub radar_snr: f64,
    pub ris_power: f64,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn worst_slack(&self) -> f64 {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.passive, self.structure]
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates every constraint of the joint problem at `(W, u, star)`.
pub fn check_feasibility(
    state: &BeamformingState,
    star: &StarState,
    scenario: &ScenarioConfig,
    channels: &ChannelSet,
    tol: f64,
) -> Result<FeasibilityReport> {
    check_dims(&state.w, star, channels)?;
    let params = SystemParams::from_scenario(scenario);
    let radar_snr = match radar_snr_worst(&state.u, &state.w, &channels.h_dt, params.xi_sq, params.sigma_z_sq) {
        Ok(v) => v,
        Err(Error::ZeroFilter) => 0.0,
        Err(e) => return Err(e),
    };
    let c1 = if params.gamma_t > 0.0 {
        radar_snr / params.gamma_t - 1.0
    } else {
        f64::INFINITY
    };
    let c2 = 1.0 - squared_norm_mat(&state.w) / params.p_bs;
    let pr = ris_power(&state.w, star, &channels.g, params.sigma_v_sq);
    let c3 = match params.p_ris {
        Some(budget) => 1.0 - pr / budget,
        None => f64::INFINITY,
    };
    let amax = star.a_r.iter().chain(star.a_t.iter()).fold(1.0f64, |m, a| m.max(a.abs()));
    let amin = star.a_r.iter().chain(star.a_t.iter()).fold(f64::INFINITY, |m, &a| m.min(a));
    let c4 = amin.min(0.0) / amax;
    let c5 = -star
        .phi_r
        .iter()
        .chain(star.phi_t.iter())
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let passive = if params.is_passive() {
        (0..star.n())
            .map(|n| 1.0 - star.a_r[n].powi(2) - star.a_t[n].powi(2))
            .fold(f64::INFINITY, f64::min)
    } else {
        f64::INFINITY
    };
    let structure = -match &scenario.mode {
        ModeSpec::Eed => (0..star.n())
            .map(|n| (star.a_r[n] - star.a_t[n]).abs() / amax)
            .fold(0.0, f64::max),
        ModeSpec::Sd(mask) => mask
            .iter()
            .enumerate()
            .map(|(n, side)| match side {
                Side::Reflect => star.a_t[n].abs(),
                Side::Transmit => star.a_r[n].abs(),
            } / amax)
            .fold(0.0, f64::max),
        _ => 0.0,
    };
    let mut report = FeasibilityReport {
        c1,
        c2,
        c3,
        c4,
        c5,
        passive,
        structure,
        radar_snr,
        ris_power: pr,
        feasible: false,
    };
    report.feasible = report.worst_slack() >= -tol;
    Ok(report)
}

pub fn squared_norm_mat(w: &CMat) -> f64 {
    w.iter().map(|z| z.norm_sqr()).sum()
}
