//! Fractional-programming reformulation of the sum rate.
//!
//! The Lagrangian dual transform introduces `γ`, the quadratic transform
//! introduces `ρ`. Both surrogates work in natural log; at the closed-form
//! optimal auxiliaries they equal `ln 2 · R_sum`.

use crate::channels::ChannelSet;
use crate::error::Result;
use crate::linalg::{CMat, CVec, RVec};
use crate::metrics::{equivalent_channels, user_powers_with, StarState, SystemParams, UserPowers};

/// Noise powers entering the SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub sigma_k_sq: f64,
    pub sigma_v_sq: f64,
}

impl From<&SystemParams> for Noise {
    fn from(p: &SystemParams) -> Self {
        Noise {
            sigma_k_sq: p.sigma_k_sq,
            sigma_v_sq: p.sigma_v_sq,
        }
    }
}

/// Per-user terms of the quadratic-transform objective.
#[derive(Debug, Clone, PartialEq)]
pub struct FpObjectiveParts {
    /// `2√(1+γ_k)·Re{ρ_k*·h̃_kᴴw_k}`
    pub linear: Vec<f64>,
    /// `|ρ_k|²·(Σ_j |h̃_kᴴw_j|² + σ_v²‖f_kᴴΨ‖² + σ_k²)`
    pub quadratic: Vec<f64>,
    /// `Σ_k ln(1+γ_k) − Σ_k γ_k`
    pub constant: f64,
}

impl FpObjectiveParts {
    pub fn total(&self) -> f64 {
        self.constant + self.linear.iter().sum::<f64>() - self.quadratic.iter().sum::<f64>()
    }
}

fn all_powers(w: &CMat, star: &StarState, channels: &ChannelSet, noise: Noise) -> Result<(Vec<CVec>, Vec<UserPowers>)> {
    let h = equivalent_channels(channels, star)?;
    let powers = (0..channels.k())
        .map(|k| user_powers_with(k, &h[k], w, star, channels, noise.sigma_k_sq, noise.sigma_v_sq))
        .collect();
    Ok((h, powers))
}

fn gamma_constant(gamma: &RVec) -> f64 {
    gamma.iter().map(|&g| (1.0 + g).ln() - g).sum()
}

pub fn fp_objective_parts(
    gamma: &RVec,
    rho: &CVec,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    noise: Noise,
) -> Result<FpObjectiveParts> {
    let (h, powers) = all_powers(w, star, channels, noise)?;
    let k = channels.k();
    let mut linear = Vec::with_capacity(k);
    let mut quadratic = Vec::with_capacity(k);
    for i in 0..k {
        let own = h[i].dotc(&w.column(i));
        linear.push(2.0 * (1.0 + gamma[i]).sqrt() * (rho[i].conj() * own).re);
        quadratic.push(rho[i].norm_sqr() * powers[i].total());
    }
    Ok(FpObjectiveParts {
        linear,
        quadratic,
        constant: gamma_constant(gamma),
    })
}

/// Quadratic-transform surrogate `f(γ, ρ, W, Ψ)` including the `γ`-only terms.
pub fn fp_objective(
    gamma: &RVec,
    rho: &CVec,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    noise: Noise,
) -> Result<f64> {
    Ok(fp_objective_parts(gamma, rho, w, star, channels, noise)?.total())
}

/// Lagrangian-dual surrogate before the quadratic transform:
/// `Σ ln(1+γ_k) − Σ γ_k + Σ (1+γ_k)·|h̃_kᴴw_k|² / total_k`.
pub fn lagrangian_dual_objective(
    gamma: &RVec,
    w: &CMat,
    star: &StarState,
    channels: &ChannelSet,
    noise: Noise,
) -> Result<f64> {
    let (_, powers) = all_powers(w, star, channels, noise)?;
    Ok(gamma_constant(gamma)
        + powers
            .iter()
            .zip(gamma.iter())
            .map(|(p, g)| (1.0 + g) * p.signal / p.total())
            .sum::<f64>())
}

/// `γ_k = SINR_k`, the maximizer of the Lagrangian-dual surrogate.
pub fn update_gamma(w: &CMat, star: &StarState, channels: &ChannelSet, noise: Noise) -> Result<RVec> {
    let (_, powers) = all_powers(w, star, channels, noise)?;
    Ok(RVec::from_iterator(powers.len(), powers.iter().map(|p| p.sinr())))
}

/// `ρ_k = √(1+γ_k)·h̃_kᴴw_k / total_k`, where the total includes `j = k`.
pub fn update_rho(gamma: &RVec, w: &CMat, star: &StarState, channels: &ChannelSet, noise: Noise) -> Result<CVec> {
    let (h, powers) = all_powers(w, star, channels, noise)?;
    Ok(CVec::from_fn(channels.k(), |k, _| {
        let own = h[k].dotc(&w.column(k));
        own * ((1.0 + gamma[k]).sqrt() / powers[k].total())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::metrics::sum_rate;
    use crate::oracle;
    use crate::scenario::Side;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NOISE: Noise = Noise {
        sigma_k_sq: 0.4,
        sigma_v_sq: 0.15,
    };

    fn instance(seed: u64) -> (ChannelSet, CMat, StarState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_channel_set(&mut rng, 3, 5, 2, 1);
        let w = oracle::random_cmat(&mut rng, 3, 6);
        let star = oracle::random_star(&mut rng, 5);
        (set, w, star)
    }

    #[test]
    fn optimal_auxiliaries_recover_sum_rate() {
        for seed in 0..20 {
            let (set, w, star) = instance(seed);
            let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
            let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
            let f = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap();
            let bits = sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq).unwrap();
            assert!((f / std::f64::consts::LN_2 - bits).abs() < 1e-8, "{f} vs {bits}");
        }
    }

    #[test]
    fn zero_beams_zero_auxiliaries() {
        let (set, _, star) = instance(1);
        let w = CMat::zeros(3, 6);
        let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
        let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
        assert!(gamma.iter().all(|&g| g == 0.0));
        assert!(rho.iter().all(|z| z.norm() == 0.0));
        assert_eq!(fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap(), 0.0);
    }

    #[test]
    fn gamma_equals_sinr() {
        let (set, w, star) = instance(2);
        let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
        for k in 0..3 {
            let s = oracle::dense_sinr(k, &w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq);
            assert!((gamma[k] - s).abs() <= 1e-12 * s.max(1.0));
        }
    }

    #[test]
    fn gamma_vanishes_with_noise() {
        let (set, w, star) = instance(3);
        let mut last = f64::INFINITY;
        for scale in [1.0, 10.0, 1e3, 1e6, 1e9] {
            let noise = Noise {
                sigma_k_sq: scale,
                sigma_v_sq: scale,
            };
            let g = update_gamma(&w, &star, &set, noise).unwrap().sum();
            assert!(g < last);
            last = g;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn rho_zero_for_silent_beam() {
        let (set, mut w, star) = instance(4);
        w.column_mut(1).fill(c(0.0, 0.0));
        let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
        let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
        assert_eq!(rho[1], c(0.0, 0.0));
    }

    #[test]
    fn scalar_rho_by_hand() {
        let set = ChannelSet {
            g: CMat::from_element(1, 1, c(0.0, 0.0)),
            f: vec![CVec::from_element(1, c(0.0, 0.0))],
            h_d: vec![CVec::from_element(1, c(1.0, 1.0))],
            h_dt: CVec::from_element(1, c(1.0, 0.0)),
            user_side: vec![Side::Reflect],
        };
        let w = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let star = crate::metrics::StarState::off(1);
        let gamma = RVec::from_element(1, 3.0);
        let rho = update_rho(&gamma, &w, &star, &set, Noise { sigma_k_sq: 2.0, sigma_v_sq: 1.0 }).unwrap();
        // h̃ᴴw = (1 − i), total = 2 + 2 = 4, √(1+3) = 2 ⇒ ρ = (1 − i)/2
        assert!((rho[0] - c(0.5, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn rho_is_grid_maximizer() {
        let (set, w, star) = instance(5);
        let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
        let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
        let best = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap();
        let step = 1e-3;
        for k in 0..3 {
            for dr in -3..=3 {
                for di in -3..=3 {
                    if dr == 0 && di == 0 {
                        continue;
                    }
                    let mut probe = rho.clone();
                    probe[k] += c(dr as f64 * step, di as f64 * step);
                    let v = fp_objective(&gamma, &probe, &w, &star, &set, NOISE).unwrap();
                    assert!(v <= best + 1e-12);
                }
            }
        }
    }

    #[test]
    fn parts_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (set, w, star) = instance(6);
        let gamma = RVec::from_fn(3, |_, _| rand::Rng::random::<f64>(&mut rng) * 3.0);
        let rho = oracle::random_cvec(&mut rng, 3);
        let parts = fp_objective_parts(&gamma, &rho, &w, &star, &set, NOISE).unwrap();
        let dense = oracle::dense_fp_objective(&gamma, &rho, &w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq);
        assert!((parts.total() - dense).abs() < 1e-10 * dense.abs().max(1.0));
    }

    #[test]
    fn auxiliary_updates_are_block_ascent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..20 {
            let (set, w, star) = instance(100 + seed);
            let gamma_prev = RVec::from_fn(3, |_, _| rand::Rng::random::<f64>(&mut rng) * 5.0);
            let rho_prev = oracle::random_cvec(&mut rng, 3);
            let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
            let before = lagrangian_dual_objective(&gamma_prev, &w, &star, &set, NOISE).unwrap();
            let after = lagrangian_dual_objective(&gamma, &w, &star, &set, NOISE).unwrap();
            assert!(after >= before - 1e-9);
            let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
            let before = fp_objective(&gamma, &rho_prev, &w, &star, &set, NOISE).unwrap();
            let after = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap();
            assert!(after >= before - 1e-9);
        }
    }
}
