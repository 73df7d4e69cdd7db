//! Quick oracle cross-checks behind the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ao::{run_ao, AoOptions};
use crate::channels::{generate_channel_set, read_channel_dump, write_channel_dump};
use crate::fp::{fp_objective, update_gamma, update_rho, Noise};
use crate::linalg::{c, hermitian_eigen, unit_phase, RVec};
use crate::metrics::{radar_snr_worst, sum_rate};
use crate::oracle;
use crate::scenario::{ModeSpec, ScenarioConfig};
use crate::solvers::{minimize_unit_modulus_ccm, minimize_unit_modulus_mm, solve_real_qcqp, QcqpOptions};
use crate::subproblems::solve_radar_filter;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, worst: f64, bound: f64) -> Self {
        Check {
            name,
            passed: worst <= bound,
            detail: format!("worst {worst:.3e} (bound {bound:.0e})"),
        }
    }
}

const NOISE: Noise = Noise {
    sigma_k_sq: 0.3,
    sigma_v_sq: 0.2,
};

fn fp_against_dense(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let set = oracle::random_channel_set(rng, 3, 6, 2, 1);
        let w = oracle::random_cmat(rng, 3, 6);
        let star = oracle::random_star(rng, 6);
        let gamma = RVec::from_fn(3, |_, _| rng.random::<f64>() * 3.0);
        let rho = oracle::random_cvec(rng, 3);
        let fast = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap_or(f64::NAN);
        let dense = oracle::dense_fp_objective(&gamma, &rho, &w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq);
        worst = worst.max((fast - dense).abs() / dense.abs().max(1.0));
        let rate = sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq).unwrap_or(f64::NAN);
        let dense_rate = oracle::dense_sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq);
        worst = worst.max((rate - dense_rate).abs() / dense_rate.max(1.0));
    }
    Check::new("fp surrogate and sum rate vs dense", nan_to_inf(worst), 1e-10)
}

fn auxiliary_optimality(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let set = oracle::random_channel_set(rng, 3, 5, 1, 2);
        let w = oracle::random_cmat(rng, 3, 6);
        let star = oracle::random_star(rng, 5);
        let Ok(gamma) = update_gamma(&w, &star, &set, NOISE) else {
            return Check::new("auxiliary updates", f64::INFINITY, 1e-9);
        };
        let Ok(rho) = update_rho(&gamma, &w, &star, &set, NOISE) else {
            return Check::new("auxiliary updates", f64::INFINITY, 1e-9);
        };
        let base = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap_or(f64::NAN);
        for k in 0..3 {
            for step in [-1e-2, -5e-3, 5e-3, 1e-2] {
                let mut g = gamma.clone();
                g[k] = (g[k] + step).max(0.0);
                let v = fp_objective(&g, &rho, &w, &star, &set, NOISE).unwrap_or(f64::NAN);
                worst = worst.max(v - base);
                for d in [c(step, 0.0), c(0.0, step)] {
                    let mut r = rho.clone();
                    r[k] += d;
                    let v = fp_objective(&gamma, &r, &w, &star, &set, NOISE).unwrap_or(f64::NAN);
                    worst = worst.max(v - base);
                }
            }
        }
    }
    Check::new("auxiliary updates are perturbation optimal", nan_to_inf(worst), 1e-9)
}

fn radar_filter(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let h = oracle::random_cvec(rng, 4);
        let w = oracle::random_cmat(rng, 4, 8);
        let Ok(f) = solve_radar_filter(&w, &h, 0.5) else {
            return Check::new("radar filter", f64::INFINITY, 1e-8);
        };
        let cos = f.u.dotc(&h).norm() / (f.u.norm() * h.norm());
        worst = worst.max(1.0 - cos);
        let ht = &h * h.adjoint();
        let cm = &ht * &w * w.adjoint() * ht.adjoint() / c(0.5, 0.0);
        let (vals, _) = hermitian_eigen(&cm);
        let top = vals[vals.len() - 1];
        let q = f.u.dotc(&(&cm * &f.u)).re / f.u.norm_squared();
        worst = worst.max((q - top).abs() / top);
        let snr = radar_snr_worst(&f.u, &w, &h, 1.0, 0.5).unwrap_or(f64::NAN);
        worst = worst.max((snr - oracle::dense_radar_snr(&f.u, &w, &h, 1.0, 0.5)).abs() / snr);
    }
    Check::new("radar filter vs dense eigendecomposition", nan_to_inf(worst), 1e-8)
}

fn qcqp(rng: &mut ChaCha8Rng) -> [Check; 2] {
    let fail = || [Check::new("qcqp KKT residuals", f64::INFINITY, 1e-6), Check::new("qcqp vs dual oracle", f64::INFINITY, 1e-4)];
    let (mut kkt, mut gap): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let (real, dense) = oracle::random_convex_qcqp(rng, n, 2, 2);
        let Ok(sol) = solve_real_qcqp(&real, &RVec::zeros(n), &QcqpOptions::default()) else {
            return fail();
        };
        let r = &sol.report;
        kkt = kkt.max(r.stationarity).max(r.complementarity).max(r.max_violation);
        let bound = dense.dual_projected_gradient(20_000, 1e-13);
        gap = gap.max((real.objective(&sol.z) - bound).abs() / bound.abs().max(1.0));
    }
    [
        Check::new("qcqp KKT residuals", nan_to_inf(kkt), 1e-6),
        Check::new("qcqp vs dual oracle", nan_to_inf(gap), 1e-4),
    ]
}

fn unit_modulus(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let omega = oracle::random_psd(rng, 3, 2, 0.1);
        let mu = oracle::random_cvec(rng, 3) * c(2.0, 0.0);
        let phi0 = mu.map(unit_phase);
        let (grid, _) = oracle::phase_grid_minimum(&omega, &mu, 48);
        let scale = grid.abs().max(1.0);
        for r in [
            minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-12, 10_000),
            minimize_unit_modulus_ccm(&omega, &mu, &phi0, 1e-10, 10_000),
        ] {
            let v = r.map(|r| r.objective).unwrap_or(f64::INFINITY);
            worst = worst.max((v - grid) / scale);
        }
    }
    Check::new("unit-modulus solvers vs 48-point grid", nan_to_inf(worst), 1e-3)
}

fn channel_dump(rng: &mut ChaCha8Rng) -> Check {
    let sc = ScenarioConfig::desk_scale(ModeSpec::Ued, 3);
    let ok = generate_channel_set(&sc, rng).ok().and_then(|set| {
        let mut buf = Vec::new();
        write_channel_dump(&set, &mut buf).ok()?;
        let back = read_channel_dump(buf.as_slice()).ok()?;
        Some(back == set)
    });
    Check {
        name: "channel dump round trip",
        passed: ok == Some(true),
        detail: String::new(),
    }
}

fn ao_monotone() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for mode in [ModeSpec::Ued, ModeSpec::Eed] {
        let sc = ScenarioConfig::desk_scale(mode, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let opts = AoOptions {
            q_max: Some(10),
            ..Default::default()
        };
        let trace = generate_channel_set(&sc, &mut rng).and_then(|ch| run_ao(&sc, &ch, &opts));
        let Ok(trace) = trace else {
            return Check::new("AO monotonicity", f64::INFINITY, 1e-9);
        };
        for pair in trace.fp_sequence().windows(2) {
            worst = worst.max((pair[0] - pair[1]) / pair[0].abs().max(1.0));
        }
    }
    Check::new("AO surrogate nondecreasing per block", nan_to_inf(worst), 1e-9)
}

fn nan_to_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

/// Runs every check with a fixed seed.
pub fn run_selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut checks = vec![
        fp_against_dense(&mut rng),
        auxiliary_optimality(&mut rng),
        radar_filter(&mut rng),
    ];
    checks.extend(qcqp(&mut rng));
    checks.push(unit_modulus(&mut rng));
    checks.push(channel_dump(&mut rng));
    checks.push(ao_monotone());
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for check in run_selftest() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }

    #[test]
    fn failing_bound_is_reported() {
        let c = Check::new("x", 2.0, 1.0);
        assert!(!c.passed);
    }
}
