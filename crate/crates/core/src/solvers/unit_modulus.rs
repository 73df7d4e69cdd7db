//! Minimization of `φᴴΩφ − 2Re{φᴴμ}` over unit-modulus vectors.

use crate::error::SolverError;
use crate::linalg::{c, hermitian_defect, hermitian_eigen, unit_phase, CMat, CVec};
use crate::solvers::eigen::lambda_max_power;

/// How MM picks the majorizer curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Majorizer {
    /// `λ_max(Ω)` by power iteration.
    #[default]
    LambdaMax,
    /// `tr(Ω)`, looser but free.
    Trace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitModulusResult {
    pub phi: CVec,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after every iteration, starting with the value at `phi0`.
    pub history: Vec<f64>,
}

pub fn unit_modulus_objective(omega: &CMat, mu: &CVec, phi: &CVec) -> f64 {
    phi.dotc(&(omega * phi)).re - 2.0 * phi.dotc(mu).re
}

/// MM surrogate at `phi` built around `phi_t`:
/// `λN − 2Re{φᴴ((λI − Ω)φ_t + μ)} + φ_tᴴ(λI − Ω)φ_t`.
pub fn mm_surrogate(omega: &CMat, mu: &CVec, lambda: f64, phi_t: &CVec, phi: &CVec) -> f64 {
    let n = phi.len() as f64;
    let shifted = phi_t * c(lambda, 0.0) - omega * phi_t;
    lambda * n - 2.0 * phi.dotc(&(&shifted + mu)).re + phi_t.dotc(&shifted).re
}

fn validate(omega: &CMat, mu: &CVec, phi0: &CVec) -> Result<(), SolverError> {
    let n = mu.len();
    if omega.nrows() != n || omega.ncols() != n || phi0.len() != n {
        return Err(SolverError::Dimension(format!(
            "Omega {}x{}, mu {}, phi0 {}",
            omega.nrows(),
            omega.ncols(),
            n,
            phi0.len()
        )));
    }
    let scale = omega.norm().max(f64::MIN_POSITIVE);
    let defect = hermitian_defect(omega);
    if defect > 1e-10 * scale {
        return Err(SolverError::NotHermitian(defect));
    }
    if n > 0 {
        let (vals, _) = hermitian_eigen(omega);
        if vals[0] < -1e-10 * scale {
            return Err(SolverError::NotPsd(vals[0]));
        }
    }
    if phi0.iter().any(|z| (z.norm() - 1.0).abs() > 1e-8) {
        return Err(SolverError::NotUnitModulus);
    }
    Ok(())
}

fn relative_decrease(prev: f64, next: f64) -> f64 {
    (prev - next) / prev.abs().max(1e-300)
}

pub fn minimize_unit_modulus_mm(
    omega: &CMat,
    mu: &CVec,
    phi0: &CVec,
    tol: f64,
    iter_cap: usize,
) -> Result<UnitModulusResult, SolverError> {
    minimize_unit_modulus_mm_with(omega, mu, phi0, tol, iter_cap, Majorizer::LambdaMax)
}

pub fn minimize_unit_modulus_mm_with(
    omega: &CMat,
    mu: &CVec,
    phi0: &CVec,
    tol: f64,
    iter_cap: usize,
    majorizer: Majorizer,
) -> Result<UnitModulusResult, SolverError> {
    validate(omega, mu, phi0)?;
    let lambda = match majorizer {
        Majorizer::LambdaMax => lambda_max_power(omega, 1e-10, 100_000),
        Majorizer::Trace => omega.trace().re,
    };
    let mut phi = phi0.map(unit_phase);
    let mut value = unit_modulus_objective(omega, mu, &phi);
    let mut history = vec![value];
    let mut iterations = 0;
    while iterations < iter_cap {
        let target = &phi * c(lambda, 0.0) - omega * &phi + mu;
        let next = CVec::from_fn(phi.len(), |i, _| if target[i].norm() > 0.0 { unit_phase(target[i]) } else { phi[i] });
        let next_value = unit_modulus_objective(omega, mu, &next);
        iterations += 1;
        // Rounding can make a converged step look like a tiny increase.
        if next_value > value {
            break;
        }
        let dec = relative_decrease(value, next_value);
        phi = next;
        value = next_value;
        history.push(value);
        if dec < tol {
            break;
        }
    }
    Ok(UnitModulusResult {
        phi,
        objective: value,
        iterations,
        history,
    })
}

/// Riemannian gradient `t = g − Re{g∘φ*}∘φ` with `g = 2(Ωφ − μ)`.
pub fn riemannian_gradient(omega: &CMat, mu: &CVec, phi: &CVec) -> CVec {
    let g = (omega * phi - mu) * c(2.0, 0.0);
    CVec::from_fn(phi.len(), |i, _| g[i] - phi[i] * (g[i] * phi[i].conj()).re)
}

fn retract(phi: &CVec, step: &CVec, s: f64) -> CVec {
    CVec::from_fn(phi.len(), |i, _| {
        let z = phi[i] - step[i] * s;
        if z.norm() > 0.0 {
            unit_phase(z)
        } else {
            phi[i]
        }
    })
}

pub fn minimize_unit_modulus_ccm(
    omega: &CMat,
    mu: &CVec,
    phi0: &CVec,
    tol: f64,
    iter_cap: usize,
) -> Result<UnitModulusResult, SolverError> {
    validate(omega, mu, phi0)?;
    const ARMIJO: f64 = 1e-4;
    let mut phi = phi0.map(unit_phase);
    let mut value = unit_modulus_objective(omega, mu, &phi);
    let mut history = vec![value];
    let scale = (omega.norm() + mu.norm()).max(f64::MIN_POSITIVE);
    let mut step = 1.0 / (2.0 * scale);
    let mut iterations = 0;
    while iterations < iter_cap {
        let t = riemannian_gradient(omega, mu, &phi);
        let tn2 = t.norm_squared();
        if tn2.sqrt() < tol * scale {
            break;
        }
        iterations += 1;
        let mut s = step * 4.0;
        let mut accepted = None;
        for _ in 0..80 {
            let cand = retract(&phi, &t, s);
            let v = unit_modulus_objective(omega, mu, &cand);
            if v <= value - ARMIJO * s * tn2 && v < value {
                accepted = Some((cand, v));
                break;
            }
            s *= 0.5;
        }
        let Some((cand, v)) = accepted else { break };
        step = s;
        phi = cand;
        value = v;
        history.push(value);
    }
    Ok(UnitModulusResult {
        phi,
        objective: value,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scaled_identity_solved_in_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mu = oracle::random_cvec(&mut rng, 6);
        let omega = CMat::identity(6, 6) * c(2.5, 0.0);
        let phi0 = oracle::random_phases(&mut rng, 6);
        let r = minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-12, 50).unwrap();
        for i in 0..6 {
            assert!((r.phi[i] - unit_phase(mu[i])).norm() < 1e-9);
        }
        assert!(r.history.len() <= 3);
    }

    #[test]
    fn mm_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let omega = oracle::random_psd(&mut rng, 8, 3, 0.05);
        let mu = CVec::zeros(8);
        let (vals, _) = hermitian_eigen(&omega);
        let phi0 = oracle::random_phases(&mut rng, 8);
        let r = minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-12, 500).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(r.objective >= 8.0 * vals[0] - 1e-9);
    }

    #[test]
    fn mm_majorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let omega = oracle::random_psd(&mut rng, 5, 5, 0.0);
        let mu = oracle::random_cvec(&mut rng, 5);
        let lambda = lambda_max_power(&omega, 1e-10, 100_000);
        let phi_t = oracle::random_phases(&mut rng, 5);
        let at_t = mm_surrogate(&omega, &mu, lambda, &phi_t, &phi_t);
        assert!((at_t - unit_modulus_objective(&omega, &mu, &phi_t)).abs() < 1e-9);
        for _ in 0..200 {
            let phi = oracle::random_phases(&mut rng, 5);
            assert!(mm_surrogate(&omega, &mu, lambda, &phi_t, &phi) >= unit_modulus_objective(&omega, &mu, &phi) - 1e-9);
        }
    }

    #[test]
    fn small_instances_match_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let omega = oracle::random_psd(&mut rng, 3, 2, 0.1);
            let mu = oracle::random_cvec(&mut rng, 3) * c(2.0, 0.0);
            let phi0 = mu.map(unit_phase);
            let (grid, _) = oracle::phase_grid_minimum(&omega, &mu, 48);
            let mm = minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-12, 10_000).unwrap();
            let ccm = minimize_unit_modulus_ccm(&omega, &mu, &phi0, 1e-10, 10_000).unwrap();
            assert!(mm.objective <= grid + 1e-3 * grid.abs().max(1.0), "{} vs {grid}", mm.objective);
            assert!(ccm.objective <= grid + 1e-3 * grid.abs().max(1.0));
        }
    }

    #[test]
    fn ccm_stationary_start() {
        // Ω = I, μ = 2·φ0: gradient 2(φ0 − 2φ0) is radial, tangent part zero.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi0 = oracle::random_phases(&mut rng, 4);
        let mu = &phi0 * c(2.0, 0.0);
        let r = minimize_unit_modulus_ccm(&CMat::identity(4, 4), &mu, &phi0, 1e-9, 100).unwrap();
        assert_eq!(r.phi, phi0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn ccm_strict_descent_and_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let omega = oracle::random_psd(&mut rng, 10, 4, 0.0);
        let mu = oracle::random_cvec(&mut rng, 10);
        let phi0 = oracle::random_phases(&mut rng, 10);
        let r = minimize_unit_modulus_ccm(&omega, &mu, &phi0, 1e-10, 2000).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(r.phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let omega = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let phi = CVec::from_element(2, c(1.0, 0.0));
        assert!(matches!(
            minimize_unit_modulus_mm(&omega, &CVec::zeros(2), &phi, 1e-9, 10),
            Err(SolverError::NotPsd(_))
        ));
        let half = CVec::from_element(2, c(0.5, 0.0));
        assert_eq!(
            minimize_unit_modulus_ccm(&CMat::identity(2, 2), &CVec::zeros(2), &half, 1e-9, 10),
            Err(SolverError::NotUnitModulus)
        );
    }
}
