//! Randomized properties of the metrics, surrogates and solvers.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use star_isac::channels::{read_channel_dump, write_channel_dump};
use star_isac::fp::{fp_objective, lagrangian_dual_objective, update_gamma, update_rho, Noise};
use star_isac::harness::derive_seed;
use star_isac::linalg::{c, RVec};
use star_isac::metrics::{ris_power, sum_rate};
use star_isac::oracle;
use star_isac::solvers::{minimize_unit_modulus_ccm, minimize_unit_modulus_mm, solve_real_qcqp, QcqpOptions};
use star_isac::subproblems::solve_radar_filter;

const NOISE: Noise = Noise {
    sigma_k_sq: 0.4,
    sigma_v_sq: 0.15,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sum_rate_matches_dense(seed in any::<u64>(), m in 1usize..5, n in 1usize..9, k_r in 0usize..3, k_t in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_channel_set(&mut rng, m, n, k_r, k_t);
        let w = oracle::random_cmat(&mut rng, m, k_r + k_t + m);
        let star = oracle::random_star(&mut rng, n);
        let fast = sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq).unwrap();
        let dense = oracle::dense_sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq);
        prop_assert!((fast - dense).abs() <= 1e-10 * dense.max(1.0));
        let p = ris_power(&w, &star, &set.g, NOISE.sigma_v_sq);
        let p_dense = oracle::dense_ris_power(&w, &star, &set.g, NOISE.sigma_v_sq);
        prop_assert!((p - p_dense).abs() <= 1e-10 * p_dense.max(1.0));
    }

    #[test]
    fn surrogates_are_tight_at_optimal_auxiliaries(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_channel_set(&mut rng, 3, n, 2, 1);
        let w = oracle::random_cmat(&mut rng, 3, 6);
        let star = oracle::random_star(&mut rng, n);
        let gamma = update_gamma(&w, &star, &set, NOISE).unwrap();
        let rho = update_rho(&gamma, &w, &star, &set, NOISE).unwrap();
        let rate = sum_rate(&w, &star, &set, NOISE.sigma_k_sq, NOISE.sigma_v_sq).unwrap() * std::f64::consts::LN_2;
        let dual = lagrangian_dual_objective(&gamma, &w, &star, &set, NOISE).unwrap();
        let fp = fp_objective(&gamma, &rho, &w, &star, &set, NOISE).unwrap();
        prop_assert!((dual - rate).abs() <= 1e-10 * rate.max(1.0));
        prop_assert!((fp - rate).abs() <= 1e-10 * rate.max(1.0));
    }

    #[test]
    fn radar_filter_is_scale_free(seed in any::<u64>(), m in 1usize..7, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = oracle::random_cvec(&mut rng, m);
        let w = oracle::random_cmat(&mut rng, m, m + 3);
        let a = solve_radar_filter(&w, &h, 0.3).unwrap();
        let b = solve_radar_filter(&(&w * c(scale, 0.0)), &h, 0.3).unwrap();
        let cos = a.u.dotc(&b.u).norm() / (a.u.norm() * b.u.norm());
        prop_assert!(1.0 - cos <= 1e-10);
    }

    #[test]
    fn phase_solvers_descend_on_the_circle(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = oracle::random_psd(&mut rng, n, n.min(3), 0.05);
        let mu = oracle::random_cvec(&mut rng, n);
        let phi0 = oracle::random_phases(&mut rng, n);
        let start = phi0.dotc(&(&omega * &phi0)).re - 2.0 * phi0.dotc(&mu).re;
        for r in [
            minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-10, 5_000).unwrap(),
            minimize_unit_modulus_ccm(&omega, &mu, &phi0, 1e-9, 5_000).unwrap(),
        ] {
            prop_assert!(r.phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            prop_assert!(r.objective <= start + 1e-12 * start.abs().max(1.0));
            prop_assert!(r.history.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs().max(1.0)));
        }
    }

    #[test]
    fn qcqp_solutions_are_feasible_and_improve_on_the_start(seed in any::<u64>(), n in 1usize..7, quad in 1usize..4, lin in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, _) = oracle::random_convex_qcqp(&mut rng, n, quad, lin);
        let sol = solve_real_qcqp(&p, &RVec::zeros(n), &QcqpOptions::default()).unwrap();
        prop_assert!(p.constraints.iter().all(|c| c.value(&sol.z) <= 1e-9 * c.r.abs().max(1.0)));
        prop_assert!(p.objective(&sol.z) <= 0.0);
        prop_assert!(sol.report.converged);
    }

    #[test]
    fn channel_dump_round_trips(seed in any::<u64>(), m in 1usize..4, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = oracle::random_channel_set(&mut rng, m, n, 1, 2);
        let mut buf = Vec::new();
        write_channel_dump(&set, &mut buf).unwrap();
        prop_assert_eq!(read_channel_dump(buf.as_slice()).unwrap(), set);
    }

    #[test]
    fn trial_seeds_do_not_collide(base in any::<u64>(), point in 0u64..1000, trial in 0u64..1000) {
        let s = derive_seed(base, point, trial);
        prop_assert_eq!(s, derive_seed(base, point, trial));
        prop_assert_ne!(s, derive_seed(base, point, trial + 1));
        prop_assert_ne!(s, derive_seed(base, point + 1, trial));
    }
}
