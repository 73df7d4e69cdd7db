//! Dense convex QCQP by log-barrier interior point, checked against the
//! dual bound of a projected-gradient oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::linalg::RVec;
use star_isac::oracle;
use star_isac::solvers::{solve_real_qcqp, QcqpOptions};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [3, 6, 12] {
        let (problem, dense) = oracle::random_convex_qcqp(&mut rng, n, 3, 2);
        let sol = solve_real_qcqp(&problem, &RVec::zeros(n), &QcqpOptions::default()).expect("solve");
        let r = &sol.report;
        let bound = dense.dual_projected_gradient(50_000, 1e-13);
        println!(
            "n={n:2}  f={:.10}  dual={bound:.10}  iters={}  stat={:.1e}  comp={:.1e}  viol={:.1e}",
            r.objective, r.iterations, r.stationarity, r.complementarity, r.max_violation
        );
        for (i, l) in r.multipliers.iter().enumerate() {
            println!("    lambda_{i} = {l:.4e}  g = {:+.3e}", problem.constraints[i].value(&sol.z));
        }
    }
}
