//! Unit-modulus quadratic minimization by majorization-minimization and by
//! Riemannian descent on the complex circle manifold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::linalg::{c, unit_phase};
use star_isac::oracle;
use star_isac::solvers::{minimize_unit_modulus_ccm, minimize_unit_modulus_mm};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 32;
    let omega = oracle::random_psd(&mut rng, n, 8, 0.0);
    let mu = oracle::random_cvec(&mut rng, n) * c(3.0, 0.0);
    let phi0 = mu.map(unit_phase);

    let mm = minimize_unit_modulus_mm(&omega, &mu, &phi0, 1e-10, 5000).expect("mm");
    let ccm = minimize_unit_modulus_ccm(&omega, &mu, &phi0, 1e-10, 5000).expect("ccm");
    println!("start {:.8}", mm.history[0]);
    println!("MM    {:.8} after {} iterations", mm.objective, mm.iterations);
    println!("CCM   {:.8} after {} iterations", ccm.objective, ccm.iterations);

    let small = oracle::random_psd(&mut rng, 3, 2, 0.1);
    let mu3 = oracle::random_cvec(&mut rng, 3);
    let (grid, _) = oracle::phase_grid_minimum(&small, &mu3, 48);
    let mm3 = minimize_unit_modulus_mm(&small, &mu3, &mu3.map(unit_phase), 1e-12, 5000).expect("mm");
    println!("N=3: MM {:.8}, 48-point grid {:.8}", mm3.objective, grid);
}
