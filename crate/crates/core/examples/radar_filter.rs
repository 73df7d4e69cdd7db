//! Radar receive filter as a generalized Rayleigh quotient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::metrics::radar_snr_worst;
use star_isac::oracle;
use star_isac::subproblems::solve_radar_filter;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h_dt = oracle::random_cvec(&mut rng, 6);
    let w = oracle::random_cmat(&mut rng, 6, 10);
    let (xi_sq, sigma_z_sq) = (1.0, 1e-2);

    let f = solve_radar_filter(&w, &h_dt, sigma_z_sq).expect("filter");
    let cos = f.u.dotc(&h_dt).norm() / (f.u.norm() * h_dt.norm());
    println!("|cos(u, h_dt)| = {cos:.15}");

    let best = radar_snr_worst(&f.u, &w, &h_dt, xi_sq, sigma_z_sq).expect("snr");
    println!("radar SNR with optimal filter: {best:.6e}");
    for trial in 0..3 {
        let u = oracle::random_cvec(&mut rng, 6);
        let snr = radar_snr_worst(&u, &w, &h_dt, xi_sq, sigma_z_sq).expect("snr");
        println!("random filter {trial}: {snr:.6e}");
    }
}
