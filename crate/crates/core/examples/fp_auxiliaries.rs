//! Closed-form fractional-programming auxiliaries.
//!
//! With `γ = SINR` and the matching `ρ`, the quadratic-transform surrogate
//! equals the sum rate in nats.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::fp::{fp_objective, update_gamma, update_rho, Noise};
use star_isac::linalg::c;
use star_isac::metrics::sinrs;
use star_isac::oracle;
use star_isac::prelude::*;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = oracle::random_channel_set(&mut rng, 4, 8, 2, 2);
    let w = oracle::random_cmat(&mut rng, 4, 8);
    let star = oracle::random_star(&mut rng, 8);
    let noise = Noise {
        sigma_k_sq: 0.5,
        sigma_v_sq: 0.1,
    };

    let gamma = update_gamma(&w, &star, &set, noise)?;
    let rho = update_rho(&gamma, &w, &star, &set, noise)?;
    let s = sinrs(&w, &star, &set, noise.sigma_k_sq, noise.sigma_v_sq)?;
    for k in 0..set.k() {
        println!("user {k}: gamma {:.6}  sinr {:.6}  rho {:.4}", gamma[k], s[k], rho[k]);
    }

    let f = fp_objective(&gamma, &rho, &w, &star, &set, noise)?;
    let rate = sum_rate(&w, &star, &set, noise.sigma_k_sq, noise.sigma_v_sq)?;
    println!("surrogate {:.9} nats = {:.9} bit/s/Hz; sum rate {rate:.9}", f, f / std::f64::consts::LN_2);

    let mut nudged = rho.clone();
    nudged[0] *= c(1.01, 0.0);
    let g = fp_objective(&gamma, &nudged, &w, &star, &set, noise)?;
    println!("scaling rho_0 by 1.01 lowers the surrogate by {:.3e}", f - g);
    Ok(())
}
