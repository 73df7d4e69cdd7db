//! One alternating-optimization run in the unequal-energy-division mode,
//! printing the per-iteration trace.
//!
//! ```bash
//! cargo run --release --example ued_optimization -- 4 trace.csv
//! ```

use std::fs::File;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::prelude::*;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let sc = ScenarioConfig::desk_scale(ModeSpec::Ued, seed);
    let channels = generate_channel_set(&sc, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let trace = run_ao(&sc, &channels, &AoOptions::default())?;

    println!("iter  sum rate    radar SNR    delta       C1 slack    BS power   star");
    for r in &trace.records {
        println!(
            "{:4}  {:9.5}  {:10.4e}  {:10.3e}  {:10.3e}  {:9.5}  {}",
            r.iteration,
            r.sum_rate,
            r.radar_snr,
            r.delta,
            r.feasibility.c1,
            r.bs_power,
            r.star_status.label()
        );
    }
    println!("converged: {}", trace.converged);
    if let Some(path) = args.next() {
        trace.write_csv(&mut File::create(path)?)?;
    }
    Ok(())
}
