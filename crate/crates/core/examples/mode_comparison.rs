//! UED, EED, SD and the passive baseline on matched channel draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use star_isac::harness::Quartiles;
use star_isac::prelude::*;

fn main() -> Result<()> {
    let seeds: Vec<u64> = (0..8).collect();
    let modes = ["ued", "eed", "sd", "passive"];
    for name in modes {
        let rates: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| {
                let mut sc = ScenarioConfig::desk_scale(ModeSpec::Ued, seed);
                sc.set_mode(ModeSpec::from_name(name, sc.n)?);
                let ch = generate_channel_set(&sc, &mut ChaCha8Rng::seed_from_u64(seed))?;
                Ok(run_ao(&sc, &ch, &AoOptions::default())?.final_sum_rate())
            })
            .collect::<Result<_>>()?;
        let q = Quartiles::of(&rates);
        println!("{name:8} median {:8.3}  q1 {:8.3}  q3 {:8.3}", q.median, q.q1, q.q3);
    }
    Ok(())
}
