//! Draw one Monte-Carlo channel realization and dump it as text.
//!
//! ```bash
//! cargo run --example channel_realization -- 7 > channels.txt
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use star_isac::channels::{generate_channel_set, pathloss_linear, write_channel_dump, Geometry};
use star_isac::prelude::*;

fn main() -> Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let sc = ScenarioConfig::desk_scale(ModeSpec::Ued, seed);

    // the geometry is the first thing drawn from the trial stream
    let geo = Geometry::draw(&sc, &mut ChaCha8Rng::seed_from_u64(seed));
    for (k, p) in geo.user_positions(&sc).iter().enumerate() {
        eprintln!("user {k} ({:?}) at ({:6.2}, {:6.2})", sc.user_sides()[k], p[0], p[1]);
    }
    let t = geo.target_position(&sc);
    eprintln!("target at ({:6.2}, {:6.2})", t[0], t[1]);

    let d = sc.ris_pos[1] - sc.bs_pos[1];
    eprintln!("BS-RIS pathloss at {d} m: {:.3} dB", -10.0 * pathloss_linear(d)?.log10());

    let set = generate_channel_set(&sc, &mut ChaCha8Rng::seed_from_u64(seed))?;
    eprintln!("G is {}x{}, ||G||_F = {:.3e}", set.g.nrows(), set.g.ncols(), set.g.norm());
    for k in 0..set.k() {
        eprintln!("user {k}: ||f|| = {:.3e}, ||h_d|| = {:.3e}", set.f[k].norm(), set.h_d[k].norm());
    }
    write_channel_dump(&set, &mut std::io::stdout().lock())
}
