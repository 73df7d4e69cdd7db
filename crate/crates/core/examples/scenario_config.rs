//! Scenario documents: flat TOML with unit-tagged keys.

use star_isac::prelude::*;
use star_isac::scenario::{linear_to_db, watts_to_dbm};

const DOC: &str = r#"
mode = "sd"
seed = 12
n = 8
m = 4
p_total_dbm = 20.0
bs_power_fraction = 0.6
gamma_t_db = 5.0
sd_mask = "rrrrtttt"
noise_dbm = -80.0
"#;

fn main() -> Result<()> {
    let sc = build_scenario(DOC)?;
    println!("P_B {:.2} dBm, P_R {:.2} dBm", watts_to_dbm(sc.p_bs), watts_to_dbm(sc.p_ris));
    println!("radar floor {:.1} dB", linear_to_db(sc.gamma_t));
    println!("mode {:?}", sc.mode);
    println!("--- normalized document ---\n{}", sc.to_toml());

    for bad in ["mode = \"sd\"", "seed = 1\nmode = \"ued\"\np_bs_w = 1.0\np_bs_dbm = 30.0"] {
        match build_scenario(bad) {
            Ok(_) => println!("accepted"),
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(())
}
