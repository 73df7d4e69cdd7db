//! Sum rate against the total power budget, written as CSV plus gnuplot data.
//!
//! ```bash
//! cargo run --release --example power_sweep -- out/power
//! gnuplot -e "plot for [i=0:1] 'out/power/summary.dat' index i using 1:2 with linespoints"
//! ```

use std::path::PathBuf;

use star_isac::harness::{run_sweep, SweepSpec};
use star_isac::prelude::*;

const SPEC: &str = r#"
param = "total_power_dBm"
values = [10, 14, 18, 22, 26]
modes = ["UED", "Passive"]
trials = 6
seed = 2024
"#;

fn main() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "power-sweep".into()));
    let spec = SweepSpec::from_toml(SPEC)?;
    let results = run_sweep(&spec, 0)?;
    for s in results.summary() {
        println!("{:5} dBm  {:8}  median {:8.3}  [{:.3}, {:.3}]", s.value, s.mode, s.sum_rate.median, s.sum_rate.q1, s.sum_rate.q3);
    }
    results.write_all(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
