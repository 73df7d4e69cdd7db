//! Median sum rate per AO iteration for each mode.

use star_isac::harness::{run_convergence, SweepSpec};
use star_isac::prelude::*;

const SPEC: &str = r#"
param = "iterations"
values = [30]
modes = ["UED", "EED", "EED:CCM", "SD", "Passive"]
trials = 6
seed = 3
"#;

fn main() -> Result<()> {
    let spec = SweepSpec::from_toml(SPEC)?;
    let table = run_convergence(&spec, 0)?;
    let summary = table.summary();
    print!("iter");
    for m in &spec.modes {
        print!(" {:>9}", m.label);
    }
    println!();
    for it in [1, 2, 3, 5, 10, 20, 30] {
        print!("{it:4}");
        for m in &spec.modes {
            let q = summary.iter().find(|(mode, i, _)| *mode == m.label && *i == it).map(|s| s.2.median);
            print!(" {:9.3}", q.unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
