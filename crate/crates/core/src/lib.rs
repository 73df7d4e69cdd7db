//! Joint transmit and surface beamforming for an integrated sensing and
//! communication downlink aided by an active simultaneously transmitting and
//! reflecting surface.
//!
//! The optimizer alternates over fractional-programming auxiliaries, the radar
//! receive filter, the base-station beams, and the surface coefficients under
//! one of three operating protocols (unequal energy division, equal energy
//! division, space division), plus a passive-surface baseline.
//!
//! ```no_run
//! use star_isac::prelude::*;
//! use rand::SeedableRng;
//!
//! let sc = ScenarioConfig::desk_scale(ModeSpec::Ued, 7);
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sc.seed);
//! let ch = generate_channel_set(&sc, &mut rng).unwrap();
//! let trace = run_ao(&sc, &ch, &AoOptions::default()).unwrap();
//! println!("{:.3} bit/s/Hz", trace.final_sum_rate());
//! ```

pub mod ao;
pub mod channels;
pub mod error;
pub mod fp;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod scenario;
pub mod selftest;
pub mod solvers;
pub mod subproblems;

pub mod prelude {
    pub use crate::ao::{initialize, run_ao, AoOptions, AoTrace};
    pub use crate::channels::{generate_channel_set, ChannelSet};
    pub use crate::error::{Error, Result, SolverError};
    pub use crate::metrics::{sum_rate, BeamformingState, StarState, SystemParams};
    pub use crate::scenario::{build_scenario, ModeSpec, PhaseSolver, ScenarioConfig, Side};
}
