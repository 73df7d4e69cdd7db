//! Monte-Carlo sweeps, convergence curves and their CSV/gnuplot output.

pub mod format;
pub mod stats;
pub mod sweep;

pub use format::fmt_float;
pub use stats::Quartiles;
pub use sweep::{
    derive_seed, run_convergence, run_sweep, splitmix64, ConvergenceCurve, ConvergencePoint, ConvergenceTable, ModeEntry,
    SummaryRow, SweepParam, SweepResults, SweepSpec, TrialRow, TrialStatus,
};
