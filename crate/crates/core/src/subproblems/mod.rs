//! Assembly and solution of the alternating-optimization blocks.

pub mod radar;
pub mod star;
pub mod transmit;

pub use radar::{solve_radar_filter, RadarFilter};
pub use star::{
    amplitude_terms, phase_terms, solve_split_with, solve_star_eed, solve_star_sd, solve_star_ued, solve_ued_with, star_problem_data,
    AmplitudeTerms, PhaseTerms, StarProblemData,
};
pub use transmit::{assemble_transmit_problem, solve_transmit_beamforming, TransmitProblemData};

use crate::error::SolverError;
use crate::linalg::{c, CVec, RVec};
use crate::solvers::{
    find_strictly_feasible, solve_qcqp, solve_qcqp_from_hint, solve_real_qcqp, KktReport, QcqpOptions, QcqpProblem, RealQcqp,
};

/// Tolerance handed to the interior-point solver by every block.
pub const QCQP_TOL: f64 = 1e-10;

/// What a block did with its iterate.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockStatus {
    Updated,
    /// The solver result did not improve the block objective; the previous
    /// iterate was kept.
    KeptPrevious,
    /// The previous iterate violated the block constraints and the update
    /// restored feasibility, possibly at a lower objective.
    Restored,
    /// The transmit block could not meet the linearized radar floor from an
    /// infeasible iterate and moved toward it instead.
    Restoring,
    /// The subproblem failed; the previous iterate was kept.
    Failed(String),
}

impl BlockStatus {
    pub fn label(&self) -> &str {
        match self {
            BlockStatus::Updated => "updated",
            BlockStatus::KeptPrevious => "kept",
            BlockStatus::Restored => "restored",
            BlockStatus::Restoring => "restoring",
            BlockStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOutcome<T> {
    pub value: T,
    pub status: BlockStatus,
    pub kkt: Option<KktReport>,
}

const SHRINK: [f64; 5] = [1.0, 0.999, 0.99, 0.9, 0.5];

/// Solves `p` starting from a shrunk copy of `x` when one is strictly
/// feasible, otherwise through phase one.
pub(crate) fn solve_near(p: &QcqpProblem, x: &CVec) -> Result<(CVec, KktReport), SolverError> {
    for s in SHRINK {
        let cand = x * c(s, 0.0);
        if p.constraint_values(&cand).iter().all(|&v| v < 0.0) {
            match solve_qcqp(p, &cand, QCQP_TOL) {
                // strictly feasible only before rounding; try a deeper point
                Err(SolverError::InfeasibleStart(_)) => continue,
                other => return other,
            }
        }
    }
    solve_qcqp_from_hint(p, x, QCQP_TOL)
}

pub(crate) fn solve_real_near(p: &RealQcqp, z: &RVec) -> Result<(RVec, KktReport), SolverError> {
    let opts = QcqpOptions {
        tol: QCQP_TOL,
        ..Default::default()
    };
    for s in SHRINK {
        let cand = z * s;
        if p.max_constraint(&cand) < 0.0 {
            match solve_real_qcqp(p, &cand, &opts) {
                Err(SolverError::InfeasibleStart(_)) => continue,
                other => {
                    let sol = other?;
                    return Ok((sol.z, sol.report));
                }
            }
        }
    }
    let start = find_strictly_feasible(p, z)?;
    let sol = solve_real_qcqp(p, &start, &opts)?;
    Ok((sol.z, sol.report))
}

/// Keeps the previous iterate unless the new one is no worse in the block
/// objective (or the previous one was infeasible for the block).
pub(crate) fn accept<T>(
    previous: T,
    previous_objective: f64,
    previous_feasible: bool,
    candidate: T,
    candidate_objective: f64,
    kkt: KktReport,
) -> BlockOutcome<T> {
    if !previous_feasible {
        BlockOutcome {
            value: candidate,
            status: BlockStatus::Restored,
            kkt: Some(kkt),
        }
    } else if candidate_objective <= previous_objective {
        BlockOutcome {
            value: candidate,
            status: BlockStatus::Updated,
            kkt: Some(kkt),
        }
    } else {
        BlockOutcome {
            value: previous,
            status: BlockStatus::KeptPrevious,
            kkt: Some(kkt),
        }
    }
}
