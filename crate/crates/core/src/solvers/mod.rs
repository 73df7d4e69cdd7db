//! Numerical kernels: generalized Rayleigh quotients, a dense convex QCQP
//! interior-point solver, and unit-modulus phase optimizers.

pub mod eigen;
pub mod qcqp;
pub mod unit_modulus;

pub use eigen::{lambda_max_power, max_generalized_rayleigh, Rayleigh};
pub use qcqp::{
    find_strictly_feasible, solve_qcqp, solve_qcqp_from_hint, solve_real_qcqp, KktReport, LinearConstraint, QcqpOptions,
    QcqpProblem, QuadMatrix, QuadraticForm, RealConstraint, RealQcqp, RealQuad, Sense,
};
pub use unit_modulus::{
    minimize_unit_modulus_ccm, minimize_unit_modulus_mm, minimize_unit_modulus_mm_with, mm_surrogate, riemannian_gradient,
    unit_modulus_objective, Majorizer, UnitModulusResult,
};
