//! Dense log-barrier interior-point solver for small convex QCQPs.
//!
//! Complex problems are embedded in `R^{2n}` (`z = [Re x; Im x]`), which keeps
//! the Newton system real symmetric. Internally every coordinate is rescaled
//! so that the bounding quadratic constraints look like unit balls, each
//! constraint is normalized by its right-hand side, and the objective by its
//! curvature; reported residuals are measured in that normalized problem.

use crate::error::SolverError;
use crate::linalg::{from_real, hermitian_defect, hermitian_eigen, real_embedding, to_real, CMat, CVec, RMat, RVec};

/// Hermitian PSD matrix of a quadratic term.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadMatrix {
    Dense(CMat),
    /// Real diagonal, stored as a vector.
    Diagonal(RVec),
}

impl QuadMatrix {
    pub fn dim(&self) -> usize {
        match self {
            QuadMatrix::Dense(m) => m.nrows(),
            QuadMatrix::Diagonal(d) => d.len(),
        }
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        match self {
            QuadMatrix::Dense(m) => m * x,
            QuadMatrix::Diagonal(d) => CVec::from_fn(x.len(), |i, _| x[i] * d[i]),
        }
    }

    fn to_real(&self) -> RealQuad {
        match self {
            QuadMatrix::Dense(m) => RealQuad::Dense(real_embedding(m)),
            QuadMatrix::Diagonal(d) => {
                let n = d.len();
                RealQuad::Diagonal(RVec::from_fn(2 * n, |i, _| d[i % n]))
            }
        }
    }

    fn check_psd(&self) -> Result<(), SolverError> {
        match self {
            QuadMatrix::Dense(m) => {
                let scale = m.norm().max(f64::MIN_POSITIVE);
                let defect = hermitian_defect(m);
                if defect > 1e-10 * scale {
                    return Err(SolverError::NotHermitian(defect));
                }
                let (vals, _) = hermitian_eigen(m);
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                if min < -1e-10 * scale {
                    return Err(SolverError::NotPsd(min));
                }
                Ok(())
            }
            QuadMatrix::Diagonal(d) => match d.iter().copied().find(|&v| v < 0.0) {
                Some(v) => Err(SolverError::NotPsd(v)),
                None => Ok(()),
            },
        }
    }
}

/// `x ↦ xᴴQx − 2Re{bᴴx}`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub q: QuadMatrix,
    pub b: CVec,
}

impl QuadraticForm {
    pub fn new(q: QuadMatrix, b: CVec) -> Self {
        QuadraticForm { q, b }
    }

    pub fn eval(&self, x: &CVec) -> f64 {
        x.dotc(&self.q.apply(x)).re - 2.0 * self.b.dotc(x).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `Re{aᴴx} ≥ c`
    Ge,
    /// `Re{aᴴx} ≤ c`
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub a: CVec,
    pub c: f64,
    pub sense: Sense,
}

/// Minimize a convex quadratic subject to convex quadratic, linear, and ball
/// constraints over `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    pub objective: QuadraticForm,
    /// `(form, bound)`: `form(x) ≤ bound`.
    pub quad_constraints: Vec<(QuadraticForm, f64)>,
    pub linear_constraints: Vec<LinearConstraint>,
    /// `‖x‖² ≤ r`.
    pub ball_constraints: Vec<f64>,
}

impl QcqpProblem {
    pub fn dim(&self) -> usize {
        self.objective.b.len()
    }

    /// Checks dimensions and convexity.
    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.dim();
        let dims_ok = self.objective.q.dim() == n
            && self.quad_constraints.iter().all(|(f, _)| f.q.dim() == n && f.b.len() == n)
            && self.linear_constraints.iter().all(|l| l.a.len() == n);
        if !dims_ok {
            return Err(SolverError::Dimension("QCQP terms disagree on the variable size".into()));
        }
        self.objective.q.check_psd()?;
        for (f, _) in &self.quad_constraints {
            f.q.check_psd()?;
        }
        if self.quad_constraints.is_empty() && self.ball_constraints.is_empty() {
            return Err(SolverError::Unbounded);
        }
        Ok(())
    }

    /// Values `g_i(x)` of all constraints written as `g_i(x) ≤ 0`, in the
    /// order quadratic, linear, ball.
    pub fn constraint_values(&self, x: &CVec) -> Vec<f64> {
        let mut out = Vec::new();
        for (f, bound) in &self.quad_constraints {
            out.push(f.eval(x) - bound);
        }
        for l in &self.linear_constraints {
            let v = l.a.dotc(x).re;
            out.push(match l.sense {
                Sense::Ge => l.c - v,
                Sense::Le => v - l.c,
            });
        }
        for r in &self.ball_constraints {
            out.push(x.norm_squared() - r);
        }
        out
    }

    /// True when every constraint holds up to `rel_tol` relative to its
    /// bound (or to the size of its terms when the bound is zero).
    pub fn is_feasible(&self, x: &CVec, rel_tol: f64) -> bool {
        let quad = self.quad_constraints.iter().all(|(f, bound)| {
            let v = f.eval(x);
            v - bound <= rel_tol * bound.abs().max(v.abs())
        });
        let lin = self.linear_constraints.iter().all(|l| {
            let v = l.a.dotc(x).re;
            let slack = match l.sense {
                Sense::Ge => v - l.c,
                Sense::Le => l.c - v,
            };
            slack >= -rel_tol * l.c.abs().max(v.abs())
        });
        let ball = self.ball_constraints.iter().all(|r| x.norm_squared() <= r * (1.0 + rel_tol));
        quad && lin && ball
    }

    /// Real form: `min zᵀP₀z + q₀ᵀz` s.t. `zᵀP_i z + q_iᵀz + r_i ≤ 0`.
    pub fn to_real(&self) -> RealQcqp {
        let n = self.dim();
        let mut constraints = Vec::new();
        for (f, bound) in &self.quad_constraints {
            constraints.push(RealConstraint {
                p: f.q.to_real(),
                q: to_real(&f.b) * -2.0,
                r: -bound,
            });
        }
        for l in &self.linear_constraints {
            let a = to_real(&l.a);
            constraints.push(match l.sense {
                Sense::Ge => RealConstraint {
                    p: RealQuad::Zero,
                    q: -a,
                    r: l.c,
                },
                Sense::Le => RealConstraint {
                    p: RealQuad::Zero,
                    q: a,
                    r: -l.c,
                },
            });
        }
        for &r in &self.ball_constraints {
            constraints.push(RealConstraint {
                p: RealQuad::Diagonal(RVec::from_element(2 * n, 1.0)),
                q: RVec::zeros(2 * n),
                r: -r,
            });
        }
        RealQcqp {
            p0: self.objective.q.to_real(),
            q0: to_real(&self.objective.b) * -2.0,
            constraints,
        }
    }
}

/// Symmetric PSD matrix in the real formulation.
#[derive(Debug, Clone, PartialEq)]
pub enum RealQuad {
    Zero,
    Dense(RMat),
    Diagonal(RVec),
}

impl RealQuad {
    fn apply(&self, z: &RVec) -> RVec {
        match self {
            RealQuad::Zero => RVec::zeros(z.len()),
            RealQuad::Dense(m) => m * z,
            RealQuad::Diagonal(d) => d.component_mul(z),
        }
    }

    fn diagonal_entry(&self, i: usize) -> f64 {
        match self {
            RealQuad::Zero => 0.0,
            RealQuad::Dense(m) => m[(i, i)],
            RealQuad::Diagonal(d) => d[i],
        }
    }

    fn add_scaled_to(&self, h: &mut RMat, s: f64) {
        match self {
            RealQuad::Zero => {}
            RealQuad::Dense(m) => *h += m * s,
            RealQuad::Diagonal(d) => {
                for i in 0..d.len() {
                    h[(i, i)] += s * d[i];
                }
            }
        }
    }

    /// `S·P·S` for diagonal `S`, times `factor`.
    fn congruence(&self, s: &RVec, factor: f64) -> RealQuad {
        match self {
            RealQuad::Zero => RealQuad::Zero,
            RealQuad::Dense(m) => RealQuad::Dense(RMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s[i] * s[j] * factor)),
            RealQuad::Diagonal(d) => RealQuad::Diagonal(RVec::from_fn(d.len(), |i, _| d[i] * s[i] * s[i] * factor)),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, RealQuad::Zero)
    }
}

/// `g(z) = zᵀPz + qᵀz + r`
#[derive(Debug, Clone, PartialEq)]
pub struct RealConstraint {
    pub p: RealQuad,
    pub q: RVec,
    pub r: f64,
}

impl RealConstraint {
    pub fn value(&self, z: &RVec) -> f64 {
        z.dot(&self.p.apply(z)) + self.q.dot(z) + self.r
    }

    fn gradient(&self, z: &RVec) -> RVec {
        self.p.apply(z) * 2.0 + &self.q
    }
}

/// Convex QCQP in real variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RealQcqp {
    pub p0: RealQuad,
    pub q0: RVec,
    pub constraints: Vec<RealConstraint>,
}

impl RealQcqp {
    pub fn dim(&self) -> usize {
        self.q0.len()
    }

    pub fn objective(&self, z: &RVec) -> f64 {
        z.dot(&self.p0.apply(z)) + self.q0.dot(z)
    }

    pub fn max_constraint(&self, z: &RVec) -> f64 {
        self.constraints.iter().map(|c| c.value(z)).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcqpOptions {
    /// Target for the normalized duality gap `m/t`.
    pub tol: f64,
    /// Cap on Newton steps across all centerings.
    pub max_iter: usize,
}

impl Default for QcqpOptions {
    fn default() -> Self {
        QcqpOptions { tol: 1e-10, max_iter: 500 }
    }
}

/// Optimality certificate of a returned point (normalized problem).
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Objective in original units.
    pub objective: f64,
    /// `‖∇f + Σλ_i∇g_i‖ / (1 + ‖∇f‖)`
    pub stationarity: f64,
    /// `max_i λ_i|g_i| / (1 + |f|)`
    pub complementarity: f64,
    /// Surrogate duality gap `−Σλ_i g_i / (1 + |f|)`.
    pub duality_gap: f64,
    /// Largest normalized constraint value (≤ 0 when feasible).
    pub max_violation: f64,
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration cap or a stalled line search ended the run.
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RealSolution {
    pub z: RVec,
    pub report: KktReport,
}

/// The problem after variable scaling `z = S·y` and row normalization.
struct Normalized {
    problem: RealQcqp,
    scale: RVec,
    objective_scale: f64,
}

fn normalize(p: &RealQcqp, hint: &RVec) -> Normalized {
    let n = p.dim();
    // Curvature of bounding constraints sets the per-coordinate scale.
    let mut curvature = RVec::zeros(n);
    for c in &p.constraints {
        if c.p.is_zero() || c.r >= 0.0 {
            continue;
        }
        for i in 0..n {
            curvature[i] = f64::max(curvature[i], c.p.diagonal_entry(i) / -c.r);
        }
    }
    let fallback = hint.amax().max(1.0);
    let scale = RVec::from_fn(n, |i, _| if curvature[i] > 0.0 { 1.0 / curvature[i].sqrt() } else { fallback });
    debug_assert!(scale.iter().all(|s| s.is_finite() && *s > 0.0));

    let constraints = p
        .constraints
        .iter()
        .map(|c| {
            let q = c.q.component_mul(&scale);
            let norm = if c.r != 0.0 {
                c.r.abs()
            } else {
                q.amax().max(f64::MIN_POSITIVE)
            };
            RealConstraint {
                p: c.p.congruence(&scale, 1.0 / norm),
                q: q / norm,
                r: c.r / norm,
            }
        })
        .collect();
    let p0 = p.p0.congruence(&scale, 1.0);
    let q0 = p.q0.component_mul(&scale);
    let curv0 = (0..n).map(|i| p0.diagonal_entry(i).abs()).fold(0.0, f64::max);
    let objective_scale = curv0.max(q0.amax()).max(f64::MIN_POSITIVE);
    Normalized {
        problem: RealQcqp {
            p0: p0.congruence(&RVec::from_element(n, 1.0), 1.0 / objective_scale),
            q0: q0 / objective_scale,
            constraints,
        },
        scale,
        objective_scale,
    }
}

fn solve_spd(h: RMat, rhs: &RVec) -> Option<RVec> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let ridge = 1e-12 * (0..h.nrows()).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = h.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += ridge;
    }
    if let Some(ch) = reg.cholesky() {
        return Some(ch.solve(rhs));
    }
    h.lu().solve(rhs)
}

/// Log-barrier interior-point iterations on a normalized problem from a
/// strictly feasible `y`: Newton centering on `t·f − Σ log(−g_i)` with
/// backtracking, then `t ← 10t`. `stop` may end the run early (used by phase one).
fn interior_point(p: &RealQcqp, mut y: RVec, opts: &QcqpOptions, stop: impl Fn(&RVec) -> bool) -> (RVec, KktReport) {
    let m = p.constraints.len();
    let n = p.dim();
    const MU: f64 = 10.0;
    const ALPHA: f64 = 0.01;
    const BETA: f64 = 0.5;
    const CENTERED: f64 = 1e-20;

    let values = |y: &RVec| -> Vec<f64> { p.constraints.iter().map(|c| c.value(y)).collect() };
    let grad_f = |y: &RVec| -> RVec { p.p0.apply(y) * 2.0 + &p.q0 };
    let barrier = |t: f64, y: &RVec, g: &[f64]| t * p.objective(y) - g.iter().map(|gi| (-gi).ln()).sum::<f64>();

    let mut g = values(&y);
    // t minimizing the centering residual at the start point.
    let t = {
        let gf = grad_f(&y);
        let mut v = RVec::zeros(n);
        for (c, &gi) in p.constraints.iter().zip(&g) {
            v += c.gradient(&y) / -gi;
        }
        let denom = gf.norm_squared();
        if denom > 0.0 {
            (-gf.dot(&v) / denom).max(1.0)
        } else {
            1.0
        }
    };
    let mut t = t;
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = false;

    'outer: loop {
        let mut last_decrement = f64::INFINITY;
        loop {
            if stop(&y) {
                converged = true;
                break 'outer;
            }
            if iterations >= opts.max_iter {
                break 'outer;
            }
            iterations += 1;
            let grads: Vec<RVec> = p.constraints.iter().map(|c| c.gradient(&y)).collect();
            let mut grad = grad_f(&y) * t;
            let mut h = RMat::zeros(n, n);
            p.p0.add_scaled_to(&mut h, 2.0 * t);
            for i in 0..m {
                let inv = 1.0 / -g[i];
                grad.axpy(inv, &grads[i], 1.0);
                p.constraints[i].p.add_scaled_to(&mut h, 2.0 * inv);
                h.ger(inv * inv, &grads[i], &grads[i], 1.0);
            }
            let Some(dy) = solve_spd(h, &(-&grad)) else {
                stalled = true;
                break 'outer;
            };
            let decrement = -grad.dot(&dy);
            // Inside the quadratic region the decrement must shrink every step,
            // so growth there is rounding noise.
            if !(decrement > CENTERED) || (decrement < 1e-2 && decrement >= last_decrement) {
                break;
            }
            last_decrement = decrement;
            // Inside the quadratic region a full step is safe; the barrier value
            // itself is too coarse there for a sufficient-decrease test.
            let near = decrement < 1e-2;
            let phi = barrier(t, &y, &g);
            let mut s = 1.0;
            let accepted = loop {
                let y_new = &y + &dy * s;
                let g_new = values(&y_new);
                if g_new.iter().all(|&v| v < 0.0) && (near || barrier(t, &y_new, &g_new) <= phi - ALPHA * s * decrement) {
                    break Some((y_new, g_new));
                }
                s *= BETA;
                if s < 1e-20 {
                    break None;
                }
            };
            let Some((y_new, g_new)) = accepted else { break };
            y = y_new;
            g = g_new;
        }
        let gap = m as f64 / t;
        if gap <= opts.tol * (1.0 + p.objective(&y).abs()) {
            converged = true;
            break;
        }
        t *= MU;
    }

    let fval = p.objective(&y);
    let gf = grad_f(&y);
    let grads: Vec<RVec> = p.constraints.iter().map(|c| c.gradient(&y)).collect();
    let residual = |lambda: &[f64]| {
        let mut rd = gf.clone();
        for (gi, &l) in grads.iter().zip(lambda) {
            rd.axpy(l, gi, 1.0);
        }
        rd
    };
    let barrier_lambda: Vec<f64> = g.iter().map(|&gi| 1.0 / (t * -gi)).collect();
    let fitted = fit_multipliers(&gf, &grads, &barrier_lambda);
    let lambda = if residual(&fitted).norm() < residual(&barrier_lambda).norm() {
        fitted
    } else {
        barrier_lambda
    };
    let rd = residual(&lambda);
    let gap: f64 = -lambda.iter().zip(&g).map(|(l, gi)| l * gi).sum::<f64>();
    let report = KktReport {
        objective: fval,
        stationarity: rd.norm() / (1.0 + gf.norm()),
        complementarity: lambda.iter().zip(&g).map(|(l, gi)| (l * gi).abs()).fold(0.0, f64::max) / (1.0 + fval.abs()),
        duality_gap: gap / (1.0 + fval.abs()),
        max_violation: g.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        multipliers: lambda,
        iterations,
        converged: converged && !stalled,
    };
    (y, report)
}

/// Nonnegative least-squares multipliers on the constraints that carry
/// weight at the barrier estimate. The barrier values `1/(t|g_i|)` lose
/// digits once `|g_i|` nears rounding level.
fn fit_multipliers(gf: &RVec, grads: &[RVec], estimate: &[f64]) -> Vec<f64> {
    let weight = |i: usize| estimate[i] * grads[i].norm();
    let scale = 1e-9 * (1.0 + gf.norm());
    let mut active: Vec<usize> = (0..grads.len()).filter(|&i| weight(i) > scale).collect();
    loop {
        let mut out = vec![0.0; grads.len()];
        if active.is_empty() {
            return out;
        }
        let a = RMat::from_columns(&active.iter().map(|&i| grads[i].clone()).collect::<Vec<_>>());
        let Some(sol) = a.clone().svd(true, true).solve(&(-gf), 1e-14).ok() else {
            return estimate.to_vec();
        };
        if sol.iter().all(|&l| l >= 0.0) {
            for (k, &i) in active.iter().enumerate() {
                out[i] = sol[k];
            }
            return out;
        }
        let worst = (0..sol.len()).min_by(|&a, &b| sol[a].total_cmp(&sol[b])).unwrap_or(0);
        active.remove(worst);
    }
}

/// Solves a real convex QCQP from a strictly feasible `z0`.
pub fn solve_real_qcqp(p: &RealQcqp, z0: &RVec, opts: &QcqpOptions) -> Result<RealSolution, SolverError> {
    if p.constraints.is_empty() {
        return Err(SolverError::Unbounded);
    }
    if z0.len() != p.dim() {
        return Err(SolverError::Dimension("start point".into()));
    }
    let start_max = p.max_constraint(z0);
    if !(start_max < 0.0) {
        return Err(SolverError::InfeasibleStart(start_max));
    }
    let norm = normalize(p, z0);
    let y0 = z0.component_div(&norm.scale);
    if !(norm.problem.max_constraint(&y0) < 0.0) {
        return Err(SolverError::InfeasibleStart(norm.problem.max_constraint(&y0)));
    }
    let (y, mut report) = interior_point(&norm.problem, y0, opts, |_| false);
    let z = y.component_mul(&norm.scale);
    report.objective = p.objective(&z);
    debug_assert!(norm.objective_scale > 0.0);
    Ok(RealSolution { z, report })
}

/// Finds a strictly feasible point by minimizing the largest constraint value.
pub fn find_strictly_feasible(p: &RealQcqp, hint: &RVec) -> Result<RVec, SolverError> {
    if p.constraints.is_empty() {
        return Err(SolverError::Unbounded);
    }
    if p.max_constraint(hint) < 0.0 {
        return Ok(hint.clone());
    }
    let norm = normalize(p, hint);
    let q = &norm.problem;
    let n = q.dim();
    let extend = |v: &RVec, last: f64| RVec::from_fn(n + 1, |i, _| if i < n { v[i] } else { last });
    let embed = |m: &RealQuad| match m {
        RealQuad::Zero => RealQuad::Zero,
        RealQuad::Diagonal(d) => RealQuad::Diagonal(extend(d, 0.0)),
        RealQuad::Dense(d) => {
            let mut out = RMat::zeros(n + 1, n + 1);
            out.view_mut((0, 0), (n, n)).copy_from(d);
            RealQuad::Dense(out)
        }
    };
    // g_i(y) − s ≤ 0 and s ≥ −1.
    let mut constraints: Vec<RealConstraint> = q
        .constraints
        .iter()
        .map(|c| RealConstraint {
            p: embed(&c.p),
            q: extend(&c.q, -1.0),
            r: c.r,
        })
        .collect();
    let mut floor = RVec::zeros(n + 1);
    floor[n] = -1.0;
    constraints.push(RealConstraint {
        p: RealQuad::Zero,
        q: floor,
        r: -1.0,
    });
    let mut cost = RVec::zeros(n + 1);
    cost[n] = 1.0;
    let phase_one = RealQcqp {
        p0: RealQuad::Zero,
        q0: cost,
        constraints,
    };
    let y0 = hint.component_div(&norm.scale);
    let s0 = (q.max_constraint(&y0) + 1.0).max(0.0);
    let start = extend(&y0, s0);
    let opts = QcqpOptions { tol: 1e-9, max_iter: 500 };
    let (aug, report) = interior_point(&phase_one, start, &opts, |v| v[n] < -0.25);
    let s = aug[n];
    let y = RVec::from_fn(n, |i, _| aug[i]);
    let z = y.component_mul(&norm.scale);
    if s < 0.0 && p.max_constraint(&z) < 0.0 {
        Ok(z)
    } else {
        Err(SolverError::Infeasible(s.min(report.objective)))
    }
}

/// Solves a complex QCQP from a strictly feasible `x0`.
pub fn solve_qcqp(p: &QcqpProblem, x0: &CVec, tol: f64) -> Result<(CVec, KktReport), SolverError> {
    p.validate()?;
    if x0.len() != p.dim() {
        return Err(SolverError::Dimension("start point".into()));
    }
    let real = p.to_real();
    let sol = solve_real_qcqp(&real, &to_real(x0), &QcqpOptions { tol, ..Default::default() })?;
    Ok((from_real(&sol.z), sol.report))
}

/// Like [`solve_qcqp`], but runs phase one first when `hint` is not strictly
/// feasible.
pub fn solve_qcqp_from_hint(p: &QcqpProblem, hint: &CVec, tol: f64) -> Result<(CVec, KktReport), SolverError> {
    p.validate()?;
    let real = p.to_real();
    let z0 = find_strictly_feasible(&real, &to_real(hint))?;
    let sol = solve_real_qcqp(&real, &z0, &QcqpOptions { tol, ..Default::default() })?;
    Ok((from_real(&sol.z), sol.report))
}
