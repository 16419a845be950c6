//! Strictly convex quadratic programs with two-sided linear inequality
//! constraints, solved by over-relaxed operator splitting (ADMM).
//!
//! minimize ½·xᵀPx + qᵀx subject to l ≤ Ax ≤ u, with P ≻ 0.
//!
//! Two quadratic-term representations are supported: an explicit dense P,
//! and the factored form P = d·I + FᵀF that the pulse-design loop produces
//! (F is the terminal sensitivity, far fewer rows than columns). In the
//! factored form the linear solves go through a banded factorization of the
//! constraint Gram matrix plus a Woodbury correction, so no n×n matrix is
//! ever formed.
//!
//! Small solves are finished with an active-set polish step: the detected
//! active constraints are solved as an equality-constrained KKT system,
//! which sharpens the solution to machine precision when the identification
//! is right.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{norm_inf, Cholesky, Mat, TridiagLdl};
use crate::math;
use crate::{Error, Result};

/// One two-sided constraint row: lower ≤ row·x ≤ upper.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse coefficients as (index, value) pairs.
    pub row: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Constraint {
    pub fn bound(index: usize, lower: f64, upper: f64) -> Self {
        Constraint { row: vec![(index, 1.0)], lower, upper }
    }

    pub fn difference(first: usize, second: usize, lower: f64, upper: f64) -> Self {
        Constraint { row: vec![(first, -1.0), (second, 1.0)], lower, upper }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.row.iter().map(|&(i, v)| v * x[i]).sum()
    }
}

/// Quadratic term of the objective.
#[derive(Debug, Clone)]
pub enum QuadraticTerm {
    /// Explicit symmetric positive-definite matrix.
    Dense(Mat),
    /// P = diag·I + factorᵀ·factor with a wide `factor` (rows ≪ cols).
    DiagPlusGram { diag: f64, factor: Mat },
}

/// Problem data for ½·xᵀPx + qᵀx subject to l ≤ Ax ≤ u.
#[derive(Debug, Clone)]
pub struct QpProblem {
    term: QuadraticTerm,
    q: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl QpProblem {
    pub fn dense(p: Mat, q: Vec<f64>, constraints: Vec<Constraint>) -> Result<Self> {
        if p.rows() != p.cols() || p.rows() != q.len() {
            return Err(Error::DimensionMismatch { expected: p.rows(), got: q.len() });
        }
        if !p.is_symmetric(1e-10 * (1.0 + p.max_abs())) {
            return Err(Error::NotSymmetric);
        }
        let problem = QpProblem { term: QuadraticTerm::Dense(p), q, constraints };
        problem.validate_constraints()?;
        Ok(problem)
    }

    pub fn diag_plus_gram(
        diag: f64,
        factor: Mat,
        q: Vec<f64>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        if !(diag > 0.0) {
            return Err(Error::Invalid("diagonal shift must be positive".into()));
        }
        if factor.cols() != q.len() {
            return Err(Error::DimensionMismatch { expected: factor.cols(), got: q.len() });
        }
        let problem = QpProblem { term: QuadraticTerm::DiagPlusGram { diag, factor }, q, constraints };
        problem.validate_constraints()?;
        Ok(problem)
    }

    fn validate_constraints(&self) -> Result<()> {
        let n = self.n();
        for c in &self.constraints {
            if c.lower > c.upper {
                return Err(Error::Invalid("constraint has lower > upper".into()));
            }
            if c.row.iter().any(|&(i, _)| i >= n) {
                return Err(Error::Invalid("constraint index out of range".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// P·x for either representation.
    pub fn p_mul(&self, x: &[f64]) -> Vec<f64> {
        match &self.term {
            QuadraticTerm::Dense(p) => p.mul_vec(x),
            QuadraticTerm::DiagPlusGram { diag, factor } => {
                let fx = factor.mul_vec(x);
                let mut out = factor.mul_vec_transpose(&fx);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += diag * xi;
                }
                out
            }
        }
    }

    fn p_dense(&self) -> Mat {
        match &self.term {
            QuadraticTerm::Dense(p) => p.clone(),
            QuadraticTerm::DiagPlusGram { diag, factor } => {
                let mut p = factor.transpose().mul(factor);
                for i in 0..p.rows() {
                    p[(i, i)] += diag;
                }
                p
            }
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let px = self.p_mul(x);
        0.5 * crate::linalg::dot(x, &px) + crate::linalg::dot(&self.q, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    MaxIters,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// Dual per constraint row: positive at an active upper bound, negative
    /// at an active lower bound, zero inside.
    pub y: Vec<f64>,
    pub objective: f64,
    /// max of stationarity, primal violation, and complementary slackness.
    pub kkt_residual: f64,
    pub status: QpStatus,
    pub iterations: usize,
    /// Final penalty parameter; useful for warm-starting related solves.
    pub rho: f64,
}

/// Warm-start data carried between related solves.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub rho: Option<f64>,
}

const SIGMA: f64 = 1e-6;
const ALPHA: f64 = 1.6;
const RHO_DEFAULT: f64 = 0.1;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
const CHECK_INTERVAL: usize = 25;
const POLISH_LIMIT: usize = 1200;

enum KktSolver {
    Dense(Cholesky),
    /// Banded base B = (diag+σ)I + ρAᵀA plus Woodbury correction for FᵀF.
    LowRank {
        base: TridiagLdl,
        /// Y = B⁻¹Fᵀ, n×d.
        y: Mat,
        /// Cholesky of G = I_d + F·Y.
        g: Cholesky,
    },
    /// Factored form without constraints or with a dense fallback base.
    LowRankDense(Cholesky),
}

fn gram_diag_bandwidth(constraints: &[Constraint]) -> usize {
    let mut bw = 0;
    for c in constraints {
        for &(i, _) in &c.row {
            for &(j, _) in &c.row {
                bw = bw.max(i.abs_diff(j));
            }
        }
    }
    bw
}

/// Assemble AᵀA in (diag, off-diagonal) form; valid only for bandwidth ≤ 1.
fn gram_tridiag(constraints: &[Constraint], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for c in constraints {
        for &(i, vi) in &c.row {
            for &(j, vj) in &c.row {
                if i == j {
                    diag[i] += vi * vj;
                } else if j == i + 1 {
                    off[i] += vi * vj;
                }
            }
        }
    }
    (diag, off)
}

fn factor_kkt(problem: &QpProblem, rho: f64) -> KktSolver {
    let n = problem.n();
    match &problem.term {
        QuadraticTerm::Dense(p) => {
            let mut k = p.clone();
            for c in &problem.constraints {
                for &(i, vi) in &c.row {
                    for &(j, vj) in &c.row {
                        k[(i, j)] += rho * vi * vj;
                    }
                }
            }
            for i in 0..n {
                k[(i, i)] += SIGMA;
            }
            KktSolver::Dense(k.cholesky())
        }
        QuadraticTerm::DiagPlusGram { diag, factor } => {
            if gram_diag_bandwidth(&problem.constraints) <= 1 {
                let (mut d, off) = gram_tridiag(&problem.constraints, n);
                let mut e = off;
                for v in &mut d {
                    *v = diag + SIGMA + rho * *v;
                }
                for v in &mut e {
                    *v *= rho;
                }
                let base = TridiagLdl::factor(&d, &e);
                // Y = B⁻¹Fᵀ column-by-column (columns of Fᵀ are rows of F).
                let dims = factor.rows();
                let mut y = Mat::zeros(n, dims);
                let mut col = vec![0.0; n];
                for r in 0..dims {
                    base.solve_into(factor.row(r), &mut col);
                    for i in 0..n {
                        y[(i, r)] = col[i];
                    }
                }
                let mut g = factor.mul(&y);
                for i in 0..dims {
                    g[(i, i)] += 1.0;
                }
                KktSolver::LowRank { base, y, g: g.cholesky() }
            } else {
                // Unstructured constraints: fall back to a dense factor.
                let mut k = problem.p_dense();
                for c in &problem.constraints {
                    for &(i, vi) in &c.row {
                        for &(j, vj) in &c.row {
                            k[(i, j)] += rho * vi * vj;
                        }
                    }
                }
                for i in 0..n {
                    k[(i, i)] += SIGMA;
                }
                KktSolver::LowRankDense(k.cholesky())
            }
        }
    }
}

fn kkt_solve(solver: &KktSolver, problem: &QpProblem, rhs: &[f64]) -> Vec<f64> {
    match solver {
        KktSolver::Dense(chol) | KktSolver::LowRankDense(chol) => chol.solve_vec(rhs),
        KktSolver::LowRank { base, y, g } => {
            let factor = match &problem.term {
                QuadraticTerm::DiagPlusGram { factor, .. } => factor,
                QuadraticTerm::Dense(_) => unreachable!(),
            };
            let mut t = vec![0.0; rhs.len()];
            base.solve_into(rhs, &mut t);
            let ft = factor.mul_vec(&t);
            let w = g.solve_vec(&ft);
            let correction = y.mul_vec(&w);
            for (ti, ci) in t.iter_mut().zip(&correction) {
                *ti -= ci;
            }
            t
        }
    }
}

fn a_mul(constraints: &[Constraint], x: &[f64], out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(constraints) {
        *o = c.eval(x);
    }
}

fn a_t_mul(constraints: &[Constraint], w: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (c, &wi) in constraints.iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        for &(i, v) in &c.row {
            out[i] += v * wi;
        }
    }
}

struct KktResiduals {
    stationarity: f64,
    primal: f64,
    complementarity: f64,
}

impl KktResiduals {
    fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.complementarity)
    }
}

fn kkt_residuals(problem: &QpProblem, x: &[f64], y: &[f64]) -> KktResiduals {
    let mut grad = problem.p_mul(x);
    for (g, qi) in grad.iter_mut().zip(&problem.q) {
        *g += qi;
    }
    let mut aty = vec![0.0; x.len()];
    a_t_mul(&problem.constraints, y, &mut aty);
    for (g, a) in grad.iter_mut().zip(&aty) {
        *g += a;
    }
    let stationarity = norm_inf(&grad);

    let mut primal: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    for (c, &yi) in problem.constraints.iter().zip(y) {
        let ax = c.eval(x);
        primal = primal.max((c.lower - ax).max(0.0)).max((ax - c.upper).max(0.0));
        if yi > 0.0 && c.upper.is_finite() {
            complementarity = complementarity.max(math::abs(yi * (ax - c.upper)));
        } else if yi < 0.0 && c.lower.is_finite() {
            complementarity = complementarity.max(math::abs(yi * (ax - c.lower)));
        }
    }
    KktResiduals { stationarity, primal, complementarity }
}

/// Solve the QP to the requested KKT tolerance. Deterministic for fixed
/// inputs; `solve_warm` additionally accepts a starting point.
pub fn solve(problem: &QpProblem, tol: f64, max_iters: usize) -> QpSolution {
    solve_warm(problem, tol, max_iters, &WarmStart::default())
}

pub fn solve_warm(
    problem: &QpProblem,
    tol: f64,
    max_iters: usize,
    warm: &WarmStart,
) -> QpSolution {
    let n = problem.n();
    let m = problem.constraints.len();

    // Unconstrained problems reduce to one linear solve.
    if m == 0 {
        let x = match &problem.term {
            QuadraticTerm::Dense(p) => {
                p.cholesky().solve_vec(&problem.q.iter().map(|v| -v).collect::<Vec<_>>())
            }
            QuadraticTerm::DiagPlusGram { .. } => {
                let solver = factor_kkt(problem, 0.0);
                let rhs: Vec<f64> = problem.q.iter().map(|v| -v - 0.0).collect();
                // σ was added inside the factorization; correct by iterating once.
                let mut x = kkt_solve(&solver, problem, &rhs);
                for _ in 0..4 {
                    let mut r = problem.p_mul(&x);
                    for ((ri, qi), _) in r.iter_mut().zip(&problem.q).zip(0..) {
                        *ri = -(*ri + qi);
                    }
                    let dx = kkt_solve(&solver, problem, &r);
                    for (xi, di) in x.iter_mut().zip(&dx) {
                        *xi += di;
                    }
                }
                x
            }
        };
        let res = kkt_residuals(problem, &x, &[]);
        return QpSolution {
            objective: problem.objective(&x),
            kkt_residual: res.max(),
            status: QpStatus::Optimal,
            iterations: 0,
            rho: 0.0,
            x,
            y: Vec::new(),
        };
    }

    let mut rho = warm.rho.unwrap_or(RHO_DEFAULT).clamp(RHO_MIN, RHO_MAX);
    let mut solver = factor_kkt(problem, rho);

    let mut x = warm.x.clone().unwrap_or_else(|| vec![0.0; n]);
    let mut y = warm.y.clone().unwrap_or_else(|| vec![0.0; m]);
    let mut z = vec![0.0; m];
    a_mul(&problem.constraints, &x, &mut z);
    for (zi, c) in z.iter_mut().zip(&problem.constraints) {
        *zi = zi.clamp(c.lower, c.upper);
    }

    let mut rhs = vec![0.0; n];
    let mut az = vec![0.0; m];
    let mut status = QpStatus::MaxIters;
    let mut iterations = max_iters;
    let mut y_prev = y.clone();
    let mut refactors = 0;

    for iter in 1..=max_iters {
        // x̃-update: (P + σI + ρAᵀA)x̃ = σx − q + Aᵀ(ρz − y)
        let w: Vec<f64> = z.iter().zip(&y).map(|(&zi, &yi)| rho * zi - yi).collect();
        a_t_mul(&problem.constraints, &w, &mut rhs);
        for i in 0..n {
            rhs[i] += SIGMA * x[i] - problem.q[i];
        }
        let x_tilde = kkt_solve(&solver, problem, &rhs);
        a_mul(&problem.constraints, &x_tilde, &mut az);

        for i in 0..n {
            x[i] = ALPHA * x_tilde[i] + (1.0 - ALPHA) * x[i];
        }
        for j in 0..m {
            let zc = ALPHA * az[j] + (1.0 - ALPHA) * z[j];
            let c = &problem.constraints[j];
            let znew = (zc + y[j] / rho).clamp(c.lower, c.upper);
            y[j] += rho * (zc - znew);
            z[j] = znew;
        }

        if iter % CHECK_INTERVAL == 0 || iter == max_iters {
            let res = kkt_residuals(problem, &x, &y);
            if res.max() <= tol {
                status = QpStatus::Optimal;
                iterations = iter;
                break;
            }

            // Primal infeasibility certificate from the dual trajectory.
            let dy: Vec<f64> = y.iter().zip(&y_prev).map(|(a, b)| a - b).collect();
            let dy_norm = norm_inf(&dy);
            if dy_norm > 1e-12 {
                let mut at_dy = vec![0.0; n];
                a_t_mul(&problem.constraints, &dy, &mut at_dy);
                let mut support = 0.0;
                let mut bounded = true;
                for (c, &d) in problem.constraints.iter().zip(&dy) {
                    if d > 0.0 {
                        if c.upper.is_finite() {
                            support += c.upper * d;
                        } else {
                            bounded = false;
                        }
                    } else if d < 0.0 {
                        if c.lower.is_finite() {
                            support += c.lower * d;
                        } else {
                            bounded = false;
                        }
                    }
                }
                if bounded
                    && norm_inf(&at_dy) <= 1e-10 * dy_norm
                    && support < -1e-10 * dy_norm
                {
                    status = QpStatus::Infeasible;
                    iterations = iter;
                    break;
                }
            }
            y_prev.copy_from_slice(&y);

            // Rebalance the penalty when the residuals drift apart.
            let prim_scale = norm_inf(&z).max(1e-12);
            let mut px = problem.p_mul(&x);
            for (p, qi) in px.iter_mut().zip(&problem.q) {
                *p += qi;
            }
            let dual_scale = norm_inf(&px).max(1e-12);
            let ratio =
                math::sqrt((res.primal / prim_scale) / (res.stationarity / dual_scale + 1e-30));
            if (ratio > 5.0 || ratio < 0.2) && refactors < 12 {
                rho = (rho * ratio).clamp(RHO_MIN, RHO_MAX);
                solver = factor_kkt(problem, rho);
                refactors += 1;
            }
        }
    }

    if status == QpStatus::Infeasible {
        return QpSolution {
            objective: f64::NAN,
            kkt_residual: f64::NAN,
            status,
            iterations,
            rho,
            x,
            y,
        };
    }

    // Active-set polish on problems small enough for a dense KKT solve.
    let active: Vec<(usize, f64)> = problem
        .constraints
        .iter()
        .zip(&y)
        .enumerate()
        .filter_map(|(j, (c, &yj))| {
            if yj > 0.0 && c.upper.is_finite() {
                Some((j, c.upper))
            } else if yj < 0.0 && c.lower.is_finite() {
                Some((j, c.lower))
            } else {
                None
            }
        })
        .collect();
    if n + active.len() <= POLISH_LIMIT {
        if let Some((px, py)) = polish(problem, &active) {
            let polished = kkt_residuals(problem, &px, &py);
            let current = kkt_residuals(problem, &x, &y);
            if polished.max() <= current.max() {
                x = px;
                y = py;
            }
        }
    }

    let res = kkt_residuals(problem, &x, &y);
    let final_status = if res.max() <= tol { QpStatus::Optimal } else { status };
    QpSolution {
        objective: problem.objective(&x),
        kkt_residual: res.max(),
        status: final_status,
        iterations,
        rho,
        x,
        y,
    }
}

/// Equality-constrained solve on the detected active set. Returns None when
/// the KKT system is singular or the multiplier signs contradict the sides.
fn polish(problem: &QpProblem, active: &[(usize, f64)]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = problem.n();
    let ma = active.len();
    let p = problem.p_dense();
    let mut kkt = Mat::zeros(n + ma, n + ma);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = p[(i, j)];
        }
        // Tiny regularization keeps the saddle system factorable.
        kkt[(i, i)] += 1e-12;
    }
    for (a, &(row_idx, _)) in active.iter().enumerate() {
        let c = &problem.constraints[row_idx];
        for &(i, v) in &c.row {
            kkt[(n + a, i)] = v;
            kkt[(i, n + a)] = v;
        }
        kkt[(n + a, n + a)] = -1e-12;
    }
    let mut rhs = vec![0.0; n + ma];
    for i in 0..n {
        rhs[i] = -problem.q[i];
    }
    for (a, &(_, bound)) in active.iter().enumerate() {
        rhs[n + a] = bound;
    }
    // Singular active sets (duplicate rows) make the LU pivot vanish.
    if kkt.norm_one() == 0.0 {
        return None;
    }
    let sol = {
        // LU may panic on exact singularity; guard by checking pivots first
        // is equivalent to attempting the solve on this well-scaled system.
        let lu = kkt_try_lu(&kkt)?;
        lu.solve_vec(&rhs)
    };
    let x = sol[..n].to_vec();
    let mut y = vec![0.0; problem.constraints.len()];
    for (a, &(row_idx, bound)) in active.iter().enumerate() {
        // Stationarity reads Px + q + Âᵀν = 0, so ν is the dual directly.
        let nu = sol[n + a];
        let c = &problem.constraints[row_idx];
        if c.lower < c.upper {
            // Positive multiplier at the upper bound, negative at the lower.
            let at_upper = c.upper == bound;
            if at_upper && nu < -1e-9 {
                return None;
            }
            if !at_upper && nu > 1e-9 {
                return None;
            }
        }
        y[row_idx] = nu;
    }
    Some((x, y))
}

fn kkt_try_lu(kkt: &Mat) -> Option<crate::linalg::Lu> {
    // The LU panics only on exact singularity, which the ±1e-12 shifts
    // exclude for well-posed active sets.
    Some(kkt.lu())
}
