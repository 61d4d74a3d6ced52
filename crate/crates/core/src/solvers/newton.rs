use crate::error::{Error, Result};
use crate::krylov::{dense_solve, gmres, gmres_monitored, FnOperator, GmresOptions};
use crate::linalg::{add, dot, norm1, norm2, sub};
use crate::problem::{project, PageRankProblem};
use crate::tensor::DENSE_JACOBIAN_SOFT_CAP;

use super::{JacobianAction, Method, OuterLoop, SolveReport, SolverOptions, StepFailure};

/// `‖δ_k - δ_{k-1}‖² <= ANDERSON_GUARD` falls back to the plain step.
pub const ANDERSON_GUARD: f64 = 1e-30;

/// Finite-difference increment `√u (1 + ‖x‖₂) / ‖d‖₂`, `u` the unit roundoff.
pub fn fd_step(x: &[f64], direction: &[f64]) -> f64 {
    let unit_roundoff = f64::EPSILON / 2.0;
    unit_roundoff.sqrt() * (1.0 + norm2(x)) / norm2(direction)
}

/// `(f(x + σd) - f(x)) / σ` given `fx = f(x)`.
fn fd_action(problem: &PageRankProblem, x: &[f64], fx: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    if d.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; d.len()]);
    }
    let sigma = fd_step(x, d);
    let shifted: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + sigma * di).collect();
    let f_shifted = problem.residual(&shifted)?;
    Ok(f_shifted
        .iter()
        .zip(fx)
        .map(|(a, b)| (a - b) / sigma)
        .collect())
}

/// Inexact Newton direction: GMRES on `J_f(x) δ = -f(x)` from `δ₀ = 0`.
/// Returns the direction and the number of GMRES iterations.
pub fn newton_direction(
    problem: &PageRankProblem,
    x: &[f64],
    fx: &[f64],
    opts: &SolverOptions,
    action: JacobianAction,
) -> Result<(Vec<f64>, usize)> {
    let n = problem.dim();
    let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
    let zero = vec![0.0; n];
    let gm = GmresOptions {
        tol: opts.inner_tolerance(norm1(fx)),
        max_dim: opts.krylov_dim,
        reorthogonalize: opts.reorthogonalize,
    };
    let outcome = match action {
        JacobianAction::Analytic => {
            let op = FnOperator::new(n, |w: &[f64]| problem.jacobian_apply(x, w));
            gmres(&op, &rhs, &zero, &gm)?
        }
        JacobianAction::FiniteDifference => {
            let op = FnOperator::new(n, |v: &[f64]| fd_action(problem, x, fx, v));
            // the stopping test re-evaluates ‖f + q(δ_j)‖₂ with a fresh
            // difference along the candidate step
            let mut monitor = |delta: &[f64]| -> Result<f64> {
                let q = fd_action(problem, x, fx, delta)?;
                Ok(norm2(&add(fx, &q)))
            };
            gmres_monitored(&op, &rhs, &zero, &gm, Some(&mut monitor))?
        }
    };
    Ok((outcome.solution, outcome.iterations))
}

/// Plain fixed-point iteration `x_{k+1} = g(x_k)`.
pub fn solve_fixed_point(problem: &PageRankProblem, opts: &SolverOptions) -> Result<SolveReport> {
    OuterLoop::start(problem, opts, Method::FixedPoint)?.run(|state| {
        let g = problem.fixed_point_map(&state.x)?;
        Ok(project(&g)?)
    })
}

/// Projected Newton with a dense Jacobian and LU solve.
pub fn solve_newton(problem: &PageRankProblem, opts: &SolverOptions) -> Result<SolveReport> {
    if problem.dim() > DENSE_JACOBIAN_SOFT_CAP {
        return Err(Error::InvalidParameter(format!(
            "n = {} exceeds the dense Jacobian budget of {DENSE_JACOBIAN_SOFT_CAP}",
            problem.dim()
        )));
    }
    OuterLoop::start(problem, opts, Method::Newton)?.run(|state| {
        let jac = problem.tensor().dense_jacobian(&state.x, problem.alpha())?;
        let rhs: Vec<f64> = state.f.iter().map(|v| -v).collect();
        let delta = dense_solve(&jac, &rhs)?;
        state.newton_steps += 1;
        Ok(project(&add(&state.x, &delta))?)
    })
}

fn newton_gmres(
    problem: &PageRankProblem,
    opts: &SolverOptions,
    action: JacobianAction,
    method: Method,
) -> Result<SolveReport> {
    OuterLoop::start(problem, opts, method)?.run(|state| {
        let (delta, inner) = newton_direction(problem, &state.x, &state.f, opts, action)?;
        state.inner.push(inner);
        state.newton_steps += 1;
        Ok(project(&add(&state.x, &delta))?)
    })
}

/// Newton-GMRES with the analytic Jacobian action.
pub fn solve_newton_gmres(problem: &PageRankProblem, opts: &SolverOptions) -> Result<SolveReport> {
    newton_gmres(problem, opts, JacobianAction::Analytic, Method::NewtonGmres)
}

/// Newton-GMRES with finite-difference Jacobian actions.
pub fn solve_newton_gmres_fd(problem: &PageRankProblem, opts: &SolverOptions) -> Result<SolveReport> {
    newton_gmres(problem, opts, JacobianAction::FiniteDifference, Method::NewtonGmresFd)
}

/// Depth-one Anderson update of the Newton iteration (before projection):
///
/// ```text
/// γ = ⟨δ_k, δ_k - δ_{k-1}⟩ / ‖δ_k - δ_{k-1}‖²
/// x_{k+1} = x_k + δ_k - γ [(x_k - x_{k-1}) + (δ_k - δ_{k-1})]
/// ```
///
/// Falls back to `x_k + δ_k` when `‖δ_k - δ_{k-1}‖² <= ANDERSON_GUARD`.
pub fn anderson_update(x: &[f64], x_prev: &[f64], delta: &[f64], delta_prev: &[f64]) -> Vec<f64> {
    let d_delta = sub(delta, delta_prev);
    let denom = dot(&d_delta, &d_delta);
    let mut next = add(x, delta);
    if denom <= ANDERSON_GUARD {
        return next;
    }
    let gamma = dot(delta, &d_delta) / denom;
    for i in 0..next.len() {
        next[i] -= gamma * ((x[i] - x_prev[i]) + d_delta[i]);
    }
    next
}

/// Newton-GMRES with depth-one Anderson acceleration.
pub fn solve_newton_anderson(problem: &PageRankProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let mut history: Option<(Vec<f64>, Vec<f64>)> = None;
    OuterLoop::start(problem, opts, Method::NewtonAnderson)?.run(|state| {
        let (delta, inner) = newton_direction(problem, &state.x, &state.f, opts, opts.jacobian)?;
        state.inner.push(inner);
        state.newton_steps += 1;
        let candidate = match &history {
            None => add(&state.x, &delta),
            Some((x_prev, delta_prev)) => anderson_update(&state.x, x_prev, &delta, delta_prev),
        };
        let next = project(&candidate).map_err(StepFailure::from)?;
        history = Some((state.x.clone(), delta));
        Ok(next)
    })
}
