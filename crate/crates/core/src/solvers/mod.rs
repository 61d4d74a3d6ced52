//! Outer solvers sharing one options/report contract.
//!
//! Every method starts from `x₀ = v` (unless overridden), projects each
//! accepted update onto the probability simplex and stops once
//! `‖f(x_k)‖₁ < ε`, after `max_outer` updates, or when the best residual has
//! not improved by a factor `1 - 1e-3` for `stagnation_window` consecutive
//! updates. At least one update is always performed.

mod extrapolated;
mod newton;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::extrapolation::ExtrapolationMethod;
use crate::linalg::{norm1, stochastic_defect};
use crate::problem::PageRankProblem;

pub use extrapolated::solve_ng_extrapolated;
pub use newton::{
    anderson_update, fd_step, newton_direction, solve_fixed_point, solve_newton, solve_newton_anderson,
    solve_newton_gmres, solve_newton_gmres_fd, ANDERSON_GUARD,
};

/// Relative improvement the best residual must make to reset the
/// stagnation counter.
pub const STAGNATION_FACTOR: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    FixedPoint,
    Newton,
    NewtonGmres,
    NewtonGmresFd,
    NgMpe,
    NgRre,
    NewtonAnderson,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::FixedPoint,
        Method::Newton,
        Method::NewtonGmres,
        Method::NewtonGmresFd,
        Method::NgMpe,
        Method::NgRre,
        Method::NewtonAnderson,
    ];

    /// Short identifier used on the command line and in CSV output.
    pub fn id(self) -> &'static str {
        match self {
            Method::FixedPoint => "fp",
            Method::Newton => "newton",
            Method::NewtonGmres => "ng",
            Method::NewtonGmresFd => "ngfd",
            Method::NgMpe => "ng-mpe",
            Method::NgRre => "ng-rre",
            Method::NewtonAnderson => "na",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method {s:?} (expected one of fp, newton, ng, ngfd, ng-mpe, ng-rre, na)"
                ))
            })
    }
}

/// How the inner GMRES obtains Jacobian-vector products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianAction {
    #[default]
    Analytic,
    /// `(f(x + σv) - f(x)) / σ`.
    FiniteDifference,
}

/// Inner tolerance `ε_k = max(ε₀, min(cap, η ‖f(x_k)‖₁))` instead of the
/// fixed `ε₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forcing {
    pub eta: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// `ε`, on the residual 1-norm.
    pub outer_tol: f64,
    /// `ε₀`, absolute tolerance on the inner GMRES residual 2-norm.
    pub inner_tol: f64,
    pub max_outer: usize,
    /// Krylov dimension `p`.
    pub krylov_dim: usize,
    /// Extrapolation window parameter `q`; a window holds `q + 2` iterates.
    pub window: usize,
    pub jacobian: JacobianAction,
    /// Anderson depth; only `1` is supported.
    pub anderson_depth: usize,
    pub stagnation_window: usize,
    pub forcing: Option<Forcing>,
    pub reorthogonalize: bool,
    /// Starting vector; `None` means the teleportation vector.
    pub initial_guess: Option<Vec<f64>>,
    /// Keep every projected outer iterate in the report.
    pub record_iterates: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            outer_tol: 1e-15,
            inner_tol: 1e-14,
            max_outer: 1000,
            krylov_dim: 40,
            window: 4,
            jacobian: JacobianAction::Analytic,
            anderson_depth: 1,
            stagnation_window: 20,
            forcing: None,
            reorthogonalize: false,
            initial_guess: None,
            record_iterates: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.outer_tol > 0.0) || !(self.inner_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_outer == 0 || self.krylov_dim == 0 || self.window == 0 {
            return bad("max_outer, krylov_dim and window must be at least 1");
        }
        if self.anderson_depth != 1 {
            return bad("only Anderson depth 1 is supported");
        }
        if self.stagnation_window == 0 {
            return bad("stagnation_window must be at least 1");
        }
        if let Some(f) = self.forcing {
            if !(f.eta > 0.0) || !(f.cap > 0.0) {
                return bad("forcing parameters must be positive");
            }
        }
        Ok(())
    }

    fn inner_tolerance(&self, residual_l1: f64) -> f64 {
        match self.forcing {
            None => self.inner_tol,
            Some(f) => (f.eta * residual_l1).min(f.cap).max(self.inner_tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Stagnated,
    DegenerateProjection,
    SingularJacobian,
}

impl SolveStatus {
    pub fn id(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max_iterations",
            SolveStatus::Stagnated => "stagnated",
            SolveStatus::DegenerateProjection => "degenerate_projection",
            SolveStatus::SingularJacobian => "singular_jacobian",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    /// Last accepted (projected) iterate.
    pub solution: Vec<f64>,
    /// Outer updates; cycles for the extrapolated methods.
    pub outer_iterations: usize,
    /// `‖f(x_k)‖₁` for `k = 0, …, outer_iterations`.
    pub residual_history: Vec<f64>,
    /// GMRES iterations per Newton-GMRES step (empty for methods without an
    /// inner solve).
    pub inner_iteration_counts: Vec<usize>,
    /// Newton steps taken; equals `outer_iterations` except for the
    /// extrapolated methods, which take several per cycle.
    pub newton_steps: usize,
    /// Cycles whose extrapolation failed and fell back to the last iterate.
    pub extrapolation_fallbacks: usize,
    /// Worst `max(|Σx - 1|, max(-x_i))` over all projected iterates.
    pub stochastic_defect: f64,
    pub wall_time: Duration,
    /// Projected iterates `x_0, x_1, …` when requested.
    pub iterates: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap()
    }

    pub fn inner_iterations_total(&self) -> usize {
        self.inner_iteration_counts.iter().sum()
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Solves `problem` with `method`.
pub fn solve(problem: &PageRankProblem, method: Method, opts: &SolverOptions) -> Result<SolveReport> {
    match method {
        Method::FixedPoint => solve_fixed_point(problem, opts),
        Method::Newton => solve_newton(problem, opts),
        Method::NewtonGmres => solve_newton_gmres(problem, opts),
        Method::NewtonGmresFd => solve_newton_gmres_fd(problem, opts),
        Method::NgMpe => solve_ng_extrapolated(problem, opts, ExtrapolationMethod::Mpe),
        Method::NgRre => solve_ng_extrapolated(problem, opts, ExtrapolationMethod::Rre),
        Method::NewtonAnderson => solve_newton_anderson(problem, opts),
    }
}

/// Why an outer step could not produce a new iterate.
enum StepFailure {
    Status(SolveStatus),
    Error(Error),
}

impl From<Error> for StepFailure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateProjection => StepFailure::Status(SolveStatus::DegenerateProjection),
            Error::SingularMatrix { .. } => StepFailure::Status(SolveStatus::SingularJacobian),
            other => StepFailure::Error(other),
        }
    }
}

/// Book-keeping shared by all outer loops.
struct OuterLoop<'a> {
    problem: &'a PageRankProblem,
    opts: &'a SolverOptions,
    method: Method,
    started: Instant,
    x: Vec<f64>,
    f: Vec<f64>,
    history: Vec<f64>,
    inner: Vec<usize>,
    newton_steps: usize,
    fallbacks: usize,
    defect: f64,
    iterates: Vec<Vec<f64>>,
    best: f64,
    since_improvement: usize,
}

impl<'a> OuterLoop<'a> {
    fn start(problem: &'a PageRankProblem, opts: &'a SolverOptions, method: Method) -> Result<Self> {
        opts.validate()?;
        let started = Instant::now();
        let x = match &opts.initial_guess {
            Some(x0) => {
                check_len("initial guess", problem.dim(), x0.len())?;
                x0.clone()
            }
            None => problem.teleport().to_vec(),
        };
        let f = problem.residual(&x)?;
        let res = norm1(&f);
        Ok(Self {
            problem,
            opts,
            method,
            started,
            iterates: if opts.record_iterates { vec![x.clone()] } else { Vec::new() },
            x,
            f,
            history: vec![res],
            inner: Vec::new(),
            newton_steps: 0,
            fallbacks: 0,
            defect: 0.0,
            best: res,
            since_improvement: 0,
        })
    }

    fn outer_iterations(&self) -> usize {
        self.history.len() - 1
    }

    /// Records a projected iterate; returns the terminal status, if any.
    fn accept(&mut self, x: Vec<f64>) -> Result<Option<SolveStatus>> {
        self.f = self.problem.residual(&x)?;
        let res = norm1(&self.f);
        self.defect = self.defect.max(stochastic_defect(&x));
        if self.opts.record_iterates {
            self.iterates.push(x.clone());
        }
        self.x = x;
        self.history.push(res);

        if res < self.opts.outer_tol {
            return Ok(Some(SolveStatus::Converged));
        }
        if res < self.best * STAGNATION_FACTOR {
            self.best = res;
            self.since_improvement = 0;
        } else {
            self.since_improvement += 1;
            if self.since_improvement >= self.opts.stagnation_window {
                return Ok(Some(SolveStatus::Stagnated));
            }
        }
        if !res.is_finite() {
            return Ok(Some(SolveStatus::Stagnated));
        }
        if self.outer_iterations() >= self.opts.max_outer {
            return Ok(Some(SolveStatus::MaxIterations));
        }
        Ok(None)
    }

    fn finish(self, status: SolveStatus) -> SolveReport {
        SolveReport {
            method: self.method,
            status,
            solution: self.x,
            outer_iterations: self.history.len() - 1,
            residual_history: self.history,
            inner_iteration_counts: self.inner,
            newton_steps: self.newton_steps,
            extrapolation_fallbacks: self.fallbacks,
            stochastic_defect: self.defect,
            wall_time: self.started.elapsed(),
            iterates: self.iterates,
        }
    }

    /// Drives a single-update method until a terminal status.
    fn run<S>(mut self, mut step: S) -> Result<SolveReport>
    where
        S: FnMut(&mut Self) -> std::result::Result<Vec<f64>, StepFailure>,
    {
        loop {
            match step(&mut self) {
                Ok(x) => {
                    if let Some(status) = self.accept(x)? {
                        return Ok(self.finish(status));
                    }
                }
                Err(StepFailure::Status(status)) => return Ok(self.finish(status)),
                Err(StepFailure::Error(e)) => return Err(e),
            }
        }
    }
}
