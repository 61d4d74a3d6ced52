use crate::error::Result;
use crate::extrapolation::{extrapolate, ExtrapolationMethod, SequenceWindow};
use crate::linalg::{add, norm1};
use crate::problem::{project, PageRankProblem};

use super::newton::newton_direction;
use super::{Method, OuterLoop, SolveReport, SolverOptions};

/// Newton-GMRES accelerated by MPE or RRE.
///
/// Each cycle takes `q + 2` unprojected Newton-GMRES steps from `s₀ = x_k`,
/// extrapolates `s₀, …, s_{q+1}` and projects the result. A window iterate
/// whose residual already meets the tolerance ends the cycle early. If the
/// extrapolation is singular the cycle falls back to `s_{q+1}`.
pub fn solve_ng_extrapolated(
    problem: &PageRankProblem,
    opts: &SolverOptions,
    method: ExtrapolationMethod,
) -> Result<SolveReport> {
    let id = match method {
        ExtrapolationMethod::Mpe => Method::NgMpe,
        ExtrapolationMethod::Rre => Method::NgRre,
    };
    let q = opts.window;
    OuterLoop::start(problem, opts, id)?.run(|state| {
        let mut window = Vec::with_capacity(q + 2);
        let mut s = state.x.clone();
        let mut fs = state.f.clone();
        for _ in 0..q + 2 {
            let (delta, inner) = newton_direction(problem, &s, &fs, opts, opts.jacobian)?;
            state.inner.push(inner);
            state.newton_steps += 1;
            let next = add(&s, &delta);
            window.push(std::mem::replace(&mut s, next));
            fs = problem.residual(&s)?;
            if norm1(&fs) < opts.outer_tol {
                return Ok(project(&s)?);
            }
        }
        // s now holds s_{q+2}, which only feeds the early-exit test
        let window = SequenceWindow::new(window)?;
        let t = match extrapolate(&window, method) {
            Ok(e) if e.vector.iter().all(|v| v.is_finite()) => e.vector,
            _ => {
                state.fallbacks += 1;
                window.last().to_vec()
            }
        };
        Ok(project(&t)?)
    })
}
