use super::{Problem, Side, SolverConfig, SolverOutcome, Start, Status};
use crate::error::Result;
use crate::real::Real;
use crate::sample::{Sample, SelectionSpec};

/// Bisection on `0 ∈ ∂f(y)`: halves the bracket on the sign of the
/// subgradient at the midpoint. Needs about `log₂(range / tolerance_f)`
/// iterations, so a single far outlier slows it down arbitrarily.
pub fn bisection<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<SolverOutcome> {
    let problem = Problem::new(sample, spec, cfg)?;
    let mut st = match problem.start() {
        Start::Done(out) => return Ok(out),
        Start::Bracket(st) => st,
    };
    let mut approx_y = st.y_l;
    let mut status = Status::MaxIterations;

    while st.iterations < cfg.maxit {
        if st.width() <= cfg.tolerance_f {
            status = Status::Converged;
            break;
        }
        let Some(t) = st.midpoint() else {
            status = Status::Stalled;
            break;
        };
        let ev = problem.eval(&mut st, t)?;
        approx_y = t;
        let side = problem.absorb(&mut st, &ev);
        if let Side::Hit(v) = side {
            approx_y = v;
            status = Status::Exact;
            break;
        }
        if Problem::<T>::signed_slope(side, &ev).abs() <= cfg.tolerance_g {
            status = Status::GradientTolerance;
            break;
        }
    }
    if status == Status::MaxIterations && st.width() <= cfg.tolerance_f {
        status = Status::Converged;
    }
    Ok(SolverOutcome { state: st, approx_y, status })
}
