//! Univariate solvers that shrink a bracket around the minimizer of the
//! selection objective.
//!
//! Every solver starts from the data range `[min, max]` and keeps a bracket
//! `[y_L, y_R]` with `count(xᵢ ≤ y_L) < j ≤ count(xᵢ ≤ y_R)`, where `j` is the
//! target rank. Each evaluation of the objective also yields these counts, so
//! the bracket is updated from exact integer information even when a solver's
//! own step logic relies on rounded objective values. When a solver stops the
//! bracket can be handed to [`crate::hybrid`] for an exact finish.

mod bisection;
mod brent;
mod cutting_plane;

pub use bisection::bisection;
pub use brent::{brent_min, brent_root};
pub use cutting_plane::cutting_plane;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::{Objective, ObjectiveEval};
use crate::real::Real;
use crate::sample::{Method, Sample, SelectionSpec};

/// Iterative method used to locate the order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    CuttingPlane,
    Bisection,
    BrentMin,
    BrentRoot,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::CuttingPlane, Solver::Bisection, Solver::BrentMin, Solver::BrentRoot];

    pub fn method(self) -> Method {
        match self {
            Solver::CuttingPlane => Method::CuttingPlane,
            Solver::Bisection => Method::Bisection,
            Solver::BrentMin => Method::BrentMin,
            Solver::BrentRoot => Method::BrentRoot,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method().id())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|m| m.method().id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown solver `{s}`")))
    }
}

/// Stopping rules and iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub maxit: usize,
    /// Stop once `y_R − y_L ≤ tolerance_f`.
    pub tolerance_f: f64,
    /// Stop once `|g(t)| ≤ tolerance_g`. Zero disables the test apart from
    /// exact optimality.
    pub tolerance_g: f64,
    pub method: Solver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { maxit: 30, tolerance_f: 1e-12, tolerance_g: 0.0, method: Solver::CuttingPlane }
    }
}

impl SolverConfig {
    pub fn new(method: Solver) -> Self {
        SolverConfig { method, ..Default::default() }
    }

    pub fn with_maxit(mut self, maxit: usize) -> Self {
        self.maxit = maxit;
        self
    }

    pub fn with_tolerance(mut self, tolerance_f: f64) -> Self {
        self.tolerance_f = tolerance_f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.maxit == 0 {
            return Err(Error::InvalidArgument("maxit must be at least 1".into()));
        }
        if !(self.tolerance_f >= 0.0 && self.tolerance_g >= 0.0) {
            return Err(Error::InvalidArgument("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Bracket and bookkeeping carried between iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverState {
    pub y_l: f64,
    pub y_r: f64,
    pub f_l: f64,
    pub f_r: f64,
    /// Right slope of the objective at `y_l` (negative inside the loop).
    pub g_l: f64,
    /// Left slope of the objective at `y_r` (positive inside the loop).
    pub g_r: f64,
    /// `count(xᵢ ≤ y_l)`.
    pub m: usize,
    /// `count(xᵢ < y_r)`.
    pub count_lt_r: usize,
    pub iterations: usize,
    /// Full passes over the data, counting the fused min/max/sum pass.
    pub reductions: usize,
}

impl SolverState {
    pub fn width(&self) -> f64 {
        self.y_r - self.y_l
    }

    fn midpoint(&self) -> Option<f64> {
        let t = self.y_l + 0.5 * (self.y_r - self.y_l);
        (t > self.y_l && t < self.y_r).then_some(t)
    }

    /// `t` if it lies strictly inside the bracket, otherwise the midpoint;
    /// `None` when no representable point is left between the ends.
    fn interior(&self, t: f64) -> Option<f64> {
        if t > self.y_l && t < self.y_r {
            Some(t)
        } else {
            self.midpoint()
        }
    }
}

/// Why a solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// `0 ∈ ∂f(approx_y)`; `approx_y` is the target element itself.
    Exact,
    /// The bracket is narrower than `tolerance_f`.
    Converged,
    /// `|g| ≤ tolerance_g` at the last iterate.
    GradientTolerance,
    MaxIterations,
    /// The two cutting planes were parallel.
    FlatModel,
    /// No representable point left inside the bracket, or the solver's own
    /// interval disagreed with the bracket.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOutcome {
    pub state: SolverState,
    /// Last iterate, or the located element when `status` is
    /// [`Status::Exact`].
    pub approx_y: f64,
    pub status: Status,
}

/// Runs the solver selected by `cfg.method`.
pub fn solve<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<SolverOutcome> {
    match cfg.method {
        Solver::CuttingPlane => cutting_plane(sample, spec, cfg),
        Solver::Bisection => bisection(sample, spec, cfg),
        Solver::BrentMin => brent_min(sample, spec, cfg),
        Solver::BrentRoot => brent_root(sample, spec, cfg),
    }
}

/// The starting bracket of every solver, without iterating.
pub fn initial_bracket<T: Real>(sample: &Sample<T>, spec: SelectionSpec) -> Result<SolverOutcome> {
    let problem = Problem::new(sample, spec, &SolverConfig::default())?;
    Ok(match problem.start() {
        Start::Done(out) => out,
        Start::Bracket(state) => SolverOutcome { state, approx_y: state.y_l, status: Status::MaxIterations },
    })
}

/// Where an evaluated point lies relative to the target element.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Left,
    /// The target is known; carries its value.
    Hit(f64),
    Right,
}

/// Objective plus target rank; owns the bracket update rule shared by all
/// solvers.
struct Problem<'a, T> {
    sample: &'a Sample<T>,
    objective: Objective,
    rank: usize,
    /// Stop when an evaluation lands next to the target, not only on it.
    adjacent_hits: bool,
}

enum Start {
    Done(SolverOutcome),
    Bracket(SolverState),
}

impl<'a, T: Real> Problem<'a, T> {
    fn new(sample: &'a Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let rank = spec.resolve_rank(sample.len())?;
        let objective = Objective::for_spec(spec, sample.len())?;
        let adjacent_hits = cfg.method == Solver::CuttingPlane;
        Ok(Problem { sample, objective, rank, adjacent_hits })
    }

    /// Bracket from the cached extremes. Ranks that fall on a multiple
    /// minimum or maximum (including constant samples and `n ≤ 2`) are
    /// answered here without iterating.
    fn start(&self) -> Start {
        let n = self.sample.len();
        let b = self.objective.bracket_init(self.sample);
        let state = SolverState {
            y_l: b.y_l,
            y_r: b.y_r,
            f_l: b.f_l,
            f_r: b.f_r,
            g_l: b.g_l,
            g_r: b.g_r,
            m: self.sample.min_count(),
            count_lt_r: n - self.sample.max_count(),
            iterations: 0,
            reductions: 1,
        };
        if self.rank <= state.m {
            Start::Done(SolverOutcome { state, approx_y: b.y_l, status: Status::Exact })
        } else if self.rank > state.count_lt_r {
            Start::Done(SolverOutcome { state, approx_y: b.y_r, status: Status::Exact })
        } else {
            Start::Bracket(state)
        }
    }

    fn eval(&self, state: &mut SolverState, y: f64) -> Result<ObjectiveEval> {
        let ev = self.objective.eval(self.sample, y)?;
        state.reductions += 1;
        state.iterations += 1;
        Ok(ev)
    }

    /// Moves one end of the bracket to the evaluated point. The same pass
    /// reports the nearest elements on either side of it; with
    /// `adjacent_hits` a point landing in the gap next to the target
    /// identifies the target as well.
    fn absorb(&self, state: &mut SolverState, ev: &ObjectiveEval) -> Side {
        let j = self.rank;
        if ev.count_le() < j {
            debug_assert!(!ev.is_optimal());
            state.y_l = ev.y;
            state.f_l = ev.f;
            state.g_l = ev.g.hi;
            state.m = ev.count_le();
            match ev.next {
                Some(nb) if self.adjacent_hits && ev.count_le() + nb.count as usize >= j => Side::Hit(nb.value),
                _ => Side::Left,
            }
        } else if ev.count_lt >= j {
            debug_assert!(!ev.is_optimal());
            state.y_r = ev.y;
            state.f_r = ev.f;
            state.g_r = ev.g.lo;
            state.count_lt_r = ev.count_lt;
            match ev.prev {
                Some(nb) if self.adjacent_hits && ev.count_lt - (nb.count as usize) < j => Side::Hit(nb.value),
                _ => Side::Right,
            }
        } else {
            debug_assert!(ev.is_optimal(), "counts and subgradient disagree at {}", ev.y);
            Side::Hit(ev.y)
        }
    }

    /// Slope of `f` on the side of `ev.y` facing the target; zero on a hit.
    fn signed_slope(side: Side, ev: &ObjectiveEval) -> f64 {
        match side {
            Side::Left => ev.g.hi,
            Side::Right => ev.g.lo,
            Side::Hit(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_ids_round_trip() {
        for s in Solver::ALL {
            assert_eq!(s.to_string().parse::<Solver>().unwrap(), s);
        }
        assert!("golden".parse::<Solver>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::default().with_maxit(0).validate().is_err());
        assert!(SolverConfig::default().with_tolerance(-1.0).validate().is_err());
    }

    #[test]
    fn ranks_on_repeated_extremes_finish_at_start() {
        let s = Sample::new(vec![1.0, 1.0, 1.0, 5.0, 9.0, 9.0]).unwrap();
        for (spec, y) in [(SelectionSpec::KthSmallest(3), 1.0), (SelectionSpec::KthLargest(2), 9.0)] {
            for method in Solver::ALL {
                let out = solve(&s, spec, &SolverConfig::new(method)).unwrap();
                assert_eq!(out.status, Status::Exact);
                assert_eq!(out.approx_y, y);
                assert_eq!(out.state.iterations, 0);
            }
        }
    }

    #[test]
    fn two_elements_never_iterate() {
        let s = Sample::new(vec![2.0, 1.0]).unwrap();
        for method in Solver::ALL {
            let out = solve(&s, SelectionSpec::Median, &SolverConfig::new(method)).unwrap();
            assert_eq!((out.status, out.approx_y, out.state.iterations), (Status::Exact, 1.0, 0));
        }
    }
}
