//! Brent's parabolic/golden-section minimizer and Brent's root finder, run on
//! the selection objective and its subgradient respectively.
//!
//! Both keep their classical internal bookkeeping but are confined to the
//! count-sound bracket after every evaluation. On piecewise-linear data with
//! a far outlier the parabolic (or secant) steps fail and both fall back to
//! golden-section or bisection steps across the outlier's linear piece.

use super::{Problem, Side, SolverConfig, SolverOutcome, Start, Status};
use crate::error::Result;
use crate::real::Real;
use crate::sample::{Sample, SelectionSpec};

const CGOLD: f64 = 0.381_966_011_250_105_1;

/// Brent's minimizer on `f`.
pub fn brent_min<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<SolverOutcome> {
    let problem = Problem::new(sample, spec, cfg)?;
    let mut st = match problem.start() {
        Start::Done(out) => return Ok(out),
        Start::Bracket(st) => st,
    };
    if st.width() <= cfg.tolerance_f {
        return Ok(SolverOutcome { state: st, approx_y: st.y_l, status: Status::Converged });
    }

    let (mut a, mut b) = (st.y_l, st.y_r);
    let Some(mut x) = st.interior(a + CGOLD * (b - a)) else {
        return Ok(SolverOutcome { state: st, approx_y: st.y_l, status: Status::Stalled });
    };
    let ev = problem.eval(&mut st, x)?;
    if let Side::Hit(v) = problem.absorb(&mut st, &ev) {
        return Ok(SolverOutcome { state: st, approx_y: v, status: Status::Exact });
    }
    let mut fx = ev.f;
    let (mut w, mut fw, mut v, mut fv) = (x, fx, x, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut approx_y = x;
    let mut status = Status::MaxIterations;

    while st.iterations < cfg.maxit {
        a = a.max(st.y_l);
        b = b.min(st.y_r);
        if st.width() <= cfg.tolerance_f {
            status = Status::Converged;
            break;
        }
        if !(a < b && a <= x && x <= b) {
            status = Status::Stalled;
            break;
        }
        let xm = 0.5 * (a + b);
        let tol1 = 0.5 * cfg.tolerance_f + f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            status = Status::Converged;
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x)) {
                golden = false;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let step = if d.abs() >= tol1 { d } else { tol1.copysign(d) };
        let Some(u) = st.interior(x + step) else {
            status = Status::Stalled;
            break;
        };

        let ev = problem.eval(&mut st, u)?;
        approx_y = u;
        if let Side::Hit(v) = problem.absorb(&mut st, &ev) {
            approx_y = v;
            status = Status::Exact;
            break;
        }
        let fu = ev.f;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    if status == Status::MaxIterations && st.width() <= cfg.tolerance_f {
        status = Status::Converged;
    }
    Ok(SolverOutcome { state: st, approx_y, status })
}

/// Brent's root finder (inverse quadratic interpolation, secant and
/// bisection steps) on the subgradient. The function value at a point is the
/// slope of `f` on the side facing the target, so its sign is exact.
pub fn brent_root<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<SolverOutcome> {
    let problem = Problem::new(sample, spec, cfg)?;
    let mut st = match problem.start() {
        Start::Done(out) => return Ok(out),
        Start::Bracket(st) => st,
    };

    let (mut a, mut b) = (st.y_l, st.y_r);
    let (mut fa, mut fb) = (st.g_l, st.g_r);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    let mut approx_y = st.y_l;
    let mut status = Status::MaxIterations;

    while st.iterations < cfg.maxit {
        if st.width() <= cfg.tolerance_f {
            status = Status::Converged;
            break;
        }
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.tolerance_f;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 {
            status = Status::Converged;
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        let step = if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        let Some(t) = st.interior(b + step) else {
            status = Status::Stalled;
            break;
        };
        b = t;
        let ev = problem.eval(&mut st, b)?;
        approx_y = b;
        let side = problem.absorb(&mut st, &ev);
        if let Side::Hit(v) = side {
            approx_y = v;
            status = Status::Exact;
            break;
        }
        fb = Problem::<T>::signed_slope(side, &ev);
        if fb.abs() <= cfg.tolerance_g {
            status = Status::GradientTolerance;
            break;
        }
    }
    if status == Status::MaxIterations && st.width() <= cfg.tolerance_f {
        status = Status::Converged;
    }
    Ok(SolverOutcome { state: st, approx_y, status })
}
