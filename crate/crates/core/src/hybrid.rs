//! Exact selection on top of the solvers.
//!
//! A solver leaves a bracket `]y_L, y_R[` and the count `m = count(xᵢ ≤ y_L)`.
//! The elements strictly inside the bracket are copied out and sorted; the
//! target of rank `j` is then `z[j − m − 1]`. With a handful of cutting-plane
//! iterations the copied array is a small fraction of the input, so sorting
//! it is cheap. Ranks that land on `y_R` itself (duplicates at the bracket
//! end) are answered with `y_R` directly.

use rayon::prelude::*;

use crate::baselines::sort_select;
use crate::error::{Error, Result};
use crate::objective::{apply_transform, needs_transform, TransformMode, TransformSpec, TRANSFORM_RANGE_LIMIT};
use crate::real::Real;
use crate::sample::{Method, Sample, SelectionResult, SelectionSpec};
use crate::solvers::{self, Solver, SolverConfig, SolverOutcome, Status};

/// Configuration of [`hybrid_select`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridConfig {
    /// Cutting-plane iterations before the copy-and-sort finish. The best
    /// value depends on the machine; 7 is a good default for tens of millions
    /// of elements.
    pub cp_iterations: usize,
    /// If the bracket still holds at least this fraction of the sample, sort
    /// the whole sample instead of copying.
    pub fallback_full_sort_threshold: f64,
    pub tolerance_f: f64,
    pub transform: TransformMode,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            cp_iterations: 7,
            fallback_full_sort_threshold: 0.5,
            tolerance_f: 1e-12,
            transform: TransformMode::Auto,
        }
    }
}

impl HybridConfig {
    pub fn with_cp_iterations(mut self, cp_iterations: usize) -> Self {
        self.cp_iterations = cp_iterations;
        self
    }

    pub fn with_transform(mut self, transform: TransformMode) -> Self {
        self.transform = transform;
        self
    }
}

/// A few cutting-plane iterations, then copy and sort the elements left in
/// the bracket. The result is always an exact element of the input.
pub fn hybrid_select<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &HybridConfig) -> Result<SelectionResult<T>> {
    let solver = (cfg.cp_iterations > 0).then(|| SolverConfig {
        maxit: cfg.cp_iterations,
        tolerance_f: cfg.tolerance_f,
        tolerance_g: 0.0,
        method: Solver::CuttingPlane,
    });
    run(sample, spec, solver.as_ref(), cfg.transform, cfg.fallback_full_sort_threshold, Method::Hybrid)
}

/// Runs `cfg.method` to its own stopping rule, then finishes exactly from
/// the final bracket.
pub fn select<T: Real>(sample: &Sample<T>, spec: SelectionSpec, cfg: &SolverConfig) -> Result<SelectionResult<T>> {
    select_with(sample, spec, cfg, TransformMode::Auto)
}

/// [`select`] with an explicit transform policy.
pub fn select_with<T: Real>(
    sample: &Sample<T>,
    spec: SelectionSpec,
    cfg: &SolverConfig,
    transform: TransformMode,
) -> Result<SelectionResult<T>> {
    run(sample, spec, Some(cfg), transform, 1.0, cfg.method.method())
}

/// `max{xᵢ : xᵢ ≤ approx_y}` in one reduction pass.
pub fn exact_finish<T: Real>(sample: &Sample<T>, approx_y: f64) -> Result<T> {
    if !(approx_y >= sample.min().to_f64()) {
        return Err(Error::InvalidArgument(format!(
            "{approx_y} is below the sample minimum {}",
            sample.min()
        )));
    }
    let best = sample.reduce(
        |c| {
            c.iter().copied().filter(|v| v.to_f64() <= approx_y).fold(None, |acc: Option<T>, v| match acc {
                Some(a) if a >= v => Some(a),
                _ => Some(v),
            })
        },
        |a, b| match (a, b) {
            (Some(a), Some(b)) => Some(if b > a { b } else { a }),
            (a, b) => a.or(b),
        },
    );
    Ok(best.expect("the minimum satisfies the predicate"))
}

fn run<T: Real>(
    sample: &Sample<T>,
    spec: SelectionSpec,
    solver: Option<&SolverConfig>,
    transform: TransformMode,
    threshold: f64,
    method: Method,
) -> Result<SelectionResult<T>> {
    let rank = spec.resolve_rank(sample.len())?;
    let transformed = match transform {
        TransformMode::Always => true,
        TransformMode::Auto => needs_transform(sample),
        TransformMode::Never if needs_transform(sample) => {
            return Err(Error::PrecisionLoss { range: sample.range(), limit: TRANSFORM_RANGE_LIMIT });
        }
        TransformMode::Never => false,
    };
    if !transformed {
        match drive(sample, spec, solver) {
            Ok(out) => return Ok(finish_direct(sample, rank, &out, threshold, method)),
            Err(Error::Overflow { .. }) if transform == TransformMode::Auto => {}
            Err(e) => return Err(e),
        }
    }
    let keys = apply_transform(sample, TransformSpec::for_sample(sample))?;
    let out = drive(&keys, spec, solver)?;
    finish_transformed(sample, &keys, rank, &out, method)
}

fn drive<T: Real>(sample: &Sample<T>, spec: SelectionSpec, solver: Option<&SolverConfig>) -> Result<SolverOutcome> {
    match solver {
        Some(cfg) => solvers::solve(sample, spec, cfg),
        None => solvers::initial_bracket(sample, spec),
    }
}

fn finish_direct<T: Real>(
    sample: &Sample<T>,
    rank: usize,
    out: &SolverOutcome,
    threshold: f64,
    method: Method,
) -> SelectionResult<T> {
    let st = &out.state;
    let result = |value: T, pivot_len: Option<usize>| SelectionResult {
        value,
        rank,
        iterations: st.iterations,
        reductions: st.reductions,
        method,
        pivot_len,
        transformed: false,
    };
    if out.status == Status::Exact {
        // The hit point is one of the (widened) elements; narrowing is exact.
        return result(T::from_f64(out.approx_y), None);
    }
    if rank > st.count_lt_r {
        // count(x < y_R) < j ≤ count(x ≤ y_R): the target equals y_R.
        return result(T::from_f64(st.y_r), None);
    }
    let n = sample.len();
    let expected = st.count_lt_r.saturating_sub(st.m);
    if rank <= st.m || expected as f64 >= threshold * n as f64 {
        let value = sort_select(sample.values(), rank).expect("rank was validated");
        return result(value, Some(n));
    }
    let (lo, hi) = (st.y_l, st.y_r);
    let mut z: Vec<T> = sample
        .values()
        .par_iter()
        .copied()
        .filter(|v| {
            let v = v.to_f64();
            lo < v && v < hi
        })
        .collect();
    debug_assert_eq!(z.len(), expected);
    z.par_sort_unstable_by(T::total_cmp);
    let value = z[rank - st.m - 1];
    result(value, Some(z.len()))
}

/// Finish for a run on `log(1 + x − min)` keys. Distinct inputs can share a
/// key, so the pivot copy takes the original values of every element whose
/// key lies in `]y_L, y_R]` (or equals the hit key), and the answer is
/// confirmed with one counting pass over the originals.
fn finish_transformed<T: Real>(
    sample: &Sample<T>,
    keys: &Sample<f64>,
    rank: usize,
    out: &SolverOutcome,
    method: Method,
) -> Result<SelectionResult<T>> {
    let st = &out.state;
    let exact = out.status == Status::Exact;
    let (lo, hi) = if exact { (out.approx_y, out.approx_y) } else { (st.y_l, st.y_r) };
    let below = |k: f64| if exact { k < lo } else { k <= lo };
    let (m, mut z) = keys
        .values()
        .par_iter()
        .zip(sample.values().par_iter())
        .fold(
            || (0usize, Vec::new()),
            |(mut m, mut z), (&k, &x)| {
                if below(k) {
                    m += 1;
                } else if k <= hi {
                    z.push(x);
                }
                (m, z)
            },
        )
        .reduce(
            || (0usize, Vec::new()),
            |(m1, mut z1), (m2, z2)| {
                z1.extend(z2);
                (m1 + m2, z1)
            },
        );

    let mut value = None;
    if m < rank && rank <= m + z.len() {
        z.par_sort_unstable_by(T::total_cmp);
        let candidate = z[rank - m - 1];
        if has_rank(sample, candidate, rank) {
            value = Some(candidate);
        }
    }
    let value = match value {
        Some(v) => v,
        // The computed log was not monotone on this data; fall back.
        None => sort_select(sample.values(), rank)?,
    };
    Ok(SelectionResult {
        value,
        rank,
        iterations: st.iterations,
        reductions: st.reductions,
        method,
        pivot_len: Some(z.len()),
        transformed: true,
    })
}

/// `count(x < v) < rank ≤ count(x ≤ v)`.
fn has_rank<T: Real>(sample: &Sample<T>, v: T, rank: usize) -> bool {
    let (lt, le) = sample.reduce(
        |c| c.iter().fold((0usize, 0usize), |(lt, le), &x| (lt + (x < v) as usize, le + (x <= v) as usize)),
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    lt < rank && rank <= le
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(v: &[f64], rank: usize) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[rank - 1]
    }

    #[test]
    fn exact_hit_skips_the_copy() {
        let s = Sample::new(vec![0.0, 5.0, 10.0]).unwrap();
        let r = hybrid_select(&s, SelectionSpec::Median, &HybridConfig::default()).unwrap();
        assert_eq!(r.value, 5.0);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.pivot_len, None);
    }

    #[test]
    fn constant_sample() {
        let s = Sample::new(vec![3.25f32; 9]).unwrap();
        let r = hybrid_select(&s, SelectionSpec::Median, &HybridConfig::default()).unwrap();
        assert_eq!(r.value, 3.25);
        assert_eq!(r.pivot_len, None);
    }

    #[test]
    fn answer_does_not_depend_on_cp_iterations() {
        let v: Vec<f64> = (0..5000).map(|i| (((i * 7919) % 5003) as f64).sqrt().sin() * 3.0).collect();
        let s = Sample::with_chunk_len(v.clone(), 512).unwrap();
        for rank in [1, 2, 1250, 2500, 4999, 5000] {
            let want = oracle(&v, rank);
            for iters in [0, 1, 3, 7, 30] {
                let cfg = HybridConfig::default().with_cp_iterations(iters);
                let r = hybrid_select(&s, SelectionSpec::KthSmallest(rank), &cfg).unwrap();
                assert_eq!(r.value, want, "rank {rank}, {iters} iterations");
            }
        }
    }

    #[test]
    fn ties_at_the_bracket_end() {
        // Many copies of the target; the bracket's right end lands on them.
        let mut v = vec![7.0; 40];
        v.extend((0..30).map(|i| i as f64 * 0.1));
        v.extend((0..30).map(|i| 20.0 + i as f64));
        let s = Sample::new(v.clone()).unwrap();
        for rank in [1, 30, 31, 50, 70, 71, 100] {
            for iters in [0, 2, 7] {
                let cfg = HybridConfig::default().with_cp_iterations(iters);
                let r = hybrid_select(&s, SelectionSpec::KthSmallest(rank), &cfg).unwrap();
                assert_eq!(r.value, oracle(&v, rank));
            }
        }
    }

    #[test]
    fn every_solver_finishes_exactly() {
        let v: Vec<f32> = (0..3001).map(|i| ((i * 131) % 997) as f32 * 0.25 - 40.0).collect();
        let s = Sample::new(v.clone()).unwrap();
        let mut sorted = v;
        sorted.sort_by(f32::total_cmp);
        for method in Solver::ALL {
            for rank in [1, 2, 1501, 3000, 3001] {
                let r = select(&s, SelectionSpec::KthSmallest(rank), &SolverConfig::new(method)).unwrap();
                assert_eq!(r.value, sorted[rank - 1], "{method} rank {rank}");
                assert_eq!(r.method, method.method());
            }
        }
    }

    #[test]
    fn exact_finish_examples() {
        let s = Sample::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(exact_finish(&s, 2.4).unwrap(), 2.0);
        assert_eq!(exact_finish(&s, 2.0).unwrap(), 2.0);
        assert_eq!(exact_finish(&s, 1e300).unwrap(), 3.0);
        assert!(matches!(exact_finish(&s, 0.5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn extreme_values_use_the_transform() {
        let s = Sample::new(vec![0.0, 1.0, 1e20]).unwrap();
        let r = hybrid_select(&s, SelectionSpec::Median, &HybridConfig::default()).unwrap();
        assert!(r.transformed);
        assert_eq!(r.value, 1.0);

        let never = HybridConfig::default().with_transform(TransformMode::Never);
        assert!(matches!(hybrid_select(&s, SelectionSpec::Median, &never), Err(Error::PrecisionLoss { .. })));
    }

    #[test]
    fn forced_transform_on_ordinary_data() {
        let v: Vec<f64> = (0..777).map(|i| ((i * 41) % 333) as f64 - 100.0).collect();
        let s = Sample::new(v.clone()).unwrap();
        let cfg = HybridConfig::default().with_transform(TransformMode::Always);
        for rank in [1, 5, 389, 777] {
            let r = hybrid_select(&s, SelectionSpec::KthSmallest(rank), &cfg).unwrap();
            assert!(r.transformed);
            assert_eq!(r.value, oracle(&v, rank));
        }
    }

    #[test]
    fn magnitudes_near_the_float_limit() {
        // max − min overflows; the keys must still be finite and ordered.
        let v = vec![f64::MAX, -f64::MAX, 1.0, -3.0, 1e300, -1e300, f64::MAX];
        let s = Sample::new(v.clone()).unwrap();
        for rank in 1..=v.len() {
            let r = hybrid_select(&s, SelectionSpec::KthSmallest(rank), &HybridConfig::default()).unwrap();
            assert!(r.transformed);
            assert_eq!(r.value, oracle(&v, rank), "rank {rank}");
        }
    }
}
