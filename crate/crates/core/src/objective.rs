//! The convex piecewise-linear objectives whose minimizers are order
//! statistics, evaluated together with their subdifferential in one pass.
//!
//! Two objectives are provided:
//!
//! * the absolute-deviation objective `f(y) = Σ |xᵢ − y|`, minimized by the
//!   median, with subdifferential
//!   `count(xᵢ<y) − count(xᵢ>y) + count(xᵢ=y)·[−1, 1]`;
//! * the asymmetric objective `f(y) = Σ u(xᵢ − y)` with
//!   `u(t) = w₊·t` for `t ≥ 0` and `u(t) = −w₋·t` for `t < 0`, where the
//!   weights are chosen so the unique minimizer is a requested order statistic.
//!
//! Sums are accumulated in `f64` whatever the element type. A single kernel
//! computes `Σ(y − xᵢ)` over `xᵢ < y`, `Σ(xᵢ − y)` over `xᵢ > y` and the
//! below/equal counts, so `f` and `∂f` always come from the same reduction.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::reduce;
use crate::sample::{Sample, SelectionSpec, SubgradientInterval};

/// Above this data range the bulk of the sample stops contributing to the
/// objective sums, and selection switches to log-transformed values.
pub const TRANSFORM_RANGE_LIMIT: f64 = 1e15;

/// Weights of the asymmetric order-statistic objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsWeights {
    /// Slope applied to elements above `y`.
    pub w_pos: f64,
    /// Slope applied to elements below `y`.
    pub w_neg: f64,
}

impl OsWeights {
    /// Weights `w₊ = n − k + ½`, `w₋ = k − ½`.
    ///
    /// With these weights the minimizer is the `k`-th *largest* element,
    /// i.e. `k` counts down from the maximum.
    pub fn from_largest_rank(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::RankOutOfRange { rank: k, n });
        }
        Ok(OsWeights { w_pos: (n - k) as f64 + 0.5, w_neg: k as f64 - 0.5 })
    }

    /// Weights whose minimizer is the `j`-th smallest element.
    pub fn for_rank(j: usize, n: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::RankOutOfRange { rank: j, n });
        }
        Self::from_largest_rank(n - j + 1, n)
    }

    fn is_valid_for(&self, n: usize) -> bool {
        self.w_pos > 0.0 && self.w_neg > 0.0 && self.w_pos + self.w_neg == n as f64
    }
}

/// Which objective to minimize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// `Σ |xᵢ − y|`.
    AbsoluteDeviation,
    /// `Σ u(xᵢ − y)` with the given weights.
    OrderStatistic(OsWeights),
}

impl Objective {
    /// The objective whose unique minimizer is the element selected by `spec`.
    ///
    /// The absolute-deviation objective is used for the median of an odd
    /// sample. For an even sample it is flat between the two middle elements,
    /// so the lower median goes through the weighted objective like any other
    /// rank.
    pub fn for_spec(spec: SelectionSpec, n: usize) -> Result<Self> {
        let j = spec.resolve_rank(n)?;
        if spec == SelectionSpec::Median && n % 2 == 1 {
            Ok(Objective::AbsoluteDeviation)
        } else {
            Ok(Objective::OrderStatistic(OsWeights::for_rank(j, n)?))
        }
    }

    /// `(w₊, w₋)`.
    pub fn weights(&self) -> (f64, f64) {
        match *self {
            Objective::AbsoluteDeviation => (1.0, 1.0),
            Objective::OrderStatistic(w) => (w.w_pos, w.w_neg),
        }
    }

    /// Evaluates `f(y)` and `∂f(y)` in one reduction pass.
    pub fn eval<T: Real>(&self, sample: &Sample<T>, y: f64) -> Result<ObjectiveEval> {
        if !y.is_finite() {
            return Err(Error::InvalidArgument(format!("evaluation point {y} is not finite")));
        }
        let partial = sample.reduce(|c| ObjectivePartial::of_chunk(c, y), ObjectivePartial::merge);
        self.finish(partial, sample.len(), y)
    }

    /// Turns a combined partial into an evaluation. Together with
    /// [`objective_partials`] this lets a sample split at chunk boundaries be
    /// evaluated piecewise.
    pub fn finish(&self, p: ObjectivePartial, n: usize, y: f64) -> Result<ObjectiveEval> {
        let count_lt = p.count_lt as usize;
        let count_eq = p.count_eq as usize;
        if count_lt + count_eq > n {
            return Err(Error::DimensionMismatch { expected: n, got: count_lt + count_eq });
        }
        let count_gt = n - count_lt - count_eq;
        let (w_pos, w_neg) = self.weights();
        let f = w_neg * p.below + w_pos * p.above;
        if !f.is_finite() {
            return Err(Error::Overflow { y });
        }
        let base = w_neg * count_lt as f64 - w_pos * count_gt as f64;
        let g = SubgradientInterval { lo: base - w_pos * count_eq as f64, hi: base + w_neg * count_eq as f64 };
        Ok(ObjectiveEval { y, f, g, count_lt, count_eq, n, prev: p.prev.found(), next: p.next.found() })
    }

    /// Objective values and one-sided slopes at the ends of the data range,
    /// from the cached min, max and sum. No pass over the data is needed.
    ///
    /// `g_l` is the right slope at the minimum and `g_r` the left slope at
    /// the maximum; for distinct extremes and the absolute-deviation
    /// objective they are `2 − n` and `n − 2`.
    pub fn bracket_init<T: Real>(&self, sample: &Sample<T>) -> BracketInit {
        let n = sample.len();
        let nf = n as f64;
        let (w_pos, w_neg) = self.weights();
        let y_l = sample.min().to_f64();
        let y_r = sample.max().to_f64();
        let c_l = sample.min_count();
        let c_r = sample.max_count();
        BracketInit {
            y_l,
            f_l: w_pos * (sample.sum() - nf * y_l),
            g_l: w_neg * c_l as f64 - w_pos * (n - c_l) as f64,
            y_r,
            f_r: w_neg * (nf * y_r - sample.sum()),
            g_r: w_neg * (n - c_r) as f64 - w_pos * c_r as f64,
        }
    }
}

/// An element value and how many times it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub value: f64,
    pub count: u64,
}

impl Neighbour {
    const NONE_BELOW: Neighbour = Neighbour { value: f64::NEG_INFINITY, count: 0 };
    const NONE_ABOVE: Neighbour = Neighbour { value: f64::INFINITY, count: 0 };

    #[inline]
    fn take_max(&mut self, x: f64) {
        if x > self.value {
            *self = Neighbour { value: x, count: 1 };
        } else if x == self.value {
            self.count += 1;
        }
    }

    #[inline]
    fn take_min(&mut self, x: f64) {
        if x < self.value {
            *self = Neighbour { value: x, count: 1 };
        } else if x == self.value {
            self.count += 1;
        }
    }

    fn max(a: Self, b: Self) -> Self {
        if a.value > b.value {
            a
        } else if b.value > a.value {
            b
        } else {
            Neighbour { value: a.value, count: a.count + b.count }
        }
    }

    fn min(a: Self, b: Self) -> Self {
        if a.value < b.value {
            a
        } else if b.value < a.value {
            b
        } else {
            Neighbour { value: a.value, count: a.count + b.count }
        }
    }

    fn found(self) -> Option<Neighbour> {
        (self.count > 0).then_some(self)
    }
}

/// Per-chunk partial of an objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectivePartial {
    /// `Σ (y − xᵢ)` over `xᵢ < y`.
    pub below: f64,
    /// `Σ (xᵢ − y)` over `xᵢ > y`.
    pub above: f64,
    pub count_lt: u64,
    pub count_eq: u64,
    /// Largest element below `y`.
    pub prev: Neighbour,
    /// Smallest element above `y`.
    pub next: Neighbour,
}

impl Default for ObjectivePartial {
    fn default() -> Self {
        ObjectivePartial {
            below: 0.0,
            above: 0.0,
            count_lt: 0,
            count_eq: 0,
            prev: Neighbour::NONE_BELOW,
            next: Neighbour::NONE_ABOVE,
        }
    }
}

impl ObjectivePartial {
    fn of_chunk<T: Real>(chunk: &[T], y: f64) -> Self {
        // Four independent lanes give a shallower summation than one
        // running total and let the sums vectorize.
        const LANES: usize = 4;
        let mut below = [0.0f64; LANES];
        let mut above = [0.0f64; LANES];
        let mut lt = [0u64; LANES];
        let mut eq = [0u64; LANES];
        let mut prev = [Neighbour::NONE_BELOW; LANES];
        let mut next = [Neighbour::NONE_ABOVE; LANES];
        let mut step = |l: usize, x: f64| {
            let d = x - y;
            above[l] += d.max(0.0);
            below[l] += (-d).max(0.0);
            lt[l] += (d < 0.0) as u64;
            eq[l] += (d == 0.0) as u64;
            if d < 0.0 {
                prev[l].take_max(x);
            } else if d > 0.0 {
                next[l].take_min(x);
            }
        };
        let mut blocks = chunk.chunks_exact(LANES);
        for block in &mut blocks {
            for (l, &v) in block.iter().enumerate() {
                step(l, v.to_f64());
            }
        }
        for (l, &v) in blocks.remainder().iter().enumerate() {
            step(l, v.to_f64());
        }
        ObjectivePartial {
            below: (below[0] + below[1]) + (below[2] + below[3]),
            above: (above[0] + above[1]) + (above[2] + above[3]),
            count_lt: lt.iter().sum(),
            count_eq: eq.iter().sum(),
            prev: Neighbour::max(Neighbour::max(prev[0], prev[1]), Neighbour::max(prev[2], prev[3])),
            next: Neighbour::min(Neighbour::min(next[0], next[1]), Neighbour::min(next[2], next[3])),
        }
    }

    pub fn merge(a: Self, b: Self) -> Self {
        ObjectivePartial {
            below: a.below + b.below,
            above: a.above + b.above,
            count_lt: a.count_lt + b.count_lt,
            count_eq: a.count_eq + b.count_eq,
            prev: Neighbour::max(a.prev, b.prev),
            next: Neighbour::min(a.next, b.next),
        }
    }
}

/// Chunk partials of the objective at `y` for a slice of the data.
pub fn objective_partials<T: Real>(values: &[T], chunk_len: usize, y: f64) -> Vec<ObjectivePartial> {
    reduce::chunk_partials(values, chunk_len, |c| ObjectivePartial::of_chunk(c, y))
}

/// Merges chunk partials with the fixed reduction tree.
pub fn combine_partials(partials: Vec<ObjectivePartial>) -> ObjectivePartial {
    reduce::tree_combine(partials, ObjectivePartial::merge).unwrap_or_default()
}

/// Objective value, subdifferential and the counts they were built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveEval {
    pub y: f64,
    pub f: f64,
    pub g: SubgradientInterval,
    pub count_lt: usize,
    pub count_eq: usize,
    pub n: usize,
    /// Largest element below `y`, if any.
    pub prev: Option<Neighbour>,
    /// Smallest element above `y`, if any.
    pub next: Option<Neighbour>,
}

impl ObjectiveEval {
    pub fn count_le(&self) -> usize {
        self.count_lt + self.count_eq
    }

    pub fn count_gt(&self) -> usize {
        self.n - self.count_le()
    }

    /// `0 ∈ ∂f(y)`.
    pub fn is_optimal(&self) -> bool {
        self.g.contains_zero()
    }

    /// The subgradient `2·count(xᵢ ≤ y) − n` for the absolute-deviation
    /// objective; in general the upper end of the interval.
    pub fn representative(&self) -> f64 {
        self.g.hi
    }
}

/// Evaluates `Σ |xᵢ − y|` and its subdifferential.
pub fn eval_median_objective<T: Real>(sample: &Sample<T>, y: f64) -> Result<ObjectiveEval> {
    Objective::AbsoluteDeviation.eval(sample, y)
}

/// Evaluates the weighted order-statistic objective and its subdifferential.
pub fn eval_os_objective<T: Real>(sample: &Sample<T>, y: f64, weights: OsWeights) -> Result<ObjectiveEval> {
    if !weights.is_valid_for(sample.len()) {
        return Err(Error::InvalidArgument(format!(
            "weights {weights:?} are not valid for n = {}",
            sample.len()
        )));
    }
    Objective::OrderStatistic(weights).eval(sample, y)
}

/// Starting bracket of the cutting-plane method: the data range, objective
/// values at both ends and the slopes pointing into the range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketInit {
    pub y_l: f64,
    pub f_l: f64,
    pub g_l: f64,
    pub y_r: f64,
    pub f_r: f64,
    pub g_r: f64,
}

impl BracketInit {
    pub fn is_degenerate(&self) -> bool {
        self.y_l == self.y_r
    }
}

/// Bracket values for the absolute-deviation objective.
pub fn eval_bracket_init<T: Real>(sample: &Sample<T>) -> BracketInit {
    Objective::AbsoluteDeviation.bracket_init(sample)
}

/// When to select on `log(1 + x − min)` instead of the raw values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TransformMode {
    /// Transform when the range exceeds [`TRANSFORM_RANGE_LIMIT`] or the
    /// objective overflows.
    #[default]
    Auto,
    Always,
    /// Never transform; a range beyond the limit is reported as
    /// [`Error::PrecisionLoss`].
    Never,
}

/// The monotone map `F(t) = log(1 + t − shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub enabled: bool,
    pub shift: f64,
}

impl TransformSpec {
    pub fn disabled() -> Self {
        TransformSpec { enabled: false, shift: 0.0 }
    }

    /// Shift by the sample minimum, so every transformed value is `≥ 0`.
    pub fn for_sample<T: Real>(sample: &Sample<T>) -> Self {
        TransformSpec { enabled: true, shift: sample.min().to_f64() }
    }

    #[inline]
    pub fn forward(&self, t: f64) -> f64 {
        if !self.enabled {
            return t;
        }
        let d = t - self.shift;
        if d.is_finite() {
            d.ln_1p()
        } else {
            // The difference overflowed, so 1 + d rounds to d.
            (0.5 * t - 0.5 * self.shift).ln() + std::f64::consts::LN_2
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        if self.enabled {
            self.shift + y.exp_m1()
        } else {
            y
        }
    }
}

/// Whether the data range is beyond what the objective sums can resolve.
pub fn needs_transform<T: Real>(sample: &Sample<T>) -> bool {
    sample.range() > TRANSFORM_RANGE_LIMIT
}

/// Applies the transform element-wise. Ranks are preserved: `F` is
/// increasing on `[shift, ∞)`.
pub fn apply_transform<T: Real>(sample: &Sample<T>, spec: TransformSpec) -> Result<Sample<f64>> {
    use rayon::prelude::*;

    if spec.enabled && sample.min().to_f64() < spec.shift {
        return Err(Error::InvalidArgument(format!(
            "sample minimum {} is below the transform shift {}",
            sample.min(),
            spec.shift
        )));
    }
    let keys: Vec<f64> = sample.values().par_iter().map(|&v| spec.forward(v.to_f64())).collect();
    Sample::with_chunk_len(keys, sample.chunk_len())
}

/// Maps a transformed value back to the original scale.
pub fn invert_transform(y: f64, spec: TransformSpec) -> f64 {
    spec.inverse(y)
}
