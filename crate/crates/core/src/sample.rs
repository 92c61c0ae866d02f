//! Shared domain types: the sample being selected from, rank specifications,
//! subgradient intervals and selection results.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::reduce::{self, DEFAULT_CHUNK_LEN};

/// An immutable, non-empty array of finite values with its extremes and sum
/// cached from a single fused reduction pass.
///
/// The values are reference counted, so clones are cheap and every selection
/// run sees the same data.
#[derive(Clone)]
pub struct Sample<T> {
    values: Arc<[T]>,
    min: T,
    max: T,
    min_count: usize,
    max_count: usize,
    sum: f64,
    chunk_len: usize,
}

#[derive(Clone, Copy)]
struct Extremes<T> {
    min: T,
    min_count: usize,
    max: T,
    max_count: usize,
    sum: f64,
    bad: Option<usize>,
}

impl<T: Real> Extremes<T> {
    fn of_chunk(chunk: &[T], offset: usize) -> Self {
        let mut e = Extremes { min: chunk[0], min_count: 0, max: chunk[0], max_count: 0, sum: 0.0, bad: None };
        for (i, &v) in chunk.iter().enumerate() {
            if !v.is_finite() {
                e.bad.get_or_insert(offset + i);
                continue;
            }
            if v < e.min || !e.min.is_finite() {
                e.min = v;
                e.min_count = 1;
            } else if v == e.min {
                e.min_count += 1;
            }
            if v > e.max || !e.max.is_finite() {
                e.max = v;
                e.max_count = 1;
            } else if v == e.max {
                e.max_count += 1;
            }
            e.sum += v.to_f64();
        }
        e
    }

    fn merge(a: Self, b: Self) -> Self {
        let (min, min_count) = if a.min < b.min {
            (a.min, a.min_count)
        } else if b.min < a.min {
            (b.min, b.min_count)
        } else {
            (a.min, a.min_count + b.min_count)
        };
        let (max, max_count) = if a.max > b.max {
            (a.max, a.max_count)
        } else if b.max > a.max {
            (b.max, b.max_count)
        } else {
            (a.max, a.max_count + b.max_count)
        };
        Extremes { min, min_count, max, max_count, sum: a.sum + b.sum, bad: a.bad.or(b.bad) }
    }
}

impl<T: Real> Sample<T> {
    /// Validates `values` (non-empty, all finite) and caches min, max, their
    /// multiplicities and the sum.
    pub fn new(values: impl Into<Arc<[T]>>) -> Result<Self> {
        Self::with_chunk_len(values, DEFAULT_CHUNK_LEN)
    }

    /// Like [`Sample::new`] with an explicit reduction chunk length.
    pub fn with_chunk_len(values: impl Into<Arc<[T]>>, chunk_len: usize) -> Result<Self> {
        if chunk_len == 0 {
            return Err(Error::InvalidArgument("chunk length must be positive".into()));
        }
        let values: Arc<[T]> = values.into();
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let partials: Vec<Extremes<T>> = values
            .par_chunks(chunk_len)
            .enumerate()
            .map(|(i, c)| Extremes::of_chunk(c, i * chunk_len))
            .collect();
        let e = reduce::tree_combine(partials, Extremes::merge).expect("non-empty");
        if let Some(index) = e.bad {
            return Err(Error::NonFinite { index });
        }
        Ok(Sample {
            values,
            min: e.min,
            max: e.max,
            min_count: e.min_count,
            max_count: e.max_count,
            sum: e.sum,
            chunk_len,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a sample holds at least one element.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest element.
    pub fn min(&self) -> T {
        self.min
    }

    /// Largest element.
    pub fn max(&self) -> T {
        self.max
    }

    /// Number of elements equal to [`Sample::min`].
    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Number of elements equal to [`Sample::max`].
    pub fn max_count(&self) -> usize {
        self.max_count
    }

    /// Chunked-tree sum of the values, accumulated in `f64`.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// `max - min`, in `f64`.
    pub fn range(&self) -> f64 {
        self.max.to_f64() - self.min.to_f64()
    }

    pub fn chunk_len(&self) -> usize {
        self.chunk_len
    }

    /// One deterministic reduction over the values.
    pub(crate) fn reduce<P, K, C>(&self, kernel: K, combine: C) -> P
    where
        P: Send,
        K: Fn(&[T]) -> P + Sync + Send,
        C: Fn(P, P) -> P,
    {
        reduce::chunked_reduce(&self.values, self.chunk_len, kernel, combine).expect("sample is non-empty")
    }
}

impl<T: Real> fmt::Debug for Sample<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sample")
            .field("n", &self.len())
            .field("min", &self.min)
            .field("max", &self.max)
            .field("sum", &self.sum)
            .finish()
    }
}

/// Which order statistic to select. Ranks are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionSpec {
    /// The lower median, rank `(n + 1) / 2` (integer division).
    Median,
    /// The `k`-th smallest element; `KthSmallest(1)` is the minimum.
    KthSmallest(usize),
    /// The `k`-th largest element; `KthLargest(1)` is the maximum.
    KthLargest(usize),
}

impl SelectionSpec {
    /// Resolves the spec to a 1-based rank counted from the smallest element.
    pub fn resolve_rank(self, n: usize) -> Result<usize> {
        match self {
            _ if n == 0 => Err(Error::EmptySample),
            SelectionSpec::Median => Ok(n.div_ceil(2)),
            SelectionSpec::KthSmallest(k) if (1..=n).contains(&k) => Ok(k),
            SelectionSpec::KthLargest(k) if (1..=n).contains(&k) => Ok(n - k + 1),
            SelectionSpec::KthSmallest(rank) | SelectionSpec::KthLargest(rank) => {
                Err(Error::RankOutOfRange { rank, n })
            }
        }
    }
}

/// Closed interval `[lo, hi]` holding the subdifferential of a univariate
/// piecewise-linear convex function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SubgradientInterval {
    pub fn point(v: f64) -> Self {
        SubgradientInterval { lo: v, hi: v }
    }

    /// `0 ∈ [lo, hi]`: the point is a minimizer.
    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Selection method that produced a [`SelectionResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Sort,
    Quickselect,
    Bisection,
    BrentMin,
    BrentRoot,
    CuttingPlane,
    Hybrid,
}

impl Method {
    pub fn id(self) -> &'static str {
        match self {
            Method::Sort => "sort",
            Method::Quickselect => "quickselect",
            Method::Bisection => "bisection",
            Method::BrentMin => "brent-min",
            Method::BrentRoot => "brent-root",
            Method::CuttingPlane => "cp",
            Method::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Outcome of a selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult<T> {
    /// The selected element, bit-for-bit one of the input values.
    pub value: T,
    /// 1-based rank from the smallest element.
    pub rank: usize,
    /// Solver iterations (zero for the baselines).
    pub iterations: usize,
    /// Full objective passes issued by the solver, including the fused
    /// min/max/sum pass.
    pub reductions: usize,
    pub method: Method,
    /// Length of the array that was sorted to finish the selection, when a
    /// pivot interval was copied out.
    pub pivot_len: Option<usize>,
    /// Whether selection ran on log-transformed values.
    pub transformed: bool,
}
