//! Seeded synthetic datasets.
//!
//! Element `i` draws from counters `8i .. 8i + 8` of the dataset's stream, so
//! generation is chunk-parallel and the output does not depend on the number
//! of workers. Mixtures are laid out as exact position blocks and then
//! shuffled with a Fisher–Yates pass on a separate substream.

pub mod io;
pub mod rng;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sample::Sample;
pub use rng::CounterRng;

const SLOTS: u64 = 8;
const SHUFFLE_TAG: u64 = 1;
const INJECT_TAG: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform01,
    Normal01,
    HalfNormal,
    Beta25,
    /// 2/3 N(0,1), 1/3 N(100,1).
    Mix1,
    /// 1/2 N(0,1) shifted by +1, 1/2 N(100,1).
    Mix2,
    /// 9/10 half-normal, 1/10 the constant 10.
    Mix3,
    /// 2/3 half-normal, 1/3 N(100,1).
    Mix4,
    /// 1/2 half-normal shifted by +1, 1/2 N(100,1).
    Mix5,
}

impl Distribution {
    pub const ALL: [Distribution; 9] = [
        Distribution::Uniform01,
        Distribution::Normal01,
        Distribution::HalfNormal,
        Distribution::Beta25,
        Distribution::Mix1,
        Distribution::Mix2,
        Distribution::Mix3,
        Distribution::Mix4,
        Distribution::Mix5,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Distribution::Uniform01 => "uniform",
            Distribution::Normal01 => "normal",
            Distribution::HalfNormal => "half-normal",
            Distribution::Beta25 => "beta",
            Distribution::Mix1 => "mix1",
            Distribution::Mix2 => "mix2",
            Distribution::Mix3 => "mix3",
            Distribution::Mix4 => "mix4",
            Distribution::Mix5 => "mix5",
        }
    }

    /// Share of the first mixture component as `(numerator, denominator)`;
    /// `None` for the plain distributions.
    fn first_share(self) -> Option<(usize, usize)> {
        match self {
            Distribution::Mix1 | Distribution::Mix4 => Some((2, 3)),
            Distribution::Mix2 | Distribution::Mix5 => Some((1, 2)),
            Distribution::Mix3 => Some((9, 10)),
            _ => None,
        }
    }

    /// Value of element `i` when it belongs to the first (`first == true`)
    /// or second mixture component.
    fn draw(self, rng: CounterRng, i: u64, first: bool) -> f64 {
        let c = i * SLOTS;
        let normal = || rng.normal(c);
        let half = || rng.normal(c).abs();
        match (self, first) {
            (Distribution::Uniform01, _) => rng.uniform(c),
            (Distribution::Normal01, _) => normal(),
            (Distribution::HalfNormal, _) => half(),
            (Distribution::Beta25, _) => {
                let a = rng.gamma_int(c, 2);
                let b = rng.gamma_int(c + 2, 5);
                a / (a + b)
            }
            (Distribution::Mix1, true) => normal(),
            (Distribution::Mix2, true) => normal() + 1.0,
            (Distribution::Mix3, true) | (Distribution::Mix4, true) => half(),
            (Distribution::Mix5, true) => half() + 1.0,
            (Distribution::Mix3, false) => 10.0,
            (_, false) => 100.0 + normal(),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown distribution `{s}`")))
    }
}

/// `count` injected values of magnitude `magnitude`, alternating in sign
/// starting with `+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outliers {
    pub count: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub kind: Distribution,
    pub n: usize,
    pub seed: u64,
    pub outliers: Vec<Outliers>,
}

impl DistributionSpec {
    pub fn new(kind: Distribution, n: usize, seed: u64) -> Self {
        DistributionSpec { kind, n, seed, outliers: Vec::new() }
    }

    pub fn with_outliers(mut self, count: usize, magnitude: f64) -> Self {
        self.outliers.push(Outliers { count, magnitude });
        self
    }
}

/// Number of elements drawn from the first mixture component, rounded to
/// the nearest integer.
pub fn first_component_len(kind: Distribution, n: usize) -> usize {
    match kind.first_share() {
        Some((num, den)) => (n * num + den / 2) / den,
        None => n,
    }
}

/// Generates the dataset described by `spec`. Output is a pure function of
/// `spec`, bit for bit.
pub fn generate<T: Real>(spec: &DistributionSpec) -> Result<Sample<T>> {
    if spec.n == 0 {
        return Err(Error::EmptySample);
    }
    let injected: usize = spec.outliers.iter().map(|o| o.count).sum();
    if injected > spec.n {
        return Err(Error::InvalidArgument(format!("{injected} outliers do not fit in {} elements", spec.n)));
    }
    if let Some(o) = spec.outliers.iter().find(|o| !T::from_f64(o.magnitude).is_finite()) {
        return Err(Error::InvalidArgument(format!("outlier magnitude {} is not finite in {}", o.magnitude, T::NAME)));
    }

    let rng = CounterRng::new(spec.seed);
    let kind = spec.kind;
    let split = first_component_len(kind, spec.n);
    let mut values: Vec<T> = (0..spec.n)
        .into_par_iter()
        .map(|i| T::from_f64(kind.draw(rng, i as u64, i < split)))
        .collect();

    let mut pos = spec.n - injected;
    for o in &spec.outliers {
        for k in 0..o.count {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            values[pos] = T::from_f64(sign * o.magnitude);
            pos += 1;
        }
    }
    if kind.first_share().is_some() || injected > 0 {
        shuffle(&mut values, rng.substream(SHUFFLE_TAG));
    }
    Sample::new(values)
}

/// Seeded Fisher–Yates shuffle.
pub fn shuffle<T>(values: &mut [T], rng: CounterRng) {
    let mut counter = 0u64;
    for i in (1..values.len()).rev() {
        let j = rng.below(&mut counter, i as u64 + 1) as usize;
        values.swap(i, j);
    }
}

/// Inserts each magnitude at a seeded position, growing the sample by
/// `magnitudes.len()`. An empty list returns a clone of `sample`.
pub fn inject_extremes<T: Real>(sample: &Sample<T>, magnitudes: &[f64], seed: u64) -> Result<Sample<T>> {
    if magnitudes.is_empty() {
        return Ok(sample.clone());
    }
    let rng = CounterRng::new(seed).substream(INJECT_TAG);
    let mut counter = 0u64;
    let mut values = sample.values().to_vec();
    values.reserve(magnitudes.len());
    for &m in magnitudes {
        let at = rng.below(&mut counter, values.len() as u64 + 1) as usize;
        values.insert(at, T::from_f64(m));
    }
    Sample::with_chunk_len(values, sample.chunk_len())
}
