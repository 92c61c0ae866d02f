use std::fmt;
use std::str::FromStr;

use cpselect::{Distribution, Method, Solver};

use crate::BenchError;

/// Methods the harness can run. The ids are part of the CLI and CSV format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    Sort,
    Quickselect,
    /// Quickselect confined to a single worker.
    QuickselectSerialDevice,
    Bisection,
    BrentMin,
    BrentRoot,
    Cp,
    Hybrid,
}

impl MethodId {
    pub const ALL: [MethodId; 8] = [
        MethodId::Sort,
        MethodId::Quickselect,
        MethodId::QuickselectSerialDevice,
        MethodId::Bisection,
        MethodId::BrentMin,
        MethodId::BrentRoot,
        MethodId::Cp,
        MethodId::Hybrid,
    ];

    pub fn id(self) -> &'static str {
        match self {
            MethodId::QuickselectSerialDevice => "quickselect-serial-device",
            other => other.method().id(),
        }
    }

    pub fn method(self) -> Method {
        match self {
            MethodId::Sort => Method::Sort,
            MethodId::Quickselect | MethodId::QuickselectSerialDevice => Method::Quickselect,
            MethodId::Bisection => Method::Bisection,
            MethodId::BrentMin => Method::BrentMin,
            MethodId::BrentRoot => Method::BrentRoot,
            MethodId::Cp => Method::CuttingPlane,
            MethodId::Hybrid => Method::Hybrid,
        }
    }

    /// The iterative solver behind this method, if any.
    pub fn solver(self) -> Option<Solver> {
        match self {
            MethodId::Bisection => Some(Solver::Bisection),
            MethodId::BrentMin => Some(Solver::BrentMin),
            MethodId::BrentRoot => Some(Solver::BrentRoot),
            MethodId::Cp => Some(Solver::CuttingPlane),
            _ => None,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for MethodId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| BenchError::Plan(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    pub fn id(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Precision {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "f32" | "single" => Ok(Precision::F32),
            "f64" | "double" => Ok(Precision::F64),
            _ => Err(BenchError::Plan(format!("unknown precision `{s}`"))),
        }
    }
}

/// Parses a size such as `1000`, `1e5` or `2^20`.
pub fn parse_size(s: &str) -> Result<usize, BenchError> {
    let bad = || BenchError::Plan(format!("bad size `{s}`"));
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: usize = base.parse().map_err(|_| bad())?;
        let exp: u32 = exp.parse().map_err(|_| bad())?;
        return base.checked_pow(exp).ok_or_else(bad);
    }
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let mant: usize = mant.parse().map_err(|_| bad())?;
        let exp: u32 = exp.parse().map_err(|_| bad())?;
        return 10usize.checked_pow(exp).and_then(|p| p.checked_mul(mant)).ok_or_else(bad);
    }
    s.parse().map_err(|_| bad())
}

/// Parses a comma-separated list with `parse`; `all` expands to `every`.
pub fn parse_list<T: Clone>(
    s: &str,
    every: &[T],
    parse: impl Fn(&str) -> Result<T, BenchError>,
) -> Result<Vec<T>, BenchError> {
    if s.trim() == "all" {
        return Ok(every.to_vec());
    }
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse(p.trim())).collect()
}

/// One benchmark run: every method on every (distribution, size) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub methods: Vec<MethodId>,
    pub distributions: Vec<Distribution>,
    /// Ascending, without duplicates.
    pub sizes: Vec<usize>,
    /// Timed repetitions per instance, after one discarded warm-up.
    pub reps: usize,
    /// Generated datasets per (distribution, size).
    pub instances: usize,
    pub precision: Precision,
    pub seed: u64,
    pub tolerance: f64,
    pub maxit: usize,
    pub cp_iterations: usize,
    /// Check every method against the oracle and skip timing.
    pub verify_only: bool,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            methods: MethodId::ALL.to_vec(),
            distributions: Distribution::ALL.to_vec(),
            sizes: vec![1 << 16],
            reps: 10,
            instances: 10,
            precision: Precision::F64,
            seed: 1,
            tolerance: 1e-12,
            maxit: 30,
            cp_iterations: 7,
            verify_only: false,
        }
    }
}

impl BenchPlan {
    /// Sorts the sizes and checks the remaining fields.
    pub fn normalized(mut self) -> Result<Self, BenchError> {
        self.sizes.sort_unstable();
        self.sizes.dedup();
        if self.methods.is_empty() || self.distributions.is_empty() || self.sizes.is_empty() {
            return Err(BenchError::Plan("methods, distributions and sizes must be non-empty".into()));
        }
        if self.sizes[0] == 0 {
            return Err(BenchError::Plan("sizes must be positive".into()));
        }
        if self.reps == 0 || self.instances == 0 {
            return Err(BenchError::Plan("reps and instances must be at least 1".into()));
        }
        if self.maxit == 0 {
            return Err(BenchError::Plan("maxit must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(BenchError::Plan("tolerance must be non-negative".into()));
        }
        Ok(self)
    }
}
