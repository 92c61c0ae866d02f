use std::io::Write;
use std::time::Instant;

use cpselect::{generate, sort_select, Distribution, DistributionSpec, Real, Sample, SelectionSpec};

use crate::plan::{BenchPlan, MethodId, Precision};
use crate::run::run_method;
use crate::BenchError;

/// A single sample of `n` values from `base` in which one value is replaced
/// by an outlier of each listed magnitude in turn.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub methods: Vec<MethodId>,
    pub base: Distribution,
    pub n: usize,
    pub magnitudes: Vec<f64>,
    pub precision: Precision,
    pub seed: u64,
    pub reps: usize,
    pub tolerance: f64,
    pub maxit: usize,
    pub cp_iterations: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            methods: vec![MethodId::Bisection, MethodId::BrentMin, MethodId::BrentRoot, MethodId::Cp, MethodId::Hybrid],
            base: Distribution::Normal01,
            n: 1 << 16,
            magnitudes: vec![1e3, 1e6, 1e9, 1e12, 1e15],
            precision: Precision::F64,
            seed: 1,
            reps: 3,
            tolerance: 1e-12,
            maxit: 500,
            cp_iterations: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: MethodId,
    pub magnitude: f64,
    pub iterations: usize,
    pub reductions: usize,
    /// Mean wall time over the timed repetitions.
    pub ms: f64,
    pub correct: bool,
}

pub const SWEEP_HEADER: [&str; 6] = ["method", "magnitude", "iterations", "reductions", "ms", "correct"];

pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<SweepRow>, BenchError> {
    if plan.methods.is_empty() || plan.magnitudes.is_empty() || plan.n < 2 || plan.reps == 0 {
        return Err(BenchError::Plan("sweep needs methods, magnitudes, n >= 2 and reps >= 1".into()));
    }
    if plan.magnitudes.iter().any(|m| !m.is_finite()) {
        return Err(BenchError::Plan("magnitudes must be finite".into()));
    }
    match plan.precision {
        Precision::F32 => sweep_typed::<f32>(plan),
        Precision::F64 => sweep_typed::<f64>(plan),
    }
}

fn sweep_typed<T: Real>(plan: &SweepPlan) -> Result<Vec<SweepRow>, BenchError> {
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| BenchError::Plan(format!("cannot build serial pool: {e}")))?;
    let bench = BenchPlan {
        tolerance: plan.tolerance,
        maxit: plan.maxit,
        cp_iterations: plan.cp_iterations,
        ..Default::default()
    };
    let spec = SelectionSpec::Median;
    let mut rows = Vec::new();
    for &magnitude in &plan.magnitudes {
        let sample: Sample<T> =
            generate(&DistributionSpec::new(plan.base, plan.n, plan.seed).with_outliers(1, magnitude))?;
        let expected = sort_select(sample.values(), spec.resolve_rank(plan.n)?)?;
        for &method in &plan.methods {
            let out = run_method(method, &sample, spec, &bench, &serial)?;
            let mut total = 0.0;
            for _ in 0..plan.reps {
                let start = Instant::now();
                std::hint::black_box(run_method(method, &sample, spec, &bench, &serial)?);
                total += start.elapsed().as_secs_f64() * 1e3;
            }
            rows.push(SweepRow {
                method,
                magnitude,
                iterations: out.iterations,
                reductions: out.reductions,
                ms: total / plan.reps as f64,
                correct: out.value.total_cmp(&expected).is_eq(),
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.id().to_string(),
            format!("{:e}", r.magnitude),
            r.iterations.to_string(),
            r.reductions.to_string(),
            format!("{:.6}", r.ms),
            r.correct.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
