use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use cpselect::datagen::rng::mix64;
use cpselect::{
    generate, hybrid_select, quickselect, select, sort_select, Distribution, DistributionSpec, HybridConfig, Real,
    Sample, SelectionSpec, SolverConfig,
};
use rayon::ThreadPool;

use crate::plan::{BenchPlan, MethodId, Precision};
use crate::BenchError;

/// Result of one method on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub iterations: usize,
    pub reductions: usize,
    /// Sorted fraction of the sample, for methods that copy a pivot interval.
    pub z_fraction: Option<f64>,
}

/// Runs one method. `serial` is a single-worker pool used by
/// [`MethodId::QuickselectSerialDevice`].
pub fn run_method<T: Real>(
    method: MethodId,
    sample: &Sample<T>,
    spec: SelectionSpec,
    plan: &BenchPlan,
    serial: &ThreadPool,
) -> Result<Outcome<T>, BenchError> {
    let rank = spec.resolve_rank(sample.len())?;
    let baseline = |value| Outcome { value, iterations: 0, reductions: 0, z_fraction: None };
    let n = sample.len() as f64;
    Ok(match method {
        MethodId::Sort => baseline(sort_select(sample.values(), rank)?),
        MethodId::Quickselect => baseline(quickselect(&mut sample.values().to_vec(), rank)?),
        MethodId::QuickselectSerialDevice => {
            baseline(serial.install(|| quickselect(&mut sample.values().to_vec(), rank))?)
        }
        MethodId::Hybrid => {
            let cfg = HybridConfig { cp_iterations: plan.cp_iterations, tolerance_f: plan.tolerance, ..Default::default() };
            let r = hybrid_select(sample, spec, &cfg)?;
            Outcome {
                value: r.value,
                iterations: r.iterations,
                reductions: r.reductions,
                z_fraction: Some(r.pivot_len.unwrap_or(0) as f64 / n),
            }
        }
        solver_method => {
            let solver = solver_method.solver().expect("remaining methods are solvers");
            let cfg = SolverConfig::new(solver).with_maxit(plan.maxit).with_tolerance(plan.tolerance);
            let r = select(sample, spec, &cfg)?;
            Outcome {
                value: r.value,
                iterations: r.iterations,
                reductions: r.reductions,
                z_fraction: Some(r.pivot_len.unwrap_or(0) as f64 / n),
            }
        }
    })
}

/// Seed of one generated instance.
pub fn instance_seed(seed: u64, dist: Distribution, n: usize, instance: usize) -> u64 {
    let d = Distribution::ALL.iter().position(|&x| x == dist).unwrap_or(0) as u64;
    mix64(mix64(mix64(seed ^ d.wrapping_mul(0xA24B_AED4_963E_E407)) ^ n as u64) ^ instance as u64)
}

/// A result that disagreed with the sort oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub method: MethodId,
    pub distribution: Distribution,
    pub n: usize,
    pub precision: Precision,
    pub instance: usize,
    pub expected: String,
    pub got: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} on {} n={} {} instance {}: expected {}, got {}",
            self.method, self.distribution, self.n, self.precision, self.instance, self.expected, self.got
        )
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: MethodId,
    pub distribution: Distribution,
    pub n: usize,
    pub precision: Precision,
    /// Per-rep wall times in milliseconds; empty under `verify_only`.
    pub times_ms: Vec<f64>,
    pub iterations_mean: f64,
    pub reductions_mean: f64,
    pub z_fraction_mean: Option<f64>,
}

impl Row {
    pub fn mean_ms(&self) -> Option<f64> {
        (!self.times_ms.is_empty()).then(|| self.times_ms.iter().sum::<f64>() / self.times_ms.len() as f64)
    }

    pub fn min_ms(&self) -> Option<f64> {
        self.times_ms.iter().copied().reduce(f64::min)
    }

    pub fn max_ms(&self) -> Option<f64> {
        self.times_ms.iter().copied().reduce(f64::max)
    }

    pub fn median_ms(&self) -> Option<f64> {
        if self.times_ms.is_empty() {
            return None;
        }
        let mut t = self.times_ms.clone();
        t.sort_by(f64::total_cmp);
        let k = t.len();
        Some(if k % 2 == 1 { t[k / 2] } else { 0.5 * (t[k / 2 - 1] + t[k / 2]) })
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "distribution",
    "n",
    "precision",
    "mean_ms",
    "min_ms",
    "max_ms",
    "median_ms",
    "iterations_mean",
    "reductions_mean",
    "z_fraction_mean",
];

/// Columns that do not depend on timing.
pub const RESULT_COLUMNS: [&str; 7] =
    ["method", "distribution", "n", "precision", "iterations_mean", "reductions_mean", "z_fraction_mean"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
    pub mismatches: Vec<Mismatch>,
}

impl Report {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.method.id().to_string(),
                r.distribution.id().to_string(),
                r.n.to_string(),
                r.precision.id().to_string(),
                opt(r.mean_ms()),
                opt(r.min_ms()),
                opt(r.max_ms()),
                opt(r.median_ms()),
                format!("{:.6}", r.iterations_mean),
                format!("{:.6}", r.reductions_mean),
                opt(r.z_fraction_mean),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated `n mean_ms` series, one file per method,
    /// averaged over distributions. Suitable for log-log plotting.
    pub fn write_plot_files(&self, dir: &Path) -> Result<(), BenchError> {
        fs::create_dir_all(dir)?;
        let mut series: BTreeMap<(MethodId, Precision), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for r in &self.rows {
            if let Some(ms) = r.mean_ms() {
                series.entry((r.method, r.precision)).or_default().entry(r.n).or_default().push(ms);
            }
        }
        for ((method, precision), points) in series {
            let mut text = format!("# {method} {precision}\n# n mean_ms\n");
            for (n, ms) in points {
                text += &format!("{n} {:.6}\n", ms.iter().sum::<f64>() / ms.len() as f64);
            }
            fs::write(dir.join(format!("{}_{}.dat", method.id(), precision.id())), text)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Accum {
    times_ms: Vec<f64>,
    iterations: usize,
    reductions: usize,
    z_sum: f64,
    z_seen: bool,
    instances: usize,
}

/// Generates every instance, checks every method against the sort oracle
/// and, for methods that agreed, times `plan.reps` repetitions after one
/// discarded warm-up. Generation and verification are not timed.
pub fn run_plan(plan: &BenchPlan) -> Result<Report, BenchError> {
    let plan = plan.clone().normalized()?;
    match plan.precision {
        Precision::F32 => run_typed::<f32>(&plan),
        Precision::F64 => run_typed::<f64>(&plan),
    }
}

fn run_typed<T: Real>(plan: &BenchPlan) -> Result<Report, BenchError> {
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| BenchError::Plan(format!("cannot build serial pool: {e}")))?;
    let spec = SelectionSpec::Median;
    let mut report = Report::default();
    for &dist in &plan.distributions {
        for &n in &plan.sizes {
            let mut acc: BTreeMap<MethodId, Accum> = plan.methods.iter().map(|&m| (m, Accum::default())).collect();
            let mut failed: Vec<MethodId> = Vec::new();
            for instance in 0..plan.instances {
                let sample: Sample<T> =
                    generate(&DistributionSpec::new(dist, n, instance_seed(plan.seed, dist, n, instance)))?;
                let rank = spec.resolve_rank(n)?;
                let expected = sort_select(sample.values(), rank)?;

                // Verification pass.
                let mut verified = Vec::new();
                for &m in &plan.methods {
                    if failed.contains(&m) {
                        continue;
                    }
                    let out = run_method(m, &sample, spec, plan, &serial)?;
                    if out.value.total_cmp(&expected).is_ne() {
                        failed.push(m);
                        report.mismatches.push(Mismatch {
                            method: m,
                            distribution: dist,
                            n,
                            precision: plan.precision,
                            instance,
                            expected: expected.to_string(),
                            got: out.value.to_string(),
                        });
                        continue;
                    }
                    let a = acc.get_mut(&m).expect("every method has an accumulator");
                    a.iterations += out.iterations;
                    a.reductions += out.reductions;
                    if let Some(z) = out.z_fraction {
                        a.z_sum += z;
                        a.z_seen = true;
                    }
                    a.instances += 1;
                    verified.push(m);
                }

                // Timing pass, only for methods verified on this instance.
                if plan.verify_only {
                    continue;
                }
                for m in verified {
                    let times = &mut acc.get_mut(&m).expect("accumulator").times_ms;
                    run_method(m, &sample, spec, plan, &serial)?;
                    for _ in 0..plan.reps {
                        let start = Instant::now();
                        let out = run_method(m, &sample, spec, plan, &serial)?;
                        times.push(start.elapsed().as_secs_f64() * 1e3);
                        std::hint::black_box(out);
                    }
                }
            }
            for (m, a) in acc {
                if failed.contains(&m) || a.instances == 0 {
                    continue;
                }
                let k = a.instances as f64;
                report.rows.push(Row {
                    method: m,
                    distribution: dist,
                    n,
                    precision: plan.precision,
                    times_ms: a.times_ms,
                    iterations_mean: a.iterations as f64 / k,
                    reductions_mean: a.reductions as f64 / k,
                    z_fraction_mean: a.z_seen.then(|| a.z_sum / k),
                });
            }
        }
    }
    Ok(report)
}
