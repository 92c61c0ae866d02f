use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpselect::datagen::io::{load, save, Dataset};
use cpselect::robust::{fit_elemental, least_squares, load_regression_csv, objective, Estimator, TrimRule};
use cpselect::{generate, Distribution, DistributionSpec, Real, Sample, SelectionSpec};
use cpselect_bench::{
    exit, parse_list, parse_size, run_method, run_plan, run_sweep, write_sweep_csv, BenchError, BenchPlan, MethodId,
    Precision, SweepPlan,
};

#[derive(Parser)]
#[command(name = "cpsel", version, about = "Order-statistic selection benchmarks and tools")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "CPSEL_WORKERS")]
    workers: Option<usize>,

    /// Without a subcommand, `cpsel` behaves like `cpsel run`.
    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify and time selection methods over a grid of datasets.
    Run(RunArgs),
    /// Iteration counts as a single outlier grows.
    Sweep(SweepArgs),
    /// Write a generated dataset to a binary file.
    Gen(GenArgs),
    /// Select an order statistic from a dataset file.
    Select(SelectArgs),
    /// Fit a robust linear regression to a CSV file.
    Fit(FitArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long = "tol", default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 30)]
    maxit: usize,
    /// Cutting-plane iterations inside the hybrid method.
    #[arg(long = "cp-iters", default_value_t = 7)]
    cp_iterations: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated method ids, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    /// Comma-separated distribution ids, or `all`.
    #[arg(long, default_value = "all")]
    dists: String,
    /// Comma-separated sizes such as `1000,1e5,2^20`.
    #[arg(long, default_value = "2^16")]
    sizes: String,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value = "f64")]
    precision: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-method `n mean_ms` series.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Check results against the oracle without timing.
    #[arg(long)]
    verify_only: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "bisection,brent-min,brent-root,cp,hybrid")]
    methods: String,
    #[arg(long, default_value = "normal")]
    dist: String,
    #[arg(long, default_value = "2^16")]
    n: String,
    /// Comma-separated outlier magnitudes.
    #[arg(long, default_value = "1e3,1e6,1e9,1e12,1e15")]
    magnitudes: String,
    #[arg(long, default_value = "f64")]
    precision: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long = "tol", default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 500)]
    maxit: usize,
    #[arg(long = "cp-iters", default_value_t = 7)]
    cp_iterations: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dist: String,
    #[arg(long)]
    n: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "f64")]
    precision: String,
    /// `COUNT:MAGNITUDE`; may be repeated.
    #[arg(long)]
    outliers: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    input: PathBuf,
    #[arg(long, default_value = "hybrid")]
    method: String,
    /// 1-based rank from the smallest; the lower median if neither rank flag is given.
    #[arg(long, conflicts_with = "largest")]
    rank: Option<usize>,
    /// 1-based rank from the largest.
    #[arg(long)]
    largest: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header; the `y` column is the response.
    input: PathBuf,
    /// `lms`, `lts` or `ols`.
    #[arg(long, default_value = "lts")]
    estimator: String,
    #[arg(long, default_value_t = 500)]
    subsets: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Do not add an intercept column.
    #[arg(long)]
    no_intercept: bool,
    /// Trimming count; `(n + p) / 2` when absent.
    #[arg(long)]
    trim: Option<usize>,
}

fn plan_err(e: impl std::fmt::Display) -> BenchError {
    BenchError::Plan(e.to_string())
}

fn parse_precision(s: &str) -> Result<Precision, BenchError> {
    s.parse()
}

fn parse_dist(s: &str) -> Result<Distribution, BenchError> {
    s.parse().map_err(plan_err)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, BenchError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_run(a: RunArgs) -> Result<(), BenchError> {
    let plan = BenchPlan {
        methods: parse_list(&a.methods, &MethodId::ALL, str::parse)?,
        distributions: parse_list(&a.dists, &Distribution::ALL, parse_dist)?,
        sizes: parse_list(&a.sizes, &[], parse_size)?,
        reps: a.reps,
        instances: a.instances,
        precision: parse_precision(&a.precision)?,
        seed: a.seed,
        tolerance: a.solver.tolerance,
        maxit: a.solver.maxit,
        cp_iterations: a.solver.cp_iterations,
        verify_only: a.verify_only,
    };
    let report = run_plan(&plan)?;
    report.write_csv(output(&a.out)?)?;
    if let Some(dir) = &a.plot_dir {
        report.write_plot_files(dir)?;
    }
    if report.mismatches.is_empty() {
        Ok(())
    } else {
        Err(BenchError::Mismatch(report.mismatches))
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), BenchError> {
    let plan = SweepPlan {
        methods: parse_list(&a.methods, &MethodId::ALL, str::parse)?,
        base: parse_dist(&a.dist)?,
        n: parse_size(&a.n)?,
        magnitudes: parse_list(&a.magnitudes, &[], |s| s.parse::<f64>().map_err(plan_err))?,
        precision: parse_precision(&a.precision)?,
        seed: a.seed,
        reps: a.reps,
        tolerance: a.tolerance,
        maxit: a.maxit,
        cp_iterations: a.cp_iterations,
    };
    let rows = run_sweep(&plan)?;
    write_sweep_csv(&rows, output(&a.out)?)?;
    let wrong = rows.iter().filter(|r| !r.correct).count();
    if wrong > 0 {
        eprintln!("{wrong} sweep result(s) disagreed with the sort oracle");
        return Err(BenchError::Mismatch(Vec::new()));
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), BenchError> {
    let mut spec = DistributionSpec::new(parse_dist(&a.dist)?, parse_size(&a.n)?, a.seed);
    for o in &a.outliers {
        let (count, magnitude) =
            o.split_once(':').ok_or_else(|| BenchError::Plan(format!("outliers `{o}` is not COUNT:MAGNITUDE")))?;
        spec = spec.with_outliers(count.parse().map_err(plan_err)?, magnitude.parse().map_err(plan_err)?);
    }
    match parse_precision(&a.precision)? {
        Precision::F32 => save(&generate::<f32>(&spec).map_err(plan_err)?, &a.out)?,
        Precision::F64 => save(&generate::<f64>(&spec).map_err(plan_err)?, &a.out)?,
    }
    Ok(())
}

fn select_typed<T: Real>(sample: &Sample<T>, a: &SelectArgs) -> Result<T, BenchError> {
    let spec = match (a.rank, a.largest) {
        (Some(k), _) => SelectionSpec::KthSmallest(k),
        (None, Some(k)) => SelectionSpec::KthLargest(k),
        (None, None) => SelectionSpec::Median,
    };
    let method: MethodId = a.method.parse()?;
    let plan = BenchPlan {
        tolerance: a.solver.tolerance,
        maxit: a.solver.maxit,
        cp_iterations: a.solver.cp_iterations,
        ..Default::default()
    };
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(plan_err)?;
    Ok(run_method(method, sample, spec, &plan, &serial)?.value)
}

fn cmd_select(a: SelectArgs) -> Result<(), BenchError> {
    match load(&a.input)? {
        Dataset::F32(s) => println!("{}", select_typed(&s, &a)?),
        Dataset::F64(s) => println!("{}", select_typed(&s, &a)?),
    }
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<(), BenchError> {
    let mut problem = load_regression_csv(&a.input, !a.no_intercept)?;
    if let Some(h) = a.trim {
        problem = problem.with_trim(TrimRule::Explicit(h)).map_err(plan_err)?;
    }
    let (theta, value) = match a.estimator.as_str() {
        "ols" => {
            let theta = least_squares(&problem)?;
            let value = objective(Estimator::Lts, &problem, &theta)?;
            (theta, value)
        }
        "lms" | "lts" => {
            let estimator = if a.estimator == "lms" { Estimator::Lms } else { Estimator::Lts };
            let fit = fit_elemental(&problem, a.subsets, a.seed, estimator)?;
            (fit.theta, fit.objective)
        }
        other => return Err(BenchError::Plan(format!("unknown estimator `{other}`"))),
    };
    let theta: Vec<String> = theta.iter().map(f64::to_string).collect();
    println!("theta {}", theta.join(" "));
    println!("objective {value}");
    Ok(())
}

fn dispatch(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Select(a) => cmd_select(a),
        Command::Fit(a) => cmd_fit(a),
    }
}

fn execute(cli: Cli) -> Result<(), BenchError> {
    let command = cli.command.unwrap_or(Command::Run(cli.run));
    match cli.workers {
        Some(0) => Err(BenchError::Plan("workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(plan_err)?
            .install(|| dispatch(command)),
        None => dispatch(command),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::INVALID_PLAN } else { exit::SUCCESS };
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            if let BenchError::Mismatch(list) = &e {
                for m in list {
                    eprintln!("mismatch: {m}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
