//! Benchmark harness behind the `cpsel` binary.
//!
//! [`run_plan`] checks every method against a full sort before it records
//! any timing, and [`run_sweep`] measures iteration counts as a single
//! outlier grows.

mod plan;
mod run;
mod sweep;

pub use plan::{parse_list, parse_size, BenchPlan, MethodId, Precision};
pub use run::{instance_seed, run_method, run_plan, Mismatch, Outcome, Report, Row, CSV_HEADER, RESULT_COLUMNS};
pub use sweep::{run_sweep, write_sweep_csv, SweepPlan, SweepRow, SWEEP_HEADER};

/// Process exit codes of `cpsel`.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const MISMATCH: i32 = 2;
    pub const INVALID_PLAN: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("{} result(s) disagreed with the sort oracle", .0.len())]
    Mismatch(Vec<Mismatch>),

    #[error(transparent)]
    Core(#[from] cpselect::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Plan(_) => exit::INVALID_PLAN,
            BenchError::Mismatch(_) => exit::MISMATCH,
            BenchError::Core(cpselect::Error::InvalidArgument(_) | cpselect::Error::RankOutOfRange { .. }) => {
                exit::INVALID_PLAN
            }
            _ => exit::RUNTIME,
        }
    }
}
