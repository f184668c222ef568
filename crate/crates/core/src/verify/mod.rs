//! Config-driven numerical verification: each check evaluates one family of
//! inequalities on sampled inputs and emits one record per instance.

mod checks;
mod config;
mod record;
mod report;
mod sample;

pub use checks::{run_all, run_check, Context};
pub use config::{Format, FunctionSpec, OutputSpec, Prepared, RunConfig, VerifySpec};
pub use record::{format_number, CheckId, Constant, Inequality, Record, Status};
pub use report::{
    read_rows, summarise_records, summarise_rows, write_csv, write_reports, CheckSummary, Row, CSV_NAME, JSON_NAME,
};
pub use sample::{exterior_points, family, ExteriorSample};
