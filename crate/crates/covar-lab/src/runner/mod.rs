//! Pipeline orchestration: configuration, the rolling-window estimation
//! pipeline (margins, dependence, VaR/CoVaR forecasts), backtest reports,
//! and GSIB score tables.
//!
//! Work is partitioned into independent window tasks and merged in
//! deterministic (date, ticker, model, alpha, beta) order, so serial and
//! parallel runs emit byte-identical files.

mod config;
mod pipeline;
mod reports;

pub use config::{ModelKind, RunConfig};
pub use pipeline::{run_pipeline, PipelineOutput};
pub use reports::{backtest_report, emit_report, gsib_report, RunnerError};
