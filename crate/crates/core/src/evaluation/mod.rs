//! Source-recovery metrics, method ranking and report files.

pub mod assignment;
mod metrics;
mod ranking;
mod report;

pub use metrics::{eval_latents, max_corr, unmatched_max_corr, LatentMetrics};
pub use ranking::{average_ranks, rank_methods, Direction};
pub use report::{
    summarize, training_curves_csv, EvalReport, GroupSummary, MethodSummary, ReportRow, Summary,
    BASELINE_METHOD, REPORT_HEADER,
};
