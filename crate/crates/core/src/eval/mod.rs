//! Stratified cross-validation, per-category metrics and report tables.

mod cv;
mod folds;
mod metrics;
mod report;

pub use cv::{
    cross_validate, evaluate_cuewords, run_cv, Averaging, CvConfig, EvaluationReport, FoldResult,
    ReportConfig, SmotePlacement,
};
pub use folds::{stratified_folds, FoldPlan};
pub use metrics::{prf_from_confusion, ConfusionCounts, Prf};
pub use report::{
    parse_cell, parse_report_table, published_rows, reference_rows, report_tables, report_tsv,
    ParsedRow, PublishedRow,
};
