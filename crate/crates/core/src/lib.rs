//! Utpada: new-hire programming-productivity toolchain.
//!
//! The library is organized around the pipeline the tool drives:
//!
//! - [`valcase`] — validation case files (`.vcase`): guideline detection
//!   patterns plus remediation snippet links.
//! - [`analyzer`] — loads a source tree, runs every case against the
//!   applicable files, and emits a per-file Correct/Incorrect/Missing report.
//! - [`snippetbank`] — the curated code snippet bank with keyword search.
//! - [`metrics`] — code-quality metrics (nested block depth, WMC, WACC,
//!   dead code) and agile metrics (lead/cycle time, velocity, throughput).
//! - [`rsi`] — review scorecards and the 0–10 Review-Satisfaction-Index.
//! - [`store`] — the append-only metric log plus cohort/participant reports.

pub mod analyzer;
pub mod css;
pub mod glob;
pub mod metrics;
pub mod normalize;
pub mod rsi;
pub mod snippetbank;
pub mod store;
pub mod valcase;

pub use analyzer::{
    run_validation, SourceFile, SourceTree, ValidationFinding, ValidationReport, ValidationStatus,
};
pub use metrics::{AgileMetrics, CodeQualityMetrics, ContributionRecord, ContributionStatus};
pub use rsi::{
    Classification, ParticipantSummary, ProductivityBenchmarks, RsiScore, Scorecard, SnippetUse,
};
pub use snippetbank::{SearchHit, Snippet, SnippetBank, SnippetId, SnippetStatus};
pub use store::{CohortReport, Event, MetricDb};
pub use valcase::{load_case_set, parse_case_file, Pattern, ValidationCase};
