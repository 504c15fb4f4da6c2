//! Programming productivity indicators: code-quality metrics computed from
//! source (nested block depth, weighted methods per class, WACC, dead code)
//! and agile metrics computed from contribution records (lead time, cycle
//! time, velocity, deliverable throughput, lines changed).

mod agile;
mod quality;

pub use agile::{
    agile_metrics, sprint_index, sprint_window, working_days_between, AgileMetrics, RecordTiming,
    SprintWindow,
};
pub use quality::{
    analyze_file, analyze_tree, dead_code, nested_block_depth, wmc, ClassRow, DepthReport,
    FileQuality, FunctionMetrics,
};

use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::snippetbank::SnippetId;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("{path}:{line}: unbalanced braces")]
    UnbalancedBraces { path: String, line: usize },
    #[error("{path}: {tag} is not a brace-delimited language")]
    NotBraceLanguage { path: String, tag: String },
    #[error("no class rows (or zero total loc) for wacc")]
    NoClasses,
    #[error("no contribution records")]
    EmptyRecords,
    #[error("records mix participants: {0} and {1}")]
    MixedParticipants(String, String),
    #[error("{file}:{line}: bad check-in row: {reason}")]
    MalformedCheckin {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContributionStatus {
    Approved,
    Rework,
    Rejected,
}

impl std::str::FromStr for ContributionStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "approved" => Ok(ContributionStatus::Approved),
            "rework" => Ok(ContributionStatus::Rework),
            "rejected" => Ok(ContributionStatus::Rejected),
            other => Err(format!(
                "unknown status `{other}` (want Approved|Rework|Rejected)"
            )),
        }
    }
}

/// One new-hire code contribution as exported from the organization's
/// check-in tooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionRecord {
    pub contribution_id: String,
    pub participant_id: String,
    pub task_id: String,
    pub snippet_ids_used: Vec<SnippetId>,
    pub loc_added: u64,
    pub loc_updated: u64,
    pub loc_deleted: u64,
    pub commit_count: u64,
    pub assigned_at: NaiveDateTime,
    pub started_at: NaiveDateTime,
    pub submitted_at: NaiveDateTime,
    pub approved_at: Option<NaiveDateTime>,
    pub status: ContributionStatus,
}

impl ContributionRecord {
    /// Lines changed: additions, updates, and deletions all count.
    pub fn lines_changed(&self) -> u64 {
        self.loc_added + self.loc_updated + self.loc_deleted
    }

    /// Timestamp ordering and the approved ⇔ approved_at pairing.
    pub fn validate(&self) -> Result<(), String> {
        if self.started_at < self.assigned_at {
            return Err("started_at precedes assigned_at".into());
        }
        if self.submitted_at < self.started_at {
            return Err("submitted_at precedes started_at".into());
        }
        if let Some(approved) = self.approved_at {
            if approved < self.submitted_at {
                return Err("approved_at precedes submitted_at".into());
            }
        }
        match (self.status, self.approved_at.is_some()) {
            (ContributionStatus::Approved, false) => {
                Err("status Approved without approved_at".into())
            }
            (ContributionStatus::Rework | ContributionStatus::Rejected, true) => {
                Err("approved_at present on a non-approved record".into())
            }
            _ => Ok(()),
        }
    }
}

/// Code-quality rows for a whole source tree, plus the tree-wide WACC.
#[derive(Debug, Serialize)]
pub struct CodeQualityMetrics {
    pub files: Vec<FileQuality>,
    /// Loc-weighted mean of per-class WMC across every class row in the tree.
    pub wacc: Option<f64>,
    /// Files whose metrics were unavailable (unbalanced braces etc).
    pub errors: Vec<String>,
}

impl CodeQualityMetrics {
    pub fn max_nested_block_depth(&self) -> usize {
        self.files
            .iter()
            .map(|f| f.max_nested_block_depth)
            .max()
            .unwrap_or(0)
    }
}

/// WACC = Σ(wmc_i × loc_i) / Σ(loc_i) over class rows.
pub fn wacc(rows: &[ClassRow]) -> Result<f64, MetricsError> {
    let total_loc: u64 = rows.iter().map(|r| r.loc).sum();
    if rows.is_empty() || total_loc == 0 {
        return Err(MetricsError::NoClasses);
    }
    let weighted: f64 = rows.iter().map(|r| r.wmc as f64 * r.loc as f64).sum();
    Ok(weighted / total_loc as f64)
}

pub const CHECKIN_COLUMNS: [&str; 13] = [
    "contribution_id",
    "participant_id",
    "task_id",
    "snippet_ids",
    "loc_added",
    "loc_updated",
    "loc_deleted",
    "commit_count",
    "assigned_at",
    "started_at",
    "submitted_at",
    "approved_at",
    "status",
];

/// Parse the tab-separated check-in export (header row required, columns
/// exactly as [`CHECKIN_COLUMNS`]). Fail-fast with the offending line.
pub fn parse_checkins(path: &Path) -> Result<Vec<ContributionRecord>, MetricsError> {
    let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_checkins_text(&text, &path.display().to_string())
}

pub fn parse_checkins_text(
    text: &str,
    source_name: &str,
) -> Result<Vec<ContributionRecord>, MetricsError> {
    let bad = |line: usize, reason: String| MetricsError::MalformedCheckin {
        file: source_name.to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| bad(1, "empty file (header row required)".into()))?;
    let got: Vec<&str> = header.split('\t').map(str::trim).collect();
    if got != CHECKIN_COLUMNS {
        return Err(bad(
            1,
            format!("header must be exactly: {}", CHECKIN_COLUMNS.join("\\t")),
        ));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != CHECKIN_COLUMNS.len() {
            return Err(bad(
                line_no,
                format!(
                    "expected {} columns, got {}",
                    CHECKIN_COLUMNS.len(),
                    cols.len()
                ),
            ));
        }
        let uint = |v: &str, name: &str| -> Result<u64, MetricsError> {
            v.parse::<u64>()
                .map_err(|e| bad(line_no, format!("{name}: {e}")))
        };
        let snippet_ids = if cols[3] == "-" || cols[3].is_empty() {
            Vec::new()
        } else {
            let mut ids = Vec::new();
            for part in cols[3].split(',') {
                let id: SnippetId = part
                    .trim()
                    .parse()
                    .map_err(|e| bad(line_no, format!("snippet_ids: {e}")))?;
                ids.push(id);
            }
            ids
        };
        let record = ContributionRecord {
            contribution_id: cols[0].to_string(),
            participant_id: cols[1].to_string(),
            task_id: cols[2].to_string(),
            snippet_ids_used: snippet_ids,
            loc_added: uint(cols[4], "loc_added")?,
            loc_updated: uint(cols[5], "loc_updated")?,
            loc_deleted: uint(cols[6], "loc_deleted")?,
            commit_count: uint(cols[7], "commit_count")?,
            assigned_at: parse_timestamp(cols[8])
                .map_err(|e| bad(line_no, format!("assigned_at: {e}")))?,
            started_at: parse_timestamp(cols[9])
                .map_err(|e| bad(line_no, format!("started_at: {e}")))?,
            submitted_at: parse_timestamp(cols[10])
                .map_err(|e| bad(line_no, format!("submitted_at: {e}")))?,
            approved_at: if cols[11] == "-" || cols[11].is_empty() {
                None
            } else {
                Some(
                    parse_timestamp(cols[11])
                        .map_err(|e| bad(line_no, format!("approved_at: {e}")))?,
                )
            },
            status: cols[12].parse().map_err(|e: String| bad(line_no, e))?,
        };
        if cols[0].is_empty() || cols[1].is_empty() {
            return Err(bad(
                line_no,
                "contribution_id and participant_id are required".into(),
            ));
        }
        record.validate().map_err(|e| bad(line_no, e))?;
        records.push(record);
    }
    Ok(records)
}

/// ISO-8601 date (`2021-03-01`) or datetime (`2021-03-01T09:30:00`); a bare
/// date means midnight.
pub fn parse_timestamp(s: &str) -> Result<NaiveDateTime, String> {
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Ok(dt);
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Ok(dt);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight exists"));
    }
    Err(format!("`{s}` is not an ISO-8601 date or datetime"))
}
