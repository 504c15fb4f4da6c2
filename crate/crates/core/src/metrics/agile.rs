//! Agile metrics over contribution records: working-day lead/cycle times and
//! 6-working-day sprint windows (weekends excluded, no holiday table).
//!
//! A record belongs to the sprint of its submission date. Velocity counts
//! distinct approved task ids in the window (deliverables); deliverable
//! throughput counts approved contributions; lines changed sums over every
//! record in the window regardless of status.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::Serialize;

use super::{ContributionRecord, ContributionStatus, MetricsError};

pub fn is_working_day(date: NaiveDate) -> bool {
    !matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Working days elapsed from `start` to `end`: weekdays in `(start, end]`.
/// Monday to Friday of the same week is 4; same day is 0.
pub fn working_days_between(start: NaiveDate, end: NaiveDate) -> i64 {
    if end <= start {
        return 0;
    }
    let mut days = 0;
    let mut d = start;
    while d < end {
        d = d.checked_add_days(Days::new(1)).expect("date in range");
        if is_working_day(d) {
            days += 1;
        }
    }
    days
}

/// Index of `date` in the working-day sequence starting at `origin` (day 0 is
/// the first working day on or after `origin`). Weekend dates take the index
/// of the following Monday. Negative when `date` precedes the origin.
pub fn working_day_index(origin: NaiveDate, date: NaiveDate) -> i64 {
    let mut start = origin;
    while !is_working_day(start) {
        start = start.checked_add_days(Days::new(1)).expect("date in range");
    }
    if date >= start {
        let mut idx = 0;
        let mut d = start;
        while d < date {
            if is_working_day(d) {
                idx += 1;
            }
            d = d.checked_add_days(Days::new(1)).expect("date in range");
        }
        idx
    } else {
        -working_days_between(date, start)
    }
}

pub const SPRINT_WORKING_DAYS: i64 = 6;

/// Sprint number for `date` relative to `origin`, or `None` before origin.
pub fn sprint_index(origin: NaiveDate, date: NaiveDate) -> Option<i64> {
    let idx = working_day_index(origin, date);
    (idx >= 0).then_some(idx / SPRINT_WORKING_DAYS)
}

/// Calendar bounds (first and last working day) of sprint `k`.
pub fn sprint_window(origin: NaiveDate, k: i64) -> (NaiveDate, NaiveDate) {
    let mut d = origin;
    while !is_working_day(d) {
        d = d.checked_add_days(Days::new(1)).expect("date in range");
    }
    let mut idx = 0i64;
    let first_idx = k * SPRINT_WORKING_DAYS;
    let last_idx = first_idx + SPRINT_WORKING_DAYS - 1;
    let mut first = d;
    loop {
        if is_working_day(d) {
            if idx == first_idx {
                first = d;
            }
            if idx == last_idx {
                return (first, d);
            }
            idx += 1;
        }
        d = d.checked_add_days(Days::new(1)).expect("date in range");
    }
}

/// Per-record working-day timings; lead and cycle exist once approved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordTiming {
    pub contribution_id: String,
    pub sprint: i64,
    pub lead_days: Option<i64>,
    pub cycle_days: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprintWindow {
    pub sprint: i64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub records: usize,
    /// Approved contributions in the window.
    pub deliverable_throughput: usize,
    /// Distinct approved task ids in the window.
    pub velocity: usize,
    pub lines_changed: u64,
    pub mean_lead_days: Option<f64>,
    pub mean_cycle_days: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AgileMetrics {
    pub participant_id: String,
    pub sprint_start: NaiveDate,
    pub windows: Vec<SprintWindow>,
    pub per_record: Vec<RecordTiming>,
    /// Records skipped for invalid timestamps, with reasons.
    pub diagnostics: Vec<String>,
}

/// Aggregate one participant's records into sprint windows from
/// `sprint_start`. Invalid records are skipped with a diagnostic.
pub fn agile_metrics(
    records: &[ContributionRecord],
    sprint_start: NaiveDate,
) -> Result<AgileMetrics, MetricsError> {
    let first = records.first().ok_or(MetricsError::EmptyRecords)?;
    let participant_id = first.participant_id.clone();
    for r in records {
        if r.participant_id != participant_id {
            return Err(MetricsError::MixedParticipants(
                participant_id,
                r.participant_id.clone(),
            ));
        }
    }

    let mut diagnostics = Vec::new();
    let mut per_record = Vec::new();
    let mut buckets: std::collections::BTreeMap<i64, Vec<&ContributionRecord>> =
        std::collections::BTreeMap::new();

    for r in records {
        if let Err(reason) = r.validate() {
            diagnostics.push(format!("skipped {}: {reason}", r.contribution_id));
            continue;
        }
        let Some(sprint) = sprint_index(sprint_start, r.submitted_at.date()) else {
            diagnostics.push(format!(
                "skipped {}: submitted before sprint start {sprint_start}",
                r.contribution_id
            ));
            continue;
        };
        let lead = r
            .approved_at
            .map(|a| working_days_between(r.assigned_at.date(), a.date()));
        let cycle = r
            .approved_at
            .map(|a| working_days_between(r.started_at.date(), a.date()));
        per_record.push(RecordTiming {
            contribution_id: r.contribution_id.clone(),
            sprint,
            lead_days: lead,
            cycle_days: cycle,
        });
        buckets.entry(sprint).or_default().push(r);
    }

    let windows = buckets
        .iter()
        .map(|(&sprint, rs)| {
            let (start, end) = sprint_window(sprint_start, sprint);
            let approved: Vec<&&ContributionRecord> = rs
                .iter()
                .filter(|r| r.status == ContributionStatus::Approved)
                .collect();
            let mut tasks: Vec<&str> = approved.iter().map(|r| r.task_id.as_str()).collect();
            tasks.sort_unstable();
            tasks.dedup();
            let leads: Vec<i64> = approved
                .iter()
                .filter_map(|r| {
                    r.approved_at
                        .map(|a| working_days_between(r.assigned_at.date(), a.date()))
                })
                .collect();
            let cycles: Vec<i64> = approved
                .iter()
                .filter_map(|r| {
                    r.approved_at
                        .map(|a| working_days_between(r.started_at.date(), a.date()))
                })
                .collect();
            let mean =
                |v: &[i64]| (!v.is_empty()).then(|| v.iter().sum::<i64>() as f64 / v.len() as f64);
            SprintWindow {
                sprint,
                start,
                end,
                records: rs.len(),
                deliverable_throughput: approved.len(),
                velocity: tasks.len(),
                lines_changed: rs.iter().map(|r| r.lines_changed()).sum(),
                mean_lead_days: mean(&leads),
                mean_cycle_days: mean(&cycles),
            }
        })
        .collect();

    Ok(AgileMetrics {
        participant_id,
        sprint_start,
        windows,
        per_record,
        diagnostics,
    })
}
