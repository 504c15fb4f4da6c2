//! The metric store: an append-only event log with per-record checksums,
//! plus the cohort- and participant-level aggregations computed from it.
//!
//! Log file layout, one record after another:
//!
//! ```text
//! <len: u32 le> <crc32: u32 le> <payload: len bytes of envelope json>
//! ```
//!
//! Replaying the log from empty reconstructs all aggregate state. A truncated
//! final record (torn write) is detected and dropped on open; a checksum
//! mismatch anywhere is corruption and refuses to open. Writers take an
//! advisory lock file (`<db>.lock`); read-only opens do not.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::analyzer::ValidationReport;
use crate::metrics::{sprint_index, sprint_window, ContributionRecord};
use crate::rsi::{classify_participant, ClassifyConfig, ParticipantSummary, RsiScore, Scorecard};
use crate::snippetbank::{SnippetBank, SnippetId};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store is locked by another writer ({lock})", lock = .0.display())]
    StoreLocked(PathBuf),
    #[error("store corrupt at byte {offset}: {reason}")]
    StoreCorrupt { offset: u64, reason: String },
    #[error("{kind} references unknown contribution `{contribution_id}`")]
    DanglingReference {
        kind: &'static str,
        contribution_id: String,
    },
    #[error("contribution `{0}` already recorded")]
    DuplicateContribution(String),
    #[error("unknown participant `{0}`")]
    UnknownParticipant(String),
    #[error("store is read-only")]
    ReadOnly,
    #[error("store I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Summary of one validation run, the shape the Metric DB keeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub run_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub org_id: Option<String>,
    pub cases_run: usize,
    pub files_scanned: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub missing: usize,
    pub not_applicable: usize,
}

impl ValidationSummary {
    pub fn from_report(report: &ValidationReport, org_id: Option<String>) -> ValidationSummary {
        let sum = |f: fn(&crate::analyzer::CaseCounts) -> usize| {
            report.cases.iter().map(f).sum::<usize>()
        };
        ValidationSummary {
            run_id: report.run_id.clone(),
            org_id,
            cases_run: report.totals.cases_run,
            files_scanned: report.totals.files_scanned,
            correct: sum(|c| c.correct),
            incorrect: sum(|c| c.incorrect),
            missing: sum(|c| c.missing),
            not_applicable: sum(|c| c.not_applicable),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Contribution(ContributionRecord),
    Scorecard(Scorecard),
    RsiComputed {
        contribution_id: String,
        participant_id: String,
        score: RsiScore,
    },
    Validation(ValidationSummary),
    Curation {
        snippet_id: SnippetId,
        approved: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub event: Event,
}

pub struct MetricDb {
    path: PathBuf,
    events: Vec<Envelope>,
    next_seq: u64,
    writable: bool,
    _lock: Option<LockFile>,
}

struct LockFile(PathBuf);

impl Drop for LockFile {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn lock_path(db: &Path) -> PathBuf {
    let mut name = db.file_name().unwrap_or_default().to_os_string();
    name.push(".lock");
    db.with_file_name(name)
}

impl MetricDb {
    /// Open for writing: takes the advisory lock, replays the log, truncates
    /// a torn final record.
    pub fn open(path: &Path) -> Result<MetricDb, StoreError> {
        let lock = lock_path(path);
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(StoreError::StoreLocked(lock));
            }
            Err(source) => return Err(StoreError::Io { path: lock, source }),
        }
        let guard = LockFile(lock);
        let (events, good_len) = replay(path)?;
        // drop a torn tail so the next append lands on a record boundary
        if let Ok(md) = std::fs::metadata(path) {
            if md.len() > good_len {
                let f = std::fs::OpenOptions::new()
                    .write(true)
                    .open(path)
                    .map_err(|source| StoreError::Io {
                        path: path.to_path_buf(),
                        source,
                    })?;
                f.set_len(good_len).map_err(|source| StoreError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
            }
        }
        let next_seq = events.last().map_or(1, |e| e.seq + 1);
        Ok(MetricDb {
            path: path.to_path_buf(),
            events,
            next_seq,
            writable: true,
            _lock: Some(guard),
        })
    }

    /// Open a read-only snapshot: no lock, torn tail ignored in memory.
    pub fn open_read_only(path: &Path) -> Result<MetricDb, StoreError> {
        let (events, _) = replay(path)?;
        let next_seq = events.last().map_or(1, |e| e.seq + 1);
        Ok(MetricDb {
            path: path.to_path_buf(),
            events,
            next_seq,
            writable: false,
            _lock: None,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn events(&self) -> &[Envelope] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Validate references, assign the next sequence number, and append
    /// durably. Returns the assigned sequence.
    pub fn append(&mut self, event: Event) -> Result<u64, StoreError> {
        if !self.writable {
            return Err(StoreError::ReadOnly);
        }
        match &event {
            Event::Contribution(r) => {
                if self.contribution(&r.contribution_id).is_some() {
                    return Err(StoreError::DuplicateContribution(r.contribution_id.clone()));
                }
            }
            Event::Scorecard(card) => {
                if self.contribution(&card.contribution_id).is_none() {
                    return Err(StoreError::DanglingReference {
                        kind: "scorecard",
                        contribution_id: card.contribution_id.clone(),
                    });
                }
            }
            Event::RsiComputed {
                contribution_id, ..
            } => {
                if self.contribution(contribution_id).is_none() {
                    return Err(StoreError::DanglingReference {
                        kind: "rsi score",
                        contribution_id: contribution_id.clone(),
                    });
                }
            }
            Event::Validation(_) | Event::Curation { .. } => {}
        }
        let envelope = Envelope {
            seq: self.next_seq,
            ts: Utc::now(),
            event,
        };
        let payload = serde_json::to_vec(&envelope).expect("envelope serializes");
        let mut frame = Vec::with_capacity(payload.len() + 8);
        frame.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        frame.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
        frame.extend_from_slice(&payload);
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
        file.write_all(&frame).map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })?;
        file.sync_data().map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })?;
        let seq = envelope.seq;
        self.events.push(envelope);
        self.next_seq += 1;
        Ok(seq)
    }

    pub fn contribution(&self, id: &str) -> Option<&ContributionRecord> {
        self.events.iter().find_map(|e| match &e.event {
            Event::Contribution(r) if r.contribution_id == id => Some(r),
            _ => None,
        })
    }

    fn contributions(&self) -> impl Iterator<Item = &ContributionRecord> {
        self.events.iter().filter_map(|e| match &e.event {
            Event::Contribution(r) => Some(r),
            _ => None,
        })
    }

    /// Latest scorecard per contribution (re-reviews supersede).
    fn latest_scorecards(&self) -> BTreeMap<&str, &Scorecard> {
        let mut map = BTreeMap::new();
        for e in &self.events {
            if let Event::Scorecard(card) = &e.event {
                map.insert(card.contribution_id.as_str(), card);
            }
        }
        map
    }

    /// Latest RSI score per contribution, keyed by participant.
    fn rsi_histories(&self) -> BTreeMap<String, BTreeMap<String, RsiScore>> {
        let mut per_contribution: BTreeMap<String, (String, RsiScore)> = BTreeMap::new();
        for e in &self.events {
            if let Event::RsiComputed {
                contribution_id,
                participant_id,
                score,
            } = &e.event
            {
                per_contribution.insert(contribution_id.clone(), (participant_id.clone(), *score));
            }
        }
        let mut by_participant: BTreeMap<String, BTreeMap<String, RsiScore>> = BTreeMap::new();
        for (cid, (pid, score)) in per_contribution {
            by_participant.entry(pid).or_default().insert(cid, score);
        }
        by_participant
    }

    /// Cohort-level aggregation. With a bank, a contribution is bank-backed
    /// only if one of its snippet ids resolves to a live entry; without one,
    /// listing any snippet id counts.
    pub fn cohort_report(&self, bank: Option<&SnippetBank>) -> CohortReport {
        let scorecards = self.latest_scorecards();
        let histories = self.rsi_histories();

        let mut totals = CohortTotals::default();
        let mut per_participant: BTreeMap<&str, (u64, u64)> = BTreeMap::new();

        for record in self.contributions() {
            totals.contributions += 1;
            let entry = per_participant
                .entry(record.participant_id.as_str())
                .or_default();
            entry.0 += 1;
            let backed = is_bank_backed(record, bank);
            if backed {
                totals.bank_backed += 1;
                entry.1 += 1;
                let appropriate = scorecards
                    .get(record.contribution_id.as_str())
                    .is_some_and(|c| c.snippet_use == crate::rsi::SnippetUse::AppropriateSnippet);
                if appropriate {
                    totals.appropriate += 1;
                }
            }
        }

        let participants = per_participant
            .into_iter()
            .map(|(pid, (contributions, backed))| {
                let reliance = rate(backed, contributions);
                let summary = histories.get(pid).and_then(|scores| {
                    let history: Vec<RsiScore> = scores.values().copied().collect();
                    classify_participant(pid, &history, reliance, &ClassifyConfig::default()).ok()
                });
                ParticipantRow {
                    participant_id: pid.to_string(),
                    contributions,
                    bank_backed: backed,
                    summary,
                }
            })
            .collect();

        let quality_trends = self.quality_trends();
        CohortReport {
            reliance_rate: rate(totals.bank_backed, totals.contributions),
            correct_snippet_rate: rate(totals.appropriate, totals.bank_backed),
            totals,
            participants,
            quality_trends,
        }
    }

    /// Validation outcomes grouped by (org, quarter): Incorrect findings
    /// count as fatal, Missing as trivial.
    fn quality_trends(&self) -> Vec<QualityTrendRow> {
        let mut rows: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
        for e in &self.events {
            if let Event::Validation(summary) = &e.event {
                let org = summary.org_id.clone().unwrap_or_else(|| "-".to_string());
                let period = format!("{}-Q{}", e.ts.year(), (e.ts.month() - 1) / 3 + 1);
                let entry = rows.entry((org, period)).or_default();
                entry.0 += summary.incorrect as u64;
                entry.1 += summary.missing as u64;
            }
        }
        rows.into_iter()
            .map(|((org, period), (fatal, trivial))| QualityTrendRow {
                org,
                period,
                fatal_errors: fatal,
                trivial_errors: trivial,
            })
            .collect()
    }

    /// Per-participant sprint series plus the probation summary.
    pub fn participant_report(
        &self,
        participant_id: &str,
        bank: Option<&SnippetBank>,
    ) -> Result<ParticipantReport, StoreError> {
        let records: Vec<&ContributionRecord> = self
            .contributions()
            .filter(|r| r.participant_id == participant_id)
            .collect();
        if records.is_empty() {
            return Err(StoreError::UnknownParticipant(participant_id.to_string()));
        }
        let sprint_start: NaiveDate = records
            .iter()
            .map(|r| r.assigned_at.date())
            .min()
            .expect("records is non-empty");

        let backed = records.iter().filter(|r| is_bank_backed(r, bank)).count() as u64;
        let reliance = rate(backed, records.len() as u64);

        let histories = self.rsi_histories();
        let scores: BTreeMap<String, RsiScore> =
            histories.get(participant_id).cloned().unwrap_or_default();

        let mut buckets: BTreeMap<i64, Vec<RsiScore>> = BTreeMap::new();
        for (cid, score) in &scores {
            let Some(record) = records.iter().find(|r| &r.contribution_id == cid) else {
                continue;
            };
            if let Some(k) = sprint_index(sprint_start, record.submitted_at.date()) {
                buckets.entry(k).or_default().push(*score);
            }
        }
        let sprints = buckets
            .into_iter()
            .map(|(k, scores)| {
                let (start, end) = sprint_window(sprint_start, k);
                let mean = scores.iter().map(|s| s.value_10).sum::<f64>() / scores.len() as f64;
                SprintRsiRow {
                    sprint: k,
                    start,
                    end,
                    scores: scores.len(),
                    mean_value_10: mean,
                    passes: scores.iter().filter(|s| s.pass).count(),
                }
            })
            .collect();

        let history: Vec<RsiScore> = scores.values().copied().collect();
        let summary = if history.is_empty() {
            None
        } else {
            Some(
                classify_participant(
                    participant_id,
                    &history,
                    reliance,
                    &ClassifyConfig::default(),
                )
                .expect("history is non-empty"),
            )
        };
        Ok(ParticipantReport {
            participant_id: participant_id.to_string(),
            sprint_start,
            contributions: records.len() as u64,
            bank_backed: backed,
            sprints,
            summary,
        })
    }

    /// Rewrite the log with participant and reviewer ids replaced by opaque
    /// tokens (P-000001, R-000001, ...), assigned in first-appearance order.
    /// Returns the id mapping.
    pub fn mask_to(&self, dest: &Path) -> Result<BTreeMap<String, String>, StoreError> {
        if dest.exists() {
            return Err(StoreError::Io {
                path: dest.to_path_buf(),
                source: std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    "destination exists",
                ),
            });
        }
        let mut mapping: BTreeMap<String, String> = BTreeMap::new();
        let mut participants = 0u32;
        let mut reviewers = 0u32;
        let mut mask_participant = |id: &str, mapping: &mut BTreeMap<String, String>| {
            mapping
                .entry(id.to_string())
                .or_insert_with(|| {
                    participants += 1;
                    format!("P-{participants:06}")
                })
                .clone()
        };
        let mut out = MetricDb::open(dest)?;
        for envelope in &self.events {
            let event = match &envelope.event {
                Event::Contribution(r) => {
                    let mut r = r.clone();
                    r.participant_id = mask_participant(&r.participant_id, &mut mapping);
                    Event::Contribution(r)
                }
                Event::Scorecard(card) => {
                    let mut card = card.clone();
                    card.reviewer_id = mapping
                        .entry(format!("reviewer:{}", card.reviewer_id))
                        .or_insert_with(|| {
                            reviewers += 1;
                            format!("R-{reviewers:06}")
                        })
                        .clone();
                    Event::Scorecard(card)
                }
                Event::RsiComputed {
                    contribution_id,
                    participant_id,
                    score,
                } => Event::RsiComputed {
                    contribution_id: contribution_id.clone(),
                    participant_id: mask_participant(participant_id, &mut mapping),
                    score: *score,
                },
                other => other.clone(),
            };
            out.append(event)?;
        }
        Ok(mapping)
    }
}

fn is_bank_backed(record: &ContributionRecord, bank: Option<&SnippetBank>) -> bool {
    match bank {
        Some(bank) => record.snippet_ids_used.iter().any(|id| bank.contains(*id)),
        None => !record.snippet_ids_used.is_empty(),
    }
}

fn rate(numerator: u64, denominator: u64) -> Option<f64> {
    (denominator > 0).then(|| numerator as f64 / denominator as f64)
}

/// Replay a log file; returns the events and the byte length of the valid
/// prefix (a torn final record is excluded, a checksum mismatch is fatal).
fn replay(path: &Path) -> Result<(Vec<Envelope>, u64), StoreError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(source) => {
            return Err(StoreError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let mut events = Vec::new();
    let mut offset = 0usize;
    let mut last_seq = 0u64;
    loop {
        if offset == bytes.len() {
            break;
        }
        if bytes.len() - offset < 8 {
            // torn header at the tail
            break;
        }
        let len =
            u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes")) as usize;
        let crc = u32::from_le_bytes(bytes[offset + 4..offset + 8].try_into().expect("4 bytes"));
        if bytes.len() - offset - 8 < len {
            // torn payload at the tail
            break;
        }
        let payload = &bytes[offset + 8..offset + 8 + len];
        if crc32fast::hash(payload) != crc {
            return Err(StoreError::StoreCorrupt {
                offset: offset as u64,
                reason: "crc32 mismatch".into(),
            });
        }
        let envelope: Envelope =
            serde_json::from_slice(payload).map_err(|e| StoreError::StoreCorrupt {
                offset: offset as u64,
                reason: format!("bad payload json: {e}"),
            })?;
        if envelope.seq <= last_seq {
            return Err(StoreError::StoreCorrupt {
                offset: offset as u64,
                reason: format!("sequence {} not increasing", envelope.seq),
            });
        }
        last_seq = envelope.seq;
        events.push(envelope);
        offset += 8 + len;
    }
    Ok((events, offset as u64))
}

#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct CohortTotals {
    pub contributions: u64,
    pub bank_backed: u64,
    pub appropriate: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipantRow {
    pub participant_id: String,
    pub contributions: u64,
    pub bank_backed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<ParticipantSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityTrendRow {
    pub org: String,
    pub period: String,
    pub fatal_errors: u64,
    pub trivial_errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub totals: CohortTotals,
    /// bank-backed / total; undefined on an empty log.
    pub reliance_rate: Option<f64>,
    /// appropriate / bank-backed; undefined without bank-backed records.
    pub correct_snippet_rate: Option<f64>,
    pub participants: Vec<ParticipantRow>,
    pub quality_trends: Vec<QualityTrendRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprintRsiRow {
    pub sprint: i64,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub scores: usize,
    pub mean_value_10: f64,
    pub passes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipantReport {
    pub participant_id: String,
    pub sprint_start: NaiveDate,
    pub contributions: u64,
    pub bank_backed: u64,
    pub sprints: Vec<SprintRsiRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<ParticipantSummary>,
}
