//! The validation execution engine: load a source tree, run every validation
//! case against its applicable files, and report per-file findings.
//!
//! Status per (case, applicable file): Incorrect if any anti pattern matches
//! (anti always beats required), else Correct if any required pattern
//! matches, else Missing. Files outside the case's `applies` globs are
//! NotApplicable. Incorrect/Missing findings carry the case's remediation
//! snippet ids that resolve to curated bank entries.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::css::{self, CssRule};
use crate::normalize::{self, LanguageTag, Token};
use crate::snippetbank::{SnippetBank, SnippetId};
use crate::valcase::{CssDeclPattern, Pattern, ValidationCase, ValuePredicate};

#[derive(Debug, thiserror::Error)]
pub enum AnalyzerError {
    #[error("no recognized source files under {0}")]
    EmptyTree(PathBuf),
    #[error("validation needs at least one case")]
    EmptyCaseSet,
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Inclusive 1-based line span of a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LineSpan {
    pub start: usize,
    pub end: usize,
}

impl LineSpan {
    pub fn line(n: usize) -> LineSpan {
        LineSpan { start: n, end: n }
    }
}

/// One normalized source file.
#[derive(Debug, Clone)]
pub struct SourceFile {
    /// Path relative to the tree root, `/`-separated.
    pub path: String,
    pub language_tag: LanguageTag,
    pub raw: String,
    pub normalized_lines: Vec<String>,
    pub tokens: Vec<Token>,
    /// Parsed rule blocks, present for css files only.
    pub css_rules: Option<Vec<CssRule>>,
}

impl SourceFile {
    /// Build a file from text, applying the normalization pipeline.
    pub fn from_text(path: &str, language_tag: LanguageTag, raw: String) -> SourceFile {
        let normalized_lines = normalize::normalized_lines(&raw, language_tag);
        let tokens = normalize::tokenize(&raw, language_tag);
        let css_rules = (language_tag == LanguageTag::Css)
            .then(|| css::parse_rules(&normalize::strip_comments(&raw, language_tag)));
        SourceFile {
            path: path.to_string(),
            language_tag,
            raw,
            normalized_lines,
            tokens,
            css_rules,
        }
    }
}

/// Options for tree loading. The size cap skips pathological blobs.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub max_file_bytes: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            max_file_bytes: 10 * 1024 * 1024,
        }
    }
}

/// An immutable snapshot of the source files under a root directory.
#[derive(Debug)]
pub struct SourceTree {
    pub root: PathBuf,
    pub files: Vec<SourceFile>,
    /// Non-fatal scan notes: skipped binaries, oversized files, read errors.
    pub diagnostics: Vec<String>,
}

impl SourceTree {
    pub fn load(root: &Path) -> Result<SourceTree, AnalyzerError> {
        SourceTree::load_with_options(root, &LoadOptions::default())
    }

    pub fn load_with_options(root: &Path, opts: &LoadOptions) -> Result<SourceTree, AnalyzerError> {
        if !root.is_dir() {
            return Err(AnalyzerError::Io {
                path: root.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            });
        }
        let mut files = Vec::new();
        let mut diagnostics = Vec::new();
        for entry in walkdir::WalkDir::new(root)
            .follow_links(true)
            .sort_by_file_name()
        {
            let entry = match entry {
                Ok(e) => e,
                Err(e) => {
                    diagnostics.push(format!("io error: {e}"));
                    continue;
                }
            };
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = relative_path(root, entry.path());
            let Some(ext) = entry.path().extension().and_then(|e| e.to_str()) else {
                continue;
            };
            let Some(tag) = LanguageTag::from_extension(ext) else {
                continue;
            };
            match entry.metadata() {
                Ok(md) if md.len() > opts.max_file_bytes => {
                    diagnostics.push(format!(
                        "skipped {rel}: {} bytes exceeds the {} byte cap",
                        md.len(),
                        opts.max_file_bytes
                    ));
                    continue;
                }
                Ok(_) => {}
                Err(e) => {
                    diagnostics.push(format!("io error reading {rel}: {e}"));
                    continue;
                }
            }
            let bytes = match std::fs::read(entry.path()) {
                Ok(b) => b,
                Err(e) => {
                    diagnostics.push(format!("io error reading {rel}: {e}"));
                    continue;
                }
            };
            if bytes.contains(&0) {
                diagnostics.push(format!("skipped {rel}: binary content"));
                continue;
            }
            let raw = match String::from_utf8(bytes) {
                Ok(s) => s,
                Err(_) => {
                    diagnostics.push(format!("skipped {rel}: not valid UTF-8"));
                    continue;
                }
            };
            files.push(SourceFile::from_text(&rel, tag, raw));
        }
        if files.is_empty() {
            return Err(AnalyzerError::EmptyTree(root.to_path_buf()));
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(SourceTree {
            root: root.to_path_buf(),
            files,
            diagnostics,
        })
    }

    /// Content digest over (path, bytes) pairs in path order.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for f in &self.files {
            hasher.update(f.path.as_bytes());
            hasher.update([0]);
            hasher.update(f.raw.as_bytes());
            hasher.update([0]);
        }
        hex(&hasher.finalize())
    }
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Matches plus any non-fatal notes (e.g. a css pattern against a non-css
/// file yields zero matches and a diagnostic, never a failure).
#[derive(Debug, Default)]
pub struct MatchOutcome {
    pub spans: Vec<LineSpan>,
    pub diagnostics: Vec<String>,
}

/// Run one pattern against one file; spans come back in document order.
pub fn match_pattern(pattern: &Pattern, file: &SourceFile) -> MatchOutcome {
    let mut outcome = MatchOutcome::default();
    match pattern {
        Pattern::TokenSeq(atoms) => {
            let needle = normalize::fine_tokens(atoms);
            if needle.is_empty() {
                return outcome;
            }
            let texts: Vec<&str> = file.tokens.iter().map(|t| t.text.as_str()).collect();
            let n = needle.len();
            if texts.len() < n {
                return outcome;
            }
            for start in 0..=(texts.len() - n) {
                if needle
                    .iter()
                    .zip(&texts[start..start + n])
                    .all(|(a, b)| a == b)
                {
                    outcome.spans.push(LineSpan {
                        start: file.tokens[start].line,
                        end: file.tokens[start + n - 1].line,
                    });
                }
            }
        }
        Pattern::Regex(re) => {
            for (idx, line) in file.normalized_lines.iter().enumerate() {
                if re.is_match(line) {
                    outcome.spans.push(LineSpan::line(idx + 1));
                }
            }
        }
        Pattern::CssDecl(p) => match &file.css_rules {
            Some(rules) => outcome.spans = match_css_decl(p, rules),
            None => outcome.diagnostics.push(format!(
                "language mismatch: cssdecl pattern against {} file {}",
                file.language_tag.as_str(),
                file.path
            )),
        },
    }
    outcome.spans.sort();
    outcome
}

fn match_css_decl(pattern: &CssDeclPattern, rules: &[CssRule]) -> Vec<LineSpan> {
    let mut spans = Vec::new();
    for rule in rules {
        if !rule.selector_matches(&pattern.selector) {
            continue;
        }
        let decls: Vec<_> = rule
            .declarations
            .iter()
            .filter(|d| d.property == pattern.property)
            .collect();
        match &pattern.predicate {
            ValuePredicate::Equals(v) => {
                let want = normalize::collapse_whitespace(v);
                for d in &decls {
                    if d.value == want {
                        spans.push(LineSpan::line(d.line));
                    }
                }
            }
            ValuePredicate::NotEquals(v) => {
                let want = normalize::collapse_whitespace(v);
                for d in &decls {
                    if d.value != want {
                        spans.push(LineSpan::line(d.line));
                    }
                }
            }
            ValuePredicate::Present => {
                for d in &decls {
                    spans.push(LineSpan::line(d.line));
                }
            }
            ValuePredicate::Absent => {
                if decls.is_empty() {
                    spans.push(LineSpan {
                        start: rule.start_line,
                        end: rule.end_line,
                    });
                }
            }
        }
    }
    spans
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Correct,
    Incorrect,
    Missing,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationFinding {
    pub case_id: String,
    pub guideline_id: String,
    pub path: String,
    pub status: ValidationStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<LineSpan>,
    pub recommended_snippet_ids: Vec<SnippetId>,
}

/// Per-case status counts. Correct + incorrect + missing equals the number
/// of files the case applied to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub case_id: String,
    pub guideline_id: String,
    pub correct: usize,
    pub incorrect: usize,
    pub missing: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportTotals {
    pub cases_run: usize,
    pub files_scanned: usize,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub run_id: String,
    pub generated_at: DateTime<Utc>,
    pub totals: ReportTotals,
    pub cases: Vec<CaseCounts>,
    pub findings: Vec<ValidationFinding>,
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn has_violations(&self) -> bool {
        self.cases.iter().any(|c| c.incorrect > 0 || c.missing > 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn case_set_digest(cases: &[ValidationCase]) -> String {
    let mut hasher = Sha256::new();
    for case in cases {
        hasher.update(case.to_case_file_string().as_bytes());
        hasher.update([0]);
    }
    hex(&hasher.finalize())
}

/// Execute every case against the tree. Deterministic for fixed inputs:
/// findings ordered by (case_id, path), counts derived from findings, and
/// only `run_id`/`generated_at` vary between identical runs.
pub fn run_validation(
    tree: &SourceTree,
    cases: &[ValidationCase],
    bank: &SnippetBank,
) -> Result<ValidationReport, AnalyzerError> {
    if cases.is_empty() {
        return Err(AnalyzerError::EmptyCaseSet);
    }
    let generated_at = Utc::now();
    let mut hasher = Sha256::new();
    hasher.update(case_set_digest(cases).as_bytes());
    hasher.update(tree.digest().as_bytes());
    hasher.update(generated_at.to_rfc3339().as_bytes());
    let run_id = hex(&hasher.finalize());

    let mut diagnostics = tree.diagnostics.clone();
    let mut findings = Vec::new();

    let mut sorted_cases: Vec<&ValidationCase> = cases.iter().collect();
    sorted_cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    for case in &sorted_cases {
        let recommendable: Vec<SnippetId> = case
            .remediation_snippet_ids
            .iter()
            .copied()
            .filter(|id| bank.is_curated(*id))
            .collect();
        for file in &tree.files {
            if !case.applies_to_path(&file.path) {
                findings.push(ValidationFinding {
                    case_id: case.case_id.clone(),
                    guideline_id: case.guideline_id.clone(),
                    path: file.path.clone(),
                    status: ValidationStatus::NotApplicable,
                    span: None,
                    recommended_snippet_ids: Vec::new(),
                });
                continue;
            }
            let anti_span = first_match(&case.anti_patterns, file, &mut diagnostics);
            let (status, span) = if let Some(span) = anti_span {
                (ValidationStatus::Incorrect, Some(span))
            } else if let Some(span) = first_match(&case.required_patterns, file, &mut diagnostics)
            {
                (ValidationStatus::Correct, Some(span))
            } else {
                (ValidationStatus::Missing, None)
            };
            let recommended = match status {
                ValidationStatus::Incorrect | ValidationStatus::Missing => recommendable.clone(),
                _ => Vec::new(),
            };
            findings.push(ValidationFinding {
                case_id: case.case_id.clone(),
                guideline_id: case.guideline_id.clone(),
                path: file.path.clone(),
                status,
                span,
                recommended_snippet_ids: recommended,
            });
        }
    }

    findings.sort_by(|a, b| (&a.case_id, &a.path).cmp(&(&b.case_id, &b.path)));
    let cases_table = counts_from_findings(&sorted_cases, &findings);

    Ok(ValidationReport {
        run_id,
        generated_at,
        totals: ReportTotals {
            cases_run: cases.len(),
            files_scanned: tree.files.len(),
        },
        cases: cases_table,
        findings,
        diagnostics,
    })
}

/// Earliest match in document order across the given patterns, if any.
fn first_match(
    patterns: &[Pattern],
    file: &SourceFile,
    diagnostics: &mut Vec<String>,
) -> Option<LineSpan> {
    let mut best: Option<LineSpan> = None;
    for pattern in patterns {
        let outcome = match_pattern(pattern, file);
        diagnostics.extend(outcome.diagnostics);
        if let Some(span) = outcome.spans.first() {
            best = Some(match best {
                Some(b) if b <= *span => b,
                _ => *span,
            });
        }
    }
    best
}

/// Counts are always re-derived from findings, never tracked separately.
pub fn counts_from_findings(
    cases: &[&ValidationCase],
    findings: &[ValidationFinding],
) -> Vec<CaseCounts> {
    let mut table: Vec<CaseCounts> = cases
        .iter()
        .map(|c| CaseCounts {
            case_id: c.case_id.clone(),
            guideline_id: c.guideline_id.clone(),
            correct: 0,
            incorrect: 0,
            missing: 0,
            not_applicable: 0,
        })
        .collect();
    table.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    for finding in findings {
        let row = table
            .iter_mut()
            .find(|r| r.case_id == finding.case_id)
            .expect("finding belongs to a known case");
        match finding.status {
            ValidationStatus::Correct => row.correct += 1,
            ValidationStatus::Incorrect => row.incorrect += 1,
            ValidationStatus::Missing => row.missing += 1,
            ValidationStatus::NotApplicable => row.not_applicable += 1,
        }
    }
    table
}
