//! Validation case files (`.vcase`): a guideline, the patterns that detect
//! its correct/incorrect implementation, and links to remediation snippets.
//!
//! The format is flat key/value text, one entry per line, so fixtures stay
//! hand-writable and diff-able:
//!
//! ```text
//! id: VC-REQ-21890
//! guideline: REQ-21890
//! desc: fields must allow 100% width
//! applies: **/*.css
//! pattern: anti
//! kind: cssdecl
//! match: .extActAttributes :: width :: =70%
//! pattern: required
//! kind: cssdecl
//! match: .extActAttributes :: width :: =100%
//! remediate: SNIP-000001
//! ```
//!
//! Blank lines and `#` comment lines are ignored. Each `pattern:` opens a
//! block that must be completed by `kind:` and `match:` in that order.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::glob::Glob;
use crate::snippetbank::SnippetId;

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("{file}:{line}: malformed case ({reason})")]
    MalformedCase {
        file: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("duplicate case id `{case_id}` in {file}")]
    DuplicateCaseId { case_id: String, file: PathBuf },
    #[error("no .vcase files in {dir}")]
    EmptyCaseSet { dir: PathBuf },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A regex applied per normalized line. Equality is over the source text.
#[derive(Debug, Clone)]
pub struct LineRegex {
    source: String,
    regex: regex::Regex,
}

impl LineRegex {
    pub fn new(source: &str) -> Result<LineRegex, regex::Error> {
        Ok(LineRegex {
            source: source.to_string(),
            regex: regex::Regex::new(source)?,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_match(&self, line: &str) -> bool {
        self.regex.is_match(line)
    }
}

impl PartialEq for LineRegex {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}
impl Eq for LineRegex {}

/// Predicate on a CSS declaration value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuePredicate {
    Equals(String),
    NotEquals(String),
    Present,
    Absent,
}

impl fmt::Display for ValuePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuePredicate::Equals(v) => write!(f, "={v}"),
            ValuePredicate::NotEquals(v) => write!(f, "!={v}"),
            ValuePredicate::Present => write!(f, "present"),
            ValuePredicate::Absent => write!(f, "absent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssDeclPattern {
    pub selector: String,
    pub property: String,
    pub predicate: ValuePredicate,
}

/// A detection pattern. TokenSeq holds whitespace-normalized atoms; the
/// analyzer refines them to the shared fine-token stream at match time.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    TokenSeq(Vec<String>),
    Regex(LineRegex),
    CssDecl(CssDeclPattern),
}

impl Pattern {
    fn kind_str(&self) -> &'static str {
        match self {
            Pattern::TokenSeq(_) => "tokenseq",
            Pattern::Regex(_) => "regex",
            Pattern::CssDecl(_) => "cssdecl",
        }
    }

    fn payload_str(&self) -> String {
        match self {
            Pattern::TokenSeq(atoms) => atoms.join(" "),
            Pattern::Regex(re) => re.source().to_string(),
            Pattern::CssDecl(p) => format!("{} :: {} :: {}", p.selector, p.property, p.predicate),
        }
    }
}

/// One guideline's detection rules. Immutable after parse.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCase {
    pub case_id: String,
    pub guideline_id: String,
    pub description: String,
    pub applies_to: Vec<Glob>,
    pub required_patterns: Vec<Pattern>,
    pub anti_patterns: Vec<Pattern>,
    pub remediation_snippet_ids: Vec<SnippetId>,
}

impl ValidationCase {
    pub fn applies_to_path(&self, path: &str) -> bool {
        self.applies_to.iter().any(|g| g.matches(path))
    }

    /// Canonical `.vcase` text: parsing it yields an equal case, and
    /// serializing is a fixpoint.
    pub fn to_case_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("id: {}\n", self.case_id));
        out.push_str(&format!("guideline: {}\n", self.guideline_id));
        out.push_str(&format!("desc: {}\n", self.description));
        let globs: Vec<&str> = self.applies_to.iter().map(|g| g.as_str()).collect();
        out.push_str(&format!("applies: {}\n", globs.join(",")));
        for (patterns, tag) in [
            (&self.required_patterns, "required"),
            (&self.anti_patterns, "anti"),
        ] {
            for p in patterns.iter() {
                out.push_str(&format!("pattern: {tag}\n"));
                out.push_str(&format!("kind: {}\n", p.kind_str()));
                out.push_str(&format!("match: {}\n", p.payload_str()));
            }
        }
        if !self.remediation_snippet_ids.is_empty() {
            let ids: Vec<String> = self
                .remediation_snippet_ids
                .iter()
                .map(|id| id.to_string())
                .collect();
            out.push_str(&format!("remediate: {}\n", ids.join(",")));
        }
        out
    }
}

pub const CASE_EXTENSION: &str = "vcase";

/// Parse one `.vcase` file. Deterministic and order-preserving for the
/// pattern lists.
pub fn parse_case_file(path: &Path) -> Result<ValidationCase, CaseError> {
    let bytes = std::fs::read(path).map_err(|source| CaseError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|_| malformed(path, 0, "file is not UTF-8"))?;
    parse_case_text(&text, path)
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> CaseError {
    CaseError::MalformedCase {
        file: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

struct PendingPattern {
    target: String,
    kind: Option<String>,
    opened_at: usize,
}

/// Parse `.vcase` text. Exposed for in-memory fixtures; `source` is used only
/// for diagnostics.
pub fn parse_case_text(text: &str, source: &Path) -> Result<ValidationCase, CaseError> {
    let mut id: Option<String> = None;
    let mut guideline: Option<String> = None;
    let mut desc: Option<String> = None;
    let mut applies: Option<Vec<Glob>> = None;
    let mut required = Vec::new();
    let mut anti = Vec::new();
    let mut remediate: Option<Vec<SnippetId>> = None;
    let mut pending: Option<PendingPattern> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| {
            malformed(
                source,
                line_no,
                format!("expected `key: value`, got `{line}`"),
            )
        })?;
        let key = key.trim();
        let value = value.trim();

        if let Some(p) = pending.as_mut() {
            match key {
                "kind" => {
                    if p.kind.is_some() {
                        return Err(malformed(
                            source,
                            line_no,
                            "duplicate `kind` in pattern block",
                        ));
                    }
                    match value {
                        "tokenseq" | "regex" | "cssdecl" => p.kind = Some(value.to_string()),
                        other => {
                            return Err(malformed(
                                source,
                                line_no,
                                format!(
                                    "unknown pattern kind `{other}` (want tokenseq|regex|cssdecl)"
                                ),
                            ))
                        }
                    }
                    continue;
                }
                "match" => {
                    let kind = p.kind.take().ok_or_else(|| {
                        malformed(source, line_no, "`match` before `kind` in pattern block")
                    })?;
                    let pattern = parse_payload(&kind, value, source, line_no)?;
                    let target = p.target.clone();
                    pending = None;
                    if target == "required" {
                        required.push(pattern);
                    } else {
                        anti.push(pattern);
                    }
                    continue;
                }
                _ => {
                    return Err(malformed(
                        source,
                        p.opened_at,
                        "incomplete pattern block (expected `kind:` then `match:`)",
                    ))
                }
            }
        }

        match key {
            "id" => set_once(&mut id, value, "id", source, line_no)?,
            "guideline" => set_once(&mut guideline, value, "guideline", source, line_no)?,
            "desc" => {
                if desc.is_some() {
                    return Err(malformed(source, line_no, "duplicate field `desc`"));
                }
                desc = Some(value.to_string());
            }
            "applies" => {
                if applies.is_some() {
                    return Err(malformed(source, line_no, "duplicate field `applies`"));
                }
                let mut globs = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    let glob = Glob::parse(part)
                        .map_err(|e| malformed(source, line_no, format!("bad glob: {e}")))?;
                    globs.push(glob);
                }
                applies = Some(globs);
            }
            "pattern" => match value {
                "required" | "anti" => {
                    pending = Some(PendingPattern {
                        target: value.to_string(),
                        kind: None,
                        opened_at: line_no,
                    });
                }
                other => {
                    return Err(malformed(
                        source,
                        line_no,
                        format!("pattern target must be required|anti, got `{other}`"),
                    ))
                }
            },
            "remediate" => {
                if remediate.is_some() {
                    return Err(malformed(source, line_no, "duplicate field `remediate`"));
                }
                let mut ids = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    let sid: SnippetId = part.parse().map_err(|e| {
                        malformed(source, line_no, format!("bad snippet id `{part}`: {e}"))
                    })?;
                    ids.push(sid);
                }
                remediate = Some(ids);
            }
            other => {
                return Err(malformed(
                    source,
                    line_no,
                    format!("unknown field `{other}`"),
                ))
            }
        }
    }

    if let Some(p) = pending {
        return Err(malformed(
            source,
            p.opened_at,
            "incomplete pattern block (expected `kind:` then `match:`)",
        ));
    }

    let case_id = id.ok_or_else(|| malformed(source, 0, "missing mandatory field `id`"))?;
    if case_id.is_empty() {
        return Err(malformed(source, 0, "field `id` is empty"));
    }
    let guideline_id =
        guideline.ok_or_else(|| malformed(source, 0, "missing mandatory field `guideline`"))?;
    if guideline_id.is_empty() {
        return Err(malformed(source, 0, "field `guideline` is empty"));
    }
    let description = desc.ok_or_else(|| malformed(source, 0, "missing mandatory field `desc`"))?;
    let applies_to =
        applies.ok_or_else(|| malformed(source, 0, "missing mandatory field `applies`"))?;
    if required.is_empty() && anti.is_empty() {
        return Err(malformed(
            source,
            0,
            "case needs at least one required or anti pattern",
        ));
    }

    Ok(ValidationCase {
        case_id,
        guideline_id,
        description,
        applies_to,
        required_patterns: required,
        anti_patterns: anti,
        remediation_snippet_ids: remediate.unwrap_or_default(),
    })
}

fn set_once(
    slot: &mut Option<String>,
    value: &str,
    field: &str,
    source: &Path,
    line: usize,
) -> Result<(), CaseError> {
    if slot.is_some() {
        return Err(malformed(
            source,
            line,
            format!("duplicate field `{field}`"),
        ));
    }
    *slot = Some(value.to_string());
    Ok(())
}

fn parse_payload(
    kind: &str,
    value: &str,
    source: &Path,
    line: usize,
) -> Result<Pattern, CaseError> {
    match kind {
        "tokenseq" => {
            let atoms: Vec<String> = value.split_whitespace().map(str::to_string).collect();
            if atoms.is_empty() {
                return Err(malformed(source, line, "tokenseq payload has no tokens"));
            }
            Ok(Pattern::TokenSeq(atoms))
        }
        "regex" => {
            let re = LineRegex::new(value)
                .map_err(|e| malformed(source, line, format!("regex does not compile: {e}")))?;
            Ok(Pattern::Regex(re))
        }
        "cssdecl" => {
            let parts: Vec<&str> = value.split("::").map(str::trim).collect();
            if parts.len() != 3 {
                return Err(malformed(
                    source,
                    line,
                    "cssdecl payload must be `<selector> :: <property> :: <predicate>`",
                ));
            }
            let selector = parts[0].to_string();
            if selector.is_empty() {
                return Err(malformed(source, line, "cssdecl selector is empty"));
            }
            let property = parts[1].to_ascii_lowercase();
            if property.is_empty() {
                return Err(malformed(source, line, "cssdecl property name is empty"));
            }
            let predicate = match parts[2] {
                "present" => ValuePredicate::Present,
                "absent" => ValuePredicate::Absent,
                p if p.starts_with("!=") => ValuePredicate::NotEquals(p[2..].trim().to_string()),
                p if p.starts_with('=') => ValuePredicate::Equals(p[1..].trim().to_string()),
                other => {
                    return Err(malformed(
                        source,
                        line,
                        format!(
                            "cssdecl predicate must be =v | !=v | present | absent, got `{other}`"
                        ),
                    ))
                }
            };
            Ok(Pattern::CssDecl(CssDeclPattern {
                selector,
                property,
                predicate,
            }))
        }
        other => Err(malformed(
            source,
            line,
            format!("unknown pattern kind `{other}`"),
        )),
    }
}

/// Load every `.vcase` file directly in `dir`, fail-fast on the first error,
/// result sorted by case id. Independent of directory enumeration order.
pub fn load_case_set(dir: &Path) -> Result<Vec<ValidationCase>, CaseError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CaseError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CaseError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() && path.extension().is_some_and(|e| e == CASE_EXTENSION) {
            files.push(path);
        }
    }
    if files.is_empty() {
        return Err(CaseError::EmptyCaseSet {
            dir: dir.to_path_buf(),
        });
    }
    files.sort();

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut cases = Vec::with_capacity(files.len());
    for file in &files {
        let case = parse_case_file(file)?;
        if !seen.insert(case.case_id.clone()) {
            return Err(CaseError::DuplicateCaseId {
                case_id: case.case_id,
                file: file.clone(),
            });
        }
        cases.push(case);
    }
    cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    Ok(cases)
}
