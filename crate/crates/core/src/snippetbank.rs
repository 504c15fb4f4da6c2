//! The Code Snippet Bank: a directory-backed store of curated snippets with
//! keyword search. Candidates queue for curation and never surface in search
//! or recommendations; rejected snippets move to an append-only archive log.
//!
//! Layout of a bank directory:
//! - `SNIP-xxxxxx.snip` — header key/values, blank line, verbatim body
//! - `index.tsv`        — derived keyword index, rebuildable at any time
//! - `archive.log`      — JSON lines of rejected snippets

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum SnippetError {
    #[error("snippet body is a byte-identical duplicate of {existing}")]
    DuplicateBody { existing: SnippetId },
    #[error("invalid snippet draft: {0}")]
    InvalidDraft(String),
    #[error("snippet {id} not found{}", if *.archived { " (rejected and archived)" } else { "" })]
    NotFound { id: SnippetId, archived: bool },
    #[error("snippet {0} is already curated")]
    AlreadyCurated(SnippetId),
    #[error("search query has no searchable terms")]
    EmptyQuery,
    #[error("search limit must be at least 1")]
    InvalidLimit,
    #[error("malformed snippet file {file}: {reason}")]
    MalformedSnippet { file: PathBuf, reason: String },
    #[error("bank I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnippetError + '_ {
    move |source| SnippetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `SNIP-` followed by six decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SnippetId(u32);

impl SnippetId {
    pub fn new(n: u32) -> SnippetId {
        SnippetId(n)
    }

    pub fn number(&self) -> u32 {
        self.0
    }
}

impl fmt::Display for SnippetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SNIP-{:06}", self.0)
    }
}

impl FromStr for SnippetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix("SNIP-")
            .ok_or_else(|| format!("`{s}` does not start with SNIP-"))?;
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("`{s}` must have exactly six decimal digits"));
        }
        Ok(SnippetId(digits.parse().map_err(|e| format!("{e}"))?))
    }
}

impl TryFrom<String> for SnippetId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<SnippetId> for String {
    fn from(id: SnippetId) -> String {
        id.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnippetStatus {
    Candidate,
    Curated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubmitterRole {
    Developer,
    Ux,
    Qa,
    Reviewer,
}

impl FromStr for SubmitterRole {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "developer" => Ok(SubmitterRole::Developer),
            "ux" => Ok(SubmitterRole::Ux),
            "qa" => Ok(SubmitterRole::Qa),
            "reviewer" => Ok(SubmitterRole::Reviewer),
            other => Err(format!(
                "unknown role `{other}` (want developer|ux|qa|reviewer)"
            )),
        }
    }
}

impl SubmitterRole {
    fn as_str(&self) -> &'static str {
        match self {
            SubmitterRole::Developer => "developer",
            SubmitterRole::Ux => "ux",
            SubmitterRole::Qa => "qa",
            SubmitterRole::Reviewer => "reviewer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub snippet_id: SnippetId,
    pub title: String,
    pub language_tag: String,
    pub keywords: Vec<String>,
    pub guideline_ids: Vec<String>,
    pub body: String,
    pub status: SnippetStatus,
    pub submitted_by_role: SubmitterRole,
    pub created_at: DateTime<Utc>,
}

/// What a submitter provides; the bank assigns id and status.
#[derive(Debug, Clone)]
pub struct SnippetDraft {
    pub title: String,
    pub language_tag: String,
    pub keywords: Vec<String>,
    pub guideline_ids: Vec<String>,
    pub body: String,
    pub submitted_by_role: SubmitterRole,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub snippet_id: SnippetId,
    pub score: u32,
    pub matched_keywords: Vec<String>,
}

const EXACT_KEYWORD_WEIGHT: u32 = 3;
const SUBSTRING_WEIGHT: u32 = 1;

/// Lowercase and split on non-alphanumerics; empty terms dropped.
pub fn query_terms(query: &str) -> Vec<String> {
    query
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Disk-backed snippet bank. Single writer (`&mut self` ops), any number of
/// readers; a loaded bank is a consistent snapshot.
#[derive(Debug)]
pub struct SnippetBank {
    dir: PathBuf,
    entries: BTreeMap<SnippetId, Snippet>,
    keyword_index: BTreeMap<String, BTreeSet<SnippetId>>,
    body_hashes: BTreeMap<[u8; 32], SnippetId>,
    archived: BTreeSet<SnippetId>,
    next_id: u32,
}

impl SnippetBank {
    /// Create an empty bank directory (or adopt an existing empty dir).
    pub fn create(dir: &Path) -> Result<SnippetBank, SnippetError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let bank = SnippetBank {
            dir: dir.to_path_buf(),
            entries: BTreeMap::new(),
            keyword_index: BTreeMap::new(),
            body_hashes: BTreeMap::new(),
            archived: BTreeSet::new(),
            next_id: 1,
        };
        bank.write_index()?;
        Ok(bank)
    }

    /// Load a bank from its directory. The keyword index is rebuilt from the
    /// snippet files (`index.tsv` is a derived cache, never trusted blindly).
    pub fn open(dir: &Path) -> Result<SnippetBank, SnippetError> {
        let mut bank = SnippetBank {
            dir: dir.to_path_buf(),
            entries: BTreeMap::new(),
            keyword_index: BTreeMap::new(),
            body_hashes: BTreeMap::new(),
            archived: BTreeSet::new(),
            next_id: 1,
        };
        let read = std::fs::read_dir(dir).map_err(io_err(dir))?;
        for entry in read {
            let entry = entry.map_err(io_err(dir))?;
            let path = entry.path();
            if path.extension().is_some_and(|e| e == "snip") && path.is_file() {
                let snippet = read_snippet_file(&path)?;
                bank.body_hashes
                    .insert(body_hash(&snippet.body), snippet.snippet_id);
                bank.entries.insert(snippet.snippet_id, snippet);
            }
        }
        for id in bank.read_archive_ids()? {
            bank.archived.insert(id);
        }
        bank.next_id = bank
            .entries
            .keys()
            .map(|id| id.number())
            .chain(bank.archived.iter().map(|id| id.number()))
            .max()
            .map_or(1, |n| n + 1);
        bank.rebuild_index();
        Ok(bank)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Live entry (Candidate or Curated) with this id?
    pub fn contains(&self, id: SnippetId) -> bool {
        self.entries.contains_key(&id)
    }

    /// Curated and therefore recommendable?
    pub fn is_curated(&self, id: SnippetId) -> bool {
        self.entries
            .get(&id)
            .is_some_and(|s| s.status == SnippetStatus::Curated)
    }

    pub fn snippets(&self) -> impl Iterator<Item = &Snippet> {
        self.entries.values()
    }

    /// Add a draft: next sequential id, Candidate status, persisted, index
    /// updated. A byte-identical body is refused with the existing id.
    pub fn add_snippet(&mut self, draft: SnippetDraft) -> Result<Snippet, SnippetError> {
        if draft.body.is_empty() {
            return Err(SnippetError::InvalidDraft("body is empty".into()));
        }
        if draft.title.trim().is_empty() {
            return Err(SnippetError::InvalidDraft("title is empty".into()));
        }
        let keywords: Vec<String> = draft
            .keywords
            .iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        if keywords.is_empty() {
            return Err(SnippetError::InvalidDraft("keywords are empty".into()));
        }
        let hash = body_hash(&draft.body);
        if let Some(existing) = self.body_hashes.get(&hash) {
            return Err(SnippetError::DuplicateBody {
                existing: *existing,
            });
        }
        let snippet = Snippet {
            snippet_id: SnippetId::new(self.next_id),
            title: draft.title,
            language_tag: draft.language_tag,
            keywords,
            guideline_ids: draft.guideline_ids,
            body: draft.body,
            status: SnippetStatus::Candidate,
            submitted_by_role: draft.submitted_by_role,
            created_at: Utc::now(),
        };
        self.next_id += 1;
        write_snippet_file(&self.snippet_path(snippet.snippet_id), &snippet)?;
        self.index_insert(&snippet);
        self.body_hashes.insert(hash, snippet.snippet_id);
        self.entries.insert(snippet.snippet_id, snippet.clone());
        self.write_index()?;
        Ok(snippet)
    }

    /// Approve a candidate (Curated, immutable from here on) or reject it
    /// (moved to the archive log, dropped from the index and the store).
    pub fn curate(
        &mut self,
        id: SnippetId,
        approve: bool,
    ) -> Result<Option<Snippet>, SnippetError> {
        let snippet = match self.entries.get(&id) {
            Some(s) => s.clone(),
            None => {
                return Err(SnippetError::NotFound {
                    id,
                    archived: self.archived.contains(&id),
                })
            }
        };
        if snippet.status == SnippetStatus::Curated {
            return Err(SnippetError::AlreadyCurated(id));
        }
        if approve {
            let mut updated = snippet;
            updated.status = SnippetStatus::Curated;
            write_snippet_file(&self.snippet_path(id), &updated)?;
            self.entries.insert(id, updated.clone());
            self.write_index()?;
            Ok(Some(updated))
        } else {
            self.append_archive(&snippet)?;
            std::fs::remove_file(self.snippet_path(id)).map_err(io_err(&self.dir))?;
            self.index_remove(&snippet);
            self.body_hashes.remove(&body_hash(&snippet.body));
            self.entries.remove(&id);
            self.archived.insert(id);
            self.write_index()?;
            Ok(None)
        }
    }

    pub fn lookup(&self, id: SnippetId) -> Result<&Snippet, SnippetError> {
        self.entries.get(&id).ok_or(SnippetError::NotFound {
            id,
            archived: self.archived.contains(&id),
        })
    }

    /// Keyword search over curated snippets. Per query term, an exact keyword
    /// match scores 3, otherwise a case-insensitive substring match against
    /// title or body scores 1 (a keyword hit is not double-counted). Results
    /// sorted by score descending, ties broken by snippet id ascending.
    pub fn search(&self, query: &str, limit: usize) -> Result<Vec<SearchHit>, SnippetError> {
        if limit == 0 {
            return Err(SnippetError::InvalidLimit);
        }
        let terms = query_terms(query);
        if terms.is_empty() {
            return Err(SnippetError::EmptyQuery);
        }
        let mut hits = Vec::new();
        for snippet in self.entries.values() {
            if snippet.status != SnippetStatus::Curated {
                continue;
            }
            let title_lower = snippet.title.to_lowercase();
            let body_lower = snippet.body.to_lowercase();
            let mut score = 0u32;
            let mut matched: Vec<String> = Vec::new();
            for term in &terms {
                if snippet.keywords.iter().any(|k| k == term) {
                    score += EXACT_KEYWORD_WEIGHT;
                    if !matched.contains(term) {
                        matched.push(term.clone());
                    }
                } else if title_lower.contains(term.as_str()) || body_lower.contains(term.as_str())
                {
                    score += SUBSTRING_WEIGHT;
                }
            }
            if score > 0 {
                hits.push(SearchHit {
                    snippet_id: snippet.snippet_id,
                    score,
                    matched_keywords: matched,
                });
            }
        }
        hits.sort_by(|a, b| {
            b.score
                .cmp(&a.score)
                .then_with(|| a.snippet_id.cmp(&b.snippet_id))
        });
        hits.truncate(limit);
        Ok(hits)
    }

    /// Regenerate the in-memory keyword index and `index.tsv` from the store.
    pub fn rebuild_index(&mut self) {
        self.keyword_index.clear();
        let snippets: Vec<(SnippetId, Vec<String>)> = self
            .entries
            .values()
            .map(|s| (s.snippet_id, s.keywords.clone()))
            .collect();
        for (id, keywords) in snippets {
            for kw in keywords {
                self.keyword_index.entry(kw).or_default().insert(id);
            }
        }
    }

    /// Snippet ids currently indexed under a keyword. The search scan is the
    /// source of truth; this is the derived lookup the index file mirrors.
    pub fn indexed_under(&self, keyword: &str) -> Vec<SnippetId> {
        self.keyword_index
            .get(keyword)
            .map(|set| set.iter().copied().collect())
            .unwrap_or_default()
    }

    fn index_insert(&mut self, snippet: &Snippet) {
        for kw in &snippet.keywords {
            self.keyword_index
                .entry(kw.clone())
                .or_default()
                .insert(snippet.snippet_id);
        }
    }

    fn index_remove(&mut self, snippet: &Snippet) {
        for kw in &snippet.keywords {
            if let Some(set) = self.keyword_index.get_mut(kw) {
                set.remove(&snippet.snippet_id);
                if set.is_empty() {
                    self.keyword_index.remove(kw);
                }
            }
        }
    }

    fn snippet_path(&self, id: SnippetId) -> PathBuf {
        self.dir.join(format!("{id}.snip"))
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join("index.tsv")
    }

    fn archive_path(&self) -> PathBuf {
        self.dir.join("archive.log")
    }

    /// Write the derived `index.tsv`: keyword, tab, comma-joined ids.
    pub fn write_index(&self) -> Result<(), SnippetError> {
        let mut out = String::new();
        for (kw, ids) in &self.keyword_index {
            let joined: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
            out.push_str(&format!("{kw}\t{}\n", joined.join(",")));
        }
        std::fs::write(self.index_path(), out).map_err(io_err(&self.dir))
    }

    fn append_archive(&self, snippet: &Snippet) -> Result<(), SnippetError> {
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.archive_path())
            .map_err(io_err(&self.dir))?;
        let line = serde_json::to_string(snippet).expect("snippet serializes");
        writeln!(file, "{line}").map_err(io_err(&self.dir))
    }

    fn read_archive_ids(&self) -> Result<Vec<SnippetId>, SnippetError> {
        let path = self.archive_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let mut ids = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let snippet: Snippet =
                serde_json::from_str(line).map_err(|e| SnippetError::MalformedSnippet {
                    file: path.clone(),
                    reason: format!("bad archive line: {e}"),
                })?;
            ids.push(snippet.snippet_id);
        }
        Ok(ids)
    }
}

fn body_hash(body: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(body.as_bytes());
    hasher.finalize().into()
}

fn write_snippet_file(path: &Path, snippet: &Snippet) -> Result<(), SnippetError> {
    let mut out = String::new();
    out.push_str(&format!("id: {}\n", snippet.snippet_id));
    out.push_str(&format!("title: {}\n", snippet.title));
    out.push_str(&format!("language: {}\n", snippet.language_tag));
    out.push_str(&format!("keywords: {}\n", snippet.keywords.join(",")));
    out.push_str(&format!(
        "guidelines: {}\n",
        snippet.guideline_ids.join(",")
    ));
    out.push_str(&format!(
        "status: {}\n",
        match snippet.status {
            SnippetStatus::Candidate => "candidate",
            SnippetStatus::Curated => "curated",
        }
    ));
    out.push_str(&format!(
        "submitted_by: {}\n",
        snippet.submitted_by_role.as_str()
    ));
    out.push_str(&format!(
        "created_at: {}\n",
        snippet.created_at.to_rfc3339()
    ));
    out.push('\n');
    out.push_str(&snippet.body);
    std::fs::write(path, out).map_err(io_err(path))
}

fn read_snippet_file(path: &Path) -> Result<Snippet, SnippetError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |reason: String| SnippetError::MalformedSnippet {
        file: path.to_path_buf(),
        reason,
    };
    let (header, body) = text
        .split_once("\n\n")
        .ok_or_else(|| bad("missing blank line between header and body".into()))?;
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for line in header.lines() {
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| bad(format!("bad header line `{line}`")))?;
        fields.insert(k.trim(), v.trim());
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| bad(format!("missing header field `{k}`")))
    };
    let list = |v: &str| -> Vec<String> {
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };
    Ok(Snippet {
        snippet_id: get("id")?.parse().map_err(bad)?,
        title: get("title")?.to_string(),
        language_tag: get("language")?.to_string(),
        keywords: list(get("keywords")?),
        guideline_ids: list(get("guidelines")?),
        body: body.to_string(),
        status: match get("status")? {
            "candidate" => SnippetStatus::Candidate,
            "curated" => SnippetStatus::Curated,
            other => return Err(bad(format!("unknown status `{other}`"))),
        },
        submitted_by_role: get("submitted_by")?.parse().map_err(bad)?,
        created_at: DateTime::parse_from_rfc3339(get("created_at")?)
            .map_err(|e| bad(format!("bad created_at: {e}")))?
            .with_timezone(&Utc),
    })
}
