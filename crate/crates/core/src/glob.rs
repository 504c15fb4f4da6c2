//! Minimal path globs: `*` matches within a segment, `**` matches across
//! segments. Nothing else is special.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GlobError {
    #[error("empty glob")]
    Empty,
    #[error("empty path segment in glob `{0}`")]
    EmptySegment(String),
    #[error("`**` must stand alone as a segment in glob `{0}`")]
    MixedDoubleStar(String),
}

/// A compiled glob over `/`-separated relative paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glob {
    source: String,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    /// `**`: zero or more whole segments.
    AnyDepth,
    /// A literal/star segment, split at `*` boundaries.
    Parts(Vec<String>),
}

impl Glob {
    pub fn parse(pattern: &str) -> Result<Glob, GlobError> {
        if pattern.is_empty() {
            return Err(GlobError::Empty);
        }
        let mut segments = Vec::new();
        for seg in pattern.split('/') {
            if seg.is_empty() {
                return Err(GlobError::EmptySegment(pattern.to_string()));
            }
            if seg == "**" {
                segments.push(Segment::AnyDepth);
            } else if seg.contains("**") {
                // `a**b` or `**.css` is almost always a typo for `**/*b`; reject.
                return Err(GlobError::MixedDoubleStar(pattern.to_string()));
            } else {
                segments.push(Segment::Parts(seg.split('*').map(str::to_string).collect()));
            }
        }
        Ok(Glob {
            source: pattern.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Match a `/`-separated relative path.
    pub fn matches(&self, path: &str) -> bool {
        let parts: Vec<&str> = path.split('/').collect();
        match_segments(&self.segments, &parts)
    }
}

fn match_segments(globs: &[Segment], parts: &[&str]) -> bool {
    match globs.split_first() {
        None => parts.is_empty(),
        Some((Segment::AnyDepth, rest)) => {
            // `**` absorbs zero or more leading segments.
            (0..=parts.len()).any(|skip| match_segments(rest, &parts[skip..]))
        }
        Some((Segment::Parts(pieces), rest)) => match parts.split_first() {
            None => false,
            Some((head, tail)) => match_one(pieces, head) && match_segments(rest, tail),
        },
    }
}

/// Match a single segment against literal pieces separated by `*`.
fn match_one(pieces: &[String], segment: &str) -> bool {
    debug_assert!(!pieces.is_empty());
    if pieces.len() == 1 {
        return pieces[0] == segment;
    }
    let mut remaining = segment;
    // First piece anchors at the start, last at the end.
    match remaining.strip_prefix(pieces[0].as_str()) {
        Some(r) => remaining = r,
        None => return false,
    }
    let last = &pieces[pieces.len() - 1];
    if !remaining.ends_with(last.as_str()) {
        return false;
    }
    remaining = &remaining[..remaining.len() - last.len()];
    for piece in &pieces[1..pieces.len() - 1] {
        if piece.is_empty() {
            continue; // `**` is rejected earlier; `a**b` cannot reach here, but `a*<empty>*b` can
        }
        match remaining.find(piece.as_str()) {
            Some(idx) => remaining = &remaining[idx + piece.len()..],
            None => return false,
        }
    }
    true
}
