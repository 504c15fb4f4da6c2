//! Source text normalization shared by the analyzer and the metrics scanners.
//!
//! The pipeline is: strip comments for the file's language (string-aware, so
//! `//` inside a literal survives), collapse whitespace runs per line, and
//! split the result into tokens at identifier/punctuation boundaries. Every
//! identifier run (`[A-Za-z0-9_]+`) is one token; every other non-space
//! character is a single-character token. Matching over that stream is
//! insensitive to the spacing of both the pattern and the source.

use serde::{Deserialize, Serialize};

/// Language family inferred from the file extension. Drives comment syntax
/// and which metrics apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanguageTag {
    Css,
    Html,
    KotlinLike,
    JsLike,
    Other,
}

impl LanguageTag {
    /// Extension → tag. Returns `None` for extensions the loader skips.
    pub fn from_extension(ext: &str) -> Option<LanguageTag> {
        let ext = ext.to_ascii_lowercase();
        Some(match ext.as_str() {
            "css" => LanguageTag::Css,
            "html" | "htm" | "xhtml" => LanguageTag::Html,
            "kt" | "kts" | "java" | "swift" | "cs" | "m" | "scala" => LanguageTag::KotlinLike,
            "js" | "jsx" | "ts" | "tsx" | "mjs" | "cjs" => LanguageTag::JsLike,
            "txt" | "md" | "xml" | "json" | "yaml" | "yml" | "properties" | "gradle" | "lua"
            | "py" | "rb" | "sql" | "sh" | "toml" | "cfg" | "ini" => LanguageTag::Other,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            LanguageTag::Css => "css",
            LanguageTag::Html => "html",
            LanguageTag::KotlinLike => "kotlin-like",
            LanguageTag::JsLike => "js-like",
            LanguageTag::Other => "other",
        }
    }

    /// Brace-delimited languages the code-quality metrics understand.
    pub fn is_brace_language(&self) -> bool {
        matches!(self, LanguageTag::KotlinLike | LanguageTag::JsLike)
    }
}

/// A token with the 1-based line it starts on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub line: usize,
}

/// Strip comments for `lang`, replacing stripped characters with spaces so
/// line/column positions survive. String literal contents are kept (the
/// analyzer matches inside them) but comment openers inside strings are
/// ignored.
pub fn strip_comments(text: &str, lang: LanguageTag) -> String {
    match lang {
        LanguageTag::Css => strip_delimited(text, &[("/*", "*/")], false),
        LanguageTag::Html => strip_delimited(text, &[("<!--", "-->")], false),
        LanguageTag::KotlinLike | LanguageTag::JsLike => {
            strip_delimited(text, &[("/*", "*/")], true)
        }
        LanguageTag::Other => text.to_string(),
    }
}

/// Strip comments and blank out string literal contents (quotes kept).
/// Used by the brace metrics, which must ignore `{` and `if` in literals.
pub fn strip_comments_and_strings(text: &str, lang: LanguageTag) -> String {
    let stripped = strip_comments(text, lang);
    match lang {
        LanguageTag::KotlinLike | LanguageTag::JsLike | LanguageTag::Css => mask_strings(&stripped),
        _ => stripped,
    }
}

/// Block/line comment stripper with quote tracking. `line_comments` enables
/// `//`. Newlines inside block comments are preserved.
fn strip_delimited(text: &str, block: &[(&str, &str)], line_comments: bool) -> String {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    let mut quote: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        if let Some(q) = quote {
            if b == b'\\' && i + 1 < bytes.len() {
                out.push(b);
                out.push(bytes[i + 1]);
                i += 2;
                continue;
            }
            if b == q {
                quote = None;
            }
            out.push(b);
            i += 1;
            continue;
        }
        if b == b'"' || b == b'\'' || b == b'`' {
            quote = Some(b);
            out.push(b);
            i += 1;
            continue;
        }
        if line_comments && bytes[i..].starts_with(b"//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                out.push(b' ');
                i += 1;
            }
            continue;
        }
        let mut matched = false;
        for (open, close) in block {
            if bytes[i..].starts_with(open.as_bytes()) {
                let start = i;
                i += open.len();
                while i < bytes.len() && !bytes[i..].starts_with(close.as_bytes()) {
                    i += 1;
                }
                if i < bytes.len() {
                    i += close.len();
                }
                for &c in &bytes[start..i] {
                    out.push(if c == b'\n' { b'\n' } else { b' ' });
                }
                matched = true;
                break;
            }
        }
        if matched {
            continue;
        }
        out.push(b);
        i += 1;
    }
    // Input was valid UTF-8 and we only replaced ASCII ranges with spaces
    // inside comments; multi-byte chars in comments are replaced byte-wise,
    // which still yields valid UTF-8 (all replacements are ASCII spaces).
    String::from_utf8(out).expect("stripping preserves utf-8")
}

/// Replace string literal contents with spaces, keeping the quote characters.
fn mask_strings(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    let mut quote: Option<u8> = None;
    while i < bytes.len() {
        let b = bytes[i];
        match quote {
            Some(q) => {
                if b == b'\\' && i + 1 < bytes.len() {
                    out.push(b' ');
                    out.push(if bytes[i + 1] == b'\n' { b'\n' } else { b' ' });
                    i += 2;
                    continue;
                }
                if b == q {
                    quote = None;
                    out.push(b);
                } else {
                    out.push(if b == b'\n' { b'\n' } else { b' ' });
                }
            }
            None => {
                if b == b'"' || b == b'\'' || b == b'`' {
                    quote = Some(b);
                }
                out.push(b);
            }
        }
        i += 1;
    }
    String::from_utf8(out).expect("masking preserves utf-8")
}

/// Comment-stripped lines with whitespace runs collapsed and ends trimmed.
/// Regex patterns match against these.
pub fn normalized_lines(text: &str, lang: LanguageTag) -> Vec<String> {
    strip_comments(text, lang)
        .lines()
        .map(collapse_whitespace)
        .collect()
}

pub fn collapse_whitespace(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut in_space = true; // leading whitespace dropped
    for ch in line.chars() {
        if ch.is_whitespace() {
            if !in_space {
                out.push(' ');
                in_space = true;
            }
        } else {
            out.push(ch);
            in_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '_'
}

/// Tokenize comment-stripped text: identifier runs are one token each, every
/// other non-space character is its own token. Records the line of each token.
pub fn tokenize(text: &str, lang: LanguageTag) -> Vec<Token> {
    let stripped = strip_comments(text, lang);
    let mut tokens = Vec::new();
    for (idx, line) in stripped.lines().enumerate() {
        let line_no = idx + 1;
        let mut word = String::new();
        for ch in line.chars() {
            if is_word_char(ch) {
                word.push(ch);
            } else {
                if !word.is_empty() {
                    tokens.push(Token {
                        text: std::mem::take(&mut word),
                        line: line_no,
                    });
                }
                if !ch.is_whitespace() {
                    tokens.push(Token {
                        text: ch.to_string(),
                        line: line_no,
                    });
                }
            }
        }
        if !word.is_empty() {
            tokens.push(Token {
                text: word,
                line: line_no,
            });
        }
    }
    tokens
}

/// Split a TokenSeq pattern's whitespace atoms down to the fine token stream
/// that [`tokenize`] produces, so a pattern written as `( "x" )` and source
/// written as `("x")` compare equal.
pub fn fine_tokens(atoms: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for atom in atoms {
        let mut word = String::new();
        for ch in atom.chars() {
            if is_word_char(ch) {
                word.push(ch);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                if !ch.is_whitespace() {
                    out.push(ch.to_string());
                }
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_stripped_per_language() {
        let css = ".a { /* width: 70% */ width: 100%; }";
        let out = strip_comments(css, LanguageTag::Css);
        assert!(!out.contains("70%"));
        assert!(out.contains("100%"));

        let html = "<p>keep</p> <!-- drop --> <p>more</p>";
        let out = strip_comments(html, LanguageTag::Html);
        assert!(!out.contains("drop"));
        assert!(out.contains("more"));

        let kt = "val a = 1 // trailing\nval b = \"// not a comment\"";
        let out = strip_comments(kt, LanguageTag::KotlinLike);
        assert!(!out.contains("trailing"));
        assert!(out.contains("// not a comment"));
    }

    #[test]
    fn block_comment_preserves_line_count() {
        let kt = "a /* one\ntwo\nthree */ b";
        let out = strip_comments(kt, LanguageTag::KotlinLike);
        assert_eq!(out.lines().count(), 3);
        assert!(out.contains('a') && out.contains('b'));
    }

    #[test]
    fn string_masking_keeps_quotes_and_layout() {
        let kt = "val x = \"{ if (a) }\"\nval y = 2";
        let out = strip_comments_and_strings(kt, LanguageTag::KotlinLike);
        assert!(!out.contains('{'));
        assert!(!out.contains("if"));
        assert_eq!(out.lines().count(), 2);
        assert_eq!(out.matches('"').count(), 2);
    }

    #[test]
    fn tokenize_splits_identifier_punctuation_boundaries() {
        let toks = tokenize(
            "throw IllegalStateException(\"Incorrect Typecast\")",
            LanguageTag::KotlinLike,
        );
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            texts,
            vec![
                "throw",
                "IllegalStateException",
                "(",
                "\"",
                "Incorrect",
                "Typecast",
                "\"",
                ")"
            ]
        );
    }

    #[test]
    fn html_attribute_values_become_tokens() {
        let html =
            r#"<input type="text" class="form-control extActAttributes" id="aligncompetency"/>"#;
        let toks = tokenize(html, LanguageTag::Html);
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert!(texts.contains(&"extActAttributes"));
        let pos = texts.iter().position(|t| *t == "extActAttributes").unwrap();
        // split on whitespace inside the class attribute: `control` precedes it
        assert_eq!(texts[pos - 1], "control");
    }

    #[test]
    fn fine_tokens_are_spacing_insensitive() {
        let spaced: Vec<String> = [
            "throw",
            "IllegalStateException",
            "(",
            "\"Incorrect",
            "Typecast\"",
            ")",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let compact: Vec<String> = ["throw", "IllegalStateException(\"Incorrect", "Typecast\")"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(fine_tokens(&spaced), fine_tokens(&compact));
    }

    #[test]
    fn collapse_whitespace_trims_and_squeezes() {
        assert_eq!(collapse_whitespace("  a\t\tb  c "), "a b c");
        assert_eq!(collapse_whitespace(""), "");
    }

    #[test]
    fn tokenize_idempotent_on_rejoined_text() {
        let src = "fun main() { val x = 1 }";
        let toks = tokenize(src, LanguageTag::KotlinLike);
        let rejoined = toks
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let again = tokenize(&rejoined, LanguageTag::KotlinLike);
        let a: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        let b: Vec<&str> = again.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(a, b);
    }
}
