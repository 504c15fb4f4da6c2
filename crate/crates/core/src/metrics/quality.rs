//! Token-level code-quality metrics for brace-delimited languages.
//!
//! One scan of the comment- and string-stripped text drives all three
//! metrics:
//!
//! - nested block depth: max `{}` nesting inside a function body, the body
//!   itself being depth 1;
//! - WMC: per-method complexity = 1 + decision tokens (`if`, `for`, `while`,
//!   `catch`, `case`, `&&`, `||`, ternary `?`, and `->` branches directly
//!   inside a `when`/`switch` block), summed per class, with free functions
//!   under a synthetic `<toplevel>` class;
//! - dead code: statements in a block after an unconditional `return`,
//!   `throw`, `break`, or `continue`; a `case`/`default` label resets.
//!
//! The heuristics are deliberately token-level, not a full parse; nested
//! functions and lambdas attribute to their outermost enclosing function.

use serde::Serialize;

use crate::analyzer::{LineSpan, SourceFile, SourceTree};
use crate::normalize;

use super::MetricsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionMetrics {
    pub name: String,
    /// Owning class, or `<toplevel>` for free functions.
    pub class_name: String,
    pub start_line: usize,
    pub max_depth: usize,
    pub complexity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRow {
    pub class_name: String,
    pub methods: usize,
    pub wmc: usize,
    pub loc: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    pub per_function: Vec<(String, usize)>,
    pub file_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileQuality {
    pub path: String,
    pub max_nested_block_depth: usize,
    pub functions: Vec<FunctionMetrics>,
    pub classes: Vec<ClassRow>,
    pub dead_code: Vec<LineSpan>,
    /// Non-blank lines after comment stripping.
    pub loc: u64,
}

pub fn nested_block_depth(file: &SourceFile) -> Result<DepthReport, MetricsError> {
    let q = analyze_file(file)?;
    Ok(DepthReport {
        per_function: q
            .functions
            .iter()
            .map(|f| (f.name.clone(), f.max_depth))
            .collect(),
        file_max: q.max_nested_block_depth,
    })
}

pub fn wmc(file: &SourceFile) -> Result<Vec<ClassRow>, MetricsError> {
    Ok(analyze_file(file)?.classes)
}

pub fn dead_code(file: &SourceFile) -> Result<Vec<LineSpan>, MetricsError> {
    Ok(analyze_file(file)?.dead_code)
}

/// Run every brace-language file in the tree; files with scan errors are
/// reported and skipped.
pub fn analyze_tree(tree: &SourceTree) -> super::CodeQualityMetrics {
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for file in &tree.files {
        if !file.language_tag.is_brace_language() {
            continue;
        }
        match analyze_file(file) {
            Ok(q) => files.push(q),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let rows: Vec<ClassRow> = files.iter().flat_map(|f| f.classes.clone()).collect();
    let wacc = super::wacc(&rows).ok();
    super::CodeQualityMetrics {
        files,
        wacc,
        errors,
    }
}

// ---------------------------------------------------------------------------
// scanner
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    AndAnd,
    OrOr,
    Question,
    ThinArrow,
    FatArrow,
    Sym(char),
}

#[derive(Debug, Clone)]
struct STok {
    tok: Tok,
    line: usize,
}

fn scan_tokens(cleaned: &str) -> Vec<STok> {
    let mut out = Vec::new();
    for (idx, line) in cleaned.lines().enumerate() {
        let line_no = idx + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_alphanumeric() || c == '_' {
                let mut word = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    word.push(chars[i]);
                    i += 1;
                }
                out.push(STok {
                    tok: Tok::Word(word),
                    line: line_no,
                });
                continue;
            }
            let two: Option<Tok> = match (c, chars.get(i + 1)) {
                ('&', Some('&')) => Some(Tok::AndAnd),
                ('|', Some('|')) => Some(Tok::OrOr),
                ('-', Some('>')) => Some(Tok::ThinArrow),
                ('=', Some('>')) => Some(Tok::FatArrow),
                _ => None,
            };
            if let Some(tok) = two {
                out.push(STok { tok, line: line_no });
                i += 2;
                continue;
            }
            let tok = match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ';' => Tok::Semi,
                '?' => Tok::Question,
                other => Tok::Sym(other),
            };
            out.push(STok { tok, line: line_no });
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockKind {
    Function,
    Class,
    When,
    Other,
}

struct Block {
    kind: BlockKind,
    /// Index into `functions` when this is a function body.
    fn_idx: Option<usize>,
    /// Index into `classes` when this is a class body.
    class_idx: Option<usize>,
    dead: bool,
    stmt: StmtState,
}

#[derive(Default)]
struct StmtState {
    active: bool,
    start_line: usize,
    last_line: usize,
    first_word: Option<String>,
    paren_depth: usize,
    /// Statement started while the block was already dead.
    born_dead: bool,
    /// A nested block just closed; an `else`/`catch`/`finally`/`while`
    /// continues the statement, anything else ends it.
    pending_end: bool,
    /// The last token seen could legally end a statement at a line break.
    ended_cleanly: bool,
}

struct FunctionAcc {
    name: String,
    class_idx: Option<usize>,
    start_line: usize,
    body_stack_index: usize,
    max_depth: usize,
    complexity: usize,
}

struct ClassAcc {
    name: String,
    start_line: usize,
    end_line: usize,
    methods: usize,
}

const TERMINATORS: [&str; 4] = ["return", "throw", "break", "continue"];
const CONTROL_HEADS: [&str; 7] = [
    "if",
    "for",
    "while",
    "when",
    "switch",
    "catch",
    "synchronized",
];
const CLASS_KEYWORDS: [&str; 4] = ["class", "interface", "enum", "object"];

/// Single-pass analysis of one brace-language file.
pub fn analyze_file(file: &SourceFile) -> Result<FileQuality, MetricsError> {
    if !file.language_tag.is_brace_language() {
        return Err(MetricsError::NotBraceLanguage {
            path: file.path.clone(),
            tag: file.language_tag.as_str().to_string(),
        });
    }
    let cleaned = normalize::strip_comments_and_strings(&file.raw, file.language_tag);
    let tokens = scan_tokens(&cleaned);

    let mut stack: Vec<Block> = Vec::new();
    let mut header: Vec<STok> = Vec::new();
    let mut functions: Vec<FunctionAcc> = Vec::new();
    let mut classes: Vec<ClassAcc> = Vec::new();
    let mut fn_stack: Vec<usize> = Vec::new();
    let mut class_stack: Vec<usize> = Vec::new();
    let mut dead_spans: Vec<LineSpan> = Vec::new();
    let mut any_block = false;
    let mut last_open_line = 0usize;

    let mut i = 0;
    while i < tokens.len() {
        let st = &tokens[i];
        match &st.tok {
            Tok::LBrace => {
                any_block = true;
                last_open_line = st.line;
                // the opening brace is part of the parent's current statement
                if let Some(parent) = stack.last_mut() {
                    stmt_touch(parent, st.line, None);
                }
                let kind = classify_block(&header, &fn_stack, &class_stack);
                let mut block = Block {
                    kind,
                    fn_idx: None,
                    class_idx: None,
                    dead: false,
                    stmt: StmtState::default(),
                };
                match kind {
                    BlockKind::Function => {
                        let name = function_name(&header);
                        let class_idx = class_stack.last().copied();
                        if let Some(ci) = class_idx {
                            classes[ci].methods += 1;
                        }
                        functions.push(FunctionAcc {
                            name,
                            class_idx,
                            start_line: header.first().map_or(st.line, |t| t.line),
                            body_stack_index: stack.len(),
                            max_depth: 1,
                            complexity: 1,
                        });
                        block.fn_idx = Some(functions.len() - 1);
                        fn_stack.push(functions.len() - 1);
                    }
                    BlockKind::Class => {
                        let name = class_name(&header);
                        classes.push(ClassAcc {
                            name,
                            start_line: header.first().map_or(st.line, |t| t.line),
                            end_line: st.line,
                            methods: 0,
                        });
                        block.class_idx = Some(classes.len() - 1);
                        class_stack.push(classes.len() - 1);
                    }
                    _ => {}
                }
                stack.push(block);
                if let Some(&fi) = fn_stack.last() {
                    let depth = stack.len() - functions[fi].body_stack_index;
                    functions[fi].max_depth = functions[fi].max_depth.max(depth);
                }
                header.clear();
            }
            Tok::RBrace => {
                header.clear();
                let Some(mut block) = stack.pop() else {
                    return Err(MetricsError::UnbalancedBraces {
                        path: file.path.clone(),
                        line: st.line,
                    });
                };
                end_statement(&mut block, &mut dead_spans);
                if let Some(fi) = block.fn_idx {
                    debug_assert_eq!(fn_stack.last(), Some(&fi));
                    fn_stack.pop();
                }
                if let Some(ci) = block.class_idx {
                    classes[ci].end_line = st.line;
                    class_stack.pop();
                }
                if let Some(parent) = stack.last_mut() {
                    if parent.stmt.active {
                        parent.stmt.last_line = st.line;
                        parent.stmt.pending_end = true;
                    }
                }
            }
            tok => {
                header_update(&mut header, st);
                count_decision(tok, i, &tokens, &stack, &fn_stack, &mut functions);
                if let Some(block) = stack.last_mut() {
                    statement_step(block, tok, st.line, &mut dead_spans);
                }
            }
        }
        i += 1;
    }

    if let Some(_unclosed) = stack.last() {
        return Err(MetricsError::UnbalancedBraces {
            path: file.path.clone(),
            line: last_open_line,
        });
    }

    // line counting: non-blank cleaned lines, attributed to the innermost
    // class span or to <toplevel>
    let cleaned_lines: Vec<&str> = cleaned.lines().collect();
    let mut class_loc: Vec<u64> = vec![0; classes.len()];
    let mut toplevel_loc: u64 = 0;
    let mut total_loc: u64 = 0;
    for (idx, line) in cleaned_lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        total_loc += 1;
        let line_no = idx + 1;
        let owner = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| c.start_line <= line_no && line_no <= c.end_line)
            .min_by_key(|(_, c)| c.end_line - c.start_line)
            .map(|(ci, _)| ci);
        match owner {
            Some(ci) => class_loc[ci] += 1,
            None => toplevel_loc += 1,
        }
    }

    let mut rows: Vec<ClassRow> = classes
        .iter()
        .enumerate()
        .map(|(ci, c)| ClassRow {
            class_name: c.name.clone(),
            methods: c.methods,
            wmc: functions
                .iter()
                .filter(|f| f.class_idx == Some(ci))
                .map(|f| f.complexity)
                .sum(),
            loc: class_loc[ci],
        })
        .collect();
    let toplevel_methods = functions.iter().filter(|f| f.class_idx.is_none()).count();
    if toplevel_methods > 0 {
        rows.push(ClassRow {
            class_name: "<toplevel>".to_string(),
            methods: toplevel_methods,
            wmc: functions
                .iter()
                .filter(|f| f.class_idx.is_none())
                .map(|f| f.complexity)
                .sum(),
            loc: toplevel_loc,
        });
    }

    let fn_max = functions.iter().map(|f| f.max_depth).max().unwrap_or(0);
    let file_max = if any_block { fn_max.max(1) } else { 0 };

    dead_spans.sort();
    Ok(FileQuality {
        path: file.path.clone(),
        max_nested_block_depth: file_max,
        functions: functions
            .iter()
            .map(|f| FunctionMetrics {
                name: f.name.clone(),
                class_name: f
                    .class_idx
                    .map(|ci| classes[ci].name.clone())
                    .unwrap_or_else(|| "<toplevel>".to_string()),
                start_line: f.start_line,
                max_depth: f.max_depth,
                complexity: f.complexity,
            })
            .collect(),
        classes: rows,
        dead_code: dead_spans,
        loc: total_loc,
    })
}

/// Header state: tokens seen since the last `{`, `}`, or statement end.
fn header_update(header: &mut Vec<STok>, st: &STok) {
    if st.tok == Tok::Semi {
        header.clear();
    } else {
        header.push(st.clone());
    }
}

fn word(tok: &Tok) -> Option<&str> {
    match tok {
        Tok::Word(w) => Some(w.as_str()),
        _ => None,
    }
}

fn classify_block(header: &[STok], fn_stack: &[usize], class_stack: &[usize]) -> BlockKind {
    let words: Vec<&str> = header.iter().filter_map(|t| word(&t.tok)).collect();

    // class-ish declaration with a name after the keyword
    for kw in CLASS_KEYWORDS {
        if let Some(pos) = words.iter().position(|w| *w == kw) {
            if words.get(pos + 1).is_some() {
                return BlockKind::Class;
            }
        }
    }

    let last = header.last().map(|t| &t.tok);

    // `when {` / `switch ... {` mark a branch block for `->` counting
    let is_when_head = |n: Option<&str>| matches!(n, Some("when") | Some("switch"));

    if let Some(Tok::RParen) = last {
        // `... name ( ... ) {`
        if let Some(name) = ident_before_args(header) {
            if CONTROL_HEADS.contains(&name) {
                return if is_when_head(Some(name)) {
                    BlockKind::When
                } else {
                    BlockKind::Other
                };
            }
            if fn_stack.is_empty() {
                let declares = words.iter().any(|w| *w == "fun" || *w == "function")
                    || name == "constructor"
                    || !class_stack.is_empty() && method_like(header, name)
                    || header_has_type_before(header, name);
                if declares {
                    return BlockKind::Function;
                }
            }
        }
        return BlockKind::Other;
    }

    if matches!(last, Some(Tok::FatArrow) | Some(Tok::ThinArrow)) {
        // `(...) => {` arrow function (function only at the outermost level)
        return if fn_stack.is_empty() && matches!(last, Some(Tok::FatArrow)) {
            BlockKind::Function
        } else {
            BlockKind::Other
        };
    }

    match words.last() {
        Some(&"when") | Some(&"switch") => BlockKind::When,
        Some(&"else") | Some(&"try") | Some(&"do") | Some(&"finally") => BlockKind::Other,
        _ => {
            if fn_stack.is_empty() && words.iter().any(|w| *w == "fun" || *w == "function") {
                // `fun name() = run {` style bodies still count as the function
                return BlockKind::Function;
            }
            BlockKind::Other
        }
    }
}

/// Identifier immediately before the argument list that the header ends with.
fn ident_before_args(header: &[STok]) -> Option<&str> {
    debug_assert!(matches!(header.last().map(|t| &t.tok), Some(Tok::RParen)));
    let mut depth = 0usize;
    for idx in (0..header.len()).rev() {
        match &header[idx].tok {
            Tok::RParen => depth += 1,
            Tok::LParen => {
                depth -= 1;
                if depth == 0 {
                    return idx.checked_sub(1).and_then(|j| word(&header[j].tok));
                }
            }
            _ => {}
        }
    }
    None
}

/// `Name() {` directly inside a class body reads as a method declaration.
fn method_like(header: &[STok], name: &str) -> bool {
    // the header must start at the name or at modifier words before it
    header
        .iter()
        .take_while(|t| word(&t.tok) != Some(name))
        .all(|t| word(&t.tok).is_some())
}

/// `Type name() {` (java-like) — a word right before the name.
fn header_has_type_before(header: &[STok], name: &str) -> bool {
    let mut prev: Option<&STok> = None;
    for t in header {
        if word(&t.tok) == Some(name) {
            if let Some(p) = prev {
                return word(&p.tok).is_some_and(|w| {
                    !CONTROL_HEADS.contains(&w) && !TERMINATORS.contains(&w) && w != "new"
                });
            }
            return false;
        }
        prev = Some(t);
    }
    false
}

fn function_name(header: &[STok]) -> String {
    // prefer the identifier before the parameter list
    if matches!(header.last().map(|t| &t.tok), Some(Tok::RParen)) {
        if let Some(name) = ident_before_args(header) {
            if name != "fun" && name != "function" {
                return name.to_string();
            }
        }
    }
    // arrow function: identifier before `=`
    if matches!(header.last().map(|t| &t.tok), Some(Tok::FatArrow)) {
        let mut last_ident = None;
        for t in header {
            match &t.tok {
                Tok::Word(w) => last_ident = Some(w.clone()),
                Tok::Sym('=') => break,
                _ => {}
            }
        }
        if let Some(n) = last_ident {
            return n;
        }
    }
    // `fun name(...) = ... {` or degenerate headers
    let words: Vec<&str> = header.iter().filter_map(|t| word(&t.tok)).collect();
    if let Some(pos) = words.iter().position(|w| *w == "fun" || *w == "function") {
        if let Some(n) = words.get(pos + 1) {
            return n.to_string();
        }
    }
    "<anonymous>".to_string()
}

fn class_name(header: &[STok]) -> String {
    let words: Vec<&str> = header.iter().filter_map(|t| word(&t.tok)).collect();
    for kw in CLASS_KEYWORDS {
        if let Some(pos) = words.iter().position(|w| *w == kw) {
            if let Some(n) = words.get(pos + 1) {
                return n.to_string();
            }
        }
    }
    "<anonymous>".to_string()
}

fn count_decision(
    tok: &Tok,
    i: usize,
    tokens: &[STok],
    stack: &[Block],
    fn_stack: &[usize],
    functions: &mut [FunctionAcc],
) {
    let Some(&fi) = fn_stack.last() else { return };
    let next = tokens.get(i + 1).map(|t| &t.tok);
    let prev = i.checked_sub(1).and_then(|j| tokens.get(j)).map(|t| &t.tok);
    let counts = match tok {
        Tok::Word(w) => matches!(w.as_str(), "if" | "for" | "while" | "catch" | "case"),
        Tok::AndAnd | Tok::OrOr => true,
        Tok::Question => !matches!(
            next,
            Some(Tok::Sym('.')) | Some(Tok::Sym(':')) | Some(Tok::Question)
        ),
        Tok::ThinArrow => {
            stack.last().is_some_and(|b| b.kind == BlockKind::When)
                && word(prev.unwrap_or(&Tok::Semi)) != Some("else")
        }
        _ => false,
    };
    if counts {
        functions[fi].complexity += 1;
    }
}

// --- statement machine (dead code) -----------------------------------------

fn stmt_touch(block: &mut Block, line: usize, first_word: Option<&str>) {
    if !block.stmt.active {
        block.stmt.active = true;
        block.stmt.start_line = line;
        block.stmt.first_word = first_word.map(str::to_string);
        // a switch label resets the dead region before the statement is judged
        if matches!(first_word, Some("case") | Some("default")) {
            block.dead = false;
        }
        block.stmt.born_dead = block.dead;
        block.stmt.paren_depth = 0;
        block.stmt.pending_end = false;
    }
    block.stmt.last_line = line;
}

fn end_statement(block: &mut Block, dead_spans: &mut Vec<LineSpan>) {
    if !block.stmt.active {
        return;
    }
    if block.stmt.born_dead {
        dead_spans.push(LineSpan {
            start: block.stmt.start_line,
            end: block.stmt.last_line,
        });
    }
    if block
        .stmt
        .first_word
        .as_deref()
        .is_some_and(|w| TERMINATORS.contains(&w))
    {
        block.dead = true;
    }
    block.stmt = StmtState::default();
}

fn continues_statement(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Sym('.')
            | Tok::Sym(':')
            | Tok::Sym(',')
            | Tok::Sym('=')
            | Tok::Sym('+')
            | Tok::Sym('-')
            | Tok::Sym('*')
            | Tok::Sym('/')
            | Tok::AndAnd
            | Tok::OrOr
            | Tok::Question
            | Tok::ThinArrow
            | Tok::FatArrow
    )
}

fn ends_line_cleanly(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Word(_) | Tok::RParen | Tok::RBracket | Tok::Sym('"') | Tok::Sym('\'') | Tok::Sym('`')
    )
}

fn statement_step(block: &mut Block, tok: &Tok, line: usize, dead_spans: &mut Vec<LineSpan>) {
    if block.stmt.active && block.stmt.pending_end {
        // a nested block just closed; only a chain keyword keeps the statement
        let chains = matches!(
            word(tok),
            Some("else") | Some("catch") | Some("finally") | Some("while")
        );
        if chains {
            block.stmt.pending_end = false;
        } else {
            end_statement(block, dead_spans);
        }
    } else if block.stmt.active
        && line > block.stmt.last_line
        && block.stmt.paren_depth == 0
        && !continues_statement(tok)
    {
        // newline boundary: the previous line must have ended cleanly
        if block.stmt.ended_cleanly {
            end_statement(block, dead_spans);
        }
    }

    stmt_touch(block, line, word(tok));
    match tok {
        Tok::LParen | Tok::LBracket => block.stmt.paren_depth += 1,
        Tok::RParen | Tok::RBracket => {
            block.stmt.paren_depth = block.stmt.paren_depth.saturating_sub(1)
        }
        Tok::Semi => {
            if block.stmt.paren_depth == 0 {
                end_statement(block, dead_spans);
            }
        }
        // `case X:` / `default:` are labels, not part of the next statement
        Tok::Sym(':')
            if block.stmt.paren_depth == 0
                && matches!(
                    block.stmt.first_word.as_deref(),
                    Some("case") | Some("default")
                ) =>
        {
            end_statement(block, dead_spans);
        }
        _ => {}
    }
    if block.stmt.active {
        block.stmt.ended_cleanly = ends_line_cleanly(tok) && block.stmt.paren_depth == 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::LanguageTag;

    pub(crate) const REQ_1289_LISTING: &str = "\
fun main() {
    try {
        throw IllegalStateException(\"Incorrect Typecast\")
        println(\"State Exception: Check REQ-1289\")
    }
    catch (exc: Throwable) {
        println(\"DEBUG: Something went wrong\")
    }
}
";

    fn kt(text: &str) -> SourceFile {
        SourceFile::from_text("test.kt", LanguageTag::KotlinLike, text.to_string())
    }

    fn js(text: &str) -> SourceFile {
        SourceFile::from_text("test.js", LanguageTag::JsLike, text.to_string())
    }

    #[test]
    fn req_1289_depth_is_two() {
        let report = nested_block_depth(&kt(REQ_1289_LISTING)).unwrap();
        assert_eq!(report.per_function, vec![("main".to_string(), 2)]);
        assert_eq!(report.file_max, 2);
    }

    #[test]
    fn req_1289_wmc_is_two() {
        // one function, one catch: complexity 1 + 1
        let rows = wmc(&kt(REQ_1289_LISTING)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].class_name, "<toplevel>");
        assert_eq!(rows[0].methods, 1);
        assert_eq!(rows[0].wmc, 2);
    }

    #[test]
    fn req_1289_has_one_dead_statement() {
        let spans = dead_code(&kt(REQ_1289_LISTING)).unwrap();
        assert_eq!(spans, vec![LineSpan { start: 4, end: 4 }]);
    }

    #[test]
    fn single_empty_function_is_depth_one() {
        let report = nested_block_depth(&kt("fun empty() {\n}\n")).unwrap();
        assert_eq!(report.per_function, vec![("empty".to_string(), 1)]);
        assert_eq!(report.file_max, 1);
    }

    #[test]
    fn braces_in_strings_are_ignored() {
        let with = kt("fun f() {\n    val s = \"{ nested { deep } }\"\n}\n");
        let without = kt("fun f() {\n    val s = \"flat\"\n}\n");
        assert_eq!(
            nested_block_depth(&with).unwrap(),
            nested_block_depth(&without).unwrap()
        );
    }

    #[test]
    fn class_with_three_straight_line_methods_has_wmc_three() {
        let src = "\
class Calculator {
    fun add(a: Int, b: Int): Int {
        return a + b
    }
    fun sub(a: Int, b: Int): Int {
        return a - b
    }
    fun neg(a: Int): Int {
        return -a
    }
}
";
        let rows = wmc(&kt(src)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].class_name, "Calculator");
        assert_eq!(rows[0].methods, 3);
        assert_eq!(rows[0].wmc, 3);
    }

    #[test]
    fn empty_file_has_no_rows() {
        let q = analyze_file(&kt("")).unwrap();
        assert!(q.classes.is_empty());
        assert!(q.functions.is_empty());
        assert_eq!(q.max_nested_block_depth, 0);
    }

    #[test]
    fn unbalanced_braces_are_reported_with_line() {
        match analyze_file(&kt("fun f() {\n    if (x) {\n}\n")) {
            Err(MetricsError::UnbalancedBraces { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match analyze_file(&kt("fun f() { }\n}\n")) {
            Err(MetricsError::UnbalancedBraces { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decision_tokens_count_once_each() {
        let src = "\
fun decide(a: Int, b: Int): Int {
    if (a > 0 && b > 0) {
        return 1
    } else if (a < 0 || b < 0) {
        return 2
    }
    for (i in 0..a) {
        while (b > i) {
            return 3
        }
    }
    return 4
}
";
        // 1 + if + && + if + || + for + while = 7
        let rows = wmc(&kt(src)).unwrap();
        assert_eq!(rows[0].wmc, 7);
    }

    #[test]
    fn when_branches_count_but_else_branch_does_not() {
        let src = "\
fun pick(x: Int): String {
    return when (x) {
        1 -> \"one\"
        2 -> \"two\"
        else -> \"many\"
    }
}
";
        // 1 + two non-else branches = 3
        let rows = wmc(&kt(src)).unwrap();
        assert_eq!(rows[0].wmc, 3);
    }

    #[test]
    fn switch_cases_count_in_js() {
        let src = "\
function pick(x) {
    switch (x) {
        case 1:
            return 'one';
        case 2:
            return 'two';
        default:
            return 'many';
    }
}
";
        let rows = wmc(&js(src)).unwrap();
        assert_eq!(rows[0].wmc, 3); // 1 + case + case
    }

    #[test]
    fn ternary_counts_in_js() {
        let rows = wmc(&js("function f(a) {\n    return a > 0 ? a : -a;\n}\n")).unwrap();
        assert_eq!(rows[0].wmc, 2);
    }

    #[test]
    fn optional_chaining_does_not_count() {
        let rows = wmc(&js("function f(a) {\n    return a?.b;\n}\n")).unwrap();
        assert_eq!(rows[0].wmc, 1);
    }

    #[test]
    fn dead_code_requires_a_terminator() {
        assert!(
            dead_code(&kt("fun f() {\n    val a = 1\n    val b = 2\n}\n"))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn terminator_last_in_block_flags_nothing() {
        assert!(
            dead_code(&kt("fun f(): Int {\n    val a = 1\n    return a\n}\n"))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn multiple_dead_statements_each_get_a_span() {
        let spans = dead_code(&kt(
            "fun f(): Int {\n    return 1\n    val a = 2\n    val b = 3\n}\n",
        ))
        .unwrap();
        assert_eq!(
            spans,
            vec![LineSpan { start: 3, end: 3 }, LineSpan { start: 4, end: 4 }]
        );
    }

    #[test]
    fn case_label_resets_dead_state() {
        let src = "\
function f(x) {
    switch (x) {
        case 1:
            doOne();
            break;
        case 2:
            doTwo();
            break;
    }
}
";
        assert!(dead_code(&js(src)).unwrap().is_empty());
    }

    #[test]
    fn return_inside_case_kills_only_that_case() {
        let src = "\
function f(x) {
    switch (x) {
        case 1:
            return one();
            never();
        case 2:
            return two();
    }
}
";
        let spans = dead_code(&js(src)).unwrap();
        assert_eq!(spans, vec![LineSpan { start: 5, end: 5 }]);
    }

    #[test]
    fn conditional_return_does_not_kill_the_block() {
        let src = "\
fun f(x: Int): Int {
    if (x > 0) {
        return x
    }
    return -x
}
";
        assert!(dead_code(&kt(src)).unwrap().is_empty());
    }

    #[test]
    fn dead_nested_block_is_one_span() {
        let spans = dead_code(&js(
            "function f() {\n    return 1;\n    if (x) {\n        y();\n    }\n}\n",
        ))
        .unwrap();
        assert_eq!(spans, vec![LineSpan { start: 3, end: 5 }]);
    }

    #[test]
    fn js_class_methods_are_counted() {
        let src = "\
class Greeter {
    greet(name) {
        return 'hi ' + name;
    }
    shout(name) {
        if (name) {
            return name + '!';
        }
        return '!';
    }
}
";
        let rows = wmc(&js(src)).unwrap();
        assert_eq!(rows[0].methods, 2);
        assert_eq!(rows[0].wmc, 3);
    }

    #[test]
    fn nested_function_attributes_to_outer() {
        let src = "\
function outer(a) {
    const helper = (b) => {
        if (b) {
            return 1;
        }
        return 0;
    };
    return helper(a);
}
";
        let q = analyze_file(&js(src)).unwrap();
        assert_eq!(q.functions.len(), 1);
        assert_eq!(q.functions[0].name, "outer");
        assert_eq!(q.functions[0].complexity, 2); // the inner if
        assert_eq!(q.functions[0].max_depth, 3); // body > arrow body > if
    }

    #[test]
    fn wmc_is_at_least_methods_per_class() {
        let src = "class A {\n    fun a() { }\n    fun b() { if (x) { } }\n}\n";
        let rows = wmc(&kt(src)).unwrap();
        assert!(rows[0].wmc >= rows[0].methods);
    }

    #[test]
    fn class_loc_is_attributed_to_innermost_class() {
        let src = "\
class Outer {
    fun o() { }
}

fun free() {
    val x = 1
}
";
        let q = analyze_file(&kt(src)).unwrap();
        let outer = q.classes.iter().find(|c| c.class_name == "Outer").unwrap();
        let top = q
            .classes
            .iter()
            .find(|c| c.class_name == "<toplevel>")
            .unwrap();
        assert_eq!(outer.loc, 3);
        assert_eq!(top.loc, 3);
        assert_eq!(q.loc, 6);
    }

    #[test]
    fn non_brace_language_is_rejected() {
        let css = SourceFile::from_text("a.css", LanguageTag::Css, ".a { }".into());
        assert!(matches!(
            analyze_file(&css),
            Err(MetricsError::NotBraceLanguage { .. })
        ));
    }
}
