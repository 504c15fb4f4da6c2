//! A small CSS rule-block model: enough structure to ask "does selector S
//! declare property P with value V". Handles nested at-rule bodies by
//! descending into them; at-rule preludes themselves are not selectors.

/// One `selector { prop: value; ... }` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssRule {
    /// Selector text, whitespace-collapsed.
    pub selector: String,
    pub declarations: Vec<CssDeclaration>,
    /// 1-based line of the selector.
    pub start_line: usize,
    /// 1-based line of the closing brace.
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CssDeclaration {
    /// Lowercased property name.
    pub property: String,
    /// Value text, whitespace-collapsed.
    pub value: String,
    pub line: usize,
}

impl CssRule {
    /// True if any comma-separated component of the selector equals `sel`
    /// after whitespace collapsing.
    pub fn selector_matches(&self, sel: &str) -> bool {
        let want = crate::normalize::collapse_whitespace(sel);
        self.selector
            .split(',')
            .any(|part| crate::normalize::collapse_whitespace(part) == want)
    }
}

/// Parse comment-stripped CSS text into rule blocks, in document order.
/// Unparseable trailing garbage is ignored; this is a matcher, not a linter.
pub fn parse_rules(text: &str) -> Vec<CssRule> {
    let mut rules = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut line = 1;
    let mut i = 0;
    parse_block_contents(&chars, &mut i, &mut line, &mut rules);
    rules
}

fn parse_block_contents(chars: &[char], i: &mut usize, line: &mut usize, out: &mut Vec<CssRule>) {
    let mut prelude = String::new();
    let mut prelude_line = *line;
    while *i < chars.len() {
        let ch = chars[*i];
        match ch {
            '\n' => {
                *line += 1;
                prelude.push(' ');
                *i += 1;
            }
            '{' => {
                *i += 1;
                let selector = crate::normalize::collapse_whitespace(&prelude);
                if selector.starts_with('@') {
                    // at-rule with a body: recurse so inner rules are visible
                    parse_block_contents(chars, i, line, out);
                } else {
                    let start_line = prelude_line;
                    let (declarations, end_line) = parse_declarations(chars, i, line);
                    out.push(CssRule {
                        selector,
                        declarations,
                        start_line,
                        end_line,
                    });
                }
                prelude = String::new();
                prelude_line = *line;
            }
            '}' => {
                *i += 1;
                return;
            }
            ';' => {
                // at-rule without a body (`@import ...;`)
                prelude = String::new();
                *i += 1;
                prelude_line = *line;
            }
            _ => {
                if prelude.trim().is_empty() && !ch.is_whitespace() {
                    prelude_line = *line;
                }
                prelude.push(ch);
                *i += 1;
            }
        }
    }
}

fn parse_declarations(
    chars: &[char],
    i: &mut usize,
    line: &mut usize,
) -> (Vec<CssDeclaration>, usize) {
    let mut decls = Vec::new();
    let mut buf = String::new();
    let mut buf_line = *line;
    let mut depth = 0usize;
    loop {
        if *i >= chars.len() {
            flush_declaration(&buf, buf_line, &mut decls);
            return (decls, *line);
        }
        let ch = chars[*i];
        *i += 1;
        match ch {
            '\n' => {
                *line += 1;
                buf.push(' ');
            }
            '{' => {
                // nested block inside a rule body (non-standard); skip it
                depth += 1;
                buf.push(ch);
            }
            '}' => {
                if depth == 0 {
                    flush_declaration(&buf, buf_line, &mut decls);
                    return (decls, *line);
                }
                depth -= 1;
                buf.push(ch);
            }
            ';' if depth == 0 => {
                flush_declaration(&buf, buf_line, &mut decls);
                buf.clear();
                buf_line = *line;
            }
            _ => {
                if buf.trim().is_empty() && !ch.is_whitespace() {
                    buf_line = *line;
                }
                buf.push(ch);
            }
        }
    }
}

fn flush_declaration(buf: &str, line: usize, decls: &mut Vec<CssDeclaration>) {
    let trimmed = buf.trim();
    if trimmed.is_empty() {
        return;
    }
    if let Some((prop, value)) = trimmed.split_once(':') {
        let property = prop.trim().to_ascii_lowercase();
        if property.is_empty() {
            return;
        }
        decls.push(CssDeclaration {
            property,
            value: crate::normalize::collapse_whitespace(value),
            line,
        });
    }
}
