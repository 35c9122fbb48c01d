//! Brace-structured scanner for C/C++, Java, and JavaScript/TypeScript.
//!
//! Two passes. The first sanitizes the source byte-for-byte: comments,
//! string/char/template-literal interiors, regex literals, and preprocessor
//! lines become spaces (newlines kept), so the second pass sees only
//! structure. The second pass walks braces, classifies each block from the
//! statement header preceding its `{`, and keeps a scope stack of named
//! containers and functions to build dotted qualified names.
//!
//! Known non-goals, all deterministic: operator overloads, lambdas, function
//! expressions inside argument lists, and expression-bodied arrows are not
//! enumerated as named definitions.

use super::FunctionDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LangKind {
    CCpp,
    Java,
    JsTs,
}

#[derive(Debug, Clone, Copy)]
pub struct Profile {
    kind: LangKind,
    preprocessor: bool,
    template_literals: bool,
    regex_literals: bool,
    container_keywords: &'static [&'static str],
    reserved: &'static [&'static str],
}

impl Profile {
    pub fn c_cpp() -> Self {
        Profile {
            kind: LangKind::CCpp,
            preprocessor: true,
            template_literals: false,
            regex_literals: false,
            container_keywords: &["namespace", "class", "struct", "union", "enum"],
            reserved: &[
                "if", "else", "for", "while", "do", "switch", "case", "return", "goto",
                "sizeof", "typedef", "break", "continue", "new", "delete", "throw", "catch",
                "try", "using", "static_assert", "alignas", "alignof", "decltype",
                "constexpr", "consteval", "constinit", "noexcept", "requires", "operator",
                "defined", "_Static_assert", "and", "or", "not",
            ],
        }
    }

    pub fn java() -> Self {
        Profile {
            kind: LangKind::Java,
            preprocessor: false,
            template_literals: false,
            regex_literals: false,
            container_keywords: &["class", "interface", "enum", "record"],
            reserved: &[
                "if", "else", "for", "while", "do", "switch", "case", "return", "new",
                "throw", "try", "catch", "finally", "synchronized", "assert", "instanceof",
                "break", "continue",
            ],
        }
    }

    pub fn js_ts() -> Self {
        Profile {
            kind: LangKind::JsTs,
            preprocessor: false,
            template_literals: true,
            regex_literals: true,
            container_keywords: &["class", "namespace", "module", "interface"],
            reserved: &[
                "if", "else", "for", "while", "do", "switch", "case", "return", "new",
                "throw", "try", "catch", "finally", "typeof", "instanceof", "delete",
                "void", "in", "of", "await", "yield", "with",
            ],
        }
    }
}

const REGEX_PRECEDING_KEYWORDS: &[&str] = &[
    "return", "typeof", "case", "in", "of", "delete", "void", "throw", "do", "else",
    "instanceof", "new", "await", "yield",
];

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

/// Replaces comments, literal interiors, and preprocessor lines with spaces,
/// preserving byte offsets and newlines.
fn sanitize(src: &[u8], p: &Profile) -> Vec<u8> {
    #[derive(PartialEq)]
    enum State {
        Code,
        LineComment,
        BlockComment,
        Str(u8),
        Regex { in_class: bool },
        Template,
        Preproc,
    }
    let n = src.len();
    let mut out = src.to_vec();
    let mut state = State::Code;
    // Open `${}` interpolations; value is the extra brace depth inside each.
    let mut interps: Vec<u32> = Vec::new();
    let mut line_start = true;
    // Last significant copied byte and the identifier ending at it, for the
    // regex-vs-division heuristic.
    let mut last_sig: Option<u8> = None;
    let mut word = String::new();
    let mut i = 0usize;

    let blank = |out: &mut [u8], idx: usize| {
        if out[idx] != b'\n' {
            out[idx] = b' ';
        }
    };

    while i < n {
        let c = src[i];
        match state {
            State::Code => {
                let in_interp = !interps.is_empty();
                if c == b'/' && i + 1 < n && src[i + 1] == b'/' {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    state = State::LineComment;
                    continue;
                }
                if c == b'/' && i + 1 < n && src[i + 1] == b'*' {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    state = State::BlockComment;
                    continue;
                }
                if c == b'"' || c == b'\'' {
                    if in_interp {
                        blank(&mut out, i);
                    }
                    state = State::Str(c);
                    i += 1;
                    continue;
                }
                if p.template_literals && c == b'`' {
                    if in_interp {
                        blank(&mut out, i);
                    }
                    state = State::Template;
                    i += 1;
                    continue;
                }
                if p.regex_literals
                    && c == b'/'
                    && regex_can_start(last_sig, &word)
                {
                    blank(&mut out, i);
                    state = State::Regex { in_class: false };
                    i += 1;
                    continue;
                }
                if p.preprocessor && c == b'#' && line_start {
                    blank(&mut out, i);
                    state = State::Preproc;
                    i += 1;
                    continue;
                }
                if in_interp {
                    match c {
                        b'{' => *interps.last_mut().unwrap() += 1,
                        b'}' => {
                            let depth = interps.last_mut().unwrap();
                            if *depth == 0 {
                                interps.pop();
                                state = State::Template;
                            } else {
                                *depth -= 1;
                            }
                        }
                        _ => {}
                    }
                    blank(&mut out, i);
                } else {
                    if !c.is_ascii_whitespace() {
                        last_sig = Some(c);
                        if is_ident_byte(c) {
                            word.push(c as char);
                        } else {
                            word.clear();
                        }
                    } else if !word.is_empty() && last_sig.map(is_ident_byte) != Some(true) {
                        word.clear();
                    }
                }
                line_start = c == b'\n' || (line_start && c.is_ascii_whitespace());
                i += 1;
            }
            State::LineComment => {
                if c == b'\n' {
                    state = State::Code;
                    line_start = true;
                } else {
                    blank(&mut out, i);
                }
                i += 1;
            }
            State::BlockComment => {
                if c == b'*' && i + 1 < n && src[i + 1] == b'/' {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    state = State::Code;
                    continue;
                }
                blank(&mut out, i);
                i += 1;
            }
            State::Str(q) => {
                if c == b'\\' && i + 1 < n {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    continue;
                }
                if c == q {
                    if !interps.is_empty() {
                        blank(&mut out, i);
                    }
                    state = State::Code;
                    i += 1;
                    continue;
                }
                if c == b'\n' {
                    // Unterminated literal; resynchronize at end of line.
                    state = State::Code;
                    line_start = true;
                    i += 1;
                    continue;
                }
                blank(&mut out, i);
                i += 1;
            }
            State::Regex { in_class } => {
                blank(&mut out, i);
                if c == b'\\' && i + 1 < n {
                    blank(&mut out, i + 1);
                    i += 2;
                    continue;
                }
                match c {
                    b'[' => state = State::Regex { in_class: true },
                    b']' => state = State::Regex { in_class: false },
                    b'/' if !in_class => state = State::Code,
                    b'\n' => {
                        state = State::Code;
                        line_start = true;
                    }
                    _ => {}
                }
                i += 1;
            }
            State::Template => {
                if c == b'\\' && i + 1 < n {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    i += 2;
                    continue;
                }
                if c == b'`' {
                    if !interps.is_empty() {
                        blank(&mut out, i);
                    }
                    state = State::Code;
                    i += 1;
                    continue;
                }
                if c == b'$' && i + 1 < n && src[i + 1] == b'{' {
                    blank(&mut out, i);
                    blank(&mut out, i + 1);
                    interps.push(0);
                    state = State::Code;
                    i += 2;
                    continue;
                }
                blank(&mut out, i);
                i += 1;
            }
            State::Preproc => {
                if c == b'\n' {
                    // A trailing backslash continues the directive.
                    let mut j = i;
                    while j > 0 && src[j - 1] == b'\r' {
                        j -= 1;
                    }
                    if !(j > 0 && src[j - 1] == b'\\') {
                        state = State::Code;
                        line_start = true;
                    }
                } else {
                    blank(&mut out, i);
                }
                i += 1;
            }
        }
    }
    out
}

fn regex_can_start(last_sig: Option<u8>, word: &str) -> bool {
    if REGEX_PRECEDING_KEYWORDS.contains(&word) {
        return true;
    }
    match last_sig {
        None => true,
        Some(b) if is_ident_byte(b) => false,
        Some(b) => matches!(
            b,
            b'(' | b',' | b'=' | b':' | b'[' | b'!' | b'&' | b'|' | b'?' | b'{' | b'}'
                | b';' | b'+' | b'-' | b'*' | b'%' | b'<' | b'>' | b'^' | b'~'
        ),
    }
}

fn tokens(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if is_ident_byte(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_ident_byte(bytes[i]) {
                i += 1;
            }
            out.push(&text[start..i]);
        } else {
            i += 1;
        }
    }
    out
}

/// Removes `<...>` spans so template/generic parameters cannot masquerade as
/// container keywords or names.
fn strip_angles(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0i32;
    for ch in text.chars() {
        match ch {
            '<' => depth += 1,
            '>' => depth = (depth - 1).max(0),
            _ if depth == 0 => out.push(ch),
            _ => {}
        }
    }
    out
}

fn container_name(header: &str, p: &Profile) -> Option<Option<String>> {
    let stripped = strip_angles(header);
    let toks = tokens(&stripped);
    let kw_idx = toks
        .iter()
        .position(|t| p.container_keywords.contains(t))?;
    let mut name = None;
    for tok in &toks[kw_idx + 1..] {
        if *tok == "extends" || *tok == "implements" {
            break;
        }
        if p.container_keywords.contains(tok) || p.reserved.contains(tok) {
            continue;
        }
        if tok.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            continue;
        }
        name = Some(tok.to_string());
    }
    Some(name)
}

/// Byte ranges of complete `(...)` groups at depth zero within the header.
fn top_level_groups(header: &[u8]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (i, &b) in header.iter().enumerate() {
        match b {
            b'(' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b')' => {
                depth -= 1;
                if depth == 0 {
                    groups.push((start, i));
                }
                depth = depth.max(0);
            }
            _ => {}
        }
    }
    groups
}

fn trailer_ok(p: &Profile, trailer: &str) -> bool {
    let t = trailer.trim();
    if t.is_empty() {
        return true;
    }
    match p.kind {
        LangKind::JsTs => t.starts_with(':'),
        LangKind::Java => t.starts_with("throws")
            && t["throws".len()..]
                .chars()
                .next()
                .is_none_or(|c| !is_ident_byte(c as u8)),
        LangKind::CCpp => {
            if t.starts_with("->") || t.starts_with(':') {
                return true;
            }
            let mut rest = t;
            loop {
                rest = rest.trim_start();
                if rest.is_empty() {
                    return true;
                }
                if let Some(r) = rest.strip_prefix("&&") {
                    rest = r;
                    continue;
                }
                if let Some(r) = rest.strip_prefix('&') {
                    rest = r;
                    continue;
                }
                if rest.starts_with("->") || rest.starts_with(':') {
                    return true;
                }
                if rest.starts_with("[[") {
                    match rest.find("]]") {
                        Some(end) => {
                            rest = &rest[end + 2..];
                            continue;
                        }
                        None => return false,
                    }
                }
                let word_end = rest
                    .find(|c: char| !is_ident_byte(c as u8))
                    .unwrap_or(rest.len());
                let word = &rest[..word_end];
                match word {
                    "const" | "noexcept" | "override" | "final" | "mutable" | "volatile"
                    | "throw" => {
                        rest = &rest[word_end..];
                        let trimmed = rest.trim_start();
                        if trimmed.starts_with('(') {
                            match trimmed.find(')') {
                                Some(close) => {
                                    let skip = rest.len() - trimmed.len() + close + 1;
                                    rest = &rest[skip..];
                                }
                                None => return false,
                            }
                        }
                    }
                    _ => return false,
                }
            }
        }
    }
}

fn prev_nonws(bytes: &[u8], mut idx: usize) -> Option<(usize, u8)> {
    while idx > 0 {
        idx -= 1;
        if !bytes[idx].is_ascii_whitespace() {
            return Some((idx, bytes[idx]));
        }
    }
    None
}

fn word_ending_at(bytes: &[u8], end: usize) -> String {
    let mut start = end;
    while start > 0 && is_ident_byte(bytes[start - 1]) {
        start -= 1;
    }
    String::from_utf8_lossy(&bytes[start..end]).into_owned()
}

/// Scans a candidate name backwards from the argument-list `(`.
fn name_before(bytes: &[u8], group_start: usize, p: &Profile) -> Option<(usize, String)> {
    let (mut idx, _) = prev_nonws(bytes, group_start)?;
    let end = idx + 1;
    let allow_colon = p.kind == LangKind::CCpp;
    loop {
        let b = bytes[idx];
        let ok = is_ident_byte(b) || (allow_colon && (b == b':' || b == b'~'));
        if !ok {
            idx += 1;
            break;
        }
        if idx == 0 {
            break;
        }
        idx -= 1;
    }
    if idx >= end {
        return None;
    }
    let name = String::from_utf8_lossy(&bytes[idx..end]).into_owned();
    // Every :: segment must be a plausible identifier; destructors keep ~.
    let mut valid = !name.is_empty();
    for (s_idx, segment) in name.split("::").enumerate() {
        let segment = segment.strip_prefix('~').unwrap_or(segment);
        if segment.is_empty() {
            // A leading :: (global qualifier) is allowed.
            valid &= s_idx == 0 && name.starts_with("::");
            continue;
        }
        valid &= !segment.chars().next().unwrap().is_ascii_digit()
            && segment.bytes().all(is_ident_byte);
    }
    if !valid {
        return None;
    }
    Some((idx, name))
}

/// Name of an assigned function expression: the identifier before the last
/// top-level `=` in the header, last dotted segment.
fn assignment_target(header: &[u8], before: usize) -> Option<String> {
    let mut depth = 0i32;
    let mut eq_pos = None;
    let mut i = 0usize;
    while i < before {
        match header[i] {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth = (depth - 1).max(0),
            b'=' if depth == 0 => {
                let prev = if i > 0 { header[i - 1] } else { b' ' };
                let next = if i + 1 < before { header[i + 1] } else { b' ' };
                if !matches!(prev, b'=' | b'!' | b'<' | b'>' | b'+' | b'-' | b'*' | b'/' | b'%' | b'&' | b'|' | b'^')
                    && !matches!(next, b'=' | b'>')
                {
                    eq_pos = Some(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    let eq = eq_pos?;
    let (end_idx, _) = prev_nonws(header, eq)?;
    let mut start = end_idx + 1;
    while start > 0 && (is_ident_byte(header[start - 1]) || header[start - 1] == b'.') {
        start -= 1;
    }
    let target = String::from_utf8_lossy(&header[start..end_idx + 1]).into_owned();
    let last = target.rsplit('.').next()?.to_string();
    if last.is_empty() || last.chars().next().unwrap().is_ascii_digit() {
        None
    } else {
        Some(last)
    }
}

/// Arrow-function name when the header is `... name = (args) =>`.
fn arrow_name(header: &[u8]) -> Option<String> {
    let text = String::from_utf8_lossy(header);
    let trimmed = text.trim_end();
    if !trimmed.ends_with("=>") {
        return None;
    }
    let arrow_at = trimmed.len() - 2;
    let mut depth = 0i32;
    for &b in &header[..arrow_at] {
        match b {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth = (depth - 1).max(0),
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    assignment_target(header, arrow_at)
}

fn function_name(header: &[u8], p: &Profile) -> Option<String> {
    let header_str = String::from_utf8_lossy(header).into_owned();
    let groups = top_level_groups(header);
    for &(start, end) in groups.iter().rev() {
        let trailer = &header_str[end + 1..];
        if !trailer_ok(p, trailer) {
            continue;
        }
        let Some((name_start, name)) = name_before(header, start, p) else {
            continue;
        };
        let plain = name.rsplit("::").next().unwrap_or(&name);
        let plain_base = plain.strip_prefix('~').unwrap_or(plain);
        if p.reserved.contains(&plain_base) && !name.contains("::") {
            continue;
        }
        if let Some((prev_idx, prev_byte)) = prev_nonws(header, name_start) {
            // Constructor-initializer members and object keys are not names.
            if p.kind == LangKind::CCpp && prev_byte == b',' {
                continue;
            }
            if p.kind == LangKind::CCpp
                && prev_byte == b':'
                && !(prev_idx > 0 && header[prev_idx - 1] == b':')
            {
                continue;
            }
            if prev_byte == b'.' {
                continue;
            }
            let prev_word = word_ending_at(header, prev_idx + 1);
            if prev_word == "new" {
                continue;
            }
        }
        if p.kind == LangKind::JsTs && name == "function" {
            return assignment_target(header, name_start);
        }
        if name == "function" || name == "async" {
            continue;
        }
        return Some(name);
    }
    None
}

#[derive(Debug)]
enum BlockKind {
    Container,
    Function { name: String, start: usize },
    Anon,
    Data,
}

#[derive(Debug)]
struct Block {
    kind: BlockKind,
    /// Scope segment contributed to qualified names, if any.
    segment: Option<String>,
}

fn data_guard(header: &str) -> bool {
    let t = header.trim_end();
    if t.ends_with('=') || t.ends_with(',') || t.ends_with('(') || t.ends_with('[') {
        return true;
    }
    for kw in ["return", "case", "in", "of"] {
        if t.ends_with(kw) {
            let cut = t.len() - kw.len();
            if cut == 0 || !is_ident_byte(t.as_bytes()[cut - 1]) {
                return true;
            }
        }
    }
    false
}

pub fn enumerate(content: &str, profile: Profile) -> Vec<FunctionDef> {
    let src = content.as_bytes();
    let sanitized = sanitize(src, &profile);
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(
            src.iter()
                .enumerate()
                .filter(|(_, &b)| b == b'\n')
                .map(|(i, _)| i + 1),
        )
        .collect();
    let line_of = |pos: usize| line_starts.partition_point(|&s| s <= pos);

    let mut defs = Vec::new();
    let mut stack: Vec<Block> = Vec::new();
    let mut paren_depth = 0i32;
    let mut stmt_start = 0usize;
    let mut i = 0usize;
    let n = sanitized.len();

    while i < n {
        match sanitized[i] {
            b'(' => paren_depth += 1,
            b')' => paren_depth = (paren_depth - 1).max(0),
            b';' if paren_depth == 0 => stmt_start = i + 1,
            b':' if paren_depth == 0 => {
                // Access specifiers and labels end a header; `::` does not.
                let double = (i + 1 < n && sanitized[i + 1] == b':')
                    || (i > 0 && sanitized[i - 1] == b':');
                if !double {
                    let header = String::from_utf8_lossy(&sanitized[stmt_start..i]).into_owned();
                    let trimmed = header.trim();
                    let bare_label = !trimmed.is_empty()
                        && trimmed.bytes().all(is_ident_byte)
                        && !trimmed.as_bytes()[0].is_ascii_digit();
                    let case_label = tokens(trimmed).first() == Some(&"case");
                    if bare_label || case_label {
                        stmt_start = i + 1;
                    }
                }
            }
            b'{' => {
                if paren_depth > 0 {
                    stack.push(Block {
                        kind: BlockKind::Data,
                        segment: None,
                    });
                } else {
                    let header_bytes = &sanitized[stmt_start..i];
                    let header = String::from_utf8_lossy(header_bytes).into_owned();
                    let block = if data_guard(&header) {
                        Block {
                            kind: BlockKind::Anon,
                            segment: None,
                        }
                    } else if let Some(name) = container_name(&header, &profile) {
                        Block {
                            kind: BlockKind::Container,
                            segment: name,
                        }
                    } else if profile.kind == LangKind::JsTs
                        && arrow_name(header_bytes).is_some()
                    {
                        let name = arrow_name(header_bytes).unwrap();
                        let start = first_content(src, &sanitized, stmt_start, i);
                        stack.push(Block {
                            kind: BlockKind::Function { name: name.clone(), start },
                            segment: Some(name),
                        });
                        stmt_start = i + 1;
                        i += 1;
                        continue;
                    } else if let Some(name) = function_name(header_bytes, &profile) {
                        let start = first_content(src, &sanitized, stmt_start, i);
                        stack.push(Block {
                            kind: BlockKind::Function { name: name.clone(), start },
                            segment: Some(name),
                        });
                        stmt_start = i + 1;
                        i += 1;
                        continue;
                    } else {
                        Block {
                            kind: BlockKind::Anon,
                            segment: None,
                        }
                    };
                    stack.push(block);
                    stmt_start = i + 1;
                }
            }
            b'}' => {
                if let Some(block) = stack.pop() {
                    match block.kind {
                        BlockKind::Data => {}
                        BlockKind::Function { name, start } => {
                            let mut path: Vec<String> = stack
                                .iter()
                                .filter_map(|b| b.segment.clone())
                                .collect();
                            for segment in name.split("::").filter(|s| !s.is_empty()) {
                                path.push(segment.to_string());
                            }
                            let text = content[start..=i].to_string();
                            defs.push(FunctionDef {
                                qualified_name: path.join("."),
                                start_line: line_of(start),
                                end_line: line_of(i),
                                text,
                            });
                            stmt_start = i + 1;
                        }
                        _ => stmt_start = i + 1,
                    }
                }
            }
            _ => {}
        }
        i += 1;
    }
    defs
}

/// First byte of real content at or after `from` (whitespace skipped in the
/// sanitized view so leading comments are excluded from definition text).
fn first_content(src: &[u8], sanitized: &[u8], from: usize, until: usize) -> usize {
    let mut i = from;
    while i < until && sanitized[i].is_ascii_whitespace() {
        i += 1;
    }
    i.min(src.len().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::super::enumerate_functions;
    use crate::extract::Language;

    fn names(lang: Language, src: &str) -> Vec<String> {
        enumerate_functions(lang, src)
            .into_iter()
            .map(|d| d.qualified_name)
            .collect()
    }

    #[test]
    fn c_functions_with_preprocessor_and_comments() {
        let src = r#"
#include <stdio.h>
#define BUF { 0 }

/* block comment with } brace */
static int add(int a, int b) {
    return a + b; // inline }
}

int main(void) {
    char *s = "string with { brace";
    if (add(1, 2) > 0) {
        printf("%s\n", s);
    }
    return 0;
}
"#;
        assert_eq!(names(Language::CCpp, src), vec!["add", "main"]);
    }

    #[test]
    fn cpp_classes_namespaces_and_out_of_line_methods() {
        let src = r#"
namespace net {

class Socket {
public:
    Socket() : fd_(-1), open_(false) {}
    int fd() const { return fd_; }
private:
    int fd_;
    bool open_;
};

int Socket::connect(const char *host) {
    return 0;
}

}  // namespace net

void top_level() {}
"#;
        assert_eq!(
            names(Language::CCpp, src),
            vec![
                "net.Socket.Socket",
                "net.Socket.fd",
                "net.Socket.connect",
                "top_level"
            ]
        );
    }

    #[test]
    fn cpp_control_flow_is_not_a_function() {
        let src = r#"
int f(int x) {
    while (x > 0) {
        x--;
    }
    switch (x) {
        case 0: { break; }
        default: { break; }
    }
    for (int i = 0; i < 3; i++) {
        if (i == 1) { continue; } else { x += i; }
    }
    int arr[] = {1, 2, 3};
    struct Point p = { 0, 1 };
    return x + arr[0] + p.x;
}
"#;
        assert_eq!(names(Language::CCpp, src), vec!["f"]);
    }

    #[test]
    fn java_methods_and_nested_classes() {
        let src = r#"
package demo;

public class Outer {
    private int count = 0;

    public Outer(int count) {
        this.count = count;
    }

    @Override
    public String render(String input) throws IllegalStateException {
        return input.trim();
    }

    public static class Inner {
        void tick() {
            count++;
        }
    }
}
"#;
        assert_eq!(
            names(Language::Java, src),
            vec!["Outer.Outer", "Outer.render", "Outer.Inner.tick"]
        );
    }

    #[test]
    fn java_anonymous_class_methods_keep_outer_path() {
        let src = r#"
public class App {
    public void start() {
        Runnable r = new Runnable() {
            public void run() {
                System.out.println("hi");
            }
        };
        r.run();
    }
}
"#;
        assert_eq!(names(Language::Java, src), vec!["App.start", "App.start.run"]);
    }

    #[test]
    fn js_declarations_methods_and_arrows() {
        let src = r#"
function greet(name) {
    return `hello ${name} {brace in template}`;
}

const shout = (name) => {
    return name.toUpperCase();
};

class Widget {
    constructor(id) {
        this.id = id;
    }
    render() {
        const re = /}{/g;
        return String(this.id).replace(re, '');
    }
    static async refresh() {
        await fetch('/x');
    }
}

export function outer() {
    function inner() { return 1; }
    return inner();
}
"#;
        assert_eq!(
            names(Language::JavascriptTypescript, src),
            vec![
                "greet",
                "shout",
                "Widget.constructor",
                "Widget.render",
                "Widget.refresh",
                "outer",
                "outer.inner"
            ]
        );
    }

    #[test]
    fn js_callbacks_and_object_literals_are_not_named_functions() {
        let src = r#"
const config = {
    retries: 3,
};

items.forEach((item) => {
    console.log(item);
});

setTimeout(function () {
    tick();
}, 100);
"#;
        assert!(names(Language::JavascriptTypescript, src).is_empty());
    }

    #[test]
    fn ts_types_and_interfaces() {
        let src = r#"
interface Shape {
    area(): number;
}

export class Circle {
    constructor(private radius: number) {}
    area(): number {
        return Math.PI * this.radius ** 2;
    }
}

export const scale = (s: Shape, k: number): number => {
    return s.area() * k;
};
"#;
        assert_eq!(
            names(Language::JavascriptTypescript, src),
            vec!["Circle.constructor", "Circle.area", "scale"]
        );
    }

    #[test]
    fn text_capture_includes_annotations_and_exact_body() {
        let src = "class A {\n    @Deco\n    m() {\n        return 1;\n    }\n}\n";
        let defs = enumerate_functions(Language::JavascriptTypescript, src);
        assert_eq!(defs.len(), 1);
        assert_eq!(defs[0].text, "@Deco\n    m() {\n        return 1;\n    }");
        assert_eq!(defs[0].start_line, 2);
        assert_eq!(defs[0].end_line, 5);
    }
}
