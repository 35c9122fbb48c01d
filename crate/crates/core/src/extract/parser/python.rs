//! Indentation-based scanner for Python definitions.
//!
//! Tracks triple-quoted strings across lines so `def` inside a docstring is
//! never treated as a definition, follows multi-line headers by parenthesis
//! depth, and attaches decorator blocks to the definition they precede.
//! Nested functions and class methods get dotted qualified names.

use super::FunctionDef;

#[derive(Debug)]
struct Line {
    /// Byte offset of the line start in the original content.
    start: usize,
    /// Byte offset just past the last content byte (before `\r?\n`).
    content_end: usize,
    /// Structural text: string contents and comments blanked out.
    code: String,
    /// Leading whitespace characters.
    indent: usize,
    /// The line began inside a triple-quoted string.
    opened_in_string: bool,
}

/// Splits content into lines while blanking string/comment interiors.
fn scan_lines(content: &str) -> Vec<Line> {
    let mut lines = Vec::new();
    let bytes = content.as_bytes();
    let mut pos = 0usize;
    // Some(quote byte) while inside a triple-quoted string.
    let mut triple: Option<u8> = None;
    while pos < bytes.len() {
        let start = pos;
        let mut end = pos;
        while end < bytes.len() && bytes[end] != b'\n' {
            end += 1;
        }
        let mut content_end = end;
        if content_end > start && bytes[content_end - 1] == b'\r' {
            content_end -= 1;
        }
        let raw = &bytes[start..content_end];
        let opened_in_string = triple.is_some();
        let mut code = vec![b' '; raw.len()];
        let mut i = 0usize;
        while i < raw.len() {
            let c = raw[i];
            if let Some(q) = triple {
                if c == b'\\' {
                    i += 2;
                    continue;
                }
                if c == q && raw[i..].len() >= 3 && raw[i + 1] == q && raw[i + 2] == q {
                    triple = None;
                    i += 3;
                    continue;
                }
                i += 1;
                continue;
            }
            match c {
                b'#' => break,
                b'\'' | b'"' => {
                    if raw[i..].len() >= 3 && raw[i + 1] == c && raw[i + 2] == c {
                        triple = Some(c);
                        i += 3;
                    } else {
                        // Single-line string; an unterminated one ends at EOL.
                        i += 1;
                        while i < raw.len() {
                            if raw[i] == b'\\' {
                                i += 2;
                                continue;
                            }
                            if raw[i] == c {
                                i += 1;
                                break;
                            }
                            i += 1;
                        }
                    }
                }
                _ => {
                    code[i] = c;
                    i += 1;
                }
            }
        }
        let code = String::from_utf8_lossy(&code).into_owned();
        let indent = raw
            .iter()
            .take_while(|&&b| b == b' ' || b == b'\t')
            .count();
        lines.push(Line {
            start,
            content_end,
            code,
            indent,
            opened_in_string,
        });
        pos = end + 1;
    }
    lines
}

fn paren_delta(code: &str) -> i64 {
    let mut delta = 0i64;
    for b in code.bytes() {
        match b {
            b'(' | b'[' | b'{' => delta += 1,
            b')' | b']' | b'}' => delta -= 1,
            _ => {}
        }
    }
    delta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScopeKind {
    Def,
    Class,
}

#[derive(Debug)]
struct Scope {
    kind: ScopeKind,
    name: String,
    indent: usize,
    start_line: usize,
    last_content_line: usize,
}

fn parse_definition(trimmed: &str) -> Option<(ScopeKind, String)> {
    let rest = if let Some(rest) = trimmed.strip_prefix("async ") {
        rest.trim_start()
    } else {
        trimmed
    };
    let (kind, rest) = if let Some(rest) = rest.strip_prefix("def") {
        (ScopeKind::Def, rest)
    } else if let Some(rest) = rest.strip_prefix("class") {
        (ScopeKind::Class, rest)
    } else {
        return None;
    };
    let rest = rest.strip_prefix([' ', '\t'])?.trim_start();
    let name: String = rest
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if name.is_empty() || name.chars().next().unwrap().is_ascii_digit() {
        return None;
    }
    Some((kind, name))
}

pub fn enumerate(content: &str) -> Vec<FunctionDef> {
    let lines = scan_lines(content);
    let mut stack: Vec<Scope> = Vec::new();
    let mut finished: Vec<(Vec<String>, usize, usize)> = Vec::new();
    let mut pending_decorator: Option<(usize, usize)> = None;
    let mut header_depth = 0i64;

    let close_top = |stack: &mut Vec<Scope>, finished: &mut Vec<(Vec<String>, usize, usize)>| {
        let scope = stack.pop().expect("close on empty stack");
        if scope.kind == ScopeKind::Def {
            let mut path: Vec<String> = stack.iter().map(|s| s.name.clone()).collect();
            path.push(scope.name);
            finished.push((path, scope.start_line, scope.last_content_line));
        }
    };

    for (i, line) in lines.iter().enumerate() {
        let mark = |stack: &mut Vec<Scope>| {
            for scope in stack.iter_mut() {
                scope.last_content_line = i;
            }
        };
        if line.opened_in_string {
            // Interior of a multi-line string: body text, never structure.
            mark(&mut stack);
            continue;
        }
        if header_depth > 0 {
            header_depth += paren_delta(&line.code);
            mark(&mut stack);
            continue;
        }
        let trimmed = line.code.trim();
        if trimmed.is_empty() {
            continue;
        }
        while stack
            .last()
            .is_some_and(|scope| line.indent <= scope.indent)
        {
            close_top(&mut stack, &mut finished);
        }
        if trimmed.starts_with('@') {
            if pending_decorator.is_none() {
                pending_decorator = Some((i, line.indent));
            }
            let delta = paren_delta(&line.code);
            if delta > 0 {
                header_depth = delta;
            }
            mark(&mut stack);
            continue;
        }
        if let Some((kind, name)) = parse_definition(trimmed) {
            let start_line = match pending_decorator.take() {
                Some((deco_line, deco_indent)) if deco_indent == line.indent => deco_line,
                _ => i,
            };
            mark(&mut stack);
            stack.push(Scope {
                kind,
                name,
                indent: line.indent,
                start_line,
                last_content_line: i,
            });
            let delta = paren_delta(&line.code);
            if delta > 0 {
                header_depth = delta;
            }
            continue;
        }
        pending_decorator = None;
        mark(&mut stack);
    }
    while !stack.is_empty() {
        close_top(&mut stack, &mut finished);
    }

    finished
        .into_iter()
        .map(|(path, start, end)| {
            let text = content[lines[start].start..lines[end].content_end].to_string();
            FunctionDef {
                qualified_name: path.join("."),
                start_line: start + 1,
                end_line: end + 1,
                text,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::enumerate_functions;
    use crate::extract::Language;

    fn names(src: &str) -> Vec<String> {
        enumerate_functions(Language::Python, src)
            .into_iter()
            .map(|d| d.qualified_name)
            .collect()
    }

    #[test]
    fn top_level_and_methods() {
        let src = "\
def top(a, b):
    return a + b

class Widget:
    def render(self):
        return 1

    async def refresh(self):
        pass
";
        assert_eq!(names(src), vec!["top", "Widget.render", "Widget.refresh"]);
    }

    #[test]
    fn nested_definitions_get_dotted_names() {
        let src = "\
def outer():
    def inner():
        return 2
    class Local:
        def method(self):
            pass
    return inner
";
        assert_eq!(
            names(src),
            vec!["outer", "outer.inner", "outer.Local.method"]
        );
    }

    #[test]
    fn docstring_defs_are_not_definitions() {
        let src = "\
def real():
    \"\"\"Example:

    def fake():
        pass
    \"\"\"
    return 1
";
        assert_eq!(names(src), vec!["real"]);
        let defs = enumerate_functions(Language::Python, src);
        assert!(defs[0].text.contains("def fake"));
        assert!(defs[0].text.ends_with("return 1"));
    }

    #[test]
    fn decorators_are_part_of_the_definition() {
        let src = "\
@app.route('/x')
@auth_required
def handler(req):
    return req
";
        let defs = enumerate_functions(Language::Python, src);
        assert_eq!(defs.len(), 1);
        assert!(defs[0].text.starts_with("@app.route"));
        assert_eq!(defs[0].start_line, 1);
    }

    #[test]
    fn multi_line_headers_are_followed() {
        let src = "\
def long_header(
    first,
    second,
):
    return first + second

def after():
    pass
";
        let defs = enumerate_functions(Language::Python, src);
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].qualified_name, "long_header");
        assert!(defs[0].text.ends_with("return first + second"));
    }

    #[test]
    fn single_line_body_ends_on_its_own_line() {
        let src = "def one(): return 1\nx = 2\ndef two():\n    return 2\n";
        let defs = enumerate_functions(Language::Python, src);
        assert_eq!(defs[0].text, "def one(): return 1");
        assert_eq!(defs[1].qualified_name, "two");
    }

    #[test]
    fn trailing_blank_lines_are_excluded() {
        let src = "def f():\n    return 1\n\n\n";
        let defs = enumerate_functions(Language::Python, src);
        assert_eq!(defs[0].text, "def f():\n    return 1");
        assert_eq!(defs[0].end_line, 2);
    }

    #[test]
    fn comment_only_lines_do_not_end_bodies() {
        let src = "def f():\n    a = 1\n    # note\n    return a\n";
        let defs = enumerate_functions(Language::Python, src);
        assert!(defs[0].text.ends_with("return a"));
    }

    #[test]
    fn strings_with_hash_and_quotes() {
        let src = "def f():\n    s = \"# not a comment\"\n    t = 'it\\'s'\n    return s\n";
        let defs = enumerate_functions(Language::Python, src);
        assert_eq!(defs.len(), 1);
        assert!(defs[0].text.ends_with("return s"));
    }
}
