//! Syntax-aware enumeration of named function and method definitions.
//!
//! Each supported grammar walks full file text and returns every named
//! definition with its dotted qualified name and exact source text. The
//! scanners are deliberately self-contained: they track strings, comments,
//! and nesting well enough to recover definition boundaries deterministically
//! without a full grammar, which keeps extraction offline and reproducible.

mod clike;
mod python;

use super::Language;

/// One named definition found in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    /// Dotted path through enclosing classes/namespaces/functions, e.g.
    /// `Outer.Inner.method`. Repeated names in one file get `#2`, `#3`
    /// suffixes in source order so identity stays unambiguous.
    pub qualified_name: String,
    /// 1-based line of the first captured line (decorators/annotations
    /// included).
    pub start_line: usize,
    /// 1-based line of the last captured line, inclusive.
    pub end_line: usize,
    /// Exact source text of the definition.
    pub text: String,
}

/// Enumerates named definitions for a language; unsupported languages yield
/// nothing.
pub fn enumerate_functions(language: Language, content: &str) -> Vec<FunctionDef> {
    let mut defs = match language {
        Language::Python => python::enumerate(content),
        Language::CCpp => clike::enumerate(content, clike::Profile::c_cpp()),
        Language::JavascriptTypescript => clike::enumerate(content, clike::Profile::js_ts()),
        Language::Java => clike::enumerate(content, clike::Profile::java()),
        Language::Other => Vec::new(),
    };
    defs.sort_by_key(|d| (d.start_line, d.end_line));
    disambiguate(&mut defs);
    defs
}

/// Appends `#2`, `#3`, ... to repeated qualified names in source order.
fn disambiguate(defs: &mut [FunctionDef]) {
    use std::collections::HashMap;
    let mut seen: HashMap<String, usize> = HashMap::new();
    for def in defs.iter_mut() {
        let count = seen.entry(def.qualified_name.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            def.qualified_name = format!("{}#{}", def.qualified_name, count);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_get_occurrence_suffixes() {
        let src = "def f():\n    return 1\n\ndef f():\n    return 2\n";
        let defs = enumerate_functions(Language::Python, src);
        let names: Vec<&str> = defs.iter().map(|d| d.qualified_name.as_str()).collect();
        assert_eq!(names, vec!["f", "f#2"]);
    }

    #[test]
    fn other_language_yields_nothing() {
        assert!(enumerate_functions(Language::Other, "def f(): pass").is_empty());
    }
}
