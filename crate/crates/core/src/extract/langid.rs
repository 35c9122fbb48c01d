//! Deterministic language identification: extension table first, then
//! shebang and keyword-scoring heuristics for unknown extensions.

use super::Language;
use serde::{Deserialize, Serialize};

/// Language decision plus the raw detected-language label that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTag {
    pub language: Language,
    pub detected: String,
}

fn by_extension(path: &str) -> Option<Language> {
    let ext = path.rsplit('/').next()?.rsplit_once('.')?.1.to_lowercase();
    match ext.as_str() {
        "py" => Some(Language::Python),
        "c" | "cc" | "cpp" | "h" | "hpp" => Some(Language::CCpp),
        "js" | "jsx" | "ts" | "tsx" => Some(Language::JavascriptTypescript),
        "java" => Some(Language::Java),
        _ => None,
    }
}

fn by_shebang(content: &str) -> Option<Language> {
    let first = content.lines().next()?;
    if !first.starts_with("#!") {
        return None;
    }
    let interp = first.trim_start_matches("#!").trim();
    if interp.contains("python") {
        Some(Language::Python)
    } else if interp.contains("node") {
        Some(Language::JavascriptTypescript)
    } else {
        None
    }
}

fn score(content: &str, markers: &[&str]) -> usize {
    markers.iter().filter(|m| content.contains(*m)).count()
}

fn by_keywords(content: &str) -> Option<Language> {
    let python = score(
        content,
        &["def ", "elif ", "import ", "self.", "lambda ", "__init__", "None"],
    );
    let c_cpp = score(
        content,
        &["#include", "->", "::", "void ", "struct ", "#define", "printf("],
    );
    let js = score(
        content,
        &["function ", "=>", "const ", "let ", "console.log", "===", "require("],
    );
    let java = score(
        content,
        &["public class", "private ", "System.out", "package ", "@Override", "import java"],
    );
    // Ties resolve in this fixed order so identification stays deterministic.
    let ranked = [
        (python, Language::Python),
        (c_cpp, Language::CCpp),
        (js, Language::JavascriptTypescript),
        (java, Language::Java),
    ];
    let best = ranked.iter().max_by_key(|(s, _)| *s)?;
    if best.0 >= 2 {
        Some(best.1)
    } else {
        None
    }
}

/// Classifies a file. The extension table wins outright; content heuristics
/// only run for unknown extensions, and anything unrecognized is `other`.
pub fn identify_language(file_path: &str, content: &str) -> LanguageTag {
    if let Some(language) = by_extension(file_path) {
        return LanguageTag {
            language,
            detected: format!("extension:{language}"),
        };
    }
    if let Some(language) = by_shebang(content) {
        return LanguageTag {
            language,
            detected: format!("shebang:{language}"),
        };
    }
    if let Some(language) = by_keywords(content) {
        return LanguageTag {
            language,
            detected: format!("keywords:{language}"),
        };
    }
    LanguageTag {
        language: Language::Other,
        detected: "unknown".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_table_is_consulted_first() {
        assert_eq!(identify_language("a.py", "").language, Language::Python);
        assert_eq!(identify_language("src/x.cc", "").language, Language::CCpp);
        assert_eq!(identify_language("x.hpp", "").language, Language::CCpp);
        assert_eq!(
            identify_language("web/app.tsx", "").language,
            Language::JavascriptTypescript
        );
        assert_eq!(identify_language("A.java", "").language, Language::Java);
    }

    #[test]
    fn shebang_classifies_extensionless_scripts() {
        let tag = identify_language("script", "#!/usr/bin/env python\nprint(1)\n");
        assert_eq!(tag.language, Language::Python);
        assert_eq!(
            identify_language("runner", "#!/usr/bin/env node\nmain();\n").language,
            Language::JavascriptTypescript
        );
    }

    #[test]
    fn unrecognized_content_falls_back_to_other() {
        let tag = identify_language("x.dat", "binary-ish payload with no markers");
        assert_eq!(tag.language, Language::Other);
        assert_eq!(tag.detected, "unknown");
    }

    #[test]
    fn keyword_scoring_handles_unknown_extensions() {
        let src = "import os\n\ndef main():\n    self.run()\n";
        assert_eq!(identify_language("tool.txt2", src).language, Language::Python);
    }
}
