//! Heuristic baseline labeler in the PrimeVul style.
//!
//! A pre-fix function is accepted when (1) it is the only function modified
//! in the commit, (2) its name appears in the advisory description, and
//! (3) its file's base name appears in the description and it is the only
//! function modified in that file. Name and file matches use word-boundary
//! tokens; a bare substring search would mislabel even more single-letter
//! names. The original statement of the rules reads as a conjunction even
//! though criterion one subsumes part of criterion three, so a disjunctive
//! mode is available behind a switch.

use serde::{Deserialize, Serialize};

use crate::extract::{ChangeKind, FunctionPair};
use crate::ingest::AdvisoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicMode {
    Conjunctive,
    Disjunctive,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Word-boundary token search: neighbors of a match must not be identifier
/// characters.
fn contains_token(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let hay = haystack.as_bytes();
    let mut from = 0usize;
    while let Some(rel) = haystack[from..].find(needle) {
        let at = from + rel;
        let before_ok = at == 0 || !is_word_byte(hay[at - 1]);
        let end = at + needle.len();
        let after_ok = end >= hay.len() || !is_word_byte(hay[end]);
        if before_ok && after_ok {
            return true;
        }
        from = at + 1;
        while from < haystack.len() && !haystack.is_char_boundary(from) {
            from += 1;
        }
    }
    false
}

/// Unqualified function name: last dotted segment, occurrence suffix removed.
fn plain_name(qualified: &str) -> &str {
    let last = qualified.rsplit('.').next().unwrap_or(qualified);
    last.split('#').next().unwrap_or(last)
}

fn base_name(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

/// Labels one pair against its advisory, given every modified pair of the
/// same commit (including the pair itself).
pub fn heuristic_label_primevul(
    pair: &FunctionPair,
    advisory: &AdvisoryRecord,
    commit_modified_pairs: &[FunctionPair],
    mode: HeuristicMode,
) -> bool {
    let modified: Vec<&FunctionPair> = commit_modified_pairs
        .iter()
        .filter(|p| p.change_kind == ChangeKind::Modified)
        .collect();
    let description = advisory.description.as_str();

    let only_in_commit =
        modified.len() == 1 && modified.first().is_some_and(|p| p.pair_id == pair.pair_id);
    let name_mentioned = contains_token(description, plain_name(&pair.function_name));
    let same_file_count = modified
        .iter()
        .filter(|p| p.file_path == pair.file_path)
        .count();
    let file_mentioned = contains_token(description, base_name(&pair.file_path));
    let only_in_file = file_mentioned && same_file_count == 1;

    match mode {
        HeuristicMode::Conjunctive => only_in_commit && name_mentioned && only_in_file,
        HeuristicMode::Disjunctive => only_in_commit || name_mentioned || only_in_file,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::Language;
    use crate::ingest::sample_record;

    fn pair(id: &str, name: &str, file: &str) -> FunctionPair {
        FunctionPair {
            pair_id: id.to_string(),
            advisory_id: "ADV-1".into(),
            fix_commit: "a".repeat(40),
            file_path: file.into(),
            function_name: name.into(),
            language: Language::Python,
            pre_text: Some("x".into()),
            post_text: Some("y".into()),
            change_kind: ChangeKind::Modified,
        }
    }

    fn advisory(description: &str) -> AdvisoryRecord {
        let mut record = sample_record("ADV-1", "https://example.com/a/b", &["abcd12"]);
        record.description = description.to_string();
        record
    }

    #[test]
    fn sole_function_with_name_and_file_mentioned() {
        let p = pair("p1", "load_config", "src/config.py");
        let adv = advisory("A flaw in load_config within config.py allows injection.");
        assert!(heuristic_label_primevul(
            &p,
            &adv,
            &[p.clone()],
            HeuristicMode::Conjunctive
        ));
    }

    #[test]
    fn two_modified_functions_fail_criterion_one() {
        let p1 = pair("p1", "load_config", "src/config.py");
        let p2 = pair("p2", "save_config", "src/other.py");
        let adv = advisory("A flaw in load_config within config.py allows injection.");
        let commit = vec![p1.clone(), p2];
        assert!(!heuristic_label_primevul(
            &p1,
            &adv,
            &commit,
            HeuristicMode::Conjunctive
        ));
        // Name and file still match, so the disjunctive switch accepts.
        assert!(heuristic_label_primevul(
            &p1,
            &adv,
            &commit,
            HeuristicMode::Disjunctive
        ));
    }

    #[test]
    fn single_letter_name_matches_as_standalone_word() {
        // The known false-positive pattern: a function named "p" matches the
        // standalone word "p" in prose.
        let p = pair("p1", "p", "bundle.min.js");
        let adv = advisory("See section p of bundle.min.js for details.");
        assert!(heuristic_label_primevul(
            &p,
            &adv,
            &[p.clone()],
            HeuristicMode::Conjunctive
        ));
        // But not when "p" only occurs inside words.
        let adv2 = advisory("The parse step of bundle.min.js is affected.");
        assert!(!heuristic_label_primevul(
            &p,
            &adv2,
            &[p.clone()],
            HeuristicMode::Conjunctive
        ));
    }

    #[test]
    fn qualified_names_match_on_last_segment() {
        let p = pair("p1", "Widget.render", "ui.py");
        let adv = advisory("Stored XSS in render of ui.py.");
        assert!(heuristic_label_primevul(
            &p,
            &adv,
            &[p.clone()],
            HeuristicMode::Conjunctive
        ));
    }
}
