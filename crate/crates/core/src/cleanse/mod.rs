//! Relevance cleansing of function-level changes.
//!
//! Each modified function pair is classified into one of four categories by a
//! language model: patched against the vulnerability, changed for
//! consistency, irrelevant, or no decision. Function-level retention keeps
//! category-1 pairs; commit-level retention keeps commits with at least one
//! category-1 pair and drops any commit that contains a no-decision verdict.

mod client;
mod primevul;
mod prompt;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{HttpClient, LlmClient, LlmRequest, RetryPolicy, StubClient, TransportError};
pub use primevul::{heuristic_label_primevul, HeuristicMode};
pub use prompt::{
    build_prompt, CommitContext, FewShotSet, FocalFunction, OtherChange, PromptBundle,
};

use crate::extract::{CommitSample, FunctionPair};

/// Exact marker appended to truncated prompt fields.
pub const TRUNCATION_MARKER: &str = "collapsed due to token limitation";

#[derive(Debug, Error)]
pub enum CleanseError {
    #[error("invalid token budget: {0}")]
    InvalidBudget(String),
    #[error("prompt assembly requires a modified pair, got {0:?}")]
    NotModified(crate::extract::ChangeKind),
    #[error("pair {0} has no verdict")]
    MissingVerdict(String),
    #[error("cannot load few-shot examples: {0}")]
    FewShot(String),
}

/// Relevance categories for one function change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Category {
    PatchedAgainstVulnerability,
    ChangedForConsistency,
    Irrelevant,
    NoDecision,
}

impl From<Category> for u8 {
    fn from(c: Category) -> u8 {
        match c {
            Category::PatchedAgainstVulnerability => 1,
            Category::ChangedForConsistency => 2,
            Category::Irrelevant => 3,
            Category::NoDecision => 4,
        }
    }
}

impl TryFrom<u8> for Category {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Category::PatchedAgainstVulnerability),
            2 => Ok(Category::ChangedForConsistency),
            3 => Ok(Category::Irrelevant),
            4 => Ok(Category::NoDecision),
            other => Err(format!("category must be 1-4, got {other}")),
        }
    }
}

/// How much other-changed-function context survived prompt budgeting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionLevel {
    /// All other changed functions in the commit.
    AllCommit,
    /// Only other changed functions in the focal function's file.
    SameFile,
    /// No other changed functions.
    None,
}

/// Token estimation and truncation parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenBudget {
    pub budget: u64,
    pub char_threshold: usize,
    pub tokens_per_char: f64,
}

impl Default for TokenBudget {
    fn default() -> Self {
        TokenBudget {
            budget: 8000,
            char_threshold: 2000,
            tokens_per_char: 0.25,
        }
    }
}

impl TokenBudget {
    pub fn with_budget(budget: u64) -> Self {
        TokenBudget {
            budget,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), CleanseError> {
        if self.budget == 0 {
            return Err(CleanseError::InvalidBudget("budget must be > 0".into()));
        }
        if self.char_threshold == 0 {
            return Err(CleanseError::InvalidBudget(
                "char_threshold must be > 0".into(),
            ));
        }
        if !(self.tokens_per_char > 0.0) {
            return Err(CleanseError::InvalidBudget(
                "tokens_per_char must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn estimate(&self, text: &str) -> u64 {
        estimate_tokens(text, self.tokens_per_char)
    }
}

/// Character-ratio token estimate: `ceil(chars * ratio)`.
pub fn estimate_tokens(text: &str, tokens_per_char: f64) -> u64 {
    let chars = text.chars().count() as f64;
    (chars * tokens_per_char).ceil() as u64
}

/// Truncates to `threshold` characters, appending the exact marker on its own
/// line. Text at or under the threshold is unchanged.
pub fn truncate_field(text: &str, threshold: usize) -> String {
    let count = text.chars().count();
    if count <= threshold {
        return text.to_string();
    }
    let cut: String = text.chars().take(threshold).collect();
    format!("{cut}\n{TRUNCATION_MARKER}")
}

/// Outcome of classifying one function pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceVerdict {
    pub pair_id: String,
    pub category: Category,
    pub rationale: String,
    pub reduction_level: ReductionLevel,
    pub raw_reply: String,
}

/// Parses a model reply: the last case-insensitive `ANSWER: <1|2|3|4>` wins;
/// the rationale is everything before it.
pub fn parse_reply(reply: &str) -> Option<(Category, String)> {
    let re = answer_pattern();
    let m = re.captures_iter(reply).last()?;
    let digit: u8 = m.get(1)?.as_str().parse().ok()?;
    let category = Category::try_from(digit).ok()?;
    let rationale = reply[..m.get(0).unwrap().start()].trim().to_string();
    Some((category, rationale))
}

fn answer_pattern() -> &'static regex::Regex {
    static RE: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| regex::Regex::new(r"(?i)answer\s*:\s*([1-4])").unwrap())
}

/// Classifies one assembled prompt through the client contract, degrading to
/// category 4 on unparseable replies or exhausted transport retries.
pub fn classify_relevance(
    bundle: &PromptBundle,
    client: &dyn LlmClient,
    model: &str,
    policy: &RetryPolicy,
) -> RelevanceVerdict {
    let system = bundle.system_text();
    let request = LlmRequest {
        model,
        system: &system,
        user: &bundle.user_text,
        temperature: 0.0,
        tag: Some(&bundle.pair_id),
    };
    match client.complete_with_retries(&request, policy) {
        Ok(reply) => match parse_reply(&reply) {
            Some((category, rationale)) => RelevanceVerdict {
                pair_id: bundle.pair_id.clone(),
                category,
                rationale,
                reduction_level: bundle.reduction_level,
                raw_reply: reply,
            },
            None => RelevanceVerdict {
                pair_id: bundle.pair_id.clone(),
                category: Category::NoDecision,
                rationale: "unparseable".to_string(),
                reduction_level: bundle.reduction_level,
                raw_reply: reply,
            },
        },
        Err(_) => RelevanceVerdict {
            pair_id: bundle.pair_id.clone(),
            category: Category::NoDecision,
            rationale: "transport-failure".to_string(),
            reduction_level: bundle.reduction_level,
            raw_reply: String::new(),
        },
    }
}

/// The cleansed benchmark after retention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleansedBenchmark {
    pub commits: Vec<CommitSample>,
    pub pairs: Vec<FunctionPair>,
}

/// Applies the retention rules. Every modified pair of every commit must have
/// a verdict. Retained commits keep only their category-1 pair ids.
pub fn apply_retention(
    verdicts: &[RelevanceVerdict],
    commits: &[CommitSample],
    pairs: &[FunctionPair],
) -> Result<CleansedBenchmark, CleanseError> {
    let by_id: BTreeMap<&str, Category> = verdicts
        .iter()
        .map(|v| (v.pair_id.as_str(), v.category))
        .collect();
    let pair_index: BTreeMap<&str, &FunctionPair> =
        pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();

    let mut cleansed = CleansedBenchmark::default();
    for commit in commits {
        let mut keep_ids = Vec::new();
        let mut has_no_decision = false;
        for pair_id in &commit.function_pair_ids {
            let category = *by_id
                .get(pair_id.as_str())
                .ok_or_else(|| CleanseError::MissingVerdict(pair_id.clone()))?;
            match category {
                Category::PatchedAgainstVulnerability => keep_ids.push(pair_id.clone()),
                Category::NoDecision => has_no_decision = true,
                _ => {}
            }
        }
        // A no-decision verdict excludes the whole commit, overriding
        // retention by category-1 pairs.
        if has_no_decision || keep_ids.is_empty() {
            continue;
        }
        for pair_id in &keep_ids {
            if let Some(pair) = pair_index.get(pair_id.as_str()) {
                cleansed.pairs.push((*pair).clone());
            }
        }
        let mut retained = commit.clone();
        retained.function_pair_ids = keep_ids;
        cleansed.commits.push(retained);
    }
    Ok(cleansed)
}
