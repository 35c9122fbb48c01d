//! Budgeted prompt assembly for relevance classification.
//!
//! Long context fields are truncated with an explicit marker; the
//! other-changed-functions block degrades stepwise (whole commit, same file,
//! nothing) until the estimate fits the token budget. The last level is
//! always accepted and flagged when still over budget.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{truncate_field, CleanseError, ReductionLevel, TokenBudget};
use crate::extract::{ChangeKind, FunctionPair};

/// The function under review: name plus both full definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocalFunction {
    pub name: String,
    pub pre_text: String,
    pub post_text: String,
}

/// Another function modified in the same commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtherChange {
    pub name: String,
    pub file_path: String,
    pub text: String,
}

/// Commit-level context shared by all pairs of one commit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitContext {
    pub commit_message: String,
    pub advisory_link: String,
    pub description: String,
    pub other_changes: Vec<OtherChange>,
}

/// Exactly three worked examples, one per category 1-3, each with reasoning
/// followed by its answer line. Ships with editable defaults.
#[derive(Debug, Clone)]
pub struct FewShotSet {
    examples: [String; 3],
}

impl FewShotSet {
    pub fn builtin() -> Self {
        FewShotSet {
            examples: [
                include_str!("../../data/few_shot/category_1.txt").to_string(),
                include_str!("../../data/few_shot/category_2.txt").to_string(),
                include_str!("../../data/few_shot/category_3.txt").to_string(),
            ],
        }
    }

    /// Loads `category_1.txt` .. `category_3.txt` from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self, CleanseError> {
        let mut examples: [String; 3] = Default::default();
        for (i, slot) in examples.iter_mut().enumerate() {
            let path = dir.join(format!("category_{}.txt", i + 1));
            *slot = std::fs::read_to_string(&path)
                .map_err(|e| CleanseError::FewShot(format!("{}: {e}", path.display())))?;
        }
        Ok(FewShotSet { examples })
    }

    pub fn examples(&self) -> &[String; 3] {
        &self.examples
    }
}

/// A fully assembled prompt plus the budgeting outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub pair_id: String,
    pub system_role: String,
    pub few_shot_examples: Vec<String>,
    pub focal: FocalFunction,
    pub commit_message: String,
    pub advisory_link: String,
    pub description: String,
    pub other_changes: Vec<OtherChange>,
    pub reduction_level: ReductionLevel,
    pub estimated_tokens: u64,
    pub over_budget: bool,
    pub user_text: String,
}

impl PromptBundle {
    pub fn system_text(&self) -> String {
        format!("You are a {}.", self.system_role)
    }
}

const CATEGORY_BLOCK: &str = "\
Classify the change to the focal function into exactly one category:
1) the function is patched against a vulnerability
2) the function is not vulnerable but has been changed for consistency
3) the function is irrelevant to the vulnerability
4) no decision can be made
";

fn render_user_text(
    focal: &FocalFunction,
    few_shot: &FewShotSet,
    commit_message: &str,
    advisory_link: &str,
    description: &str,
    others: &[&OtherChange],
    level: ReductionLevel,
) -> String {
    let mut out = String::new();
    out.push_str(CATEGORY_BLOCK);
    out.push_str("\nWorked examples:\n");
    for (i, example) in few_shot.examples().iter().enumerate() {
        out.push_str(&format!("\n### Example {} ###\n{}\n", i + 1, example.trim_end()));
    }
    out.push_str("\n### Function under review ###\n");
    out.push_str(&format!("Name: {}\n", focal.name));
    out.push_str(&format!("\nDefinition before the fix:\n{}\n", focal.pre_text));
    out.push_str(&format!("\nDefinition after the fix:\n{}\n", focal.post_text));
    out.push_str("\n### Vulnerability context ###\n");
    out.push_str(&format!("Commit message:\n{commit_message}\n"));
    out.push_str(&format!("\nAdvisory link: {advisory_link}\n"));
    out.push_str(&format!("\nVulnerability description:\n{description}\n"));
    match level {
        ReductionLevel::AllCommit => {
            out.push_str("\nOther functions changed in this commit:\n");
        }
        ReductionLevel::SameFile => {
            out.push_str("\nOther functions changed in the same file:\n");
        }
        ReductionLevel::None => {}
    }
    if level != ReductionLevel::None {
        if others.is_empty() {
            out.push_str("(none)\n");
        }
        for other in others {
            out.push_str(&format!("\n- {} ({})\n{}\n", other.name, other.file_path, other.text));
        }
    }
    out.push_str(
        "\nState your reasons first, then give the final answer on its own line as \"ANSWER: <1|2|3|4>\".\n",
    );
    out
}

/// Assembles the prompt for one modified pair at the smallest reduction level
/// whose estimate fits the budget. Level three (no other functions) is always
/// accepted as the last resort, flagged when still over budget.
pub fn build_prompt(
    pair: &FunctionPair,
    ctx: &CommitContext,
    budget: &TokenBudget,
    few_shot: &FewShotSet,
) -> Result<PromptBundle, CleanseError> {
    budget.validate()?;
    if pair.change_kind != ChangeKind::Modified {
        return Err(CleanseError::NotModified(pair.change_kind));
    }
    let focal = FocalFunction {
        name: pair.function_name.clone(),
        pre_text: pair.pre_text.clone().unwrap_or_default(),
        post_text: pair.post_text.clone().unwrap_or_default(),
    };
    let commit_message = truncate_field(&ctx.commit_message, budget.char_threshold);
    let description = truncate_field(&ctx.description, budget.char_threshold);
    let system_role = "security expert".to_string();
    let system_tokens = budget.estimate(&format!("You are a {system_role}."));

    let levels = [
        ReductionLevel::AllCommit,
        ReductionLevel::SameFile,
        ReductionLevel::None,
    ];
    let mut chosen = None;
    for level in levels {
        let others: Vec<&OtherChange> = match level {
            ReductionLevel::AllCommit => ctx.other_changes.iter().collect(),
            ReductionLevel::SameFile => ctx
                .other_changes
                .iter()
                .filter(|o| o.file_path == pair.file_path)
                .collect(),
            ReductionLevel::None => Vec::new(),
        };
        let user_text = render_user_text(
            &focal,
            few_shot,
            &commit_message,
            &ctx.advisory_link,
            &description,
            &others,
            level,
        );
        let estimated = system_tokens + budget.estimate(&user_text);
        let fits = estimated <= budget.budget;
        if fits || level == ReductionLevel::None {
            chosen = Some((level, others, user_text, estimated, !fits));
            break;
        }
    }
    let (level, others, user_text, estimated_tokens, over_budget) =
        chosen.expect("level three is always accepted");
    Ok(PromptBundle {
        pair_id: pair.pair_id.clone(),
        system_role,
        few_shot_examples: few_shot.examples().to_vec(),
        focal,
        commit_message,
        advisory_link: ctx.advisory_link.clone(),
        description,
        other_changes: others.into_iter().cloned().collect(),
        reduction_level: level,
        estimated_tokens,
        over_budget,
        user_text,
    })
}
