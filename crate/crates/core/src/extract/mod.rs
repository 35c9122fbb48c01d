//! Snapshot materialization and changed-function extraction.
//!
//! For each fix commit the parent snapshot is the vulnerable version and the
//! fix snapshot the patched one. Every changed file parseable by a supported
//! grammar is parsed in both versions; definitions are matched across
//! versions by qualified name within the file, so a renamed function shows up
//! as one deletion plus one addition.

pub mod langid;
pub mod parser;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gitio::{self, FileStatus, GitError};
use crate::ingest::AdvisoryRecord;
pub use langid::{identify_language, LanguageTag};
pub use parser::{enumerate_functions, FunctionDef};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Git(#[from] GitError),
}

/// Language buckets used throughout the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Language {
    Python,
    CCpp,
    JavascriptTypescript,
    Java,
    Other,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Language::Python => "python",
            Language::CCpp => "c-cpp",
            Language::JavascriptTypescript => "javascript-typescript",
            Language::Java => "java",
            Language::Other => "other",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    Modified,
    Added,
    Deleted,
}

/// One (advisory, fix commit) snapshot pair. The parent snapshot carries the
/// vulnerable label, the fix snapshot the patched label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitSample {
    pub sample_id: String,
    pub advisory_id: String,
    pub repo_url: String,
    pub fix_commit: String,
    pub parent_commit: String,
    pub changed_files: Vec<String>,
    pub function_pair_ids: Vec<String>,
}

/// A changed function's pre-fix and post-fix definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionPair {
    pub pair_id: String,
    pub advisory_id: String,
    pub fix_commit: String,
    pub file_path: String,
    pub function_name: String,
    pub language: Language,
    pub pre_text: Option<String>,
    pub post_text: Option<String>,
    pub change_kind: ChangeKind,
}

impl FunctionPair {
    /// Change-kind/text consistency required of every stored pair.
    pub fn check_invariants(&self) -> Result<(), String> {
        match self.change_kind {
            ChangeKind::Modified => {
                if self.pre_text.is_none() || self.post_text.is_none() {
                    return Err("modified pair must carry both texts".into());
                }
                if self.pre_text == self.post_text {
                    return Err("modified pair texts must differ".into());
                }
            }
            ChangeKind::Added => {
                if self.pre_text.is_some() || self.post_text.is_none() {
                    return Err("added pair must carry only post_text".into());
                }
            }
            ChangeKind::Deleted => {
                if self.pre_text.is_none() || self.post_text.is_some() {
                    return Err("deleted pair must carry only pre_text".into());
                }
            }
        }
        Ok(())
    }
}

/// A file (or commit) that contributed no pairs, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub advisory_id: String,
    pub fix_commit: String,
    pub file_path: Option<String>,
    pub reason: String,
}

/// An advisory excluded from the benchmark, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionRecord {
    pub advisory_id: String,
    pub fix_commit: String,
    pub reason: String,
}

/// One changed function as found by per-commit extraction, before advisory
/// stamping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangedFunction {
    pub file_path: String,
    pub qualified_name: String,
    pub language: Language,
    pub change_kind: ChangeKind,
    pub pre_text: Option<String>,
    pub post_text: Option<String>,
    /// Source position used for deterministic ordering: the definition's
    /// start line in the pre version when present, else in the post version.
    pub position: usize,
}

/// Extraction result for one fix commit.
#[derive(Debug, Clone)]
pub struct CommitExtraction {
    pub fix_commit: String,
    pub parent_commit: String,
    pub changed_files: Vec<String>,
    pub functions: Vec<ChangedFunction>,
    /// (file path, reason) for files that contributed no pairs.
    pub file_skips: Vec<(String, String)>,
}

/// First parent of the fix commit; the vulnerable snapshot.
pub fn resolve_parent(repo: &Path, fix_commit: &str) -> Result<String, GitError> {
    gitio::resolve_parent(repo, fix_commit)
}

fn decode(bytes: Vec<u8>) -> Result<String, String> {
    if bytes.contains(&0) {
        return Err("binary".to_string());
    }
    String::from_utf8(bytes).map_err(|_| "invalid-utf8".to_string())
}

/// Enumerates every changed function of `fix_commit` against its first
/// parent. Files in unsupported languages or undecodable content are logged
/// as skips, never silently dropped.
pub fn extract_changed_functions(
    repo: &Path,
    fix_commit: &str,
) -> Result<CommitExtraction, ExtractError> {
    let fix_full = gitio::resolve_commit(repo, fix_commit)?;
    let parent = gitio::resolve_parent(repo, &fix_full)?;
    let changes = gitio::changed_files(repo, &parent, &fix_full)?;

    let mut changed_files: Vec<String> = changes.iter().map(|c| c.path.clone()).collect();
    changed_files.sort();

    let mut functions = Vec::new();
    let mut file_skips = Vec::new();
    for change in &changes {
        let pre_raw = match change.status {
            FileStatus::Added => None,
            _ => gitio::read_file_at(repo, &parent, &change.path),
        };
        let post_raw = match change.status {
            FileStatus::Deleted => None,
            _ => gitio::read_file_at(repo, &fix_full, &change.path),
        };
        let decoded = |raw: Option<Vec<u8>>| -> Result<Option<String>, String> {
            match raw {
                None => Ok(None),
                Some(bytes) => decode(bytes).map(Some),
            }
        };
        let (pre, post) = match (decoded(pre_raw), decoded(post_raw)) {
            (Ok(pre), Ok(post)) => (pre, post),
            (Err(reason), _) | (_, Err(reason)) => {
                file_skips.push((change.path.clone(), reason));
                continue;
            }
        };
        let probe_content = post.as_deref().or(pre.as_deref()).unwrap_or("");
        let tag = identify_language(&change.path, probe_content);
        if tag.language == Language::Other {
            file_skips.push((change.path.clone(), "unsupported-language".to_string()));
            continue;
        }
        functions.extend(diff_file_functions(
            &change.path,
            tag.language,
            pre.as_deref(),
            post.as_deref(),
        ));
    }
    functions.sort_by(|a, b| {
        (&a.file_path, a.position, &a.qualified_name)
            .cmp(&(&b.file_path, b.position, &b.qualified_name))
    });
    file_skips.sort();
    Ok(CommitExtraction {
        fix_commit: fix_full,
        parent_commit: parent,
        changed_files,
        functions,
        file_skips,
    })
}

/// Parses both versions of one file and diffs definitions by qualified name.
pub fn diff_file_functions(
    file_path: &str,
    language: Language,
    pre: Option<&str>,
    post: Option<&str>,
) -> Vec<ChangedFunction> {
    let index = |content: Option<&str>| -> BTreeMap<String, FunctionDef> {
        content
            .map(|c| {
                enumerate_functions(language, c)
                    .into_iter()
                    .map(|d| (d.qualified_name.clone(), d))
                    .collect()
            })
            .unwrap_or_default()
    };
    let pre_defs = index(pre);
    let mut post_defs = index(post);
    let mut out = Vec::new();
    for (name, pre_def) in pre_defs {
        match post_defs.remove(&name) {
            Some(post_def) => {
                if pre_def.text != post_def.text {
                    out.push(ChangedFunction {
                        file_path: file_path.to_string(),
                        qualified_name: name,
                        language,
                        change_kind: ChangeKind::Modified,
                        position: pre_def.start_line,
                        pre_text: Some(pre_def.text),
                        post_text: Some(post_def.text),
                    });
                }
            }
            None => out.push(ChangedFunction {
                file_path: file_path.to_string(),
                qualified_name: name,
                language,
                change_kind: ChangeKind::Deleted,
                position: pre_def.start_line,
                pre_text: Some(pre_def.text),
                post_text: None,
            }),
        }
    }
    for (name, post_def) in post_defs {
        out.push(ChangedFunction {
            file_path: file_path.to_string(),
            qualified_name: name,
            language,
            change_kind: ChangeKind::Added,
            position: post_def.start_line,
            pre_text: None,
            post_text: Some(post_def.text),
        });
    }
    out
}

fn pair_id(advisory_id: &str, fix_commit: &str, func: &ChangedFunction) -> String {
    let mut hasher = Sha256::new();
    hasher.update(advisory_id.as_bytes());
    hasher.update(b"|");
    hasher.update(fix_commit.as_bytes());
    hasher.update(b"|");
    hasher.update(func.file_path.as_bytes());
    hasher.update(b"|");
    hasher.update(func.qualified_name.as_bytes());
    hasher.update(b"|");
    hasher.update(format!("{:?}", func.change_kind).as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..16].to_string()
}

pub fn sample_id(advisory_id: &str, fix_commit: &str) -> String {
    let short = &fix_commit[..fix_commit.len().min(12)];
    format!("{advisory_id}:{short}")
}

/// The full benchmark produced from the retained advisories.
#[derive(Debug, Default)]
pub struct BenchmarkBuild {
    pub commits: Vec<CommitSample>,
    /// Modified pairs: pre = vulnerable candidate, post = patched candidate.
    pub pairs: Vec<FunctionPair>,
    /// Newly added functions; these feed the benign pool downstream.
    pub added: Vec<FunctionPair>,
    /// Deleted functions, stored separately.
    pub deleted: Vec<FunctionPair>,
    pub skips: Vec<SkipRecord>,
    pub exclusions: Vec<ExclusionRecord>,
}

/// Runs extraction for every fix commit of every retained advisory. One
/// `CommitSample` per (advisory, fix commit); an advisory with several fix
/// commits contributes several samples sharing its advisory id.
pub fn build_benchmark(records: &[AdvisoryRecord], store_dir: &Path) -> BenchmarkBuild {
    let mut build = BenchmarkBuild::default();
    for record in records {
        let repo = match gitio::ensure_repo(store_dir, &record.repo_url) {
            Ok(repo) => repo,
            Err(e) => {
                for commit in &record.fix_commits {
                    build.exclusions.push(ExclusionRecord {
                        advisory_id: record.advisory_id.clone(),
                        fix_commit: commit.clone(),
                        reason: format!("clone-failure: {e}"),
                    });
                }
                continue;
            }
        };
        for commit in &record.fix_commits {
            let extraction = match extract_changed_functions(&repo, commit) {
                Ok(extraction) => extraction,
                Err(ExtractError::Git(GitError::NoParent(_))) => {
                    build.exclusions.push(ExclusionRecord {
                        advisory_id: record.advisory_id.clone(),
                        fix_commit: commit.clone(),
                        reason: "no-parent".to_string(),
                    });
                    continue;
                }
                Err(e) => {
                    build.exclusions.push(ExclusionRecord {
                        advisory_id: record.advisory_id.clone(),
                        fix_commit: commit.clone(),
                        reason: format!("read-failure: {e}"),
                    });
                    continue;
                }
            };
            let sample_id = sample_id(&record.advisory_id, &extraction.fix_commit);
            let mut pair_ids = Vec::new();
            for func in &extraction.functions {
                let pair = FunctionPair {
                    pair_id: pair_id(&record.advisory_id, &extraction.fix_commit, func),
                    advisory_id: record.advisory_id.clone(),
                    fix_commit: extraction.fix_commit.clone(),
                    file_path: func.file_path.clone(),
                    function_name: func.qualified_name.clone(),
                    language: func.language,
                    pre_text: func.pre_text.clone(),
                    post_text: func.post_text.clone(),
                    change_kind: func.change_kind,
                };
                match func.change_kind {
                    ChangeKind::Modified => {
                        pair_ids.push(pair.pair_id.clone());
                        build.pairs.push(pair);
                    }
                    ChangeKind::Added => build.added.push(pair),
                    ChangeKind::Deleted => build.deleted.push(pair),
                }
            }
            for (file_path, reason) in &extraction.file_skips {
                build.skips.push(SkipRecord {
                    advisory_id: record.advisory_id.clone(),
                    fix_commit: extraction.fix_commit.clone(),
                    file_path: Some(file_path.clone()),
                    reason: reason.clone(),
                });
            }
            if pair_ids.is_empty() {
                build.skips.push(SkipRecord {
                    advisory_id: record.advisory_id.clone(),
                    fix_commit: extraction.fix_commit.clone(),
                    file_path: None,
                    reason: "no-modified-functions".to_string(),
                });
            }
            build.commits.push(CommitSample {
                sample_id,
                advisory_id: record.advisory_id.clone(),
                repo_url: record.repo_url.clone(),
                fix_commit: extraction.fix_commit.clone(),
                parent_commit: extraction.parent_commit.clone(),
                changed_files: extraction.changed_files.clone(),
                function_pair_ids: pair_ids,
            });
        }
    }
    build
}
