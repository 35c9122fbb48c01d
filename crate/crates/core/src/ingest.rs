//! Advisory ingestion: load normalized vulnerability reports, apply the
//! retention filters, and deduplicate.
//!
//! Ingestion consumes pre-fetched record files (one JSON object per line) so
//! the pipeline is reproducible offline; reaching the advisory platforms
//! themselves is out of scope.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonl::LineError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read advisory stream: {0}")]
    Unreadable(#[from] std::io::Error),
    #[error("cannot read probe fixture {path}: {message}")]
    ProbeFixture { path: String, message: String },
}

/// Where a vulnerability report was published.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    GithubAdvisories,
    Snyk,
    Huntr,
    Other,
}

/// One published vulnerability report in the normalized record schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisoryRecord {
    pub advisory_id: String,
    pub source: Source,
    pub cve_id: Option<String>,
    pub cwe_ids: Vec<String>,
    pub cvss: Option<f64>,
    pub description: String,
    pub package_name: String,
    pub ecosystem: String,
    pub repo_url: String,
    pub fix_commits: Vec<String>,
}

fn cwe_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^CWE-\d+$").unwrap())
}

fn commit_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[0-9a-f]{4,40}$").unwrap())
}

impl AdvisoryRecord {
    /// Checks the record-level invariants the rest of the pipeline relies on.
    /// Commit ids are accepted lowercased; abbreviated (>= 4 hex) ids are fine.
    pub fn validate(&self) -> Result<(), String> {
        for cwe in &self.cwe_ids {
            if !cwe_pattern().is_match(cwe) {
                return Err(format!("cwe id {cwe:?} does not match CWE-<digits>"));
            }
        }
        if let Some(score) = self.cvss {
            if !(0.0..=10.0).contains(&score) {
                return Err(format!("cvss {score} outside [0.0, 10.0]"));
            }
        }
        for commit in &self.fix_commits {
            if !commit_pattern().is_match(&commit.to_lowercase()) {
                return Err(format!("fix commit {commit:?} is not a 4-40 hex id"));
            }
        }
        if self.repo_url.trim().is_empty() {
            return Err("repo_url is empty".to_string());
        }
        Ok(())
    }

    /// First listed CWE id, which downstream clustering treats as the
    /// advisory's type.
    pub fn primary_cwe(&self) -> Option<&str> {
        self.cwe_ids.first().map(String::as_str)
    }
}

/// Outcome of loading one advisory stream.
#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<AdvisoryRecord>,
    pub errors: Vec<LineError>,
}

/// Loads advisories from a line-delimited record stream. Malformed lines are
/// collected into `errors` with their line numbers; valid records come back
/// in input order. Commit ids are normalized to lowercase.
pub fn load_advisories(reader: impl Read) -> Result<LoadOutcome, IngestError> {
    let reader = std::io::BufReader::new(reader);
    let mut out = LoadOutcome::default();
    for (idx, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        match serde_json::from_str::<AdvisoryRecord>(&line) {
            Ok(mut record) => match record.validate() {
                Ok(()) => {
                    for commit in &mut record.fix_commits {
                        *commit = commit.to_lowercase();
                    }
                    out.records.push(record);
                }
                Err(message) => out.errors.push(LineError {
                    line: line_no,
                    message,
                }),
            },
            Err(e) => out.errors.push(LineError {
                line: line_no,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}

/// Answer from probing one (repository, commit) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeAnswer {
    pub reachable: bool,
    pub commit_present: bool,
}

/// Callback contract answering whether a repository is reachable and a fix
/// commit still exists. Answers must be stable within one pipeline run; the
/// [`MemoizedProbe`] wrapper enforces that.
pub trait RepoProbe {
    fn probe(&self, repo_url: &str, commit_id: &str) -> ProbeAnswer;
}

/// Memoizes another probe so repeated questions get identical answers.
pub struct MemoizedProbe<P> {
    inner: P,
    cache: RefCell<BTreeMap<(String, String), ProbeAnswer>>,
}

impl<P: RepoProbe> MemoizedProbe<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            cache: RefCell::new(BTreeMap::new()),
        }
    }
}

impl<P: RepoProbe> RepoProbe for MemoizedProbe<P> {
    fn probe(&self, repo_url: &str, commit_id: &str) -> ProbeAnswer {
        let key = (repo_url.to_string(), commit_id.to_string());
        if let Some(answer) = self.cache.borrow().get(&key) {
            return *answer;
        }
        let answer = self.inner.probe(repo_url, commit_id);
        self.cache.borrow_mut().insert(key, answer);
        answer
    }
}

/// Offline probe backed by a fixture map. Repositories absent from the map
/// are unreachable.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct FixtureProbe {
    /// repo url -> commits known to exist (probed ids are matched by prefix,
    /// so abbreviated fix-commit ids resolve against full ids and vice versa).
    pub repos: BTreeMap<String, Vec<String>>,
}

impl FixtureProbe {
    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::ProbeFixture {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| IngestError::ProbeFixture {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

impl RepoProbe for FixtureProbe {
    fn probe(&self, repo_url: &str, commit_id: &str) -> ProbeAnswer {
        match self.repos.get(repo_url) {
            Some(commits) => ProbeAnswer {
                reachable: true,
                commit_present: commits.iter().any(|c| {
                    let c = c.to_lowercase();
                    let probed = commit_id.to_lowercase();
                    c.starts_with(&probed) || probed.starts_with(&c)
                }),
            },
            None => ProbeAnswer {
                reachable: false,
                commit_present: false,
            },
        }
    }
}

/// Probe backed by the local repository store: a repository is reachable if
/// it can be cloned into (or already exists in) the store, and a commit is
/// present if git can resolve it there.
pub struct StoreProbe {
    store_dir: PathBuf,
}

impl StoreProbe {
    pub fn new(store_dir: impl Into<PathBuf>) -> Self {
        Self {
            store_dir: store_dir.into(),
        }
    }
}

impl RepoProbe for StoreProbe {
    fn probe(&self, repo_url: &str, commit_id: &str) -> ProbeAnswer {
        match crate::gitio::ensure_repo(&self.store_dir, repo_url) {
            Ok(repo_dir) => ProbeAnswer {
                reachable: true,
                commit_present: crate::gitio::commit_exists(&repo_dir, commit_id),
            },
            Err(_) => ProbeAnswer {
                reachable: false,
                commit_present: false,
            },
        }
    }
}

/// Why a record was rejected during filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NoFixCommit,
    Unreachable,
    CommitMissing,
    Duplicate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRecord {
    pub record: AdvisoryRecord,
    pub reason: RejectReason,
}

#[derive(Debug, Default)]
pub struct FilterOutcome {
    pub retained: Vec<AdvisoryRecord>,
    pub rejected: Vec<RejectedRecord>,
}

/// Canonical duplicate key: normalized repository URL joined with the sorted
/// fix-commit set. Two advisories fixed by the same commits in the same
/// repository describe one underlying flaw for curation purposes.
pub fn dedup_key(record: &AdvisoryRecord) -> String {
    let mut url = record.repo_url.trim().to_lowercase();
    loop {
        let before = url.len();
        while url.ends_with('/') {
            url.pop();
        }
        if let Some(stripped) = url.strip_suffix(".git") {
            url = stripped.to_string();
        }
        if url.len() == before {
            break;
        }
    }
    let mut commits: Vec<String> = record
        .fix_commits
        .iter()
        .map(|c| c.to_lowercase())
        .collect();
    commits.sort();
    commits.dedup();
    format!("{url}|{}", commits.join(","))
}

/// Applies the retention criteria in order: a fix commit exists, the
/// repository and every fix commit are still reachable, and the record is not
/// a duplicate of an earlier retained record. The earliest record under input
/// order wins a duplicate tie.
pub fn filter_advisories(records: &[AdvisoryRecord], probe: &dyn RepoProbe) -> FilterOutcome {
    let mut outcome = FilterOutcome::default();
    let mut seen_keys: HashSet<String> = HashSet::new();
    for record in records {
        if record.fix_commits.is_empty() {
            outcome.rejected.push(RejectedRecord {
                record: record.clone(),
                reason: RejectReason::NoFixCommit,
            });
            continue;
        }
        let answers: Vec<ProbeAnswer> = record
            .fix_commits
            .iter()
            .map(|c| probe.probe(&record.repo_url, c))
            .collect();
        if answers.iter().any(|a| !a.reachable) {
            outcome.rejected.push(RejectedRecord {
                record: record.clone(),
                reason: RejectReason::Unreachable,
            });
            continue;
        }
        if answers.iter().any(|a| !a.commit_present) {
            outcome.rejected.push(RejectedRecord {
                record: record.clone(),
                reason: RejectReason::CommitMissing,
            });
            continue;
        }
        let key = dedup_key(record);
        if !seen_keys.insert(key) {
            outcome.rejected.push(RejectedRecord {
                record: record.clone(),
                reason: RejectReason::Duplicate,
            });
            continue;
        }
        outcome.retained.push(record.clone());
    }
    outcome
}

#[cfg(test)]
pub(crate) fn sample_record(advisory_id: &str, repo_url: &str, commits: &[&str]) -> AdvisoryRecord {
    AdvisoryRecord {
        advisory_id: advisory_id.to_string(),
        source: Source::Other,
        cve_id: None,
        cwe_ids: vec!["CWE-79".to_string()],
        cvss: Some(7.5),
        description: "test advisory".to_string(),
        package_name: "pkg".to_string(),
        ecosystem: "pypi".to_string(),
        repo_url: repo_url.to_string(),
        fix_commits: commits.iter().map(|c| c.to_string()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct AlwaysYes;
    impl RepoProbe for AlwaysYes {
        fn probe(&self, _: &str, _: &str) -> ProbeAnswer {
            ProbeAnswer {
                reachable: true,
                commit_present: true,
            }
        }
    }

    fn record_json(advisory_id: &str) -> String {
        serde_json::to_string(&sample_record(advisory_id, "https://example.com/a/b", &["abcd12"]))
            .unwrap()
    }

    #[test]
    fn empty_file_yields_empty_list() {
        let out = load_advisories("".as_bytes()).unwrap();
        assert!(out.records.is_empty());
        assert!(out.errors.is_empty());
    }

    #[test]
    fn valid_lines_load_in_order() {
        let input = format!("{}\n{}\n{}\n", record_json("A"), record_json("B"), record_json("C"));
        let out = load_advisories(input.as_bytes()).unwrap();
        assert_eq!(
            out.records.iter().map(|r| r.advisory_id.as_str()).collect::<Vec<_>>(),
            vec!["A", "B", "C"]
        );
        assert!(out.errors.is_empty());
    }

    #[test]
    fn missing_field_is_reported_with_line_number() {
        let bad = r#"{"advisory_id":"X","source":"snyk","cve_id":null,"cwe_ids":[],"cvss":null,"description":"d","package_name":"p","ecosystem":"pypi","fix_commits":["abcd12"]}"#;
        let input = format!("{}\n{}\n", record_json("A"), bad);
        let out = load_advisories(input.as_bytes()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.errors[0].line, 2);
        assert!(out.errors[0].message.contains("repo_url"));
    }

    #[test]
    fn invariant_violations_are_line_errors() {
        let mut bad_cwe = sample_record("A", "https://example.com/a/b", &["abcd12"]);
        bad_cwe.cwe_ids = vec!["CWE79".to_string()];
        let mut bad_cvss = sample_record("B", "https://example.com/a/b", &["abcd12"]);
        bad_cvss.cvss = Some(11.0);
        let mut bad_commit = sample_record("C", "https://example.com/a/b", &["xyz"]);
        bad_commit.fix_commits = vec!["nothex!".to_string()];
        let input = format!(
            "{}\n{}\n{}\n",
            serde_json::to_string(&bad_cwe).unwrap(),
            serde_json::to_string(&bad_cvss).unwrap(),
            serde_json::to_string(&bad_commit).unwrap()
        );
        let out = load_advisories(input.as_bytes()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(
            out.errors.iter().map(|e| e.line).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn dedup_key_normalizes_url_and_sorts_commits() {
        let a = sample_record("A", "https://github.com/A/B.git", &["c1c1"]);
        let b = sample_record("B", "https://github.com/a/b", &["c1c1"]);
        assert_eq!(dedup_key(&a), dedup_key(&b));

        let one = sample_record("A", "https://github.com/a/b", &["c1c1"]);
        let two = sample_record("B", "https://github.com/a/b", &["c1c1", "c2c2"]);
        assert_ne!(dedup_key(&one), dedup_key(&two));

        let fwd = sample_record("A", "https://github.com/a/b", &["c2c2", "c1c1"]);
        let rev = sample_record("B", "https://github.com/a/b", &["c1c1", "c2c2"]);
        assert_eq!(dedup_key(&fwd), dedup_key(&rev));
    }

    #[test]
    fn empty_fix_commits_rejected() {
        let record = sample_record("A", "https://example.com/a/b", &[]);
        let out = filter_advisories(&[record], &AlwaysYes);
        assert!(out.retained.is_empty());
        assert_eq!(out.rejected[0].reason, RejectReason::NoFixCommit);
    }

    #[test]
    fn duplicate_keeps_earliest() {
        let a = sample_record("A", "https://github.com/x/y.git", &["abcd12"]);
        let b = sample_record("B", "https://github.com/X/Y", &["ABCD12"]);
        let out = filter_advisories(&[a, b], &AlwaysYes);
        assert_eq!(out.retained.len(), 1);
        assert_eq!(out.retained[0].advisory_id, "A");
        assert_eq!(out.rejected[0].reason, RejectReason::Duplicate);
        assert_eq!(out.rejected[0].record.advisory_id, "B");
    }

    #[test]
    fn missing_commit_rejected() {
        struct NoCommit;
        impl RepoProbe for NoCommit {
            fn probe(&self, _: &str, _: &str) -> ProbeAnswer {
                ProbeAnswer {
                    reachable: true,
                    commit_present: false,
                }
            }
        }
        let record = sample_record("A", "https://example.com/a/b", &["abcd12"]);
        let out = filter_advisories(&[record], &NoCommit);
        assert_eq!(out.rejected[0].reason, RejectReason::CommitMissing);
    }

    #[test]
    fn unreachable_rejected() {
        let probe = FixtureProbe::default();
        let record = sample_record("A", "https://example.com/a/b", &["abcd12"]);
        let out = filter_advisories(&[record], &probe);
        assert_eq!(out.rejected[0].reason, RejectReason::Unreachable);
    }

    #[test]
    fn filter_is_idempotent_on_retained() {
        let records = vec![
            sample_record("A", "https://github.com/x/y", &["aaaa"]),
            sample_record("B", "https://github.com/x/y", &["aaaa"]),
            sample_record("C", "https://github.com/x/z", &["bbbb"]),
            sample_record("D", "https://github.com/x/w", &[]),
        ];
        let first = filter_advisories(&records, &AlwaysYes);
        let second = filter_advisories(&first.retained, &AlwaysYes);
        assert_eq!(second.retained, first.retained);
        assert!(second.rejected.is_empty());
        assert_eq!(first.retained.len() + first.rejected.len(), records.len());
    }
}
