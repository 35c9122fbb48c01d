//! Distribution analyses over the cleansed benchmark: language composition
//! at commit and function level, CWE clustering with severity means,
//! vulnerability span statistics, and package-level multi-language profiles
//! with outlier-adjusted averages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{CommitSample, FunctionPair, Language};
use crate::ingest::AdvisoryRecord;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("cluster map: {0}")]
    ClusterMap(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
}

/// Name of the default cluster for unmapped CWE ids.
pub const OTHERS_CLUSTER: &str = "Others";

/// Ordered clustering of CWE ids into mechanism/cause/consequence categories.
/// Lookup is total: unmapped ids fall into [`OTHERS_CLUSTER`].
#[derive(Debug, Clone)]
pub struct CweClusterMap {
    clusters: Vec<(String, BTreeSet<String>)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterEntry {
    cluster: String,
    members: Vec<String>,
}

impl CweClusterMap {
    /// The map shipped with the toolkit.
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../data/cwe_clusters.json"))
            .expect("builtin cluster map is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, AnalyticsError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AnalyticsError::ClusterMap(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, AnalyticsError> {
        let entries: Vec<ClusterEntry> =
            serde_json::from_str(text).map_err(|e| AnalyticsError::ClusterMap(e.to_string()))?;
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut clusters = Vec::new();
        for entry in entries {
            let members: BTreeSet<String> = entry.members.into_iter().collect();
            for id in &members {
                if !seen.insert(id.clone()) {
                    return Err(AnalyticsError::ClusterMap(format!(
                        "{id} appears in more than one cluster"
                    )));
                }
            }
            clusters.push((entry.cluster, members));
        }
        Ok(CweClusterMap { clusters })
    }

    /// First cluster containing the id; `Others` when unmapped.
    pub fn cluster_of(&self, cwe_id: &str) -> &str {
        self.clusters
            .iter()
            .find(|(_, members)| members.contains(cwe_id))
            .map(|(name, _)| name.as_str())
            .unwrap_or(OTHERS_CLUSTER)
    }

    /// Cluster names in map order, `Others` last.
    pub fn cluster_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.clusters.iter().map(|(n, _)| n.as_str()).collect();
        names.push(OTHERS_CLUSTER);
        names
    }
}

/// Total lookup: first cluster containing the id, else the default.
pub fn cluster_cwe<'a>(cwe_id: &str, map: &'a CweClusterMap) -> &'a str {
    map.cluster_of(cwe_id)
}

/// Commit-level language buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LanguageBucket {
    Python,
    CCpp,
    JavascriptTypescript,
    Java,
    OtherLanguage,
    MultipleLanguages,
}

impl fmt::Display for LanguageBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LanguageBucket::Python => "Python",
            LanguageBucket::CCpp => "C/C++",
            LanguageBucket::JavascriptTypescript => "JavaScript/TypeScript",
            LanguageBucket::Java => "Java",
            LanguageBucket::OtherLanguage => "Other Language",
            LanguageBucket::MultipleLanguages => "Multiple Languages",
        };
        f.write_str(s)
    }
}

impl From<Language> for LanguageBucket {
    fn from(lang: Language) -> Self {
        match lang {
            Language::Python => LanguageBucket::Python,
            Language::CCpp => LanguageBucket::CCpp,
            Language::JavascriptTypescript => LanguageBucket::JavascriptTypescript,
            Language::Java => LanguageBucket::Java,
            Language::Other => LanguageBucket::OtherLanguage,
        }
    }
}

/// Aggregates a commit's retained-function languages: homogeneous tags give
/// that language, anything mixed is `Multiple Languages`.
pub fn commit_language(languages: &[Language]) -> Option<LanguageBucket> {
    let first = *languages.first()?;
    if languages.iter().all(|l| *l == first) {
        Some(first.into())
    } else {
        Some(LanguageBucket::MultipleLanguages)
    }
}

/// Quantile by linear interpolation at position `(n-1) * q` on sorted data.
pub fn quantile_linear(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Keeps values inside the Tukey fences `[Q1 - 1.5*IQR, Q3 + 1.5*IQR]`,
/// preserving input order.
pub fn iqr_filter(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaNs in counts"));
    let q1 = quantile_linear(&sorted, 0.25);
    let q3 = quantile_linear(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo = q1 - 1.5 * iqr;
    let hi = q3 + 1.5 * iqr;
    values
        .iter()
        .copied()
        .filter(|v| (lo..=hi).contains(v))
        .collect()
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        round1(part as f64 * 100.0 / whole as f64)
    }
}

/// Span statistics: how many retained vulnerable functions each commit has.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanStats {
    /// (function count, number of commits) sorted by function count.
    pub histogram: Vec<(usize, usize)>,
    /// Mean functions per commit, one decimal.
    pub mean: f64,
    /// Share of commits with more than one function, percent, one decimal.
    pub cross_function_share_pct: f64,
    /// Mean functions among cross-function commits, one decimal; absent when
    /// none are cross-function.
    pub cross_function_mean: Option<f64>,
}

pub fn span_distribution(counts: &[usize]) -> Result<SpanStats, AnalyticsError> {
    if counts.is_empty() {
        return Err(AnalyticsError::EmptyInput("span over no commits".into()));
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in counts {
        *histogram.entry(c).or_insert(0) += 1;
    }
    let total: usize = counts.iter().sum();
    let cross: Vec<usize> = counts.iter().copied().filter(|&c| c > 1).collect();
    Ok(SpanStats {
        histogram: histogram.into_iter().collect(),
        mean: round1(total as f64 / counts.len() as f64),
        cross_function_share_pct: pct(cross.len(), counts.len()),
        cross_function_mean: if cross.is_empty() {
            None
        } else {
            Some(round1(
                cross.iter().sum::<usize>() as f64 / cross.len() as f64,
            ))
        },
    })
}

/// Per-package language statistics supplied as an input file; a fetch
/// adapter may populate it, analysis itself stays offline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PackageLanguageStats {
    pub package_name: String,
    pub languages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRow {
    pub bucket: String,
    pub commit_count: usize,
    pub commit_pct: f64,
    /// Absent for `Multiple Languages`, which exists only at commit level.
    pub function_count: Option<usize>,
    pub function_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CweRow {
    pub cluster: String,
    pub commit_count: usize,
    pub commit_pct: f64,
    pub function_count: usize,
    pub function_pct: f64,
    /// Mean CVSS over scored advisories; absent when none are scored.
    pub mean_cvss: Option<f64>,
    pub scored_advisories: usize,
    pub unscored_advisories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageProfile {
    pub packages_total: usize,
    pub single_language: usize,
    pub single_language_share_pct: f64,
    pub multi_language: usize,
    /// Mean vulnerabilities per package, raw and after IQR adjustment.
    pub raw_mean_single: Option<f64>,
    pub raw_mean_multi: Option<f64>,
    pub iqr_mean_single: Option<f64>,
    pub iqr_mean_multi: Option<f64>,
    /// Benchmark packages missing from the statistics file.
    pub missing_from_stats: usize,
}

/// All distribution analyses over one cleansed benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub commit_total: usize,
    pub function_total: usize,
    pub language_table: Vec<LanguageRow>,
    pub cwe_table: Vec<CweRow>,
    pub span: SpanStats,
    pub packages: Option<PackageProfile>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(round1(values.iter().sum::<f64>() / values.len() as f64))
    }
}

/// Builds the full report. Advisories with multiple CWE ids count toward the
/// cluster of their first listed id. CVSS means skip unscored advisories and
/// report how many were skipped.
pub fn build_report(
    commits: &[CommitSample],
    pairs: &[FunctionPair],
    advisories: &[AdvisoryRecord],
    pkg_stats: Option<&[PackageLanguageStats]>,
    map: &CweClusterMap,
) -> Result<DistributionReport, AnalyticsError> {
    let advisory_index: BTreeMap<&str, &AdvisoryRecord> = advisories
        .iter()
        .map(|a| (a.advisory_id.as_str(), a))
        .collect();
    let pair_index: BTreeMap<&str, &FunctionPair> =
        pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();

    // Language composition.
    let mut commit_buckets: BTreeMap<LanguageBucket, usize> = BTreeMap::new();
    let mut function_langs: BTreeMap<Language, usize> = BTreeMap::new();
    let mut span_counts = Vec::new();
    for commit in commits {
        let langs: Vec<Language> = commit
            .function_pair_ids
            .iter()
            .filter_map(|id| pair_index.get(id.as_str()).map(|p| p.language))
            .collect();
        if let Some(bucket) = commit_language(&langs) {
            *commit_buckets.entry(bucket).or_insert(0) += 1;
        }
        span_counts.push(langs.len());
    }
    for pair in pairs {
        *function_langs.entry(pair.language).or_insert(0) += 1;
    }
    let commit_total = commits.len();
    let function_total = pairs.len();

    let language_table = [
        LanguageBucket::Python,
        LanguageBucket::CCpp,
        LanguageBucket::JavascriptTypescript,
        LanguageBucket::Java,
        LanguageBucket::OtherLanguage,
        LanguageBucket::MultipleLanguages,
    ]
    .into_iter()
    .map(|bucket| {
        let commit_count = commit_buckets.get(&bucket).copied().unwrap_or(0);
        let function_count = match bucket {
            LanguageBucket::MultipleLanguages => None,
            LanguageBucket::Python => Some(Language::Python),
            LanguageBucket::CCpp => Some(Language::CCpp),
            LanguageBucket::JavascriptTypescript => Some(Language::JavascriptTypescript),
            LanguageBucket::Java => Some(Language::Java),
            LanguageBucket::OtherLanguage => Some(Language::Other),
        }
        .map(|lang| function_langs.get(&lang).copied().unwrap_or(0));
        LanguageRow {
            bucket: bucket.to_string(),
            commit_count,
            commit_pct: pct(commit_count, commit_total),
            function_count,
            function_pct: function_count.map(|c| pct(c, function_total)),
        }
    })
    .collect();

    // CWE clusters keyed by each advisory's first listed id.
    let mut cluster_commits: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cluster_functions: BTreeMap<&str, usize> = BTreeMap::new();
    let mut cluster_advisories: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for commit in commits {
        let cluster = advisory_index
            .get(commit.advisory_id.as_str())
            .and_then(|a| a.primary_cwe())
            .map(|cwe| map.cluster_of(cwe))
            .unwrap_or(OTHERS_CLUSTER);
        *cluster_commits.entry(cluster).or_insert(0) += 1;
        *cluster_functions.entry(cluster).or_insert(0) += commit.function_pair_ids.len();
        cluster_advisories
            .entry(cluster)
            .or_default()
            .insert(commit.advisory_id.as_str());
    }
    let cwe_table = map
        .cluster_names()
        .into_iter()
        .map(|cluster| {
            let commit_count = cluster_commits.get(cluster).copied().unwrap_or(0);
            let function_count = cluster_functions.get(cluster).copied().unwrap_or(0);
            let mut scores = Vec::new();
            let mut unscored = 0usize;
            if let Some(ids) = cluster_advisories.get(cluster) {
                for id in ids {
                    match advisory_index.get(id).and_then(|a| a.cvss) {
                        Some(score) => scores.push(score),
                        None => unscored += 1,
                    }
                }
            }
            CweRow {
                cluster: cluster.to_string(),
                commit_count,
                commit_pct: pct(commit_count, commit_total),
                function_count,
                function_pct: pct(function_count, function_total),
                mean_cvss: mean(&scores),
                scored_advisories: scores.len(),
                unscored_advisories: unscored,
            }
        })
        .collect();

    let span = span_distribution(&span_counts)?;

    // Package profiles from the provided language statistics.
    let packages = pkg_stats.map(|stats| {
        let mut vulns_per_package: BTreeMap<&str, usize> = BTreeMap::new();
        for commit in commits {
            if let Some(advisory) = advisory_index.get(commit.advisory_id.as_str()) {
                *vulns_per_package
                    .entry(advisory.package_name.as_str())
                    .or_insert(0) += 1;
            }
        }
        let known: BTreeSet<&str> = stats.iter().map(|s| s.package_name.as_str()).collect();
        let missing = vulns_per_package
            .keys()
            .filter(|p| !known.contains(*p))
            .count();
        let mut single = Vec::new();
        let mut multi = Vec::new();
        for s in stats {
            let count = vulns_per_package
                .get(s.package_name.as_str())
                .copied()
                .unwrap_or(0) as f64;
            if s.languages.len() <= 1 {
                single.push(count);
            } else {
                multi.push(count);
            }
        }
        PackageProfile {
            packages_total: stats.len(),
            single_language: single.len(),
            single_language_share_pct: pct(single.len(), stats.len()),
            multi_language: multi.len(),
            raw_mean_single: mean(&single),
            raw_mean_multi: mean(&multi),
            iqr_mean_single: mean(&iqr_filter(&single)),
            iqr_mean_multi: mean(&iqr_filter(&multi)),
            missing_from_stats: missing,
        }
    });

    Ok(DistributionReport {
        commit_total,
        function_total,
        language_table,
        cwe_table,
        span,
        packages,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.1}"),
        None => "-".to_string(),
    }
}

/// Renders the report as aligned text tables.
pub fn render_text(report: &DistributionReport) -> String {
    let mut out = String::new();
    out.push_str("Language composition\n");
    out.push_str(&format!(
        "{:<24} {:>9} {:>7}  {:>10} {:>7}\n",
        "Language", "#Commits", "%", "#Functions", "%"
    ));
    for row in &report.language_table {
        out.push_str(&format!(
            "{:<24} {:>9} {:>6.1}%  {:>10} {:>7}\n",
            row.bucket,
            row.commit_count,
            row.commit_pct,
            row.function_count
                .map(|c| c.to_string())
                .unwrap_or_else(|| "-".to_string()),
            row.function_pct
                .map(|p| format!("{p:.1}%"))
                .unwrap_or_else(|| "-".to_string()),
        ));
    }
    out.push_str(&format!(
        "{:<24} {:>9} {:>7}  {:>10}\n\n",
        "Total", report.commit_total, "", report.function_total
    ));

    out.push_str("Vulnerability types\n");
    out.push_str(&format!(
        "{:<48} {:>9} {:>7}  {:>10} {:>7}  {:>9}\n",
        "Type", "#Commits", "%", "#Functions", "%", "Avg. CVSS"
    ));
    for row in &report.cwe_table {
        out.push_str(&format!(
            "{:<48} {:>9} {:>6.1}%  {:>10} {:>6.1}%  {:>9}\n",
            row.cluster,
            row.commit_count,
            row.commit_pct,
            row.function_count,
            row.function_pct,
            fmt_opt(row.mean_cvss),
        ));
    }

    out.push_str("\nVulnerability span\n");
    for (functions, commits) in &report.span.histogram {
        out.push_str(&format!("{functions:>3} function(s): {commits} commit(s)\n"));
    }
    out.push_str(&format!(
        "mean {:.1}, cross-function share {:.1}%\n",
        report.span.mean, report.span.cross_function_share_pct
    ));

    if let Some(p) = &report.packages {
        out.push_str("\nPackage profile\n");
        out.push_str(&format!(
            "packages {}, single-language {} ({:.1}%), multi-language {}\n",
            p.packages_total, p.single_language, p.single_language_share_pct, p.multi_language
        ));
        out.push_str(&format!(
            "vulns/package raw: single {} multi {}; IQR-adjusted: single {} multi {}\n",
            fmt_opt(p.raw_mean_single),
            fmt_opt(p.raw_mean_multi),
            fmt_opt(p.iqr_mean_single),
            fmt_opt(p.iqr_mean_multi),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::ChangeKind;
    use crate::ingest::sample_record;

    #[test]
    fn paper_named_merges_land_in_one_cluster() {
        let map = CweClusterMap::builtin();
        assert_eq!(map.cluster_of("CWE-125"), "Out-of-Bound Read/Write");
        assert_eq!(map.cluster_of("CWE-787"), "Out-of-Bound Read/Write");
        assert_eq!(map.cluster_of("CWE-120"), "Out-of-Bound Read/Write");
        assert_eq!(map.cluster_of("CWE-122"), "Out-of-Bound Read/Write");
        assert_eq!(map.cluster_of("CWE-99999"), OTHERS_CLUSTER);
        assert_eq!(map.cluster_of("CWE-79"), "Injection");
        assert_eq!(map.cluster_of("CWE-352"), "Request Forgery");
    }

    #[test]
    fn builtin_map_has_table_shape() {
        let map = CweClusterMap::builtin();
        // 22 named categories plus the default.
        assert_eq!(map.cluster_names().len(), 23);
        assert_eq!(*map.cluster_names().last().unwrap(), OTHERS_CLUSTER);
    }

    #[test]
    fn duplicate_members_are_rejected() {
        let bad = r#"[{"cluster":"A","members":["CWE-1"]},{"cluster":"B","members":["CWE-1"]}]"#;
        assert!(CweClusterMap::from_json(bad).is_err());
    }

    #[test]
    fn commit_language_buckets() {
        assert_eq!(
            commit_language(&[Language::Python, Language::Python]),
            Some(LanguageBucket::Python)
        );
        assert_eq!(
            commit_language(&[Language::Python, Language::CCpp]),
            Some(LanguageBucket::MultipleLanguages)
        );
        assert_eq!(commit_language(&[Language::Java]), Some(LanguageBucket::Java));
        assert_eq!(commit_language(&[]), None);
    }

    #[test]
    fn iqr_filter_matches_hand_cases() {
        assert_eq!(iqr_filter(&[5.0, 5.0, 5.0, 5.0]), vec![5.0, 5.0, 5.0, 5.0]);
        // Q1 = 2, Q3 = 4, fences [-1, 7].
        assert_eq!(
            iqr_filter(&[1.0, 2.0, 3.0, 4.0, 100.0]),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(iqr_filter(&[7.0]), vec![7.0]);
    }

    #[test]
    fn span_matches_hand_tally() {
        let stats = span_distribution(&[1, 1, 2]).unwrap();
        assert_eq!(stats.mean, 1.3);
        assert_eq!(stats.cross_function_share_pct, 33.3);

        let all_one = span_distribution(&[1, 1, 1]).unwrap();
        assert_eq!(all_one.cross_function_share_pct, 0.0);
        assert!(all_one.cross_function_mean.is_none());

        let wide = span_distribution(&[1, 2, 3, 13]).unwrap();
        assert_eq!(wide.histogram, vec![(1, 1), (2, 1), (3, 1), (13, 1)]);
        assert_eq!(wide.histogram.last().unwrap().0, 13);
    }

    fn commit_with(advisory: &str, n: usize, sample: &str) -> CommitSample {
        CommitSample {
            sample_id: sample.to_string(),
            advisory_id: advisory.to_string(),
            repo_url: "u".into(),
            fix_commit: "f".repeat(40),
            parent_commit: "0".repeat(40),
            changed_files: vec![],
            function_pair_ids: (0..n).map(|i| format!("{sample}-p{i}")).collect(),
        }
    }

    fn pair_with(id: &str, language: Language) -> FunctionPair {
        FunctionPair {
            pair_id: id.to_string(),
            advisory_id: "A".into(),
            fix_commit: "f".repeat(40),
            file_path: "a.py".into(),
            function_name: "f".into(),
            language,
            pre_text: Some("x".into()),
            post_text: Some("y".into()),
            change_kind: ChangeKind::Modified,
        }
    }

    #[test]
    fn cluster_means_skip_unscored_advisories() {
        let mut a1 = sample_record("A1", "https://e/x/y", &["aaaa"]);
        a1.cwe_ids = vec!["CWE-125".into()];
        a1.cvss = Some(6.0);
        let mut a2 = sample_record("A2", "https://e/x/z", &["bbbb"]);
        a2.cwe_ids = vec!["CWE-787".into()];
        a2.cvss = Some(8.0);
        let mut a3 = sample_record("A3", "https://e/x/w", &["cccc"]);
        a3.cwe_ids = vec!["CWE-476".into()];
        a3.cvss = None;

        let commits = vec![
            commit_with("A1", 1, "s1"),
            commit_with("A2", 1, "s2"),
            commit_with("A3", 1, "s3"),
        ];
        let pairs = vec![
            pair_with("s1-p0", Language::CCpp),
            pair_with("s2-p0", Language::CCpp),
            pair_with("s3-p0", Language::CCpp),
        ];
        let report = build_report(
            &commits,
            &pairs,
            &[a1, a2, a3],
            None,
            &CweClusterMap::builtin(),
        )
        .unwrap();
        let oob = report
            .cwe_table
            .iter()
            .find(|r| r.cluster == "Out-of-Bound Read/Write")
            .unwrap();
        assert_eq!(oob.commit_count, 2);
        assert_eq!(oob.mean_cvss, Some(7.0));
        let npd = report
            .cwe_table
            .iter()
            .find(|r| r.cluster == "NULL Pointer Dereference")
            .unwrap();
        assert_eq!(npd.mean_cvss, None);
        assert_eq!(npd.unscored_advisories, 1);
    }

    #[test]
    fn package_profile_counts_single_language_share() {
        let advisories: Vec<AdvisoryRecord> = (0..10)
            .map(|i| {
                let mut a = sample_record(
                    &format!("A{i}"),
                    &format!("https://e/o/r{i}"),
                    &["aaaa"],
                );
                a.package_name = format!("pkg{i}");
                a
            })
            .collect();
        let commits: Vec<CommitSample> = (0..10)
            .map(|i| commit_with(&format!("A{i}"), 1, &format!("s{i}")))
            .collect();
        let pairs: Vec<FunctionPair> = (0..10)
            .map(|i| pair_with(&format!("s{i}-p0"), Language::Python))
            .collect();
        let stats: Vec<PackageLanguageStats> = (0..10)
            .map(|i| PackageLanguageStats {
                package_name: format!("pkg{i}"),
                languages: if i < 4 {
                    vec!["Python".into()]
                } else {
                    vec!["Python".into(), "C".into()]
                },
            })
            .collect();
        let report = build_report(
            &commits,
            &pairs,
            &advisories,
            Some(&stats),
            &CweClusterMap::builtin(),
        )
        .unwrap();
        let profile = report.packages.unwrap();
        assert_eq!(profile.single_language_share_pct, 40.0);
        assert_eq!(profile.packages_total, 10);
        assert_eq!(profile.raw_mean_single, Some(1.0));
    }

    #[test]
    fn language_percentages_sum_to_hundred() {
        let commits = vec![
            commit_with("A1", 1, "s1"),
            commit_with("A2", 1, "s2"),
            commit_with("A3", 2, "s3"),
        ];
        let pairs = vec![
            pair_with("s1-p0", Language::Python),
            pair_with("s2-p0", Language::Java),
            pair_with("s3-p0", Language::Python),
            pair_with("s3-p1", Language::CCpp),
        ];
        let advisories = vec![
            sample_record("A1", "https://e/a/b", &["aaaa"]),
            sample_record("A2", "https://e/a/c", &["bbbb"]),
            sample_record("A3", "https://e/a/d", &["cccc"]),
        ];
        let report = build_report(
            &commits,
            &pairs,
            &advisories,
            None,
            &CweClusterMap::builtin(),
        )
        .unwrap();
        let commit_sum: usize = report.language_table.iter().map(|r| r.commit_count).sum();
        assert_eq!(commit_sum, report.commit_total);
        let pct_sum: f64 = report.language_table.iter().map(|r| r.commit_pct).sum();
        assert!((pct_sum - 100.0).abs() < 0.5);
        let text = render_text(&report);
        assert!(text.contains("Multiple Languages"));
    }
}
