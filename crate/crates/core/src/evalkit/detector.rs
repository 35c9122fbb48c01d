//! External detector execution under a wall-clock budget, findings
//! normalization, and warning aggregation.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::analytics::CweClusterMap;

/// Default per-run budget: sixty minutes.
pub const DEFAULT_BUDGET_SECS: f64 = 3600.0;

/// How an adapter's stdout becomes findings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Normalizer {
    /// One JSON finding object per line.
    JsonLines,
    /// A regex with named groups `rule`, `cwe`, `file`, `line`, `message`
    /// applied per line; non-matching lines are ignored.
    Regex { pattern: String },
}

/// One configured detector: a command template with a `{snapshot}`
/// placeholder, a findings normalizer, a per-run budget, and an optional
/// rule-to-CWE annotation map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorAdapter {
    pub id: String,
    pub command: String,
    pub normalizer: Normalizer,
    #[serde(default = "default_budget")]
    pub budget_secs: f64,
    #[serde(default)]
    pub rule_cwes: BTreeMap<String, Vec<String>>,
}

fn default_budget() -> f64 {
    DEFAULT_BUDGET_SECS
}

pub fn load_adapters(path: &Path) -> Result<Vec<DetectorAdapter>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Adapter {
        id: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| EvalError::Adapter {
        id: path.display().to_string(),
        message: e.to_string(),
    })
}

/// One normalized detector warning. At least one of `rule_id`/`cwe_ids` is
/// present; lines offering neither are dropped during normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    #[serde(default)]
    pub rule_id: Option<String>,
    #[serde(default)]
    pub cwe_ids: Vec<String>,
    #[serde(default)]
    pub file: String,
    #[serde(default)]
    pub line: Option<u64>,
    #[serde(default)]
    pub message: String,
}

impl Finding {
    fn identifiable(&self) -> bool {
        self.rule_id.is_some() || !self.cwe_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Complete,
    Timeout,
    Error,
}

/// Outcome of one detector run against one commit snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorRun {
    pub detector_id: String,
    pub sample_id: String,
    pub target_cwe: String,
    pub status: RunStatus,
    pub wall_time_secs: f64,
    pub findings: Vec<Finding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_excerpt: Option<String>,
}

/// Splits a command template into argv, honoring single/double quotes.
fn split_command(template: &str) -> Vec<String> {
    let mut args = Vec::new();
    let mut current = String::new();
    let mut quote: Option<char> = None;
    let mut has_token = false;
    for c in template.chars() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                } else {
                    current.push(c);
                }
            }
            None => match c {
                '\'' | '"' => {
                    quote = Some(c);
                    has_token = true;
                }
                c if c.is_whitespace() => {
                    if has_token {
                        args.push(std::mem::take(&mut current));
                        has_token = false;
                    }
                }
                c => {
                    current.push(c);
                    has_token = true;
                }
            },
        }
    }
    if has_token {
        args.push(current);
    }
    args
}

fn drain_pipe(pipe: Option<impl Read + Send + 'static>) -> std::thread::JoinHandle<Vec<u8>> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut pipe) = pipe {
            let _ = pipe.read_to_end(&mut buf);
        }
        buf
    })
}

fn normalize_findings(adapter: &DetectorAdapter, stdout: &str) -> Vec<Finding> {
    let mut findings = Vec::new();
    match &adapter.normalizer {
        Normalizer::JsonLines => {
            for line in stdout.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                if let Ok(finding) = serde_json::from_str::<Finding>(line) {
                    findings.push(finding);
                }
            }
        }
        Normalizer::Regex { pattern } => {
            let Ok(re) = regex::Regex::new(pattern) else {
                return findings;
            };
            for line in stdout.lines() {
                let Some(caps) = re.captures(line) else { continue };
                let group = |name: &str| caps.name(name).map(|m| m.as_str().to_string());
                findings.push(Finding {
                    rule_id: group("rule"),
                    cwe_ids: group("cwe")
                        .map(|s| s.split(',').map(|c| c.trim().to_string()).collect())
                        .unwrap_or_default(),
                    file: group("file").unwrap_or_default(),
                    line: group("line").and_then(|s| s.parse().ok()),
                    message: group("message").unwrap_or_default(),
                });
            }
        }
    }
    // Rule annotations contribute CWEs; unidentifiable findings are dropped.
    for finding in &mut findings {
        if let Some(rule) = &finding.rule_id {
            if let Some(extra) = adapter.rule_cwes.get(rule) {
                for cwe in extra {
                    if !finding.cwe_ids.contains(cwe) {
                        finding.cwe_ids.push(cwe.clone());
                    }
                }
            }
        }
    }
    findings.retain(Finding::identifiable);
    findings
}

fn excerpt(stdout: &[u8], stderr: &[u8]) -> Option<String> {
    let mut text = String::new();
    text.push_str(&String::from_utf8_lossy(stdout));
    text.push_str(&String::from_utf8_lossy(stderr));
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    Some(trimmed.chars().take(4096).collect())
}

/// Runs one detector against one snapshot. On budget exhaustion the whole
/// process group is killed and the run is recorded as a timeout with no
/// findings; a nonzero exit is an error with output captured.
pub fn run_detector(
    adapter: &DetectorAdapter,
    snapshot: &Path,
    sample_id: &str,
    target_cwe: &str,
) -> DetectorRun {
    let argv: Vec<String> = split_command(&adapter.command)
        .into_iter()
        .map(|a| a.replace("{snapshot}", &snapshot.display().to_string()))
        .collect();
    let mut failed = |message: String| DetectorRun {
        detector_id: adapter.id.clone(),
        sample_id: sample_id.to_string(),
        target_cwe: target_cwe.to_string(),
        status: RunStatus::Error,
        wall_time_secs: 0.0,
        findings: Vec::new(),
        output_excerpt: Some(message),
    };
    if argv.is_empty() {
        return failed("empty command template".to_string());
    }

    let start = Instant::now();
    let mut command = Command::new(&argv[0]);
    command
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let mut child = match command.spawn() {
        Ok(child) => child,
        Err(e) => return failed(format!("spawn failed: {e}")),
    };
    let stdout_handle = drain_pipe(child.stdout.take());
    let stderr_handle = drain_pipe(child.stderr.take());

    let budget = Duration::from_secs_f64(adapter.budget_secs);
    let mut timed_out = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                if start.elapsed() >= budget {
                    timed_out = true;
                    #[cfg(unix)]
                    unsafe {
                        libc::killpg(child.id() as i32, libc::SIGKILL);
                    }
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return failed(format!("wait failed: {e}")),
        }
    };
    let wall_time_secs = start.elapsed().as_secs_f64();
    let stdout = stdout_handle.join().unwrap_or_default();
    let stderr = stderr_handle.join().unwrap_or_default();

    let (status, findings, output_excerpt) = if timed_out {
        (RunStatus::Timeout, Vec::new(), None)
    } else {
        let exit = status.expect("status present when not timed out");
        if exit.success() {
            let findings = normalize_findings(adapter, &String::from_utf8_lossy(&stdout));
            (RunStatus::Complete, findings, None)
        } else {
            (RunStatus::Error, Vec::new(), excerpt(&stdout, &stderr))
        }
    };
    DetectorRun {
        detector_id: adapter.id.clone(),
        sample_id: sample_id.to_string(),
        target_cwe: target_cwe.to_string(),
        status,
        wall_time_secs,
        findings,
        output_excerpt,
    }
}

/// One (detector, target CWE) row of the aggregated report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub detector_id: String,
    pub target_cwe: String,
    pub commits: usize,
    pub complete: usize,
    pub warnings: usize,
    /// Complete runs with at least one finding whose CWEs map into the
    /// target's cluster. Final verification stays a manual ledger field.
    pub candidate_positives: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified_positives: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table5Report {
    pub rows: Vec<Table5Row>,
}

/// Aggregates runs per (detector, target CWE): run counts, completions,
/// warning sums over complete runs, and CWE-cluster candidate positives.
/// `verified` carries manually verified counts keyed by (detector, CWE).
pub fn aggregate_runs(
    runs: &[DetectorRun],
    map: &CweClusterMap,
    verified: Option<&BTreeMap<(String, String), u64>>,
) -> Table5Report {
    let mut groups: BTreeMap<(String, String), Vec<&DetectorRun>> = BTreeMap::new();
    for run in runs {
        groups
            .entry((run.detector_id.clone(), run.target_cwe.clone()))
            .or_default()
            .push(run);
    }
    let rows = groups
        .into_iter()
        .map(|((detector_id, target_cwe), runs)| {
            let target_cluster = map.cluster_of(&target_cwe);
            let complete: Vec<&&DetectorRun> = runs
                .iter()
                .filter(|r| r.status == RunStatus::Complete)
                .collect();
            let warnings = complete.iter().map(|r| r.findings.len()).sum();
            let candidate_positives = complete
                .iter()
                .filter(|r| {
                    r.findings.iter().any(|f| {
                        f.cwe_ids
                            .iter()
                            .any(|cwe| map.cluster_of(cwe) == target_cluster)
                    })
                })
                .count();
            Table5Row {
                verified_positives: verified
                    .and_then(|v| v.get(&(detector_id.clone(), target_cwe.clone())).copied()),
                detector_id,
                target_cwe,
                commits: runs.len(),
                complete: complete.len(),
                warnings,
                candidate_positives,
            }
        })
        .collect();
    Table5Report { rows }
}

impl Table5Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:<10} {:>8} {:>10} {:>10} {:>11} {:>10}\n",
            "Detector", "CWE", "#Commit", "#Complete", "#Warnings", "#Candidate", "#Verified"
        ));
        for row in &self.rows {
            out.push_str(&format!(
                "{:<12} {:<10} {:>8} {:>10} {:>10} {:>11} {:>10}\n",
                row.detector_id,
                row.target_cwe,
                row.commits,
                row.complete,
                row.warnings,
                row.candidate_positives,
                row.verified_positives
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "-".to_string()),
            ));
        }
        out
    }
}
