//! Prediction parsing, confusion-matrix metrics, and fine-tune export.

use serde::{Deserialize, Serialize};

use super::{EvalError, LabeledSample, SampleLabel};
use crate::cleanse::{LlmClient, LlmRequest, RetryPolicy};

/// Verdict parsed from a model reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    Vulnerable,
    Benign,
    Invalid,
}

/// One stored model prediction for a labeled sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub true_label: SampleLabel,
    pub reply: String,
    pub parsed: Prediction,
}

/// Finds the last occurrence of either verdict token, case-insensitive on
/// word boundaries; replies without a token are invalid.
pub fn parse_prediction(reply: &str) -> Prediction {
    let lower = reply.to_lowercase();
    let last = |needle: &str| -> Option<usize> {
        let bytes = lower.as_bytes();
        let mut best = None;
        let mut from = 0usize;
        while let Some(rel) = lower[from..].find(needle) {
            let at = from + rel;
            let before_ok = at == 0 || !bytes[at - 1].is_ascii_alphanumeric();
            let end = at + needle.len();
            let after_ok = end >= bytes.len() || !bytes[end].is_ascii_alphanumeric();
            if before_ok && after_ok {
                best = Some(at);
            }
            from = end;
        }
        best
    };
    match (last("vulnerable"), last("benign")) {
        (Some(v), Some(b)) if v > b => Prediction::Vulnerable,
        (Some(_), Some(_)) => Prediction::Benign,
        (Some(_), None) => Prediction::Vulnerable,
        (None, Some(_)) => Prediction::Benign,
        (None, None) => Prediction::Invalid,
    }
}

/// Zero-shot classification prompt; reasoning first, verdict token last.
pub const DEFAULT_CLASSIFY_TEMPLATE: &str = "\
You are reviewing one {language} function for security vulnerabilities.

{code}

Think step by step about what the function does, how untrusted input could
reach it, and whether any weakness is exploitable. Then give your final
verdict on its own line as either \"ANSWER: VULNERABLE\" or \"ANSWER: BENIGN\".
";

/// Classifies one sample through the client contract at temperature zero.
pub fn classify_function(
    sample: &LabeledSample,
    client: &dyn LlmClient,
    template: &str,
    model: &str,
    policy: &RetryPolicy,
) -> PredictionRecord {
    let user = template
        .replace("{language}", &sample.language.to_string())
        .replace("{code}", &sample.text);
    let request = LlmRequest {
        model,
        system: "You are a security expert.",
        user: &user,
        temperature: 0.0,
        tag: Some(&sample.sample_id),
    };
    let reply = client
        .complete_with_retries(&request, policy)
        .unwrap_or_default();
    PredictionRecord {
        sample_id: sample.sample_id.clone(),
        true_label: sample.label,
        parsed: parse_prediction(&reply),
        reply,
    }
}

/// Confusion-matrix metrics plus the invalid-answer count. Percentages are
/// rounded to 0.1; precision (and recall) are absent when their denominators
/// are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_count: usize,
    pub invalid: usize,
    pub accuracy_pct: f64,
    pub precision_pct: Option<f64>,
    pub recall_pct: Option<f64>,
    pub f1_pct: f64,
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

impl MetricsReport {
    /// Unrounded (accuracy, precision, recall, f1) fractions recomputed from
    /// the stored counts.
    pub fn raw(&self) -> (f64, Option<f64>, Option<f64>, f64) {
        raw_metrics(self.tp, self.fp, self.tn, self.fn_count)
    }

    pub fn render_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|p| format!("{p:.1}%")).unwrap_or_else(|| "-".into());
        format!(
            "invalid {} | acc {:.1}% | prec {} | recall {} | f1 {:.1}%",
            self.invalid,
            self.accuracy_pct,
            opt(self.precision_pct),
            opt(self.recall_pct),
            self.f1_pct
        )
    }
}

fn raw_metrics(tp: usize, fp: usize, tn: usize, fn_count: usize) -> (f64, Option<f64>, Option<f64>, f64) {
    let total = tp + fp + tn + fn_count;
    let accuracy = if total == 0 {
        0.0
    } else {
        (tp + tn) as f64 / total as f64
    };
    let precision = if tp + fp == 0 {
        None
    } else {
        Some(tp as f64 / (tp + fp) as f64)
    };
    let recall = if tp + fn_count == 0 {
        None
    } else {
        Some(tp as f64 / (tp + fn_count) as f64)
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => 2.0 * p * r / (p + r),
        _ => 0.0,
    };
    (accuracy, precision, recall, f1)
}

/// Scores stored predictions: invalid answers leave the confusion matrix and
/// are counted separately.
pub fn compute_metrics(predictions: &[PredictionRecord]) -> Result<MetricsReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput("no predictions to score".into()));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_count = 0usize;
    let mut invalid = 0usize;
    for record in predictions {
        match (record.parsed, record.true_label) {
            (Prediction::Invalid, _) => invalid += 1,
            (Prediction::Vulnerable, SampleLabel::Vulnerable) => tp += 1,
            (Prediction::Vulnerable, SampleLabel::Benign) => fp += 1,
            (Prediction::Benign, SampleLabel::Benign) => tn += 1,
            (Prediction::Benign, SampleLabel::Vulnerable) => fn_count += 1,
        }
    }
    if tp + fp + tn + fn_count == 0 {
        return Err(EvalError::EmptyInput("every prediction is invalid".into()));
    }
    let (accuracy, precision, recall, f1) = raw_metrics(tp, fp, tn, fn_count);
    Ok(MetricsReport {
        tp,
        fp,
        tn,
        fn_count,
        invalid,
        accuracy_pct: round1(accuracy * 100.0),
        precision_pct: precision.map(|p| round1(p * 100.0)),
        recall_pct: recall.map(|r| round1(r * 100.0)),
        f1_pct: round1(f1 * 100.0),
    })
}

/// One fine-tuning record in prompt/completion form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub prompt: String,
    pub completion: String,
}

/// Exports labeled samples as prompt/completion records; the training itself
/// happens elsewhere.
pub fn export_finetune(samples: &[LabeledSample], template: &str) -> Vec<FinetuneRecord> {
    samples
        .iter()
        .map(|s| FinetuneRecord {
            prompt: template
                .replace("{language}", &s.language.to_string())
                .replace("{code}", &s.text),
            completion: match s.label {
                SampleLabel::Vulnerable => "VULNERABLE".to_string(),
                SampleLabel::Benign => "BENIGN".to_string(),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(true_label: SampleLabel, parsed: Prediction) -> PredictionRecord {
        PredictionRecord {
            sample_id: "s".into(),
            true_label,
            reply: String::new(),
            parsed,
        }
    }

    #[test]
    fn verdict_grammar() {
        assert_eq!(
            parse_prediction("step by step...\nANSWER: VULNERABLE"),
            Prediction::Vulnerable
        );
        assert_eq!(parse_prediction("free-form prose with no verdict"), Prediction::Invalid);
        assert_eq!(
            parse_prediction("VULNERABLE at first glance, but ANSWER: BENIGN"),
            Prediction::Benign
        );
        // Word boundaries: "invulnerable" is not a verdict.
        assert_eq!(parse_prediction("the code is invulnerable"), Prediction::Invalid);
        assert_eq!(parse_prediction("answer: benign"), Prediction::Benign);
    }

    #[test]
    fn all_negative_on_balanced_set() {
        let mut predictions = Vec::new();
        for i in 0..300 {
            let label = if i < 150 {
                SampleLabel::Vulnerable
            } else {
                SampleLabel::Benign
            };
            predictions.push(record(label, Prediction::Benign));
        }
        let report = compute_metrics(&predictions).unwrap();
        assert_eq!(report.accuracy_pct, 50.0);
        assert_eq!(report.precision_pct, None);
        assert_eq!(report.recall_pct, Some(0.0));
        assert_eq!(report.f1_pct, 0.0);
        assert_eq!(report.invalid, 0);
    }

    #[test]
    fn reconstructed_confusion_matrix_row() {
        let mut predictions = Vec::new();
        for _ in 0..149 {
            predictions.push(record(SampleLabel::Vulnerable, Prediction::Vulnerable));
            predictions.push(record(SampleLabel::Benign, Prediction::Vulnerable));
        }
        predictions.push(record(SampleLabel::Benign, Prediction::Benign));
        predictions.push(record(SampleLabel::Vulnerable, Prediction::Benign));
        let report = compute_metrics(&predictions).unwrap();
        assert_eq!((report.tp, report.fp, report.tn, report.fn_count), (149, 149, 1, 1));
        assert_eq!(report.accuracy_pct, 50.0);
        assert_eq!(report.precision_pct, Some(50.0));
        assert_eq!(report.recall_pct, Some(99.3));
        assert_eq!(report.f1_pct, 66.5);
    }

    #[test]
    fn all_correct_with_no_invalid() {
        let mut predictions = Vec::new();
        for i in 0..10 {
            let label = if i % 2 == 0 {
                SampleLabel::Vulnerable
            } else {
                SampleLabel::Benign
            };
            let parsed = match label {
                SampleLabel::Vulnerable => Prediction::Vulnerable,
                SampleLabel::Benign => Prediction::Benign,
            };
            predictions.push(record(label, parsed));
        }
        let report = compute_metrics(&predictions).unwrap();
        assert_eq!(report.accuracy_pct, 100.0);
        assert_eq!(report.precision_pct, Some(100.0));
        assert_eq!(report.recall_pct, Some(100.0));
        assert_eq!(report.f1_pct, 100.0);
        assert_eq!(report.invalid, 0);
    }

    #[test]
    fn invalid_answers_are_counted_not_scored() {
        let predictions = vec![
            record(SampleLabel::Vulnerable, Prediction::Vulnerable),
            record(SampleLabel::Benign, Prediction::Invalid),
            record(SampleLabel::Benign, Prediction::Benign),
        ];
        let report = compute_metrics(&predictions).unwrap();
        assert_eq!(report.invalid, 1);
        assert_eq!(report.tp + report.fp + report.tn + report.fn_count, 2);
        assert_eq!(report.accuracy_pct, 100.0);
    }
}
