//! Detector-evaluation harness and function-classification tooling: run
//! external rule-based detectors against commit snapshots under a wall-clock
//! budget, aggregate their warnings, build paired/non-paired classification
//! sets, and score stored predictions.

mod dataset;
mod detector;
mod metrics;

pub use dataset::{
    benign_pool, build_nonpaired_set, build_paired_set, split_sets, LabeledSample, PoolEntry,
    SampleLabel, SplitMode,
};
pub use detector::{
    aggregate_runs, load_adapters, run_detector, DetectorAdapter, DetectorRun, Finding,
    Normalizer, RunStatus, Table5Report, Table5Row,
};
pub use metrics::{
    classify_function, compute_metrics, export_finetune, parse_prediction, FinetuneRecord,
    MetricsReport, Prediction, PredictionRecord, DEFAULT_CLASSIFY_TEMPLATE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("adapter {id}: {message}")]
    Adapter { id: String, message: String },
    #[error("benign pool exhausted for {language}: {shortfall} more sample(s) needed")]
    PoolExhausted { language: String, shortfall: usize },
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("paired set violation: {0}")]
    PairViolation(String),
}
