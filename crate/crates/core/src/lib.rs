//! Toolkit for building, cleansing, analyzing, and validating vulnerability
//! benchmarks from advisory records and their fix commits.
//!
//! The pipeline stages map onto the top-level modules:
//!
//! * [`ingest`] — load normalized advisory records, filter, and deduplicate.
//! * [`extract`] — resolve fix/parent snapshots and extract changed-function
//!   pairs per commit, with per-function language identification.
//! * [`cleanse`] — LLM-assisted relevance classification of function changes,
//!   retention rules, and a heuristic baseline labeler.
//! * [`analytics`] — language composition, CWE clustering, span statistics,
//!   and package-level multi-language profiles.
//! * [`validation`] — statistical sampling for manual label review, Cohen's
//!   kappa, and label-accuracy accounting.
//! * [`evalkit`] — detector-run harness, paired/non-paired dataset
//!   construction, and classification metrics.
//! * [`store`] — workspace layout, stage manifests, and dataset schema
//!   validation.

pub mod analytics;
pub mod cleanse;
pub mod evalkit;
pub mod extract;
pub mod gitio;
pub mod ingest;
pub mod jsonl;
pub mod store;
pub mod validation;

pub use extract::{ChangeKind, CommitSample, FunctionPair, Language};
pub use ingest::{AdvisoryRecord, RejectReason};
