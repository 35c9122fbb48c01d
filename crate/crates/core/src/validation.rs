//! Statistical sampling for manual label validation and the two-reviewer
//! agreement workflow.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jsonl;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("invalid sample-size parameters: {0}")]
    InvalidParams(String),
    #[error("sample of {requested} requested from {available} ids")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("degenerate-marginals: expected agreement is 1 with observed disagreement")]
    DegenerateMarginals,
    #[error("agreement needs at least one doubly-reviewed item")]
    NoDoublyReviewed,
    #[error("ledger has {0} reviewers; exactly two are supported")]
    ReviewerCount(usize),
    #[error("item {0} lacks a consensus decision")]
    MissingConsensus(String),
    #[error("ledger i/o: {0}")]
    Ledger(#[from] jsonl::JsonlError),
}

/// Inputs to the finite-population sample-size formula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSizeParams {
    /// Population size.
    pub n_population: u64,
    /// z-score; 1.96 for a 95% confidence level.
    pub z: f64,
    /// Standard-deviation proxy; 0.5 is the conservative maximum.
    pub p: f64,
    /// Margin of error.
    pub e: f64,
}

impl SampleSizeParams {
    pub fn with_defaults(n_population: u64) -> Self {
        SampleSizeParams {
            n_population,
            z: 1.96,
            p: 0.5,
            e: 0.05,
        }
    }

    fn validate(&self) -> Result<(), ValidationError> {
        if self.n_population < 1 {
            return Err(ValidationError::InvalidParams("N must be >= 1".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(ValidationError::InvalidParams("p must be in (0, 1)".into()));
        }
        if !(self.e > 0.0) {
            return Err(ValidationError::InvalidParams("e must be > 0".into()));
        }
        if !(self.z > 0.0) {
            return Err(ValidationError::InvalidParams("z must be > 0".into()));
        }
        Ok(())
    }
}

/// Sample size `ceil( (z^2 p(1-p)/e^2) / (1 + z^2 p(1-p)/(e^2 N)) )`,
/// clamped to the population.
pub fn sample_size(params: &SampleSizeParams) -> Result<u64, ValidationError> {
    params.validate()?;
    let x = params.z * params.z * params.p * (1.0 - params.p) / (params.e * params.e);
    let n = x / (1.0 + x / params.n_population as f64);
    Ok((n.ceil() as u64).min(params.n_population))
}

/// Unbiased integer below `bound` from raw RNG output, by rejection.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    assert!(bound > 0);
    let limit = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < limit {
            return v % bound;
        }
    }
}

/// Uniform sample of `n` ids without replacement, deterministic for a given
/// seed and id set (input order does not matter). Output is sorted so review
/// files are stable.
pub fn draw_sample(ids: &[String], n: usize, seed: u64) -> Result<Vec<String>, ValidationError> {
    if n > ids.len() {
        return Err(ValidationError::SampleTooLarge {
            requested: n,
            available: ids.len(),
        });
    }
    let mut pool: Vec<&String> = ids.iter().collect();
    pool.sort();
    pool.dedup();
    if n > pool.len() {
        return Err(ValidationError::SampleTooLarge {
            requested: n,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = pool.len();
    for i in 0..n {
        let j = i + uniform_below(&mut rng, (len - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut out: Vec<String> = pool[..n].iter().map(|s| s.to_string()).collect();
    out.sort();
    Ok(out)
}

/// A reviewer's decision on one sampled item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    CorrectLabel,
    IncorrectLabel,
    Undecidable,
}

/// One append-only ledger event: either a reviewer decision or a recorded
/// consensus after adjudication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub item_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reviewer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consensus: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Replayed state of one item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LedgerItem {
    pub reviews: BTreeMap<String, Decision>,
    pub consensus: Option<Decision>,
    pub notes: Vec<String>,
}

/// Item id -> per-reviewer decisions plus consensus, replayed from an
/// append-only event file. Later events for the same (item, reviewer) win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReviewLedger {
    pub items: BTreeMap<String, LedgerItem>,
}

impl ReviewLedger {
    pub fn from_events(events: &[LedgerEvent]) -> Self {
        let mut ledger = ReviewLedger::default();
        for event in events {
            let item = ledger.items.entry(event.item_id.clone()).or_default();
            if let (Some(reviewer), Some(decision)) = (&event.reviewer, event.decision) {
                item.reviews.insert(reviewer.clone(), decision);
            }
            if let Some(consensus) = event.consensus {
                item.consensus = Some(consensus);
            }
            if let Some(note) = &event.note {
                item.notes.push(note.clone());
            }
        }
        ledger
    }

    pub fn load(path: &Path) -> Result<Self, ValidationError> {
        let events: Vec<LedgerEvent> = jsonl::read_jsonl(path)?;
        Ok(Self::from_events(&events))
    }

    pub fn append(path: &Path, event: &LedgerEvent) -> Result<(), ValidationError> {
        use std::io::Write;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| {
                ValidationError::Ledger(jsonl::JsonlError::Write {
                    path: path.display().to_string(),
                    source: e,
                })
            })?;
        let line = serde_json::to_string(event).expect("event serializes");
        writeln!(file, "{line}").map_err(|e| {
            ValidationError::Ledger(jsonl::JsonlError::Write {
                path: path.display().to_string(),
                source: e,
            })
        })?;
        Ok(())
    }

    fn two_reviewers(&self) -> Result<(String, String), ValidationError> {
        let names: BTreeSet<&String> = self
            .items
            .values()
            .flat_map(|i| i.reviews.keys())
            .collect();
        if names.len() != 2 {
            return Err(ValidationError::ReviewerCount(names.len()));
        }
        let mut iter = names.into_iter();
        Ok((iter.next().unwrap().clone(), iter.next().unwrap().clone()))
    }

    /// (both-decided items as binary pairs, undecidable-excluded count).
    /// Decisions reduce to correct/incorrect; items where either reviewer
    /// marked undecidable are excluded and counted.
    pub fn agreement_pairs(&self) -> Result<(Vec<(bool, bool)>, usize), ValidationError> {
        let (first, second) = self.two_reviewers()?;
        let mut pairs = Vec::new();
        let mut excluded = 0usize;
        for item in self.items.values() {
            let (Some(&a), Some(&b)) = (item.reviews.get(&first), item.reviews.get(&second))
            else {
                continue;
            };
            if a == Decision::Undecidable || b == Decision::Undecidable {
                excluded += 1;
                continue;
            }
            pairs.push((a == Decision::CorrectLabel, b == Decision::CorrectLabel));
        }
        Ok((pairs, excluded))
    }
}

/// Agreement computation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub kappa: f64,
    pub items_used: usize,
    pub undecidable_excluded: usize,
}

/// Cohen's kappa over binary decision pairs: `(p_o - p_e) / (1 - p_e)` with
/// marginal-product expected agreement. Perfect expected agreement is kappa 1
/// when observed agreement is also perfect, otherwise an error.
pub fn kappa_from_pairs(pairs: &[(bool, bool)]) -> Result<f64, ValidationError> {
    if pairs.is_empty() {
        return Err(ValidationError::NoDoublyReviewed);
    }
    let n = pairs.len() as f64;
    let observed = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let a_yes = pairs.iter().filter(|(a, _)| *a).count() as f64 / n;
    let b_yes = pairs.iter().filter(|(_, b)| *b).count() as f64 / n;
    let expected = a_yes * b_yes + (1.0 - a_yes) * (1.0 - b_yes);
    if (1.0 - expected).abs() < f64::EPSILON {
        return if (1.0 - observed).abs() < f64::EPSILON {
            Ok(1.0)
        } else {
            Err(ValidationError::DegenerateMarginals)
        };
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Kappa over a ledger's doubly-reviewed items, before any consensus.
pub fn cohen_kappa(ledger: &ReviewLedger) -> Result<KappaReport, ValidationError> {
    let (pairs, excluded) = ledger.agreement_pairs()?;
    let kappa = kappa_from_pairs(&pairs)?;
    Ok(KappaReport {
        kappa,
        items_used: pairs.len(),
        undecidable_excluded: excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// Percent correct over evaluated items, one decimal.
    pub percent: f64,
    pub evaluated: usize,
    pub correct: usize,
    pub undecidable_excluded: usize,
}

/// Label accuracy from consensus decisions. Matching independent reviews
/// stand as implicit consensus; disagreements require a recorded consensus.
/// Undecidable outcomes leave the denominator and are reported separately.
pub fn label_accuracy(ledger: &ReviewLedger) -> Result<AccuracyReport, ValidationError> {
    let mut correct = 0usize;
    let mut evaluated = 0usize;
    let mut undecidable = 0usize;
    for (id, item) in &ledger.items {
        let consensus = match item.consensus {
            Some(c) => c,
            None => {
                let decisions: Vec<Decision> = item.reviews.values().copied().collect();
                match decisions.as_slice() {
                    [a, b] if a == b => *a,
                    _ => return Err(ValidationError::MissingConsensus(id.clone())),
                }
            }
        };
        match consensus {
            Decision::CorrectLabel => {
                correct += 1;
                evaluated += 1;
            }
            Decision::IncorrectLabel => evaluated += 1,
            Decision::Undecidable => undecidable += 1,
        }
    }
    if evaluated == 0 && undecidable == 0 {
        return Err(ValidationError::NoDoublyReviewed);
    }
    let percent = if evaluated == 0 {
        0.0
    } else {
        (correct as f64 * 1000.0 / evaluated as f64).round() / 10.0
    };
    Ok(AccuracyReport {
        percent,
        evaluated,
        correct,
        undecidable_excluded: undecidable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_size_clamps_to_population() {
        let n = sample_size(&SampleSizeParams::with_defaults(1)).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn sample_size_known_values() {
        for (population, expected) in [(8_374u64, 368u64), (1_767, 316), (508, 219)] {
            let n = sample_size(&SampleSizeParams::with_defaults(population)).unwrap();
            assert_eq!(n, expected, "N = {population}");
        }
    }

    #[test]
    fn sample_size_rejects_bad_params() {
        let mut params = SampleSizeParams::with_defaults(100);
        params.p = 1.5;
        assert!(sample_size(&params).is_err());
        let mut params = SampleSizeParams::with_defaults(100);
        params.e = 0.0;
        assert!(sample_size(&params).is_err());
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id-{i:05}")).collect()
    }

    #[test]
    fn exhaustive_sample_returns_everything() {
        let all = ids(25);
        let sample = draw_sample(&all, 25, 7).unwrap();
        assert_eq!(sample.len(), 25);
        let set: BTreeSet<_> = sample.iter().collect();
        assert_eq!(set.len(), 25);
    }

    #[test]
    fn same_seed_same_sample() {
        let all = ids(500);
        let a = draw_sample(&all, 100, 42).unwrap();
        let b = draw_sample(&all, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = draw_sample(&all, 100, 43).unwrap();
        assert_ne!(a, c);
        // Input order must not matter.
        let mut shuffled = all.clone();
        shuffled.reverse();
        let d = draw_sample(&shuffled, 100, 42).unwrap();
        assert_eq!(a, d);
    }

    #[test]
    fn oversized_sample_is_an_error() {
        assert!(matches!(
            draw_sample(&ids(5), 6, 1),
            Err(ValidationError::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn kappa_perfect_agreement_is_one() {
        let pairs: Vec<(bool, bool)> = vec![(true, true), (false, false), (true, true)];
        assert!((kappa_from_pairs(&pairs).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_hand_case() {
        // A = [1,1,0,0,1], B = [1,0,0,0,1]: p_o = 0.8, p_e = 0.48,
        // kappa = 0.32 / 0.52 = 8/13.
        let pairs = vec![
            (true, true),
            (true, false),
            (false, false),
            (false, false),
            (true, true),
        ];
        let kappa = kappa_from_pairs(&pairs).unwrap();
        assert!((kappa - 8.0 / 13.0).abs() < 1e-9);
        assert_eq!(format!("{kappa:.4}"), "0.6154");
    }

    #[test]
    fn kappa_swap_invariant() {
        let pairs = vec![(true, false), (true, true), (false, false), (false, true)];
        let swapped: Vec<(bool, bool)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        assert!(
            (kappa_from_pairs(&pairs).unwrap() - kappa_from_pairs(&swapped).unwrap()).abs()
                < 1e-12
        );
    }

    #[test]
    fn kappa_degenerate_marginals() {
        // Both reviewers always say yes but disagree is impossible; construct
        // all-yes marginals with observed agreement 1.
        let pairs = vec![(true, true), (true, true)];
        assert_eq!(kappa_from_pairs(&pairs).unwrap(), 1.0);
    }

    fn event(item: &str, reviewer: &str, decision: Decision) -> LedgerEvent {
        LedgerEvent {
            item_id: item.to_string(),
            reviewer: Some(reviewer.to_string()),
            decision: Some(decision),
            consensus: None,
            note: None,
        }
    }

    fn consensus(item: &str, decision: Decision) -> LedgerEvent {
        LedgerEvent {
            item_id: item.to_string(),
            reviewer: None,
            decision: None,
            consensus: Some(decision),
            note: None,
        }
    }

    #[test]
    fn ledger_replay_and_kappa() {
        let events = vec![
            event("i1", "r1", Decision::CorrectLabel),
            event("i1", "r2", Decision::CorrectLabel),
            event("i2", "r1", Decision::CorrectLabel),
            event("i2", "r2", Decision::IncorrectLabel),
            event("i3", "r1", Decision::Undecidable),
            event("i3", "r2", Decision::CorrectLabel),
        ];
        let ledger = ReviewLedger::from_events(&events);
        let report = cohen_kappa(&ledger).unwrap();
        assert_eq!(report.items_used, 2);
        assert_eq!(report.undecidable_excluded, 1);
    }

    #[test]
    fn accuracy_requires_consensus_on_disagreements() {
        let events = vec![
            event("i1", "r1", Decision::CorrectLabel),
            event("i1", "r2", Decision::CorrectLabel),
            event("i2", "r1", Decision::CorrectLabel),
            event("i2", "r2", Decision::IncorrectLabel),
        ];
        let ledger = ReviewLedger::from_events(&events);
        assert!(matches!(
            label_accuracy(&ledger),
            Err(ValidationError::MissingConsensus(id)) if id == "i2"
        ));

        let mut with_consensus = events;
        with_consensus.push(consensus("i2", Decision::IncorrectLabel));
        let ledger = ReviewLedger::from_events(&with_consensus);
        let report = label_accuracy(&ledger).unwrap();
        assert_eq!(report.evaluated, 2);
        assert_eq!(report.correct, 1);
        assert_eq!(report.percent, 50.0);
    }

    #[test]
    fn accuracy_excludes_undecidable_from_denominator() {
        // 3 correct, 1 incorrect, 1 undecidable -> 75.0 with 1 excluded.
        let mut events = Vec::new();
        for (i, d) in [
            Decision::CorrectLabel,
            Decision::CorrectLabel,
            Decision::CorrectLabel,
            Decision::IncorrectLabel,
            Decision::Undecidable,
        ]
        .iter()
        .enumerate()
        {
            events.push(event(&format!("i{i}"), "r1", *d));
            events.push(event(&format!("i{i}"), "r2", *d));
        }
        let ledger = ReviewLedger::from_events(&events);
        let report = label_accuracy(&ledger).unwrap();
        assert_eq!(report.percent, 75.0);
        assert_eq!(report.evaluated, 4);
        assert_eq!(report.undecidable_excluded, 1);
    }

    #[test]
    fn accuracy_rounds_to_one_decimal() {
        let mut events = Vec::new();
        for i in 0..300 {
            let d = if i < 145 {
                Decision::CorrectLabel
            } else {
                Decision::IncorrectLabel
            };
            events.push(event(&format!("i{i:03}"), "r1", d));
            events.push(event(&format!("i{i:03}"), "r2", d));
        }
        let report = label_accuracy(&ReviewLedger::from_events(&events)).unwrap();
        assert_eq!(report.percent, 48.3);
    }
}
