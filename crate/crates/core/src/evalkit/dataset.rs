//! Paired and non-paired classification set construction and the
//! leakage-controlled train/test splits.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::extract::{ChangeKind, FunctionPair, Language};
use crate::ingest::AdvisoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleLabel {
    Vulnerable,
    Benign,
}

/// One labeled classification sample. `group_id` ties the two members of a
/// paired sample together so splits never separate them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledSample {
    pub sample_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    pub language: Language,
    pub label: SampleLabel,
    pub cwe_ids: Vec<String>,
    pub text: String,
}

/// A benign-pool candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub source_id: String,
    pub language: Language,
    pub cwe_ids: Vec<String>,
    pub text: String,
}

fn advisory_cwes<'a>(
    advisories: &'a [AdvisoryRecord],
) -> BTreeMap<&'a str, &'a Vec<String>> {
    advisories
        .iter()
        .map(|a| (a.advisory_id.as_str(), &a.cwe_ids))
        .collect()
}

/// Paired set: each modified pair contributes its pre text as vulnerable and
/// its post text as benign, linked by the pair id.
pub fn build_paired_set(
    pairs: &[FunctionPair],
    advisories: &[AdvisoryRecord],
) -> Result<Vec<LabeledSample>, EvalError> {
    let cwes = advisory_cwes(advisories);
    let mut out = Vec::new();
    for pair in pairs {
        if pair.change_kind != ChangeKind::Modified {
            continue;
        }
        let (Some(pre), Some(post)) = (&pair.pre_text, &pair.post_text) else {
            return Err(EvalError::PairViolation(format!(
                "{} lacks a text",
                pair.pair_id
            )));
        };
        let ids = cwes
            .get(pair.advisory_id.as_str())
            .map(|v| (*v).clone())
            .unwrap_or_default();
        out.push(LabeledSample {
            sample_id: format!("{}:vuln", pair.pair_id),
            group_id: Some(pair.pair_id.clone()),
            language: pair.language,
            label: SampleLabel::Vulnerable,
            cwe_ids: ids.clone(),
            text: pre.clone(),
        });
        out.push(LabeledSample {
            sample_id: format!("{}:benign", pair.pair_id),
            group_id: Some(pair.pair_id.clone()),
            language: pair.language,
            label: SampleLabel::Benign,
            cwe_ids: ids,
            text: post.clone(),
        });
    }
    Ok(out)
}

/// Benign pool: newly added functions plus the patched versions of changes
/// judged irrelevant to their vulnerability.
pub fn benign_pool(
    added: &[FunctionPair],
    irrelevant_patched: &[FunctionPair],
    advisories: &[AdvisoryRecord],
) -> Vec<PoolEntry> {
    let cwes = advisory_cwes(advisories);
    let mut pool = Vec::new();
    let mut push = |pair: &FunctionPair, suffix: &str| {
        if let Some(text) = &pair.post_text {
            pool.push(PoolEntry {
                source_id: format!("{}:{suffix}", pair.pair_id),
                language: pair.language,
                cwe_ids: cwes
                    .get(pair.advisory_id.as_str())
                    .map(|v| (*v).clone())
                    .unwrap_or_default(),
                text: text.clone(),
            });
        }
    };
    for pair in added {
        push(pair, "added");
    }
    for pair in irrelevant_patched {
        push(pair, "irrelevant-patched");
    }
    pool
}

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

/// Non-paired set: one language-matched benign drawn per vulnerable sample,
/// without replacement, deterministic per seed. Pool texts equal to any
/// vulnerable text are excluded before matching.
pub fn build_nonpaired_set(
    vulnerable: &[FunctionPair],
    pool: &[PoolEntry],
    advisories: &[AdvisoryRecord],
    seed: u64,
) -> Result<Vec<LabeledSample>, EvalError> {
    let cwes = advisory_cwes(advisories);
    let vulnerable_texts: BTreeSet<&str> = vulnerable
        .iter()
        .filter_map(|p| p.pre_text.as_deref())
        .collect();
    let mut buckets: BTreeMap<Language, Vec<&PoolEntry>> = BTreeMap::new();
    for entry in pool {
        if vulnerable_texts.contains(entry.text.as_str()) {
            continue;
        }
        buckets.entry(entry.language).or_default().push(entry);
    }
    // Fail up front with the full shortfall per language.
    let mut demand: BTreeMap<Language, usize> = BTreeMap::new();
    for pair in vulnerable {
        *demand.entry(pair.language).or_insert(0) += 1;
    }
    for (language, needed) in &demand {
        let available = buckets.get(language).map_or(0, |b| b.len());
        if available < *needed {
            return Err(EvalError::PoolExhausted {
                language: language.to_string(),
                shortfall: needed - available,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for pair in vulnerable {
        let Some(pre) = &pair.pre_text else {
            return Err(EvalError::PairViolation(format!(
                "{} lacks pre_text",
                pair.pair_id
            )));
        };
        out.push(LabeledSample {
            sample_id: format!("{}:vuln", pair.pair_id),
            group_id: None,
            language: pair.language,
            label: SampleLabel::Vulnerable,
            cwe_ids: cwes
                .get(pair.advisory_id.as_str())
                .map(|v| (*v).clone())
                .unwrap_or_default(),
            text: pre.clone(),
        });
        let bucket = buckets.get_mut(&pair.language).expect("demand checked");
        let idx = uniform_below(&mut rng, bucket.len() as u64) as usize;
        let chosen = bucket.remove(idx);
        out.push(LabeledSample {
            sample_id: format!("benign:{}", chosen.source_id),
            group_id: None,
            language: chosen.language,
            label: SampleLabel::Benign,
            cwe_ids: chosen.cwe_ids.clone(),
            text: chosen.text.clone(),
        });
    }
    Ok(out)
}

/// Train/test split modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    /// Fixed train/test sizes; remaining samples stay unused.
    Fixed { train: usize, test: usize },
    /// Fractional split, e.g. 0.8 for 80/20. Train takes
    /// `floor(count * ratio)` per label.
    Ratio(f64),
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    let n = items.len();
    for i in (1..n).rev() {
        let j = uniform_below(rng, (i + 1) as u64) as usize;
        items.swap(i, j);
    }
}

fn sorted_by_id(mut samples: Vec<LabeledSample>) -> Vec<LabeledSample> {
    samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    samples
}

/// Splits a labeled set into disjoint train/test halves, label-balanced
/// within one sample per split and deterministic per seed. In a paired set
/// both members of a pair always land in the same split.
pub fn split_sets(
    samples: &[LabeledSample],
    mode: SplitMode,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), EvalError> {
    if samples.is_empty() {
        return Err(EvalError::EmptyInput("split of empty sample set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paired = samples.iter().any(|s| s.group_id.is_some());
    if paired {
        let mut groups: BTreeMap<&str, Vec<&LabeledSample>> = BTreeMap::new();
        for sample in samples {
            let Some(group) = sample.group_id.as_deref() else {
                return Err(EvalError::PairViolation(
                    "mixed grouped and ungrouped samples".into(),
                ));
            };
            groups.entry(group).or_default().push(sample);
        }
        for (group, members) in &groups {
            let vuln = members
                .iter()
                .filter(|s| s.label == SampleLabel::Vulnerable)
                .count();
            if members.len() != 2 || vuln != 1 {
                return Err(EvalError::PairViolation(format!(
                    "group {group} must hold one vulnerable and one benign sample"
                )));
            }
        }
        let mut keys: Vec<&str> = groups.keys().copied().collect();
        shuffle(&mut keys, &mut rng);
        let (train_groups, test_groups) = match mode {
            SplitMode::Ratio(ratio) => {
                if !(0.0..=1.0).contains(&ratio) {
                    return Err(EvalError::InfeasibleSplit(format!("ratio {ratio}")));
                }
                let train = (groups.len() as f64 * ratio).floor() as usize;
                (train, groups.len() - train)
            }
            SplitMode::Fixed { train, test } => {
                if train % 2 != 0 || test % 2 != 0 {
                    return Err(EvalError::InfeasibleSplit(
                        "paired fixed sizes must be even".into(),
                    ));
                }
                if train / 2 + test / 2 > groups.len() {
                    return Err(EvalError::InfeasibleSplit(format!(
                        "need {} pairs, have {}",
                        train / 2 + test / 2,
                        groups.len()
                    )));
                }
                (train / 2, test / 2)
            }
        };
        let take = |keys: &[&str]| -> Vec<LabeledSample> {
            keys.iter()
                .flat_map(|k| groups[k].iter().map(|s| (*s).clone()))
                .collect()
        };
        let train = take(&keys[..train_groups]);
        let test = take(&keys[train_groups..train_groups + test_groups]);
        return Ok((sorted_by_id(train), sorted_by_id(test)));
    }

    // Ungrouped: split each label stream independently.
    let mut vuln: Vec<&LabeledSample> = samples
        .iter()
        .filter(|s| s.label == SampleLabel::Vulnerable)
        .collect();
    let mut benign: Vec<&LabeledSample> = samples
        .iter()
        .filter(|s| s.label == SampleLabel::Benign)
        .collect();
    vuln.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    benign.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    shuffle(&mut vuln, &mut rng);
    shuffle(&mut benign, &mut rng);

    let (vuln_train, benign_train, vuln_test, benign_test) = match mode {
        SplitMode::Ratio(ratio) => {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(EvalError::InfeasibleSplit(format!("ratio {ratio}")));
            }
            let vt = (vuln.len() as f64 * ratio).floor() as usize;
            let bt = (benign.len() as f64 * ratio).floor() as usize;
            (vt, bt, vuln.len() - vt, benign.len() - bt)
        }
        SplitMode::Fixed { train, test } => {
            let vt = train - train / 2;
            let bt = train / 2;
            let vte = test - test / 2;
            let bte = test / 2;
            if vt + vte > vuln.len() || bt + bte > benign.len() {
                return Err(EvalError::InfeasibleSplit(format!(
                    "need {vt}+{vte} vulnerable and {bt}+{bte} benign, have {} and {}",
                    vuln.len(),
                    benign.len()
                )));
            }
            (vt, bt, vte, bte)
        }
    };
    let mut train: Vec<LabeledSample> = Vec::new();
    let mut test: Vec<LabeledSample> = Vec::new();
    train.extend(vuln[..vuln_train].iter().map(|s| (*s).clone()));
    train.extend(benign[..benign_train].iter().map(|s| (*s).clone()));
    test.extend(vuln[vuln_train..vuln_train + vuln_test].iter().map(|s| (*s).clone()));
    test.extend(
        benign[benign_train..benign_train + benign_test]
            .iter()
            .map(|s| (*s).clone()),
    );
    Ok((sorted_by_id(train), sorted_by_id(test)))
}
