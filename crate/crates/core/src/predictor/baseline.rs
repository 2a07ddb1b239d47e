//! Multinomial naive Bayes over bag-of-token inputs.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RawPrediction;
use crate::error::{Error, Result};
use crate::example::Example;
use crate::label::FaceActLabel;

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Lowercased tokens: maximal alphanumeric runs, plus every other
/// non-whitespace character as a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Serialized form: raw counts only. Log tables are rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelCounts {
    alpha: f64,
    labels: Vec<String>,
    label_counts: Vec<u64>,
    vocabulary: Vec<String>,
    /// `token_counts[label][token]`.
    token_counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelCounts", into = "ModelCounts")]
pub struct BaselineModel {
    counts: ModelCounts,
    index: BTreeMap<String, usize>,
    log_prior: Vec<f64>,
    log_likelihood: Vec<Vec<f64>>,
}

impl TryFrom<ModelCounts> for BaselineModel {
    type Error = Error;

    fn try_from(counts: ModelCounts) -> Result<Self> {
        let n_labels = counts.labels.len();
        if n_labels == 0 || counts.label_counts.len() != n_labels || counts.token_counts.len() != n_labels {
            return Err(Error::InvalidArgument("inconsistent model label tables".into()));
        }
        if counts.vocabulary.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if counts.alpha.is_nan() || counts.alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!("smoothing alpha {} must be positive", counts.alpha)));
        }
        let vocab_len = counts.vocabulary.len();
        if counts.token_counts.iter().any(|row| row.len() != vocab_len) {
            return Err(Error::InvalidArgument("token count rows do not match vocabulary".into()));
        }
        let total: u64 = counts.label_counts.iter().sum();
        let log_prior = counts
            .label_counts
            .iter()
            .map(|&c| (c as f64 / total as f64).ln())
            .collect();
        let log_likelihood = counts
            .token_counts
            .iter()
            .map(|row| {
                let denom = row.iter().sum::<u64>() as f64 + counts.alpha * vocab_len as f64;
                row.iter().map(|&c| ((c as f64 + counts.alpha) / denom).ln()).collect()
            })
            .collect();
        let index = counts
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(BaselineModel {
            counts,
            index,
            log_prior,
            log_likelihood,
        })
    }
}

impl From<BaselineModel> for ModelCounts {
    fn from(model: BaselineModel) -> Self {
        model.counts
    }
}

/// Label ordering for a model: face-act labels in canonical order, then
/// any other targets lexicographically.
fn label_order(a: &String, b: &String) -> Ordering {
    let rank = |s: &str| s.parse::<FaceActLabel>().map(|l| l.index()).unwrap_or(usize::MAX);
    rank(a).cmp(&rank(b)).then_with(|| a.cmp(b))
}

/// Fits the model on example inputs and targets with additive smoothing
/// `alpha`. Training is deterministic: the same examples in any order give
/// an identical model.
pub fn train_baseline(examples: &[Example], alpha: f64) -> Result<BaselineModel> {
    if examples.is_empty() {
        return Err(Error::InvalidArgument("no training examples".into()));
    }
    let mut labels: Vec<String> = examples.iter().map(|e| e.target.clone()).collect();
    labels.sort_by(label_order);
    labels.dedup();
    let label_index: BTreeMap<&str, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

    let mut per_label: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); labels.len()];
    let mut label_counts = vec![0u64; labels.len()];
    for example in examples {
        let li = label_index[example.target.as_str()];
        label_counts[li] += 1;
        for token in tokenize(&example.input) {
            *per_label[li].entry(token).or_insert(0) += 1;
        }
    }
    let mut vocabulary: Vec<String> = per_label.iter().flat_map(|m| m.keys().cloned()).collect();
    vocabulary.sort();
    vocabulary.dedup();
    let token_counts = per_label
        .iter()
        .map(|m| vocabulary.iter().map(|t| m.get(t).copied().unwrap_or(0)).collect())
        .collect();
    BaselineModel::try_from(ModelCounts {
        alpha,
        labels,
        label_counts,
        vocabulary,
        token_counts,
    })
}

/// Argmax label with its normalized posterior over the model's labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    pub posterior: Vec<f64>,
}

impl BaselineModel {
    pub fn labels(&self) -> &[String] {
        &self.counts.labels
    }

    pub fn alpha(&self) -> f64 {
        self.counts.alpha
    }

    pub fn vocabulary_len(&self) -> usize {
        self.counts.vocabulary.len()
    }

    /// Training frequency of each label, for repair tie-breaking.
    pub fn label_frequencies(&self) -> BTreeMap<String, u64> {
        self.counts
            .labels
            .iter()
            .cloned()
            .zip(self.counts.label_counts.iter().copied())
            .collect()
    }

    /// `P(token | label)` for every vocabulary entry, in vocabulary order.
    pub fn likelihoods(&self, label: usize) -> Vec<f64> {
        self.log_likelihood[label].iter().map(|l| l.exp()).collect()
    }

    /// Unnormalized log posterior per label. Tokens outside the vocabulary
    /// are ignored.
    pub fn log_scores(&self, input: &str) -> Vec<f64> {
        let token_ids: Vec<usize> = tokenize(input)
            .iter()
            .filter_map(|t| self.index.get(t).copied())
            .collect();
        self.log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(prior, lik)| prior + token_ids.iter().map(|&t| lik[t]).sum::<f64>())
            .collect()
    }

    pub fn predict(&self, input: &str) -> Prediction {
        let scores = self.log_scores(input);
        let mut best = 0;
        for i in 1..scores.len() {
            let better = match scores[i].partial_cmp(&scores[best]) {
                Some(Ordering::Greater) => true,
                Some(Ordering::Equal) => self.counts.label_counts[i] > self.counts.label_counts[best],
                _ => false,
            };
            if better {
                best = i;
            }
        }
        let max = scores[best];
        let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let norm: f64 = weights.iter().sum();
        Prediction {
            label: self.counts.labels[best].clone(),
            posterior: weights.iter().map(|w| w / norm).collect(),
        }
    }

    /// The argmax label as raw output for `example_id`.
    pub fn predict_raw(&self, example_id: &str, input: &str) -> RawPrediction {
        RawPrediction {
            example_id: example_id.to_string(),
            output: self.predict(input).label,
        }
    }
}
