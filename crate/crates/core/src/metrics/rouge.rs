use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::normalize::{normalize_tokens, NormalizationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_overlap(overlap: usize, reference: usize, prediction: usize) -> Self {
        let recall = if reference == 0 { 0.0 } else { overlap as f64 / reference as f64 };
        let precision = if prediction == 0 { 0.0 } else { overlap as f64 / prediction as f64 };
        Self { precision, recall, f1: f1(precision, recall) }
    }

    const ZERO: Self = Self { precision: 0.0, recall: 0.0, f1: 0.0 };
    const ONE: Self = Self { precision: 1.0, recall: 1.0, f1: 1.0 };

    pub fn measure(&self, m: RougeMeasure) -> f64 {
        match m {
            RougeMeasure::Precision => self.precision,
            RougeMeasure::Recall => self.recall,
            RougeMeasure::F1 => self.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeMeasure {
    Precision,
    Recall,
    #[default]
    F1,
}

pub(crate) fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// ROUGE-N over tokens from `config`, with clipped n-gram counts. A
/// reference shorter than `n` tokens scores zero.
pub fn rouge_n(reference: &str, prediction: &str, n: usize, config: &NormalizationConfig) -> RougeScore {
    assert!(n >= 1, "n-gram order must be positive");
    let reference = normalize_tokens(reference, config);
    let prediction = normalize_tokens(prediction, config);
    rouge_n_tokens(&reference, &prediction, n)
}

pub(crate) fn rouge_n_tokens(reference: &[String], prediction: &[String], n: usize) -> RougeScore {
    if reference.len() < n {
        return RougeScore::ZERO;
    }
    let ref_counts = ngram_counts(reference, n);
    let pred_counts = ngram_counts(prediction, n);
    let overlap: usize = ref_counts
        .iter()
        .map(|(gram, &c)| c.min(pred_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_overlap(overlap, reference.len() + 1 - n, prediction.len().saturating_sub(n - 1))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Sentence-level ROUGE-L from the longest common subsequence. An empty
/// reference scores 1.0.
pub fn rouge_l(reference: &str, prediction: &str, config: &NormalizationConfig) -> RougeScore {
    let reference = normalize_tokens(reference, config);
    let prediction = normalize_tokens(prediction, config);
    rouge_l_tokens(&reference, &prediction)
}

pub(crate) fn rouge_l_tokens(reference: &[String], prediction: &[String]) -> RougeScore {
    if reference.is_empty() {
        return RougeScore::ONE;
    }
    RougeScore::from_overlap(lcs_len(reference, prediction), reference.len(), prediction.len())
}
