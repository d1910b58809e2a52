use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::normalize::{word_tokens, Lemmatizer};
use super::rouge::f1;
use crate::model::{ElementRef, OpmModel};

/// A set of OPM elements under canonical comparison.
pub type ElementSet = BTreeSet<ElementRef>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    /// Element names must occur verbatim (after canonicalization).
    #[default]
    Exact,
    /// Tokens are compared after suffix lemmatization, so
    /// "validating" matches "validated".
    Stemmed,
}

fn tokens(text: &str, mode: ExtractionMode) -> Vec<String> {
    let raw = word_tokens(text);
    match mode {
        ExtractionMode::Exact => raw,
        ExtractionMode::Stemmed => raw.iter().map(|t| Lemmatizer::SuffixRules.apply(t)).collect(),
    }
}

/// Finds every model element named in `text`. Longer names are matched
/// first and their tokens masked, so "principle" inside
/// "Heuristic-to-principle Evolving" is not counted separately.
pub fn extract_elements(text: &str, model: &OpmModel, mode: ExtractionMode) -> ElementSet {
    let mut vocabulary: BTreeMap<Vec<String>, Vec<ElementRef>> = BTreeMap::new();
    for element in model.element_refs() {
        let key = tokens(&element.name, mode);
        if !key.is_empty() {
            vocabulary.entry(key).or_default().push(element);
        }
    }
    let mut entries: Vec<(Vec<String>, Vec<ElementRef>)> = vocabulary.into_iter().collect();
    entries.sort_by(|(a, _), (b, _)| {
        b.len().cmp(&a.len()).then_with(|| b.concat().len().cmp(&a.concat().len())).then_with(|| a.cmp(b))
    });

    let text = tokens(text, mode);
    let mut masked = vec![false; text.len()];
    let mut found = ElementSet::new();
    for (name, elements) in entries {
        let n = name.len();
        if n > text.len() {
            continue;
        }
        let mut i = 0;
        while i + n <= text.len() {
            if !masked[i..i + n].iter().any(|&m| m) && text[i..i + n] == name[..] {
                masked[i..i + n].iter_mut().for_each(|m| *m = true);
                found.extend(elements.iter().cloned());
                i += n;
            } else {
                i += 1;
            }
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransparencyScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set overlap of predicted and ground-truth elements. Empty predicted
/// (ground-truth) sets give zero precision (recall).
pub fn transparency_scores(predicted: &ElementSet, ground_truth: &ElementSet) -> TransparencyScores {
    let hits = predicted.intersection(ground_truth).count();
    scores_from_counts(hits, predicted.len(), ground_truth.len())
}

/// Scores from the three set sizes `|p ∩ g|`, `|p|` and `|g|`.
pub fn scores_from_counts(hits: usize, predicted: usize, ground_truth: usize) -> TransparencyScores {
    let precision = if predicted == 0 { 0.0 } else { hits as f64 / predicted as f64 };
    let recall = if ground_truth == 0 { 0.0 } else { hits as f64 / ground_truth as f64 };
    TransparencyScores { precision, recall, f1: f1(precision, recall) }
}
