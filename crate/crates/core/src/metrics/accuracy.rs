use std::collections::BTreeSet;

use super::normalize::{normalize_tokens, NormalizationConfig};
use super::MetricError;

pub const DEFAULT_STRICTNESS: f64 = 1.5;

/// Share of unique normalized reference tokens that also occur in the
/// prediction. A reference with no content tokens scores 1.0.
pub fn loose_accuracy(reference: &str, prediction: &str, config: &NormalizationConfig) -> f64 {
    let reference: BTreeSet<String> = normalize_tokens(reference, config).into_iter().collect();
    if reference.is_empty() {
        return 1.0;
    }
    let prediction: BTreeSet<String> = normalize_tokens(prediction, config).into_iter().collect();
    reference.intersection(&prediction).count() as f64 / reference.len() as f64
}

/// `loose^k`: partial matches are penalized more as `k` grows.
pub fn strict_accuracy(loose: f64, k: f64) -> Result<f64, MetricError> {
    if !(0.0..=1.0).contains(&loose) {
        return Err(MetricError::Domain(format!("loose accuracy {loose} outside [0, 1]")));
    }
    if k.is_nan() || k < 1.0 {
        return Err(MetricError::Domain(format!("strictness exponent {k} must be >= 1")));
    }
    Ok(loose.powf(k))
}
