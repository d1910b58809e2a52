//! Answer-quality and reasoning-transparency metrics.

mod accuracy;
mod normalize;
mod report;
mod rouge;
mod stats;
mod transparency;

use thiserror::Error;

pub use accuracy::{loose_accuracy, strict_accuracy, DEFAULT_STRICTNESS};
pub use normalize::{normalize_tokens, word_tokens, Lemmatizer, NormalizationConfig, DEFAULT_STOPWORDS};
pub use report::{
    evaluate_run, score_item, ItemMetrics, MetricAggregate, MetricComparison, MetricConfig, MetricReport,
    COLUMNS,
};
pub use rouge::{rouge_l, rouge_n, RougeMeasure, RougeScore};
pub use stats::{aggregate_stats, significance_p};
pub use transparency::{
    extract_elements, scores_from_counts, transparency_scores, ElementSet, ExtractionMode, TransparencyScores,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("{0}")]
    Domain(String),
    #[error("statistics need a non-empty sample")]
    EmptySample,
    #[error("significance test needs at least two values per sample")]
    SampleTooSmall,
    #[error("duplicate ids: {0:?}")]
    DuplicateIds(Vec<u64>),
    #[error("predictions without a matching reference: {0:?}")]
    UnmatchedIds(Vec<u64>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
