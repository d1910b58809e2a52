use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::accuracy::{loose_accuracy, strict_accuracy, DEFAULT_STRICTNESS};
use super::normalize::{normalize_tokens, Lemmatizer, NormalizationConfig};
use super::rouge::{rouge_l_tokens, rouge_n_tokens, RougeMeasure};
use super::stats::{aggregate_stats, significance_p};
use super::transparency::{extract_elements, transparency_scores, ExtractionMode};
use super::MetricError;
use crate::dataset::{ExternalScore, PredictionRecord, QaRecord};
use crate::model::OpmModel;

/// Every setting that affects metric values. Recorded verbatim in each
/// report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    /// Tokens compared by loose accuracy.
    pub accuracy: NormalizationConfig,
    /// Tokens compared by ROUGE.
    pub rouge: NormalizationConfig,
    pub rouge_measure: RougeMeasure,
    pub extraction: ExtractionMode,
    pub k: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            accuracy: NormalizationConfig { lemmatizer: Lemmatizer::Plurals, ..NormalizationConfig::default() },
            rouge: NormalizationConfig::default(),
            rouge_measure: RougeMeasure::default(),
            extraction: ExtractionMode::default(),
            k: DEFAULT_STRICTNESS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemMetrics {
    pub id: u64,
    pub loose: f64,
    pub strict: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gpt: Option<f64>,
    pub t_precision: f64,
    pub t_recall: f64,
    pub t_f1: f64,
}

/// Metric columns in report order: (key, CSV header).
pub const COLUMNS: [(&str, &str); 10] = [
    ("loose", "LA"),
    ("strict", "SA"),
    ("rouge1", "R-1"),
    ("rouge2", "R-2"),
    ("rougeL", "R-L"),
    ("bt", "BT"),
    ("gpt", "GPT"),
    ("t_precision", "P_T"),
    ("t_recall", "R_T"),
    ("t_f1", "F1_T"),
];

impl ItemMetrics {
    pub fn get(&self, key: &str) -> Option<f64> {
        match key {
            "loose" => Some(self.loose),
            "strict" => Some(self.strict),
            "rouge1" => Some(self.rouge1),
            "rouge2" => Some(self.rouge2),
            "rougeL" => Some(self.rouge_l),
            "bt" => self.bt,
            "gpt" => self.gpt,
            "t_precision" => Some(self.t_precision),
            "t_recall" => Some(self.t_recall),
            "t_f1" => Some(self.t_f1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub mean: f64,
    pub mean_other: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: MetricConfig,
    pub per_item: Vec<ItemMetrics>,
    pub aggregate: Vec<MetricAggregate>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub comparison: Vec<MetricComparison>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

fn check_unique(ids: impl Iterator<Item = u64>) -> Result<(), MetricError> {
    let mut seen = BTreeSet::new();
    let dupes: BTreeSet<u64> = ids.filter(|id| !seen.insert(*id)).collect();
    if dupes.is_empty() {
        Ok(())
    } else {
        Err(MetricError::DuplicateIds(dupes.into_iter().collect()))
    }
}

/// Scores one prediction against one reference.
pub fn score_item(
    id: u64,
    reference: &str,
    prediction: &str,
    model: &OpmModel,
    config: &MetricConfig,
    warnings: &mut Vec<String>,
) -> Result<ItemMetrics, MetricError> {
    let loose = loose_accuracy(reference, prediction, &config.accuracy);
    let strict = strict_accuracy(loose, config.k)?;

    let ref_tokens = normalize_tokens(reference, &config.rouge);
    let pred_tokens = normalize_tokens(prediction, &config.rouge);
    if ref_tokens.len() < 2 {
        warnings.push(format!("item {id}: reference has {} token(s); ROUGE is degenerate", ref_tokens.len()));
    }
    let m = config.rouge_measure;
    let rouge1 = rouge_n_tokens(&ref_tokens, &pred_tokens, 1).measure(m);
    let rouge2 = rouge_n_tokens(&ref_tokens, &pred_tokens, 2).measure(m);
    let rouge_l = rouge_l_tokens(&ref_tokens, &pred_tokens).measure(m);

    let predicted = extract_elements(prediction, model, config.extraction);
    let truth = extract_elements(reference, model, config.extraction);
    let t = transparency_scores(&predicted, &truth);

    Ok(ItemMetrics {
        id,
        loose,
        strict,
        rouge1,
        rouge2,
        rouge_l,
        bt: None,
        gpt: None,
        t_precision: t.precision,
        t_recall: t.recall,
        t_f1: t.f1,
    })
}

/// Scores every reference item. Items without a prediction are scored
/// against the empty string; predictions for unknown ids are an error.
pub fn evaluate_run(
    references: &[QaRecord],
    predictions: &[PredictionRecord],
    model: &OpmModel,
    config: &MetricConfig,
) -> Result<MetricReport, MetricError> {
    check_unique(references.iter().map(|r| r.id))?;
    check_unique(predictions.iter().map(|p| p.id))?;
    let known: BTreeSet<u64> = references.iter().map(|r| r.id).collect();
    let unmatched: Vec<u64> = predictions.iter().map(|p| p.id).filter(|id| !known.contains(id)).collect();
    if !unmatched.is_empty() {
        return Err(MetricError::UnmatchedIds(unmatched));
    }
    let by_id: BTreeMap<u64, &PredictionRecord> = predictions.iter().map(|p| (p.id, p)).collect();

    let mut warnings = Vec::new();
    let mut per_item = Vec::with_capacity(references.len());
    for r in references {
        let prediction = match by_id.get(&r.id) {
            Some(p) => p.prediction.as_str(),
            None => {
                warnings.push(format!("item {}: no prediction; scored as empty", r.id));
                ""
            }
        };
        per_item.push(score_item(r.id, &r.answer, prediction, model, config, &mut warnings)?);
    }
    let aggregate = aggregate_columns(&per_item);
    Ok(MetricReport { config: config.clone(), per_item, aggregate, comparison: Vec::new(), warnings })
}

fn column(items: &[ItemMetrics], key: &str) -> Vec<f64> {
    items.iter().filter_map(|i| i.get(key)).collect()
}

fn aggregate_columns(items: &[ItemMetrics]) -> Vec<MetricAggregate> {
    COLUMNS
        .iter()
        .filter_map(|(key, _)| {
            let values = column(items, key);
            aggregate_stats(&values)
                .ok()
                .map(|(mean, std)| MetricAggregate { metric: key.to_string(), mean, std })
        })
        .collect()
}

impl MetricReport {
    /// Attaches external BLEURT / judge scores by id and refreshes the
    /// aggregates.
    pub fn attach_external(&mut self, scores: &[ExternalScore]) -> Result<(), MetricError> {
        for s in scores {
            for (name, v) in [("bt", s.bt), ("gpt", s.gpt)] {
                if let Some(v) = v {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(MetricError::Domain(format!("item {}: {name} score {v} outside [0, 1]", s.id)));
                    }
                }
            }
        }
        let by_id: BTreeMap<u64, &ExternalScore> = scores.iter().map(|s| (s.id, s)).collect();
        for item in &mut self.per_item {
            if let Some(s) = by_id.get(&item.id) {
                item.bt = s.bt;
                item.gpt = s.gpt;
            }
        }
        self.aggregate = aggregate_columns(&self.per_item);
        Ok(())
    }

    /// Welch p-values per metric against another system's report.
    pub fn compare_with(&mut self, other: &MetricReport) -> Result<(), MetricError> {
        let mut out = Vec::new();
        for (key, _) in COLUMNS {
            let (a, b) = (column(&self.per_item, key), column(&other.per_item, key));
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let p_value = significance_p(&a, &b)?;
            out.push(MetricComparison {
                metric: key.to_string(),
                mean: aggregate_stats(&a)?.0,
                mean_other: aggregate_stats(&b)?.0,
                p_value,
            });
        }
        self.comparison = out;
        Ok(())
    }

    pub fn aggregate_of(&self, key: &str) -> Option<&MetricAggregate> {
        self.aggregate.iter().find(|a| a.metric == key)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One row per item in appendix-table column order, then `mean`, `std`
    /// and (after a comparison) `p_value` footer rows.
    pub fn to_csv(&self) -> Result<String, MetricError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(COLUMNS.iter().map(|(_, h)| h.to_string()));
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
        for item in &self.per_item {
            let mut row = vec![item.id.to_string()];
            row.extend(COLUMNS.iter().map(|(k, _)| fmt(item.get(k))));
            w.write_record(&row)?;
        }
        let footer = |label: &str, pick: &dyn Fn(&str) -> Option<f64>| {
            let mut row = vec![label.to_string()];
            row.extend(COLUMNS.iter().map(|(k, _)| fmt(pick(k))));
            row
        };
        w.write_record(footer("mean", &|k| self.aggregate_of(k).map(|a| a.mean)))?;
        w.write_record(footer("std", &|k| self.aggregate_of(k).map(|a| a.std)))?;
        if !self.comparison.is_empty() {
            let p = |k: &str| self.comparison.iter().find(|c| c.metric == k).map(|c| c.p_value);
            w.write_record(footer("p_value", &p))?;
        }
        let bytes = w.into_inner().map_err(|e| MetricError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8"))
    }

    /// Aligned plain-text table of the aggregates.
    pub fn summary_table(&self) -> String {
        let mut out = format!("{:<12} {:>8} {:>8}", "metric", "mean", "std");
        if !self.comparison.is_empty() {
            out.push_str(&format!(" {:>8} {:>9}", "other", "p-value"));
        }
        out.push('\n');
        for (key, header) in COLUMNS {
            let Some(a) = self.aggregate_of(key) else { continue };
            out.push_str(&format!("{:<12} {:>8.3} {:>8.3}", header, a.mean, a.std));
            if let Some(c) = self.comparison.iter().find(|c| c.metric == key) {
                out.push_str(&format!(" {:>8.3} {:>9.4}", c.mean_other, c.p_value));
            }
            out.push('\n');
        }
        out
    }
}
