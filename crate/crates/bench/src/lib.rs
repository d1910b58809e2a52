//! Shared inputs for the benchmarks.

use ncai_core::dataset::{parse_jsonl, PredictionRecord, QaRecord};
use ncai_core::{parse_document, OpmModel, ParseMode};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn model(name: &str) -> OpmModel {
    parse_document(&fixture(name), ParseMode::Strict).expect("fixture parses").0
}

pub fn references() -> Vec<QaRecord> {
    parse_jsonl(&fixture("table3.jsonl")).expect("references parse")
}

pub fn predictions(system: &str) -> Vec<PredictionRecord> {
    parse_jsonl(&fixture(&format!("{system}_predictions.jsonl"))).expect("predictions parse")
}
