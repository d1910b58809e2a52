#![allow(dead_code)]

use ncai_core::dataset::{parse_jsonl, QaRecord};
use ncai_core::{canonical_name, parse_document, OpmModel, ParseMode};
use serde::Deserialize;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn model(name: &str) -> OpmModel {
    parse_document(&fixture(name), ParseMode::Strict).expect("fixture parses").0
}

pub fn table3() -> Vec<QaRecord> {
    parse_jsonl(&fixture("table3.jsonl")).unwrap()
}

/// The prose spells the process "Theoretical Backing"; the model spells it
/// "Theoretical Baking". Both compare equal here.
pub fn aliased(name: &str) -> String {
    let c = canonical_name(name);
    if c == "theoretical backing" {
        "theoretical baking".to_string()
    } else {
        c
    }
}

#[derive(Debug, Deserialize)]
pub struct PublishedRow {
    pub id: u64,
    pub la: f64,
    pub sa: f64,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
    pub bt: f64,
    pub gpt: f64,
    pub p_t: f64,
    pub r_t: f64,
    pub f1_t: f64,
}

pub fn published(system: &str) -> Vec<PublishedRow> {
    parse_jsonl(&fixture(&format!("{system}_published.jsonl"))).unwrap()
}
