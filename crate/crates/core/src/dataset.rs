//! JSON Lines records for questions, references and predictions.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A question with its reference answer. The answer may be empty when the
/// file only lists questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaRecord {
    #[serde(default)]
    pub id: u64,
    pub question: String,
    #[serde(default)]
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: u64,
    pub prediction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn ok(id: u64, prediction: impl Into<String>) -> Self {
        Self { id, prediction: prediction.into(), error: None }
    }

    pub fn failed(id: u64, error: impl ToString) -> Self {
        Self { id, prediction: String::new(), error: Some(error.to_string()) }
    }
}

/// Optional per-item scores from an external scorer (BLEURT, LLM judge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub id: u64,
    #[serde(default)]
    pub bt: Option<f64>,
    #[serde(default)]
    pub gpt: Option<f64>,
}

pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| DatasetError::Json { line: idx + 1, source })?);
    }
    Ok(out)
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, DatasetError> {
    read_jsonl(text.as_bytes())
}

pub fn write_jsonl<T: Serialize>(mut writer: impl Write, records: &[T]) -> Result<(), DatasetError> {
    for r in records {
        serde_json::to_writer(&mut writer, r).map_err(|source| DatasetError::Json { line: 0, source })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl_string<T: Serialize>(records: &[T]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_records_and_skips_blank_lines() {
        let text = "{\"id\": 1, \"question\": \"Q?\", \"answer\": \"A.\"}\n\n{\"question\": \"R?\"}\n";
        let recs: Vec<QaRecord> = parse_jsonl(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].id, 0);
        assert_eq!(recs[1].answer, "");
    }

    #[test]
    fn bad_line_is_reported() {
        let err = parse_jsonl::<QaRecord>("{\"id\": 1, \"question\": \"Q\"}\nnot json\n").unwrap_err();
        assert!(matches!(err, DatasetError::Json { line: 2, .. }));
    }

    #[test]
    fn error_marker_is_optional_on_output() {
        let text = to_jsonl_string(&[PredictionRecord::ok(1, "x"), PredictionRecord::failed(2, "boom")]);
        assert_eq!(text, "{\"id\":1,\"prediction\":\"x\"}\n{\"id\":2,\"prediction\":\"\",\"error\":\"boom\"}\n");
    }
}
