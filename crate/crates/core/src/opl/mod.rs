//! Object-Process Language: the controlled-English text form of an OPM
//! model, one fact per sentence.

mod parse;
mod serialize;

pub use parse::{parse_document, parse_line, parse_sentence, ParseMode};
pub use serialize::serialize_model;

use thiserror::Error;

use crate::model::Diagnostic;

/// One OPL sentence. Every string field holds the surface text exactly as
/// captured from the sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    /// `X can be a, b or at one of N other states.`
    StateEnumeration { object: String, states: Vec<String>, other_count: Option<u32> },
    /// `State s is initial.` The owning object is resolved by the document
    /// parser; `object_context` is the most recently enumerated object.
    InitialMarker { state: String, object_context: Option<String> },
    FinalMarker { state: String, object_context: Option<String> },
    StateTransition { process: String, object: String, from: String, to: String },
    StateSet { process: String, object: String, to: String },
    Agent { agent: String, process: String },
    Instrument { process: String, object: String },
    Result { process: String, object: String },
    Consumption { process: String, object: String },
    InZoom {
        parent: String,
        source_diagram: Option<String>,
        target_diagram: Option<String>,
        children: Vec<String>,
        time_sequenced: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OplStatement {
    pub kind: StatementKind,
    pub source_line: usize,
}

#[derive(Debug, Error)]
pub enum OplError {
    #[error("{0}")]
    Strict(Diagnostic),
    #[error("model has {} unresolved reference(s); first: {}", .0.len(), .0[0])]
    InvalidModel(Vec<Diagnostic>),
}
