//! Symbolic core for question answering over Object-Process Methodology
//! (OPM) models: an OPL parser, a state-transition reasoner, a template
//! answerer, evaluation metrics and an LLM prompt/backend gateway.

pub mod answerer;
pub mod dataset;
pub mod dot;
pub mod gateway;
pub mod metrics;
pub mod model;
pub mod name;
pub mod opl;
pub mod reasoner;

pub use model::{
    validate_model, Diagnostic, ElementKind, ElementRef, InZoomContext, LinkKind, OpmModel, OpmObject,
    OpmProcess, OpmState, ProceduralLink, Severity,
};
pub use name::{canonical_name, Name};
pub use opl::{parse_document, parse_sentence, serialize_model, OplError, OplStatement, ParseMode, StatementKind};
pub use answerer::{answer_question, parse_question, AnswerError, Query, QueryKind, TracedAnswer};
pub use dot::export_dot;
pub use reasoner::{build_transition_graph, processes_between, ReasonError, ReasoningTrace, TransitionGraph};
