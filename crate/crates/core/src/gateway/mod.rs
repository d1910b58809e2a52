//! Prompt assembly, completion backends and batch QA runs.

mod backend;
mod batch;
mod prompt;

use std::time::Duration;

use thiserror::Error;

use crate::answerer::AnswerError;

pub use backend::{
    BackendConfig, CannedBackend, CompletionBackend, HttpBackend, OracleBackend, Provider, ENV_API_KEY,
    ENV_BASE_URL, ENV_MODEL,
};
pub use batch::{run_qa_batch, DEFAULT_EXAMPLE_COUNT};
pub use prompt::{
    assemble_conversion_prompt, assemble_qa_prompt, PromptBundle, ANSWER_CUE, EXAMPLES_HEADER, KNOWLEDGE_HEADER,
    QA_PREAMBLE, QUESTION_HEADER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error("no questions to answer")]
    EmptyBatch,
    #[error("missing credentials: set {0}")]
    MissingCredentials(&'static str),
    #[error("request timed out after {0:?}")]
    TimeoutExceeded(Duration),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Answer(#[from] AnswerError),
}
