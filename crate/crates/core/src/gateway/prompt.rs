use serde::Serialize;

use super::GatewayError;

pub const QA_PREAMBLE: &str = "You are a knowledgeable assistant.\n\
Your task is to answer questions based on the provided domain knowledge.\n\
Your answers should align closely with the domain knowledge, use precise terminology, and remain concise and accurate.\n\
Focus on identifying and describing key processes, objects, and states explicitly, and clarify their relationships where relevant.";

pub const KNOWLEDGE_HEADER: &str = "Domain Knowledge:";
pub const EXAMPLES_HEADER: &str = "Examples of Question-Answer Pairs:";
pub const QUESTION_HEADER: &str = "New Question:";
pub const ANSWER_CUE: &str = "A (concise and precise):";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub knowledge: String,
    pub examples: Vec<(String, String)>,
    pub question: String,
    pub rendered: String,
}

/// Knowledge, example pairs and question under the QA prompt template.
pub fn assemble_qa_prompt(
    knowledge: &str,
    examples: &[(String, String)],
    question: &str,
) -> Result<PromptBundle, GatewayError> {
    if question.trim().is_empty() {
        return Err(GatewayError::EmptyInput("question"));
    }
    let mut r = String::new();
    r.push_str(QA_PREAMBLE);
    r.push_str("\n\n");
    r.push_str(KNOWLEDGE_HEADER);
    r.push_str("\n\n");
    r.push_str(knowledge.trim_end());
    r.push_str("\n\n");
    r.push_str(EXAMPLES_HEADER);
    r.push_str("\n\n");
    for (q, a) in examples {
        r.push_str(&format!("Q: {q}\nA: {a}\n"));
    }
    r.push('\n');
    r.push_str(QUESTION_HEADER);
    r.push_str("\n\n");
    r.push_str(&format!("Q: {question}\n{ANSWER_CUE}"));
    Ok(PromptBundle {
        knowledge: knowledge.to_string(),
        examples: examples.to_vec(),
        question: question.to_string(),
        rendered: r,
    })
}

/// Conversion instructions followed directly by the source text.
pub fn assemble_conversion_prompt(opm_instructions: &str, nl_text: &str) -> Result<PromptBundle, GatewayError> {
    if opm_instructions.trim().is_empty() {
        return Err(GatewayError::EmptyInput("instructions"));
    }
    if nl_text.trim().is_empty() {
        return Err(GatewayError::EmptyInput("text"));
    }
    Ok(PromptBundle {
        knowledge: nl_text.to_string(),
        examples: Vec::new(),
        question: String::new(),
        rendered: format!("{opm_instructions}{nl_text}"),
    })
}
