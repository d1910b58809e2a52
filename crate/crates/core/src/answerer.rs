//! Template-based question answering over an [`OpmModel`] with
//! element-level traces.

use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::metrics::ElementSet;
use crate::model::{ElementKind, ElementRef, OpmModel};
use crate::name::Name;
use crate::reasoner::{
    agents_of, build_transition_graph, evolution_trace, path_query_trace, transition_path, ReasonError,
    ReasoningTrace, TransitionEdge,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnswerError {
    #[error("unsupported question: {0}")]
    UnsupportedQuestion(String),
    #[error("unknown name '{0}'")]
    UnknownName(String),
    #[error(transparent)]
    Reasoning(#[from] ReasonError),
    #[error("process '{process}' does not change '{object}'")]
    NoTransition { process: String, object: String },
}

/// The verb a path question was asked with; answers reuse it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    #[default]
    Change,
    Transition,
    Evolve,
}

impl Verb {
    fn third_person(self) -> &'static str {
        match self {
            Verb::Change => "changes",
            Verb::Transition => "transitions",
            Verb::Evolve => "evolves",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryKind {
    ProcessesBetween { object: Name, from: Name, to: Name, verb: Verb },
    EvolutionPath { object: Name, process: Option<Name> },
    RelationshipBetween { process_a: Name, process_b: Name, object: Name },
    AgentOf { process: Name },
    HowAchieveState { object: Name, state: Name, before: Name },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Query {
    #[serde(flatten)]
    pub kind: QueryKind,
    pub raw_question: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TracedAnswer {
    pub text: String,
    pub trace: ReasoningTrace,
    pub elements: ElementSet,
}

macro_rules! template {
    ($name:ident, $re:expr) => {
        static $name: LazyLock<Regex> = LazyLock::new(|| Regex::new(concat!("(?i)^", $re, r"\s*\??$")).unwrap());
    };
}

template!(CHANGE, r"what processes change (.+)");
template!(INVOLVED, r"what processes are involved in (.+)");
template!(HOW_VERB, r"how does (.+?) (change|transition|evolve) (from .+)");
template!(RELATE, r"how does (.+) process relate to the different states of (.+)");
template!(RELATIONSHIP, r"what is the relationship between (.+) in (.+) evolution");
template!(ACHIEVE, r"how does (.+ achieve .+ before becoming .+)");
template!(WHO_HANDLES, r"(?:who|what) handles (.+)");
template!(HOW_EVOLVE, r"how does (.+) evolve");

fn strip_article(span: &str) -> &str {
    let span = span.trim();
    for article in ["the ", "a ", "an "] {
        if span.len() > article.len() && span[..article.len()].eq_ignore_ascii_case(article) {
            return span[article.len()..].trim_start();
        }
    }
    span
}

/// Every way to cut `text` into consecutive spans at occurrences of the
/// given separators, in order.
fn splits<'t>(text: &'t str, separators: &[&str]) -> Vec<Vec<&'t str>> {
    let Some((sep, rest)) = separators.split_first() else {
        return vec![vec![text]];
    };
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    if lower.len() != text.len() {
        return out;
    }
    let mut start = 0;
    while let Some(pos) = lower[start..].find(sep) {
        let at = start + pos;
        let head = &text[..at];
        for mut tail in splits(&text[at + sep.len()..], rest) {
            tail.insert(0, head);
            out.push(tail);
        }
        start = at + 1;
    }
    out
}

struct Resolver<'m> {
    model: &'m OpmModel,
}

impl<'m> Resolver<'m> {
    fn object(&self, span: &str) -> Option<Name> {
        self.model.object(strip_article(span)).map(|o| o.name.clone())
    }

    fn process(&self, span: &str) -> Option<Name> {
        let span = strip_article(span);
        let p = self.model.process(span).or_else(|| {
            let bare = span.strip_suffix(" process").or_else(|| span.strip_suffix(" Process"))?;
            self.model.process(bare)
        })?;
        Some(p.name.clone())
    }

    fn state(&self, object: &Name, span: &str) -> Option<Name> {
        let obj = self.model.object(object.canonical())?;
        let span = strip_article(span);
        let span = span.strip_prefix("state ").unwrap_or(span);
        obj.state(span).map(|s| s.name.clone())
    }

    /// Object followed by two of its states.
    fn object_states(&self, parts: &[&str]) -> Option<(Name, Name, Name)> {
        let object = self.object(parts[0])?;
        let from = self.state(&object, parts[1])?;
        let to = self.state(&object, parts[2])?;
        Some((object, from, to))
    }

    /// First span (in text order) that names nothing, for error reporting.
    fn first_unknown(&self, parts: &[&str]) -> String {
        let object = self.object(parts[0]);
        for (i, span) in parts.iter().enumerate() {
            let known = match (i, &object) {
                (0, _) => object.is_some(),
                (_, Some(o)) => self.state(o, span).is_some() || self.model.lookup_element(strip_article(span)).is_some(),
                (_, None) => self.model.lookup_element(strip_article(span)).is_some(),
            };
            if !known {
                return strip_article(span).to_string();
            }
        }
        strip_article(parts[0]).to_string()
    }

    fn path_spans(&self, text: &str, separators: &[&str]) -> Result<(Name, Name, Name), AnswerError> {
        let candidates = splits(text, separators);
        if let Some(found) = candidates.iter().find_map(|parts| self.object_states(parts)) {
            return Ok(found);
        }
        match candidates.last() {
            Some(parts) => Err(AnswerError::UnknownName(self.first_unknown(parts))),
            None => Err(AnswerError::UnsupportedQuestion(text.to_string())),
        }
    }
}

/// Matches a question against the supported templates and resolves every
/// captured name against the model vocabulary.
pub fn parse_question(question: &str, model: &OpmModel) -> Result<Query, AnswerError> {
    let q = question.trim();
    let r = Resolver { model };
    let query = |kind| Ok(Query { kind, raw_question: question.to_string() });

    if let Some(c) = CHANGE.captures(q) {
        let (object, from, to) = r.path_spans(&c[1], &[" from ", " to "])?;
        return query(QueryKind::ProcessesBetween { object, from, to, verb: Verb::Change });
    }
    if let Some(c) = INVOLVED.captures(q) {
        let (object, from, to) = r.path_spans(&c[1], &[" evolving from ", " to "])?;
        return query(QueryKind::ProcessesBetween { object, from, to, verb: Verb::Evolve });
    }
    if let Some(c) = RELATE.captures(q) {
        let span = strip_article(&c[1]);
        let process = r.process(span).ok_or_else(|| AnswerError::UnknownName(span.to_string()))?;
        let object = r.object(&c[2]).ok_or_else(|| AnswerError::UnknownName(strip_article(&c[2]).to_string()))?;
        return query(QueryKind::EvolutionPath { object, process: Some(process) });
    }
    if let Some(c) = HOW_VERB.captures(q) {
        let verb = match c[2].to_lowercase().as_str() {
            "transition" => Verb::Transition,
            "evolve" => Verb::Evolve,
            _ => Verb::Change,
        };
        let text = format!("{} {}", &c[1], &c[3]);
        let (object, from, to) = r.path_spans(&text, &[" from ", " to "])?;
        return query(QueryKind::ProcessesBetween { object, from, to, verb });
    }
    if let Some(c) = RELATIONSHIP.captures(q) {
        let object = r.object(&c[2]).ok_or_else(|| AnswerError::UnknownName(strip_article(&c[2]).to_string()))?;
        let candidates = splits(&c[1], &[" and "]);
        let pair = candidates.iter().find_map(|p| Some((r.process(p[0])?, r.process(p[1])?)));
        let Some((process_a, process_b)) = pair else {
            let span = candidates
                .first()
                .map(|p| if r.process(p[0]).is_none() { p[0] } else { p[1] })
                .unwrap_or(&c[1]);
            return Err(AnswerError::UnknownName(strip_article(span).to_string()));
        };
        return query(QueryKind::RelationshipBetween { process_a, process_b, object });
    }
    if let Some(c) = ACHIEVE.captures(q) {
        let candidates = splits(&c[1], &[" achieve ", " before becoming "]);
        let found = candidates.iter().find_map(|p| {
            let object = r.object(p[0])?;
            Some((r.state(&object, p[1])?, r.state(&object, p[2])?, object))
        });
        let Some((state, before, object)) = found else {
            return match candidates.first() {
                Some(parts) => Err(AnswerError::UnknownName(r.first_unknown(parts))),
                None => Err(AnswerError::UnsupportedQuestion(question.to_string())),
            };
        };
        return query(QueryKind::HowAchieveState { object, state, before });
    }
    if let Some(c) = WHO_HANDLES.captures(q) {
        let process = r.process(&c[1]).ok_or_else(|| AnswerError::UnknownName(strip_article(&c[1]).to_string()))?;
        return query(QueryKind::AgentOf { process });
    }
    if let Some(c) = HOW_EVOLVE.captures(q) {
        let object = r.object(&c[1]).ok_or_else(|| AnswerError::UnknownName(strip_article(&c[1]).to_string()))?;
        return query(QueryKind::EvolutionPath { object, process: None });
    }
    Err(AnswerError::UnsupportedQuestion(question.to_string()))
}

/// "a", "a and b", "a, b, and c".
pub fn oxford_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

struct Render {
    text: String,
    elements: ElementSet,
}

impl Render {
    fn new() -> Self {
        Self { text: String::new(), elements: ElementSet::new() }
    }

    fn push(&mut self, s: &str) -> &mut Self {
        self.text.push_str(s);
        self
    }

    fn object(&mut self, o: &Name) -> &mut Self {
        self.elements.insert(ElementRef::object(o.canonical()));
        self.push(o.surface())
    }

    fn process(&mut self, p: &Name) -> &mut Self {
        self.elements.insert(ElementRef::process(p.canonical()));
        self.push(p.surface())
    }

    fn state(&mut self, o: &Name, s: &Name) -> &mut Self {
        self.elements.insert(ElementRef::state(o.canonical(), s.canonical()));
        self.push(s.surface())
    }

    fn processes(&mut self, ps: &[Name]) -> &mut Self {
        for p in ps {
            self.elements.insert(ElementRef::process(p.canonical()));
        }
        let names: Vec<&str> = ps.iter().map(Name::surface).collect();
        self.push(&oxford_list(&names))
    }

    fn states(&mut self, o: &Name, ss: &[Name]) -> &mut Self {
        for s in ss {
            self.elements.insert(ElementRef::state(o.canonical(), s.canonical()));
        }
        let names: Vec<&str> = ss.iter().map(Name::surface).collect();
        self.push(&names.join(", "))
    }
}

fn first_transition(model: &OpmModel, process: &Name, object: &Name) -> Result<TransitionEdge, AnswerError> {
    build_transition_graph(model, object.canonical())?
        .transitions()
        .find(|e| &e.process == process)
        .cloned()
        .ok_or_else(|| AnswerError::NoTransition {
            process: process.surface().to_string(),
            object: object.surface().to_string(),
        })
}

fn sequence_position(model: &OpmModel, p: &Name) -> usize {
    model
        .inzooms
        .iter()
        .find_map(|z| z.subprocesses.iter().position(|s| s == p))
        .unwrap_or(usize::MAX)
}

fn render_path(model: &OpmModel, object: &Name, from: &Name, to: &Name, verb: Verb) -> Result<TracedAnswer, AnswerError> {
    let trace = path_query_trace(model, object.canonical(), from.canonical(), to.canonical())?;
    let mut r = Render::new();
    if from == to {
        r.object(object).push(" is already in state ").state(object, from).push(".");
        return Ok(TracedAnswer { text: r.text, trace, elements: r.elements });
    }
    let path = transition_path(model, object.canonical(), from.canonical(), to.canonical())?;
    let processes: Vec<Name> = path.iter().map(|e| e.process.clone()).collect();
    r.object(object).push(" ").push(verb.third_person()).push(" from ");
    r.state(object, from).push(" to ").state(object, to).push(" through ");
    r.processes(&processes);
    r.push(if processes.len() == 1 { " process." } else { " processes." });
    Ok(TracedAnswer { text: r.text, trace, elements: r.elements })
}

fn render_evolution(model: &OpmModel, object: &Name, process: Option<&Name>) -> Result<TracedAnswer, AnswerError> {
    let trace = evolution_trace(model, object.canonical())?;
    let states: Vec<Name> = trace
        .steps
        .iter()
        .filter(|s| s.kind == ElementKind::State)
        .map(|s| {
            model
                .object(object.canonical())
                .and_then(|o| o.state(&s.name))
                .map(|st| st.name.clone())
                .expect("trace states come from the model")
        })
        .collect();
    let mut r = Render::new();
    match process {
        Some(p) => {
            r.push("The ").process(p).push(" process changes ").object(object);
        }
        None => {
            r.object(object).push(" changes");
        }
    }
    let (first, last) = (&states[0], &states[states.len() - 1]);
    r.push(" from ").state(object, first);
    match states.len() {
        1 => {
            r.push(" and stays there");
        }
        2 => {
            r.push(" to ").state(object, last);
        }
        n => {
            r.push(" through ").states(object, &states[1..n - 1]).push(", and finally to ").state(object, last);
        }
    }
    r.push(".");
    Ok(TracedAnswer { text: r.text, trace, elements: r.elements })
}

fn render_relationship(model: &OpmModel, a: &Name, b: &Name, object: &Name, query: String) -> Result<TracedAnswer, AnswerError> {
    let (mut first, mut second) = (a, b);
    let (mut e1, mut e2) = (first_transition(model, a, object)?, first_transition(model, b, object)?);
    let (pa, pb) = (sequence_position(model, a), sequence_position(model, b));
    if pb < pa || (pa == pb && e2.to == e1.from.clone().expect("transition edges have a source")) {
        std::mem::swap(&mut first, &mut second);
        std::mem::swap(&mut e1, &mut e2);
    }
    let from1 = e1.from.clone().expect("transition edges have a source");
    let from2 = e2.from.clone().expect("transition edges have a source");
    let mut r = Render::new();
    r.process(first).push(" changes ").object(object).push(" from ").state(object, &from1);
    r.push(" to ").state(object, &e1.to).push(", and ").process(second).push(" then changes it from ");
    r.state(object, &from2).push(" to ").state(object, &e2.to).push(".");
    let state = |s: &Name| ElementRef::state(object.canonical(), s.canonical());
    let steps = vec![
        state(&from1),
        ElementRef::process(first.canonical()),
        state(&e1.to),
        state(&from2),
        ElementRef::process(second.canonical()),
        state(&e2.to),
    ];
    Ok(TracedAnswer { text: r.text, trace: ReasoningTrace { query, steps }, elements: r.elements })
}

fn render_agents(model: &OpmModel, process: &Name) -> Result<TracedAnswer, AnswerError> {
    let agents = agents_of(model, process.canonical())?;
    let mut r = Render::new();
    if agents.is_empty() {
        r.process(process).push(" has no agent.");
    } else {
        for a in &agents {
            r.elements.insert(ElementRef::object(a.canonical()));
        }
        let names: Vec<&str> = agents.iter().map(Name::surface).collect();
        r.process(process).push(" is handled by ").push(&oxford_list(&names)).push(".");
    }
    let mut steps: Vec<ElementRef> = agents.iter().map(|a| ElementRef::object(a.canonical())).collect();
    steps.push(ElementRef::process(process.canonical()));
    let trace = ReasoningTrace { query: format!("agents_of({process})"), steps };
    Ok(TracedAnswer { text: r.text, trace, elements: r.elements })
}

/// The unique state with a transition into `state`.
fn unique_predecessor(model: &OpmModel, object: &Name, state: &Name) -> Result<Option<Name>, AnswerError> {
    let graph = build_transition_graph(model, object.canonical())?;
    let mut preds: Vec<Name> = Vec::new();
    for e in graph.transitions().filter(|e| &e.to == state) {
        let from = e.from.clone().expect("transition edges have a source");
        if !preds.contains(&from) {
            preds.push(from);
        }
    }
    Ok(if preds.len() == 1 { preds.pop() } else { None })
}

/// Executes a parsed query.
pub fn execute_query(model: &OpmModel, query: &Query) -> Result<TracedAnswer, AnswerError> {
    match &query.kind {
        QueryKind::ProcessesBetween { object, from, to, verb } => render_path(model, object, from, to, *verb),
        QueryKind::EvolutionPath { object, process } => render_evolution(model, object, process.as_ref()),
        QueryKind::RelationshipBetween { process_a, process_b, object } => {
            let q = format!("relationship({process_a}, {process_b}, {object})");
            render_relationship(model, process_a, process_b, object, q)
        }
        QueryKind::AgentOf { process } => render_agents(model, process),
        QueryKind::HowAchieveState { object, state, before } => match unique_predecessor(model, object, state)? {
            Some(pred) => render_path(model, object, &pred, before, Verb::Change),
            None => Err(AnswerError::UnsupportedQuestion(query.raw_question.clone())),
        },
    }
}

pub fn answer_question(model: &OpmModel, question: &str) -> Result<TracedAnswer, AnswerError> {
    execute_query(model, &parse_question(question, model)?)
}

/// Processes named in an answer, in text order of first mention.
pub fn mentioned_processes(answer: &TracedAnswer) -> Vec<String> {
    answer
        .trace
        .steps
        .iter()
        .filter(|s| s.kind == ElementKind::Process)
        .filter(|s| answer.elements.contains(s))
        .map(|s| s.name.clone())
        .collect()
}
