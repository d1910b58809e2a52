use std::sync::LazyLock;

use regex::Regex;

use super::{OplError, OplStatement, StatementKind};
use crate::model::{
    validate_model, Diagnostic, InZoomContext, LinkKind, OpmModel, OpmState, ProceduralLink, Severity,
};
use crate::name::{canonical_name, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Unrecognized sentences become warnings and are skipped.
    #[default]
    Lenient,
    /// The first error diagnostic aborts parsing.
    Strict,
}

const TIME_SEQUENCE: &str = ", which occur in that time sequence";

macro_rules! template {
    ($re:expr) => {
        LazyLock::new(|| Regex::new($re).expect("valid sentence template"))
    };
}

// Longest templates are tried first; see `parse_sentence`.
static INZOOM_DIAGRAM: LazyLock<Regex> =
    template!(r"^(?P<parent>.+?) from (?P<src>\S+) zooms in (?P<dst>\S+) into (?P<list>.+)$");
static INZOOM: LazyLock<Regex> = template!(r"^(?P<parent>.+?) zooms into (?P<list>.+)$");
static ENUMERATION: LazyLock<Regex> = template!(r"^(?P<object>.+?) can be (?P<list>.+)$");
static MARKER: LazyLock<Regex> =
    template!(r"^(?:[Tt]he )?[Ss]tate (?P<state>.+) is (?P<which>initial|final)$");
static TRANSITION: LazyLock<Regex> =
    template!(r"^(?P<process>.+?) changes (?P<object>.+?) from (?P<from>.+?) to (?P<to>.+)$");
static STATE_SET: LazyLock<Regex> =
    template!(r"^(?P<process>.+?) changes (?P<object>.+?) to state (?P<to>.+)$");
static AGENT: LazyLock<Regex> = template!(r"^(?P<agent>.+?) handles (?P<process>.+)$");
static INSTRUMENT: LazyLock<Regex> = template!(r"^(?P<process>.+?) requires (?P<object>.+)$");
static RESULT: LazyLock<Regex> = template!(r"^(?P<process>.+?) yields (?P<object>.+)$");
static CONSUMPTION: LazyLock<Regex> = template!(r"^(?P<process>.+?) consumes (?P<object>.+)$");
static OTHER_STATES: LazyLock<Regex> = template!(r"^at one of (?P<count>\w+) other states?$");
static NUMBERING: LazyLock<Regex> = template!(r"^\s*\d+[.)]\s+");
static SENTENCE_BREAK: LazyLock<Regex> = template!(r"\.\s+");

const NUMERALS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

fn parse_numeral(word: &str) -> Option<u32> {
    let word = word.to_lowercase();
    NUMERALS
        .iter()
        .position(|n| *n == word)
        .map(|n| n as u32)
        .or_else(|| word.parse().ok())
}

/// Splits "a, b or c" / "a, b, and c" / "a, b, c" into items. `conj` is the
/// conjunction that may join the last two items without a comma.
fn split_list(text: &str, conj: &str) -> Vec<String> {
    let mut items: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    if let Some(last) = items.pop() {
        let stripped = ["and ", "or "]
            .iter()
            .find_map(|c| last.strip_prefix(c))
            .filter(|_| !items.is_empty());
        match stripped {
            Some(rest) => items.push(rest.trim().to_string()),
            None => {
                let sep = format!(" {conj} ");
                match last.rfind(&sep) {
                    Some(at) => {
                        items.push(last[..at].trim().to_string());
                        items.push(last[at + sep.len()..].trim().to_string());
                    }
                    None => items.push(last),
                }
            }
        }
    }
    items
}

fn unrecognized(line_no: usize, sentence: &str) -> Diagnostic {
    Diagnostic::error(Some(line_no), format!("unrecognized sentence: {sentence:?}"))
}

/// Parses one OPL sentence (without its terminating period, though a
/// trailing period is tolerated).
pub fn parse_sentence(sentence: &str, line_no: usize) -> Result<OplStatement, Diagnostic> {
    let sentence = sentence.trim();
    let sentence = NUMBERING.replace(sentence, "");
    let text = sentence.trim().trim_end_matches('.').trim();
    let fail = || unrecognized(line_no, text);
    if text.is_empty() {
        return Err(fail());
    }
    let cap = |re: &Regex| -> Option<Vec<String>> {
        let c = re.captures(text)?;
        let groups: Vec<String> = re
            .capture_names()
            .flatten()
            .map(|n| c.name(n).map(|m| m.as_str().trim().to_string()).unwrap_or_default())
            .collect();
        groups.iter().all(|g| !g.is_empty()).then_some(groups)
    };

    let kind = if let Some(g) = cap(&INZOOM_DIAGRAM) {
        inzoom(&g[0], Some(g[1].clone()), Some(g[2].clone()), &g[3])
    } else if let Some(g) = cap(&INZOOM) {
        inzoom(&g[0], None, None, &g[1])
    } else if let Some(g) = cap(&ENUMERATION) {
        let mut states = split_list(&g[1], "or");
        let mut other_count = None;
        if let Some(last) = states.last() {
            if let Some(c) = OTHER_STATES.captures(last) {
                other_count = Some(parse_numeral(&c["count"]).ok_or_else(fail)?);
                states.pop();
            }
        }
        if states.iter().any(String::is_empty) || (states.is_empty() && other_count.is_none()) {
            return Err(fail());
        }
        Some(StatementKind::StateEnumeration { object: g[0].clone(), states, other_count })
    } else if let Some(g) = cap(&MARKER) {
        let state = g[0].clone();
        Some(if g[1] == "initial" {
            StatementKind::InitialMarker { state, object_context: None }
        } else {
            StatementKind::FinalMarker { state, object_context: None }
        })
    } else if let Some(g) = cap(&TRANSITION) {
        Some(StatementKind::StateTransition {
            process: g[0].clone(),
            object: g[1].clone(),
            from: g[2].clone(),
            to: g[3].clone(),
        })
    } else if let Some(g) = cap(&STATE_SET) {
        Some(StatementKind::StateSet { process: g[0].clone(), object: g[1].clone(), to: g[2].clone() })
    } else if let Some(g) = cap(&AGENT) {
        Some(StatementKind::Agent { agent: g[0].clone(), process: g[1].clone() })
    } else if let Some(g) = cap(&INSTRUMENT) {
        Some(StatementKind::Instrument { process: g[0].clone(), object: g[1].clone() })
    } else if let Some(g) = cap(&RESULT) {
        Some(StatementKind::Result { process: g[0].clone(), object: g[1].clone() })
    } else {
        cap(&CONSUMPTION).map(|g| StatementKind::Consumption { process: g[0].clone(), object: g[1].clone() })
    };

    kind.map(|kind| OplStatement { kind, source_line: line_no }).ok_or_else(fail)
}

fn inzoom(parent: &str, src: Option<String>, dst: Option<String>, list: &str) -> Option<StatementKind> {
    let (list, time_sequenced) = match list.strip_suffix(TIME_SEQUENCE) {
        Some(rest) => (rest, true),
        None => (list, false),
    };
    let children = split_list(list, "and");
    if children.iter().any(String::is_empty) {
        return None;
    }
    Some(StatementKind::InZoom {
        parent: parent.to_string(),
        source_diagram: src,
        target_diagram: dst,
        children,
        time_sequenced,
    })
}

/// Parses one physical line, which may hold several sentences and an
/// optional "N." list prefix. Blank lines yield no statements.
pub fn parse_line(line: &str, line_no: usize) -> Vec<Result<OplStatement, Diagnostic>> {
    let line = line.trim();
    let body = NUMBERING.replace(line, "");
    let body = body.trim();
    if body.is_empty() {
        return Vec::new();
    }
    SENTENCE_BREAK
        .split(body)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_sentence(s, line_no))
        .collect()
}

struct PendingMarker {
    state: String,
    initial: bool,
    context: Option<String>,
    line: usize,
}

/// Parses a whole OPL document into a model and its diagnostics.
///
/// Objects and processes are declared on first mention; states attach from
/// enumerations; initial/final markers resolve against the most recently
/// enumerated object, falling back to the unique object owning that state.
pub fn parse_document(text: &str, mode: ParseMode) -> Result<(OpmModel, Vec<Diagnostic>), OplError> {
    let mut model = OpmModel::new();
    let mut diagnostics = Vec::new();
    let mut markers = Vec::new();
    let mut context: Option<String> = None;

    let emit = |d: Diagnostic, diagnostics: &mut Vec<Diagnostic>| -> Result<(), OplError> {
        if mode == ParseMode::Strict && d.is_error() {
            return Err(OplError::Strict(d));
        }
        diagnostics.push(d);
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        for parsed in parse_line(line, line_no) {
            let stmt = match parsed {
                Ok(stmt) => stmt,
                Err(mut d) => {
                    if mode == ParseMode::Lenient {
                        d.severity = Severity::Warning;
                    }
                    emit(d, &mut diagnostics)?;
                    continue;
                }
            };
            let line = Some(line_no);
            let link = |kind| ProceduralLink { kind, line };
            match stmt.kind {
                StatementKind::StateEnumeration { object, states, other_count } => {
                    let obj = model.declare_object(&object);
                    let mut seen = Vec::new();
                    let mut dupes = Vec::new();
                    for s in states {
                        let key = canonical_name(&s);
                        if seen.contains(&key) {
                            dupes.push(s);
                            continue;
                        }
                        seen.push(key);
                        if obj.state(&s).is_none() {
                            obj.states.push(OpmState::new(&s));
                        }
                    }
                    if other_count.is_some() {
                        obj.unnamed_states = other_count;
                    }
                    context = Some(obj.name.canonical().to_string());
                    for s in dupes {
                        emit(
                            Diagnostic::error(line, format!("state '{s}' listed twice for '{object}'")),
                            &mut diagnostics,
                        )?;
                    }
                }
                StatementKind::InitialMarker { state, .. } => {
                    markers.push(PendingMarker { state, initial: true, context: context.clone(), line: line_no })
                }
                StatementKind::FinalMarker { state, .. } => {
                    markers.push(PendingMarker { state, initial: false, context: context.clone(), line: line_no })
                }
                StatementKind::StateTransition { process, object, from, to } => {
                    model.declare_process(&process);
                    model.declare_object(&object);
                    model.add_link(link(LinkKind::StateTransition {
                        process: Name::new(&process),
                        object: Name::new(&object),
                        from_state: Name::new(&from),
                        to_state: Name::new(&to),
                    }));
                }
                StatementKind::StateSet { process, object, to } => {
                    model.declare_process(&process);
                    model.declare_object(&object);
                    model.add_link(link(LinkKind::StateSet {
                        process: Name::new(&process),
                        object: Name::new(&object),
                        to_state: Name::new(&to),
                    }));
                }
                StatementKind::Agent { agent, process } => {
                    model.declare_object(&agent);
                    model.declare_process(&process);
                    model.add_link(link(LinkKind::Agent { agent: Name::new(&agent), process: Name::new(&process) }));
                }
                StatementKind::Instrument { process, object } => {
                    model.declare_process(&process);
                    model.declare_object(&object);
                    model.add_link(link(LinkKind::Instrument {
                        process: Name::new(&process),
                        object: Name::new(&object),
                    }));
                }
                StatementKind::Result { process, object } => {
                    model.declare_process(&process);
                    model.declare_object(&object);
                    model.add_link(link(LinkKind::Result { process: Name::new(&process), object: Name::new(&object) }));
                }
                StatementKind::Consumption { process, object } => {
                    model.declare_process(&process);
                    model.declare_object(&object);
                    model.add_link(link(LinkKind::Consumption {
                        process: Name::new(&process),
                        object: Name::new(&object),
                    }));
                }
                StatementKind::InZoom { parent, source_diagram, target_diagram, children, time_sequenced } => {
                    model.declare_process(&parent);
                    for c in &children {
                        model.declare_process(c);
                    }
                    let ctx = InZoomContext {
                        parent_process: Name::new(&parent),
                        source_diagram,
                        target_diagram,
                        subprocesses: children.iter().map(|c| Name::new(c)).collect(),
                        time_sequenced,
                        line,
                    };
                    let duplicate = model.inzooms.iter().any(|z| {
                        z.parent_process == ctx.parent_process
                            && z.subprocesses == ctx.subprocesses
                            && z.time_sequenced == ctx.time_sequenced
                    });
                    if !duplicate {
                        model.inzooms.push(ctx);
                    }
                }
            }
        }
    }

    for m in markers {
        if let Err(d) = apply_marker(&mut model, &m) {
            emit(d, &mut diagnostics)?;
        }
    }

    for d in validate_model(&model) {
        emit(d, &mut diagnostics)?;
    }
    model.diagnostics = diagnostics.clone();
    Ok((model, diagnostics))
}

fn apply_marker(model: &mut OpmModel, m: &PendingMarker) -> Result<(), Diagnostic> {
    let in_context = m
        .context
        .as_deref()
        .and_then(|c| model.object(c))
        .is_some_and(|o| o.state(&m.state).is_some());
    let owner = if in_context {
        m.context.clone().expect("context checked above")
    } else {
        let owners: Vec<String> = model
            .objects
            .iter()
            .filter(|o| o.state(&m.state).is_some())
            .map(|o| o.name.canonical().to_string())
            .collect();
        match owners.as_slice() {
            [one] => one.clone(),
            [] => {
                return Err(Diagnostic::error(
                    Some(m.line),
                    format!("state '{}' is not declared for any object", m.state),
                ))
            }
            _ => {
                return Err(Diagnostic::error(
                    Some(m.line),
                    format!("state '{}' is ambiguous between objects {}", m.state, owners.join(", ")),
                ))
            }
        }
    };
    let state = model
        .object_mut(&owner)
        .and_then(|o| o.state_mut(&m.state))
        .expect("owner resolved above");
    if m.initial {
        state.is_initial = true;
    } else {
        state.is_final = true;
    }
    Ok(())
}
