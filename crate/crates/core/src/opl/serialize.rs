use std::fmt::Write;

use super::OplError;
use crate::model::{validate_model, Diagnostic, LinkKind, OpmModel};
use crate::name::Name;

const NUMERALS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

fn numeral(n: u32) -> String {
    NUMERALS.get(n as usize).map_or_else(|| n.to_string(), |w| w.to_string())
}

/// "a", "a or b", "a, b or c"
fn or_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {}", init.join(", "), last),
    }
}

/// "a", "a and b", "a, b, and c"
fn and_list(items: &[&Name]) -> String {
    let items: Vec<&str> = items.iter().map(|n| n.surface()).collect();
    match items.as_slice() {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {}", init.join(", "), last),
    }
}

/// Renders a model as OPL, one sentence per line: each object's state
/// enumeration followed by its initial/final markers, then in-zooms, then
/// procedural links in declaration order. Surface names are used
/// throughout.
pub fn serialize_model(model: &OpmModel) -> Result<String, OplError> {
    let errors: Vec<Diagnostic> = validate_model(model).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(OplError::InvalidModel(errors));
    }

    let mut out = String::new();
    for object in &model.objects {
        if object.states.is_empty() && object.unnamed_states.is_none() {
            continue;
        }
        let mut items: Vec<String> = object.states.iter().map(|s| s.name.surface().to_string()).collect();
        if let Some(n) = object.unnamed_states {
            items.push(format!("at one of {} other states", numeral(n)));
        }
        let _ = writeln!(out, "{} can be {}.", object.name, or_list(&items));
        for s in object.initial_states() {
            let _ = writeln!(out, "State {} is initial.", s.name);
        }
        for s in object.final_states() {
            let _ = writeln!(out, "State {} is final.", s.name);
        }
    }

    for z in &model.inzooms {
        let children: Vec<&Name> = z.subprocesses.iter().collect();
        let head = match (&z.source_diagram, &z.target_diagram) {
            (Some(src), Some(dst)) => format!("{} from {src} zooms in {dst} into", z.parent_process),
            _ => format!("{} zooms into", z.parent_process),
        };
        let tail = if z.time_sequenced { ", which occur in that time sequence" } else { "" };
        let _ = writeln!(out, "{head} {}{tail}.", and_list(&children));
    }

    for link in &model.links {
        let sentence = match &link.kind {
            LinkKind::StateTransition { process, object, from_state, to_state } => {
                format!("{process} changes {object} from {from_state} to {to_state}.")
            }
            LinkKind::StateSet { process, object, to_state } => {
                format!("{process} changes {object} to state {to_state}.")
            }
            LinkKind::Result { process, object } => format!("{process} yields {object}."),
            LinkKind::Consumption { process, object } => format!("{process} consumes {object}."),
            LinkKind::Agent { agent, process } => format!("{agent} handles {process}."),
            LinkKind::Instrument { process, object } => format!("{process} requires {object}."),
        };
        out.push_str(&sentence);
        out.push('\n');
    }
    Ok(out)
}
