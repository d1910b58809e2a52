//! Graphviz DOT rendering of an [`OpmModel`].
//!
//! Objects become clusters holding their states, processes become
//! ellipses, procedural links become labeled edges and in-zoom
//! decompositions become dashed edges from parent to subprocess. Node ids
//! follow declaration order, so output is stable for a given model.

use std::collections::HashMap;
use std::fmt::Write;

use crate::model::{LinkKind, OpmModel};
use crate::name::Name;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

struct Ids {
    objects: HashMap<String, String>,
    states: HashMap<(String, String), String>,
    processes: HashMap<String, String>,
}

impl Ids {
    fn new(model: &OpmModel) -> Self {
        let mut ids = Ids { objects: HashMap::new(), states: HashMap::new(), processes: HashMap::new() };
        for (i, o) in model.objects.iter().enumerate() {
            ids.objects.insert(o.name.canonical().to_string(), format!("o{i}"));
            for (j, s) in o.states.iter().enumerate() {
                ids.states.insert((o.name.canonical().to_string(), s.name.canonical().to_string()), format!("o{i}_s{j}"));
            }
        }
        for (i, p) in model.processes.iter().enumerate() {
            ids.processes.insert(p.name.canonical().to_string(), format!("p{i}"));
        }
        ids
    }

    fn object(&self, o: &Name) -> &str {
        &self.objects[o.canonical()]
    }

    fn state(&self, o: &Name, s: &Name) -> &str {
        &self.states[&(o.canonical().to_string(), s.canonical().to_string())]
    }

    fn process(&self, p: &Name) -> &str {
        &self.processes[p.canonical()]
    }
}

/// Renders the model as a `digraph`. Links whose endpoints are not
/// declared are skipped, so a partially invalid model still renders.
pub fn export_dot(model: &OpmModel) -> String {
    let ids = Ids::new(model);
    let mut out = String::new();
    out.push_str("digraph opm {\n");
    out.push_str("  compound=true;\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");

    for (i, o) in model.objects.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_o{i} {{");
        let _ = writeln!(out, "    label={};", quote(o.name.surface()));
        out.push_str("    style=solid;\n");
        let _ = writeln!(out, "    o{i} [label={}, shape=box];", quote(o.name.surface()));
        for (j, s) in o.states.iter().enumerate() {
            let mut attrs = format!("label={}, shape=box, style=rounded", quote(s.name.surface()));
            if s.is_initial {
                attrs.push_str(", penwidth=2");
            }
            if s.is_final {
                attrs.push_str(", peripheries=2");
            }
            let _ = writeln!(out, "    o{i}_s{j} [{attrs}];");
        }
        out.push_str("  }\n");
    }
    for (i, p) in model.processes.iter().enumerate() {
        let _ = writeln!(out, "  p{i} [label={}, shape=ellipse];", quote(p.name.surface()));
    }

    let has_state = |o: &Name, s: &Name| model.object(o.canonical()).is_some_and(|obj| obj.state(s.canonical()).is_some());
    let known = |p: &Name, o: &Name| ids.processes.contains_key(p.canonical()) && ids.objects.contains_key(o.canonical());
    for link in &model.links {
        let k = &link.kind;
        let (p, o) = (k.process(), k.object());
        if !known(p, o) {
            continue;
        }
        let label = quote(k.label());
        match k {
            LinkKind::StateTransition { object, from_state, to_state, process } => {
                if !has_state(object, from_state) || !has_state(object, to_state) {
                    continue;
                }
                let _ = writeln!(out, "  {} -> {} [label={label}];", ids.state(object, from_state), ids.process(process));
                let _ = writeln!(out, "  {} -> {} [label={label}];", ids.process(process), ids.state(object, to_state));
            }
            LinkKind::StateSet { object, to_state, process } => {
                if !has_state(object, to_state) {
                    continue;
                }
                let _ = writeln!(out, "  {} -> {} [label={label}];", ids.process(process), ids.state(object, to_state));
            }
            LinkKind::Result { .. } => {
                let _ = writeln!(out, "  {} -> {} [label={label}];", ids.process(p), ids.object(o));
            }
            LinkKind::Consumption { .. } => {
                let _ = writeln!(out, "  {} -> {} [label={label}];", ids.object(o), ids.process(p));
            }
            LinkKind::Agent { .. } => {
                let _ = writeln!(out, "  {} -> {} [label={label}, arrowhead=dot];", ids.object(o), ids.process(p));
            }
            LinkKind::Instrument { .. } => {
                let _ = writeln!(out, "  {} -> {} [label={label}, arrowhead=odot];", ids.object(o), ids.process(p));
            }
        }
    }
    for z in &model.inzooms {
        if !ids.processes.contains_key(z.parent_process.canonical()) {
            continue;
        }
        for (n, sub) in z.subprocesses.iter().enumerate() {
            if !ids.processes.contains_key(sub.canonical()) {
                continue;
            }
            let attrs = if z.time_sequenced {
                format!("label=\"{}\", style=dashed", n + 1)
            } else {
                "style=dashed".to_string()
            };
            let _ = writeln!(out, "  {} -> {} [{attrs}];", ids.process(&z.parent_process), ids.process(sub));
        }
    }
    out.push_str("}\n");
    out
}
