//! OPM conceptual model: objects with stateful lifecycles, processes,
//! procedural links and in-zoom decompositions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::name::{canonical_name, Name};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based source line; absent for models not built from text.
    pub line: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, line, message: message.into() }
    }

    pub fn warning(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, line, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.line {
            Some(line) => write!(f, "{sev}: line {line}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpmState {
    #[serde(flatten)]
    pub name: Name,
    pub is_initial: bool,
    pub is_final: bool,
}

impl OpmState {
    pub fn new(name: &str) -> Self {
        Self { name: Name::new(name), is_initial: false, is_final: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpmObject {
    #[serde(flatten)]
    pub name: Name,
    pub states: Vec<OpmState>,
    /// Count of further states mentioned without names
    /// ("or at one of five other states").
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unnamed_states: Option<u32>,
}

impl OpmObject {
    pub fn new(name: &str) -> Self {
        Self { name: Name::new(name), states: Vec::new(), unnamed_states: None }
    }

    pub fn state(&self, raw: &str) -> Option<&OpmState> {
        let key = canonical_name(raw);
        self.states.iter().find(|s| s.name.canonical() == key)
    }

    pub fn state_mut(&mut self, raw: &str) -> Option<&mut OpmState> {
        let key = canonical_name(raw);
        self.states.iter_mut().find(|s| s.name.canonical() == key)
    }

    pub fn initial_states(&self) -> impl Iterator<Item = &OpmState> {
        self.states.iter().filter(|s| s.is_initial)
    }

    pub fn final_states(&self) -> impl Iterator<Item = &OpmState> {
        self.states.iter().filter(|s| s.is_final)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpmProcess {
    #[serde(flatten)]
    pub name: Name,
}

/// The procedural link kinds that occur in OPL.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkKind {
    /// `P changes O from A to B.`
    StateTransition { process: Name, object: Name, from_state: Name, to_state: Name },
    /// `P changes O to state S.`
    StateSet { process: Name, object: Name, to_state: Name },
    /// `P yields O.`
    Result { process: Name, object: Name },
    /// `P consumes O.`
    Consumption { process: Name, object: Name },
    /// `A handles P.`
    Agent { agent: Name, process: Name },
    /// `P requires O.`
    Instrument { process: Name, object: Name },
}

impl LinkKind {
    pub fn process(&self) -> &Name {
        match self {
            LinkKind::StateTransition { process, .. }
            | LinkKind::StateSet { process, .. }
            | LinkKind::Result { process, .. }
            | LinkKind::Consumption { process, .. }
            | LinkKind::Agent { process, .. }
            | LinkKind::Instrument { process, .. } => process,
        }
    }

    pub fn object(&self) -> &Name {
        match self {
            LinkKind::StateTransition { object, .. }
            | LinkKind::StateSet { object, .. }
            | LinkKind::Result { object, .. }
            | LinkKind::Consumption { object, .. }
            | LinkKind::Instrument { object, .. } => object,
            LinkKind::Agent { agent, .. } => agent,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LinkKind::StateTransition { .. } => "changes",
            LinkKind::StateSet { .. } => "changes to",
            LinkKind::Result { .. } => "yields",
            LinkKind::Consumption { .. } => "consumes",
            LinkKind::Agent { .. } => "handles",
            LinkKind::Instrument { .. } => "requires",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProceduralLink {
    #[serde(flatten)]
    pub kind: LinkKind,
    #[serde(skip)]
    pub line: Option<usize>,
}

impl ProceduralLink {
    pub fn new(kind: LinkKind) -> Self {
        Self { kind, line: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InZoomContext {
    pub parent_process: Name,
    pub source_diagram: Option<String>,
    pub target_diagram: Option<String>,
    pub subprocesses: Vec<Name>,
    pub time_sequenced: bool,
    #[serde(skip)]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Object,
    Process,
    State,
}

/// A reference to one model element by canonical name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementRef {
    pub kind: ElementKind,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub owner: Option<String>,
}

impl ElementRef {
    pub fn object(name: &str) -> Self {
        Self { kind: ElementKind::Object, name: canonical_name(name), owner: None }
    }

    pub fn process(name: &str) -> Self {
        Self { kind: ElementKind::Process, name: canonical_name(name), owner: None }
    }

    pub fn state(owner: &str, name: &str) -> Self {
        Self {
            kind: ElementKind::State,
            name: canonical_name(name),
            owner: Some(canonical_name(owner)),
        }
    }
}

impl fmt::Display for ElementRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, &self.owner) {
            (ElementKind::State, Some(owner)) => write!(f, "state {} of {}", self.name, owner),
            (ElementKind::State, None) => write!(f, "state {}", self.name),
            (ElementKind::Object, _) => write!(f, "object {}", self.name),
            (ElementKind::Process, _) => write!(f, "process {}", self.name),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OpmModel {
    pub objects: Vec<OpmObject>,
    pub processes: Vec<OpmProcess>,
    pub links: Vec<ProceduralLink>,
    pub inzooms: Vec<InZoomContext>,
    #[serde(skip)]
    pub diagnostics: Vec<Diagnostic>,
}

impl OpmModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&self, raw: &str) -> Option<&OpmObject> {
        let key = canonical_name(raw);
        self.objects.iter().find(|o| o.name.canonical() == key)
    }

    pub fn object_mut(&mut self, raw: &str) -> Option<&mut OpmObject> {
        let key = canonical_name(raw);
        self.objects.iter_mut().find(|o| o.name.canonical() == key)
    }

    pub fn process(&self, raw: &str) -> Option<&OpmProcess> {
        let key = canonical_name(raw);
        self.processes.iter().find(|p| p.name.canonical() == key)
    }

    /// Returns the object with this name, declaring it on first mention.
    pub fn declare_object(&mut self, surface: &str) -> &mut OpmObject {
        let key = canonical_name(surface);
        let idx = match self.objects.iter().position(|o| o.name.canonical() == key) {
            Some(idx) => idx,
            None => {
                self.objects.push(OpmObject::new(surface));
                self.objects.len() - 1
            }
        };
        &mut self.objects[idx]
    }

    pub fn declare_process(&mut self, surface: &str) -> &OpmProcess {
        let key = canonical_name(surface);
        let idx = match self.processes.iter().position(|p| p.name.canonical() == key) {
            Some(idx) => idx,
            None => {
                self.processes.push(OpmProcess { name: Name::new(surface) });
                self.processes.len() - 1
            }
        };
        &self.processes[idx]
    }

    /// Appends a link unless an identical fact is already present.
    /// Returns whether the link was new.
    pub fn add_link(&mut self, link: ProceduralLink) -> bool {
        if self.links.iter().any(|l| l.kind == link.kind) {
            return false;
        }
        self.links.push(link);
        true
    }

    pub fn state_count(&self) -> usize {
        self.objects.iter().map(|o| o.states.len()).sum()
    }

    /// The in-zoom context that decomposes `process`, if any.
    pub fn inzoom_of(&self, process: &str) -> Option<&InZoomContext> {
        let key = canonical_name(process);
        self.inzooms.iter().find(|z| z.parent_process.canonical() == key)
    }

    /// Resolves a raw name to an element, trying processes, then objects,
    /// then object states.
    pub fn lookup_element(&self, raw_name: &str) -> Option<ElementRef> {
        let key = canonical_name(raw_name);
        if key.is_empty() {
            return None;
        }
        if self.processes.iter().any(|p| p.name.canonical() == key) {
            return Some(ElementRef::process(&key));
        }
        if self.objects.iter().any(|o| o.name.canonical() == key) {
            return Some(ElementRef::object(&key));
        }
        self.objects
            .iter()
            .find(|o| o.states.iter().any(|s| s.name.canonical() == key))
            .map(|o| ElementRef::state(o.name.canonical(), &key))
    }

    /// Every declared object, process and object state.
    pub fn element_refs(&self) -> BTreeSet<ElementRef> {
        let mut out = BTreeSet::new();
        for o in &self.objects {
            out.insert(ElementRef::object(o.name.canonical()));
            for s in &o.states {
                out.insert(ElementRef::state(o.name.canonical(), s.name.canonical()));
            }
        }
        for p in &self.processes {
            out.insert(ElementRef::process(p.name.canonical()));
        }
        out
    }

    /// Order-insensitive form used to decide model isomorphism.
    pub fn canonical(&self) -> CanonicalModel {
        CanonicalModel {
            objects: self
                .objects
                .iter()
                .map(|o| {
                    let states = o
                        .states
                        .iter()
                        .map(|s| (s.name.canonical().to_string(), (s.is_initial, s.is_final)))
                        .collect();
                    (o.name.canonical().to_string(), (states, o.unnamed_states))
                })
                .collect(),
            processes: self.processes.iter().map(|p| p.name.canonical().to_string()).collect(),
            links: self.links.iter().map(|l| l.kind.clone()).collect(),
            inzooms: self
                .inzooms
                .iter()
                .map(|z| {
                    (
                        z.parent_process.canonical().to_string(),
                        z.subprocesses.iter().map(|p| p.canonical().to_string()).collect(),
                        z.time_sequenced,
                    )
                })
                .collect(),
        }
    }

    /// JSON form with stable key order: `objects`, `processes`, `links`,
    /// `inzooms`; every name carries `surface_name` and `canonical_name`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }
}

type StateFlags = BTreeMap<String, (bool, bool)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    pub objects: BTreeMap<String, (StateFlags, Option<u32>)>,
    pub processes: BTreeSet<String>,
    pub links: BTreeSet<LinkKind>,
    pub inzooms: BTreeSet<(String, Vec<String>, bool)>,
}

/// Checks reference integrity and lifecycle sanity. An empty result, or
/// one holding only warnings, means the model is valid.
pub fn validate_model(model: &OpmModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    for o in &model.objects {
        if o.name.is_empty() {
            out.push(Diagnostic::error(None, "object with empty name"));
        } else if !seen.insert(o.name.canonical()) {
            out.push(Diagnostic::error(None, format!("duplicate object '{}'", o.name)));
        }
        let mut states = BTreeSet::new();
        for s in &o.states {
            if s.name.is_empty() {
                out.push(Diagnostic::error(None, format!("object '{}' has a state with an empty name", o.name)));
            } else if !states.insert(s.name.canonical()) {
                out.push(Diagnostic::error(
                    None,
                    format!("duplicate state '{}' of object '{}'", s.name, o.name),
                ));
            }
        }
        if o.initial_states().count() > 1 {
            out.push(Diagnostic::warning(None, format!("object '{}' has more than one initial state", o.name)));
        }
        if o.final_states().count() > 1 {
            out.push(Diagnostic::warning(None, format!("object '{}' has more than one final state", o.name)));
        }
    }

    let mut seen = BTreeSet::new();
    for p in &model.processes {
        if p.name.is_empty() {
            out.push(Diagnostic::error(None, "process with empty name"));
        } else if !seen.insert(p.name.canonical()) {
            out.push(Diagnostic::error(None, format!("duplicate process '{}'", p.name)));
        }
    }

    let process_exists = |n: &Name| model.process(n.canonical()).is_some();
    for link in &model.links {
        let line = link.line;
        let process = link.kind.process();
        if !process_exists(process) {
            out.push(Diagnostic::error(line, format!("undeclared process '{process}'")));
        }
        let object_name = link.kind.object();
        let Some(object) = model.object(object_name.canonical()) else {
            out.push(Diagnostic::error(line, format!("undeclared object '{object_name}'")));
            continue;
        };
        let mut check_state = |state: &Name| {
            if object.state(state.canonical()).is_none() {
                out.push(Diagnostic::error(
                    line,
                    format!("state '{state}' is not declared for object '{}'", object.name),
                ));
            }
        };
        match &link.kind {
            LinkKind::StateTransition { from_state, to_state, .. } => {
                check_state(from_state);
                check_state(to_state);
                if from_state == to_state {
                    out.push(Diagnostic::warning(
                        line,
                        format!("'{process}' changes '{object_name}' from '{from_state}' to itself"),
                    ));
                }
            }
            LinkKind::StateSet { to_state, .. } => check_state(to_state),
            _ => {}
        }
    }

    let mut zoomed = BTreeSet::new();
    for z in &model.inzooms {
        if !process_exists(&z.parent_process) {
            out.push(Diagnostic::error(z.line, format!("undeclared process '{}'", z.parent_process)));
        }
        if z.subprocesses.is_empty() {
            out.push(Diagnostic::error(z.line, format!("in-zoom of '{}' has no subprocesses", z.parent_process)));
        }
        for child in &z.subprocesses {
            if !process_exists(child) {
                out.push(Diagnostic::error(z.line, format!("undeclared process '{child}'")));
            }
        }
        if !zoomed.insert(z.parent_process.canonical()) {
            out.push(Diagnostic::warning(z.line, format!("process '{}' is in-zoomed more than once", z.parent_process)));
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(p: &str, o: &str, from: &str, to: &str) -> ProceduralLink {
        ProceduralLink::new(LinkKind::StateTransition {
            process: p.into(),
            object: o.into(),
            from_state: from.into(),
            to_state: to.into(),
        })
    }

    fn small_model() -> OpmModel {
        let mut m = OpmModel::new();
        let doc = m.declare_object("Document");
        doc.states.push(OpmState::new("written"));
        doc.states.push(OpmState::new("published"));
        m.declare_process("Publishing");
        m.add_link(transition("Publishing", "Document", "written", "published"));
        m
    }

    #[test]
    fn empty_model_is_valid() {
        assert!(validate_model(&OpmModel::new()).is_empty());
    }

    #[test]
    fn undeclared_state_reports_one_error() {
        let mut m = small_model();
        m.links.clear();
        m.add_link(transition("Publishing", "Document", "draft", "published"));
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert!(diags[0].message.contains("draft"));
    }

    #[test]
    fn unresolved_endpoints_are_errors() {
        let mut m = OpmModel::new();
        m.add_link(ProceduralLink::new(LinkKind::Instrument {
            process: "Testing".into(),
            object: "Project Set".into(),
        }));
        let errors: Vec<_> = validate_model(&m).into_iter().filter(Diagnostic::is_error).collect();
        assert_eq!(errors.len(), 2);
    }

    #[test]
    fn duplicates_and_multiple_initials() {
        let mut m = small_model();
        m.objects.push(OpmObject::new("document"));
        for s in &mut m.objects[0].states {
            s.is_initial = true;
        }
        let diags = validate_model(&m);
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("duplicate object")));
        assert!(diags.iter().any(|d| !d.is_error() && d.message.contains("initial")));
    }

    #[test]
    fn self_loop_is_a_warning() {
        let mut m = small_model();
        m.add_link(transition("Publishing", "Document", "written", "written"));
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
    }

    #[test]
    fn lookup_order_is_process_object_state() {
        let mut m = small_model();
        m.declare_process("written");
        assert_eq!(m.lookup_element("Written").unwrap().kind, ElementKind::Process);
        assert_eq!(m.lookup_element("published"), Some(ElementRef::state("document", "published")));
        assert_eq!(m.lookup_element("document"), Some(ElementRef::object("Document")));
        assert_eq!(m.lookup_element("nonexistent thing"), None);
        assert_eq!(m.lookup_element(""), None);
    }

    #[test]
    fn element_refs_cover_all_declarations() {
        let m = small_model();
        let refs = m.element_refs();
        assert_eq!(refs.len(), 4);
        assert!(refs.contains(&ElementRef::process("publishing")));
    }

    #[test]
    fn duplicate_links_collapse() {
        let mut m = small_model();
        assert!(!m.add_link(transition("publishing", "document", "Written", "Published")));
        assert_eq!(m.links.len(), 1);
    }

    #[test]
    fn json_has_stable_top_level_keys() {
        let text = small_model().to_json();
        let pos: Vec<_> = ["\"objects\"", "\"processes\"", "\"links\"", "\"inzooms\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json.as_object().unwrap().len(), 4);
        assert_eq!(json["links"][0]["kind"], "state_transition");
        assert_eq!(json["objects"][0]["surface_name"], "Document");
        assert_eq!(json["objects"][0]["canonical_name"], "document");
    }
}
