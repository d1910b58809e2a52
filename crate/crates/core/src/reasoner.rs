//! Deterministic queries over an [`OpmModel`]: per-object state transition
//! graphs, shortest process paths between states, reachability and link
//! lookups.
//!
//! When a process is in-zoomed in the model, its own state transitions are
//! refined by its subprocesses and are left out of the transition graph.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ElementRef, LinkKind, OpmModel, OpmObject};
use crate::name::{canonical_name, Name};

/// Placeholder source node for "changes O to state S" entry edges.
pub const UNSET_STATE: &str = "⊥unset";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReasonError {
    #[error("unknown object '{0}'")]
    UnknownObject(String),
    #[error("unknown state '{state}' of object '{object}'")]
    UnknownState { object: String, state: String },
    #[error("unknown process '{0}'")]
    UnknownProcess(String),
    #[error("no path changes '{object}' from '{from}' to '{to}'")]
    NoPath { object: String, from: String, to: String },
    #[error("object '{0}' has no unique initial and final state")]
    AmbiguousEndpoints(String),
    #[error("process '{0}' is not in-zoomed")]
    NotInZoomed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionEdge {
    /// `None` for entry edges created by "changes O to state S".
    pub from: Option<Name>,
    pub process: Name,
    pub to: Name,
}

impl fmt::Display for TransitionEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let from = self.from.as_ref().map_or(UNSET_STATE, Name::surface);
        write!(f, "{from} --[{}]--> {}", self.process, self.to)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionGraph {
    pub object: Name,
    /// Declared states, in declaration order.
    pub nodes: Vec<Name>,
    /// Transition and entry edges, in link declaration order.
    pub edges: Vec<TransitionEdge>,
}

impl TransitionGraph {
    /// Edges between declared states (entry edges excluded).
    pub fn transitions(&self) -> impl Iterator<Item = &TransitionEdge> {
        self.edges.iter().filter(|e| e.from.is_some())
    }

    pub fn entry_edges(&self) -> impl Iterator<Item = &TransitionEdge> {
        self.edges.iter().filter(|e| e.from.is_none())
    }

    fn node(&self, raw: &str) -> Option<&Name> {
        let key = canonical_name(raw);
        self.nodes.iter().find(|n| n.canonical() == key)
    }

    fn successors<'a>(&'a self, state: &'a Name) -> impl Iterator<Item = &'a TransitionEdge> + 'a {
        self.transitions().filter(move |e| e.from.as_ref() == Some(state))
    }
}

/// A reasoning path: alternating state and process elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReasoningTrace {
    pub query: String,
    pub steps: Vec<ElementRef>,
}

fn object_of<'m>(model: &'m OpmModel, object: &str) -> Result<&'m OpmObject, ReasonError> {
    model.object(object).ok_or_else(|| ReasonError::UnknownObject(object.to_string()))
}

pub fn build_transition_graph(model: &OpmModel, object: &str) -> Result<TransitionGraph, ReasonError> {
    let obj = object_of(model, object)?;
    let refined = |p: &Name| model.inzoom_of(p.canonical()).is_some();
    let edges = model
        .links
        .iter()
        .filter(|l| l.kind.object() == &obj.name)
        .filter_map(|l| match &l.kind {
            LinkKind::StateTransition { process, from_state, to_state, .. } if !refined(process) => {
                Some(TransitionEdge { from: Some(from_state.clone()), process: process.clone(), to: to_state.clone() })
            }
            LinkKind::StateSet { process, to_state, .. } => {
                Some(TransitionEdge { from: None, process: process.clone(), to: to_state.clone() })
            }
            _ => None,
        })
        .collect();
    Ok(TransitionGraph {
        object: obj.name.clone(),
        nodes: obj.states.iter().map(|s| s.name.clone()).collect(),
        edges,
    })
}

/// Position of each process in the in-zoom time sequences, used to order
/// otherwise equally short paths.
fn sequence_rank(model: &OpmModel) -> HashMap<String, usize> {
    let mut rank = HashMap::new();
    for z in &model.inzooms {
        for (i, p) in z.subprocesses.iter().enumerate() {
            rank.entry(p.canonical().to_string()).or_insert(i);
        }
    }
    rank
}

fn resolve_state<'g>(graph: &'g TransitionGraph, state: &str) -> Result<&'g Name, ReasonError> {
    graph.node(state).ok_or_else(|| ReasonError::UnknownState {
        object: graph.object.surface().to_string(),
        state: state.to_string(),
    })
}

/// Shortest edge path between two states. Among equally short paths the
/// process sequence that is smallest under (time-sequence position, name)
/// at the first differing step wins.
fn shortest_path(
    model: &OpmModel,
    graph: &TransitionGraph,
    from: &Name,
    to: &Name,
) -> Result<Vec<TransitionEdge>, ReasonError> {
    if from == to {
        return Ok(Vec::new());
    }
    // Distances to the target, by BFS over reversed edges.
    let mut dist: HashMap<&Name, usize> = HashMap::from([(to, 0)]);
    let mut queue = VecDeque::from([to]);
    while let Some(node) = queue.pop_front() {
        let d = dist[node];
        for e in graph.transitions().filter(|e| &e.to == node) {
            let src = e.from.as_ref().expect("transitions have a source");
            if !dist.contains_key(src) {
                dist.insert(src, d + 1);
                queue.push_back(src);
            }
        }
    }
    let Some(&len) = dist.get(from) else {
        return Err(ReasonError::NoPath {
            object: graph.object.surface().to_string(),
            from: from.surface().to_string(),
            to: to.surface().to_string(),
        });
    };

    let rank = sequence_rank(model);
    let key = |e: &TransitionEdge| {
        (rank.get(e.process.canonical()).copied().unwrap_or(usize::MAX), e.process.canonical().to_string())
    };
    // Walk forward one layer at a time, keeping every state reachable by
    // the best prefix so far.
    let mut frontier: Vec<(&Name, Vec<TransitionEdge>)> = vec![(from, Vec::new())];
    for remaining in (0..len).rev() {
        let candidates: Vec<(&Name, &TransitionEdge)> = frontier
            .iter()
            .flat_map(|(node, _)| graph.successors(node).map(move |e| (*node, e)))
            .filter(|(_, e)| dist.get(&e.to) == Some(&remaining))
            .collect();
        let best = candidates.iter().map(|(_, e)| key(e)).min().expect("distance guarantees a successor");
        let mut next: Vec<(&Name, Vec<TransitionEdge>)> = Vec::new();
        for (node, e) in candidates.into_iter().filter(|(_, e)| key(e) == best) {
            if next.iter().any(|(n, _)| *n == &e.to) {
                continue;
            }
            let prefix = &frontier.iter().find(|(n, _)| *n == node).expect("node from frontier").1;
            let mut path = prefix.clone();
            path.push(e.clone());
            next.push((&e.to, path));
        }
        frontier = next;
    }
    let (_, path) = frontier.into_iter().find(|(n, _)| *n == to).expect("layered walk ends at target");
    Ok(path)
}

/// Processes along the shortest transition path of `object` from
/// `from_state` to `to_state`. Empty when the two states coincide.
pub fn processes_between(
    model: &OpmModel,
    object: &str,
    from_state: &str,
    to_state: &str,
) -> Result<Vec<Name>, ReasonError> {
    Ok(transition_path(model, object, from_state, to_state)?.into_iter().map(|e| e.process).collect())
}

/// Like [`processes_between`] but returns the traversed edges.
pub fn transition_path(
    model: &OpmModel,
    object: &str,
    from_state: &str,
    to_state: &str,
) -> Result<Vec<TransitionEdge>, ReasonError> {
    let graph = build_transition_graph(model, object)?;
    let from = resolve_state(&graph, from_state)?.clone();
    let to = resolve_state(&graph, to_state)?.clone();
    shortest_path(model, &graph, &from, &to)
}

/// Forward transitive closure of `from_state`, including itself, in state
/// declaration order.
pub fn reachable_states(model: &OpmModel, object: &str, from_state: &str) -> Result<Vec<Name>, ReasonError> {
    let graph = build_transition_graph(model, object)?;
    let start = resolve_state(&graph, from_state)?;
    let mut seen: BTreeSet<&Name> = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        for e in graph.successors(node) {
            if seen.insert(&e.to) {
                queue.push_back(&e.to);
            }
        }
    }
    Ok(graph.nodes.iter().filter(|n| seen.contains(n)).cloned().collect())
}

fn path_trace(object: &Name, from: &Name, path: &[TransitionEdge], query: String) -> ReasoningTrace {
    let state = |s: &Name| ElementRef::state(object.canonical(), s.canonical());
    let mut steps = vec![state(from)];
    for e in path {
        steps.push(ElementRef::process(e.process.canonical()));
        steps.push(state(&e.to));
    }
    ReasoningTrace { query, steps }
}

/// Trace of a [`transition_path`] query.
pub fn path_query_trace(
    model: &OpmModel,
    object: &str,
    from_state: &str,
    to_state: &str,
) -> Result<ReasoningTrace, ReasonError> {
    let graph = build_transition_graph(model, object)?;
    let from = resolve_state(&graph, from_state)?.clone();
    let to = resolve_state(&graph, to_state)?.clone();
    let path = shortest_path(model, &graph, &from, &to)?;
    let query = format!("processes_between({}, {}, {})", graph.object, from, to);
    Ok(path_trace(&graph.object, &from, &path, query))
}

/// Full lifecycle of an object: from its unique initial state to its
/// unique final state.
pub fn evolution_trace(model: &OpmModel, object: &str) -> Result<ReasoningTrace, ReasonError> {
    let obj = object_of(model, object)?;
    let unique = |mut it: Box<dyn Iterator<Item = &Name> + '_>| match (it.next(), it.next()) {
        (Some(n), None) => Some(n.clone()),
        _ => None,
    };
    let initial = unique(Box::new(obj.initial_states().map(|s| &s.name)));
    let fin = unique(Box::new(obj.final_states().map(|s| &s.name)));
    let (Some(initial), Some(fin)) = (initial, fin) else {
        return Err(ReasonError::AmbiguousEndpoints(obj.name.surface().to_string()));
    };
    let graph = build_transition_graph(model, object)?;
    let path = shortest_path(model, &graph, &initial, &fin)?;
    let query = format!("evolution_trace({})", obj.name);
    Ok(path_trace(&obj.name, &initial, &path, query))
}

fn linked_objects(
    model: &OpmModel,
    process: &str,
    select: impl Fn(&LinkKind) -> Option<&Name>,
) -> Result<Vec<Name>, ReasonError> {
    let p = model.process(process).ok_or_else(|| ReasonError::UnknownProcess(process.to_string()))?;
    let mut out: Vec<Name> = Vec::new();
    for link in &model.links {
        if link.kind.process() != &p.name {
            continue;
        }
        if let Some(obj) = select(&link.kind) {
            if !out.contains(obj) {
                out.push(obj.clone());
            }
        }
    }
    Ok(out)
}

pub fn agents_of(model: &OpmModel, process: &str) -> Result<Vec<Name>, ReasonError> {
    linked_objects(model, process, |k| match k {
        LinkKind::Agent { agent, .. } => Some(agent),
        _ => None,
    })
}

pub fn instruments_of(model: &OpmModel, process: &str) -> Result<Vec<Name>, ReasonError> {
    linked_objects(model, process, |k| match k {
        LinkKind::Instrument { object, .. } => Some(object),
        _ => None,
    })
}

pub fn results_of(model: &OpmModel, process: &str) -> Result<Vec<Name>, ReasonError> {
    linked_objects(model, process, |k| match k {
        LinkKind::Result { object, .. } => Some(object),
        _ => None,
    })
}

pub fn consumed_by(model: &OpmModel, process: &str) -> Result<Vec<Name>, ReasonError> {
    linked_objects(model, process, |k| match k {
        LinkKind::Consumption { object, .. } => Some(object),
        _ => None,
    })
}

/// The subprocesses of an in-zoomed process, in declared order.
pub fn subprocess_sequence(model: &OpmModel, parent_process: &str) -> Result<Vec<Name>, ReasonError> {
    model
        .inzoom_of(parent_process)
        .map(|z| z.subprocesses.clone())
        .ok_or_else(|| ReasonError::NotInZoomed(parent_process.to_string()))
}
