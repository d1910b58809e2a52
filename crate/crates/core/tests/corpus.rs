mod common;

use std::time::Instant;

use common::{fixture, model};
use ncai_core::opl::parse_line;
use ncai_core::{parse_document, serialize_model, ParseMode};

fn sentence_count(text: &str) -> usize {
    text.lines().enumerate().map(|(i, l)| parse_line(l, i + 1).len()).sum()
}

fn item_count(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}

#[test]
fn appendix_item_and_sentence_counts() {
    let sd = fixture("appendix_b_sd.opl");
    let sd1 = fixture("appendix_b_sd1.opl");
    let c = fixture("appendix_c.opl");
    assert_eq!((item_count(&sd), item_count(&sd1), item_count(&c)), (3, 14, 20));
    // Some items hold several sentences, e.g. state markers.
    assert_eq!(sentence_count(&sd), 5);
    assert_eq!(sentence_count(&sd1), 16);
    assert_eq!(sentence_count(&c), 21);
}

#[test]
fn appendix_b_parses_cleanly() {
    let start = Instant::now();
    let (m, diagnostics) = parse_document(&fixture("appendix_b.opl"), ParseMode::Strict).unwrap();
    assert!(diagnostics.is_empty(), "{diagnostics:?}");
    let heuristic = m.object("Heuristic").unwrap();
    assert_eq!(heuristic.states.len(), 7);
    assert_eq!(heuristic.initial_states().map(|s| s.name.surface()).collect::<Vec<_>>(), ["rule of thumb"]);
    assert_eq!(heuristic.final_states().map(|s| s.name.surface()).collect::<Vec<_>>(), ["principle"]);
    let zoom = m.inzoom_of("Heuristic-to-principle Evolving").unwrap();
    assert_eq!(zoom.subprocesses.len(), 8);
    assert!(zoom.time_sequenced);
    assert_eq!(zoom.subprocesses[0].surface(), "Initial Observing");
    assert_eq!(zoom.subprocesses[7].surface(), "Consensus Building");
    assert_eq!((m.objects.len(), m.processes.len(), m.state_count()), (3, 9, 7));
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn sd1_alone_matches_check_counts() {
    let m = model("appendix_b_sd1.opl");
    assert_eq!((m.objects.len(), m.processes.len(), m.state_count(), m.links.len()), (3, 9, 7, 12));
    // SD adds the transition of the parent process.
    assert_eq!(model("appendix_b.opl").links.len(), 13);
}

#[test]
fn appendix_c_parses_cleanly() {
    let (m, diagnostics) = parse_document(&fixture("appendix_c.opl"), ParseMode::Strict).unwrap();
    assert!(diagnostics.is_empty(), "{diagnostics:?}");
    assert!(m.process("Formal Studying").is_some());
}

#[test]
fn round_trips_are_isomorphic() {
    for name in ["appendix_b.opl", "appendix_b_sd.opl", "appendix_b_sd1.opl", "appendix_c.opl"] {
        let start = Instant::now();
        let m = model(name);
        let text = serialize_model(&m).unwrap();
        let (again, diagnostics) = parse_document(&text, ParseMode::Strict).unwrap();
        assert!(diagnostics.is_empty(), "{name}: {diagnostics:?}");
        assert_eq!(again.canonical(), m.canonical(), "{name}");
        assert_eq!(serialize_model(&again).unwrap(), text, "{name}: serialization is a fixed point");
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }
}
