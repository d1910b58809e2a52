use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ncai_core::answerer::answer_question;
use ncai_core::dataset::{parse_jsonl, PredictionRecord, QaRecord};
use ncai_core::gateway::{assemble_qa_prompt, QA_PREAMBLE};
use ncai_core::metrics::{
    evaluate_run, extract_elements, scores_from_counts, strict_accuracy, transparency_scores, ElementSet,
    ExtractionMode, MetricConfig, MetricReport,
};
use ncai_core::opl::parse_line;
use ncai_core::{
    canonical_name, export_dot, parse_document, processes_between, serialize_model, ElementKind, ElementRef,
    LinkKind, OpmModel, ParseMode,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Deserialize;

type Outcome = Result<(), String>;
type Criterion = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn path(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures")).join(name)
}

fn fixture(name: &str) -> Result<String, String> {
    std::fs::read_to_string(path(name)).map_err(|e| format!("{name}: {e}"))
}

fn model(name: &str) -> Result<OpmModel, String> {
    let (m, diagnostics) = parse_document(&fixture(name)?, ParseMode::Strict).map_err(|e| format!("{name}: {e}"))?;
    ensure!(diagnostics.is_empty(), "{name}: {diagnostics:?}");
    Ok(m)
}

fn jsonl<T: for<'de> Deserialize<'de>>(name: &str) -> Result<Vec<T>, String> {
    parse_jsonl(&fixture(name)?).map_err(|e| format!("{name}: {e}"))
}

/// The prose and the model spell one process differently.
fn aliased(name: &str) -> String {
    let c = canonical_name(name);
    if c == "theoretical backing" {
        "theoretical baking".into()
    } else {
        c
    }
}

#[derive(Deserialize)]
struct PublishedRow {
    id: u64,
    la: f64,
    sa: f64,
    r1: f64,
    r2: f64,
    rl: f64,
}

fn corpus_parsing() -> Outcome {
    let items = |t: &str| t.lines().filter(|l| !l.trim().is_empty()).count();
    let sentences = |t: &str| t.lines().enumerate().map(|(i, l)| parse_line(l, i + 1).len()).sum::<usize>();
    let sd1 = fixture("appendix_b_sd1.opl")?;
    let c = fixture("appendix_c.opl")?;
    ensure!(items(&sd1) == 14, "SD1 items: {}", items(&sd1));
    ensure!(items(&c) == 20, "appendix_c.opl items: {}", items(&c));
    ensure!(sentences(&sd1) >= 14 && sentences(&c) >= 20, "sentence counts");
    let start = Instant::now();
    let b = model("appendix_b.opl")?;
    model("appendix_c.opl")?;
    let heuristic = b.object("Heuristic").ok_or("no Heuristic")?;
    ensure!(heuristic.states.len() == 7, "states: {}", heuristic.states.len());
    let zoom = b.inzoom_of("Heuristic-to-principle Evolving").ok_or("no in-zoom")?;
    ensure!(zoom.subprocesses.len() == 8 && zoom.time_sequenced, "in-zoom: {zoom:?}");
    ensure!(start.elapsed().as_secs_f64() < 1.0, "took {:?}", start.elapsed());
    Ok(())
}

fn round_trip() -> Outcome {
    for name in ["appendix_b.opl", "appendix_c.opl"] {
        let start = Instant::now();
        let m = model(name)?;
        let text = serialize_model(&m).map_err(|e| e.to_string())?;
        let (again, diagnostics) = parse_document(&text, ParseMode::Strict).map_err(|e| e.to_string())?;
        ensure!(diagnostics.is_empty(), "{name}: {diagnostics:?}");
        ensure!(again.canonical() == m.canonical(), "{name}: models differ after round trip");
        ensure!(start.elapsed().as_secs_f64() < 1.0, "{name}: took {:?}", start.elapsed());
    }
    Ok(())
}

fn ground_truth_paths() -> Outcome {
    let m = model("appendix_b.opl")?;
    let got: Vec<String> = processes_between(&m, "Heuristic", "documented & shared", "theoretically backed")
        .map_err(|e| e.to_string())?
        .iter()
        .map(|n| aliased(n.surface()))
        .collect();
    let want: Vec<String> =
        ["Testing & Refining", "Pattern Emerging & Recognizing", "Effectiveness Validating", "Theoretical Backing"]
            .map(aliased)
            .to_vec();
    ensure!(got == want, "documented & shared -> theoretically backed: {got:?}");
    let questions: Vec<QaRecord> = jsonl("table3.jsonl")?;
    let expected: [(u64, &[&str]); 6] = [
        (1, &["Testing & Refining", "Pattern Emerging & Recognizing"]),
        (3, &["Theoretical Backing", "Consensus Building"]),
        (5, &["Documenting & Sharing", "Testing & Refining", "Pattern Emerging & Recognizing"]),
        (6, &["Documenting & Sharing", "Testing & Refining"]),
        (7, &["Theoretical Backing", "Consensus Building"]),
        (8, &["Testing & Refining", "Pattern Emerging & Recognizing"]),
    ];
    for (id, processes) in expected {
        let q = questions.iter().find(|q| q.id == id).ok_or(format!("no Q{id}"))?;
        let a = answer_question(&m, &q.question).map_err(|e| format!("Q{id}: {e}"))?;
        let got: BTreeSet<String> =
            a.elements.iter().filter(|e| e.kind == ElementKind::Process).map(|e| aliased(&e.name)).collect();
        let want: BTreeSet<String> = processes.iter().map(|p| aliased(p)).collect();
        ensure!(got == want, "Q{id}: {got:?}");
    }
    Ok(())
}

fn simple_paths(edges: &[(String, String, String)], from: &str, to: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![(from.to_string(), vec![from.to_string()], Vec::<String>::new())];
    while let Some((at, seen, path)) = stack.pop() {
        if at == to {
            out.push(path);
            continue;
        }
        for (a, p, b) in edges {
            if *a == at && !seen.contains(b) {
                let mut seen = seen.clone();
                seen.push(b.clone());
                let mut path = path.clone();
                path.push(p.clone());
                stack.push((b.clone(), seen, path));
            }
        }
    }
    out
}

fn shortest_path_oracle() -> Outcome {
    let m = model("appendix_b.opl")?;
    let edges: Vec<(String, String, String)> = m
        .links
        .iter()
        .filter_map(|l| match &l.kind {
            LinkKind::StateTransition { process, object, from_state, to_state }
                if object.matches("Heuristic") && m.inzooms.iter().all(|z| z.parent_process != *process) =>
            {
                Some((from_state.canonical().into(), process.canonical().into(), to_state.canonical().into()))
            }
            _ => None,
        })
        .collect();
    let states: Vec<String> =
        m.object("Heuristic").ok_or("no Heuristic")?.states.iter().map(|s| s.name.canonical().into()).collect();
    let mut pairs = 0;
    for a in &states {
        for b in &states {
            pairs += 1;
            let paths = simple_paths(&edges, a, b);
            let got = processes_between(&m, "Heuristic", a, b);
            match (paths.iter().map(Vec::len).min(), got) {
                (None, Err(_)) => {}
                (None, Ok(p)) => return Err(format!("{a} -> {b}: unexpected path {p:?}")),
                (Some(_), Err(e)) => return Err(format!("{a} -> {b}: {e}")),
                (Some(len), Ok(p)) => {
                    let p: Vec<String> = p.iter().map(|n| n.canonical().to_string()).collect();
                    ensure!(p.len() == len && paths.contains(&p), "{a} -> {b}: {p:?} is not a shortest path");
                }
            }
        }
    }
    ensure!(pairs == 49, "pairs: {pairs}");
    Ok(())
}

fn strict_accuracy_law() -> Outcome {
    let mut rows: Vec<PublishedRow> = jsonl("opm_qa_published.jsonl")?;
    rows.extend(jsonl::<PublishedRow>("nl_qa_published.jsonl")?);
    ensure!(rows.len() == 20, "rows: {}", rows.len());
    for r in rows {
        let sa = strict_accuracy(r.la, 1.5).map_err(|e| e.to_string())?;
        ensure!((sa - r.sa).abs() <= 0.002, "row {}: {sa:.4} vs {}", r.id, r.sa);
    }
    Ok(())
}

fn report(system: &str) -> Result<MetricReport, String> {
    let refs: Vec<QaRecord> = jsonl("table3.jsonl")?;
    let preds: Vec<PredictionRecord> = jsonl(&format!("{system}_predictions.jsonl"))?;
    evaluate_run(&refs, &preds, &model("appendix_b.opl")?, &MetricConfig::default()).map_err(|e| e.to_string())
}

fn opm_qa_scores() -> Outcome {
    let report = report("opm_qa")?;
    let rows: Vec<PublishedRow> = jsonl("opm_qa_published.jsonl")?;
    ensure!(report.per_item.len() == rows.len(), "row count");
    for (item, row) in report.per_item.iter().zip(&rows) {
        ensure!(item.id == row.id, "id order");
        ensure!((item.loose - row.la).abs() <= 0.0005 + 1e-9, "LA row {}: {:.4} vs {}", row.id, item.loose, row.la);
        for (name, got, want) in
            [("R-1", item.rouge1, row.r1), ("R-2", item.rouge2, row.r2), ("R-L", item.rouge_l, row.rl)]
        {
            ensure!((got - want).abs() <= 0.05, "{name} row {}: {got:.3} vs {want}", row.id);
        }
    }
    Ok(())
}

fn transparency() -> Outcome {
    let s = scores_from_counts(4, 5, 4);
    ensure!((s.precision - 0.8).abs() < 1e-9 && s.recall == 1.0 && (s.f1 - 0.889).abs() < 5e-4, "{s:?}");
    let m = model("appendix_b.opl")?;
    let truth: ElementSet = [
        ElementRef::process("Testing & Refining"),
        ElementRef::process("Pattern Emerging & Recognizing"),
        ElementRef::object("Heuristic"),
        ElementRef::state("Heuristic", "documented & shared"),
        ElementRef::state("Heuristic", "tested & refined"),
        ElementRef::state("Heuristic", "pattern recognized"),
    ]
    .into();
    let preds: Vec<PredictionRecord> = jsonl("nl_qa_predictions.jsonl")?;
    let predicted = extract_elements(&preds[0].prediction, &m, ExtractionMode::Exact);
    let r = transparency_scores(&predicted, &truth).recall;
    ensure!((r - 0.333).abs() < 5e-4, "NL-QA row 1 recall {r}");
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..1000 {
        let predicted = rng.random_range(1..50usize);
        let truth = rng.random_range(1..50usize);
        let hits = rng.random_range(1..=predicted.min(truth));
        let s = scores_from_counts(hits, predicted, truth);
        let f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
        ensure!((s.f1 - f1).abs() <= 4.0 * f64::EPSILON, "({hits}, {predicted}, {truth}): {} vs {f1}", s.f1);
    }
    Ok(())
}

fn run(args: &[&str]) -> Outcome {
    let o = Command::new(env!("CARGO_BIN_EXE_ncai")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(o.status.success(), "ncai {}: {}", args[0], String::from_utf8_lossy(&o.stderr));
    Ok(())
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let direct = dir.path().join("direct.jsonl");
    let batch = dir.path().join("batch.jsonl");
    let opl = path("appendix_b.opl").to_string_lossy().into_owned();
    let questions = path("table3.jsonl").to_string_lossy().into_owned();
    run(&["answer", &opl, &questions, "-o", &direct.to_string_lossy()])?;
    run(&[
        "run-llm",
        &opl,
        &questions,
        "--backend",
        "mock-oracle",
        "--parallel",
        "4",
        "-o",
        &batch.to_string_lossy(),
    ])?;
    let a = std::fs::read(&direct).map_err(|e| e.to_string())?;
    let b = std::fs::read(&batch).map_err(|e| e.to_string())?;
    ensure!(!a.is_empty() && a == b, "answer and batch outputs differ");
    let preds: Vec<PredictionRecord> = parse_jsonl(&String::from_utf8_lossy(&a)).map_err(|e| e.to_string())?;
    let refs: Vec<QaRecord> = jsonl("table3.jsonl")?;
    let report = evaluate_run(&refs, &preds, &model("appendix_b.opl")?, &MetricConfig::default())
        .map_err(|e| e.to_string())?;
    for id in [3, 5, 6, 7] {
        let item = report.per_item.iter().find(|i| i.id == id).ok_or(format!("no Q{id}"))?;
        for (name, v) in [("LA", item.loose), ("SA", item.strict), ("F1_T", item.t_f1)] {
            ensure!((v - 1.0).abs() <= 0.02, "Q{id} {name} = {v}");
        }
    }
    Ok(())
}

fn prompt_contract() -> Outcome {
    let knowledge = fixture("appendix_b.opl")?;
    let examples: Vec<(String, String)> =
        jsonl::<QaRecord>("example_pairs.jsonl")?.into_iter().take(5).map(|r| (r.question, r.answer)).collect();
    ensure!(examples.len() == 5, "examples: {}", examples.len());
    let questions: Vec<QaRecord> = jsonl("table3.jsonl")?;
    let q5 = &questions.iter().find(|q| q.id == 5).ok_or("no Q5")?.question;
    let prompt = assemble_qa_prompt(&knowledge, &examples, q5).map_err(|e| e.to_string())?.rendered;
    let mut parts = vec![QA_PREAMBLE.to_string(), knowledge.trim_end().to_string()];
    parts.extend(examples.iter().map(|(q, a)| format!("Q: {q}\nA: {a}\n")));
    parts.push(format!("Q: {q5}\n"));
    let mut at = 0;
    for part in &parts {
        let found = prompt[at..].find(part.as_str()).ok_or(format!("missing or out of order: {part:.40}"))?;
        at += found + part.len();
    }
    Ok(())
}

fn dot_export() -> Outcome {
    let m = model("appendix_b.opl")?;
    let dot = export_dot(&m);
    ensure!(dot == export_dot(&m), "export is not deterministic");
    graphviz_rust::parse(&dot).map_err(|e| format!("invalid DOT: {e}"))?;
    let states = dot.matches("style=rounded").count();
    let processes = dot.matches("shape=ellipse").count();
    ensure!(states == 7 && processes == 9, "states {states}, processes {processes}");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("corpus parsing", corpus_parsing),
        ("round trip", round_trip),
        ("ground-truth paths", ground_truth_paths),
        ("shortest-path oracle", shortest_path_oracle),
        ("strict accuracy law", strict_accuracy_law),
        ("OPM-QA scores", opm_qa_scores),
        ("transparency", transparency),
        ("end-to-end batch", end_to_end),
        ("prompt contract", prompt_contract),
        ("DOT export", dot_export),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {:>2} {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
