use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn ncai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncai"))
        .args(args)
        .env_remove("NCAI_LLM_API_KEY")
        .env_remove("NCAI_LLM_BASE_URL")
        .output()
        .expect("binary runs")
}

fn f(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_counts_and_exit_codes() {
    let o = ncai(&["check", &f("appendix_b_sd1.opl")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "objects: 3, processes: 9, states: 7, links: 12\n");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.opl");
    fs::write(&bad, "Door can be open or closed.\nThis is not OPL at all.\n").unwrap();
    let bad = bad.to_string_lossy();
    let o = ncai(&["check", &bad]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("0 error(s), 1 warning(s)"));
    assert_eq!(ncai(&["check", "--strict", &bad]).status.code(), Some(1));
    assert_eq!(ncai(&["check", "/no/such/file.opl"]).status.code(), Some(2));
    assert_eq!(ncai(&["check"]).status.code(), Some(2));
}

#[test]
fn check_json_lists_model() {
    let o = ncai(&["check", "--json", &f("appendix_b.opl")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["objects"].as_array().unwrap().len(), 3);
    assert_eq!(v["inzooms"][0]["subprocesses"].as_array().unwrap().len(), 8);
}

#[test]
fn query_prints_path() {
    let b = f("appendix_b.opl");
    let o = ncai(&["query", &b, "Heuristic", "documented & shared", "theoretically backed"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Testing & Refining\nPattern Emerging & Recognizing\nEffectiveness Validating\nTheoretical Baking\n"
    );
    let o = ncai(&["query", &b, "Heuristic", "principle", "principle"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), ""));
    let o = ncai(&["query", &b, "Heuristic", "principle", "rule of thumb"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no path"));
    assert_eq!(ncai(&["query", &b, "Heuristic", "nowhere", "principle"]).status.code(), Some(1));
}

#[test]
fn answer_writes_predictions_with_error_markers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("preds.jsonl");
    let o = ncai(&["answer", &f("appendix_b.opl"), &f("table3.jsonl"), "-o", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines.iter().filter(|l| l.get("error").is_some()).count(), 2);
    assert_eq!(
        lines[4]["prediction"],
        "Heuristic changes from rule of thumb to pattern recognized through Documenting & Sharing, \
         Testing & Refining, and Pattern Emerging & Recognizing processes."
    );

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = ncai(&["answer", &f("appendix_b.opl"), &empty.to_string_lossy()]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), ""));
    assert_eq!(ncai(&["answer", &f("appendix_b.opl"), "/no/such.jsonl"]).status.code(), Some(2));
}

#[test]
fn eval_reports_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = ncai(&[
        "eval",
        &f("table3.jsonl"),
        &f("opm_qa_predictions.jsonl"),
        "--model",
        &f("appendix_b.opl"),
        "--format",
        "csv",
        "-o",
        &csv.to_string_lossy(),
        "--against",
        &f("nl_qa_predictions.jsonl"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("config: {"));
    assert!(stdout(&o).contains("p-value"));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "id,LA,SA,R-1,R-2,R-L,BT,GPT,P_T,R_T,F1_T");
    assert_eq!(rows.len(), 14);
    assert!(rows[13].starts_with("p_value,"));
    for row in &rows[1..11] {
        let cells: Vec<f64> = row.split(',').skip(1).take(2).map(|c| c.parse().unwrap()).collect();
        assert!((cells[0].powf(1.5) - cells[1]).abs() <= 0.002, "{row}");
    }

    let o = ncai(&["eval", &f("table3.jsonl"), &f("table3.jsonl"), "--model", &f("appendix_b.opl")]);
    assert_eq!(o.status.code(), Some(2), "references are not predictions");

    let preds = dir.path().join("same.jsonl");
    let same: String = fs::read_to_string(fixture("table3.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            format!("{}\n", serde_json::json!({"id": v["id"], "prediction": v["answer"]}))
        })
        .collect();
    fs::write(&preds, same).unwrap();
    let o = ncai(&["eval", &f("table3.jsonl"), &preds.to_string_lossy(), "--model", &f("appendix_b.opl"), "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["config"]["k"], 2.0);
    for item in report["per_item"].as_array().unwrap() {
        for key in ["loose", "strict", "rouge1", "rouge2", "rougeL"] {
            assert_eq!(item[key], 1.0, "{key} of {}", item["id"]);
        }
    }
}

#[test]
fn eval_rejects_unmatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("p.jsonl");
    fs::write(&preds, "{\"id\": 99, \"prediction\": \"x\"}\n").unwrap();
    let o = ncai(&["eval", &f("table3.jsonl"), &preds.to_string_lossy(), "--model", &f("appendix_b.opl")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[99]"));
}

#[test]
fn export_dot_and_roundtrip() {
    let o = ncai(&["export-dot", &f("appendix_b.opl")]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert_eq!(dot.matches("subgraph cluster_").count(), 3);
    graphviz_rust::parse(&dot).unwrap();
    let o = ncai(&["roundtrip", &f("appendix_c.opl")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Formal Studying changes Heuristic"));
}

#[test]
fn run_llm_backends() {
    let b = f("appendix_b.opl");
    let q = f("table3.jsonl");
    let o = ncai(&["run-llm", &b, &q, "--backend", "http", "--endpoint", "http://127.0.0.1:9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("NCAI_LLM_API_KEY"));
    assert_eq!(ncai(&["run-llm", &b, &q, "--backend", "mock"]).status.code(), Some(2));

    let args = ["run-llm", &f("appendix_a.txt"), &q, "--backend", "mock", "--canned", &f("nl_qa_canned.jsonl")];
    let first = ncai(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first).lines().count(), 10);
    assert_eq!(first.stdout, ncai(&args).stdout);
}
