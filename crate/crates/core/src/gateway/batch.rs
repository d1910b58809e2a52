use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use super::backend::CompletionBackend;
use super::prompt::assemble_qa_prompt;
use super::GatewayError;
use crate::dataset::{PredictionRecord, QaRecord};

pub const DEFAULT_EXAMPLE_COUNT: usize = 5;

/// Answers every question with at most `parallel` requests in flight.
/// Output order follows the input; failed items carry an error marker.
pub fn run_qa_batch(
    knowledge: &str,
    examples: &[(String, String)],
    questions: &[QaRecord],
    backend: &dyn CompletionBackend,
    parallel: usize,
) -> Result<Vec<PredictionRecord>, GatewayError> {
    if questions.is_empty() {
        return Err(GatewayError::EmptyBatch);
    }
    let answer = |r: &QaRecord| {
        match assemble_qa_prompt(knowledge, examples, &r.question).and_then(|b| backend.complete(&b)) {
            Ok(text) => PredictionRecord::ok(r.id, text),
            Err(e) => PredictionRecord::failed(r.id, e),
        }
    };
    let workers = parallel.clamp(1, questions.len());
    if workers == 1 {
        return Ok(questions.iter().map(answer).collect());
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<PredictionRecord>>> = Mutex::new(vec![None; questions.len()]);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(r) = questions.get(i) else { break };
                let rec = answer(r);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(rec);
            });
        }
    });
    Ok(slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect())
}
