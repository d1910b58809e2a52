use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::prompt::PromptBundle;
use super::GatewayError;
use crate::answerer::answer_question;
use crate::dataset::QaRecord;
use crate::model::OpmModel;

pub const ENV_API_KEY: &str = "NCAI_LLM_API_KEY";
pub const ENV_BASE_URL: &str = "NCAI_LLM_BASE_URL";
pub const ENV_MODEL: &str = "NCAI_LLM_MODEL";

pub trait CompletionBackend: Sync {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError>;
}

/// Answers from a fixed list: the answer whose question matches exactly
/// (case and spacing ignored), otherwise one picked by hashing the
/// question.
#[derive(Debug, Clone)]
pub struct CannedBackend {
    answers: Vec<QaRecord>,
}

impl CannedBackend {
    pub fn new(answers: Vec<QaRecord>) -> Result<Self, GatewayError> {
        if answers.is_empty() {
            return Err(GatewayError::Config("canned answer list is empty".into()));
        }
        Ok(Self { answers })
    }
}

fn question_key(q: &str) -> String {
    q.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl CompletionBackend for CannedBackend {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        let key = question_key(&bundle.question);
        if let Some(hit) = self.answers.iter().find(|r| question_key(&r.question) == key) {
            return Ok(hit.answer.clone());
        }
        let digest = Sha256::digest(key.as_bytes());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        let idx = (u64::from_be_bytes(head) % self.answers.len() as u64) as usize;
        Ok(self.answers[idx].answer.clone())
    }
}

/// Answers with the symbolic answerer over a fixed model.
#[derive(Debug, Clone)]
pub struct OracleBackend {
    model: OpmModel,
}

impl OracleBackend {
    pub fn new(model: OpmModel) -> Self {
        Self { model }
    }
}

impl CompletionBackend for OracleBackend {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        Ok(answer_question(&self.model, &bundle.question)?.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    /// POST `{model, prompt, temperature, top_p}` to the endpoint; reads
    /// `text` from the response.
    #[default]
    Generic,
    /// Chat-completions request shape at `{endpoint}/chat/completions`.
    OpenAi,
}

impl std::str::FromStr for Provider {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "generic" => Ok(Provider::Generic),
            "openai" => Ok(Provider::OpenAi),
            other => Err(GatewayError::Config(format!("unknown provider '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub provider: Provider,
    pub endpoint: Option<String>,
    pub model_id: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub top_p: f64,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry delay; doubled on each further attempt.
    pub backoff_base: Duration,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            provider: Provider::Generic,
            endpoint: None,
            model_id: String::new(),
            api_key: None,
            temperature: 0.0,
            top_p: 1.0,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff_base: Duration::from_secs(1),
        }
    }
}

impl BackendConfig {
    /// Defaults overlaid with the `NCAI_LLM_*` environment variables.
    pub fn from_env() -> Self {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Self {
        let mut c = Self {
            api_key: get(ENV_API_KEY).filter(|v| !v.is_empty()),
            endpoint: get(ENV_BASE_URL).filter(|v| !v.is_empty()),
            ..Self::default()
        };
        if let Some(m) = get(ENV_MODEL).filter(|v| !v.is_empty()) {
            c.model_id = m;
        }
        c
    }
}

pub struct HttpBackend {
    config: BackendConfig,
    client: reqwest::blocking::Client,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("endpoint", &self.config.endpoint).finish()
    }
}

enum Attempt {
    Retry(GatewayError),
    Fatal(GatewayError),
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, GatewayError> {
        if config.api_key.is_none() {
            return Err(GatewayError::MissingCredentials(ENV_API_KEY));
        }
        if config.endpoint.is_none() {
            return Err(GatewayError::Config(format!("no endpoint configured (set {ENV_BASE_URL})")));
        }
        if !(0.0..=2.0).contains(&config.temperature) || !(0.0..=1.0).contains(&config.top_p) {
            return Err(GatewayError::Config("temperature must be in [0, 2] and top_p in [0, 1]".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self { config, client })
    }

    fn request(&self, prompt: &str) -> (String, Value) {
        let base = self.config.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        match self.config.provider {
            Provider::Generic => (
                base.to_string(),
                json!({
                    "model": self.config.model_id,
                    "prompt": prompt,
                    "temperature": self.config.temperature,
                    "top_p": self.config.top_p,
                }),
            ),
            Provider::OpenAi => (
                format!("{base}/chat/completions"),
                json!({
                    "model": self.config.model_id,
                    "messages": [{"role": "user", "content": prompt}],
                    "temperature": self.config.temperature,
                    "top_p": self.config.top_p,
                }),
            ),
        }
    }

    fn extract(&self, body: &Value) -> Option<String> {
        let text = match self.config.provider {
            Provider::Generic => body.get("text"),
            Provider::OpenAi => body.pointer("/choices/0/message/content"),
        };
        text.and_then(Value::as_str).map(str::to_string)
    }

    fn attempt(&self, url: &str, payload: &Value) -> Result<String, Attempt> {
        let key = self.config.api_key.as_deref().unwrap_or_default();
        let resp = self.client.post(url).bearer_auth(key).json(payload).send().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retry(GatewayError::TimeoutExceeded(self.config.timeout))
            } else {
                Attempt::Retry(GatewayError::Backend(e.to_string()))
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let err = GatewayError::Backend(format!("HTTP {status}"));
            return Err(if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retry(err)
            } else {
                Attempt::Fatal(err)
            });
        }
        let body: Value = resp.json().map_err(|e| {
            if e.is_timeout() {
                Attempt::Retry(GatewayError::TimeoutExceeded(self.config.timeout))
            } else {
                Attempt::Fatal(GatewayError::Backend(format!("malformed response: {e}")))
            }
        })?;
        self.extract(&body)
            .ok_or_else(|| Attempt::Fatal(GatewayError::Backend("response has no completion text".into())))
    }
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        let (url, payload) = self.request(&bundle.rendered);
        let mut delay = self.config.backoff_base;
        let mut attempt = 0;
        loop {
            match self.attempt(&url, &payload) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= self.config.max_retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                    attempt += 1;
                }
            }
        }
    }
}
