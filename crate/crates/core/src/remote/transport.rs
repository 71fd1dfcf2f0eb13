use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::modules::ModuleKind;

use super::RemoteConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("request failed after {attempts} attempt(s): {message}")]
    Exhausted { attempts: usize, message: String },
    #[error("endpoint rejected the request with status {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed endpoint reply: {0}")]
    Malformed(String),
    #[error("no recorded response for this {0} prompt")]
    NotRecorded(ModuleKind),
}

/// Sends one rendered prompt and returns the completion text.
pub trait Transport: Send + Sync {
    fn complete(&self, kind: ModuleKind, prompt: &str) -> Result<String, TransportError>;

    /// Wire attempts made so far, retries included.
    fn attempts(&self) -> usize {
        0
    }
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn complete(&self, kind: ModuleKind, prompt: &str) -> Result<String, TransportError> {
        (**self).complete(kind, prompt)
    }

    fn attempts(&self) -> usize {
        (**self).attempts()
    }
}

/// Counting semaphore capping in-flight requests across threads.
#[derive(Debug)]
pub struct RequestGate {
    free: Mutex<usize>,
    ready: Condvar,
}

impl RequestGate {
    pub fn new(capacity: usize) -> Self {
        RequestGate { free: Mutex::new(capacity.max(1)), ready: Condvar::new() }
    }

    fn acquire(&self) -> GatePass<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.ready.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GatePass { gate: self }
    }
}

struct GatePass<'a> {
    gate: &'a RequestGate,
}

impl Drop for GatePass<'_> {
    fn drop(&mut self) {
        let mut free = self.gate.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.gate.ready.notify_one();
    }
}

/// Chat-completion client. Clones share the request gate and the attempt
/// counter.
#[derive(Clone)]
pub struct HttpTransport {
    config: RemoteConfig,
    agent: ureq::Agent,
    gate: Arc<RequestGate>,
    attempts: Arc<AtomicUsize>,
}

enum Attempt {
    Done(String),
    Retry { message: String, wait: Option<Duration> },
    Fatal(TransportError),
}

impl HttpTransport {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Arc::new(RequestGate::new(config.max_concurrent));
        HttpTransport { config, agent, gate, attempts: Arc::new(AtomicUsize::new(0)) }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn body(&self, prompt: &str) -> Value {
        json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        })
    }

    fn attempt(&self, body: &str) -> Attempt {
        self.attempts.fetch_add(1, Ordering::Relaxed);
        let mut request = self.agent.post(&self.config.endpoint).content_type("application/json");
        if let Some(key) = &self.config.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = match request.send(body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry { message: e.to_string(), wait: None },
        };
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry { message: e.to_string(), wait: None },
        };
        match status {
            200..=299 => match completion_text(&text) {
                Some(content) => Attempt::Done(content),
                None => Attempt::Fatal(TransportError::Malformed(text.chars().take(200).collect())),
            },
            429 => Attempt::Retry { message: "rate limited".to_string(), wait: retry_after },
            500..=599 => Attempt::Retry { message: format!("server error {status}"), wait: retry_after },
            _ => Attempt::Fatal(TransportError::Rejected { status, body: text.chars().take(200).collect() }),
        }
    }
}

/// `choices[0].message.content` of a chat-completion reply.
pub fn completion_text(reply: &str) -> Option<String> {
    let v: Value = serde_json::from_str(reply).ok()?;
    v.pointer("/choices/0/message/content")?.as_str().map(str::to_string)
}

impl Transport for HttpTransport {
    fn complete(&self, _kind: ModuleKind, prompt: &str) -> Result<String, TransportError> {
        let body = self.body(prompt).to_string();
        let _pass = self.gate.acquire();
        let mut last = String::new();
        for i in 0..=self.config.retries {
            match self.attempt(&body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry { message, wait } => {
                    last = message;
                    if i < self.config.retries {
                        std::thread::sleep(wait.unwrap_or(self.config.backoff * 2u32.saturating_pow(i as u32)));
                    }
                }
            }
        }
        Err(TransportError::Exhausted { attempts: self.config.retries + 1, message: last })
    }

    fn attempts(&self) -> usize {
        self.attempts.load(Ordering::Relaxed)
    }
}

/// One recorded prompt and the response given to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub module: ModuleKind,
    pub prompt: String,
    pub response: String,
}

/// Recorded interactions for offline replay.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cassette {
    pub interactions: Vec<Interaction>,
}

impl Cassette {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }

    /// Response lookup by exact prompt text. Repeated prompts consume
    /// their recordings in order; the last one is reused.
    pub fn responder(&self) -> CassetteTransport {
        let mut by_prompt: HashMap<String, VecDeque<String>> = HashMap::new();
        for i in &self.interactions {
            by_prompt.entry(i.prompt.clone()).or_default().push_back(i.response.clone());
        }
        CassetteTransport { by_prompt: Mutex::new(by_prompt), attempts: AtomicUsize::new(0) }
    }
}

pub struct CassetteTransport {
    by_prompt: Mutex<HashMap<String, VecDeque<String>>>,
    attempts: AtomicUsize,
}

impl Transport for CassetteTransport {
    fn complete(&self, kind: ModuleKind, prompt: &str) -> Result<String, TransportError> {
        self.attempts.fetch_add(1, Ordering::Relaxed);
        let mut map = self.by_prompt.lock().unwrap_or_else(|e| e.into_inner());
        let queue = map.get_mut(prompt).ok_or(TransportError::NotRecorded(kind))?;
        if queue.len() > 1 {
            Ok(queue.pop_front().expect("non-empty"))
        } else {
            queue.front().cloned().ok_or(TransportError::NotRecorded(kind))
        }
    }

    fn attempts(&self) -> usize {
        self.attempts.load(Ordering::Relaxed)
    }
}
