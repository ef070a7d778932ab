//! Text generators for frame × context synthesis.

use std::time::Duration;

use serde_json::{json, Value};

use crate::config::KvConfig;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("generator not configured: {0}")]
    NotConfigured(String),
    #[error("generator request failed after {attempts} attempt(s): {message}")]
    Failed { attempts: usize, message: String },
    #[error("generator returned no usable text")]
    EmptyResponse,
}

/// Produces an answer text for a prompt.
pub trait GeneratorClient: Send + Sync {
    fn name(&self) -> &str;

    fn generate(&self, prompt: &str) -> Result<String, ClientError>;

    /// Whether identical prompts always yield identical text.
    fn is_deterministic(&self) -> bool;

    /// Requests that may be in flight at once.
    fn max_concurrency(&self) -> usize {
        1
    }
}

/// Endpoint settings; the API key never lives in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSettings {
    pub endpoint: String,
    pub model: String,
    pub retries: usize,
    pub timeout: Duration,
    pub backoff: Duration,
    pub max_concurrency: usize,
}

pub const API_KEY_ENV: &str = "GENERATOR_API_KEY";
pub const ENDPOINT_ENV: &str = "GENERATOR_ENDPOINT";

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model: String::new(),
            retries: 3,
            timeout: Duration::from_secs(60),
            backoff: Duration::from_millis(500),
            max_concurrency: 4,
        }
    }
}

impl GeneratorSettings {
    /// Reads `generator.*` keys; `GENERATOR_ENDPOINT` overrides the endpoint.
    pub fn from_kv(kv: &KvConfig) -> Result<Self, crate::config::ConfigError> {
        let d = Self::default();
        let g = kv.section("generator");
        let endpoint = std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.is_empty())
            .or_else(|| g.get("endpoint").map(str::to_string))
            .unwrap_or_default();
        Ok(Self {
            endpoint,
            model: g.get("model").unwrap_or_default().to_string(),
            retries: g.parse_or("retries", d.retries)?,
            timeout: Duration::from_secs(g.parse_or("timeout_secs", d.timeout.as_secs())?),
            backoff: Duration::from_millis(g.parse_or("backoff_ms", d.backoff.as_millis() as u64)?),
            max_concurrency: g.parse_or("max_concurrency", d.max_concurrency)?.max(1),
        })
    }
}

/// JSON-over-HTTP generator. Sends `{"model", "prompt"}` with a bearer token
/// from `GENERATOR_API_KEY`; accepts `{"text": ..}`, `{"output": ..}` or
/// chat/completion-style `choices[0]` bodies.
pub struct HttpGeneratorClient {
    settings: GeneratorSettings,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpGeneratorClient {
    pub fn new(settings: GeneratorSettings) -> Result<Self, ClientError> {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_api_key(settings, api_key)
    }

    pub fn with_api_key(settings: GeneratorSettings, api_key: Option<String>) -> Result<Self, ClientError> {
        if settings.endpoint.is_empty() {
            return Err(ClientError::NotConfigured(format!("set generator.endpoint or {ENDPOINT_ENV}")));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(settings.timeout)
            .build()
            .map_err(|e| ClientError::NotConfigured(e.to_string()))?;
        Ok(Self { settings, api_key, http })
    }

    pub fn settings(&self) -> &GeneratorSettings {
        &self.settings
    }

    fn attempt(&self, prompt: &str) -> Result<String, String> {
        let mut req = self.http.post(&self.settings.endpoint).json(&json!({
            "model": self.settings.model,
            "prompt": prompt,
        }));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let body: Value = resp.json().map_err(|e| e.to_string())?;
        extract_text(&body).ok_or_else(|| "response has no text field".to_string())
    }
}

/// Pull generated text out of the common response shapes.
pub fn extract_text(body: &Value) -> Option<String> {
    let candidates = [
        body.get("text"),
        body.get("output"),
        body.pointer("/choices/0/message/content"),
        body.pointer("/choices/0/text"),
    ];
    candidates
        .into_iter()
        .flatten()
        .filter_map(Value::as_str)
        .map(str::trim)
        .find(|s| !s.is_empty())
        .map(str::to_string)
}

impl GeneratorClient for HttpGeneratorClient {
    fn name(&self) -> &str {
        &self.settings.model
    }

    fn generate(&self, prompt: &str) -> Result<String, ClientError> {
        let attempts = self.settings.retries + 1;
        let mut last = String::new();
        for i in 0..attempts {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::warn!("generator attempt {}/{attempts} failed: {e}", i + 1);
                    last = e;
                    if i + 1 < attempts {
                        std::thread::sleep(self.settings.backoff * (i as u32 + 1));
                    }
                }
            }
        }
        Err(ClientError::Failed { attempts, message: last })
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn max_concurrency(&self) -> usize {
        self.settings.max_concurrency
    }
}
