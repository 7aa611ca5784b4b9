//! Chat-completion transport: the backend trait, retry with exponential
//! backoff, and HTTP adapters for OpenAI-compatible and Anthropic APIs.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{EvalError, TaskFraming};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageAttachment {
    pub media_type: String,
    pub data_base64: String,
}

impl ImageAttachment {
    /// Load a chart or map image; the media type follows the extension.
    pub fn from_path(path: &std::path::Path) -> Result<Self, EvalError> {
        use base64::Engine as _;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let media_type = match ext.as_str() {
            "png" => "image/png",
            "jpg" | "jpeg" => "image/jpeg",
            "gif" => "image/gif",
            "webp" => "image/webp",
            _ => return Err(EvalError::Config(format!("{}: unsupported image type", path.display()))),
        };
        let bytes = std::fs::read(path)?;
        Ok(ImageAttachment {
            media_type: media_type.to_string(),
            data_base64: base64::engine::general_purpose::STANDARD.encode(bytes),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageAttachment>,
}

impl ChatMessage {
    pub fn system(s: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: s.into(), image: None }
    }
    pub fn user(s: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: s.into(), image: None }
    }
    pub fn assistant(s: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: s.into(), image: None }
    }
}

/// Why a request is being made; lets offline backends answer sensibly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Verdict,
    CotReasoning,
    CotExtraction,
    Repair,
    Transcript,
    Advisory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestMeta {
    pub scenario_id: Option<String>,
    pub framing: Option<TaskFraming>,
    pub purpose: Purpose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f32,
    pub max_tokens: u32,
    pub want_logprobs: bool,
    pub meta: RequestMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogprob {
    pub token: String,
    pub logprob: f64,
    /// Alternatives at this position, most likely first.
    pub top: Vec<(String, f64)>,
}

/// What a backend returns for one attempt.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawCompletion {
    pub text: String,
    pub logprobs: Option<Vec<TokenLogprob>>,
    /// Simulated backends report their own latency; real ones leave this
    /// empty and the wall clock is used.
    pub reported_latency_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub logprobs: Option<Vec<TokenLogprob>>,
    pub latency_s: f64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum BackendError {
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("network: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Decode(String),
    #[error("endpoint misconfigured: {0}")]
    Config(String),
}

impl BackendError {
    /// 429, 5xx and network failures are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Http { status, .. } => *status == 429 || *status >= 500,
            BackendError::Network(_) => true,
            BackendError::Decode(_) | BackendError::Config(_) => false,
        }
    }
}

pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &str;
    fn supports_logprobs(&self) -> bool;
    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub base_delay: Duration,
    pub factor: f64,
    pub max_attempts: u32,
    /// Each delay is scaled by a uniform factor in `[1 - jitter, 1 + jitter]`.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            max_attempts: 5,
            jitter: 0.2,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based), without jitter.
    pub fn nominal_delay(&self, retry: u32) -> Duration {
        self.base_delay.mul_f64(self.factor.powi(retry as i32))
    }

    fn delay(&self, retry: u32) -> Duration {
        let j = self.jitter.clamp(0.0, 1.0);
        let k = if j > 0.0 {
            rand::thread_rng().gen_range(1.0 - j..=1.0 + j)
        } else {
            1.0
        };
        self.nominal_delay(retry).mul_f64(k)
    }
}

/// Send with retries. Latency is the sum of the attempts' own latencies;
/// backoff sleeps are not counted.
pub fn complete(
    backend: &dyn ChatBackend,
    req: &ChatRequest,
    policy: &RetryPolicy,
) -> Result<Completion, EvalError> {
    let mut latency = 0.0;
    let max = policy.max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        let started = Instant::now();
        let result = backend.send(req);
        let measured = started.elapsed().as_secs_f64();
        match result {
            Ok(raw) => {
                latency += raw.reported_latency_s.unwrap_or(measured);
                return Ok(Completion {
                    text: raw.text,
                    logprobs: raw.logprobs,
                    latency_s: latency,
                    attempts: attempt,
                });
            }
            Err(e) if !e.is_retryable() => return Err(EvalError::Endpoint(e)),
            Err(e) => {
                latency += measured;
                tracing::warn!(backend = backend.name(), attempt, error = %e, "chat request failed");
                if attempt >= max {
                    return Err(EvalError::Transport {
                        attempts: attempt,
                        last: e,
                    });
                }
                std::thread::sleep(policy.delay(attempt - 1));
            }
        }
    }
}

fn api_key(env: &Option<String>) -> Result<Option<String>, BackendError> {
    match env {
        None => Ok(None),
        Some(var) => std::env::var(var)
            .map(Some)
            .map_err(|_| BackendError::Config(format!("environment variable {var} is not set"))),
    }
}

fn http_client(timeout: Duration) -> reqwest::blocking::Client {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .expect("TLS backend initialises")
}

fn post_json(
    req: reqwest::blocking::RequestBuilder,
    body: &Value,
) -> Result<Value, BackendError> {
    let resp = req.json(body).send().map_err(|e| BackendError::Network(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp.text().map_err(|e| BackendError::Network(e.to_string()))?;
    if !(200..300).contains(&status) {
        return Err(BackendError::Http { status, body: text });
    }
    serde_json::from_str(&text).map_err(|e| BackendError::Decode(e.to_string()))
}

/// `POST {base_url}/chat/completions`, as served by OpenAI and by most
/// open-weight inference servers.
pub struct OpenAiBackend {
    pub name: String,
    pub base_url: String,
    pub model: String,
    pub api_key_env: Option<String>,
    pub logprobs: bool,
    client: reqwest::blocking::Client,
}

impl OpenAiBackend {
    pub fn new(
        name: &str,
        base_url: &str,
        model: &str,
        api_key_env: Option<String>,
        logprobs: bool,
        timeout: Duration,
    ) -> Self {
        OpenAiBackend {
            name: name.to_string(),
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key_env,
            logprobs,
            client: http_client(timeout),
        }
    }

    pub fn request_body(&self, req: &ChatRequest) -> Value {
        let messages: Vec<Value> = req
            .messages
            .iter()
            .map(|m| match &m.image {
                None => json!({"role": m.role.as_str(), "content": m.content}),
                Some(img) => json!({
                    "role": m.role.as_str(),
                    "content": [
                        {"type": "text", "text": m.content},
                        {"type": "image_url", "image_url": {
                            "url": format!("data:{};base64,{}", img.media_type, img.data_base64)
                        }}
                    ]
                }),
            })
            .collect();
        let mut body = json!({
            "model": self.model,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if req.want_logprobs && self.logprobs {
            body["logprobs"] = json!(true);
            body["top_logprobs"] = json!(5);
        }
        body
    }

    pub fn parse_response(v: &Value) -> Result<RawCompletion, BackendError> {
        let choice = v
            .pointer("/choices/0")
            .ok_or_else(|| BackendError::Decode("no choices".into()))?;
        let text = choice
            .pointer("/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| BackendError::Decode("no message content".into()))?
            .to_string();
        let logprobs = choice
            .pointer("/logprobs/content")
            .and_then(Value::as_array)
            .map(|items| {
                items
                    .iter()
                    .map(|it| TokenLogprob {
                        token: it["token"].as_str().unwrap_or_default().to_string(),
                        logprob: it["logprob"].as_f64().unwrap_or(f64::NEG_INFINITY),
                        top: it["top_logprobs"]
                            .as_array()
                            .map(|alts| {
                                alts.iter()
                                    .map(|a| {
                                        (
                                            a["token"].as_str().unwrap_or_default().to_string(),
                                            a["logprob"].as_f64().unwrap_or(f64::NEG_INFINITY),
                                        )
                                    })
                                    .collect()
                            })
                            .unwrap_or_default(),
                    })
                    .collect()
            });
        Ok(RawCompletion {
            text,
            logprobs,
            reported_latency_s: None,
        })
    }
}

impl ChatBackend for OpenAiBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_logprobs(&self) -> bool {
        self.logprobs
    }

    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError> {
        let mut http = self.client.post(format!("{}/chat/completions", self.base_url));
        if let Some(key) = api_key(&self.api_key_env)? {
            http = http.bearer_auth(key);
        }
        Self::parse_response(&post_json(http, &self.request_body(req))?)
    }
}

/// `POST {base_url}/v1/messages`. No token log-probabilities.
pub struct AnthropicBackend {
    pub name: String,
    pub base_url: String,
    pub model: String,
    pub api_key_env: Option<String>,
    client: reqwest::blocking::Client,
}

impl AnthropicBackend {
    pub fn new(
        name: &str,
        base_url: &str,
        model: &str,
        api_key_env: Option<String>,
        timeout: Duration,
    ) -> Self {
        AnthropicBackend {
            name: name.to_string(),
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key_env,
            client: http_client(timeout),
        }
    }

    pub fn request_body(&self, req: &ChatRequest) -> Value {
        let system: Vec<&str> = req
            .messages
            .iter()
            .filter(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .collect();
        let messages: Vec<Value> = req
            .messages
            .iter()
            .filter(|m| m.role != Role::System)
            .map(|m| {
                let mut parts = Vec::new();
                if let Some(img) = &m.image {
                    parts.push(json!({"type": "image", "source": {
                        "type": "base64", "media_type": img.media_type, "data": img.data_base64
                    }}));
                }
                parts.push(json!({"type": "text", "text": m.content}));
                json!({"role": m.role.as_str(), "content": parts})
            })
            .collect();
        let mut body = json!({
            "model": self.model,
            "messages": messages,
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        });
        if !system.is_empty() {
            body["system"] = json!(system.join("\n\n"));
        }
        body
    }

    pub fn parse_response(v: &Value) -> Result<RawCompletion, BackendError> {
        let parts = v["content"]
            .as_array()
            .ok_or_else(|| BackendError::Decode("no content".into()))?;
        let text: String = parts
            .iter()
            .filter(|p| p["type"] == "text")
            .filter_map(|p| p["text"].as_str())
            .collect();
        Ok(RawCompletion {
            text,
            logprobs: None,
            reported_latency_s: None,
        })
    }
}

impl ChatBackend for AnthropicBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_logprobs(&self) -> bool {
        false
    }

    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError> {
        let mut http = self
            .client
            .post(format!("{}/v1/messages", self.base_url))
            .header("anthropic-version", "2023-06-01");
        if let Some(key) = api_key(&self.api_key_env)? {
            http = http.header("x-api-key", key);
        }
        Self::parse_response(&post_json(http, &self.request_body(req))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ScriptedMock;

    fn req() -> ChatRequest {
        ChatRequest {
            messages: vec![ChatMessage::system("s"), ChatMessage::user("u")],
            temperature: 0.0,
            max_tokens: 16,
            want_logprobs: false,
            meta: RequestMeta { scenario_id: None, framing: None, purpose: Purpose::Verdict },
        }
    }

    fn fast() -> RetryPolicy {
        RetryPolicy { base_delay: Duration::from_millis(1), ..RetryPolicy::default() }
    }

    fn http(status: u16) -> BackendError {
        BackendError::Http { status, body: String::new() }
    }

    #[test]
    fn canned_reply_is_returned_verbatim() {
        let m = ScriptedMock::new(vec![Ok("{\"label\":\"danger\"}".into())]);
        let c = complete(&m, &req(), &fast()).unwrap();
        assert_eq!(c.text, "{\"label\":\"danger\"}");
        assert_eq!(c.attempts, 1);
    }

    #[test]
    fn two_failures_then_success() {
        let m = ScriptedMock::new(vec![Err(http(503)), Err(BackendError::Network("reset".into())), Ok("ok".into())]);
        let c = complete(&m, &req(), &fast()).unwrap();
        assert_eq!(c.attempts, 3);
        assert_eq!(m.calls(), 3);
    }

    #[test]
    fn always_500_gives_up_after_five() {
        let m = ScriptedMock::new((0..10).map(|_| Err(http(500))).collect());
        match complete(&m, &req(), &fast()) {
            Err(EvalError::Transport { attempts, .. }) => assert_eq!(attempts, 5),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.calls(), 5);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let m = ScriptedMock::new(vec![Err(http(401)), Ok("late".into())]);
        assert!(matches!(complete(&m, &req(), &fast()), Err(EvalError::Endpoint(_))));
        assert_eq!(m.calls(), 1);
        assert!(http(429).is_retryable());
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy::default();
        let d: Vec<u64> = (0..4).map(|i| p.nominal_delay(i).as_millis() as u64).collect();
        assert_eq!(d, vec![1000, 2000, 4000, 8000]);
    }

    #[test]
    fn openai_wire_format() {
        let b = OpenAiBackend::new("m", "http://x/v1/", "gpt", None, true, Duration::from_secs(1));
        let mut r = req();
        r.want_logprobs = true;
        let body = b.request_body(&r);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["top_logprobs"], 5);
        let resp = json!({"choices": [{"message": {"content": "hi"}, "logprobs": {"content": [
            {"token": "hi", "logprob": -0.1, "top_logprobs": [{"token": "hi", "logprob": -0.1}]}
        ]}}]});
        let raw = OpenAiBackend::parse_response(&resp).unwrap();
        assert_eq!(raw.text, "hi");
        assert_eq!(raw.logprobs.unwrap()[0].top[0].0, "hi");
    }

    #[test]
    fn anthropic_wire_format() {
        let b = AnthropicBackend::new("c", "http://x", "claude", None, Duration::from_secs(1));
        let body = b.request_body(&req());
        assert_eq!(body["system"], "s");
        assert_eq!(body["messages"].as_array().unwrap().len(), 1);
        let raw = AnthropicBackend::parse_response(&json!({"content": [{"type": "text", "text": "ok"}]})).unwrap();
        assert_eq!(raw.text, "ok");
    }
}
