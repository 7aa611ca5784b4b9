//! Offline chat backends for tests, CI and replaying recorded runs.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    BackendError, ChatBackend, ChatRequest, EvalError, Label, Purpose, RawCompletion,
    TaskFraming, TokenLogprob,
};
use crate::airspace::SafetyLabel3;
use crate::scenario::Dataset;

/// Replays a fixed script of replies in order, whatever the request.
pub struct ScriptedMock {
    name: String,
    logprobs: bool,
    script: Mutex<VecDeque<Result<RawCompletion, BackendError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedMock {
    pub fn new(items: Vec<Result<String, BackendError>>) -> Self {
        Self::with_completions(
            items
                .into_iter()
                .map(|r| r.map(|text| RawCompletion { text, ..RawCompletion::default() }))
                .collect(),
        )
    }

    pub fn with_completions(items: Vec<Result<RawCompletion, BackendError>>) -> Self {
        ScriptedMock {
            name: "scripted".into(),
            logprobs: false,
            script: Mutex::new(items.into()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn supporting_logprobs(mut self) -> Self {
        self.logprobs = true;
        self
    }

    /// Number of requests received so far.
    pub fn calls(&self) -> usize {
        self.seen.lock().expect("not poisoned").len()
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().expect("not poisoned").clone()
    }
}

impl ChatBackend for ScriptedMock {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_logprobs(&self) -> bool {
        self.logprobs
    }

    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError> {
        self.seen.lock().expect("not poisoned").push(req.clone());
        self.script
            .lock()
            .expect("not poisoned")
            .pop_front()
            .unwrap_or_else(|| Err(BackendError::Decode("script exhausted".into())))
    }
}

fn mix(parts: &[&[u8]]) -> u64 {
    // FNV-1a: stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for &b in p.iter().chain(&[0xff]) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Answers with the gold label, corrupted at `error_rate`. Every draw is a
/// hash of the seed and the request, so replies are reproducible and
/// independent of scheduling order.
pub struct OracleMock {
    name: String,
    gold: HashMap<String, SafetyLabel3>,
    error_rate: f64,
    seed: u64,
    logprobs: bool,
    calls: AtomicUsize,
}

impl OracleMock {
    pub fn new(name: &str, gold: HashMap<String, SafetyLabel3>, error_rate: f64, seed: u64) -> Self {
        OracleMock {
            name: name.to_string(),
            gold,
            error_rate: error_rate.clamp(0.0, 1.0),
            seed,
            logprobs: false,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn from_dataset(name: &str, ds: &Dataset, error_rate: f64, seed: u64) -> Self {
        let gold = ds.scenarios.iter().map(|s| (s.id.clone(), s.label3)).collect();
        Self::new(name, gold, error_rate, seed)
    }

    pub fn supporting_logprobs(mut self, yes: bool) -> Self {
        self.logprobs = yes;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn request_hash(&self, req: &ChatRequest) -> u64 {
        let id = req.meta.scenario_id.as_deref().unwrap_or("");
        let framing = req.meta.framing.map_or("", |f| f.as_str());
        // The exemplar count tells strategies apart.
        let n = req.messages.len().to_le_bytes();
        mix(&[&self.seed.to_le_bytes(), self.name.as_bytes(), id.as_bytes(), framing.as_bytes(), &n])
    }

    fn verdict(&self, req: &ChatRequest, h: u64) -> Result<(Label, f64, TaskFraming), BackendError> {
        let id = req
            .meta
            .scenario_id
            .as_deref()
            .ok_or_else(|| BackendError::Decode("oracle needs a scenario id".into()))?;
        let gold3 = *self
            .gold
            .get(id)
            .ok_or_else(|| BackendError::Http { status: 404, body: format!("unknown scenario {id}") })?;
        let framing = req.meta.framing.unwrap_or(TaskFraming::Binary);
        let gold = framing.gold(gold3);
        let wrong = unit(mix(&[&h.to_le_bytes(), b"err"])) < self.error_rate;
        let label = if wrong {
            let others: Vec<Label> = framing.classes().iter().copied().filter(|c| *c != gold).collect();
            others[(mix(&[&h.to_le_bytes(), b"pick"]) % others.len() as u64) as usize]
        } else {
            gold
        };
        let confidence = ((0.6 + 0.39 * unit(mix(&[&h.to_le_bytes(), b"conf"]))) * 100.0).round() / 100.0;
        Ok((label, confidence.min(0.99), framing))
    }

    fn logprob_tokens(label: Label, confidence: f64, framing: TaskFraming, body: &str) -> Vec<TokenLogprob> {
        let classes = framing.classes();
        let rest = (1.0 - confidence) / (classes.len() - 1) as f64;
        let top: Vec<(String, f64)> = classes
            .iter()
            .map(|c| {
                let p = if *c == label { confidence } else { rest };
                (c.as_str().to_string(), p.max(1e-9).ln())
            })
            .collect();
        let (head, tail) = body.split_once(label.as_str()).expect("label is in the body");
        vec![
            TokenLogprob { token: head.to_string(), logprob: 0.0, top: vec![] },
            TokenLogprob { token: label.as_str().to_string(), logprob: confidence.ln(), top },
            TokenLogprob { token: tail.to_string(), logprob: 0.0, top: vec![] },
        ]
    }
}

impl ChatBackend for OracleMock {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_logprobs(&self) -> bool {
        self.logprobs
    }

    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let h = self.request_hash(req);
        let latency = 0.3 + 0.05 * req.messages.len() as f64 + 0.4 * unit(mix(&[&h.to_le_bytes(), b"lat"]));
        match req.meta.purpose {
            Purpose::CotReasoning => Ok(RawCompletion {
                text: "Step 1: the METAR sets the flight category. Step 2: each aircraft's calls place it in the pattern. \
                       Step 3: I compare positions and timing for conflicts."
                    .into(),
                logprobs: None,
                reported_latency_s: Some(2.0 * latency),
            }),
            Purpose::Verdict | Purpose::CotExtraction | Purpose::Repair => {
                let (label, confidence, framing) = self.verdict(req, h)?;
                let body = format!(
                    "{{\"label\": \"{}\", \"confidence\": {confidence}, \"reasoning\": \"Oracle reply for {}.\"}}",
                    label.as_str(),
                    req.meta.scenario_id.as_deref().unwrap_or("?")
                );
                let logprobs = (self.logprobs && req.want_logprobs)
                    .then(|| Self::logprob_tokens(label, confidence, framing, &body));
                Ok(RawCompletion { text: body, logprobs, reported_latency_s: Some(latency) })
            }
            Purpose::Transcript | Purpose::Advisory => Err(BackendError::Http {
                status: 400,
                body: "the oracle mock does not write scenarios".into(),
            }),
        }
    }
}

/// One canned reply in a fixture file (JSON lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureReply {
    pub scenario_id: String,
    #[serde(default)]
    pub framing: Option<TaskFraming>,
    pub purpose: Purpose,
    pub text: String,
    #[serde(default)]
    pub latency_s: Option<f64>,
    #[serde(default)]
    pub logprobs: Option<Vec<TokenLogprob>>,
}

/// Replays canned replies keyed by (scenario, framing, purpose).
pub struct FixtureMock {
    name: String,
    replies: Vec<FixtureReply>,
}

impl FixtureMock {
    pub fn new(name: &str, replies: Vec<FixtureReply>) -> Self {
        FixtureMock { name: name.to_string(), replies }
    }

    pub fn from_path(name: &str, path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path)?;
        let replies = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<FixtureReply>, _>>()?;
        Ok(Self::new(name, replies))
    }
}

impl ChatBackend for FixtureMock {
    fn name(&self) -> &str {
        &self.name
    }

    fn supports_logprobs(&self) -> bool {
        self.replies.iter().any(|r| r.logprobs.is_some())
    }

    fn send(&self, req: &ChatRequest) -> Result<RawCompletion, BackendError> {
        let id = req.meta.scenario_id.as_deref().unwrap_or("");
        self.replies
            .iter()
            .find(|r| {
                r.scenario_id == id
                    && r.purpose == req.meta.purpose
                    && (r.framing.is_none() || r.framing == req.meta.framing)
            })
            .map(|r| RawCompletion {
                text: r.text.clone(),
                logprobs: r.logprobs.clone(),
                reported_latency_s: r.latency_s,
            })
            .ok_or_else(|| BackendError::Http {
                status: 404,
                body: format!("no fixture reply for {id} {:?}", req.meta.purpose),
            })
    }
}
