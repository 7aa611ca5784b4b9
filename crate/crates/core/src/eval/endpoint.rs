use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AnthropicBackend, ChatBackend, EvalError, FixtureMock, OpenAiBackend, OracleMock};
use crate::scenario::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    /// `/chat/completions` wire format (OpenAI, vLLM, llama.cpp, ...).
    Openai,
    Anthropic,
    /// Gold labels corrupted at `error_rate`; offline.
    OracleMock,
    /// Replays canned replies from `fixture`.
    Fixture,
}

/// One model to evaluate. Credentials are referenced by environment
/// variable name only and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    /// Filled from the table key when read from a run config.
    #[serde(default)]
    pub name: String,
    pub provider: Provider,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default)]
    pub supports_logprobs: bool,
    #[serde(default = "default_parallel")]
    pub max_parallel: usize,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default)]
    pub error_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fixture: Option<PathBuf>,
}

fn default_parallel() -> usize {
    4
}

fn default_timeout() -> u64 {
    120
}

impl ModelEndpoint {
    /// An oracle mock with the given error rate.
    pub fn oracle(name: &str, error_rate: f64) -> Self {
        ModelEndpoint {
            name: name.to_string(),
            provider: Provider::OracleMock,
            base_url: None,
            model: None,
            auth_env: None,
            supports_logprobs: false,
            max_parallel: default_parallel(),
            timeout_s: default_timeout(),
            error_rate,
            seed: 0,
            fixture: None,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Config(format!("endpoint {}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return bad("empty name");
        }
        if self.max_parallel == 0 {
            return bad("max_parallel must be at least 1");
        }
        match self.provider {
            Provider::Openai | Provider::Anthropic => {
                if self.base_url.is_none() || self.model.is_none() {
                    return bad("base_url and model are required");
                }
            }
            Provider::OracleMock => {
                if !(0.0..=1.0).contains(&self.error_rate) {
                    return bad("error_rate must lie in [0, 1]");
                }
            }
            Provider::Fixture => {
                if self.fixture.is_none() {
                    return bad("fixture path is required");
                }
            }
        }
        Ok(())
    }

    /// Instantiate the chat backend. The oracle needs the dataset's gold
    /// labels.
    pub fn build(&self, dataset: &Dataset) -> Result<Box<dyn ChatBackend>, EvalError> {
        self.validate()?;
        let timeout = Duration::from_secs(self.timeout_s);
        let url = self.base_url.as_deref().unwrap_or_default();
        let model = self.model.as_deref().unwrap_or_default();
        Ok(match self.provider {
            Provider::Openai => Box::new(OpenAiBackend::new(
                &self.name,
                url,
                model,
                self.auth_env.clone(),
                self.supports_logprobs,
                timeout,
            )),
            Provider::Anthropic => Box::new(AnthropicBackend::new(
                &self.name,
                url,
                model,
                self.auth_env.clone(),
                timeout,
            )),
            Provider::OracleMock => Box::new(
                OracleMock::from_dataset(&self.name, dataset, self.error_rate, self.seed)
                    .supporting_logprobs(self.supports_logprobs),
            ),
            Provider::Fixture => Box::new(FixtureMock::from_path(
                &self.name,
                self.fixture.as_deref().expect("validated"),
            )?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_from_toml_without_secrets() {
        let e: ModelEndpoint = toml::from_str(
            r#"
            name = "gpt-4o"
            provider = "openai"
            base_url = "https://api.openai.com/v1"
            model = "gpt-4o"
            auth_env = "OPENAI_API_KEY"
            supports_logprobs = true
            "#,
        )
        .unwrap();
        assert_eq!(e.max_parallel, 4);
        e.validate().unwrap();
        let back = serde_json::to_string(&e).unwrap();
        assert!(back.contains("OPENAI_API_KEY") && !back.contains("sk-"));
        let mut broken = e.clone();
        broken.model = None;
        assert!(broken.validate().is_err());
    }
}
