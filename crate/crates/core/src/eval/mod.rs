//! Prompting, chat endpoints, verdict extraction and the evaluation matrix.

mod client;
mod endpoint;
mod matrix;
mod mock;
mod prompt;
pub mod prompts;
mod protocol;
mod verdict;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airspace::{collapse_to_binary, SafetyLabel3, SafetyLabelBinary};

pub use client::{
    complete, AnthropicBackend, BackendError, ChatBackend, ChatMessage, ChatRequest, Completion,
    ImageAttachment, OpenAiBackend, Purpose, RawCompletion, RequestMeta, RetryPolicy, Role,
    TokenLogprob,
};
pub use endpoint::{ModelEndpoint, Provider};
pub use matrix::{load_records, run_matrix, MatrixOptions, MatrixSummary};
pub use mock::{FixtureMock, OracleMock, ScriptedMock};
pub use prompt::{
    assemble_prompt, assemble_qualitative_prompt, exemplar_reply, render_scenario_input,
};
pub use protocol::{run_protocol, EvalSettings};
pub use verdict::{capture_score, extract_verdict, ParsedVerdict, ScoreSource, Verdict, VerdictError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("transport failure after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: BackendError },
    #[error("endpoint rejected the request: {0}")]
    Endpoint(BackendError),
    #[error("invalid prompt: {0}")]
    Prompt(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A class label under either framing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Nominal,
    Danger,
    Warning,
    Hazard,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Nominal => "nominal",
            Label::Danger => "danger",
            Label::Warning => "warning",
            Label::Hazard => "hazard",
        }
    }

    /// Everything but nominal counts as the positive class.
    pub fn is_danger(self) -> bool {
        self != Label::Nominal
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nominal" => Ok(Label::Nominal),
            "danger" => Ok(Label::Danger),
            "warning" => Ok(Label::Warning),
            "hazard" => Ok(Label::Hazard),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

impl From<SafetyLabel3> for Label {
    fn from(l: SafetyLabel3) -> Self {
        match l {
            SafetyLabel3::Nominal => Label::Nominal,
            SafetyLabel3::Warning => Label::Warning,
            SafetyLabel3::Hazard => Label::Hazard,
        }
    }
}

impl From<SafetyLabelBinary> for Label {
    fn from(l: SafetyLabelBinary) -> Self {
        match l {
            SafetyLabelBinary::Nominal => Label::Nominal,
            SafetyLabelBinary::Danger => Label::Danger,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskFraming {
    Binary,
    ThreeClass,
}

impl TaskFraming {
    pub const ALL: [TaskFraming; 2] = [TaskFraming::Binary, TaskFraming::ThreeClass];

    pub fn classes(self) -> &'static [Label] {
        match self {
            TaskFraming::Binary => &[Label::Nominal, Label::Danger],
            TaskFraming::ThreeClass => &[Label::Nominal, Label::Warning, Label::Hazard],
        }
    }

    pub fn system_prompt(self) -> &'static str {
        match self {
            TaskFraming::Binary => prompts::BINARY_SYSTEM_PROMPT,
            TaskFraming::ThreeClass => prompts::THREE_CLASS_SYSTEM_PROMPT,
        }
    }

    /// Gold label of a scenario under this framing.
    pub fn gold(self, label3: SafetyLabel3) -> Label {
        match self {
            TaskFraming::Binary => collapse_to_binary(label3).into(),
            TaskFraming::ThreeClass => label3.into(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskFraming::Binary => "binary",
            TaskFraming::ThreeClass => "three_class",
        }
    }
}

impl fmt::Display for TaskFraming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskFraming {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "binary" => Ok(TaskFraming::Binary),
            "three_class" | "3class" | "three" => Ok(TaskFraming::ThreeClass),
            other => Err(format!("unknown framing {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ZS")]
    ZeroShot,
    #[serde(rename = "OS")]
    OneShot,
    #[serde(rename = "FS")]
    FewShot,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::ZeroShot, Strategy::OneShot, Strategy::FewShot];

    pub fn exemplars_per_class(self) -> usize {
        match self {
            Strategy::ZeroShot => 0,
            Strategy::OneShot => 1,
            Strategy::FewShot => 2,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Strategy::ZeroShot => "ZS",
            Strategy::OneShot => "OS",
            Strategy::FewShot => "FS",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ZS" | "ZERO_SHOT" | "ZERO-SHOT" => Ok(Strategy::ZeroShot),
            "OS" | "ONE_SHOT" | "ONE-SHOT" => Ok(Strategy::OneShot),
            "FS" | "FEW_SHOT" | "FEW-SHOT" => Ok(Strategy::FewShot),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Direct,
    Cot,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Direct, Protocol::Cot];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Direct => "direct",
            Protocol::Cot => "cot",
        }
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Protocol::Direct),
            "cot" => Ok(Protocol::Cot),
            other => Err(format!("unknown protocol {other:?}")),
        }
    }
}

/// One cell of the evaluation matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub model: String,
    pub framing: TaskFraming,
    pub strategy: Strategy,
    pub protocol: Protocol,
}

impl Condition {
    /// "OS+CoT" style tag used in tables.
    pub fn setting(&self) -> String {
        match self.protocol {
            Protocol::Direct => self.strategy.short().to_string(),
            Protocol::Cot => format!("{}+CoT", self.strategy.short()),
        }
    }

    /// Every (framing, strategy, protocol) cell for one model, in table order.
    pub fn grid(model: &str, framings: &[TaskFraming]) -> Vec<Condition> {
        let mut out = Vec::new();
        for &framing in framings {
            for protocol in Protocol::ALL {
                for strategy in Strategy::ALL {
                    out.push(Condition {
                        model: model.to_string(),
                        framing,
                        strategy,
                        protocol,
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.model, self.framing, self.setting())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gold_collapses_for_binary() {
        assert_eq!(TaskFraming::Binary.gold(SafetyLabel3::Warning), Label::Danger);
        assert_eq!(TaskFraming::ThreeClass.gold(SafetyLabel3::Warning), Label::Warning);
        assert_eq!(TaskFraming::Binary.gold(SafetyLabel3::Nominal), Label::Nominal);
    }

    #[test]
    fn grid_is_six_per_framing() {
        let g = Condition::grid("m", &TaskFraming::ALL);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0].setting(), "ZS");
        assert_eq!(g[5].setting(), "FS+CoT");
    }

    #[test]
    fn prompts_are_verbatim_shaped() {
        assert!(BINARY.contains("Would a CTAF advisory flag this for any reason"));
        assert!(THREE.contains("imminence, not severity"));
        assert!(THREE.contains("\"label\": \"<nominal | warning | hazard>\""));
    }

    const BINARY: &str = prompts::BINARY_SYSTEM_PROMPT;
    const THREE: &str = prompts::THREE_CLASS_SYSTEM_PROMPT;
}
