//! Classification and ranking metrics over evaluation records, and the
//! report tables and plots built from them.

mod confusion;
mod latency;
mod ranking;
mod report;
mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{Condition, Label, ScoreSource};

pub use confusion::{confusion, ClassScores, ConfusionMatrix};
pub use latency::{latency_summary, percentile, LatencySummary};
pub use ranking::{auroc, average_precision, pr_curve, roc_curve, CurvePoint};
pub use report::{best_run, condition_metrics, report, ConditionMetrics, ReportFiles};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no records")]
    Empty,
    #[error("records mix conditions: {0} and {1}")]
    MixedConditions(String, String),
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("label {label} is not a class of {framing}")]
    ForeignLabel { label: String, framing: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for MetricsError {
    fn from(e: std::io::Error) -> Self {
        MetricsError::Io(e.to_string())
    }
}

impl From<csv::Error> for MetricsError {
    fn from(e: csv::Error) -> Self {
        MetricsError::Io(e.to_string())
    }
}

/// One scored query: a test scenario under one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub scenario_id: String,
    pub condition: Condition,
    /// Perturbation tag for ablation runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub gold: Label,
    /// `None` when the reply never parsed or the query failed.
    pub pred: Option<Label>,
    pub confidence: Option<f64>,
    pub score_danger: f64,
    pub score_source: ScoreSource,
    pub latency_s: f64,
    pub parse_failure: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub variant: Option<String>,
    pub condition: Condition,
    pub scenario_id: String,
}

impl EvalRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            variant: self.variant.clone(),
            condition: self.condition.clone(),
            scenario_id: self.scenario_id.clone(),
        }
    }

    pub fn is_correct(&self) -> bool {
        self.pred == Some(self.gold)
    }

    /// Whether the gold class is a positive (non-nominal) one.
    pub fn is_positive(&self) -> bool {
        self.gold.is_danger()
    }
}

/// Records grouped by (variant, condition), in key order.
pub fn group_by_condition(
    records: &[EvalRecord],
) -> BTreeMap<(Option<String>, Condition), Vec<&EvalRecord>> {
    let mut out: BTreeMap<_, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        out.entry((r.variant.clone(), r.condition.clone())).or_default().push(r);
    }
    out
}
