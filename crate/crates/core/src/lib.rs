//! Synthetic CTAF (non-towered airfield) safety scenarios and LLM evaluation.

pub mod ablation;
pub mod airspace;
pub mod cli;
pub mod eval;
pub mod metar;
pub mod metrics;
pub mod scenario;
pub mod transcript;
