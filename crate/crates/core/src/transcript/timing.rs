use serde::{Deserialize, Serialize};

use super::Transcript;

pub const MIN_UTTERANCE_MS: u64 = 3_000;
pub const MAX_UTTERANCE_MS: u64 = 6_000;
pub const MIN_GAP_MS: u64 = 3_000;
pub const MAX_GAP_MS: u64 = 8_000;
/// The transcript must end strictly before this.
pub const MAX_TOTAL_MS: u64 = 90_000;
pub const MAX_CUES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimingViolation {
    UtteranceLength { index: u32, duration_ms: u64 },
    /// Gap is measured from the end of one cue to the start of the next.
    Gap { after_index: u32, gap_ms: u64 },
    TotalDuration { end_ms: u64 },
    TooManyLines { count: usize },
}

impl std::fmt::Display for TimingViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimingViolation::UtteranceLength { index, duration_ms } => {
                write!(f, "cue {index} lasts {duration_ms} ms (3000-6000 allowed)")
            }
            TimingViolation::Gap { after_index, gap_ms } => {
                write!(f, "gap after cue {after_index} is {gap_ms} ms (3000-8000 allowed)")
            }
            TimingViolation::TotalDuration { end_ms } => {
                write!(f, "transcript ends at {end_ms} ms (must be under 90000)")
            }
            TimingViolation::TooManyLines { count } => write!(f, "{count} cues (at most 10)"),
        }
    }
}

/// Check the generator's timing rules. The report is sorted, so it does
/// not depend on the order in which checks run.
pub fn validate_timing(t: &Transcript) -> Vec<TimingViolation> {
    let mut out = Vec::new();
    for c in &t.cues {
        let d = c.duration_ms();
        if !(MIN_UTTERANCE_MS..=MAX_UTTERANCE_MS).contains(&d) {
            out.push(TimingViolation::UtteranceLength {
                index: c.index,
                duration_ms: d,
            });
        }
    }
    for w in t.cues.windows(2) {
        let gap = w[1].start_ms.saturating_sub(w[0].end_ms);
        if !(MIN_GAP_MS..=MAX_GAP_MS).contains(&gap) {
            out.push(TimingViolation::Gap {
                after_index: w[0].index,
                gap_ms: gap,
            });
        }
    }
    if let Some(last) = t.cues.iter().map(|c| c.end_ms).max() {
        if last >= MAX_TOTAL_MS {
            out.push(TimingViolation::TotalDuration { end_ms: last });
        }
    }
    if t.cues.len() > MAX_CUES {
        out.push(TimingViolation::TooManyLines {
            count: t.cues.len(),
        });
    }
    out.sort();
    out
}
