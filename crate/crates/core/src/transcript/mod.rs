//! SRT transcripts of CTAF traffic and the phraseology spoken in them.

mod phraseology;
mod srt;
mod timing;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airspace::AirspaceError;

pub use phraseology::{
    nato_decode, nato_spell, parse_radio_call, runway_words, spell_char, Intention, RadioCall,
};
pub use srt::{emit_srt, format_timestamp, parse_srt, parse_timestamp};
pub use timing::{
    validate_timing, TimingViolation, MAX_CUES, MAX_GAP_MS, MAX_TOTAL_MS, MAX_UTTERANCE_MS,
    MIN_GAP_MS, MIN_UTTERANCE_MS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("SRT block {block}: {message}")]
    Srt { block: usize, message: String },
    #[error("not a phonetic word: {0:?}")]
    UnknownWord(String),
    #[error(transparent)]
    Callsign(#[from] AirspaceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrtCue {
    pub index: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

impl SrtCue {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub cues: Vec<SrtCue>,
}

impl Transcript {
    /// Build from (start, end, text) triples, numbering cues from 1.
    pub fn from_cues<I, S>(cues: I) -> Transcript
    where
        I: IntoIterator<Item = (u64, u64, S)>,
        S: Into<String>,
    {
        Transcript {
            cues: cues
                .into_iter()
                .enumerate()
                .map(|(i, (start_ms, end_ms, text))| SrtCue {
                    index: i as u32 + 1,
                    start_ms,
                    end_ms,
                    text: text.into(),
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    pub fn end_ms(&self) -> u64 {
        self.cues.last().map_or(0, |c| c.end_ms)
    }

    pub fn word_count(&self) -> usize {
        self.cues.iter().map(|c| c.text.split_whitespace().count()).sum()
    }

    /// Generated transcripts must open at 00:00:00,000.
    pub fn starts_at_zero(&self) -> bool {
        self.cues.first().is_none_or(|c| c.start_ms == 0)
    }
}
