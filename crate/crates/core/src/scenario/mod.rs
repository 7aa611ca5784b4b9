//! Seeded construction of labelled CTAF scenarios and the benchmark dataset.

mod dataset;
mod render;
mod script;
mod weather;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airspace::{
    AdsbState, Aircraft, Airfield, AirspaceError, Finding, HazardType, PositionEvent, SafetyLabel3,
    SafetyLabelBinary,
};
use crate::metar::{parse_metar, Metar, MetarError};
use crate::transcript::{parse_srt, Transcript, TranscriptError};

pub use dataset::{
    build_dataset, load_dataset, save_dataset, scenario_seed, synthesize_advisory,
    synthesize_transcript, ClassTargets, Dataset, GenConfig, ManifestRow, SynthBackend,
    TranscriptBackendKind,
};
pub use render::{
    build_generator_user_message, cross_check, missing_calls, template_advisory,
    template_transcript, ADVISORY_SYSTEM_PROMPT, TRANSCRIPT_SYSTEM_PROMPT,
};
pub use script::{sample_scenario, AircraftType, AIRCRAFT_TYPES, MAX_ATTEMPTS};
pub use weather::{sample_metar, WeatherFamily};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Airspace(#[from] AirspaceError),
    #[error(transparent)]
    Metar(#[from] MetarError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("{hazard_type}: no scenario realising the target label after {attempts} attempts")]
    Unrealisable { hazard_type: HazardType, attempts: usize },
    #[error("generated transcript for {id} fails timing after {attempts} attempts: {violations}")]
    Timing {
        id: String,
        attempts: usize,
        violations: String,
    },
    #[error("scenario {id}: {message}")]
    Inconsistent { id: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Icl,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Icl => "icl",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "icl" => Ok(Split::Icl),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// One benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub hazard_type: HazardType,
    pub label3: SafetyLabel3,
    pub label_binary: SafetyLabelBinary,
    pub metar_raw: String,
    pub metar_decoded: String,
    /// Nominal length of the scenario in seconds.
    pub duration_s: u32,
    pub aircraft: Vec<Aircraft>,
    pub events: Vec<PositionEvent>,
    /// Position of every aircraft at t=0.
    pub adsb: Vec<AdsbState>,
    /// SRT text; empty until synthesised.
    pub transcript: String,
    pub advisory: String,
    pub split: Split,
}

impl Scenario {
    pub fn metar(&self) -> Result<Metar, MetarError> {
        parse_metar(&self.metar_raw)
    }

    pub fn parsed_transcript(&self) -> Result<Transcript, TranscriptError> {
        parse_srt(&self.transcript)
    }

    pub fn findings(&self, airfield: &Airfield) -> Result<Vec<Finding>, ScenarioError> {
        Ok(crate::airspace::evaluate_rules(
            airfield,
            &self.events,
            &self.aircraft,
            &self.metar()?,
        )?)
    }

    pub fn aircraft(&self, callsign: &str) -> Option<&Aircraft> {
        self.aircraft.iter().find(|a| a.callsign.as_str() == callsign)
    }
}
