//! The seeded benchmark: class schedule, synthesis and on-disk layout.
//!
//! ```text
//! dir/manifest.csv                 id,hazard_type,label3,label_binary,split
//! dir/generation.json              the GenConfig that produced it
//! dir/scenarios/S001/metar.txt
//!                   transcript.srt
//!                   advisory.txt
//!                   meta.json       labels, aircraft and position events
//!                   adsb.json       t=0 snapshot
//! ```

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::render::{
    build_generator_user_message, cross_check, template_advisory, template_transcript,
    ADVISORY_SYSTEM_PROMPT, TRANSCRIPT_SYSTEM_PROMPT,
};
use super::script::sample_scenario;
use super::{Scenario, ScenarioError, Split};
use crate::airspace::{
    label_scenario, AdsbState, Aircraft, Airfield, HazardType, PositionEvent, SafetyLabel3,
    SafetyLabelBinary,
};
use crate::eval::{complete, ChatBackend, ChatMessage, ChatRequest, Purpose, RequestMeta, RetryPolicy};
use crate::transcript::{parse_srt, validate_timing, Transcript};

const SYNTH_TEMPERATURE: f32 = 0.7;
const SYNTH_MAX_TOKENS: u32 = 1200;
/// Extra generations allowed when a generated transcript breaks the rules.
const SYNTH_REGENERATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTargets {
    pub nominal: usize,
    pub warning: usize,
    pub hazard: usize,
}

impl Default for ClassTargets {
    fn default() -> Self {
        ClassTargets {
            nominal: 33,
            warning: 34,
            hazard: 33,
        }
    }
}

impl ClassTargets {
    pub fn total(&self) -> usize {
        self.nominal + self.warning + self.hazard
    }

    pub fn of(&self, label: SafetyLabel3) -> usize {
        match label {
            SafetyLabel3::Nominal => self.nominal,
            SafetyLabel3::Warning => self.warning,
            SafetyLabel3::Hazard => self.hazard,
        }
    }
}

/// Where transcripts and advisories come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "endpoint")]
pub enum TranscriptBackendKind {
    /// Deterministic phraseology templates; no network.
    Template,
    /// A named chat endpoint from the run configuration.
    Endpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    pub targets: ClassTargets,
    pub icl_per_class: usize,
    pub airfield: Airfield,
    pub transcripts: TranscriptBackendKind,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 20_250_601,
            targets: ClassTargets::default(),
            icl_per_class: 2,
            airfield: Airfield::khaf(),
            transcripts: TranscriptBackendKind::Template,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.airfield.validate()?;
        for label in SafetyLabel3::ALL {
            if self.targets.of(label) < self.icl_per_class + 1 {
                return Err(ScenarioError::Config(format!(
                    "{label} target {} leaves no test items after {} exemplars",
                    self.targets.of(label),
                    self.icl_per_class
                )));
            }
        }
        Ok(())
    }
}

/// Resolved synthesis backend.
pub enum SynthBackend<'a> {
    Template,
    Endpoint {
        backend: &'a dyn ChatBackend,
        policy: RetryPolicy,
    },
}

/// Per-scenario RNG seed (splitmix64 of the dataset seed and index), so a
/// single scenario can be regenerated without replaying the others.
pub fn scenario_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Class of every scenario in index order: nominal, warning, hazard in
/// turn, skipping classes whose target is met.
fn class_schedule(targets: &ClassTargets) -> Vec<SafetyLabel3> {
    let mut left = [targets.nominal, targets.warning, targets.hazard];
    let mut out = Vec::with_capacity(targets.total());
    while left.iter().any(|&n| n > 0) {
        for (k, label) in SafetyLabel3::ALL.into_iter().enumerate() {
            if left[k] > 0 {
                left[k] -= 1;
                out.push(label);
            }
        }
    }
    out
}

fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let t = t.strip_prefix("```srt").or_else(|| t.strip_prefix("```")).unwrap_or(t);
    t.strip_suffix("```").unwrap_or(t).trim()
}

fn synth_request(s: &Scenario, system: &str, purpose: Purpose) -> Result<ChatRequest, ScenarioError> {
    Ok(ChatRequest {
        messages: vec![
            ChatMessage::system(system),
            ChatMessage::user(build_generator_user_message(s)?),
        ],
        temperature: SYNTH_TEMPERATURE,
        max_tokens: SYNTH_MAX_TOKENS,
        want_logprobs: false,
        meta: RequestMeta {
            scenario_id: Some(s.id.clone()),
            framing: None,
            purpose,
        },
    })
}

/// Rule breaches that force a regeneration. Missing position calls are
/// tolerated: the generator is told to cover key events only.
fn transcript_defects(s: &Scenario, t: &Transcript) -> Vec<String> {
    let mut out: Vec<String> = validate_timing(t).iter().map(|v| format!("{v:?}")).collect();
    if !t.starts_at_zero() {
        out.push("first cue does not start at 00:00:00,000".into());
    }
    out.extend(cross_check(s, t).into_iter().filter(|p| !p.starts_with("no call")));
    out
}

/// SRT text for a sampled scenario.
pub fn synthesize_transcript(
    s: &Scenario,
    airfield: &Airfield,
    synth: &SynthBackend<'_>,
) -> Result<String, ScenarioError> {
    match synth {
        SynthBackend::Template => template_transcript(s, airfield),
        SynthBackend::Endpoint { backend, policy } => {
            let req = synth_request(s, TRANSCRIPT_SYSTEM_PROMPT, Purpose::Transcript)?;
            let mut last = String::new();
            for attempt in 0..=SYNTH_REGENERATIONS {
                let reply = complete(*backend, &req, policy)?;
                let srt = strip_fences(&reply.text);
                match parse_srt(srt) {
                    Ok(t) => {
                        let defects = transcript_defects(s, &t);
                        if defects.is_empty() {
                            return Ok(srt.to_string());
                        }
                        last = defects.join("; ");
                    }
                    Err(e) => last = e.to_string(),
                }
                tracing::warn!(id = %s.id, attempt, problem = %last, "regenerating transcript");
            }
            Err(ScenarioError::Timing {
                id: s.id.clone(),
                attempts: SYNTH_REGENERATIONS + 1,
                violations: last,
            })
        }
    }
}

pub fn synthesize_advisory(
    s: &Scenario,
    airfield: &Airfield,
    synth: &SynthBackend<'_>,
) -> Result<String, ScenarioError> {
    match synth {
        SynthBackend::Template => template_advisory(s, airfield),
        SynthBackend::Endpoint { backend, policy } => {
            let req = synth_request(s, ADVISORY_SYSTEM_PROMPT, Purpose::Advisory)?;
            Ok(complete(*backend, &req, policy)?.text.trim().to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub config: GenConfig,
    pub scenarios: Vec<Scenario>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn icl(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter().filter(|s| s.split == Split::Icl)
    }

    pub fn test(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter().filter(|s| s.split == Split::Test)
    }

    pub fn count(&self, label: SafetyLabel3) -> usize {
        self.scenarios.iter().filter(|s| s.label3 == label).count()
    }
}

/// Generate the full benchmark.
pub fn build_dataset(cfg: &GenConfig, synth: &SynthBackend<'_>) -> Result<Dataset, ScenarioError> {
    cfg.validate()?;
    let af = &cfg.airfield;
    let mut used = [0usize; 3];
    let mut scenarios = Vec::with_capacity(cfg.targets.total());
    for (index, label) in class_schedule(&cfg.targets).into_iter().enumerate() {
        let k = SafetyLabel3::ALL.iter().position(|l| *l == label).expect("known class");
        let kinds = HazardType::of_class(label);
        let hazard = kinds[used[k] % kinds.len()];
        let split = if used[k] < cfg.icl_per_class { Split::Icl } else { Split::Test };
        used[k] += 1;

        let id = format!("S{:03}", index + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed(cfg.seed, index));
        let mut s = sample_scenario(&mut rng, hazard, af, &id)?;
        s.split = split;
        s.transcript = synthesize_transcript(&s, af, synth)?;
        s.advisory = synthesize_advisory(&s, af, synth)?;
        verify(&s, af, matches!(synth, SynthBackend::Template))?;
        tracing::debug!(%id, %hazard, "scenario ready");
        scenarios.push(s);
    }
    Ok(Dataset {
        config: cfg.clone(),
        scenarios,
    })
}

fn verify(s: &Scenario, af: &Airfield, strict: bool) -> Result<(), ScenarioError> {
    let bad = |message: String| ScenarioError::Inconsistent {
        id: s.id.clone(),
        message,
    };
    let label = label_scenario(af, &s.events, &s.aircraft, &s.metar()?)?;
    if label != s.label3 || s.hazard_type.label() != label {
        return Err(bad(format!("rules say {label}, stored {}", s.label3)));
    }
    if s.label_binary != label.into() {
        return Err(bad("binary label disagrees with three-class label".into()));
    }
    let problems = cross_check(s, &s.parsed_transcript()?);
    if !problems.is_empty() {
        if strict {
            return Err(bad(problems.join("; ")));
        }
        tracing::warn!(id = %s.id, problems = %problems.join("; "), "transcript omits events");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub hazard_type: HazardType,
    pub label3: SafetyLabel3,
    pub label_binary: SafetyLabelBinary,
    pub split: Split,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    id: String,
    hazard_type: HazardType,
    label3: SafetyLabel3,
    label_binary: SafetyLabelBinary,
    split: Split,
    duration_s: u32,
    metar_decoded: String,
    aircraft: Vec<Aircraft>,
    events: Vec<PositionEvent>,
}

pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<(), ScenarioError> {
    let root = dir.join("scenarios");
    fs::create_dir_all(&root)?;
    fs::write(dir.join("generation.json"), serde_json::to_string_pretty(&ds.config)?)?;
    let mut manifest = csv::Writer::from_path(dir.join("manifest.csv"))?;
    for s in &ds.scenarios {
        manifest.serialize(ManifestRow {
            id: s.id.clone(),
            hazard_type: s.hazard_type,
            label3: s.label3,
            label_binary: s.label_binary,
            split: s.split,
        })?;
        let d = root.join(&s.id);
        fs::create_dir_all(&d)?;
        fs::write(d.join("metar.txt"), format!("{}\n", s.metar_raw))?;
        fs::write(d.join("transcript.srt"), &s.transcript)?;
        fs::write(d.join("advisory.txt"), format!("{}\n", s.advisory))?;
        let meta = Meta {
            id: s.id.clone(),
            hazard_type: s.hazard_type,
            label3: s.label3,
            label_binary: s.label_binary,
            split: s.split,
            duration_s: s.duration_s,
            metar_decoded: s.metar_decoded.clone(),
            aircraft: s.aircraft.clone(),
            events: s.events.clone(),
        };
        fs::write(d.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        fs::write(d.join("adsb.json"), serde_json::to_string_pretty(&s.adsb)?)?;
    }
    manifest.flush()?;
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset, ScenarioError> {
    let config: GenConfig = match fs::read_to_string(dir.join("generation.json")) {
        Ok(text) => serde_json::from_str(&text)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => GenConfig::default(),
        Err(e) => return Err(e.into()),
    };
    let mut scenarios = Vec::new();
    for row in csv::Reader::from_path(dir.join("manifest.csv"))?.deserialize() {
        let row: ManifestRow = row?;
        let d = dir.join("scenarios").join(&row.id);
        let meta: Meta = serde_json::from_str(&fs::read_to_string(d.join("meta.json"))?)?;
        if meta.id != row.id || meta.label3 != row.label3 || meta.split != row.split {
            return Err(ScenarioError::Inconsistent {
                id: row.id,
                message: "meta.json disagrees with manifest.csv".into(),
            });
        }
        let adsb: Vec<AdsbState> = serde_json::from_str(&fs::read_to_string(d.join("adsb.json"))?)?;
        scenarios.push(Scenario {
            id: row.id,
            hazard_type: row.hazard_type,
            label3: row.label3,
            label_binary: row.label_binary,
            metar_raw: fs::read_to_string(d.join("metar.txt"))?.trim().to_string(),
            metar_decoded: meta.metar_decoded,
            duration_s: meta.duration_s,
            aircraft: meta.aircraft,
            events: meta.events,
            adsb,
            transcript: fs::read_to_string(d.join("transcript.srt"))?,
            advisory: fs::read_to_string(d.join("advisory.txt"))?.trim().to_string(),
            split: row.split,
        });
    }
    Ok(Dataset { config, scenarios })
}
