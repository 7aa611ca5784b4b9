//! Input perturbations and zero-shot re-evaluation over them: transcript
//! masking, audio noise through an external transcriber, and swapped-in
//! transcript sets from other ASR systems.
//!
//! Only test scenarios are perturbed. Exemplars stay clean.

mod mask;
mod noise;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{
    run_matrix, ChatBackend, EvalError, EvalSettings, MatrixOptions, MatrixSummary, ModelEndpoint, Protocol, Strategy,
    TaskFraming,
};
use crate::metrics::{condition_metrics, EvalRecord, MetricsError};
use crate::scenario::{Dataset, Split};
use crate::transcript::{emit_srt, parse_srt, TranscriptError};

pub use mask::{apply_mask, mask_utterances, mask_words, MaskScheme, MaskSpec, MASK_RATES, UTTERANCE_PLACEHOLDER, WORD_MASK};
pub use noise::{inject_noise, inject_noise_wav, read_wav, rms, write_wav, NoiseSpec, NOISE_LEVELS};

#[derive(Debug, Error)]
pub enum AblationError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("audio: {0}")]
    Audio(String),
    #[error("transcriber failed on {path}: {reason}")]
    Transcriber { path: PathBuf, reason: String },
    #[error("scenario {id}: {source}")]
    Transcript { id: String, source: TranscriptError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::ZeroShot]
}

fn default_protocols() -> Vec<Protocol> {
    vec![Protocol::Direct]
}

fn default_mask_rates() -> Vec<f64> {
    MASK_RATES.to_vec()
}

fn default_noise_levels() -> Vec<f64> {
    NOISE_LEVELS.to_vec()
}

/// One perturbation family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AblationPlan {
    Masking {
        scheme: MaskScheme,
        #[serde(default = "default_mask_rates")]
        rates: Vec<f64>,
        #[serde(default = "default_strategies")]
        strategies: Vec<Strategy>,
        #[serde(default)]
        seed: u64,
    },
    /// Clean audio is read from `audio_dir/<id>.wav`. `transcriber` is a
    /// shell command; `{audio}` is replaced by the noisy file's path and
    /// the command must print SRT on stdout.
    Noise {
        audio_dir: PathBuf,
        #[serde(default)]
        transcriber: Option<String>,
        #[serde(default = "default_noise_levels")]
        levels: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
    /// Ready-made transcript sets, one directory each holding `<id>.srt`.
    AsrSwap {
        sets: BTreeMap<String, PathBuf>,
        #[serde(default = "default_strategies")]
        strategies: Vec<Strategy>,
    },
}

#[derive(Debug, Clone)]
pub struct AblationOptions {
    pub framing: TaskFraming,
    pub protocols: Vec<Protocol>,
    pub settings: EvalSettings,
    pub records_path: PathBuf,
    /// Scratch space for noisy audio.
    pub work_dir: PathBuf,
}

impl AblationOptions {
    pub fn new(records_path: impl Into<PathBuf>, work_dir: impl Into<PathBuf>) -> Self {
        AblationOptions {
            framing: TaskFraming::ThreeClass,
            protocols: default_protocols(),
            settings: EvalSettings::default(),
            records_path: records_path.into(),
            work_dir: work_dir.into(),
        }
    }
}

/// Per-scenario seed so masks differ across scenarios but not across runs.
fn scenario_seed(seed: u64, id: &str, salt: f64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in id.bytes().chain(salt.to_bits().to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn with_test_transcripts<F>(ds: &Dataset, mut f: F) -> Result<Dataset, AblationError>
where
    F: FnMut(&crate::scenario::Scenario) -> Result<String, AblationError>,
{
    let mut out = ds.clone();
    for s in out.scenarios.iter_mut().filter(|s| s.split == Split::Test) {
        s.transcript = f(s)?;
    }
    Ok(out)
}

fn transcribe(template: &str, audio: &Path) -> Result<String, AblationError> {
    let fail = |reason: String| AblationError::Transcriber { path: audio.to_path_buf(), reason };
    let out = Command::new("sh")
        .arg("-c")
        .arg(template.replace("{audio}", "\"$CTAF_AUDIO\""))
        .env("CTAF_AUDIO", audio)
        .output()
        .map_err(|e| fail(e.to_string()))?;
    if !out.status.success() {
        return Err(fail(format!("{}: {}", out.status, String::from_utf8_lossy(&out.stderr).trim())));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| fail(e.to_string()))?;
    parse_srt(&text).map_err(|e| fail(e.to_string()))?;
    Ok(text)
}

/// Variant tag for one perturbation level, e.g. `mask_word_0.40`.
pub fn variant_name(plan: &AblationPlan, level: &str) -> String {
    match plan {
        AblationPlan::Masking { scheme, .. } => format!("mask_{}_{level}", scheme.as_str()),
        AblationPlan::Noise { .. } => format!("noise_{level}"),
        AblationPlan::AsrSwap { .. } => format!("asr_{level}"),
    }
}

/// Perturbed copies of the dataset, one per level, with their variant tags
/// and the strategies to run.
pub fn perturbed_datasets(
    ds: &Dataset,
    plan: &AblationPlan,
    work_dir: &Path,
) -> Result<Vec<(String, Dataset, Vec<Strategy>)>, AblationError> {
    let parse = |s: &crate::scenario::Scenario| {
        parse_srt(&s.transcript).map_err(|source| AblationError::Transcript { id: s.id.clone(), source })
    };
    let mut out = Vec::new();
    match plan {
        AblationPlan::Masking { scheme, rates, strategies, seed } => {
            for &rate in rates {
                let spec = match scheme {
                    MaskScheme::Word => MaskSpec::word(rate, 0),
                    MaskScheme::Utterance => MaskSpec::utterance(rate, 0),
                };
                spec.validate()?;
                let masked = with_test_transcripts(ds, |s| {
                    let spec = MaskSpec { seed: scenario_seed(*seed, &s.id, rate), ..spec.clone() };
                    Ok(emit_srt(&apply_mask(&parse(s)?, &spec)?))
                })?;
                out.push((variant_name(plan, &format!("{rate:.2}")), masked, strategies.clone()));
            }
        }
        AblationPlan::Noise { audio_dir, transcriber, levels, seed } => {
            let template = transcriber
                .as_deref()
                .filter(|t| !t.trim().is_empty())
                .ok_or_else(|| AblationError::Config("noise ablation needs a transcriber command".into()))?;
            for &nsr in levels {
                let dir = work_dir.join(format!("noise_{nsr:.2}"));
                fs::create_dir_all(&dir)?;
                let noisy = with_test_transcripts(ds, |s| {
                    let clean = audio_dir.join(format!("{}.wav", s.id));
                    let path = dir.join(format!("{}.wav", s.id));
                    inject_noise_wav(&clean, &path, &NoiseSpec { nsr, seed: scenario_seed(*seed, &s.id, nsr) })?;
                    transcribe(template, &path)
                })?;
                // Noise runs are zero-shot only.
                out.push((variant_name(plan, &format!("{nsr:.2}")), noisy, vec![Strategy::ZeroShot]));
            }
        }
        AblationPlan::AsrSwap { sets, strategies } => {
            for (name, dir) in sets {
                let swapped = with_test_transcripts(ds, |s| {
                    let path = dir.join(format!("{}.srt", s.id));
                    let text = fs::read_to_string(&path)
                        .map_err(|e| AblationError::Config(format!("{}: {e}", path.display())))?;
                    parse_srt(&text).map_err(|source| AblationError::Transcript { id: s.id.clone(), source })?;
                    Ok(text)
                })?;
                out.push((variant_name(plan, name), swapped, strategies.clone()));
            }
        }
    }
    Ok(out)
}

/// Run one plan for every endpoint. Records land in the shared records
/// file tagged with their variant, so runs resume like the main matrix.
pub fn run_ablation(
    ds: &Dataset,
    endpoints: &[(&ModelEndpoint, &dyn ChatBackend)],
    plan: &AblationPlan,
    opts: &AblationOptions,
) -> Result<Vec<(String, MatrixSummary)>, AblationError> {
    let mut out = Vec::new();
    for (variant, data, strategies) in perturbed_datasets(ds, plan, &opts.work_dir)? {
        let mut m = MatrixOptions::new(&opts.records_path);
        m.framings = vec![opts.framing];
        m.strategies = strategies;
        m.protocols = opts.protocols.clone();
        m.settings = opts.settings.clone();
        m.variant = Some(variant.clone());
        let summary = run_matrix(&data, endpoints, &m)?;
        tracing::info!(%variant, completed = summary.completed, "ablation level done");
        out.push((variant, summary));
    }
    Ok(out)
}

/// Macro-F1 and per-class F1 for every ablation variant, written as
/// `ablation.csv` in `out_dir`.
pub fn ablation_table(records: &[EvalRecord], out_dir: &Path) -> Result<PathBuf, AblationError> {
    let tagged: Vec<EvalRecord> = records.iter().filter(|r| r.variant.is_some()).cloned().collect();
    let metrics = condition_metrics(&tagged)?;
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("ablation.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| MetricsError::Io(e.to_string()))?;
    let io = |e: csv::Error| AblationError::Metrics(MetricsError::Io(e.to_string()));
    w.write_record(["variant", "model", "framing", "setting", "n", "macro_f1", "accuracy", "per_class_f1"]).map_err(io)?;
    for m in &metrics {
        let per_class: Vec<String> = m.per_class.iter().map(|c| format!("{}={:.3}", c.label, c.f1)).collect();
        w.write_record([
            m.variant.clone().unwrap_or_default(),
            m.condition.model.clone(),
            m.condition.framing.to_string(),
            m.condition.setting(),
            m.n.to_string(),
            format!("{:.3}", m.macro_f1),
            format!("{:.3}", m.accuracy),
            per_class.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::OracleMock;
    use crate::scenario::{build_dataset, ClassTargets, GenConfig, SynthBackend};

    fn ds() -> Dataset {
        let cfg = GenConfig {
            targets: ClassTargets { nominal: 3, warning: 3, hazard: 3 },
            ..GenConfig::default()
        };
        build_dataset(&cfg, &SynthBackend::Template).unwrap()
    }

    #[test]
    fn masking_plan_groups() {
        let ds = ds();
        let dir = tempfile::tempdir().unwrap();
        let plan = AblationPlan::Masking { scheme: MaskScheme::Word, rates: MASK_RATES.to_vec(), strategies: default_strategies(), seed: 1 };
        let eps: Vec<ModelEndpoint> = ["a", "b", "c"].iter().map(|n| ModelEndpoint::oracle(n, 0.1)).collect();
        let mocks: Vec<OracleMock> = eps.iter().map(|e| OracleMock::from_dataset(&e.name, &ds, 0.1, 0)).collect();
        let pairs: Vec<(&ModelEndpoint, &dyn ChatBackend)> = eps.iter().zip(&mocks).map(|(e, m)| (e, m as &dyn ChatBackend)).collect();
        let opts = AblationOptions::new(dir.path().join("r.jsonl"), dir.path().join("work"));
        let out = run_ablation(&ds, &pairs, &plan, &opts).unwrap();
        assert_eq!(out.len(), 5);
        let records = crate::eval::load_records(&opts.records_path).unwrap();
        let groups = crate::metrics::group_by_condition(&records);
        assert_eq!(groups.len(), 15);
        assert!(groups.values().all(|g| g.len() == 3));
        let table = ablation_table(&records, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(table).unwrap().lines().count(), 16);
    }

    #[test]
    fn noise_needs_transcriber() {
        let plan = AblationPlan::Noise { audio_dir: "audio".into(), transcriber: None, levels: vec![0.1], seed: 0 };
        let err = perturbed_datasets(&ds(), &plan, Path::new("/tmp")).unwrap_err();
        assert!(matches!(err, AblationError::Config(_)));
    }

    #[test]
    fn asr_swap_reads_sets_verbatim() {
        let ds = ds();
        let dir = tempfile::tempdir().unwrap();
        let mut sets = BTreeMap::new();
        for name in ["base", "medium", "large-v3"] {
            let d = dir.path().join(name);
            fs::create_dir_all(&d).unwrap();
            for s in ds.test() {
                fs::write(d.join(format!("{}.srt", s.id)), format!("1\n00:00:00,000 --> 00:00:03,000\n{name} says hi\n")).unwrap();
            }
            sets.insert(name.to_string(), d);
        }
        let plan = AblationPlan::AsrSwap { sets, strategies: default_strategies() };
        let out = perturbed_datasets(&ds, &plan, dir.path()).unwrap();
        assert_eq!(out.len(), 3);
        let (name, data, _) = &out[0];
        assert_eq!(name, "asr_base");
        assert!(data.test().all(|s| s.transcript.contains("base says hi")));
        assert!(data.icl().all(|s| !s.transcript.contains("says hi")));
    }

    #[test]
    fn plan_parses_from_toml() {
        let p: AblationPlan = toml::from_str("kind = \"masking\"\nscheme = \"utterance\"\n").unwrap();
        assert_eq!(p, AblationPlan::Masking { scheme: MaskScheme::Utterance, rates: MASK_RATES.to_vec(), strategies: vec![Strategy::ZeroShot], seed: 0 });
    }
}
