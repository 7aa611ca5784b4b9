//! Run configuration, read from a single TOML file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ablation::AblationPlan;
use crate::eval::{EvalSettings, ModelEndpoint, Protocol, Strategy, TaskFraming};
use crate::scenario::{GenConfig, TranscriptBackendKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    /// Endpoints to perturb; defaults to `models`.
    pub models: Vec<String>,
    pub framing: TaskFraming,
    pub protocols: Vec<Protocol>,
    pub plans: Vec<AblationPlan>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            models: Vec::new(),
            framing: TaskFraming::ThreeClass,
            protocols: vec![Protocol::Direct],
            plans: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Overrides `gen.seed` when set.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Defaults to `<out_dir>/dataset`.
    pub dataset: Option<PathBuf>,
    pub framings: Vec<TaskFraming>,
    pub strategies: Vec<Strategy>,
    pub protocols: Vec<Protocol>,
    /// Endpoints to evaluate, in table order; defaults to every endpoint.
    pub models: Vec<String>,
    pub gen: GenConfig,
    pub eval: EvalSettings,
    pub endpoints: BTreeMap<String, ModelEndpoint>,
    pub ablation: AblationConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            out_dir: PathBuf::from("runs/khaf"),
            dataset: None,
            framings: vec![TaskFraming::Binary],
            strategies: Strategy::ALL.to_vec(),
            protocols: Protocol::ALL.to_vec(),
            models: Vec::new(),
            gen: GenConfig::default(),
            eval: EvalSettings::default(),
            endpoints: BTreeMap::new(),
            ablation: AblationConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    /// Parse and normalise: endpoint names come from their table keys.
    pub fn from_toml(text: &str) -> anyhow::Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        for (key, ep) in cfg.endpoints.iter_mut() {
            if ep.name.is_empty() {
                ep.name = key.clone();
            } else if ep.name != *key {
                anyhow::bail!("endpoint table {key:?} names itself {:?}", ep.name);
            }
        }
        Ok(cfg)
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.dataset.clone().unwrap_or_else(|| self.out_dir.join("dataset"))
    }

    pub fn records_path(&self) -> PathBuf {
        self.out_dir.join("records.jsonl")
    }

    pub fn gen_config(&self) -> GenConfig {
        let mut g = self.gen.clone();
        if let Some(seed) = self.seed {
            g.seed = seed;
        }
        g
    }

    pub fn eval_models(&self) -> Vec<String> {
        if self.models.is_empty() {
            self.endpoints.keys().cloned().collect()
        } else {
            self.models.clone()
        }
    }

    pub fn ablation_models(&self) -> Vec<String> {
        if self.ablation.models.is_empty() {
            self.eval_models()
        } else {
            self.ablation.models.clone()
        }
    }

    pub fn endpoint(&self, name: &str) -> anyhow::Result<&ModelEndpoint> {
        self.endpoints
            .get(name)
            .ok_or_else(|| anyhow::anyhow!("endpoint {name:?} is referenced but not defined"))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for name in self.eval_models().iter().chain(&self.ablation_models()) {
            self.endpoint(name)?;
        }
        if let TranscriptBackendKind::Endpoint(name) = &self.gen.transcripts {
            self.endpoint(name)?;
        }
        for ep in self.endpoints.values() {
            ep.validate()?;
        }
        self.gen_config().validate()?;
        if self.framings.is_empty() || self.strategies.is_empty() || self.protocols.is_empty() {
            anyhow::bail!("framings, strategies and protocols must be non-empty");
        }
        Ok(())
    }

    /// Create the output directory and make sure it accepts files.
    pub fn prepare_out_dir(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| anyhow::anyhow!("output dir {}: {e}", self.out_dir.display()))?;
        let probe = self.out_dir.join(".write-test");
        fs::write(&probe, b"")
            .and_then(|_| fs::remove_file(&probe))
            .map_err(|e| anyhow::anyhow!("output dir {} is not writable: {e}", self.out_dir.display()))
    }
}
