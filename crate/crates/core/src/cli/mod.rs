//! The `ctaf` command line: `gen`, `eval`, `ablate` and `report`.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

pub use config::{AblationConfig, RunConfig};

use crate::ablation::{ablation_table, run_ablation, AblationOptions};
use crate::airspace::SafetyLabel3;
use crate::eval::{
    assemble_qualitative_prompt, complete, load_records, run_matrix, ChatBackend, ChatRequest, ImageAttachment,
    MatrixOptions, ModelEndpoint, Purpose, RequestMeta, RetryPolicy,
};
use crate::metrics::report;
use crate::scenario::{build_dataset, load_dataset, save_dataset, Dataset, GenConfig, SynthBackend, TranscriptBackendKind};

#[derive(Debug, Parser)]
#[command(name = "ctaf", version, about = "CTAF safety scenarios and LLM evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the dataset seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the scenario dataset.
    Gen,
    /// Run the evaluation matrix, then write the report.
    Eval {
        /// Send one qualitative query per scenario with this chart or map
        /// image attached instead of running the matrix.
        #[arg(long)]
        attach_image: Option<PathBuf>,
        /// Scenarios for the qualitative pass (default: first test item).
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
        /// Stop after this many new queries; rerun to resume.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Run the configured ablation plans.
    Ablate,
    /// Rebuild tables and figures from a records file.
    Report {
        /// Defaults to `<out>/records.jsonl`.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

fn load_config(g: &GlobalArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Gen => cmd_gen(&cfg).map(|_| ()),
        Command::Eval { attach_image: Some(image), scenarios, .. } => cmd_qualitative(&cfg, &image, &scenarios),
        Command::Eval { attach_image: None, limit, .. } => cmd_eval(&cfg, limit),
        Command::Ablate => cmd_ablate(&cfg),
        Command::Report { records } => cmd_report(&cfg, records.as_deref()),
    }
}

/// "100 scenarios (33/34/33), icl=6, test=94"
pub fn dataset_summary(ds: &Dataset) -> String {
    let c = |l| ds.count(l);
    format!(
        "{} scenarios ({}/{}/{}), icl={}, test={}",
        ds.scenarios.len(),
        c(SafetyLabel3::Nominal),
        c(SafetyLabel3::Warning),
        c(SafetyLabel3::Hazard),
        ds.icl().count(),
        ds.test().count()
    )
}

fn empty_dataset(cfg: GenConfig) -> Dataset {
    Dataset { config: cfg, scenarios: Vec::new() }
}

/// Build and save the dataset. A no-op when the directory already holds a
/// dataset generated from the same settings.
pub fn cmd_gen(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    cfg.prepare_out_dir()?;
    let gen = cfg.gen_config();
    let dir = cfg.dataset_dir();
    if dir.join("manifest.csv").exists() {
        let existing = load_dataset(&dir).with_context(|| format!("reading {}", dir.display()))?;
        if existing.config != gen {
            bail!("{} holds a dataset from different settings; remove it or choose another --out", dir.display());
        }
        println!("{} (up to date)", dataset_summary(&existing));
        return Ok(existing);
    }
    let ds = match &gen.transcripts {
        TranscriptBackendKind::Template => build_dataset(&gen, &SynthBackend::Template)?,
        TranscriptBackendKind::Endpoint(name) => {
            let backend = cfg.endpoint(name)?.build(&empty_dataset(gen.clone()))?;
            build_dataset(&gen, &SynthBackend::Endpoint { backend: backend.as_ref(), policy: RetryPolicy::default() })?
        }
    };
    save_dataset(&ds, &dir)?;
    println!("{}", dataset_summary(&ds));
    Ok(ds)
}

fn dataset_for(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let dir = cfg.dataset_dir();
    load_dataset(&dir).with_context(|| format!("no dataset at {}; run `ctaf gen` first", dir.display()))
}

fn backends(cfg: &RunConfig, names: &[String], ds: &Dataset) -> anyhow::Result<Vec<(ModelEndpoint, Box<dyn ChatBackend>)>> {
    names
        .iter()
        .map(|n| {
            let ep = cfg.endpoint(n)?.clone();
            let b = ep.build(ds)?;
            Ok((ep, b))
        })
        .collect()
}

pub fn cmd_eval(cfg: &RunConfig, limit: Option<usize>) -> anyhow::Result<()> {
    cfg.prepare_out_dir()?;
    let ds = dataset_for(cfg)?;
    let built = backends(cfg, &cfg.eval_models(), &ds)?;
    if built.is_empty() {
        bail!("no endpoints configured");
    }
    let pairs: Vec<(&ModelEndpoint, &dyn ChatBackend)> = built.iter().map(|(e, b)| (e, b.as_ref())).collect();
    let mut opts = MatrixOptions::new(cfg.records_path());
    opts.framings = cfg.framings.clone();
    opts.strategies = cfg.strategies.clone();
    opts.protocols = cfg.protocols.clone();
    opts.settings = cfg.eval.clone();
    opts.limit = limit;
    let s = run_matrix(&ds, &pairs, &opts)?;
    println!(
        "{} conditions, {} records expected: {} new, {} already done, {} parse failures, {} errors, {} leakage violations",
        s.conditions, s.expected, s.completed, s.skipped, s.parse_failures, s.errors, s.leakage_violations
    );
    if !s.finished {
        println!("matrix incomplete; rerun to resume");
        return Ok(());
    }
    let records: Vec<_> = load_records(&opts.records_path)?.into_iter().filter(|r| r.variant.is_none()).collect();
    let files = report(&records, &cfg.out_dir.join("report"), Some(&ds))?;
    println!("report: {} files in {}", files.files.len(), files.dir.display());
    Ok(())
}

/// One qualitative query per scenario and model, with the image attached.
/// Replies are written to `<out>/qualitative/`.
pub fn cmd_qualitative(cfg: &RunConfig, image: &Path, scenarios: &[String]) -> anyhow::Result<()> {
    cfg.prepare_out_dir()?;
    let ds = dataset_for(cfg)?;
    let attachment = ImageAttachment::from_path(image)?;
    let ids: Vec<String> = if scenarios.is_empty() {
        ds.test().take(1).map(|s| s.id.clone()).collect()
    } else {
        scenarios.to_vec()
    };
    let dir = cfg.out_dir.join("qualitative");
    fs::create_dir_all(&dir)?;
    let framing = cfg.framings[0];
    for (ep, backend) in backends(cfg, &cfg.eval_models(), &ds)? {
        for id in &ids {
            let s = ds.get(id).with_context(|| format!("unknown scenario {id}"))?;
            let req = ChatRequest {
                messages: assemble_qualitative_prompt(framing, s, Some(attachment.clone())),
                temperature: cfg.eval.temperature,
                max_tokens: cfg.eval.cot_max_tokens,
                want_logprobs: false,
                meta: RequestMeta { scenario_id: Some(id.clone()), framing: Some(framing), purpose: Purpose::Verdict },
            };
            let reply = complete(backend.as_ref(), &req, &cfg.eval.retry)?;
            let path = dir.join(format!("{}_{id}.txt", ep.name));
            fs::write(&path, &reply.text)?;
            println!("{} {id}: {:.2}s -> {}", ep.name, reply.latency_s, path.display());
        }
    }
    Ok(())
}

pub fn cmd_ablate(cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.prepare_out_dir()?;
    if cfg.ablation.plans.is_empty() {
        bail!("no ablation plans configured");
    }
    let ds = dataset_for(cfg)?;
    let built = backends(cfg, &cfg.ablation_models(), &ds)?;
    let pairs: Vec<(&ModelEndpoint, &dyn ChatBackend)> = built.iter().map(|(e, b)| (e, b.as_ref())).collect();
    let mut opts = AblationOptions::new(cfg.out_dir.join("ablation_records.jsonl"), cfg.out_dir.join("ablation_work"));
    opts.framing = cfg.ablation.framing;
    opts.protocols = cfg.ablation.protocols.clone();
    opts.settings = cfg.eval.clone();
    for plan in &cfg.ablation.plans {
        for (variant, s) in run_ablation(&ds, &pairs, plan, &opts)? {
            println!("{variant}: {} new, {} done, {} errors", s.completed, s.skipped, s.errors);
        }
    }
    let records = load_records(&opts.records_path)?;
    let table = ablation_table(&records, &cfg.out_dir.join("ablation_report"))?;
    let files = report(&records, &cfg.out_dir.join("ablation_report"), Some(&ds))?;
    println!("ablation table: {}; {} report files", table.display(), files.files.len());
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig, records: Option<&Path>) -> anyhow::Result<()> {
    let path = records.map(Path::to_path_buf).unwrap_or_else(|| cfg.records_path());
    if !path.exists() {
        bail!("{} does not exist", path.display());
    }
    let records = load_records(&path)?;
    if records.is_empty() {
        bail!("{} holds no records", path.display());
    }
    let ds = load_dataset(&cfg.dataset_dir()).ok();
    let files = report(&records, &cfg.out_dir.join("report"), ds.as_ref())?;
    println!("report: {} files in {}", files.files.len(), files.dir.display());
    Ok(())
}
