//! The model × framing × strategy × protocol grid over the test split.
//!
//! Records are appended to a JSON-lines file as they complete, so an
//! interrupted run resumes by skipping keys already present. When the run
//! finishes the file is rewritten in canonical order, one record per key.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};

use super::{
    run_protocol, ChatBackend, Condition, EvalError, EvalSettings, ModelEndpoint, Protocol,
    ScoreSource, Strategy, TaskFraming,
};
use crate::metrics::{EvalRecord, RecordKey};
use crate::scenario::{Dataset, Scenario, Split};

#[derive(Debug, Clone)]
pub struct MatrixOptions {
    pub framings: Vec<TaskFraming>,
    pub strategies: Vec<Strategy>,
    pub protocols: Vec<Protocol>,
    pub settings: EvalSettings,
    pub records_path: PathBuf,
    /// Tag stamped on every record, e.g. an ablation setting.
    pub variant: Option<String>,
    /// Stop after issuing this many new queries (for staged runs).
    pub limit: Option<usize>,
}

impl MatrixOptions {
    pub fn new(records_path: impl Into<PathBuf>) -> Self {
        MatrixOptions {
            framings: vec![TaskFraming::Binary],
            strategies: Strategy::ALL.to_vec(),
            protocols: Protocol::ALL.to_vec(),
            settings: EvalSettings::default(),
            records_path: records_path.into(),
            variant: None,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatrixSummary {
    pub conditions: usize,
    /// Records the finished grid should contain.
    pub expected: usize,
    pub skipped: usize,
    pub completed: usize,
    pub parse_failures: usize,
    pub errors: usize,
    pub leakage_violations: usize,
    /// True when every expected key has a successful record on disk.
    pub finished: bool,
}

/// Read a records file. A truncated final line (from a killed writer) is
/// ignored; any other malformed line is an error.
pub fn load_records(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                tracing::warn!(path = %path.display(), error = %e, "dropping truncated last record");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Latest record per key, successful records preferred, in key order.
fn canonical(records: Vec<EvalRecord>) -> Vec<EvalRecord> {
    let mut best: BTreeMap<RecordKey, EvalRecord> = BTreeMap::new();
    for r in records {
        let key = r.key();
        match best.get(&key) {
            Some(prev) if prev.error.is_none() && r.error.is_some() => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    best.into_values().collect()
}

fn write_canonical(path: &Path, records: &[EvalRecord]) -> Result<(), EvalError> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

/// Every test scenario must be absent from the exemplar pool.
fn leaks(target: &Scenario, pool: &[Scenario]) -> bool {
    target.split != Split::Test || pool.iter().any(|p| p.id == target.id)
}

struct Job<'a> {
    condition: Condition,
    scenario: &'a Scenario,
}

fn evaluate(
    backend: &dyn ChatBackend,
    job: &Job<'_>,
    pool: &[Scenario],
    opts: &MatrixOptions,
    leak_count: &AtomicUsize,
) -> EvalRecord {
    let c = &job.condition;
    let s = job.scenario;
    let gold = c.framing.gold(s.label3);
    let failed = |error: String| EvalRecord {
        scenario_id: s.id.clone(),
        condition: c.clone(),
        variant: opts.variant.clone(),
        gold,
        pred: None,
        confidence: None,
        score_danger: 0.5,
        score_source: ScoreSource::ConfidenceFallback,
        latency_s: 0.0,
        parse_failure: false,
        error: Some(error),
        reasoning: None,
    };
    if leaks(s, pool) {
        leak_count.fetch_add(1, Ordering::Relaxed);
        return failed(format!("ICL leakage: {} is in the exemplar pool", s.id));
    }
    match run_protocol(backend, c.framing, c.strategy, c.protocol, s, pool, &opts.settings) {
        Ok(v) => EvalRecord {
            scenario_id: s.id.clone(),
            condition: c.clone(),
            variant: opts.variant.clone(),
            gold,
            pred: v.label,
            confidence: v.confidence,
            score_danger: v.score_danger,
            score_source: v.score_source,
            latency_s: v.latency_s,
            parse_failure: v.label.is_none(),
            error: None,
            reasoning: v.reasoning,
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Run (or resume) the grid for every endpoint. Per-record failures are
/// recorded and counted; only I/O problems abort.
pub fn run_matrix(
    ds: &Dataset,
    endpoints: &[(&ModelEndpoint, &dyn ChatBackend)],
    opts: &MatrixOptions,
) -> Result<MatrixSummary, EvalError> {
    let pool: Vec<Scenario> = ds.icl().cloned().collect();
    let tests: Vec<&Scenario> = ds.test().collect();
    if let Some(dir) = opts.records_path.parent() {
        fs::create_dir_all(dir)?;
    }
    let existing = load_records(&opts.records_path)?;
    let done: HashSet<RecordKey> = existing.iter().filter(|r| r.error.is_none()).map(EvalRecord::key).collect();

    let mut summary = MatrixSummary::default();
    let mut queues = Vec::new();
    for (ep, backend) in endpoints {
        ep.validate()?;
        let mut q = VecDeque::new();
        for c in Condition::grid(&ep.name, &opts.framings) {
            if !opts.strategies.contains(&c.strategy) || !opts.protocols.contains(&c.protocol) {
                continue;
            }
            summary.conditions += 1;
            for s in &tests {
                summary.expected += 1;
                let key = RecordKey {
                    variant: opts.variant.clone(),
                    condition: c.clone(),
                    scenario_id: s.id.clone(),
                };
                if done.contains(&key) {
                    summary.skipped += 1;
                } else {
                    q.push_back(Job { condition: c.clone(), scenario: s });
                }
            }
        }
        queues.push((*ep, *backend, Mutex::new(q)));
    }

    let budget = AtomicUsize::new(opts.limit.unwrap_or(usize::MAX));
    let leak_count = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<EvalRecord>();
    let file = OpenOptions::new().create(true).append(true).open(&opts.records_path)?;

    let written = std::thread::scope(|scope| -> Result<Vec<EvalRecord>, EvalError> {
        let writer = scope.spawn(move || -> Result<Vec<EvalRecord>, EvalError> {
            let mut w = BufWriter::new(file);
            let mut got = Vec::new();
            for r in rx {
                serde_json::to_writer(&mut w, &r)?;
                w.write_all(b"\n")?;
                w.flush()?;
                got.push(r);
            }
            Ok(got)
        });
        for (ep, backend, queue) in &queues {
            for _ in 0..ep.max_parallel {
                let tx = tx.clone();
                let (pool, budget, leak_count) = (&pool, &budget, &leak_count);
                scope.spawn(move || loop {
                    let job = {
                        let mut q = queue.lock().expect("not poisoned");
                        if q.is_empty() || budget.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |b| b.checked_sub(1)).is_err() {
                            break;
                        }
                        q.pop_front().expect("non-empty")
                    };
                    let record = evaluate(*backend, &job, pool, opts, leak_count);
                    if tx.send(record).is_err() {
                        break;
                    }
                });
            }
        }
        drop(tx);
        writer.join().expect("writer thread")
    })?;

    summary.completed = written.iter().filter(|r| r.error.is_none()).count();
    summary.parse_failures = written.iter().filter(|r| r.parse_failure).count();
    summary.errors = written.iter().filter(|r| r.error.is_some()).count();
    summary.leakage_violations = leak_count.load(Ordering::Relaxed);

    let all = canonical(load_records(&opts.records_path)?);
    summary.finished = summary.skipped + summary.completed == summary.expected;
    write_canonical(&opts.records_path, &all)?;
    tracing::info!(?summary, "matrix pass done");
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::OracleMock;
    use crate::scenario::{build_dataset, ClassTargets, GenConfig, SynthBackend};

    fn ds() -> Dataset {
        let cfg = GenConfig {
            targets: ClassTargets { nominal: 4, warning: 4, hazard: 4 },
            ..GenConfig::default()
        };
        build_dataset(&cfg, &SynthBackend::Template).unwrap()
    }

    #[test]
    fn resume_makes_no_duplicate_calls() {
        let ds = ds();
        let ep = ModelEndpoint::oracle("oracle", 0.2);
        let dir = tempfile::tempdir().unwrap();

        let whole = OracleMock::from_dataset("oracle", &ds, 0.2, 0);
        let opts = MatrixOptions::new(dir.path().join("a.jsonl"));
        let s = run_matrix(&ds, &[(&ep, &whole)], &opts).unwrap();
        assert!(s.finished);
        assert_eq!(s.expected, 6 * 6);
        let once = fs::read(&opts.records_path).unwrap();

        let staged = OracleMock::from_dataset("oracle", &ds, 0.2, 0);
        let mut opts = MatrixOptions::new(dir.path().join("b.jsonl"));
        opts.limit = Some(10);
        let s = run_matrix(&ds, &[(&ep, &staged)], &opts).unwrap();
        assert!(!s.finished);
        opts.limit = None;
        let s = run_matrix(&ds, &[(&ep, &staged)], &opts).unwrap();
        assert!(s.finished);
        assert_eq!(s.skipped, 10);
        assert_eq!(staged.calls(), whole.calls());
        assert_eq!(fs::read(&opts.records_path).unwrap(), once);
    }

    #[test]
    fn truncated_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        fs::write(&p, "{\"scenario_id\": \"S0").unwrap();
        assert!(load_records(&p).unwrap().is_empty());
        fs::write(&p, "garbage\n").unwrap();
        assert!(load_records(&p).is_err());
    }
}
