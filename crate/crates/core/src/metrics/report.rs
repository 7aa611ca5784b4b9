//! Per-condition metrics and the CSV/SVG report.
//!
//! Numbers are carried at full precision and rounded to three decimals only
//! when written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::confusion::{confusion, ClassScores, ConfusionMatrix};
use super::latency::{latency_summary, LatencySummary};
use super::ranking::{auroc, pr_curve, roc_curve, CurvePoint};
use super::svg::{grouped_bars, line_panels, Panel, Series};
use super::{group_by_condition, EvalRecord, MetricsError};
use crate::airspace::HazardType;
use crate::eval::{Condition, Label, Protocol, ScoreSource, Strategy, TaskFraming};
use crate::scenario::Dataset;

/// Marker for conditions whose ranking score comes from self-reported
/// confidence rather than token logprobs.
pub const CONF_MARKER: &str = "conf*";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionMetrics {
    pub variant: Option<String>,
    pub condition: Condition,
    pub n: usize,
    pub cm: ConfusionMatrix,
    pub per_class: Vec<ClassScores>,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `None` when the test set holds a single class.
    pub auroc: Option<f64>,
    pub average_precision: Option<f64>,
    pub roc: Vec<CurvePoint>,
    pub pr: Vec<CurvePoint>,
    /// True when any parsed reply was scored from its stated confidence.
    pub confidence_fallback: bool,
    pub parse_failures: usize,
    pub errors: usize,
    pub latency: Option<LatencySummary>,
}

impl ConditionMetrics {
    pub fn auroc_cell(&self) -> String {
        match self.auroc {
            Some(a) if self.confidence_fallback => format!("{a:.3} {CONF_MARKER}"),
            Some(a) => format!("{a:.3}"),
            None => String::new(),
        }
    }

    pub fn f1(&self, label: Label) -> Option<f64> {
        self.per_class.iter().find(|c| c.label == label).map(|c| c.f1)
    }
}

/// Position in table order: direct ZS, OS, FS then CoT ZS, OS, FS.
fn grid_index(c: &Condition) -> usize {
    let s = Strategy::ALL.iter().position(|x| *x == c.strategy).unwrap_or(0);
    let p = Protocol::ALL.iter().position(|x| *x == c.protocol).unwrap_or(0);
    p * Strategy::ALL.len() + s
}

fn settings_header() -> Vec<String> {
    Protocol::ALL
        .iter()
        .flat_map(|&protocol| {
            Strategy::ALL.iter().map(move |&strategy| {
                Condition { model: String::new(), framing: TaskFraming::Binary, strategy, protocol }.setting()
            })
        })
        .collect()
}

/// Metrics for every (variant, condition) present in `records`.
pub fn condition_metrics(records: &[EvalRecord]) -> Result<Vec<ConditionMetrics>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut out = Vec::new();
    for ((variant, condition), group) in group_by_condition(records) {
        let cm = confusion(&group)?;
        let points: Vec<(f64, bool)> = group.iter().map(|r| (r.score_danger, r.is_positive())).collect();
        let (auroc, roc) = match (auroc(&points), roc_curve(&points)) {
            (Ok(a), Ok(c)) => (Some(a), c),
            _ => (None, Vec::new()),
        };
        let (pr, ap) = match pr_curve(&points) {
            Ok((c, ap)) => (c, Some(ap)),
            Err(_) => (Vec::new(), None),
        };
        out.push(ConditionMetrics {
            n: group.len(),
            per_class: cm.per_class(),
            macro_f1: cm.macro_f1(),
            accuracy: cm.accuracy(),
            auroc,
            average_precision: ap,
            roc,
            pr,
            confidence_fallback: group
                .iter()
                .any(|r| r.pred.is_some() && r.score_source == ScoreSource::ConfidenceFallback),
            parse_failures: group.iter().filter(|r| r.parse_failure).count(),
            errors: group.iter().filter(|r| r.error.is_some()).count(),
            latency: latency_summary(&group),
            cm,
            variant,
            condition,
        });
    }
    Ok(out)
}

/// The best run of one model: highest macro-F1 at presentation precision,
/// ties going to the later cell in table order.
pub fn best_run<'a>(
    metrics: &'a [ConditionMetrics],
    model: &str,
    framing: TaskFraming,
    variant: Option<&str>,
) -> Option<&'a ConditionMetrics> {
    metrics
        .iter()
        .filter(|m| m.condition.model == model && m.condition.framing == framing && m.variant.as_deref() == variant)
        .max_by_key(|m| ((m.macro_f1 * 1000.0).round() as i64, grid_index(&m.condition)))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportFiles {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn opt3(x: Option<f64>) -> String {
    x.map(f3).unwrap_or_default()
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), MetricsError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), MetricsError> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Write every table and figure for `records` into `out_dir`. Pass the
/// dataset to get per-hazard accuracy.
pub fn report(records: &[EvalRecord], out_dir: &Path, dataset: Option<&Dataset>) -> Result<ReportFiles, MetricsError> {
    let metrics = condition_metrics(records)?;
    fs::create_dir_all(out_dir)?;
    let mut w = Writer { dir: out_dir, files: Vec::new() };

    // Models in order of first appearance, so the config order survives.
    let mut models: Vec<String> = Vec::new();
    for r in records {
        if !models.contains(&r.condition.model) {
            models.push(r.condition.model.clone());
        }
    }

    let all_labels = [Label::Nominal, Label::Danger, Label::Warning, Label::Hazard];
    let mut header = strs(&["variant", "model", "framing", "setting", "n", "macro_f1", "accuracy", "auroc", "average_precision"]);
    header.extend(all_labels.iter().map(|l| format!("f1_{l}")));
    header.extend(strs(&["score_source", "parse_failures", "errors", "latency_mean_s"]));
    let rows: Vec<Vec<String>> = metrics
        .iter()
        .map(|m| {
            let mut row = vec![
                m.variant.clone().unwrap_or_default(),
                m.condition.model.clone(),
                m.condition.framing.to_string(),
                m.condition.setting(),
                m.n.to_string(),
                f3(m.macro_f1),
                f3(m.accuracy),
                opt3(m.auroc),
                opt3(m.average_precision),
            ];
            row.extend(all_labels.iter().map(|&l| opt3(m.f1(l))));
            row.push(if m.confidence_fallback { CONF_MARKER.into() } else { "logprob".into() });
            row.push(m.parse_failures.to_string());
            row.push(m.errors.to_string());
            row.push(opt3(m.latency.as_ref().map(|l| l.mean_s)));
            row
        })
        .collect();
    w.csv("summary.csv", &header, &rows)?;

    let mut variants: Vec<Option<String>> = metrics.iter().map(|m| m.variant.clone()).collect();
    variants.dedup();
    variants.sort();
    variants.dedup();
    let settings = settings_header();

    for variant in &variants {
        for framing in TaskFraming::ALL {
            let here: Vec<&ConditionMetrics> = metrics
                .iter()
                .filter(|m| m.variant == *variant && m.condition.framing == framing)
                .collect();
            if here.is_empty() {
                continue;
            }
            let stem = match variant {
                Some(v) => format!("{}_{}", sanitize(v), framing),
                None => framing.to_string(),
            };
            let present: Vec<&String> = models.iter().filter(|m| here.iter().any(|c| c.condition.model == **m)).collect();
            let cell = |model: &str, setting: &str| -> Option<&ConditionMetrics> {
                here.iter().copied().find(|m| m.condition.model == model && m.condition.setting() == setting)
            };
            let grid_rows = |f: &dyn Fn(&ConditionMetrics) -> String, label: &str| -> Vec<Vec<String>> {
                present
                    .iter()
                    .map(|model| {
                        let mut row = vec![model.to_string(), label.to_string()];
                        row.extend(settings.iter().map(|s| cell(model, s).map(f).unwrap_or_default()));
                        row
                    })
                    .collect()
            };

            // Main table: macro-F1, accuracy, AUROC per model and setting.
            let mut header = strs(&["model", "metric"]);
            header.extend(settings.iter().cloned());
            let mut rows = Vec::new();
            for model in &present {
                for (label, f) in [
                    ("macro_f1", &(|m: &ConditionMetrics| f3(m.macro_f1)) as &dyn Fn(&ConditionMetrics) -> String),
                    ("accuracy", &|m: &ConditionMetrics| f3(m.accuracy)),
                    ("auroc", &|m: &ConditionMetrics| m.auroc_cell()),
                ] {
                    let mut row = vec![model.to_string(), label.to_string()];
                    row.extend(settings.iter().map(|s| cell(model, s).map(f).unwrap_or_default()));
                    rows.push(row);
                }
            }
            w.csv(&format!("table1_main_{stem}.csv"), &header, &rows)?;

            // Per-class F1.
            let mut rows = Vec::new();
            for model in &present {
                for &class in framing.classes() {
                    let mut row = vec![model.to_string(), class.to_string()];
                    row.extend(settings.iter().map(|s| cell(model, s).and_then(|m| m.f1(class)).map(f3).unwrap_or_default()));
                    rows.push(row);
                }
            }
            let mut header = strs(&["model", "class"]);
            header.extend(settings.iter().cloned());
            w.csv(&format!("table2_per_class_{stem}.csv"), &header, &rows)?;

            // Confusion of each model's best run.
            let bests: Vec<&ConditionMetrics> = present
                .iter()
                .filter_map(|model| best_run(&metrics, model, framing, variant.as_deref()))
                .collect();
            if framing == TaskFraming::Binary {
                let header = strs(&["model", "best_run", "TN", "FP", "FN", "TP", "TN_rate", "FP_rate", "TP_rate", "FN_rate", "unparsed"]);
                let rows: Vec<Vec<String>> = bests
                    .iter()
                    .map(|m| {
                        let c = &m.cm.counts;
                        let [tn, fp, fn_, tp] = m.cm.binary_rates().expect("binary");
                        vec![
                            m.condition.model.clone(),
                            m.condition.setting(),
                            c[0][0].to_string(),
                            c[0][1].to_string(),
                            c[1][0].to_string(),
                            c[1][1].to_string(),
                            pct(tn),
                            pct(fp),
                            pct(tp),
                            pct(fn_),
                            m.cm.unparsed.iter().sum::<u64>().to_string(),
                        ]
                    })
                    .collect();
                w.csv(&format!("table3_confusion_{stem}.csv"), &header, &rows)?;
            } else {
                let classes = framing.classes();
                let mut header = strs(&["model", "best_run", "gold"]);
                header.extend(classes.iter().map(|c| format!("pred_{c}")));
                header.push("unparsed".into());
                header.extend(classes.iter().map(|c| format!("pct_{c}")));
                header.push("pct_unparsed".into());
                let mut rows = Vec::new();
                for m in &bests {
                    let norm = m.cm.row_normalized();
                    for (g, class) in classes.iter().enumerate() {
                        let mut row = vec![m.condition.model.clone(), m.condition.setting(), class.to_string()];
                        row.extend(m.cm.counts[g].iter().map(|c| c.to_string()));
                        row.push(m.cm.unparsed[g].to_string());
                        row.extend(norm[g].iter().map(|&x| pct(x)));
                        rows.push(row);
                    }
                }
                w.csv(&format!("table3_confusion_{stem}.csv"), &header, &rows)?;
            }

            // Latency. Conditions with no successful record are left blank.
            let mut header = strs(&["model", "stat"]);
            header.extend(settings.iter().cloned());
            let mut rows = Vec::new();
            for (label, f) in [
                ("mean_s", &(|l: &LatencySummary| l.mean_s) as &dyn Fn(&LatencySummary) -> f64),
                ("p50_s", &|l: &LatencySummary| l.p50_s),
                ("p90_s", &|l: &LatencySummary| l.p90_s),
            ] {
                rows.extend(grid_rows(&|m: &ConditionMetrics| m.latency.as_ref().map(|l| f3(f(l))).unwrap_or_default(), label));
            }
            rows.sort_by_key(|r| present.iter().position(|m| **m == r[0]));
            w.csv(&format!("table4_latency_{stem}.csv"), &header, &rows)?;

            // Curve data for best runs.
            let mut rows = Vec::new();
            for m in &bests {
                for (name, curve) in [("roc", &m.roc), ("pr", &m.pr)] {
                    for p in curve.iter() {
                        rows.push(vec![
                            m.condition.model.clone(),
                            m.condition.setting(),
                            name.to_string(),
                            if p.threshold.is_finite() { format!("{:.6}", p.threshold) } else { "inf".into() },
                            format!("{:.6}", p.x),
                            format!("{:.6}", p.y),
                        ]);
                    }
                }
            }
            w.csv(&format!("curves_{stem}.csv"), &strs(&["model", "best_run", "curve", "threshold", "x", "y"]), &rows)?;

            let legend = |m: &ConditionMetrics, value: Option<f64>, what: &str| {
                let marker = if m.confidence_fallback { format!(" {CONF_MARKER}") } else { String::new() };
                format!("{} {} ({what} {}){marker}", m.condition.model, m.condition.setting(), opt3(value))
            };
            let pr_roc = line_panels(&[
                Panel {
                    title: format!("Precision-recall ({framing})"),
                    x_label: "recall".into(),
                    y_label: "precision".into(),
                    series: bests
                        .iter()
                        .filter(|m| !m.pr.is_empty())
                        .map(|m| Series { name: legend(m, m.average_precision, "AP"), points: m.pr.iter().map(|p| (p.x, p.y)).collect() })
                        .collect(),
                    diagonal: false,
                },
                Panel {
                    title: format!("ROC ({framing})"),
                    x_label: "false positive rate".into(),
                    y_label: "true positive rate".into(),
                    series: bests
                        .iter()
                        .filter(|m| !m.roc.is_empty())
                        .map(|m| Series { name: legend(m, m.auroc, "AUROC"), points: m.roc.iter().map(|p| (p.x, p.y)).collect() })
                        .collect(),
                    diagonal: true,
                },
            ]);
            w.text(&format!("fig_pr_roc_{stem}.svg"), &pr_roc)?;

            // Macro-F1 against strategy, direct and CoT panels.
            let strategy_panel = |protocol: Protocol| Panel {
                title: format!("{} ({framing})", if protocol == Protocol::Cot { "CoT" } else { "Direct" }),
                x_label: "ZS / OS / FS".into(),
                y_label: "macro-F1".into(),
                series: present
                    .iter()
                    .map(|model| Series {
                        name: model.to_string(),
                        points: Strategy::ALL
                            .iter()
                            .enumerate()
                            .filter_map(|(i, &strategy)| {
                                let c = Condition { model: model.to_string(), framing, strategy, protocol };
                                here.iter().find(|m| m.condition == c).map(|m| (i as f64 / 2.0, m.macro_f1))
                            })
                            .collect(),
                    })
                    .collect(),
                diagonal: false,
            };
            w.text(
                &format!("fig_strategy_{stem}.svg"),
                &line_panels(&[strategy_panel(Protocol::Direct), strategy_panel(Protocol::Cot)]),
            )?;

            // CoT minus direct macro-F1 per strategy. Negative deltas are
            // listed in the CSV; bars show magnitude only above zero.
            let mut delta_rows = Vec::new();
            let delta_series: Vec<Series> = present
                .iter()
                .map(|model| Series {
                    name: model.to_string(),
                    points: Strategy::ALL
                        .iter()
                        .enumerate()
                        .map(|(i, &strategy)| {
                            let get = |protocol| {
                                let c = Condition { model: model.to_string(), framing, strategy, protocol };
                                here.iter().find(|m| m.condition == c).map(|m| m.macro_f1)
                            };
                            let d = match (get(Protocol::Cot), get(Protocol::Direct)) {
                                (Some(a), Some(b)) => a - b,
                                _ => f64::NAN,
                            };
                            if d.is_finite() {
                                delta_rows.push(vec![model.to_string(), strategy.short().to_string(), format!("{d:+.3}")]);
                            }
                            (i as f64, d)
                        })
                        .collect(),
                })
                .collect();
            w.csv(&format!("cot_delta_{stem}.csv"), &strs(&["model", "strategy", "delta_macro_f1"]), &delta_rows)?;
            let shifted: Vec<Series> = delta_series
                .into_iter()
                .map(|s| Series { name: s.name, points: s.points.into_iter().map(|(x, d)| (x, 0.5 + d / 2.0)).collect() })
                .collect();
            let cats: Vec<String> = Strategy::ALL.iter().map(|s| s.short().to_string()).collect();
            w.text(
                &format!("fig_cot_delta_{stem}.svg"),
                &grouped_bars(&format!("CoT minus direct macro-F1 ({framing}; 0.5 = no change)"), "0.5 + delta/2", &cats, &shifted),
            )?;

            if let Some(ds) = dataset {
                let mut rows = Vec::new();
                let mut series = Vec::new();
                let cats: Vec<String> = HazardType::ALL.iter().map(|h| h.to_string()).collect();
                for m in &bests {
                    let group: Vec<&EvalRecord> = records
                        .iter()
                        .filter(|r| r.variant == m.variant && r.condition == m.condition)
                        .collect();
                    let mut tally: BTreeMap<HazardType, (usize, usize)> = BTreeMap::new();
                    for r in group {
                        if let Some(s) = ds.get(&r.scenario_id) {
                            let e = tally.entry(s.hazard_type).or_default();
                            e.0 += 1;
                            e.1 += usize::from(r.is_correct());
                        }
                    }
                    let mut points = Vec::new();
                    for (i, h) in HazardType::ALL.iter().enumerate() {
                        let acc = tally.get(h).map(|&(n, ok)| {
                            rows.push(vec![
                                m.condition.model.clone(),
                                m.condition.setting(),
                                h.to_string(),
                                n.to_string(),
                                ok.to_string(),
                                f3(ok as f64 / n as f64),
                            ]);
                            ok as f64 / n as f64
                        });
                        points.push((i as f64, acc.unwrap_or(f64::NAN)));
                    }
                    series.push(Series { name: format!("{} {}", m.condition.model, m.condition.setting()), points });
                }
                w.csv(
                    &format!("per_hazard_{stem}.csv"),
                    &strs(&["model", "best_run", "hazard_type", "n", "correct", "accuracy"]),
                    &rows,
                )?;
                w.text(
                    &format!("fig_per_hazard_{stem}.svg"),
                    &grouped_bars(&format!("Per-hazard accuracy, best runs ({framing})"), "accuracy", &cats, &series),
                )?;
            }
        }
    }
    Ok(ReportFiles { dir: out_dir.to_path_buf(), files: w.files })
}
