use serde::Serialize;

use super::EvalRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySummary {
    pub n: usize,
    pub mean_s: f64,
    pub p50_s: f64,
    pub p90_s: f64,
    pub max_s: f64,
}

/// Linear-interpolated percentile of `q` ∈ [0, 100].
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = (q.clamp(0.0, 100.0) / 100.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Latency over the records that reached the model; `None` when there are
/// none. CoT records already carry both turns.
pub fn latency_summary(records: &[&EvalRecord]) -> Option<LatencySummary> {
    let v: Vec<f64> = records.iter().filter(|r| r.error.is_none()).map(|r| r.latency_s).collect();
    Some(LatencySummary {
        n: v.len(),
        mean_s: v.iter().sum::<f64>() / v.len().max(1) as f64,
        p50_s: percentile(&v, 50.0)?,
        p90_s: percentile(&v, 90.0)?,
        max_s: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
