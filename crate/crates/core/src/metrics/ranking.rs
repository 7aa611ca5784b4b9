//! Threshold-free ranking metrics over (score, is_positive) pairs.

use serde::Serialize;

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

/// Groups of equal score, highest first, as (score, positives, negatives).
fn tie_groups(points: &[(f64, bool)]) -> Vec<(f64, u64, u64)> {
    let mut sorted: Vec<(f64, bool)> = points.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, u64, u64)> = Vec::new();
    for (s, pos) in sorted {
        match out.last_mut() {
            Some(g) if g.0 == s => {
                if pos {
                    g.1 += 1
                } else {
                    g.2 += 1
                }
            }
            _ => out.push((s, u64::from(pos), u64::from(!pos))),
        }
    }
    out
}

fn class_totals(points: &[(f64, bool)]) -> Result<(u64, u64), MetricsError> {
    if points.iter().any(|p| p.0.is_nan()) {
        return Err(MetricsError::Undefined("NaN score"));
    }
    let p = points.iter().filter(|x| x.1).count() as u64;
    let n = points.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(MetricsError::Undefined("AUROC/AP need both classes"));
    }
    Ok((p, n))
}

/// Mann–Whitney AUROC: the share of positive/negative pairs ranked
/// correctly, ties counting one half.
pub fn auroc(points: &[(f64, bool)]) -> Result<f64, MetricsError> {
    let (p, n) = class_totals(points)?;
    // Twice the U statistic, kept integral so ties are exact.
    let mut u2: u64 = 0;
    let mut negatives_below = n;
    for (_, gp, gn) in tie_groups(points) {
        negatives_below -= gn;
        u2 += gp * (2 * negatives_below + gn);
    }
    Ok(u2 as f64 / (2 * p * n) as f64)
}

/// ROC points (FPR, TPR) at every distinct score threshold, from (0, 0).
pub fn roc_curve(points: &[(f64, bool)]) -> Result<Vec<CurvePoint>, MetricsError> {
    let (p, n) = class_totals(points)?;
    let mut out = vec![CurvePoint { threshold: f64::INFINITY, x: 0.0, y: 0.0 }];
    let (mut tp, mut fp) = (0, 0);
    for (s, gp, gn) in tie_groups(points) {
        tp += gp;
        fp += gn;
        out.push(CurvePoint { threshold: s, x: fp as f64 / n as f64, y: tp as f64 / p as f64 });
    }
    Ok(out)
}

/// Precision-recall points (recall, precision) at every distinct threshold
/// and the step-interpolated average precision Σ (Rₖ − Rₖ₋₁)·Pₖ.
pub fn pr_curve(points: &[(f64, bool)]) -> Result<(Vec<CurvePoint>, f64), MetricsError> {
    let (p, _) = class_totals(points)?;
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (s, gp, gn) in tie_groups(points) {
        tp += gp;
        fp += gn;
        let recall = tp as f64 / p as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        out.push(CurvePoint { threshold: s, x: recall, y: precision });
    }
    Ok((out, ap))
}

pub fn average_precision(points: &[(f64, bool)]) -> Result<f64, MetricsError> {
    pr_curve(points).map(|(_, ap)| ap)
}
