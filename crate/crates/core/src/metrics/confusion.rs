use serde::Serialize;

use super::{EvalRecord, MetricsError};
use crate::eval::{Label, TaskFraming};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScores {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Counts by gold row and predicted column, plus a per-gold count of
/// replies with no usable label. Those count against recall of their gold
/// class and are never a prediction of any class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub framing: TaskFraming,
    pub counts: Vec<Vec<u64>>,
    pub unparsed: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(framing: TaskFraming) -> Self {
        let k = framing.classes().len();
        ConfusionMatrix {
            framing,
            counts: vec![vec![0; k]; k],
            unparsed: vec![0; k],
        }
    }

    /// Binary matrix from TN/FP/FN/TP counts.
    pub fn from_binary(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        ConfusionMatrix {
            framing: TaskFraming::Binary,
            counts: vec![vec![tn, fp], vec![fn_, tp]],
            unparsed: vec![0, 0],
        }
    }

    pub fn classes(&self) -> &'static [Label] {
        self.framing.classes()
    }

    fn index(&self, label: Label) -> Result<usize, MetricsError> {
        self.classes()
            .iter()
            .position(|c| *c == label)
            .ok_or_else(|| MetricsError::ForeignLabel {
                label: label.as_str().into(),
                framing: self.framing.as_str().into(),
            })
    }

    pub fn add(&mut self, gold: Label, pred: Option<Label>) -> Result<(), MetricsError> {
        let g = self.index(gold)?;
        match pred {
            Some(p) => {
                let p = self.index(p)?;
                self.counts[g][p] += 1;
            }
            None => self.unparsed[g] += 1,
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.unparsed.iter().sum::<u64>()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, k: usize) -> u64 {
        self.counts[k].iter().sum::<u64>() + self.unparsed[k]
    }

    pub fn predicted(&self, k: usize) -> u64 {
        self.counts.iter().map(|row| row[k]).sum()
    }

    /// One-vs-rest scores; a class nobody holds or predicts scores 0.
    pub fn per_class(&self) -> Vec<ClassScores> {
        self.classes()
            .iter()
            .enumerate()
            .map(|(k, &label)| {
                let tp = self.counts[k][k] as f64;
                let (sup, pred) = (self.support(k) as f64, self.predicted(k) as f64);
                let ratio = |d: f64| if d > 0.0 { tp / d } else { 0.0 };
                ClassScores {
                    label,
                    precision: ratio(pred),
                    recall: ratio(sup),
                    f1: if sup + pred > 0.0 { 2.0 * tp / (sup + pred) } else { 0.0 },
                    support: self.support(k),
                }
            })
            .collect()
    }

    pub fn f1(&self, label: Label) -> Option<f64> {
        self.per_class().into_iter().find(|c| c.label == label).map(|c| c.f1)
    }

    pub fn macro_f1(&self) -> f64 {
        let pc = self.per_class();
        pc.iter().map(|c| c.f1).sum::<f64>() / pc.len() as f64
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }

    /// Rows as fractions of each gold class (recall view); the last column
    /// is the unparsed share.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        (0..self.counts.len())
            .map(|g| {
                let sup = self.support(g) as f64;
                self.counts[g]
                    .iter()
                    .chain(std::iter::once(&self.unparsed[g]))
                    .map(|&c| if sup > 0.0 { c as f64 / sup } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// (TN, FP, FN, TP) as fractions of the true-nominal (N) and
    /// true-danger (D) totals. Binary framing only.
    pub fn binary_rates(&self) -> Option<[f64; 4]> {
        if self.framing != TaskFraming::Binary {
            return None;
        }
        let (n, d) = (self.support(0) as f64, self.support(1) as f64);
        let r = |c: u64, of: f64| if of > 0.0 { c as f64 / of } else { 0.0 };
        Some([
            r(self.counts[0][0], n),
            r(self.counts[0][1], n),
            r(self.counts[1][0], d),
            r(self.counts[1][1], d),
        ])
    }
}

/// Confusion matrix for the records of one condition.
pub fn confusion(records: &[&EvalRecord]) -> Result<ConfusionMatrix, MetricsError> {
    let first = records.first().ok_or(MetricsError::Empty)?;
    let mut cm = ConfusionMatrix::new(first.condition.framing);
    for r in records {
        if r.condition != first.condition || r.variant != first.variant {
            return Err(MetricsError::MixedConditions(first.condition.to_string(), r.condition.to_string()));
        }
        cm.add(r.gold, r.pred)?;
    }
    Ok(cm)
}
