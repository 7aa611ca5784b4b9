//! Metrics straight from a confusion matrix, and ranking metrics from
//! scored predictions.

use ctaf::eval::Label;
use ctaf::metrics::{auroc, pr_curve, roc_curve, ConfusionMatrix};

fn main() -> anyhow::Result<()> {
    // TN, FP, FN, TP
    let cm = ConfusionMatrix::from_binary(29, 2, 1, 62);
    for c in cm.per_class() {
        println!("{:<8} P {:.3} R {:.3} F1 {:.3} (n={})", c.label, c.precision, c.recall, c.f1, c.support);
    }
    println!("macro-F1 {:.3}, accuracy {:.3}", cm.macro_f1(), cm.accuracy());
    println!("danger F1 {:.3}", cm.f1(Label::Danger).unwrap());
    if let Some([tn, fp, fn_, tp]) = cm.binary_rates() {
        println!("TN {:.1}% FP {:.1}% FN {:.1}% TP {:.1}%", 100.0 * tn, 100.0 * fp, 100.0 * fn_, 100.0 * tp);
    }

    let scored = [(0.95, true), (0.80, true), (0.70, false), (0.60, true), (0.40, false), (0.40, true), (0.10, false)];
    println!("\nAUROC {:.4}", auroc(&scored)?);
    let (pr, ap) = pr_curve(&scored)?;
    println!("AP {ap:.4} over {} PR points", pr.len());
    for p in roc_curve(&scored)? {
        println!("  thr {:>5.2}  fpr {:.3}  tpr {:.3}", p.threshold, p.x, p.y);
    }
    Ok(())
}
