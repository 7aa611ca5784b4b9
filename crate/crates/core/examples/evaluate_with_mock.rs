//! Run the full prompting grid against an offline oracle that flips 10% of
//! the gold labels, then print macro-F1 per setting.

use ctaf::eval::{run_matrix, ChatBackend, MatrixOptions, ModelEndpoint, OracleMock, TaskFraming};
use ctaf::metrics::condition_metrics;
use ctaf::scenario::{build_dataset, GenConfig, SynthBackend};

fn main() -> anyhow::Result<()> {
    let ds = build_dataset(&GenConfig::default(), &SynthBackend::Template)?;
    let ep = ModelEndpoint::oracle("oracle-10", 0.10);
    let mock = OracleMock::from_dataset(&ep.name, &ds, ep.error_rate, 42);

    let dir = tempfile_dir()?;
    let mut opts = MatrixOptions::new(dir.join("records.jsonl"));
    opts.framings = TaskFraming::ALL.to_vec();
    let summary = run_matrix(&ds, &[(&ep, &mock as &dyn ChatBackend)], &opts)?;
    println!("{summary:?}");

    let records = ctaf::eval::load_records(&opts.records_path)?;
    for m in condition_metrics(&records)? {
        println!("{:<12} {:<7} macro-F1 {:.3}  acc {:.3}  AUROC {}", m.condition.framing, m.condition.setting(), m.macro_f1, m.accuracy, m.auroc_cell());
    }
    Ok(())
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("ctaf-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
