//! Generate the 100-scenario dataset with template transcripts and save it.
//!
//!     cargo run --example generate_dataset -- /tmp/khaf

use ctaf::airspace::SafetyLabel3;
use ctaf::scenario::{build_dataset, save_dataset, GenConfig, SynthBackend};

fn main() -> anyhow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "runs/example/dataset".into());
    let ds = build_dataset(&GenConfig::default(), &SynthBackend::Template)?;
    for l in SafetyLabel3::ALL {
        println!("{l:>8}: {}", ds.count(l));
    }
    println!("icl {} / test {}", ds.icl().count(), ds.test().count());

    let s = ds.test().next().unwrap();
    println!("\n{} ({}, {})\n{}\n{}", s.id, s.label3, s.hazard_type.as_str(), s.metar_raw, s.transcript);

    save_dataset(&ds, dir.as_ref())?;
    println!("saved to {dir}");
    Ok(())
}
