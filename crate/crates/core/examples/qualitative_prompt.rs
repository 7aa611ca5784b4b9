//! Show the messages of a few-shot prompt and of the qualitative prompt
//! (with ADS-B snapshot and an optional image).
//!
//!     cargo run --example qualitative_prompt -- chart.png

use ctaf::eval::{assemble_prompt, assemble_qualitative_prompt, ImageAttachment, Strategy, TaskFraming};
use ctaf::scenario::{build_dataset, GenConfig, SynthBackend};

fn main() -> anyhow::Result<()> {
    let ds = build_dataset(&GenConfig::default(), &SynthBackend::Template)?;
    let pool: Vec<_> = ds.icl().cloned().collect();
    let target = ds.test().next().unwrap();

    let fs = assemble_prompt(TaskFraming::ThreeClass, Strategy::FewShot, target, &pool)?;
    println!("few-shot prompt: {} messages", fs.len());
    for m in &fs {
        println!("[{}] {} chars", m.role.as_str(), m.content.len());
    }

    let image = std::env::args().nth(1).map(|p| ImageAttachment::from_path(p.as_ref())).transpose()?;
    for m in assemble_qualitative_prompt(TaskFraming::Binary, target, image) {
        println!("\n[{}]{}\n{}", m.role.as_str(), if m.image.is_some() { " +image" } else { "" }, m.content);
    }
    Ok(())
}
