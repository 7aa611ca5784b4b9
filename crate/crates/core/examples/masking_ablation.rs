//! Word- and utterance-level masking of one generated transcript.

use ctaf::ablation::{mask_utterances, mask_words, MaskSpec};
use ctaf::scenario::{build_dataset, GenConfig, SynthBackend};
use ctaf::transcript::emit_srt;

fn main() -> anyhow::Result<()> {
    let ds = build_dataset(&GenConfig::default(), &SynthBackend::Template)?;
    let s = ds.test().next().unwrap();
    let t = s.parsed_transcript()?;
    println!("original ({} words):\n{}", t.word_count(), emit_srt(&t));

    let words = mask_words(&t, &MaskSpec::word(0.4, 1))?;
    println!("40% of words masked:\n{}", emit_srt(&words));

    let utts = mask_utterances(&t, &MaskSpec::utterance(0.4, 1))?;
    println!("40% of transmissions dropped:\n{}", emit_srt(&utts));
    Ok(())
}
