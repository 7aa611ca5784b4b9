use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AblationError;
use crate::transcript::Transcript;

pub const WORD_MASK: &str = "[UNINTELLIGIBLE]";
pub const UTTERANCE_PLACEHOLDER: &str = "[TRANSMISSION GARBLED]";
pub const MASK_RATES: [f64; 5] = [0.10, 0.20, 0.40, 0.60, 0.80];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskScheme {
    Word,
    Utterance,
}

impl MaskScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            MaskScheme::Word => "word",
            MaskScheme::Utterance => "utterance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub scheme: MaskScheme,
    pub rate: f64,
    pub seed: u64,
    /// Replacement for a masked word, or for a whole masked cue.
    pub token: String,
}

impl MaskSpec {
    pub fn word(rate: f64, seed: u64) -> Self {
        MaskSpec { scheme: MaskScheme::Word, rate, seed, token: WORD_MASK.into() }
    }

    pub fn utterance(rate: f64, seed: u64) -> Self {
        MaskSpec { scheme: MaskScheme::Utterance, rate, seed, token: UTTERANCE_PLACEHOLDER.into() }
    }

    pub fn validate(&self) -> Result<(), AblationError> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(AblationError::Config(format!("mask rate {} outside [0, 1]", self.rate)));
        }
        if self.token.split_whitespace().count() != 1 && self.scheme == MaskScheme::Word {
            return Err(AblationError::Config("word mask token must be a single word".into()));
        }
        Ok(())
    }

    /// Items to mask out of `n`.
    pub fn count(&self, n: usize) -> usize {
        ((self.rate * n as f64).round() as usize).min(n)
    }
}

/// Replace exactly round(rate × words) whitespace-separated words, drawn
/// without replacement over the whole transcript. Timing is untouched and
/// punctuation attached to a masked word goes with it.
pub fn mask_words(t: &Transcript, spec: &MaskSpec) -> Result<Transcript, AblationError> {
    spec.validate()?;
    let words: Vec<Vec<&str>> = t.cues.iter().map(|c| c.text.split_whitespace().collect()).collect();
    let n: usize = words.iter().map(Vec::len).sum();
    let k = spec.count(n);
    if k == 0 {
        return Ok(t.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut hit = vec![false; n];
    for i in sample(&mut rng, n, k) {
        hit[i] = true;
    }
    let mut out = t.clone();
    let mut flat = 0;
    for (cue, ws) in out.cues.iter_mut().zip(&words) {
        if ws.is_empty() {
            continue;
        }
        let masked: Vec<&str> = ws
            .iter()
            .map(|w| {
                flat += 1;
                if hit[flat - 1] { spec.token.as_str() } else { w }
            })
            .collect();
        cue.text = masked.join(" ");
    }
    Ok(out)
}

/// Replace the text of exactly round(rate × cues) whole cues.
pub fn mask_utterances(t: &Transcript, spec: &MaskSpec) -> Result<Transcript, AblationError> {
    spec.validate()?;
    let n = t.cues.len();
    let k = spec.count(n);
    let mut out = t.clone();
    if k == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in sample(&mut rng, n, k) {
        out.cues[i].text = spec.token.clone();
    }
    Ok(out)
}

pub fn apply_mask(t: &Transcript, spec: &MaskSpec) -> Result<Transcript, AblationError> {
    match spec.scheme {
        MaskScheme::Word => mask_words(t, spec),
        MaskScheme::Utterance => mask_utterances(t, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ten_words() -> Transcript {
        Transcript::from_cues([
            (0, 3000, "Half Moon Bay traffic, Cessna"),
            (9000, 12000, "entering right downwind, three zero"),
        ])
    }

    #[test]
    fn exact_word_count() {
        let t = ten_words();
        assert_eq!(t.word_count(), 10);
        let m = mask_words(&t, &MaskSpec::word(0.4, 7)).unwrap();
        let masked = m.cues.iter().flat_map(|c| c.text.split_whitespace()).filter(|w| *w == WORD_MASK).count();
        assert_eq!(masked, 4);
        assert_eq!(m.word_count(), 10);
        assert_eq!(m, mask_words(&t, &MaskSpec::word(0.4, 7)).unwrap());
        assert_eq!(mask_words(&t, &MaskSpec::word(0.0, 7)).unwrap(), t);
    }

    #[test]
    fn utterance_boundaries() {
        let t = ten_words();
        let all = mask_utterances(&t, &MaskSpec::utterance(1.0, 1)).unwrap();
        assert!(all.cues.iter().all(|c| c.text == UTTERANCE_PLACEHOLDER));
        assert_eq!(all.cues.len(), 2);
        assert_eq!(all.cues[1].start_ms, 9000);
        assert!(mask_words(&t, &MaskSpec::word(1.5, 0)).is_err());
        assert_eq!(mask_words(&Transcript::default(), &MaskSpec::word(0.5, 0)).unwrap(), Transcript::default());
    }
}
