//! Additive white Gaussian noise on 16-bit PCM.
//!
//! NSR is an amplitude ratio: RMS(noise) / RMS(signal).

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::AblationError;

pub const NOISE_LEVELS: [f64; 5] = [0.05, 0.10, 0.25, 0.50, 0.75];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub nsr: f64,
    pub seed: u64,
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Add seeded Gaussian noise scaled so that its RMS is exactly `nsr` times
/// the input RMS, then re-quantize with clipping.
pub fn inject_noise(samples: &[i16], spec: &NoiseSpec) -> Result<Vec<i16>, AblationError> {
    if !(spec.nsr >= 0.0 && spec.nsr.is_finite()) {
        return Err(AblationError::Config(format!("NSR {} must be a finite non-negative number", spec.nsr)));
    }
    let x: Vec<f64> = samples.iter().map(|&s| f64::from(s)).collect();
    let signal = rms(&x);
    if signal == 0.0 {
        return Err(AblationError::Audio("signal is silent; NSR is undefined".into()));
    }
    if spec.nsr == 0.0 {
        return Ok(samples.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n: Vec<f64> = (0..x.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let g = spec.nsr * signal / rms(&n);
    Ok(x
        .iter()
        .zip(&n)
        .map(|(s, e)| (s + g * e).round().clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16)
        .collect())
}

pub fn read_wav(path: &Path) -> Result<(Vec<i16>, hound::WavSpec), AblationError> {
    let mut r = hound::WavReader::open(path).map_err(|e| AblationError::Audio(format!("{}: {e}", path.display())))?;
    let spec = r.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AblationError::Audio(format!("{}: expected 16-bit PCM", path.display())));
    }
    let samples = r
        .samples::<i16>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| AblationError::Audio(e.to_string()))?;
    Ok((samples, spec))
}

pub fn write_wav(path: &Path, samples: &[i16], spec: hound::WavSpec) -> Result<(), AblationError> {
    let audio = |e: hound::Error| AblationError::Audio(format!("{}: {e}", path.display()));
    let mut w = hound::WavWriter::create(path, spec).map_err(audio)?;
    for &s in samples {
        w.write_sample(s).map_err(audio)?;
    }
    w.finalize().map_err(audio)
}

/// Read a WAV file, add noise, write the result.
pub fn inject_noise_wav(input: &Path, output: &Path, spec: &NoiseSpec) -> Result<(), AblationError> {
    let (samples, wav) = read_wav(input)?;
    write_wav(output, &inject_noise(&samples, spec)?, wav)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone() -> Vec<i16> {
        (0..8000).map(|i| (8000.0 * (i as f64 * 0.1).sin()) as i16).collect()
    }

    #[test]
    fn noise_ratio_and_identity() {
        let x = tone();
        let y = inject_noise(&x, &NoiseSpec { nsr: 0.1, seed: 3 }).unwrap();
        let noise: Vec<f64> = x.iter().zip(&y).map(|(a, b)| f64::from(*b) - f64::from(*a)).collect();
        let sig: Vec<f64> = x.iter().map(|&s| f64::from(s)).collect();
        assert!((rms(&noise) / rms(&sig) - 0.1).abs() < 0.001);
        assert_eq!(inject_noise(&x, &NoiseSpec { nsr: 0.0, seed: 3 }).unwrap(), x);
        assert!(inject_noise(&[0; 10], &NoiseSpec { nsr: 0.1, seed: 3 }).is_err());
    }

    #[test]
    fn wav_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = hound::WavSpec { channels: 1, sample_rate: 16000, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
        write_wav(&a, &tone(), spec).unwrap();
        inject_noise_wav(&a, &b, &NoiseSpec { nsr: 0.0, seed: 0 }).unwrap();
        assert_eq!(read_wav(&b).unwrap().0, tone());
    }
}
