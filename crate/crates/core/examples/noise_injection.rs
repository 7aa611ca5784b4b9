//! Add Gaussian noise at a fixed noise-to-signal ratio to a WAV file. With
//! no input a 440 Hz tone is synthesised.
//!
//!     cargo run --example noise_injection -- in.wav out.wav 0.25

use ctaf::ablation::{inject_noise, inject_noise_wav, rms, NoiseSpec};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [input, output, nsr] = &args[..] {
        inject_noise_wav(input.as_ref(), output.as_ref(), &NoiseSpec { nsr: nsr.parse()?, seed: 0 })?;
        println!("wrote {output}");
        return Ok(());
    }

    let tone: Vec<i16> =
        (0..16_000).map(|i| (8_000.0 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 16_000.0).sin()) as i16).collect();
    let signal: Vec<f64> = tone.iter().map(|&s| s.into()).collect();
    for nsr in [0.05, 0.10, 0.25, 0.50] {
        let noisy = inject_noise(&tone, &NoiseSpec { nsr, seed: 0 })?;
        let noise: Vec<f64> = noisy.iter().zip(&tone).map(|(&y, &x)| f64::from(y) - f64::from(x)).collect();
        println!("target {nsr:.2}  measured {:.4}", rms(&noise) / rms(&signal));
    }
    Ok(())
}
