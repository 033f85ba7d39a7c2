//! Deterministic test signals used by fixtures, benches and the CLI's
//! self-checks.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Waveform;

pub fn tone(freq: f64, amplitude: f64, secs: f64, rate: u32) -> Waveform {
    let n = (rate as f64 * secs).round() as usize;
    Waveform::new(
        (0..n)
            .map(|i| amplitude * (2.0 * PI * freq * i as f64 / rate as f64).sin())
            .collect(),
        rate,
    )
}

/// Tone with envelope `1 + depth * sin(2 pi mod_freq t)`, peak amplitude `amplitude * (1 + depth)`.
pub fn am_tone(
    carrier: f64,
    mod_freq: f64,
    depth: f64,
    amplitude: f64,
    secs: f64,
    rate: u32,
) -> Waveform {
    let n = (rate as f64 * secs).round() as usize;
    Waveform::new(
        (0..n)
            .map(|i| {
                let t = i as f64 / rate as f64;
                amplitude
                    * (1.0 + depth * (2.0 * PI * mod_freq * t).sin())
                    * (2.0 * PI * carrier * t).sin()
            })
            .collect(),
        rate,
    )
}

pub fn white_noise(std: f64, secs: f64, rate: u32, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (rate as f64 * secs).round() as usize;
    Waveform::new(
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                std * z
            })
            .collect(),
        rate,
    )
}

pub fn sawtooth(f0: f64, amplitude: f64, secs: f64, rate: u32) -> Waveform {
    let n = (rate as f64 * secs).round() as usize;
    Waveform::new(
        (0..n)
            .map(|i| amplitude * (2.0 * (f0 * i as f64 / rate as f64).fract() - 1.0))
            .collect(),
        rate,
    )
}

/// Pulse train at `f0` through cascaded two-pole resonators given as
/// `(frequency, bandwidth)` pairs, normalized to a peak of `amplitude`.
pub fn synthetic_vowel(
    resonances: &[(f64, f64)],
    f0: f64,
    amplitude: f64,
    secs: f64,
    rate: u32,
) -> Waveform {
    let sr = rate as f64;
    let n = (sr * secs).round() as usize;
    let period = (sr / f0).round() as usize;
    let mut x: Vec<f64> = (0..n)
        .map(|i| if i % period == 0 { 1.0 } else { 0.0 })
        .collect();
    for &(freq, bw) in resonances {
        let r = (-PI * bw / sr).exp();
        let theta = 2.0 * PI * freq / sr;
        let (c1, c2) = (2.0 * r * theta.cos(), -r * r);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let y1 = if i >= 1 { y[i - 1] } else { 0.0 };
            let y2 = if i >= 2 { y[i - 2] } else { 0.0 };
            y[i] = x[i] + c1 * y1 + c2 * y2;
        }
        x = y;
    }
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { amplitude / peak } else { 0.0 };
    Waveform::new(x.into_iter().map(|v| v * gain).collect(), rate)
}

pub fn silence(secs: f64, rate: u32) -> Waveform {
    Waveform::new(vec![0.0; (rate as f64 * secs).round() as usize], rate)
}

/// Concatenates waveforms of one sample rate.
pub fn concat(parts: &[Waveform]) -> Waveform {
    let rate = parts.first().map_or(16_000, |p| p.sample_rate);
    assert!(
        parts.iter().all(|p| p.sample_rate == rate),
        "mixed sample rates"
    );
    Waveform::new(
        parts
            .iter()
            .flat_map(|p| p.samples.iter().copied())
            .collect(),
        rate,
    )
}

/// Vowel-like segments with a slow amplitude modulation, separated by
/// low-level noise pauses.
pub fn speech_like(seed: u64, segments: usize, rate: u32) -> Waveform {
    let mut parts = Vec::new();
    for s in 0..segments {
        let f1 = 550.0 + 60.0 * s as f64;
        let f2 = 1150.0 + 140.0 * (s % 3) as f64;
        let f0 = 110.0 + 7.0 * s as f64;
        let secs = 0.35 + 0.05 * (s % 4) as f64;
        let vowel = synthetic_vowel(
            &[(f1, 70.0), (f2, 90.0), (2600.0, 150.0)],
            f0,
            0.4,
            secs,
            rate,
        );
        let n = vowel.len();
        let shaped: Vec<f64> = vowel
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = i as f64 / rate as f64;
                let taper = (PI * i as f64 / n as f64).sin().sqrt();
                v * taper * (1.0 + 0.5 * (2.0 * PI * 4.0 * t).sin())
            })
            .collect();
        parts.push(Waveform::new(shaped, rate));
        parts.push(white_noise(2e-4, 0.15, rate, seed.wrapping_add(s as u64)));
    }
    concat(&parts)
}
