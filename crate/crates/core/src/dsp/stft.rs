use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::config::DspConfig;
use crate::dataset::Waveform;
use crate::error::DspError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop_len: usize,
    pub nfft: usize,
}

impl StftConfig {
    pub fn from_dsp(cfg: &DspConfig) -> Result<Self, DspError> {
        let c = Self {
            window_len: cfg.window_len(),
            hop_len: cfg.hop_len(),
            nfft: cfg.nfft,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if self.window_len == 0 || self.hop_len == 0 {
            return Err(DspError::Config("window and hop must be positive".into()));
        }
        if self.window_len > self.nfft {
            return Err(DspError::Config(format!(
                "window of {} samples exceeds nfft {}",
                self.window_len, self.nfft
            )));
        }
        if self.hop_len > self.window_len {
            return Err(DspError::Config("hop exceeds window".into()));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.nfft / 2 + 1
    }
}

impl Default for StftConfig {
    fn default() -> Self {
        Self::from_dsp(&DspConfig::default()).expect("default framing is valid")
    }
}

/// Magnitude spectrogram, `magnitudes[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f64>>,
    pub frame_rate: f64,
    pub bin_freqs: Vec<f64>,
    /// RMS of each unwindowed frame.
    pub frame_rms: Vec<f64>,
    pub sample_rate: u32,
    pub config: StftConfig,
    /// Sum of squared window values, for power normalization.
    pub window_energy: f64,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn bins(&self) -> usize {
        self.config.bins()
    }
}

pub fn frame_count(len: usize, window: usize, hop: usize) -> usize {
    if len < window {
        0
    } else {
        (len - window) / hop + 1
    }
}

/// Periodic Hann window.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<Spectrogram, DspError> {
    cfg.validate()?;
    let n = w.samples.len();
    if n < cfg.window_len {
        return Err(DspError::TooShort {
            len: n,
            window: cfg.window_len,
        });
    }
    let window = hann_window(cfg.window_len);
    let window_energy = window.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.nfft);
    let bins = cfg.bins();
    let frames = frame_count(n, cfg.window_len, cfg.hop_len);
    let mut magnitudes = Vec::with_capacity(frames);
    let mut frame_rms = Vec::with_capacity(frames);
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.nfft];
    for start in super::frame_starts(n, cfg.window_len, cfg.hop_len) {
        let frame = &w.samples[start..start + cfg.window_len];
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for ((slot, x), win) in buf.iter_mut().zip(frame).zip(&window) {
            slot.re = x * win;
        }
        fft.process(&mut buf);
        magnitudes.push(buf[..bins].iter().map(|c| c.norm()).collect());
        frame_rms.push((frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64).sqrt());
    }
    let sr = w.sample_rate as f64;
    Ok(Spectrogram {
        magnitudes,
        frame_rate: sr / cfg.hop_len as f64,
        bin_freqs: (0..bins).map(|k| k as f64 * sr / cfg.nfft as f64).collect(),
        frame_rms,
        sample_rate: w.sample_rate,
        config: *cfg,
        window_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(freq: f64, n: usize) -> Waveform {
        Waveform::new(
            (0..n)
                .map(|i| (2.0 * PI * freq * i as f64 / 16_000.0).sin())
                .collect(),
            16_000,
        )
    }

    #[test]
    fn one_second_gives_97_frames() {
        let s = stft(&tone(440.0, 16_000), &StftConfig::default()).unwrap();
        assert_eq!(s.frames(), 97);
        assert_eq!(s.bins(), 257);
        assert_eq!(s.magnitudes[0].len(), 257);
        assert_eq!(s.frame_rate, 100.0);
    }

    #[test]
    fn zeros_give_zero_magnitudes() {
        let s = stft(
            &Waveform::new(vec![0.0; 4000], 16_000),
            &StftConfig::default(),
        )
        .unwrap();
        assert!(s.magnitudes.iter().flatten().all(|&m| m == 0.0));
    }

    #[test]
    fn too_short_is_an_error() {
        let err = stft(
            &Waveform::new(vec![0.0; 511], 16_000),
            &StftConfig::default(),
        );
        assert_eq!(
            err.unwrap_err(),
            DspError::TooShort {
                len: 511,
                window: 512
            }
        );
    }

    /// Direct DFT of one Hann-windowed frame, independent of the FFT path.
    fn dft_magnitudes(frame: &[f64], nfft: usize) -> Vec<f64> {
        let w = hann_window(frame.len());
        (0..=nfft / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (n, (x, wn)) in frame.iter().zip(&w).enumerate() {
                    let ang = -2.0 * PI * (k * n) as f64 / nfft as f64;
                    re += x * wn * ang.cos();
                    im += x * wn * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn tone_peaks_at_nearest_bin_and_matches_dft() {
        let w = tone(1000.0, 8000);
        let s = stft(&w, &StftConfig::default()).unwrap();
        let expected_bin = (1000.0_f64 / 31.25).round() as usize;
        for frame in &s.magnitudes[1..s.frames() - 1] {
            let argmax = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert_eq!(argmax, expected_bin);
        }
        let oracle = dft_magnitudes(&w.samples[160 * 5..160 * 5 + 512], 512);
        for (a, b) in s.magnitudes[5].iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
    }

    #[test]
    fn rejects_window_longer_than_nfft() {
        let cfg = StftConfig {
            window_len: 600,
            hop_len: 160,
            nfft: 512,
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn frame_count_formula(n in 512usize..5000) {
            let s = stft(&Waveform::new(vec![0.1; n], 16_000), &StftConfig::default()).unwrap();
            prop_assert_eq!(s.frames(), (n - 512) / 160 + 1);
        }
    }
}
