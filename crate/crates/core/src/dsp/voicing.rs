use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::config::DspConfig;
use crate::dataset::Waveform;

/// Per-frame voicing decisions on the STFT framing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VoicingTrack {
    pub voiced: Vec<bool>,
    /// Present exactly on voiced frames.
    pub f0: Vec<Option<f64>>,
}

impl VoicingTrack {
    pub fn frames(&self) -> usize {
        self.voiced.len()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.voiced.is_empty() {
            return 0.0;
        }
        self.voiced.iter().filter(|&&v| v).count() as f64 / self.voiced.len() as f64
    }
}

/// Normalized autocorrelation pitch detector with an energy gate relative
/// to the median RMS of the recording's active frames.
pub fn detect_voicing(w: &Waveform, cfg: &DspConfig) -> VoicingTrack {
    let win = cfg.window_len();
    let hop = cfg.hop_len();
    let sr = w.sample_rate as f64;
    let starts: Vec<usize> = super::frame_starts(w.samples.len(), win, hop).collect();
    if starts.is_empty() {
        return VoicingTrack::default();
    }
    let rms: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let f = &w.samples[s..s + win];
            (f.iter().map(|x| x * x).sum::<f64>() / win as f64).sqrt()
        })
        .collect();
    let mut active: Vec<f64> = rms
        .iter()
        .copied()
        .filter(|&r| r > cfg.voicing_active_rms)
        .collect();
    if active.is_empty() {
        return VoicingTrack {
            voiced: vec![false; starts.len()],
            f0: vec![None; starts.len()],
        };
    }
    active.sort_by(f64::total_cmp);
    let median = if active.len() % 2 == 1 {
        active[active.len() / 2]
    } else {
        0.5 * (active[active.len() / 2 - 1] + active[active.len() / 2])
    };
    let gate = cfg.voicing_energy_gate * median;

    let min_lag = (sr / cfg.voicing_max_f0_hz).ceil() as usize;
    let max_lag = ((sr / cfg.voicing_min_f0_hz).floor() as usize).min(win.saturating_sub(2));
    let mut acf = Autocorrelator::new(win);

    let mut voiced = Vec::with_capacity(starts.len());
    let mut f0 = Vec::with_capacity(starts.len());
    for (&s, &r) in starts.iter().zip(&rms) {
        let pitch = if r > gate && min_lag < max_lag {
            acf.pitch_lag(
                &w.samples[s..s + win],
                min_lag,
                max_lag,
                cfg.voicing_threshold,
            )
        } else {
            None
        };
        match pitch {
            Some(lag) => {
                voiced.push(true);
                f0.push(Some(
                    (sr / lag).clamp(cfg.voicing_min_f0_hz, cfg.voicing_max_f0_hz),
                ));
            }
            None => {
                voiced.push(false);
                f0.push(None);
            }
        }
    }
    VoicingTrack { voiced, f0 }
}

struct Autocorrelator {
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl Autocorrelator {
    fn new(win: usize) -> Self {
        let n = (2 * win).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            buf: vec![Complex::new(0.0, 0.0); n],
        }
    }

    /// Fractional lag of the pitch peak, if the normalized autocorrelation
    /// clears the threshold.
    fn pitch_lag(
        &mut self,
        frame: &[f64],
        min_lag: usize,
        max_lag: usize,
        threshold: f64,
    ) -> Option<f64> {
        let n = frame.len();
        let mean = frame.iter().sum::<f64>() / n as f64;
        let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
        let mut prefix = vec![0.0; n + 1];
        for (i, v) in x.iter().enumerate() {
            prefix[i + 1] = prefix[i] + v * v;
        }
        self.buf
            .iter_mut()
            .for_each(|c| *c = Complex::new(0.0, 0.0));
        for (slot, v) in self.buf.iter_mut().zip(&x) {
            slot.re = *v;
        }
        self.fft.process(&mut self.buf);
        self.buf
            .iter_mut()
            .for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
        self.ifft.process(&mut self.buf);
        let scale = 1.0 / self.buf.len() as f64;

        let norm_at = |lag: usize, buf: &[Complex<f64>]| {
            let head = prefix[n - lag];
            let tail = prefix[n] - prefix[lag];
            let denom = (head * tail).sqrt();
            if denom > 0.0 {
                buf[lag].re * scale / denom
            } else {
                0.0
            }
        };
        let r: Vec<f64> = (min_lag - 1..=max_lag + 1)
            .map(|l| norm_at(l, &self.buf))
            .collect();
        // r[i] is lag min_lag - 1 + i; candidates are i in 1..=len-2.
        let best = (1..r.len() - 1).map(|i| r[i]).fold(f64::MIN, f64::max);
        if best <= threshold {
            return None;
        }
        // First local maximum that comes close to the global one avoids
        // locking onto a multiple of the period.
        let i = (1..r.len() - 1)
            .find(|&i| r[i] >= 0.9 * best && r[i] >= r[i - 1] && r[i] >= r[i + 1])
            .unwrap_or_else(|| (1..r.len() - 1).find(|&i| r[i] == best).unwrap());
        let (a, b, c) = (r[i - 1], r[i], r[i + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        Some((min_lag - 1 + i) as f64 + shift)
    }
}
