use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::VoicingTrack;
use crate::config::DspConfig;
use crate::dataset::Waveform;

/// First and second formant per frame; `None` on unvoiced frames and on
/// voiced frames with fewer than two qualifying resonances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FormantTrack {
    pub pairs: Vec<Option<(f64, f64)>>,
}

impl FormantTrack {
    pub fn f1_series(&self) -> Vec<f64> {
        self.pairs.iter().flatten().map(|p| p.0).collect()
    }

    pub fn f2_series(&self) -> Vec<f64> {
        self.pairs.iter().flatten().map(|p| p.1).collect()
    }

    pub fn present(&self) -> usize {
        self.pairs.iter().flatten().count()
    }
}

pub fn estimate_formants(w: &Waveform, v: &VoicingTrack, cfg: &DspConfig) -> FormantTrack {
    let win = cfg.window_len();
    let hop = cfg.hop_len();
    let sr = w.sample_rate as f64;
    let window: Vec<f64> = (0..win)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (win - 1) as f64).cos())
        .collect();
    let pairs = v
        .voiced
        .iter()
        .enumerate()
        .map(|(i, &voiced)| {
            let start = i * hop;
            if !voiced || start + win > w.samples.len() {
                return None;
            }
            let frame = &w.samples[start..start + win];
            let mut x = Vec::with_capacity(win);
            x.push(frame[0] * window[0]);
            for n in 1..win {
                x.push((frame[n] - cfg.preemphasis * frame[n - 1]) * window[n]);
            }
            let a = lpc_coefficients(&x, cfg.lpc_order)?;
            frame_formants(&a, sr, cfg)
        })
        .collect();
    FormantTrack { pairs }
}

/// Autocorrelation-method LPC by Levinson-Durbin. Returns `a[1..=order]` of
/// `A(z) = 1 + sum a_k z^-k`, or `None` for a silent frame.
pub fn lpc_coefficients(x: &[f64], order: usize) -> Option<Vec<f64>> {
    let mut r: Vec<f64> = (0..=order)
        .map(|lag| {
            x.iter()
                .zip(&x[lag.min(x.len())..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    if !(r[0] > 0.0) {
        return None;
    }
    // Slight white-noise correction keeps the recursion well conditioned.
    r[0] *= 1.0 + 1e-9;
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if !(err > 0.0) {
            return None;
        }
    }
    Some(a[1..].to_vec())
}

fn frame_formants(a: &[f64], sr: f64, cfg: &DspConfig) -> Option<(f64, f64)> {
    let p = a.len();
    let companion = DMatrix::from_fn(p, p, |r, c| {
        if r == 0 {
            -a[c]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut freqs: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im > 0.0)
        .filter_map(|z| {
            let freq = z.im.atan2(z.re) * sr / (2.0 * PI);
            let bandwidth = -z.norm().ln() * sr / PI;
            (bandwidth < cfg.formant_max_bandwidth_hz
                && freq > cfg.formant_min_hz
                && freq < cfg.formant_max_hz)
                .then_some(freq)
        })
        .collect();
    freqs.sort_by(f64::total_cmp);
    freqs.dedup();
    match freqs.as_slice() {
        [f1, f2, ..] => Some((*f1, *f2)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::detect_voicing;
    use crate::signals::synthetic_vowel;

    fn vowel(resonances: &[(f64, f64)], secs: f64) -> Waveform {
        synthetic_vowel(resonances, 100.0, 0.5, secs, 16_000)
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    #[test]
    fn recovers_two_resonances() {
        let cfg = DspConfig::default();
        let w = vowel(&[(700.0, 60.0), (1200.0, 80.0)], 1.0);
        let v = detect_voicing(&w, &cfg);
        let t = estimate_formants(&w, &v, &cfg);
        assert!(t.present() > 50);
        let (f1, f2) = (median(t.f1_series()), median(t.f2_series()));
        assert!((f1 - 700.0).abs() <= 50.0, "F1 {f1}");
        assert!((f2 - 1200.0).abs() <= 75.0, "F2 {f2}");
    }

    #[test]
    fn unvoiced_frames_have_no_formants() {
        let cfg = DspConfig::default();
        let w = vowel(&[(700.0, 60.0), (1200.0, 80.0)], 0.5);
        let v = VoicingTrack {
            voiced: vec![false; 47],
            f0: vec![None; 47],
        };
        assert_eq!(estimate_formants(&w, &v, &cfg).present(), 0);
    }

    #[test]
    fn single_resonator_does_not_crash_and_keeps_order() {
        let cfg = DspConfig::default();
        let w = vowel(&[(500.0, 60.0)], 1.0);
        let v = detect_voicing(&w, &cfg);
        let t = estimate_formants(&w, &v, &cfg);
        assert_eq!(t.pairs.len(), v.frames());
        for (f1, f2) in t.pairs.iter().flatten() {
            assert!(f1 < f2);
            assert!(*f1 > 90.0 && *f2 < 5500.0);
        }
    }

    #[test]
    fn silent_frame_has_no_lpc() {
        assert!(lpc_coefficients(&[0.0; 64], 10).is_none());
    }

    #[test]
    fn lpc_of_ar2_process() {
        // x[n] = 1.3 x[n-1] - 0.6 x[n-2] + impulse: LPC recovers the recursion.
        let mut x = vec![0.0; 4000];
        x[0] = 1.0;
        for n in 1..4000 {
            x[n] += 1.3 * x[n - 1] - if n >= 2 { 0.6 * x[n - 2] } else { 0.0 };
        }
        let a = lpc_coefficients(&x, 2).unwrap();
        assert!(
            (a[0] + 1.3).abs() < 1e-6 && (a[1] - 0.6).abs() < 1e-6,
            "{a:?}"
        );
    }
}
