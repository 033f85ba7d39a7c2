use crate::config::DspConfig;
use crate::dataset::Waveform;

/// Per-frame RMS level in dB (floored), smoothed by a centered moving average.
pub fn loudness_contour(w: &Waveform, cfg: &DspConfig) -> Vec<f64> {
    let win = cfg.window_len();
    let hop = cfg.hop_len();
    let raw: Vec<f64> = super::frame_starts(w.samples.len(), win, hop)
        .map(|s| {
            let f = &w.samples[s..s + win];
            let ms = f.iter().map(|x| x * x).sum::<f64>() / win as f64;
            super::power_db(ms, cfg.loudness_floor_db)
        })
        .collect();
    let half = ((cfg.loudness_smoothing_ms / cfg.hop_ms) / 2.0).round() as usize;
    (0..raw.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(raw.len());
            raw[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Local maxima whose prominence reaches `min_prominence` dB, per second.
///
/// Prominence follows the usual topographic definition: the height of the
/// peak above the higher of the two minima reached before a higher peak (or
/// the contour's end) on each side. Plateaus count once; among peaks of
/// equal height only the leftmost keeps its full prominence.
pub fn count_loudness_peaks(contour: &[f64], min_prominence: f64, duration_s: f64) -> f64 {
    if !(duration_s > 0.0) {
        return 0.0;
    }
    let n = contour.len();
    let mut count = 0usize;
    let mut i = 1;
    while i + 1 < n {
        if contour[i] > contour[i - 1] {
            // Walk across a possible plateau.
            let mut j = i;
            while j + 1 < n && contour[j + 1] == contour[i] {
                j += 1;
            }
            if j + 1 < n
                && contour[j + 1] < contour[i]
                && prominence(contour, i, j) >= min_prominence
            {
                count += 1;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    count as f64 / duration_s
}

fn prominence(x: &[f64], start: usize, end: usize) -> f64 {
    let peak = x[start];
    let mut left_min = peak;
    for k in (0..start).rev() {
        if x[k] >= peak {
            break;
        }
        left_min = left_min.min(x[k]);
    }
    let mut right_min = peak;
    for &v in &x[end + 1..] {
        if v > peak {
            break;
        }
        right_min = right_min.min(v);
    }
    peak - left_min.max(right_min)
}
