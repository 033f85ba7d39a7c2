use super::Spectrogram;
use crate::config::DspConfig;

/// Octave band edges `(lower, upper]` in Hz for centers `base * 2^k`.
/// The first band starts at 0 and the last one is cut at Nyquist, so the
/// bands tile `[0, nyquist]`.
pub fn octave_band_edges(base_hz: f64, bands: usize, nyquist: f64) -> Vec<(f64, f64)> {
    // Boundary between bands k - 1 and k, shared so the bands abut exactly.
    let boundary =
        |k: usize| (base_hz * 2f64.powi(k as i32) / std::f64::consts::SQRT_2).min(nyquist);
    (0..bands)
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { boundary(k) };
            let hi = if k + 1 == bands {
                nyquist
            } else {
                boundary(k + 1)
            };
            (lo, hi)
        })
        .collect()
}

/// Mean band power over speech-active frames, in dB. Band power is the
/// one-sided periodogram summed over the band's bins, normalized so that the
/// bands add up to the frame's window-weighted mean square.
pub fn octave_band_powers(s: &Spectrogram, cfg: &DspConfig) -> Vec<f64> {
    let nfft = s.config.nfft;
    let nyquist = s.sample_rate as f64 / 2.0;
    let edges = octave_band_edges(cfg.ltas_base_hz, cfg.ltas_bands, nyquist);
    let band_of: Vec<Option<usize>> = s
        .bin_freqs
        .iter()
        .map(|&f| {
            edges
                .iter()
                .position(|&(lo, hi)| (f > lo || (lo == 0.0 && f == 0.0)) && f <= hi)
        })
        .collect();
    let norm = 1.0 / (nfft as f64 * s.window_energy);
    let mut totals = vec![0.0; edges.len()];
    let mut active = 0usize;
    for (frame, &rms) in s.magnitudes.iter().zip(&s.frame_rms) {
        if super::power_db(rms * rms, f64::NEG_INFINITY) <= cfg.ltas_active_db {
            continue;
        }
        active += 1;
        for (k, (&m, band)) in frame.iter().zip(&band_of).enumerate() {
            if let Some(b) = band {
                let one_sided = if k == 0 || 2 * k == nfft { 1.0 } else { 2.0 };
                totals[*b] += one_sided * m * m * norm;
            }
        }
    }
    totals
        .into_iter()
        .map(|t| {
            if active == 0 {
                cfg.ltas_floor_db
            } else {
                super::power_db(t / active as f64, cfg.ltas_floor_db)
            }
        })
        .collect()
}
