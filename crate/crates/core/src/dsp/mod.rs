//! Signal-analysis primitives shared by the feature extractors.

mod bands;
mod chi;
mod formants;
mod loudness;
mod stats;
mod stft;
mod voicing;

pub use bands::{octave_band_edges, octave_band_powers};
pub use chi::{chi_profile_log_likelihood, fit_chi_shape, ChiFitter, ShapeAxis, ShapeSeries};
pub use formants::{estimate_formants, lpc_coefficients, FormantTrack};
pub use loudness::{count_loudness_peaks, loudness_contour};
pub use stats::{descriptive_stats, StatsQuad};
pub use stft::{frame_count, hann_window, stft, Spectrogram, StftConfig};
pub use voicing::{detect_voicing, VoicingTrack};

/// Power ratio in dB with an explicit floor.
pub(crate) fn power_db(power: f64, floor_db: f64) -> f64 {
    if power > 0.0 {
        (10.0 * power.log10()).max(floor_db)
    } else {
        floor_db
    }
}

/// Iterator over the start offsets of analysis frames.
pub(crate) fn frame_starts(len: usize, window: usize, hop: usize) -> impl Iterator<Item = usize> {
    (0..frame_count(len, window, hop)).map(move |i| i * hop)
}
