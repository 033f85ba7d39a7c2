//! The 28-dimensional handcrafted feature vector: spectral sparsity (4),
//! formant and voiced-region statistics (10), loudness peak rate plus
//! octave-band LTAS (10), and temporal sparsity (4).

mod table;

pub use table::FeatureMatrix;

use rayon::prelude::*;

use crate::config::{Config, DspConfig, FeatureConfig};
use crate::dataset::{preprocess, ManifestEntry, Waveform};
use crate::dsp::{
    count_loudness_peaks, descriptive_stats, detect_voicing, estimate_formants, loudness_contour,
    octave_band_powers, stft, ChiFitter, FormantTrack, ShapeAxis, ShapeSeries, Spectrogram,
    StftConfig, VoicingTrack,
};
use crate::error::FeatureError;

pub const FEATURE_DIM: usize = 28;

/// Stable column names, in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "spectral_sparsity_mean",
    "spectral_sparsity_std",
    "spectral_sparsity_kurtosis",
    "spectral_sparsity_skewness",
    "formant1_mean",
    "formant1_std",
    "formant1_kurtosis",
    "formant1_skewness",
    "formant2_mean",
    "formant2_std",
    "formant2_kurtosis",
    "formant2_skewness",
    "voiced_duration_mean",
    "voiced_duration_std",
    "loudness_peaks_per_s",
    "ltas_31hz_db",
    "ltas_62hz_db",
    "ltas_125hz_db",
    "ltas_250hz_db",
    "ltas_500hz_db",
    "ltas_1khz_db",
    "ltas_2khz_db",
    "ltas_4khz_db",
    "ltas_8khz_db",
    "temporal_sparsity_mean",
    "temporal_sparsity_std",
    "temporal_sparsity_kurtosis",
    "temporal_sparsity_skewness",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_DIM],
}

impl FeatureVector {
    pub fn from_parts(f1: [f64; 4], f2: [f64; 10], f3: [f64; 10], f4: [f64; 4]) -> Self {
        let mut values = [0.0; FEATURE_DIM];
        values[..4].copy_from_slice(&f1);
        values[4..14].copy_from_slice(&f2);
        values[14..24].copy_from_slice(&f3);
        values[24..].copy_from_slice(&f4);
        Self { values }
    }

    pub fn spectral_sparsity(&self) -> &[f64] {
        &self.values[..4]
    }

    pub fn formant_voicing(&self) -> &[f64] {
        &self.values[4..14]
    }

    pub fn loudness_ltas(&self) -> &[f64] {
        &self.values[14..24]
    }

    pub fn temporal_sparsity(&self) -> &[f64] {
        &self.values[24..]
    }

    pub fn names() -> &'static [&'static str; FEATURE_DIM] {
        &FEATURE_NAMES
    }
}

/// Shape fits over the magnitude bins of each frame.
pub fn spectral_shape_series(s: &Spectrogram, fitter: &ChiFitter) -> ShapeSeries {
    ShapeSeries {
        values: s
            .magnitudes
            .iter()
            .filter_map(|frame| fitter.fit(frame).ok())
            .collect(),
        axis: ShapeAxis::PerTimeFrame,
    }
}

/// Shape fits over the time trajectory of each frequency bin.
pub fn temporal_shape_series(s: &Spectrogram, fitter: &ChiFitter) -> ShapeSeries {
    let mut trajectory = vec![0.0; s.frames()];
    let values = (0..s.bins())
        .filter_map(|k| {
            for (t, frame) in s.magnitudes.iter().enumerate() {
                trajectory[t] = frame[k];
            }
            fitter.fit(&trajectory).ok()
        })
        .collect();
    ShapeSeries {
        values,
        axis: ShapeAxis::PerFrequencyBin,
    }
}

fn shape_stats(series: ShapeSeries, min_fits: usize) -> Result<[f64; 4], FeatureError> {
    if series.values.len() < min_fits {
        let what = match series.axis {
            ShapeAxis::PerTimeFrame => "frames",
            ShapeAxis::PerFrequencyBin => "frequency bins",
        };
        return Err(FeatureError::Insufficient(format!(
            "{} {what} with energy, need {min_fits}",
            series.values.len()
        )));
    }
    Ok(descriptive_stats(&series.values)?.to_array())
}

/// (mean, std, kurtosis, skewness) of the per-frame Chi shape. Frames
/// without energy are skipped.
pub fn spectral_sparsity_features(
    s: &Spectrogram,
    dsp: &DspConfig,
    fcfg: &FeatureConfig,
) -> Result<[f64; 4], FeatureError> {
    let fitter = ChiFitter::from_config(dsp);
    shape_stats(spectral_shape_series(s, &fitter), fcfg.min_shape_fits)
}

/// (mean, std, kurtosis, skewness) of the per-bin Chi shape. Bins without
/// energy are skipped.
pub fn temporal_sparsity_features(
    s: &Spectrogram,
    dsp: &DspConfig,
    fcfg: &FeatureConfig,
) -> Result<[f64; 4], FeatureError> {
    let fitter = ChiFitter::from_config(dsp);
    shape_stats(temporal_shape_series(s, &fitter), fcfg.min_shape_fits)
}

/// Lengths, in frames, of voiced regions: runs of voiced frames with gaps of
/// at most `merge_gap` unvoiced frames bridged, keeping runs of at least
/// `min_frames`.
pub fn voiced_regions(voiced: &[bool], merge_gap: usize, min_frames: usize) -> Vec<usize> {
    let mut regions = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, &v) in voiced.iter().enumerate() {
        if !v {
            continue;
        }
        current = match current {
            Some((start, end)) if i - end - 1 <= merge_gap => Some((start, i)),
            Some((start, end)) => {
                regions.push(end - start + 1);
                Some((i, i))
            }
            None => Some((i, i)),
        };
    }
    if let Some((start, end)) = current {
        regions.push(end - start + 1);
    }
    regions.retain(|&len| len >= min_frames);
    regions
}

/// F1 stats, F2 stats, then mean and std of voiced-region durations in seconds.
pub fn formant_voicing_features(
    ft: &FormantTrack,
    v: &VoicingTrack,
    frame_rate: f64,
    fcfg: &FeatureConfig,
) -> Result<[f64; 10], FeatureError> {
    if ft.present() < fcfg.min_formant_frames {
        return Err(FeatureError::Insufficient(format!(
            "{} voiced frames with formants, need {}",
            ft.present(),
            fcfg.min_formant_frames
        )));
    }
    let regions = voiced_regions(&v.voiced, fcfg.region_merge_gap, fcfg.region_min_frames);
    if regions.is_empty() {
        return Err(FeatureError::Insufficient("no voiced region".into()));
    }
    let durations: Vec<f64> = regions.iter().map(|&n| n as f64 / frame_rate).collect();
    let f1 = descriptive_stats(&ft.f1_series())?;
    let f2 = descriptive_stats(&ft.f2_series())?;
    let dur = descriptive_stats(&durations)?;
    let mut out = [0.0; 10];
    out[..4].copy_from_slice(&f1.to_array());
    out[4..8].copy_from_slice(&f2.to_array());
    out[8] = dur.mean;
    out[9] = dur.std;
    Ok(out)
}

/// Loudness peaks per second followed by the nine octave-band levels.
pub fn loudness_ltas_features(
    w: &Waveform,
    s: &Spectrogram,
    dsp: &DspConfig,
) -> Result<[f64; 10], FeatureError> {
    if w.is_empty() {
        return Err(FeatureError::Insufficient("empty waveform".into()));
    }
    let contour = loudness_contour(w, dsp);
    let bands = octave_band_powers(s, dsp);
    if bands.len() != 9 {
        return Err(FeatureError::Insufficient(format!(
            "{} octave bands configured, the feature vector holds 9",
            bands.len()
        )));
    }
    let mut out = [0.0; 10];
    out[0] = count_loudness_peaks(&contour, dsp.loudness_peak_prominence_db, w.duration());
    out[1..].copy_from_slice(&bands);
    Ok(out)
}

/// Full extraction on a preprocessed waveform. Any failing sub-extractor
/// fails the recording; nothing is imputed.
pub fn extract_features(
    w: &Waveform,
    cfg: &Config,
    id: &str,
) -> Result<FeatureVector, FeatureError> {
    let tag = |e: FeatureError| FeatureError::Extraction {
        id: id.to_string(),
        message: e.to_string(),
    };
    let dsp = &cfg.dsp;
    let stft_cfg = StftConfig::from_dsp(dsp).map_err(|e| tag(e.into()))?;
    let spec = stft(w, &stft_cfg).map_err(|e| tag(e.into()))?;
    let f1 = spectral_sparsity_features(&spec, dsp, &cfg.features).map_err(tag)?;
    let voicing = detect_voicing(w, dsp);
    let formants = estimate_formants(w, &voicing, dsp);
    let f2 = formant_voicing_features(&formants, &voicing, spec.frame_rate, &cfg.features)
        .map_err(tag)?;
    let f3 = loudness_ltas_features(w, &spec, dsp).map_err(tag)?;
    let f4 = temporal_sparsity_features(&spec, dsp, &cfg.features).map_err(tag)?;
    let v = FeatureVector::from_parts(f1, f2, f3, f4);
    if let Some(i) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(tag(FeatureError::Insufficient(format!(
            "non-finite value for {}",
            FEATURE_NAMES[i]
        ))));
    }
    Ok(v)
}

/// A recording that could not be turned into a feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub id: String,
    pub message: String,
}

/// Rows for every recording that extracted cleanly, in manifest order, plus
/// the failures in manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestFeatures {
    pub matrix: FeatureMatrix,
    pub failures: Vec<ExtractionFailure>,
}

/// Preprocesses and extracts every manifest entry in parallel. A failure is
/// recorded and the remaining entries still run.
pub fn extract_manifest(entries: &[ManifestEntry], cfg: &Config) -> ManifestFeatures {
    let results: Vec<Result<FeatureVector, String>> = entries
        .par_iter()
        .map(|e| {
            let w = preprocess(e, &cfg.dsp).map_err(|err| err.to_string())?;
            extract_features(&w, cfg, &e.recording_id).map_err(|err| match err {
                // The id is carried by the failure record already.
                FeatureError::Extraction { message, .. } => message,
                other => other.to_string(),
            })
        })
        .collect();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(v) => {
                ids.push(e.recording_id.clone());
                labels.push(e.label);
                rows.push(v.values.to_vec());
            }
            Err(message) => failures.push(ExtractionFailure {
                id: e.recording_id.clone(),
                message,
            }),
        }
    }
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let matrix = FeatureMatrix::new(ids, labels, names, rows)
        .expect("manifest ids are unique and values finite");
    ManifestFeatures { matrix, failures }
}
