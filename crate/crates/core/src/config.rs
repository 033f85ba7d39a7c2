//! Analysis, solver and protocol constants.
//!
//! Every tunable number in the pipeline lives here so that a run can be
//! reproduced from the configuration echoed into its report. Unknown keys are
//! rejected when deserializing.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub dsp: DspConfig,
    pub features: FeatureConfig,
    pub svm: SvmConfig,
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspConfig {
    /// Target rate of the preprocessing stage.
    pub sample_rate: u32,
    pub window_ms: f64,
    pub hop_ms: f64,
    pub nfft: usize,
    /// Stopband attenuation of the Kaiser-windowed sinc resampler.
    pub resampler_stopband_db: f64,
    /// Zero crossings of the sinc kernel on each side, at the lower of the two rates.
    pub resampler_zero_crossings: usize,
    /// Passband edge as a fraction of the lower Nyquist frequency.
    pub resampler_rolloff: f64,
    pub chi_floor: f64,
    pub chi_min_shape: f64,
    pub chi_max_shape: f64,
    pub chi_tolerance: f64,
    pub chi_max_iterations: usize,
    pub voicing_min_f0_hz: f64,
    pub voicing_max_f0_hz: f64,
    pub voicing_threshold: f64,
    /// Energy gate relative to the median RMS of active frames.
    pub voicing_energy_gate: f64,
    /// Absolute RMS below which a frame is not counted as active for the median.
    pub voicing_active_rms: f64,
    pub preemphasis: f64,
    pub lpc_order: usize,
    pub formant_max_bandwidth_hz: f64,
    pub formant_min_hz: f64,
    pub formant_max_hz: f64,
    pub loudness_floor_db: f64,
    pub loudness_smoothing_ms: f64,
    pub loudness_peak_prominence_db: f64,
    pub ltas_base_hz: f64,
    pub ltas_bands: usize,
    pub ltas_active_db: f64,
    pub ltas_floor_db: f64,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            window_ms: 32.0,
            hop_ms: 10.0,
            nfft: 512,
            resampler_stopband_db: 80.0,
            resampler_zero_crossings: 32,
            resampler_rolloff: 0.92,
            chi_floor: 1e-12,
            chi_min_shape: 0.05,
            chi_max_shape: 100.0,
            chi_tolerance: 1e-6,
            chi_max_iterations: 50,
            voicing_min_f0_hz: 50.0,
            voicing_max_f0_hz: 500.0,
            voicing_threshold: 0.45,
            voicing_energy_gate: 0.02,
            voicing_active_rms: 1e-4,
            preemphasis: 0.97,
            lpc_order: 18,
            formant_max_bandwidth_hz: 400.0,
            formant_min_hz: 90.0,
            formant_max_hz: 5500.0,
            loudness_floor_db: -80.0,
            loudness_smoothing_ms: 100.0,
            loudness_peak_prominence_db: 1.2,
            ltas_base_hz: 31.25,
            ltas_bands: 9,
            ltas_active_db: -60.0,
            ltas_floor_db: -120.0,
        }
    }
}

impl DspConfig {
    pub fn window_len(&self) -> usize {
        (self.window_ms * 1e-3 * self.sample_rate as f64).round() as usize
    }

    pub fn hop_len(&self) -> usize {
        (self.hop_ms * 1e-3 * self.sample_rate as f64).round() as usize
    }

    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.hop_len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureConfig {
    /// Unvoiced gaps of at most this many frames are bridged when forming voiced regions.
    pub region_merge_gap: usize,
    pub region_min_frames: usize,
    pub min_formant_frames: usize,
    pub min_shape_fits: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            region_merge_gap: 2,
            region_min_frames: 3,
            min_formant_frames: 8,
            min_shape_fits: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    /// Weights proportional to the inverse class frequency, normalized to mean 1.
    InverseFrequency,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmConfig {
    pub kkt_tolerance: f64,
    /// Epochs (n iterations each) without a new best KKT gap before giving up.
    pub stall_epochs: usize,
    pub max_iterations: usize,
    pub class_weighting: ClassWeighting,
    pub standardize: bool,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-3,
            stall_epochs: 200,
            max_iterations: 10_000_000,
            class_weighting: ClassWeighting::InverseFrequency,
            standardize: true,
        }
    }
}

/// How the two numbers given for each of C and gamma are turned into a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Log-spaced points between the two endpoints.
    LogRange,
    /// The two endpoints only.
    Endpoints,
}

/// Side that wins when the stage-1 decision value is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieSide {
    Patient,
    Neurotypical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub repetitions: usize,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub grid_mode: GridMode,
    pub c_range: [f64; 2],
    pub c_points: usize,
    pub gamma_range: [f64; 2],
    pub gamma_points: usize,
    pub n_features: Vec<usize>,
    pub stage1_tie: TieSide,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            repetitions: 10,
            outer_folds: 5,
            inner_folds: 5,
            seed: 0,
            grid_mode: GridMode::LogRange,
            c_range: [1e-2, 1e4],
            c_points: 7,
            gamma_range: [1e-4, 1e2],
            gamma_points: 7,
            n_features: vec![5, 10, 15, 20],
            stage1_tie: TieSide::Patient,
        }
    }
}
