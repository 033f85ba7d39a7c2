//! Recording manifests, WAV decoding and the 16 kHz preprocessing stage.

mod manifest;
mod resample;
mod wav;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::DspConfig;
use crate::error::DatasetError;

pub use manifest::{load_manifest, parse_manifest, ManifestEntry, TrimSpan};
pub use resample::Resampler;
pub use wav::{decode_audio, write_wav};

/// Diagnostic class of a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Neurotypical,
    Dysarthria,
    #[serde(rename = "aos")]
    AoS,
}

impl ClassLabel {
    /// Fixed class order, also used for tie-breaking.
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::Neurotypical,
        ClassLabel::Dysarthria,
        ClassLabel::AoS,
    ];

    /// Dysarthria and AoS together form the patient super-class.
    pub fn is_patient(self) -> bool {
        !matches!(self, ClassLabel::Neurotypical)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Neurotypical => "neurotypical",
            ClassLabel::Dysarthria => "dysarthria",
            ClassLabel::AoS => "aos",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neurotypical" => Ok(ClassLabel::Neurotypical),
            "dysarthria" => Ok(ClassLabel::Dysarthria),
            "aos" => Ok(ClassLabel::AoS),
            _ => Err(DatasetError::UnknownLabel(s.to_string())),
        }
    }
}

/// Mono audio with its sample rate. Samples are nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.samples.iter().map(|s| s * factor).collect(),
            self.sample_rate,
        )
    }
}

/// Decodes every file of an entry, resamples to the target rate, applies the
/// trim spans and concatenates the pieces in manifest order.
pub fn preprocess(entry: &ManifestEntry, cfg: &DspConfig) -> Result<Waveform, DatasetError> {
    let mut out = Vec::new();
    for (idx, path) in entry.audio_paths.iter().enumerate() {
        let wave = decode_audio(path)?;
        let trim = entry.trim_spans.get(idx).copied().unwrap_or_default();
        let piece = prepare_piece(&wave, trim, cfg, path)?;
        out.extend_from_slice(&piece);
    }
    Ok(Waveform::new(out, cfg.sample_rate))
}

/// Resample one decoded file and cut its leading and trailing spans.
pub fn prepare_piece(
    wave: &Waveform,
    trim: TrimSpan,
    cfg: &DspConfig,
    path: &std::path::Path,
) -> Result<Vec<f64>, DatasetError> {
    let duration = wave.duration();
    if trim.lead < 0.0 || trim.trail < 0.0 || trim.lead + trim.trail >= duration {
        return Err(DatasetError::Trim {
            path: path.to_path_buf(),
            lead: trim.lead,
            trail: trim.trail,
            duration,
        });
    }
    let resampled = if wave.sample_rate == cfg.sample_rate {
        wave.samples.clone()
    } else {
        Resampler::new(wave.sample_rate, cfg.sample_rate, cfg)?.process(&wave.samples)
    };
    let rate = cfg.sample_rate as f64;
    let lead = (trim.lead * rate).round() as usize;
    let trail = (trim.trail * rate).round() as usize;
    if lead + trail >= resampled.len() {
        return Err(DatasetError::Trim {
            path: path.to_path_buf(),
            lead: trim.lead,
            trail: trim.trail,
            duration,
        });
    }
    Ok(resampled[lead..resampled.len() - trail].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn entry(paths: Vec<PathBuf>, trims: Vec<TrimSpan>) -> ManifestEntry {
        ManifestEntry {
            recording_id: "r".into(),
            audio_paths: paths,
            label: ClassLabel::Neurotypical,
            speaker_meta: Default::default(),
            trim_spans: trims,
        }
    }

    fn tone(rate: u32, secs: f64) -> Vec<f64> {
        let n = (rate as f64 * secs).round() as usize;
        (0..n)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / rate as f64).sin())
            .collect()
    }

    #[test]
    fn labels_parse_case_insensitively() {
        assert_eq!("AoS".parse::<ClassLabel>().unwrap(), ClassLabel::AoS);
        assert_eq!(
            "Neurotypical".parse::<ClassLabel>().unwrap(),
            ClassLabel::Neurotypical
        );
        assert!("healthy".parse::<ClassLabel>().is_err());
        assert!(ClassLabel::Dysarthria.is_patient());
        assert!(!ClassLabel::Neurotypical.is_patient());
    }

    #[test]
    fn downsamples_44k1_to_16k() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_wav(&p, &Waveform::new(vec![0.0; 441_000], 44_100)).unwrap();
        let out = preprocess(&entry(vec![p], vec![]), &DspConfig::default()).unwrap();
        assert_eq!(out.sample_rate, 16_000);
        assert_eq!(out.len(), 160_000);
    }

    #[test]
    fn concatenates_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");
        write_wav(&a, &Waveform::new(vec![0.25; 16_000], 16_000)).unwrap();
        write_wav(&b, &Waveform::new(vec![-0.25; 32_000], 16_000)).unwrap();
        let out = preprocess(&entry(vec![a, b], vec![]), &DspConfig::default()).unwrap();
        assert_eq!(out.len(), 48_000);
        assert!(out.samples[..16_000].iter().all(|&s| s > 0.0));
        assert!(out.samples[16_000..].iter().all(|&s| s < 0.0));
    }

    #[test]
    fn trims_quarter_second_each_side() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        write_wav(&a, &Waveform::new(tone(16_000, 1.0), 16_000)).unwrap();
        let trim = TrimSpan {
            lead: 0.25,
            trail: 0.25,
        };
        let out = preprocess(&entry(vec![a.clone()], vec![trim]), &DspConfig::default()).unwrap();
        assert_eq!(out.len(), 8_000);

        let too_long = TrimSpan {
            lead: 0.6,
            trail: 0.5,
        };
        let err = preprocess(&entry(vec![a], vec![too_long]), &DspConfig::default());
        assert!(matches!(err, Err(DatasetError::Trim { .. })));
    }

    #[test]
    fn output_duration_tracks_trimmed_input() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");
        write_wav(&a, &Waveform::new(tone(44_100, 1.3), 44_100)).unwrap();
        write_wav(&b, &Waveform::new(tone(22_050, 0.7), 22_050)).unwrap();
        let trims = vec![
            TrimSpan {
                lead: 0.1,
                trail: 0.2,
            },
            TrimSpan {
                lead: 0.05,
                trail: 0.0,
            },
        ];
        let out = preprocess(&entry(vec![a, b], trims), &DspConfig::default()).unwrap();
        let expected = (1.3 - 0.3 + 0.7 - 0.05) * 16_000.0;
        assert!((out.len() as f64 - expected).abs() <= 2.0, "{}", out.len());
    }

    #[test]
    fn preprocessing_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        write_wav(&a, &Waveform::new(tone(44_100, 0.5), 44_100)).unwrap();
        let e = entry(vec![a], vec![]);
        let x = preprocess(&e, &DspConfig::default()).unwrap();
        let y = preprocess(&e, &DspConfig::default()).unwrap();
        assert_eq!(x, y);
    }
}
