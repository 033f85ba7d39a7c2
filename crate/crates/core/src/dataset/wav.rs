use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::Waveform;
use crate::error::DatasetError;

/// Decodes a PCM WAV file to mono: channels are averaged and integer samples
/// are divided by 2^(bits-1).
pub fn decode_audio(path: &Path) -> Result<Waveform, DatasetError> {
    let audio_err = |message: String| DatasetError::Audio {
        path: path.to_path_buf(),
        message,
    };
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => DatasetError::Io {
            path: path.to_path_buf(),
            source,
        },
        hound::Error::Unsupported => DatasetError::UnsupportedFormat {
            path: path.to_path_buf(),
            message: "not a PCM WAV stream".into(),
        },
        other => audio_err(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.sample_rate == 0 {
        return Err(audio_err("zero channels or zero sample rate".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| audio_err(format!("truncated or corrupt data: {e}")))?,
        (SampleFormat::Int, bits @ 8..=32) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<Result<_, _>>()
                .map_err(|e| audio_err(format!("truncated or corrupt data: {e}")))?
        }
        (format, bits) => {
            return Err(DatasetError::UnsupportedFormat {
                path: path.to_path_buf(),
                message: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    let channels = spec.channels as usize;
    if !interleaved.len().is_multiple_of(channels) {
        return Err(audio_err("truncated final frame".into()));
    }
    let samples: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(audio_err("non-finite samples".into()));
    }
    Ok(Waveform::new(samples, spec.sample_rate))
}

/// Writes a mono 32-bit float WAV file.
pub fn write_wav(path: &Path, wave: &Waveform) -> Result<(), DatasetError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let to_err = |e: hound::Error| DatasetError::Audio {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = WavWriter::create(path, spec).map_err(to_err)?;
    for &s in &wave.samples {
        writer.write_sample(s as f32).map_err(to_err)?;
    }
    writer.finalize().map_err(to_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_i16(path: &Path, channels: u16, rate: u32, samples: &[i16]) {
        let spec = WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn one_second_of_silence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_i16(&p, 1, 44_100, &vec![0; 44_100]);
        let w = decode_audio(&p).unwrap();
        assert_eq!(w.sample_rate, 44_100);
        assert_eq!(w.len(), 44_100);
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn antiphase_stereo_averages_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let frames: Vec<i16> = (0..1000)
            .flat_map(|i| {
                let x = ((i * 37) % 2000 - 1000) as i16;
                [x, -x]
            })
            .collect();
        write_i16(&p, 2, 16_000, &frames);
        let w = decode_audio(&p).unwrap();
        assert_eq!(w.len(), 1000);
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_maps_to_unity() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_i16(&p, 1, 16_000, &[i16::MAX, i16::MIN]);
        let w = decode_audio(&p).unwrap();
        assert!((w.samples[0] - 1.0).abs() <= 1.0 / 32768.0);
        assert_eq!(w.samples[1], -1.0);
    }

    #[test]
    fn truncated_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_i16(&p, 1, 16_000, &vec![100; 4000]);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 1001]).unwrap();
        assert!(decode_audio(&p).is_err());
    }

    #[test]
    fn non_wav_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        std::fs::write(&p, b"ID3\x03\x00 this is an mp3").unwrap();
        assert!(decode_audio(&p).is_err());
        assert!(decode_audio(&dir.path().join("missing.wav")).is_err());
    }

    #[test]
    fn float_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.wav");
        let w = Waveform::new(vec![0.5, -0.25, 0.125], 8000);
        write_wav(&p, &w).unwrap();
        assert_eq!(decode_audio(&p).unwrap(), w);
    }
}
