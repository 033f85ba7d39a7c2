use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::ClassLabel;
use crate::error::DatasetError;

/// Seconds removed from the start and end of one file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrimSpan {
    pub lead: f64,
    pub trail: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub recording_id: String,
    /// Files concatenated in this order.
    pub audio_paths: Vec<PathBuf>,
    pub label: ClassLabel,
    pub speaker_meta: BTreeMap<String, String>,
    /// Either empty or one span per path.
    pub trim_spans: Vec<TrimSpan>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    paths: Vec<PathBuf>,
    label: String,
    #[serde(default)]
    trim: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    meta: Option<BTreeMap<String, serde_json::Value>>,
}

/// Reads a JSON Lines manifest. Relative audio paths resolve against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, path, base)
}

pub fn parse_manifest(
    text: &str,
    origin: &Path,
    base: &Path,
) -> Result<Vec<ManifestEntry>, DatasetError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| DatasetError::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let label = raw
            .label
            .parse::<ClassLabel>()
            .map_err(|e| parse_err(e.to_string()))?;
        if raw.paths.is_empty() {
            return Err(parse_err("`paths` must not be empty".into()));
        }
        let trim_spans = match raw.trim {
            None => Vec::new(),
            Some(spans) => {
                if spans.len() != raw.paths.len() {
                    return Err(parse_err(format!(
                        "`trim` has {} spans for {} paths",
                        spans.len(),
                        raw.paths.len()
                    )));
                }
                if spans.iter().flatten().any(|s| !s.is_finite() || *s < 0.0) {
                    return Err(parse_err(
                        "trim spans must be finite and non-negative".into(),
                    ));
                }
                spans
                    .into_iter()
                    .map(|[lead, trail]| TrimSpan { lead, trail })
                    .collect()
            }
        };
        if !seen.insert(raw.id.clone()) {
            return Err(DatasetError::DuplicateId {
                path: origin.to_path_buf(),
                line: line_no,
                id: raw.id,
            });
        }
        let speaker_meta = raw
            .meta
            .unwrap_or_default()
            .into_iter()
            .map(|(k, v)| {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, v)
            })
            .collect();
        entries.push(ManifestEntry {
            recording_id: raw.id,
            audio_paths: raw.paths.into_iter().map(|p| base.join(p)).collect(),
            label,
            speaker_meta,
            trim_spans,
        });
    }
    Ok(entries)
}
