//! Versioned, checksummed JSON envelope for trained models.
//!
//! The checksum is the SHA-256 of the compact payload serialization; the
//! payload is re-serialized after parsing, so any altered value, key or
//! structure is detected.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ArtifactError;

pub const FORMAT: &str = "msd-model";
pub const SCHEMA_MAJOR: u32 = 1;
pub const SCHEMA_MINOR: u32 = 0;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    schema_version: String,
    kind: String,
    tool_version: String,
    checksum: String,
    payload: serde_json::Value,
}

fn digest(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

/// Serializes `value` as a `kind` artifact.
pub fn seal<T: Serialize>(kind: &str, value: &T) -> Result<String, ArtifactError> {
    let compact =
        serde_json::to_string(value).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    let payload: serde_json::Value =
        serde_json::from_str(&compact).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    let env = Envelope {
        format: FORMAT.to_string(),
        schema_version: format!("{SCHEMA_MAJOR}.{SCHEMA_MINOR}"),
        kind: kind.to_string(),
        tool_version: crate::VERSION.to_string(),
        checksum: digest(&compact),
        payload,
    };
    let mut text =
        serde_json::to_string_pretty(&env).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses a `kind` artifact, checking format, schema version and checksum.
pub fn unseal<T: Serialize + DeserializeOwned>(kind: &str, text: &str) -> Result<T, ArtifactError> {
    let env: Envelope =
        serde_json::from_str(text).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    if env.format != FORMAT {
        return Err(ArtifactError::Malformed(format!(
            "unknown format `{}`",
            env.format
        )));
    }
    let major = env
        .schema_version
        .split('.')
        .next()
        .and_then(|m| m.parse::<u32>().ok())
        .ok_or_else(|| ArtifactError::Version {
            found: env.schema_version.clone(),
            supported: SCHEMA_MAJOR,
        })?;
    if major != SCHEMA_MAJOR {
        return Err(ArtifactError::Version {
            found: env.schema_version,
            supported: SCHEMA_MAJOR,
        });
    }
    if env.kind != kind {
        return Err(ArtifactError::Kind {
            found: env.kind,
            expected: kind.to_string(),
        });
    }
    // A corrupted payload may fail to parse or parse to different values;
    // both are checksum failures.
    let value: T = serde_json::from_value(env.payload).map_err(|_| ArtifactError::Checksum)?;
    let compact =
        serde_json::to_string(&value).map_err(|e| ArtifactError::Malformed(e.to_string()))?;
    if digest(&compact) != env.checksum {
        return Err(ArtifactError::Checksum);
    }
    Ok(value)
}

/// Serde adapter for `Vec<f64>` that writes non-finite entries as the
/// strings `"inf"`, `"-inf"` and `"nan"`.
pub mod extended_floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = values
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    Repr::Num(v)
                } else if v.is_nan() {
                    Repr::Text("nan".into())
                } else if v > 0.0 {
                    Repr::Text("inf".into())
                } else {
                    Repr::Text("-inf".into())
                }
            })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let reprs = Vec::<Repr>::deserialize(d)?;
        reprs
            .into_iter()
            .map(|r| match r {
                Repr::Num(v) => Ok(v),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(serde::de::Error::custom(format!("invalid float `{other}`"))),
                },
            })
            .collect()
    }
}
