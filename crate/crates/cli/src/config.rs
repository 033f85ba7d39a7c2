//! Effective configuration: built-in defaults, then the config file, then
//! `--set` overrides, then dedicated flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use msd_core::Config;
use toml::{Table, Value};

/// Parses `key.path=value`. The value is read as a TOML literal when it
/// parses as one and as a bare string otherwise, so `grid_mode=endpoints`
/// works without quotes.
pub fn parse_override(spec: &str) -> anyhow::Result<(Vec<String>, Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    let path: Vec<String> = key
        .trim()
        .split('.')
        .map(|s| s.trim().to_string())
        .collect();
    if path.iter().any(String::is_empty) {
        bail!("override `{spec}` has an empty key segment");
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => Value::String(raw.to_string()),
    };
    Ok((path, value))
}

fn insert(table: &mut Table, path: &[String], value: Value) -> anyhow::Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for (depth, seg) in parents.iter().enumerate() {
        let entry = cur
            .entry(seg.clone())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{}` is not a section", path[..=depth].join(".")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

pub fn load(
    file: Option<&Path>,
    overrides: &[String],
    seed: Option<u64>,
) -> anyhow::Result<Config> {
    let mut table = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            text.parse::<Table>()
                .with_context(|| format!("parsing config {}", p.display()))?
        }
        None => Table::new(),
    };
    for spec in overrides {
        let (path, value) = parse_override(spec)?;
        insert(&mut table, &path, value)?;
    }
    if let Some(seed) = seed {
        // toml integers are i64; larger seeds cannot come through the table.
        let v = i64::try_from(seed).map_err(|_| anyhow!("--seed must be at most {}", i64::MAX))?;
        insert(
            &mut table,
            &["evaluation".into(), "seed".into()],
            Value::Integer(v),
        )?;
    }
    Value::Table(table)
        .try_into::<Config>()
        .map_err(|e| anyhow!("invalid configuration: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_core::config::GridMode;

    #[test]
    fn file_then_overrides_then_seed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "dsp.window_ms = 40\n[evaluation]\nrepetitions = 3\nseed = 5\n",
        )
        .unwrap();
        let cfg = load(
            Some(&path),
            &[
                "evaluation.repetitions=2".into(),
                "evaluation.grid_mode=endpoints".into(),
            ],
            Some(9),
        )
        .unwrap();
        assert_eq!(cfg.dsp.window_ms, 40.0);
        assert_eq!(cfg.evaluation.repetitions, 2);
        assert_eq!(cfg.evaluation.grid_mode, GridMode::Endpoints);
        assert_eq!(cfg.evaluation.seed, 9);
        assert_eq!(cfg.dsp.nfft, 512);
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        assert!(load(None, &["dsp.window_mz=3".into()], None).is_err());
        assert!(load(None, &["nonsense=1".into()], None).is_err());
        assert!(load(None, &["dsp.window_ms".into()], None).is_err());
        assert!(load(None, &["dsp..x=1".into()], None).is_err());
        assert!(load(
            None,
            &["dsp.window_ms=3".into(), "dsp.window_ms.x=1".into()],
            None
        )
        .is_err());
    }

    #[test]
    fn literal_values() {
        assert_eq!(
            parse_override("a.b=[5, 10]").unwrap().1,
            Value::Array(vec![5.into(), 10.into()])
        );
        assert_eq!(parse_override("a=true").unwrap().1, Value::Boolean(true));
        assert_eq!(
            parse_override("a = x y").unwrap().1,
            Value::String("x y".into())
        );
        let cfg = load(None, &["evaluation.c_range=[1, 10]".into()], None).unwrap();
        assert_eq!(cfg.evaluation.c_range, [1.0, 10.0]);
    }
}
