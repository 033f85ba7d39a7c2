use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use msd_core::dataset::load_manifest;
use msd_core::evaluation::{
    load_judge_responses, perceptual_metrics, render_markdown, run_experiment, synth_cohort,
    train_final_model,
};
use msd_core::features::extract_manifest;
use msd_core::{
    ClassLabel, CompositeModel, Config, EvaluationReport, FeatureMatrix, Scheme, SvmModel,
};

use crate::{logging, CmdResult, Exit, Failure};

const FEATURES_CSV: &str = "features.csv";
const REPORT_JSON: &str = "report.json";
const REPORT_MD: &str = "report.md";
const ERRORS_LOG: &str = "errors.log";
const MODELS_DIR: &str = "models";

#[derive(Args)]
pub struct ExtractArgs {
    /// JSON Lines manifest; relative audio paths resolve against its directory.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Feature table with `id` and `label` columns.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated: hierarchical, hierarchical-no-fs, ovo, ovr.
    #[arg(long, default_value = "hierarchical,hierarchical-no-fs,ovo,ovr")]
    pub schemes: String,
    /// Judge responses to report next to the automatic results.
    #[arg(long)]
    pub judges: Option<PathBuf>,
    /// Skip training the final all-data models.
    #[arg(long)]
    pub no_models: bool,
}

#[derive(Args)]
pub struct PerceptualArgs {
    /// Feature table supplying the true labels (and the data, if no report is given).
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub judges: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Existing `report.json` to extend instead of re-running the evaluation.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Schemes to evaluate when no report is given.
    #[arg(long, default_value = "hierarchical")]
    pub schemes: String,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Recordings per class: neurotypical,dysarthria,aos.
    #[arg(long, default_value = "29,20,10")]
    pub sizes: String,
    /// Class shift in within-class standard deviations.
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
}

#[derive(Args)]
pub struct InspectArgs {
    pub model: PathBuf,
    /// Print the verified payload as JSON instead of a summary.
    #[arg(long)]
    pub json: bool,
}

fn create_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::from)
}

/// Opens `errors.log` fresh and routes warnings into it.
fn open_error_log(dir: &Path) -> Result<(), Failure> {
    let path = dir.join(ERRORS_LOG);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    logging::attach_sink(f);
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::from)
}

fn parse_schemes(list: &str) -> Result<Vec<Scheme>, Failure> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let s: Scheme = item.parse().map_err(Failure::usage)?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Failure::usage("no scheme requested"));
    }
    Ok(out)
}

fn read_features(path: &Path) -> Result<FeatureMatrix, Failure> {
    FeatureMatrix::read_csv_file(path).map_err(|e| Failure::from(msd_core::Error::from(e)))
}

fn write_reports(dir: &Path, report: &EvaluationReport) -> CmdResult {
    write_file(&dir.join(REPORT_JSON), &report.to_json())?;
    write_file(&dir.join(REPORT_MD), &render_markdown(report))
}

fn print_summary(report: &EvaluationReport) {
    for s in &report.schemes {
        println!(
            "{:<40} balanced accuracy {}",
            s.title,
            s.summary.balanced.percent()
        );
    }
    if let Some(p) = &report.perceptual {
        println!(
            "{:<40} balanced accuracy {}",
            format!("perceptual ({} judges)", p.judges.len()),
            p.summary.balanced.percent()
        );
    }
}

pub fn extract(a: &ExtractArgs, cfg: &Config) -> CmdResult {
    let entries =
        load_manifest(&a.manifest).map_err(|e| Failure::from(msd_core::Error::from(e)))?;
    create_out_dir(&a.out)?;
    open_error_log(&a.out)?;
    let out = extract_manifest(&entries, cfg);
    let csv = a.out.join(FEATURES_CSV);
    out.matrix
        .write_csv_file(&csv)
        .map_err(|e| Failure::new(Exit::Other, msd_core::Error::from(e)))?;
    for f in &out.failures {
        log::error!("recording `{}`: {}", f.id, f.message);
    }
    println!(
        "{} of {} recordings extracted to {}",
        out.matrix.len(),
        entries.len(),
        csv.display()
    );
    if out.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            Exit::Data,
            anyhow::anyhow!(
                "{} recording(s) failed; see {}",
                out.failures.len(),
                a.out.join(ERRORS_LOG).display()
            ),
        ))
    }
}

/// Keeps a copy of the input table in the output directory unless it is
/// already there.
fn mirror_features(src: &Path, dir: &Path) -> CmdResult {
    let dst = dir.join(FEATURES_CSV);
    let same = match (src.canonicalize(), dst.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if !same {
        fs::copy(src, &dst).with_context(|| format!("copying features to {}", dst.display()))?;
    }
    Ok(())
}

fn attach_judges(report: &mut EvaluationReport, m: &FeatureMatrix, judges: &Path) -> CmdResult {
    let responses =
        load_judge_responses(judges).map_err(|e| Failure::from(msd_core::Error::from(e)))?;
    let truths: HashMap<String, ClassLabel> = m
        .ids
        .iter()
        .cloned()
        .zip(m.labels.iter().copied())
        .collect();
    let perceptual = perceptual_metrics(&responses, &truths)
        .map_err(|e| Failure::from(msd_core::Error::from(e)))?;
    report.perceptual = Some(perceptual);
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs, cfg: &Config) -> CmdResult {
    let schemes = parse_schemes(&a.schemes)?;
    let m = read_features(&a.features)?;
    create_out_dir(&a.out)?;
    open_error_log(&a.out)?;
    mirror_features(&a.features, &a.out)?;
    let mut report = run_experiment(&m, &schemes, cfg)?;
    if let Some(j) = &a.judges {
        attach_judges(&mut report, &m, j)?;
    }
    write_reports(&a.out, &report)?;
    if !a.no_models {
        let dir = a.out.join(MODELS_DIR);
        create_out_dir(&dir)?;
        for &s in &schemes {
            let (model, _) = train_final_model(&m, s, cfg)?;
            let text = model
                .to_artifact()
                .map_err(|e| Failure::new(Exit::Other, msd_core::Error::from(e)))?;
            write_file(&dir.join(format!("{}.json", s.as_str())), &text)?;
        }
    }
    print_summary(&report);
    Ok(())
}

pub fn perceptual(a: &PerceptualArgs, cfg: &Config) -> CmdResult {
    let m = read_features(&a.features)?;
    create_out_dir(&a.out)?;
    open_error_log(&a.out)?;
    let mut report = match &a.report {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let r: EvaluationReport = serde_json::from_str(&text)
                .with_context(|| format!("parsing report {}", p.display()))
                .map_err(|e| Failure::new(Exit::Data, e))?;
            if r.cohort.recordings != m.len() {
                return Err(Failure::new(
                    Exit::Data,
                    anyhow::anyhow!(
                        "report covers {} recordings but {} has {}",
                        r.cohort.recordings,
                        a.features.display(),
                        m.len()
                    ),
                ));
            }
            r
        }
        None => run_experiment(&m, &parse_schemes(&a.schemes)?, cfg)?,
    };
    attach_judges(&mut report, &m, &a.judges)?;
    write_reports(&a.out, &report)?;
    print_summary(&report);
    Ok(())
}

pub fn synth(a: &SynthArgs, cfg: &Config) -> CmdResult {
    let sizes: Vec<usize> = a
        .sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::usage(format!("--sizes: {e}")))?;
    let counts: [usize; 3] = sizes
        .try_into()
        .map_err(|_| Failure::usage("--sizes takes three counts: neurotypical,dysarthria,aos"))?;
    let m = synth_cohort(cfg.evaluation.seed, counts, a.separation).map_err(Failure::usage)?;
    create_out_dir(&a.out)?;
    let path = a.out.join(FEATURES_CSV);
    m.write_csv_file(&path)
        .map_err(|e| Failure::new(Exit::Other, msd_core::Error::from(e)))?;
    println!(
        "{} synthetic recordings written to {}",
        m.len(),
        path.display()
    );
    Ok(())
}

fn describe_svm(out: &mut String, name: &str, m: &SvmModel) {
    let p = &m.params;
    let _ = writeln!(
        out,
        "{name}: {} (+1) vs {} (-1), C = {}, gamma = {}, n_f = {}",
        m.class_map.positive, m.class_map.negative, p.c, p.gamma, p.n_f
    );
    let _ = writeln!(
        out,
        "  {} support vectors of {} training rows, bias {:.6}, {} solver iterations, KKT gap {:.2e}",
        m.support_vectors.len(),
        m.fit.n_train,
        m.bias,
        m.fit.iterations,
        m.fit.kkt_gap
    );
    let _ = writeln!(out, "  features: {}", m.feature_names.join(", "));
}

pub fn inspect_model(a: &InspectArgs) -> CmdResult {
    let text =
        fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let artifact_err = |e: msd_core::error::ArtifactError| Failure::new(Exit::Data, e);
    let mut out = String::new();
    match CompositeModel::from_artifact(&text) {
        Ok(model) => {
            if a.json {
                out = serde_json::to_string_pretty(&model).expect("model serializes");
                out.push('\n');
            } else {
                let _ = writeln!(out, "{} model", model.scheme.title());
                for (task, member) in model.tasks.iter().zip(model.members()) {
                    describe_svm(&mut out, &task.name(), member);
                }
            }
        }
        Err(msd_core::error::ArtifactError::Kind { .. }) => {
            let model = SvmModel::from_artifact(&text).map_err(artifact_err)?;
            if a.json {
                out = serde_json::to_string_pretty(&model).expect("model serializes");
                out.push('\n');
            } else {
                describe_svm(&mut out, "binary SVM", &model);
            }
        }
        Err(e) => return Err(artifact_err(e)),
    }
    print!("{out}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use msd_core::evaluation::MeanStd;

    #[test]
    fn scheme_lists() {
        assert_eq!(
            parse_schemes("ovo, ovr,ovo").unwrap(),
            [Scheme::Ovo, Scheme::Ovr]
        );
        assert_eq!(parse_schemes("").unwrap_err().exit, Exit::Usage);
        assert_eq!(parse_schemes(" , ").unwrap_err().exit, Exit::Usage);
        assert_eq!(parse_schemes("svm").unwrap_err().exit, Exit::Usage);
    }

    #[test]
    fn summary_uses_mean_std_formatting() {
        assert_eq!(
            MeanStd {
                mean: 0.5,
                std: 0.1
            }
            .percent(),
            "50.0 ± 10.0"
        );
    }
}
