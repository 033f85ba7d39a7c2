use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use msd_core::dataset::write_wav;
use msd_core::signals::{silence, speech_like};
use msd_core::{CompositeModel, FeatureMatrix};

fn msd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msd"))
        .args(args)
        .output()
        .expect("runs msd")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn synth_table(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("synth");
    let mut args = vec!["synth", "--out", path(&out)];
    args.extend_from_slice(extra);
    let o = msd(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out.join("features.csv")
}

/// Three recordings as `<dir>/audio/*.wav` plus a manifest; `broken` points
/// one entry at a missing file.
fn manifest(dir: &Path, broken: bool) -> PathBuf {
    let audio = dir.join("audio");
    std::fs::create_dir_all(&audio).unwrap();
    for (i, name) in ["a.wav", "b.wav", "c.wav"].iter().enumerate() {
        write_wav(&audio.join(name), &speech_like(10 + i as u64, 6, 22_050)).unwrap();
    }
    write_wav(&audio.join("quiet.wav"), &silence(1.0, 16_000)).unwrap();
    let third = if broken {
        "audio/missing.wav"
    } else {
        "audio/c.wav"
    };
    let text = format!(
        "{{\"id\": \"r1\", \"paths\": [\"audio/a.wav\"], \"label\": \"neurotypical\"}}\n\
         {{\"id\": \"r2\", \"paths\": [\"audio/b.wav\", \"audio/a.wav\"], \"label\": \"dysarthria\", \"trim\": [[0.1, 0.1], [0, 0.2]]}}\n\
         {{\"id\": \"r3\", \"paths\": [\"{third}\"], \"label\": \"aos\"}}\n"
    );
    let p = dir.join("manifest.jsonl");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn extract_writes_one_row_per_recording_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), false);
    let out = dir.path().join("out");
    let o = msd(&["extract", "--manifest", path(&m), "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(out.join("features.csv")).unwrap();
    let table = FeatureMatrix::read_csv(&first[..]).unwrap();
    assert_eq!(table.ids, ["r1", "r2", "r3"]);
    let header = String::from_utf8_lossy(&first)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header.split(',').count(), 30);
    assert_eq!(std::fs::read_to_string(out.join("errors.log")).unwrap(), "");
    let o = msd(&[
        "extract",
        "--manifest",
        path(&m),
        "--out",
        path(&out),
        "-j",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(out.join("features.csv")).unwrap(), first);
}

#[test]
fn extract_failure_is_named_in_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), true);
    let out = dir.path().join("out");
    let o = msd(&["extract", "--manifest", path(&m), "--out", path(&out), "-q"]);
    assert_eq!(code(&o), 3);
    let log = std::fs::read_to_string(out.join("errors.log")).unwrap();
    assert!(log.contains("`r3`") && log.contains("missing.wav"), "{log}");
    let table = FeatureMatrix::read_csv_file(&out.join("features.csv")).unwrap();
    assert_eq!(table.ids, ["r1", "r2"]);
}

#[test]
fn malformed_manifest_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.jsonl");
    std::fs::write(
        &m,
        "{\"id\": \"r1\", \"paths\": [], \"label\": \"typical\"}\n",
    )
    .unwrap();
    let o = msd(&[
        "extract",
        "--manifest",
        path(&m),
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn synth_is_deterministic_and_separation_moves_values_only() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(synth_table(
        &dir.path().join("a"),
        &["--seed", "3", "--separation", "0"],
    ))
    .unwrap();
    let b = std::fs::read(synth_table(
        &dir.path().join("b"),
        &["--seed", "3", "--separation", "0"],
    ))
    .unwrap();
    let c = synth_table(&dir.path().join("c"), &["--seed", "3", "--separation", "8"]);
    assert_eq!(a, b);
    let ta = FeatureMatrix::read_csv(&a[..]).unwrap();
    let tc = FeatureMatrix::read_csv_file(&c).unwrap();
    assert_eq!(ta.ids, tc.ids);
    assert_ne!(ta.rows, tc.rows);
    assert_eq!(ta.names.len(), 28);
    assert_eq!(ta.class_counts(), [29, 20, 10]);
    let o = msd(&["synth", "--out", path(dir.path()), "--sizes", "3,5,5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn evaluate_layout_models_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let features = synth_table(dir.path(), &["--separation", "8", "--sizes", "12,10,8"]);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = msd(&[
            "evaluate",
            "--features",
            path(&features),
            "--out",
            path(&out),
            "--set",
            "evaluation.repetitions=2",
            "--set",
            "evaluation.n_features=[5, 10]",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    for f in [
        "report.json",
        "report.md",
        "models/hierarchical.json",
        "models/ovr.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        std::fs::read(a.join("features.csv")).unwrap(),
        std::fs::read(&features).unwrap()
    );
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["evaluation"]["repetitions"], 2);
    assert_eq!(report["tool_version"], msd_core::VERSION);
    assert_eq!(report["schemes"].as_array().unwrap().len(), 4);
    let model =
        CompositeModel::from_artifact(&std::fs::read_to_string(a.join("models/ovo.json")).unwrap())
            .unwrap();
    assert_eq!(model.members().len(), 3);
    let o = msd(&["inspect-model", path(&a.join("models/hierarchical.json"))]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.starts_with("Hierarchical with feature selection model"),
        "{text}"
    );
    assert!(text.contains("stage1:") && text.contains("stage2:"));
}

#[test]
fn evaluate_usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let features = synth_table(dir.path(), &[]);
    let out = dir.path().join("o");
    let f = path(&features);
    assert_eq!(
        code(&msd(&[
            "evaluate",
            "--features",
            f,
            "--out",
            path(&out),
            "--schemes",
            ""
        ])),
        2
    );
    assert_eq!(
        code(&msd(&[
            "evaluate",
            "--features",
            f,
            "--out",
            path(&out),
            "--schemes",
            "svm"
        ])),
        2
    );
    assert_eq!(
        code(&msd(&[
            "evaluate",
            "--features",
            f,
            "--out",
            path(&out),
            "--set",
            "dsp.window_mz=4"
        ])),
        2
    );
    assert_eq!(
        code(&msd(&[
            "evaluate",
            "--features",
            f,
            "--out",
            path(&out),
            "--set",
            "evaluation.outer_folds=50"
        ])),
        3
    );
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "id,label,x\na,neurotypical,nan\n").unwrap();
    assert_eq!(
        code(&msd(&[
            "evaluate",
            "--features",
            path(&bad),
            "--out",
            path(&out)
        ])),
        3
    );
    assert_eq!(code(&msd(&["evaluate", "--features", f])), 2);
}

#[test]
fn convergence_failure_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let features = synth_table(dir.path(), &["--sizes", "10,10,10"]);
    let o = msd(&[
        "evaluate",
        "--features",
        path(&features),
        "--out",
        path(&dir.path().join("o")),
        "--schemes",
        "ovr",
        "--no-models",
        "-q",
        "--set",
        "evaluation.grid_mode=endpoints",
        "--set",
        "evaluation.c_range=[100, 100]",
        "--set",
        "evaluation.n_features=[10]",
        "--set",
        "svm.max_iterations=1",
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_judges(dir: &Path, features: &Path, extra: &str) -> PathBuf {
    let t = FeatureMatrix::read_csv_file(features).unwrap();
    let mut text = String::from("judge_id,recording_id,stage1,stage2\n");
    for judge in ["j1", "j2", "j3"] {
        for (id, label) in t.ids.iter().zip(&t.labels) {
            let (s1, s2) = if label.is_patient() {
                ("patient", label.as_str())
            } else {
                ("neurotypical", "")
            };
            text.push_str(&format!("{judge},{id},{s1},{s2}\n"));
        }
    }
    text.push_str(extra);
    let p = dir.join("judges.csv");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn perceptual_table_for_perfect_judges_and_classifier() {
    let dir = tempfile::tempdir().unwrap();
    let features = synth_table(dir.path(), &["--separation", "8", "--sizes", "10,10,10"]);
    let judges = write_judges(dir.path(), &features, "");
    let out = dir.path().join("p");
    let o = msd(&[
        "perceptual",
        "--features",
        path(&features),
        "--judges",
        path(&judges),
        "--out",
        path(&out),
        "--set",
        "evaluation.repetitions=2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(out.join("report.md")).unwrap();
    let rows: Vec<&str> = md
        .lines()
        .skip_while(|l| !l.starts_with("| Accuracy [%]"))
        .skip(2)
        .take(5)
        .collect();
    assert_eq!(
        rows,
        [
            "| Balanced | 100.0 ± 0.0 | 100.0 ± 0.0 |",
            "| Neurotypical | 100.0 ± 0.0 | 100.0 ± 0.0 |",
            "| Patient | 100.0 ± 0.0 | 100.0 ± 0.0 |",
            "| Dysarthria | 100.0 ± 0.0 | 100.0 ± 0.0 |",
            "| AoS | 100.0 ± 0.0 | 100.0 ± 0.0 |",
        ]
    );

    // Re-using the saved report gives the same result without re-running.
    let again = dir.path().join("q");
    let o = msd(&[
        "perceptual",
        "--features",
        path(&features),
        "--judges",
        path(&judges),
        "--report",
        path(&out.join("report.json")),
        "--out",
        path(&again),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(out.join("report.json")).unwrap(),
        std::fs::read(again.join("report.json")).unwrap()
    );
}

#[test]
fn perceptual_unknown_id_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let features = synth_table(dir.path(), &["--sizes", "10,10,10"]);
    let judges = write_judges(dir.path(), &features, "j1,ghost-07,patient,aos\n");
    let o = msd(&[
        "perceptual",
        "--features",
        path(&features),
        "--judges",
        path(&judges),
        "--out",
        path(&dir.path().join("p")),
        "--set",
        "evaluation.repetitions=1",
    ]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost-07"));
}

#[test]
fn inspect_rejects_tampered_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    std::fs::write(&p, "{\"format\": \"something-else\"}").unwrap();
    assert_eq!(code(&msd(&["inspect-model", path(&p)])), 3);
    assert_eq!(
        code(&msd(&[
            "inspect-model",
            path(&dir.path().join("none.json"))
        ])),
        1
    );
}
