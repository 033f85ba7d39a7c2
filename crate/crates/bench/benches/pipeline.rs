use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use msd_core::classifiers::Task;
use msd_core::dsp::{fit_chi_shape, stft, StftConfig};
use msd_core::evaluation::{nested_tune, synth_cohort, GridSpec};
use msd_core::features::extract_features;
use msd_core::signals::{speech_like, white_noise};
use msd_core::svm::train_svm;
use msd_core::{Config, HyperParams, Scheme};

fn dsp(c: &mut Criterion) {
    let cfg = Config::default();
    let noise = white_noise(1.0, 1.0, 16_000, 1);
    let magnitudes: Vec<f64> = noise.samples.iter().map(|v| v.abs()).collect();
    c.bench_function("chi fit, 16k samples", |b| {
        b.iter(|| fit_chi_shape(black_box(&magnitudes)))
    });

    let speech = speech_like(2, 8, 16_000);
    let stft_cfg = StftConfig::from_dsp(&cfg.dsp).unwrap();
    c.bench_function("stft, speech-like", |b| {
        b.iter(|| stft(black_box(&speech), &stft_cfg))
    });
    c.bench_function("28 features, speech-like", |b| {
        b.iter(|| extract_features(black_box(&speech), &cfg, "bench"))
    });
}

fn classification(c: &mut Criterion) {
    let cfg = Config::default();
    let m = synth_cohort(1, [29, 20, 10], 1.0).unwrap();
    let (idx, positive) = Task::Stage1.view(&m.labels);
    let rows: Vec<&[f64]> = idx.iter().map(|&i| m.rows[i].as_slice()).collect();
    let hp = HyperParams::new(10.0, 0.01, 10);
    c.bench_function("svm train, 59 x 28, stage 1", |b| {
        b.iter(|| {
            train_svm(
                &rows,
                &positive,
                &hp,
                &m.names,
                Task::Stage1.class_map(),
                &cfg.svm,
            )
        })
    });

    let grid = GridSpec::from_config(&cfg.evaluation)
        .unwrap()
        .for_scheme(Scheme::Hierarchical, m.dim());
    let mut group = c.benchmark_group("tuning");
    group.sample_size(10);
    group.bench_function("nested tune, stage 1, default grid", |b| {
        b.iter(|| nested_tune(&m.rows, &m.labels, Task::Stage1, &grid, 5, 7, &cfg.svm))
    });
    group.finish();
}

criterion_group!(benches, dsp, classification);
criterion_main!(benches);
