use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use echogest_bench::{gesture_blocks, two_class_points};
use echogest_core::classifier::{lssvm_train, KernelParams};
use echogest_core::dsp::{BlockCorrelator, Correlator, MotionPipeline};
use echogest_core::signal::{make_chirp, ChirpDirection};
use echogest_core::{DspConfig, GestureKind, MotionProfile, ProfileFeatures, PulseTrainConfig};

fn correlation(c: &mut Criterion) {
    let cfg = PulseTrainConfig::default();
    let chirp = make_chirp(&cfg, ChirpDirection::Up).unwrap();
    let period: Vec<f64> = (0..cfg.period_samples()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let corr = Correlator::new(&chirp.samples, period.len()).unwrap();
    c.bench_function("correlate_one_period", |b| b.iter(|| corr.correlate(black_box(&period)).unwrap()));

    let blocks = gesture_blocks(GestureKind::Fwd, 1);
    let block_corr = BlockCorrelator::new(&cfg).unwrap();
    c.bench_function("block_correlate", |b| b.iter(|| block_corr.correlate(black_box(&blocks[40]), 40).unwrap()));
}

fn block_pipeline(c: &mut Criterion) {
    let cfg = PulseTrainConfig::default();
    let dsp = DspConfig::default();
    let blocks = gesture_blocks(GestureKind::SwipeLtr, 2);
    let mut g = c.benchmark_group("gesture");
    g.sample_size(20);
    g.bench_function("motion_frames_100_blocks", |b| {
        b.iter(|| MotionPipeline::run(&cfg, &dsp, black_box(&blocks)).unwrap())
    });
    let frames = MotionPipeline::run(&cfg, &dsp, &blocks).unwrap();
    let profile = MotionProfile::new(frames, None);
    g.bench_function("features", |b| b.iter(|| ProfileFeatures::from_profile(black_box(&profile))));
    g.finish();
}

fn lssvm(c: &mut Criterion) {
    let mut g = c.benchmark_group("lssvm_train");
    g.sample_size(10);
    for n in [100usize, 400] {
        let (x, y) = two_class_points(n, 100);
        let kp = KernelParams { degree: 3, offset: 1.0, scale: 0.01 };
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| lssvm_train(black_box(&x), &y, &kp, 10.0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, correlation, block_pipeline, lssvm);
criterion_main!(benches);
