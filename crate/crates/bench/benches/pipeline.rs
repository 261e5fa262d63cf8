use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use tempdrift_bench::stream;
use tempdrift_core::alerting::{default_profiles, detect_drift};
use tempdrift_core::baselines::run_baselines;
use tempdrift_core::metrics::bin_summary;
use tempdrift_core::model::{parse_records, to_jsonl_string};
use tempdrift_core::pipeline::analyze_dataset;
use tempdrift_core::stats::{bootstrap_ci, BootstrapParams, Statistic};
use tempdrift_core::temporal::{assign_bins, window_partition};
use tempdrift_core::{
    BaselineConfig, DetectionConfig, InputFormat, LabelSet, PredictionRecord, RunConfig, WindowMetrics,
};

fn zero_training_path(c: &mut Criterion) {
    let mut group = c.benchmark_group("zero_training_path");
    for n in [10_000usize, 20_000, 40_000] {
        let (cfg, ds) = stream(n, false, 0);
        let jsonl = to_jsonl_string(&ds);
        let event = cfg.event_config();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &jsonl, |b, text| {
            b.iter(|| {
                let ds = parse_records(text.as_bytes(), InputFormat::Jsonl, &LabelSet::sentiment3()).unwrap();
                let bins = assign_bins(&ds).unwrap();
                let w = window_partition(&bins, &event).unwrap();
                let wm = WindowMetrics::compute(&w, ds.label_set());
                black_box(detect_drift("bench", &wm, &DetectionConfig::default(), &default_profiles()).unwrap())
            })
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let (_, ds) = stream(26 * 2_000, false, 0);
    let bins = assign_bins(&ds).unwrap();
    c.bench_function("bin_summary_2000", |b| {
        b.iter(|| black_box(bin_summary(&bins[0], ds.label_set())))
    });
}

fn bootstrap(c: &mut Criterion) {
    let (_, ds) = stream(2_000, false, 0);
    let xs: Vec<f64> = ds.records().iter().map(|r| r.confidence).collect();
    c.bench_function("bootstrap_mean_1000x2000", |b| {
        b.iter(|| black_box(bootstrap_ci(&xs, Statistic::Mean, BootstrapParams::default()).unwrap()))
    });
}

fn baselines(c: &mut Criterion) {
    let (cfg, ds) = stream(26 * 200, true, 16);
    let bins = assign_bins(&ds).unwrap();
    let w = window_partition(&bins, &cfg.event_config()).unwrap();
    let pre: Vec<&PredictionRecord> = w.pre.iter().flat_map(|b| &b.records).collect();
    let during: Vec<&PredictionRecord> = w.during.iter().flat_map(|b| &b.records).collect();
    let bcfg = BaselineConfig::default();
    c.bench_function("baselines_all_methods", |b| {
        b.iter(|| black_box(run_baselines(&pre, &during, &bcfg, 42)))
    });
}

fn full_report(c: &mut Criterion) {
    let (synth, ds) = stream(26 * 200, true, 16);
    let cfg = RunConfig {
        synth: Some(synth),
        ..Default::default()
    };
    let mut group = c.benchmark_group("report");
    group.sample_size(10);
    group.bench_function("analyze_5200", |b| {
        b.iter(|| black_box(analyze_dataset(&ds, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, zero_training_path, metrics, bootstrap, baselines, full_report);
criterion_main!(benches);
