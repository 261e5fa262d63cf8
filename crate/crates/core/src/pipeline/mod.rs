//! End-to-end analysis: ingest, bin, window, metrics, baselines, stats and
//! alerting, assembled into a [`DriftReport`].

mod config;
mod emit;

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use config::{EmitFormat, InputConfig, MetricsConfig, OutputConfig, RunConfig, StatsConfig};
pub use emit::{canonical_json, emit_report};

use crate::alerting::{detect_drift, DriftVerdict};
use crate::baselines::{run_baselines, BaselineOutcome};
use crate::error::{Error, Result, Stage};
use crate::metrics::{max_drop, BinMetrics, DropResult, Metric, WindowMetrics};
use crate::model::{parse_records, Dataset, LabelSet, PredictionRecord};
use crate::stats::{
    anova, bh_fdr, bootstrap_ci_with, effect_sizes, pearson_permutation_p, pearson_r, permutation_p, BootstrapCI,
    BootstrapParams, EffectSizeReport,
};
use crate::temporal::{assign_bins, window_partition, EventConfig, EventWindows, TemporalBin};

pub const TOOL_NAME: &str = "tempdrift";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Pre,
    During,
    Post,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub n_records: usize,
    pub n_days: usize,
    pub first_day: NaiveDate,
    pub last_day: NaiveDate,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSizes {
    pub pre_days: usize,
    pub during_days: usize,
    pub post_days: usize,
    pub pre_records: usize,
    pub during_records: usize,
    pub post_records: usize,
    pub truncated_baseline: bool,
    pub truncated_post: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRow {
    pub window: Window,
    /// Whether the day has enough records to count toward drops.
    pub qualifying: bool,
    pub metrics: BinMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub outcome: BaselineOutcome,
    pub detected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleUnit {
    Record,
    Day,
}

/// Effect sizes of the during window against the pre window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEffect {
    pub metric: Metric,
    pub unit: SampleUnit,
    pub effects: EffectSizeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: String,
    pub p_value: f64,
    pub adjusted_p: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrSummary {
    pub alpha: f64,
    pub permutations: usize,
    pub seed: u64,
    pub tests: Vec<TestOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaSummary {
    pub metric: Metric,
    pub unit: SampleUnit,
    pub groups: Vec<Window>,
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    pub x: String,
    pub y: String,
    pub n_days: usize,
    pub r: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub name: String,
    pub event: EventConfig,
    pub windows: WindowSizes,
    pub series: Vec<DayRow>,
    pub drops: Vec<DropResult>,
    pub bootstrap: Vec<BootstrapCI>,
    pub effect_sizes: Vec<MetricEffect>,
    pub anova: Option<AnovaSummary>,
    pub correlation: Option<CorrelationSummary>,
    pub fdr: FdrSummary,
    pub baselines: Vec<BaselineResult>,
    pub verdict: DriftVerdict,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub events: Vec<EventReport>,
    /// Present only when timing was requested.
    pub runtime_ms: Option<f64>,
}

impl DriftReport {
    pub fn any_drift(&self) -> bool {
        self.events.iter().any(|e| e.verdict.detected)
    }
}

/// Reads every configured input into one dataset.
pub fn ingest(config: &RunConfig, labels: &LabelSet) -> Result<Dataset> {
    let Some(first) = config.input.paths.first() else {
        return Err(Error::Config("no input paths".into()));
    };
    let name = first
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_owned());
    let mut records = Vec::new();
    for path in &config.input.paths {
        let file = File::open(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let ds = parse_records(BufReader::new(file), config.input.format, labels)?;
        records.extend(ds.into_records());
    }
    Dataset::new(name, labels.clone(), records)
}

/// Baselines for one event, as produced by [`run_baselines_only`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventBaselines {
    pub event: String,
    pub pre_records: usize,
    pub during_records: usize,
    pub baselines: Vec<BaselineResult>,
}

/// Scores every configured baseline and applies its decision threshold.
pub fn score_baselines(
    pre: &[&PredictionRecord],
    during: &[&PredictionRecord],
    config: &RunConfig,
) -> Vec<BaselineResult> {
    run_baselines(pre, during, &config.baselines, config.stats.seed)
        .into_iter()
        .map(|outcome| BaselineResult {
            detected: config.baseline_thresholds.detects(&outcome, pre.len(), during.len()),
            outcome,
        })
        .collect()
}

/// Ingest, bin and window, then run only the baselines for each event.
pub fn run_baselines_only(config: &RunConfig) -> Result<Vec<EventBaselines>> {
    config.validate().map_err(|e| e.at(Stage::Config))?;
    let labels = config.label_set().map_err(|e| e.at(Stage::Config))?;
    let dataset = ingest(config, &labels).map_err(|e| e.at(Stage::Ingest))?;
    let bins = assign_bins(&dataset).map_err(|e| e.at(Stage::Bin))?;
    let mut events = config.resolved_events();
    events.sort_by(|a, b| a.name.cmp(&b.name));
    events
        .iter()
        .map(|event| {
            let w = window_partition(&bins, event).map_err(|e| e.at(Stage::Window))?;
            let pre = records_of(&w.pre);
            let during = records_of(&w.during);
            Ok(EventBaselines {
                event: event.name.clone(),
                pre_records: pre.len(),
                during_records: during.len(),
                baselines: score_baselines(&pre, &during, config),
            })
        })
        .collect()
}

/// Runs the full pipeline on the configured input files.
pub fn run_analyze(config: &RunConfig) -> Result<DriftReport> {
    let started = Instant::now();
    config.validate().map_err(|e| e.at(Stage::Config))?;
    let labels = config.label_set().map_err(|e| e.at(Stage::Config))?;
    let dataset = ingest(config, &labels).map_err(|e| e.at(Stage::Ingest))?;
    let mut report = analyze_dataset(&dataset, config)?;
    if config.output.include_timing {
        report.runtime_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

/// Runs every stage after ingest on an in-memory dataset.
pub fn analyze_dataset(dataset: &Dataset, config: &RunConfig) -> Result<DriftReport> {
    config.validate().map_err(|e| e.at(Stage::Config))?;
    let bins = assign_bins(dataset).map_err(|e| e.at(Stage::Bin))?;
    let mut events = config.resolved_events();
    events.sort_by(|a, b| a.name.cmp(&b.name));
    let events = events
        .iter()
        .map(|e| analyze_event(&bins, e, dataset.label_set(), config))
        .collect::<Result<Vec<_>>>()?;
    let first_day = bins.first().expect("non-empty dataset").day;
    let last_day = bins.last().expect("non-empty dataset").day;
    // the destination is not part of the analysis, so reruns to another file match
    let mut echoed = config.clone();
    echoed.output.path = None;
    Ok(DriftReport {
        tool: TOOL_NAME.to_owned(),
        version: TOOL_VERSION.to_owned(),
        config: echoed,
        dataset: DatasetSummary {
            name: dataset.name().to_owned(),
            n_records: dataset.len(),
            n_days: bins.len(),
            first_day,
            last_day,
            labels: dataset.label_set().names().to_vec(),
        },
        events,
        runtime_ms: None,
    })
}

fn records_of(bins: &[TemporalBin]) -> Vec<&PredictionRecord> {
    bins.iter().flat_map(|b| b.records.iter()).collect()
}

fn window_sizes(w: &EventWindows) -> WindowSizes {
    let count = |bins: &[TemporalBin]| bins.iter().map(|b| b.len()).sum();
    WindowSizes {
        pre_days: w.pre.len(),
        during_days: w.during.len(),
        post_days: w.post.len(),
        pre_records: count(&w.pre),
        during_records: count(&w.during),
        post_records: count(&w.post),
        truncated_baseline: w.truncated_baseline,
        truncated_post: w.truncated_post,
    }
}

/// Label-distribution metrics over resampled records.
fn label_metric(metric: Metric, records: &[&PredictionRecord], k: usize) -> f64 {
    let n = records.len() as f64;
    let mut counts = vec![0usize; k];
    for r in records {
        counts[r.predicted_label.index()] += 1;
    }
    match metric {
        Metric::Pcs => *counts.iter().max().expect("non-empty label set") as f64 / n,
        Metric::Ced => {
            let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
            let mean_conf = records.iter().map(|r| r.confidence).sum::<f64>() / n;
            mean_conf * crate::metrics::entropy_bits(&dist)
        }
        _ => f64::NAN,
    }
}

/// Record-level values whose mean is the metric, where one exists.
fn record_values(metric: Metric, records: &[&PredictionRecord]) -> Option<Vec<f64>> {
    match metric {
        Metric::MeanConfidence => Some(records.iter().map(|r| r.confidence).collect()),
        Metric::Accuracy => Some(
            records
                .iter()
                .filter_map(|r| r.is_correct())
                .map(|c| if c { 1.0 } else { 0.0 })
                .collect(),
        ),
        _ => None,
    }
}

fn day_values(bins: &[BinMetrics], metric: Metric, min_bin_size: usize) -> Vec<f64> {
    bins.iter()
        .filter(|b| b.n >= min_bin_size)
        .filter_map(|b| metric.value(b))
        .collect()
}

fn bootstrap_drop(
    drop: &DropResult,
    worst_bin: &TemporalBin,
    labels: &LabelSet,
    params: BootstrapParams,
) -> Result<BootstrapCI> {
    let refs: Vec<&PredictionRecord> = worst_bin.records.iter().collect();
    let name = format!("{}_drop_points", drop.metric);
    let baseline = drop.baseline_value;
    if let Some(values) = record_values(drop.metric, &refs) {
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        return bootstrap_ci_with(&values, &name, |xs| (baseline - mean(xs)) * 100.0, params);
    }
    // resample record indices and recompute the day-level metric
    let idx: Vec<f64> = (0..refs.len()).map(|i| i as f64).collect();
    let metric = drop.metric;
    bootstrap_ci_with(
        &idx,
        &name,
        |xs| {
            let picked: Vec<&PredictionRecord> = xs.iter().map(|&i| refs[i as usize]).collect();
            (baseline - label_metric(metric, &picked, labels.len())) * 100.0
        },
        params,
    )
}

fn analyze_event(
    bins: &[TemporalBin],
    event: &EventConfig,
    labels: &LabelSet,
    config: &RunConfig,
) -> Result<EventReport> {
    let windows = window_partition(bins, event).map_err(|e| e.at(Stage::Window))?;
    let wm = WindowMetrics::compute(&windows, labels);
    let min_bin = config.metrics.min_bin_size;
    let mut warnings = Vec::new();
    if windows.truncated_baseline {
        warnings.push(format!(
            "baseline truncated to {} of {} days",
            windows.pre.len(),
            event.pre_days
        ));
    }
    if windows.truncated_post {
        warnings.push(format!(
            "post window truncated to {} of {} days",
            windows.post.len(),
            event.post_days
        ));
    }

    let series: Vec<DayRow> = [
        (Window::Pre, &wm.pre),
        (Window::During, &wm.during),
        (Window::Post, &wm.post),
    ]
    .into_iter()
    .flat_map(|(w, rows)| {
        rows.iter().map(move |m| DayRow {
            window: w,
            qualifying: m.n >= min_bin,
            metrics: m.clone(),
        })
    })
    .collect();

    let mut drops = Vec::new();
    for &metric in config.metrics.select.iter().filter(|m| m.supports_drop()) {
        match max_drop(&wm, metric, min_bin) {
            Ok(d) => drops.push(d),
            Err(e @ Error::MetricUnavailable(_)) => warnings.push(e.to_string()),
            Err(e) => return Err(e.at(Stage::Metrics)),
        }
    }

    let pre_records = records_of(&windows.pre);
    let during_records = records_of(&windows.during);
    let baselines = score_baselines(&pre_records, &during_records, config);

    let stats = run_stats(
        &windows,
        &wm,
        &drops,
        &pre_records,
        &during_records,
        labels,
        config,
        &mut warnings,
    )
    .map_err(|e| e.at(Stage::Stats))?;

    let verdict =
        detect_drift(&event.name, &wm, &config.detection, &config.profiles).map_err(|e| e.at(Stage::Alerting))?;

    Ok(EventReport {
        name: event.name.clone(),
        event: event.clone(),
        windows: window_sizes(&windows),
        series,
        drops,
        bootstrap: stats.bootstrap,
        effect_sizes: stats.effects,
        anova: stats.anova,
        correlation: stats.correlation,
        fdr: stats.fdr,
        baselines,
        verdict,
        warnings,
    })
}

struct EventStats {
    bootstrap: Vec<BootstrapCI>,
    effects: Vec<MetricEffect>,
    anova: Option<AnovaSummary>,
    correlation: Option<CorrelationSummary>,
    fdr: FdrSummary,
}

#[allow(clippy::too_many_arguments)]
fn run_stats(
    windows: &EventWindows,
    wm: &WindowMetrics,
    drops: &[DropResult],
    pre_records: &[&PredictionRecord],
    during_records: &[&PredictionRecord],
    labels: &LabelSet,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<EventStats> {
    let s = config.stats;
    let min_bin = config.metrics.min_bin_size;
    let params = BootstrapParams {
        iterations: s.iterations,
        seed: s.seed,
        level: s.level,
    };

    let mut bootstrap = Vec::new();
    for d in drops {
        let worst = windows
            .after_onset()
            .find(|b| b.day == d.worst_day)
            .expect("worst day is a window day");
        match bootstrap_drop(d, worst, labels, params) {
            Ok(ci) => bootstrap.push(ci),
            Err(e) => warnings.push(format!("bootstrap for {}: {e}", d.metric)),
        }
    }

    let mut effects = Vec::new();
    let mut tests: Vec<(String, f64)> = Vec::new();
    for &metric in &config.metrics.select {
        let record_level = record_values(metric, during_records).zip(record_values(metric, pre_records));
        let (unit, a, b) = match record_level {
            Some((a, b)) => (SampleUnit::Record, a, b),
            None => (
                SampleUnit::Day,
                day_values(&wm.during, metric, min_bin),
                day_values(&wm.pre, metric, min_bin),
            ),
        };
        match effect_sizes(&a, &b) {
            Ok(effects_report) => effects.push(MetricEffect {
                metric,
                unit,
                effects: effects_report,
            }),
            Err(e) => warnings.push(format!("effect sizes for {metric}: {e}")),
        }
        let during_days = day_values(&wm.during, metric, min_bin);
        let pre_days = day_values(&wm.pre, metric, min_bin);
        if !during_days.is_empty() && !pre_days.is_empty() {
            let p = permutation_p(&during_days, &pre_days, s.permutations, s.seed)?;
            tests.push((format!("{metric}_pre_vs_during"), p));
        }
    }

    let mut groups = Vec::new();
    for (w, rows) in [
        (Window::Pre, &wm.pre),
        (Window::During, &wm.during),
        (Window::Post, &wm.post),
    ] {
        let v = day_values(rows, Metric::MeanConfidence, min_bin);
        if v.len() >= 2 {
            groups.push((w, v));
        }
    }
    let anova_summary = if groups.len() >= 2 {
        let values: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
        match anova(&values) {
            Ok(a) => {
                let p = crate::stats::anova_permutation_p(&values, s.permutations, s.seed)?;
                tests.push(("mean_confidence_anova".to_owned(), p));
                Some(AnovaSummary {
                    metric: Metric::MeanConfidence,
                    unit: SampleUnit::Day,
                    groups: groups.iter().map(|(w, _)| *w).collect(),
                    f: a.f,
                    df_between: a.df_between,
                    df_within: a.df_within,
                    p_value: p,
                    permutations: s.permutations,
                    seed: s.seed,
                })
            }
            Err(e) => {
                warnings.push(format!("anova: {e}"));
                None
            }
        }
    } else {
        warnings.push("anova: fewer than two windows with two qualifying days".into());
        None
    };

    let days: Vec<&BinMetrics> = wm.all().filter(|b| b.n >= min_bin).collect();
    let xs: Vec<f64> = days.iter().map(|b| b.mean_confidence).collect();
    let ys: Vec<f64> = days.iter().map(|b| b.label_entropy).collect();
    let correlation = match pearson_r(&xs, &ys) {
        Ok(r) => {
            let p = pearson_permutation_p(&xs, &ys, s.permutations, s.seed)?;
            tests.push(("confidence_entropy_correlation".to_owned(), p));
            Some(CorrelationSummary {
                x: "mean_confidence".into(),
                y: "label_entropy".into(),
                n_days: xs.len(),
                r,
                p_value: p,
                permutations: s.permutations,
                seed: s.seed,
            })
        }
        Err(e) => {
            warnings.push(format!("correlation: {e}"));
            None
        }
    };

    let p_values: Vec<f64> = tests.iter().map(|(_, p)| *p).collect();
    let fdr = bh_fdr(&p_values, s.alpha)?;
    let fdr = FdrSummary {
        alpha: s.alpha,
        permutations: s.permutations,
        seed: s.seed,
        tests: tests
            .into_iter()
            .enumerate()
            .map(|(i, (name, p))| TestOutcome {
                name,
                p_value: p,
                adjusted_p: fdr.adjusted[i],
                rejected: fdr.rejected[i],
            })
            .collect(),
    };

    Ok(EventStats {
        bootstrap,
        effects,
        anova: anova_summary,
        correlation,
        fdr,
    })
}
