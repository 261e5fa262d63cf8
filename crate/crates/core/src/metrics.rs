//! Per-day drift metrics computed from inference outputs only, plus
//! window-level drop computation.
//!
//! | metric | per-day definition |
//! |--------|--------------------|
//! | PCS    | majority-label count / day's predictions |
//! | CSI    | population std of confidence / mean confidence |
//! | STR    | share of adjacent prediction pairs whose labels differ |
//! | CED    | mean confidence x Shannon entropy (bits) of the day's label distribution |

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LabelSet;
use crate::temporal::{EventWindows, TemporalBin};

const DIST_SUM_TOLERANCE: f64 = 1e-9;

fn label_counts(bin: &TemporalBin, n_labels: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_labels];
    for r in &bin.records {
        let i = r.predicted_label.index();
        if i >= counts.len() {
            counts.resize(i + 1, 0);
        }
        counts[i] += 1;
    }
    counts
}

fn n_labels_seen(bin: &TemporalBin) -> usize {
    bin.records
        .iter()
        .map(|r| r.predicted_label.index() + 1)
        .max()
        .unwrap_or(0)
}

/// Prediction Consistency Score: majority-label share of the bin.
pub fn prediction_consistency(bin: &TemporalBin) -> f64 {
    let counts = label_counts(bin, n_labels_seen(bin));
    let max = counts.iter().copied().max().unwrap_or(0);
    max as f64 / bin.len() as f64
}

fn mean_and_population_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / n as f64).sqrt())
}

/// Confidence Stability Index: coefficient of variation of the bin's
/// confidences, with the population standard deviation.
pub fn confidence_stability(bin: &TemporalBin) -> f64 {
    let (mean, std) = mean_and_population_std(bin.records.iter().map(|r| r.confidence));
    std / mean
}

/// Sentiment Transition Rate over the bin's time-ordered predictions.
/// `None` for bins with fewer than two records.
pub fn sentiment_transition_rate(bin: &TemporalBin) -> Option<f64> {
    let n = bin.len();
    if n < 2 {
        return None;
    }
    let changes = bin
        .records
        .windows(2)
        .filter(|w| w[0].predicted_label != w[1].predicted_label)
        .count();
    Some(changes as f64 / (n - 1) as f64)
}

/// Shannon entropy in bits, with 0 log 0 = 0.
pub fn shannon_entropy(distribution: &[f64]) -> Result<f64> {
    if let Some(&p) = distribution.iter().find(|&&p| p < 0.0 || p.is_nan()) {
        return Err(Error::param("distribution", format!("negative probability {p}")));
    }
    let sum: f64 = distribution.iter().sum();
    if (sum - 1.0).abs() > DIST_SUM_TOLERANCE {
        return Err(Error::param("distribution", format!("sums to {sum}, not 1")));
    }
    Ok(entropy_bits(distribution))
}

pub(crate) fn entropy_bits(distribution: &[f64]) -> f64 {
    distribution
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

fn count_entropy(counts: &[usize], n: usize) -> f64 {
    let dist: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    entropy_bits(&dist)
}

/// Entropy (bits) of the bin's empirical predicted-label distribution.
pub fn label_entropy(bin: &TemporalBin) -> f64 {
    count_entropy(&label_counts(bin, n_labels_seen(bin)), bin.len())
}

/// Confidence-Entropy Divergence: mean confidence times the entropy of the
/// empirical predicted-label distribution.
pub fn confidence_entropy_divergence(bin: &TemporalBin) -> f64 {
    let mean = bin.records.iter().map(|r| r.confidence).sum::<f64>() / bin.len() as f64;
    mean * label_entropy(bin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub day: NaiveDate,
    pub n: usize,
    /// Records carrying a ground-truth label.
    pub n_labeled: usize,
    pub mean_confidence: f64,
    pub confidence_std: f64,
    /// Mean entropy of `class_probs`, over records that carry them.
    pub prediction_entropy_mean: Option<f64>,
    /// Entropy of the empirical predicted-label distribution.
    pub label_entropy: f64,
    pub accuracy: Option<f64>,
    pub pcs: f64,
    pub csi: f64,
    pub str: Option<f64>,
    pub ced: f64,
}

/// All per-day metrics of one bin.
pub fn bin_summary(bin: &TemporalBin, label_set: &LabelSet) -> BinMetrics {
    let n = bin.len();
    let counts = label_counts(bin, label_set.len());
    let (mean_confidence, confidence_std) = mean_and_population_std(bin.records.iter().map(|r| r.confidence));

    let mut n_probs = 0usize;
    let mut prob_entropy = 0.0;
    let mut n_labeled = 0usize;
    let mut n_correct = 0usize;
    for r in &bin.records {
        if let Some(p) = &r.class_probs {
            n_probs += 1;
            prob_entropy += entropy_bits(p);
        }
        if let Some(ok) = r.is_correct() {
            n_labeled += 1;
            n_correct += ok as usize;
        }
    }

    let label_entropy = count_entropy(&counts, n);
    BinMetrics {
        day: bin.day,
        n,
        n_labeled,
        mean_confidence,
        confidence_std,
        prediction_entropy_mean: (n_probs > 0).then(|| prob_entropy / n_probs as f64),
        label_entropy,
        accuracy: (n_labeled > 0).then(|| n_correct as f64 / n_labeled as f64),
        pcs: counts.iter().copied().max().unwrap_or(0) as f64 / n as f64,
        csi: confidence_std / mean_confidence,
        str: sentiment_transition_rate(bin),
        ced: mean_confidence * label_entropy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    MeanConfidence,
    Pcs,
    Csi,
    Str,
    Ced,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Accuracy,
        Metric::MeanConfidence,
        Metric::Pcs,
        Metric::Csi,
        Metric::Str,
        Metric::Ced,
    ];

    /// Metrics whose decline is the drift signal; the others drift upward.
    pub fn declines_under_drift(self) -> bool {
        matches!(self, Metric::Accuracy | Metric::MeanConfidence | Metric::Pcs)
    }

    /// Whether [`max_drop`] accepts this metric.
    pub fn supports_drop(self) -> bool {
        matches!(
            self,
            Metric::Accuracy | Metric::MeanConfidence | Metric::Pcs | Metric::Ced
        )
    }

    pub fn value(self, m: &BinMetrics) -> Option<f64> {
        match self {
            Metric::Accuracy => m.accuracy,
            Metric::MeanConfidence => Some(m.mean_confidence),
            Metric::Pcs => Some(m.pcs),
            Metric::Csi => Some(m.csi),
            Metric::Str => m.str,
            Metric::Ced => Some(m.ced),
        }
    }

    /// Number of records behind the bin's value, used for record weighting.
    pub fn weight(self, m: &BinMetrics) -> usize {
        match self {
            Metric::Accuracy => m.n_labeled,
            _ => m.n,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::MeanConfidence => "mean_confidence",
            Metric::Pcs => "pcs",
            Metric::Csi => "csi",
            Metric::Str => "str",
            Metric::Ced => "ced",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

/// Per-day metrics for each event window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMetrics {
    pub pre: Vec<BinMetrics>,
    pub during: Vec<BinMetrics>,
    pub post: Vec<BinMetrics>,
}

impl WindowMetrics {
    pub fn compute(windows: &EventWindows, label_set: &LabelSet) -> Self {
        let sum = |bins: &[TemporalBin]| bins.iter().map(|b| bin_summary(b, label_set)).collect();
        Self {
            pre: sum(&windows.pre),
            during: sum(&windows.during),
            post: sum(&windows.post),
        }
    }

    pub fn after_onset(&self) -> impl Iterator<Item = &BinMetrics> {
        self.during.iter().chain(self.post.iter())
    }

    pub fn all(&self) -> impl Iterator<Item = &BinMetrics> {
        self.pre.iter().chain(self.after_onset())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropResult {
    pub metric: Metric,
    pub baseline_value: f64,
    pub worst_window_value: f64,
    /// `(baseline - worst) * 100`; negative when every post-onset day beats
    /// the baseline.
    pub drop_points: f64,
    pub worst_day: NaiveDate,
}

/// Record-weighted mean of `metric` over `bins`, skipping bins that lack it.
pub fn weighted_mean(bins: &[BinMetrics], metric: Metric) -> Option<f64> {
    let (num, den) = bins
        .iter()
        .filter_map(|b| metric.value(b).map(|v| (v, metric.weight(b) as f64)))
        .fold((0.0, 0.0), |(n, d), (v, w)| (n + v * w, d + w));
    (den > 0.0).then(|| num / den)
}

/// Largest decline of `metric` from the pre-window baseline.
///
/// The baseline is the record-weighted mean over every pre-window bin; the
/// worst value is the per-day minimum over during and post bins with at least
/// `min_bin_size` records. Ties resolve to the earliest day.
pub fn max_drop(windows: &WindowMetrics, metric: Metric, min_bin_size: usize) -> Result<DropResult> {
    if !metric.supports_drop() {
        return Err(Error::param("metric", format!("drops are not defined for {metric}")));
    }
    extreme_shift(windows, metric, min_bin_size, true)
}

/// Largest rise of `metric` above the baseline, reported with the same
/// fields as a drop (`drop_points` holds the rise, positive upward).
pub fn max_rise(windows: &WindowMetrics, metric: Metric, min_bin_size: usize) -> Result<DropResult> {
    extreme_shift(windows, metric, min_bin_size, false)
}

fn extreme_shift(windows: &WindowMetrics, metric: Metric, min_bin_size: usize, downward: bool) -> Result<DropResult> {
    let unavailable = || Error::MetricUnavailable(metric.to_string());
    if !windows
        .pre
        .iter()
        .any(|b| b.n >= min_bin_size && metric.value(b).is_some())
    {
        return Err(unavailable());
    }
    let baseline = weighted_mean(&windows.pre, metric).ok_or_else(unavailable)?;
    let mut worst: Option<(f64, NaiveDate)> = None;
    for b in windows.after_onset().filter(|b| b.n >= min_bin_size) {
        let Some(v) = metric.value(b) else { continue };
        let better = match worst {
            None => true,
            Some((w, _)) if downward => v < w,
            Some((w, _)) => v > w,
        };
        if better {
            worst = Some((v, b.day));
        }
    }
    let (worst_value, worst_day) = worst.ok_or_else(unavailable)?;
    let points = if downward {
        (baseline - worst_value) * 100.0
    } else {
        (worst_value - baseline) * 100.0
    };
    Ok(DropResult {
        metric,
        baseline_value: baseline,
        worst_window_value: worst_value,
        drop_points: points,
        worst_day,
    })
}
