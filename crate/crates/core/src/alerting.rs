//! Drift verdicts, industry-threshold breaches and detection rates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineMethod, BaselineOutcome};
use crate::error::{Error, Result};
use crate::metrics::{max_drop, max_rise, DropResult, Metric, WindowMetrics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndustryProfile {
    pub name: String,
    /// Tolerated accuracy drop in percentage points.
    pub threshold_points: f64,
}

impl IndustryProfile {
    pub fn new(name: impl Into<String>, threshold_points: f64) -> Result<Self> {
        let p = Self {
            name: name.into(),
            threshold_points,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_points > 0.0 && self.threshold_points.is_finite()) {
            return Err(Error::param(
                "threshold_points",
                format!(
                    "profile `{}` needs a positive threshold, got {}",
                    self.name, self.threshold_points
                ),
            ));
        }
        Ok(())
    }
}

pub fn default_profiles() -> Vec<IndustryProfile> {
    [
        ("Customer Service", 5.0),
        ("Financial Trading", 3.0),
        ("Medical NLP", 2.0),
        ("Brand Monitoring", 8.0),
    ]
    .into_iter()
    .map(|(name, t)| IndustryProfile {
        name: name.to_owned(),
        threshold_points: t,
    })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    #[serde(rename = "Within-threshold")]
    WithinThreshold,
    Breach,
    High,
    Critical,
}

impl Severity {
    pub fn from_multiplier(m: f64) -> Self {
        if m >= 4.0 {
            Severity::Critical
        } else if m >= 2.0 {
            Severity::High
        } else if m >= 1.0 {
            Severity::Breach
        } else {
            Severity::WithinThreshold
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::WithinThreshold => "Within-threshold",
            Severity::Breach => "Breach",
            Severity::High => "High",
            Severity::Critical => "Critical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breach {
    pub profile: String,
    pub threshold_points: f64,
    /// `drop / threshold`, unrounded.
    pub multiplier_exact: f64,
    /// Half-up to one decimal; severity is read from this value.
    pub multiplier: f64,
    pub severity: Severity,
}

/// Half-up rounding to one decimal. The small nudge keeps values such as
/// `0.25` whose binary form sits just below the half from rounding down.
pub fn round_half_up_1(x: f64) -> f64 {
    (x * 10.0 + 0.5 + 1e-9).floor() / 10.0
}

pub fn industry_breach(drop_points: f64, profiles: &[IndustryProfile]) -> Result<Vec<Breach>> {
    if !(drop_points >= 0.0 && drop_points.is_finite()) {
        return Err(Error::param(
            "drop_points",
            format!("must be finite and >= 0, got {drop_points}"),
        ));
    }
    profiles
        .iter()
        .map(|p| {
            p.validate()?;
            let exact = drop_points / p.threshold_points;
            let multiplier = round_half_up_1(exact);
            Ok(Breach {
                profile: p.name.clone(),
                threshold_points: p.threshold_points,
                multiplier_exact: exact,
                multiplier,
                severity: Severity::from_multiplier(multiplier),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub z_threshold: f64,
    /// Absolute shift floor in points.
    pub min_abs_drop: f64,
    /// Days with fewer records are ignored.
    pub min_bin_size: usize,
    pub min_baseline_days: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            z_threshold: 2.0,
            min_abs_drop: 2.0,
            min_bin_size: 5,
            min_baseline_days: 3,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_threshold > 0.0 && self.z_threshold.is_finite()) {
            return Err(Error::param(
                "z_threshold",
                format!("must be positive, got {}", self.z_threshold),
            ));
        }
        if !(self.min_abs_drop >= 0.0 && self.min_abs_drop.is_finite()) {
            return Err(Error::param(
                "min_abs_drop",
                format!("must be >= 0, got {}", self.min_abs_drop),
            ));
        }
        if self.min_baseline_days < 2 {
            return Err(Error::param(
                "min_baseline_days",
                "need at least 2 days to estimate a spread",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Down,
    Up,
}

/// Metrics watched by the detector and the direction that signals drift.
pub const WATCHED: [(Metric, Direction); 5] = [
    (Metric::MeanConfidence, Direction::Down),
    (Metric::Pcs, Direction::Down),
    (Metric::Accuracy, Direction::Down),
    (Metric::Ced, Direction::Up),
    (Metric::Str, Direction::Up),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub metric: Metric,
    pub direction: Direction,
    pub baseline_days: usize,
    pub baseline_mean: f64,
    pub baseline_std: f64,
    /// Largest during-window deviation in baseline standard deviations,
    /// `None` when the baseline spread is zero.
    pub max_z: Option<f64>,
    /// Largest post-onset shift from the record-weighted baseline, in points.
    pub shift: DropResult,
    pub zero_variance_baseline: bool,
    pub triggered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerMetric {
    pub metric: Metric,
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftVerdict {
    pub event_name: String,
    pub detected: bool,
    pub trigger_metrics: Vec<TriggerMetric>,
    /// Accuracy drop when the stream carries true labels, otherwise the
    /// largest drop among the downward-watched metrics. Breaches are scored
    /// against it.
    pub max_drop: Option<DropResult>,
    pub breaches: Vec<Breach>,
    pub checks: Vec<MetricCheck>,
    /// Human-readable notes such as `zero-variance baseline`.
    pub flags: Vec<String>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

fn check_metric(
    windows: &WindowMetrics,
    metric: Metric,
    direction: Direction,
    cfg: &DetectionConfig,
) -> Option<MetricCheck> {
    let qualifying = |b: &&crate::metrics::BinMetrics| b.n >= cfg.min_bin_size;
    let base: Vec<f64> = windows
        .pre
        .iter()
        .filter(qualifying)
        .filter_map(|b| metric.value(b))
        .collect();
    if base.len() < cfg.min_baseline_days {
        return None;
    }
    let (mu, sd) = mean_std(&base);
    let shift = match direction {
        Direction::Down => max_drop(windows, metric, cfg.min_bin_size),
        Direction::Up => max_rise(windows, metric, cfg.min_bin_size),
    }
    .ok()?;
    let deviations: Vec<f64> = windows
        .during
        .iter()
        .filter(qualifying)
        .filter_map(|b| metric.value(b))
        .map(|v| match direction {
            Direction::Down => mu - v,
            Direction::Up => v - mu,
        })
        .collect();
    let max_dev = deviations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let zero_variance = sd <= 0.0;
    let (max_z, z_fires) = if zero_variance {
        (None, max_dev > 0.0)
    } else if deviations.is_empty() {
        (None, false)
    } else {
        let z = max_dev / sd;
        (Some(z), z >= cfg.z_threshold)
    };
    let triggered = z_fires && shift.drop_points >= cfg.min_abs_drop;
    Some(MetricCheck {
        metric,
        direction,
        baseline_days: base.len(),
        baseline_mean: mu,
        baseline_std: sd,
        max_z,
        shift,
        zero_variance_baseline: zero_variance,
        triggered,
    })
}

/// Decides whether an event drifted.
///
/// For each watched metric the baseline mean and sample standard deviation
/// come from per-day values on qualifying pre-window days. The metric fires
/// when some qualifying during-window day deviates from that mean by at
/// least `z_threshold` standard deviations in the drift direction and the
/// metric's post-onset shift is at least `min_abs_drop` points. A zero
/// baseline spread falls back to the absolute arm alone.
pub fn detect_drift(
    event_name: &str,
    windows: &WindowMetrics,
    cfg: &DetectionConfig,
    profiles: &[IndustryProfile],
) -> Result<DriftVerdict> {
    cfg.validate()?;
    let qualifying_days = windows.pre.iter().filter(|b| b.n >= cfg.min_bin_size).count();
    if qualifying_days < cfg.min_baseline_days {
        return Err(Error::param(
            "pre_window",
            format!(
                "need at least {} days with >= {} records, got {qualifying_days}",
                cfg.min_baseline_days, cfg.min_bin_size
            ),
        ));
    }
    let checks: Vec<MetricCheck> = WATCHED
        .iter()
        .filter_map(|&(m, d)| check_metric(windows, m, d, cfg))
        .collect();
    let trigger_metrics: Vec<TriggerMetric> = checks
        .iter()
        .filter(|c| c.triggered)
        .map(|c| TriggerMetric {
            metric: c.metric,
            z_score: c.max_z,
        })
        .collect();
    let mut flags = Vec::new();
    if checks.iter().any(|c| c.zero_variance_baseline && c.triggered) {
        flags.push("zero-variance baseline".to_owned());
    }

    let downs = checks.iter().filter(|c| c.direction == Direction::Down);
    let max_drop = checks
        .iter()
        .find(|c| c.metric == Metric::Accuracy)
        .or_else(|| downs.max_by(|a, b| a.shift.drop_points.total_cmp(&b.shift.drop_points)))
        .map(|c| c.shift.clone());
    let breaches = match &max_drop {
        Some(d) => industry_breach(d.drop_points.max(0.0), profiles)?,
        None => Vec::new(),
    };
    Ok(DriftVerdict {
        event_name: event_name.to_owned(),
        detected: !trigger_metrics.is_empty(),
        trigger_metrics,
        max_drop,
        breaches,
        checks,
        flags,
    })
}

/// Fraction of `flags` that are true.
pub fn rate(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::param("verdicts", "need at least one"));
    }
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

pub fn detection_rate(verdicts: &[DriftVerdict]) -> Result<f64> {
    rate(&verdicts.iter().map(|v| v.detected).collect::<Vec<_>>())
}

/// Decision thresholds that turn a baseline score into a drift call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineThresholds {
    /// Significance level for the asymptotic two-sample KS critical value.
    pub ks_alpha: f64,
    pub psi: f64,
    pub wasserstein: f64,
    pub tfidf_centroid: f64,
    pub embedding_centroid: f64,
    pub mmd: f64,
    pub clustering_js: f64,
}

impl Default for BaselineThresholds {
    fn default() -> Self {
        Self {
            ks_alpha: 0.05,
            psi: 0.25,
            wasserstein: 0.05,
            tfidf_centroid: 0.1,
            embedding_centroid: 0.1,
            mmd: 0.1,
            clustering_js: 0.1,
        }
    }
}

/// `c(alpha) * sqrt((n + m) / (n m))` with `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

impl BaselineThresholds {
    /// Whether a scored baseline flags drift; skipped methods never do.
    /// `n_pre` and `n_during` are the sample sizes behind the score.
    pub fn detects(&self, outcome: &BaselineOutcome, n_pre: usize, n_during: usize) -> bool {
        let BaselineOutcome::Scored(s) = outcome else {
            return false;
        };
        let limit = match s.method {
            BaselineMethod::Ks => {
                if n_pre == 0 || n_during == 0 {
                    return false;
                }
                ks_critical_value(self.ks_alpha, n_pre, n_during)
            }
            BaselineMethod::Psi => self.psi,
            BaselineMethod::Wasserstein => self.wasserstein,
            BaselineMethod::TfidfCentroid => self.tfidf_centroid,
            BaselineMethod::EmbeddingCentroid => self.embedding_centroid,
            BaselineMethod::Mmd => self.mmd,
            BaselineMethod::ClusteringJs => self.clustering_js,
        };
        s.score >= limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::BinMetrics;
    use chrono::NaiveDate;

    #[test]
    fn breach_multipliers() {
        let b = industry_breach(23.4, &default_profiles()).unwrap();
        let m: Vec<f64> = b.iter().map(|x| x.multiplier).collect();
        assert_eq!(m, vec![4.7, 7.8, 11.7, 2.9]);
        let s: Vec<Severity> = b.iter().map(|x| x.severity).collect();
        assert_eq!(
            s,
            vec![
                Severity::Critical,
                Severity::Critical,
                Severity::Critical,
                Severity::High
            ]
        );
        assert_eq!(b[0].multiplier_exact, 23.4 / 5.0);
    }

    #[test]
    fn breach_edges() {
        let b = industry_breach(0.0, &default_profiles()).unwrap();
        assert!(b
            .iter()
            .all(|x| x.multiplier == 0.0 && x.severity == Severity::WithinThreshold));
        let b = industry_breach(5.0, &[IndustryProfile::new("x", 5.0).unwrap()]).unwrap();
        assert_eq!((b[0].multiplier, b[0].severity), (1.0, Severity::Breach));
        let bad = IndustryProfile {
            name: "bad".into(),
            threshold_points: 0.0,
        };
        assert!(industry_breach(1.0, &[bad]).is_err());
        assert!(industry_breach(-1.0, &default_profiles()).is_err());
        assert!(IndustryProfile::new("neg", -2.0).is_err());
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_half_up_1(0.25), 0.3);
        assert_eq!(round_half_up_1(0.35), 0.4);
        assert_eq!(round_half_up_1(2.925), 2.9);
        assert_eq!(round_half_up_1(4.68), 4.7);
        assert_eq!(Severity::WithinThreshold.to_string(), "Within-threshold");
    }

    fn day(i: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + chrono::Days::new(i as u64)
    }

    fn bm(i: u32, conf: f64) -> BinMetrics {
        BinMetrics {
            day: day(i),
            n: 100,
            n_labeled: 0,
            mean_confidence: conf,
            confidence_std: 0.1,
            prediction_entropy_mean: None,
            label_entropy: 1.0,
            accuracy: None,
            pcs: 0.5,
            csi: 0.1,
            str: Some(0.4),
            ced: conf,
        }
    }

    fn windows(pre: &[f64], during: &[f64]) -> WindowMetrics {
        WindowMetrics {
            pre: pre.iter().enumerate().map(|(i, &c)| bm(i as u32, c)).collect(),
            during: during
                .iter()
                .enumerate()
                .map(|(i, &c)| bm((pre.len() + i) as u32, c))
                .collect(),
            post: vec![],
        }
    }

    #[test]
    fn small_drop_is_guarded() {
        // z is huge but the drop is one point
        let w = windows(&[0.850, 0.851, 0.849, 0.850], &[0.84]);
        let v = detect_drift("e", &w, &DetectionConfig::default(), &default_profiles()).unwrap();
        assert!(!v.detected);
        let c = v.checks.iter().find(|c| c.metric == Metric::MeanConfidence).unwrap();
        assert!(c.max_z.unwrap() > 10.0);
    }

    #[test]
    fn large_drop_fires() {
        let w = windows(&[0.85, 0.86, 0.84, 0.85], &[0.72, 0.80]);
        let v = detect_drift("e", &w, &DetectionConfig::default(), &default_profiles()).unwrap();
        assert!(v.detected);
        assert_eq!(v.trigger_metrics[0].metric, Metric::MeanConfidence);
        let d = v.max_drop.unwrap();
        assert!((d.drop_points - 13.0).abs() < 1e-9);
        // CED mirrors confidence here and so falls; the upward arm stays quiet
        assert!(v.trigger_metrics.iter().all(|t| t.metric != Metric::Ced));
    }

    #[test]
    fn zero_variance_uses_absolute_arm() {
        let w = windows(&[0.85; 4], &[0.80]);
        let v = detect_drift("e", &w, &DetectionConfig::default(), &[]).unwrap();
        assert!(v.detected);
        assert_eq!(v.trigger_metrics[0].z_score, None);
        assert_eq!(v.flags, vec!["zero-variance baseline".to_owned()]);
    }

    #[test]
    fn needs_three_baseline_days() {
        let w = windows(&[0.85, 0.84], &[0.5]);
        assert!(detect_drift("e", &w, &DetectionConfig::default(), &[]).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(rate(&[true; 4]).unwrap(), 1.0);
        assert_eq!(rate(&[true, true, false, true]).unwrap(), 0.75);
        assert_eq!(rate(&[false; 3]).unwrap(), 0.0);
        assert!(rate(&[]).is_err());
    }

    #[test]
    fn ks_critical() {
        // c(0.05) = 1.3581
        let c = ks_critical_value(0.05, 100, 100);
        assert!((c - 1.358_1 * (0.02f64).sqrt()).abs() < 1e-4);
    }
}
