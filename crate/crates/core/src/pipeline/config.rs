use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alerting::{default_profiles, BaselineThresholds, DetectionConfig, IndustryProfile};
use crate::baselines::BaselineConfig;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::model::{InputFormat, LabelSet};
use crate::stats::{DEFAULT_ALPHA, DEFAULT_ITERATIONS, DEFAULT_LEVEL, DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use crate::synth::SynthConfig;
use crate::temporal::EventConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub paths: Vec<PathBuf>,
    pub format: InputFormat,
    pub labels: Vec<String>,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            paths: Vec::new(),
            format: InputFormat::Jsonl,
            labels: LabelSet::sentiment3().names().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub select: Vec<Metric>,
    /// Days with fewer records are left out of drops and the series export.
    pub min_bin_size: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            select: Metric::ALL.to_vec(),
            min_bin_size: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub iterations: usize,
    pub seed: u64,
    pub level: f64,
    pub alpha: f64,
    /// Shuffles per permutation test.
    pub permutations: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            seed: DEFAULT_SEED,
            level: DEFAULT_LEVEL,
            alpha: DEFAULT_ALPHA,
            permutations: DEFAULT_PERMUTATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmitFormat {
    #[serde(rename = "json")]
    Json,
    #[serde(rename = "markdown")]
    Markdown,
    #[serde(rename = "csv-series")]
    CsvSeries,
}

impl EmitFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            EmitFormat::Json => "json",
            EmitFormat::Markdown => "markdown",
            EmitFormat::CsvSeries => "csv-series",
        }
    }
}

impl fmt::Display for EmitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [EmitFormat::Json, EmitFormat::Markdown, EmitFormat::CsvSeries]
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown report format `{s}` (expected json, markdown or csv-series)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub emit: EmitFormat,
    /// Record wall-clock runtime in the report. Off by default so repeated
    /// runs stay byte-identical.
    pub include_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            emit: EmitFormat::Json,
            include_timing: false,
        }
    }
}

/// Everything a run needs. Every field has a default, so an empty file is a
/// valid configuration once inputs and events are supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    pub events: Vec<EventConfig>,
    pub metrics: MetricsConfig,
    pub baselines: BaselineConfig,
    pub baseline_thresholds: BaselineThresholds,
    pub stats: StatsConfig,
    pub detection: DetectionConfig,
    pub profiles: Vec<IndustryProfile>,
    pub output: OutputConfig,
    /// Generator settings for the `synth` command. When no events are
    /// listed, the generator's event window is analysed.
    pub synth: Option<SynthConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: InputConfig::default(),
            events: Vec::new(),
            metrics: MetricsConfig::default(),
            baselines: BaselineConfig::default(),
            baseline_thresholds: BaselineThresholds::default(),
            stats: StatsConfig::default(),
            detection: DetectionConfig::default(),
            profiles: default_profiles(),
            output: OutputConfig::default(),
            synth: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file. Relative input and output paths are resolved
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            let rebase = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            cfg.input.paths.iter_mut().for_each(rebase);
            if let Some(out) = cfg.output.path.as_mut() {
                rebase(out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn label_set(&self) -> Result<LabelSet> {
        LabelSet::new(self.input.labels.iter().cloned())
    }

    /// Listed events, or the generator's event when none are listed.
    pub fn resolved_events(&self) -> Vec<EventConfig> {
        match (&self.events[..], &self.synth) {
            ([], Some(s)) => vec![s.event_config()],
            (events, _) => events.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.label_set()?;
        let mut seen = HashSet::new();
        for p in self.input.paths.iter().chain(self.output.path.iter()) {
            if !seen.insert(p) {
                return Err(Error::Config(format!("path {} is listed twice", p.display())));
            }
        }
        let events = self.resolved_events();
        if events.is_empty() {
            return Err(Error::Config("no events configured".into()));
        }
        let mut names = HashSet::new();
        for e in &events {
            e.validate()?;
            if !names.insert(&e.name) {
                return Err(Error::Config(format!("duplicate event name `{}`", e.name)));
            }
        }
        if self.metrics.select.is_empty() {
            return Err(Error::Config("metrics.select is empty".into()));
        }
        if self.metrics.min_bin_size == 0 {
            return Err(Error::param("min_bin_size", "must be at least 1"));
        }
        let b = &self.baselines;
        if b.psi_bins < 2 {
            return Err(Error::param("psi_bins", "must be at least 2"));
        }
        if b.kmeans_k < 1 || b.max_samples < 2 {
            return Err(Error::param("kmeans_k", "need k >= 1 and max_samples >= 2"));
        }
        let s = &self.stats;
        if s.iterations < 1 || s.permutations < 1 {
            return Err(Error::param(
                "iterations",
                "bootstrap and permutation counts must be at least 1",
            ));
        }
        if !(s.level > 0.0 && s.level < 1.0) {
            return Err(Error::param("level", format!("{} outside (0, 1)", s.level)));
        }
        if !(s.alpha > 0.0 && s.alpha < 1.0) {
            return Err(Error::param("alpha", format!("{} outside (0, 1)", s.alpha)));
        }
        self.detection.validate()?;
        let t = &self.baseline_thresholds;
        if !(t.ks_alpha > 0.0 && t.ks_alpha < 1.0) {
            return Err(Error::param("ks_alpha", format!("{} outside (0, 1)", t.ks_alpha)));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        if let Some(synth) = &self.synth {
            synth.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.stats.iterations, 1000);
        assert_eq!(cfg.stats.seed, 42);
        assert_eq!(cfg.stats.level, 0.95);
        assert_eq!(cfg.stats.alpha, 0.05);
        assert_eq!(cfg.profiles.len(), 4);
    }

    #[test]
    fn parses_events_and_overrides() {
        let cfg = RunConfig::from_toml_str(
            r#"
            [input]
            paths = ["a.jsonl"]
            format = "csv"

            [[events]]
            name = "launch"
            during_start = "2024-03-01"
            during_end = "2024-03-03"
            pre_days = 7

            [stats]
            seed = 7

            [metrics]
            select = ["accuracy", "pcs"]

            [[profiles]]
            name = "strict"
            threshold_points = 1.5
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.input.format, InputFormat::Csv);
        assert_eq!(cfg.events[0].pre_days, 7);
        assert_eq!(cfg.events[0].post_days, 14);
        assert_eq!(cfg.stats.seed, 7);
        assert_eq!(cfg.stats.iterations, 1000);
        assert_eq!(cfg.metrics.select, vec![Metric::Accuracy, Metric::Pcs]);
        assert_eq!(cfg.profiles.len(), 1);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_toml_str("[stats]\nsede = 3").is_err());
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_err(), "no events");
        cfg.synth = Some(SynthConfig::default());
        cfg.validate().unwrap();
        cfg.input.paths = vec!["x".into(), "x".into()];
        assert!(cfg.validate().is_err());
        cfg.input.paths = vec!["x".into()];
        cfg.output.path = Some("x".into());
        assert!(cfg.validate().is_err());
        cfg.output.path = None;
        cfg.stats.level = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            synth: Some(SynthConfig::default()),
            ..Default::default()
        };
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn emit_format_names() {
        assert_eq!("csv-series".parse::<EmitFormat>().unwrap(), EmitFormat::CsvSeries);
        assert!("xml".parse::<EmitFormat>().is_err());
    }
}
