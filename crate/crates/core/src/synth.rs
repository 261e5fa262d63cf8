//! Deterministic synthetic prediction streams with injected drift.
//!
//! Every record consumes its random draws in a fixed order (label, flip,
//! confidence, correctness, then optional text and embedding), so two
//! configurations that differ only in drift magnitude see the same
//! underlying uniforms and normals.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, LabelId, LabelSet, PredictionRecord};
use crate::rng::Rng64;
use crate::temporal::EventConfig;

const MIN_CONFIDENCE: f64 = 1e-6;
const TOKENS_PER_RECORD: usize = 8;
const VOCAB_SIZE: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordsPerDay {
    Fixed(usize),
    PerDay(Vec<usize>),
}

impl RecordsPerDay {
    pub fn on(&self, day: usize) -> usize {
        match self {
            RecordsPerDay::Fixed(n) => *n,
            RecordsPerDay::PerDay(v) => v[day],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSpec {
    /// Added to the confidence mean inside the event.
    pub confidence_delta: f64,
    /// Added to the accuracy inside the event.
    pub accuracy_delta: f64,
    /// Replaces the label distribution inside the event.
    pub label_shift: Option<Vec<f64>>,
    /// Probability that a record's label is forced away from the previous
    /// record's label inside the event.
    pub transition_boost: f64,
    /// Share of text tokens drawn from an event-only vocabulary.
    pub vocab_churn: f64,
    /// Length of the mean shift applied to embeddings inside the event.
    pub embedding_shift: f64,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            confidence_delta: 0.0,
            accuracy_delta: 0.0,
            label_shift: None,
            transition_boost: 0.0,
            vocab_churn: 0.0,
            embedding_shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub name: String,
    pub start_date: NaiveDate,
    pub n_days: usize,
    pub records_per_day: RecordsPerDay,
    pub labels: Vec<String>,
    pub baseline_confidence_mean: f64,
    pub baseline_confidence_std: f64,
    pub baseline_label_probs: Vec<f64>,
    pub baseline_accuracy: f64,
    /// First event day index.
    pub event_start: usize,
    /// Last event day index, inclusive.
    pub event_end: usize,
    pub drift: DriftSpec,
    pub emit_text: bool,
    /// Embedding width; 0 emits none. Each embedding is a label prototype
    /// (ones on the coordinates `j` with `j % k == label`) plus unit normal noise.
    pub embedding_dim: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            name: "synthetic".to_owned(),
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date"),
            n_days: 26,
            records_per_day: RecordsPerDay::Fixed(200),
            labels: LabelSet::sentiment3().names().to_vec(),
            baseline_confidence_mean: 0.85,
            baseline_confidence_std: 0.1,
            baseline_label_probs: vec![0.3, 0.25, 0.45],
            baseline_accuracy: 0.9,
            event_start: 14,
            event_end: 18,
            drift: DriftSpec::default(),
            emit_text: false,
            embedding_dim: 0,
            seed: 42,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidSynthConfig {
        field,
        reason: reason.into(),
    }
}

fn check_distribution(field: &'static str, probs: &[f64], k: usize) -> Result<()> {
    if probs.len() != k {
        return Err(invalid(
            field,
            format!("expected {k} probabilities, got {}", probs.len()),
        ));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid(field, "probabilities must lie in [0, 1]"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(field, format!("probabilities sum to {sum}")));
    }
    Ok(())
}

fn check_unit(field: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(field, format!("{x} outside [0, 1]")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn label_set(&self) -> Result<LabelSet> {
        LabelSet::new(self.labels.iter().cloned()).map_err(|e| invalid("labels", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let labels = self.label_set()?;
        if self.n_days == 0 {
            return Err(invalid("n_days", "must be at least 1"));
        }
        if let RecordsPerDay::PerDay(v) = &self.records_per_day {
            if v.len() != self.n_days {
                return Err(invalid(
                    "records_per_day",
                    format!("{} entries for {} days", v.len(), self.n_days),
                ));
            }
        }
        if self.total_records() == 0 {
            return Err(invalid("records_per_day", "no records would be generated"));
        }
        if self.event_start > self.event_end || self.event_end >= self.n_days {
            return Err(invalid(
                "event_end",
                format!(
                    "event days {}..={} must lie inside 0..{}",
                    self.event_start, self.event_end, self.n_days
                ),
            ));
        }
        check_distribution("baseline_label_probs", &self.baseline_label_probs, labels.len())?;
        if let Some(p) = &self.drift.label_shift {
            check_distribution("drift.label_shift", p, labels.len())?;
        }
        let mean = self.baseline_confidence_mean;
        if !(mean > 0.0 && mean <= 1.0) {
            return Err(invalid("baseline_confidence_mean", format!("{mean} outside (0, 1]")));
        }
        let shifted = mean + self.drift.confidence_delta;
        if !(shifted > 0.0 && shifted <= 1.0) {
            return Err(invalid(
                "drift.confidence_delta",
                format!("shifted mean {shifted} outside (0, 1]"),
            ));
        }
        if !(self.baseline_confidence_std >= 0.0 && self.baseline_confidence_std.is_finite()) {
            return Err(invalid("baseline_confidence_std", "must be finite and >= 0"));
        }
        check_unit("baseline_accuracy", self.baseline_accuracy)?;
        check_unit(
            "drift.accuracy_delta",
            self.baseline_accuracy + self.drift.accuracy_delta,
        )
        .map_err(|_| invalid("drift.accuracy_delta", "shifted accuracy outside [0, 1]"))?;
        check_unit("drift.transition_boost", self.drift.transition_boost)?;
        check_unit("drift.vocab_churn", self.drift.vocab_churn)?;
        if !self.drift.embedding_shift.is_finite() {
            return Err(invalid("drift.embedding_shift", "must be finite"));
        }
        Ok(())
    }

    pub fn total_records(&self) -> usize {
        (0..self.n_days).map(|d| self.records_per_day.on(d)).sum()
    }

    pub fn day(&self, index: usize) -> NaiveDate {
        self.start_date + chrono::Days::new(index as u64)
    }

    pub fn in_event(&self, day: usize) -> bool {
        (self.event_start..=self.event_end).contains(&day)
    }

    /// Event windows matching the injected drift, with pre and post windows
    /// covering the rest of the stream.
    pub fn event_config(&self) -> EventConfig {
        EventConfig::new(self.name.clone(), self.day(self.event_start), self.day(self.event_end))
            .with_windows(self.event_start, self.n_days - 1 - self.event_end)
    }
}

fn other_label(rng: &mut Rng64, avoid: usize, k: usize) -> usize {
    let j = rng.below(k - 1);
    if j >= avoid {
        j + 1
    } else {
        j
    }
}

/// Draws the stream described by `config`.
pub fn generate_stream(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let labels = config.label_set()?;
    let k = labels.len();
    let mut rng = Rng64::new(config.seed);
    let epoch0 = config
        .start_date
        .and_hms_opt(0, 0, 0)
        .expect("midnight")
        .and_utc()
        .timestamp();
    let direction = if config.embedding_dim > 0 {
        1.0 / (config.embedding_dim as f64).sqrt()
    } else {
        0.0
    };

    let mut records = Vec::with_capacity(config.total_records());
    let mut previous: Option<usize> = None;
    for d in 0..config.n_days {
        let n = config.records_per_day.on(d);
        let event = config.in_event(d);
        let drift = &config.drift;
        let probs = match (&drift.label_shift, event) {
            (Some(p), true) => p.as_slice(),
            _ => config.baseline_label_probs.as_slice(),
        };
        let (conf_mean, accuracy, boost, churn, shift) = if event {
            (
                config.baseline_confidence_mean + drift.confidence_delta,
                config.baseline_accuracy + drift.accuracy_delta,
                drift.transition_boost,
                drift.vocab_churn,
                drift.embedding_shift,
            )
        } else {
            (config.baseline_confidence_mean, config.baseline_accuracy, 0.0, 0.0, 0.0)
        };

        for i in 0..n {
            let ts = epoch0 + d as i64 * 86_400 + (i as i64 * 86_400) / n as i64;
            let mut label = rng.categorical(probs);
            let flip = rng.next_f64() < boost;
            let away = match previous {
                Some(p) => other_label(&mut rng, p, k),
                None => rng.below(k),
            };
            if flip && previous == Some(label) {
                label = away;
            }
            let confidence = (conf_mean + config.baseline_confidence_std * rng.normal()).clamp(MIN_CONFIDENCE, 1.0);
            let correct = rng.next_f64() < accuracy;
            let wrong = other_label(&mut rng, label, k);
            let mut r = PredictionRecord::new(ts, LabelId(label as u32), confidence);
            r.true_label = Some(LabelId(if correct { label } else { wrong } as u32));
            if config.emit_text {
                let words: Vec<String> = (0..TOKENS_PER_RECORD)
                    .map(|_| {
                        let churned = rng.next_f64() < churn;
                        let w = rng.below(VOCAB_SIZE);
                        if churned {
                            format!("event{w:03}")
                        } else {
                            format!("{}{w:03}", labels.name(LabelId(label as u32)))
                        }
                    })
                    .collect();
                r.text = Some(words.join(" "));
            }
            if config.embedding_dim > 0 {
                r.embedding = Some(
                    (0..config.embedding_dim)
                        .map(|j| {
                            let prototype = if j % k == label { 1.0 } else { 0.0 };
                            prototype + rng.normal() + shift * direction
                        })
                        .collect(),
                );
            }
            r.source_id = Some(config.name.clone());
            previous = Some(label);
            records.push(r);
        }
    }
    Dataset::new(config.name.clone(), labels, records)
}
