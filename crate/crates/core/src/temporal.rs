//! Day-level binning and pre/during/post event windows.

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, PredictionRecord};

/// Records that fall on one UTC calendar day, in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalBin {
    pub day: NaiveDate,
    pub records: Vec<PredictionRecord>,
}

impl TemporalBin {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

pub fn day_of(timestamp: i64) -> NaiveDate {
    DateTime::from_timestamp(timestamp, 0)
        .expect("timestamp within chrono range")
        .date_naive()
}

/// Groups a dataset into one bin per calendar day. Days without records are
/// omitted.
pub fn assign_bins(dataset: &Dataset) -> Result<Vec<TemporalBin>> {
    if dataset.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut bins: Vec<TemporalBin> = Vec::new();
    for r in dataset.records() {
        let day = day_of(r.timestamp);
        match bins.last_mut() {
            Some(b) if b.day == day => b.records.push(r.clone()),
            _ => bins.push(TemporalBin {
                day,
                records: vec![r.clone()],
            }),
        }
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    pub name: String,
    pub during_start: NaiveDate,
    pub during_end: NaiveDate,
    #[serde(default = "default_window_days")]
    pub pre_days: usize,
    #[serde(default = "default_window_days")]
    pub post_days: usize,
}

pub(crate) fn default_window_days() -> usize {
    14
}

impl EventConfig {
    pub fn new(name: impl Into<String>, during_start: NaiveDate, during_end: NaiveDate) -> Self {
        Self {
            name: name.into(),
            during_start,
            during_end,
            pre_days: default_window_days(),
            post_days: default_window_days(),
        }
    }

    pub fn with_windows(mut self, pre_days: usize, post_days: usize) -> Self {
        self.pre_days = pre_days;
        self.post_days = post_days;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.during_start > self.during_end {
            return Err(Error::InvalidEvent(format!(
                "{}: during_start {} after during_end {}",
                self.name, self.during_start, self.during_end
            )));
        }
        if self.pre_days == 0 || self.post_days == 0 {
            return Err(Error::InvalidEvent(format!(
                "{}: pre_days and post_days must be positive",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventWindows {
    pub pre: Vec<TemporalBin>,
    pub during: Vec<TemporalBin>,
    pub post: Vec<TemporalBin>,
    /// Fewer than `pre_days` bins were available before the event.
    pub truncated_baseline: bool,
    /// Fewer than `post_days` bins were available after the event.
    pub truncated_post: bool,
}

impl EventWindows {
    /// during followed by post.
    pub fn after_onset(&self) -> impl Iterator<Item = &TemporalBin> {
        self.during.iter().chain(self.post.iter())
    }

    pub fn all(&self) -> impl Iterator<Item = &TemporalBin> {
        self.pre.iter().chain(self.after_onset())
    }
}

/// Splits day-sorted bins into the pre/during/post windows of `config`.
///
/// `pre` holds up to `pre_days` bins immediately preceding the first during
/// day and `post` up to `post_days` bins after the last; counts are in bins,
/// so gaps in the data do not shrink the windows.
pub fn window_partition(bins: &[TemporalBin], config: &EventConfig) -> Result<EventWindows> {
    config.validate()?;
    debug_assert!(bins.windows(2).all(|w| w[0].day < w[1].day));

    let first_during = bins.partition_point(|b| b.day < config.during_start);
    let after_during = bins.partition_point(|b| b.day <= config.during_end);
    if first_during == after_during {
        return Err(Error::NoDuringData);
    }
    if first_during == 0 {
        return Err(Error::NoBaselineData);
    }
    let pre_start = first_during.saturating_sub(config.pre_days);
    let post_end = (after_during + config.post_days).min(bins.len());

    Ok(EventWindows {
        pre: bins[pre_start..first_during].to_vec(),
        during: bins[first_during..after_during].to_vec(),
        post: bins[after_during..post_end].to_vec(),
        truncated_baseline: first_during - pre_start < config.pre_days,
        truncated_post: post_end - after_during < config.post_days,
    })
}
