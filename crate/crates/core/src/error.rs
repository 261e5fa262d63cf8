use std::fmt;

use crate::model::ValidationError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {source}")]
    InvalidRecord {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("no records")]
    NoRecords,
    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("no during-event data")]
    NoDuringData,
    #[error("no baseline data")]
    NoBaselineData,
    #[error("invalid event config: {0}")]
    InvalidEvent(String),

    #[error("metric unavailable: {0}")]
    MetricUnavailable(String),

    #[error("empty sample")]
    EmptySample,
    #[error("dimensionality mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degenerate centroid")]
    DegenerateCentroid,
    #[error("degenerate groups")]
    DegenerateGroups,
    #[error("zero variance")]
    ZeroVariance,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid synth config field `{field}`: {reason}")]
    InvalidSynthConfig { field: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Wraps the error with the pipeline stage it came from.
    pub fn at(self, stage: Stage) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Pipeline stage the error was raised in, if it was raised inside `run_analyze`.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// The innermost error, with any stage wrapper removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by the contents of the input data rather than by
    /// configuration or usage.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidRecord { .. }
                | Error::Malformed { .. }
                | Error::UnknownLabel(_)
                | Error::NoRecords
                | Error::NoDuringData
                | Error::NoBaselineData
                | Error::MetricUnavailable(_)
                | Error::EmptySample
                | Error::DimensionMismatch(..)
                | Error::DegenerateCentroid
                | Error::DegenerateGroups
                | Error::ZeroVariance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Bin,
    Window,
    Metrics,
    Baselines,
    Stats,
    Alerting,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Bin => "bin",
            Stage::Window => "window",
            Stage::Metrics => "metrics",
            Stage::Baselines => "baselines",
            Stage::Stats => "stats",
            Stage::Alerting => "alerting",
        })
    }
}
