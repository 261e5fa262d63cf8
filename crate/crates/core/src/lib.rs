//! Zero-training temporal drift detection over prediction logs.
//!
//! The crate consumes time-stamped model predictions, bins them by day,
//! partitions the days around named events and scores drift with
//! inference-only metrics, two-sample baselines and a resampling-based
//! validation stack. [`pipeline::run_analyze`] wires the stages together.

pub mod alerting;
pub mod baselines;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod temporal;

pub use alerting::{DetectionConfig, DriftVerdict, IndustryProfile, Severity};
pub use baselines::{BaselineConfig, BaselineMethod, BaselineOutcome};
pub use error::{Error, Result, Stage};
pub use metrics::{BinMetrics, DropResult, Metric, WindowMetrics};
pub use model::{Dataset, InputFormat, LabelId, LabelSet, PredictionRecord};
pub use pipeline::{emit_report, run_analyze, DriftReport, EmitFormat, RunConfig};
pub use rng::Rng64;
pub use synth::{generate_stream, SynthConfig};
pub use temporal::{EventConfig, EventWindows, TemporalBin};
