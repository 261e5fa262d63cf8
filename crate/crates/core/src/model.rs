//! Prediction records, label sets and log ingestion.
//!
//! Logs arrive either as JSON lines or as CSV with a fixed header. Timestamps
//! are RFC 3339 in files and UTC seconds since the epoch in memory.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Index of a label inside its [`LabelSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered, duplicate-free set of label names. The order is fixed for a run
/// and defines [`LabelId`] numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
    index: HashMap<String, LabelId>,
}

impl LabelSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidLabelSet(format!(
                "need at least 2 labels, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidLabelSet("empty label name".into()));
            }
            if index.insert(l.clone(), LabelId(i as u32)).is_some() {
                return Err(Error::InvalidLabelSet(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels, index })
    }

    /// negative / neutral / positive
    pub fn sentiment3() -> Self {
        Self::new(["negative", "neutral", "positive"]).expect("static label set")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: LabelId) -> &str {
        &self.labels[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, id: LabelId) -> bool {
        id.index() < self.labels.len()
    }
}

/// One inference event.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    /// UTC seconds since the Unix epoch.
    pub timestamp: i64,
    pub predicted_label: LabelId,
    pub confidence: f64,
    /// Probabilities aligned with the label set order.
    pub class_probs: Option<Vec<f64>>,
    pub true_label: Option<LabelId>,
    pub embedding: Option<Vec<f64>>,
    pub text: Option<String>,
    pub source_id: Option<String>,
}

impl PredictionRecord {
    pub fn new(timestamp: i64, predicted_label: LabelId, confidence: f64) -> Self {
        Self {
            timestamp,
            predicted_label,
            confidence,
            class_probs: None,
            true_label: None,
            embedding: None,
            text: None,
            source_id: None,
        }
    }

    pub fn is_correct(&self) -> Option<bool> {
        self.true_label.map(|t| t == self.predicted_label)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("confidence {0} outside (0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label id {0} outside label set")]
    LabelOutOfRange(u32),
    #[error("probabilities do not sum to 1 (sum = {0})")]
    ProbabilitySum(f64),
    #[error("probability {value} for `{label}` outside [0, 1]")]
    ProbabilityOutOfRange { label: String, value: f64 },
    #[error("class_probs has {found} entries, label set has {expected}")]
    ProbabilityLength { expected: usize, found: usize },
    #[error("label/argmax mismatch: predicted `{predicted}`, argmax `{argmax}`")]
    LabelArgmaxMismatch { predicted: String, argmax: String },
    #[error("embedding dimension {found}, dataset uses {expected}")]
    EmbeddingDimension { expected: usize, found: usize },
    #[error("embedding contains a non-finite value")]
    NonFiniteEmbedding,
    #[error("invalid timestamp `{0}`")]
    InvalidTimestamp(String),
}

/// Checks every record-level invariant. The embedding dimension is checked
/// against the rest of the dataset in [`Dataset::new`].
pub fn validate_record(
    record: PredictionRecord,
    label_set: &LabelSet,
) -> std::result::Result<PredictionRecord, ValidationError> {
    let c = record.confidence;
    if !(c > 0.0 && c <= 1.0) {
        return Err(ValidationError::ConfidenceOutOfRange(c));
    }
    if !label_set.contains(record.predicted_label) {
        return Err(ValidationError::LabelOutOfRange(record.predicted_label.0));
    }
    if let Some(t) = record.true_label {
        if !label_set.contains(t) {
            return Err(ValidationError::LabelOutOfRange(t.0));
        }
    }
    if let Some(probs) = &record.class_probs {
        if probs.len() != label_set.len() {
            return Err(ValidationError::ProbabilityLength {
                expected: label_set.len(),
                found: probs.len(),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ValidationError::ProbabilityOutOfRange {
                    label: label_set.name(LabelId(i as u32)).to_owned(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(ValidationError::ProbabilitySum(sum));
        }
        let (argmax, max) = probs.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
        );
        if probs[record.predicted_label.index()] < max {
            return Err(ValidationError::LabelArgmaxMismatch {
                predicted: label_set.name(record.predicted_label).to_owned(),
                argmax: label_set.name(LabelId(argmax as u32)).to_owned(),
            });
        }
    }
    if let Some(e) = &record.embedding {
        if e.iter().any(|v| !v.is_finite()) {
            return Err(ValidationError::NonFiniteEmbedding);
        }
    }
    Ok(record)
}

/// Time-ordered, validated collection of records.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    label_set: LabelSet,
    records: Vec<PredictionRecord>,
}

impl Dataset {
    /// Validates and stably sorts `records` by timestamp.
    pub fn new(name: impl Into<String>, label_set: LabelSet, records: Vec<PredictionRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::NoRecords);
        }
        let mut dim = None;
        let mut checked = Vec::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            let r = validate_record(r, &label_set).map_err(|source| Error::InvalidRecord { line: i + 1, source })?;
            check_embedding_dim(&r, &mut dim).map_err(|source| Error::InvalidRecord { line: i + 1, source })?;
            checked.push(r);
        }
        Ok(Self::from_sorted_unchecked(name, label_set, checked))
    }

    fn from_sorted_unchecked(name: impl Into<String>, label_set: LabelSet, mut records: Vec<PredictionRecord>) -> Self {
        // Vec::sort_by_key is stable, so equal timestamps keep input order.
        records.sort_by_key(|r| r.timestamp);
        Self {
            name: name.into(),
            label_set,
            records,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First and last timestamp.
    pub fn time_span(&self) -> (i64, i64) {
        (
            self.records[0].timestamp,
            self.records[self.records.len() - 1].timestamp,
        )
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.records.iter().find_map(|r| r.embedding.as_ref().map(Vec::len))
    }

    pub fn into_records(self) -> Vec<PredictionRecord> {
        self.records
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

fn check_embedding_dim(r: &PredictionRecord, dim: &mut Option<usize>) -> std::result::Result<(), ValidationError> {
    if let Some(e) = &r.embedding {
        match *dim {
            None => *dim = Some(e.len()),
            Some(d) if d != e.len() => {
                return Err(ValidationError::EmbeddingDimension {
                    expected: d,
                    found: e.len(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jsonl => "jsonl",
            Self::Csv => "csv",
        })
    }
}

/// On-disk shape of a record, shared by the JSONL reader and writer.
#[derive(Debug, Serialize, Deserialize)]
struct WireRecord {
    timestamp: String,
    predicted_label: String,
    confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_probs: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    true_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_id: Option<String>,
}

pub fn parse_timestamp(s: &str) -> std::result::Result<i64, ValidationError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.timestamp())
        .map_err(|_| ValidationError::InvalidTimestamp(s.to_owned()))
}

pub fn format_timestamp(secs: i64) -> String {
    DateTime::<Utc>::from_timestamp(secs, 0)
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| secs.to_string())
}

fn resolve_label(label_set: &LabelSet, name: &str) -> std::result::Result<LabelId, ValidationError> {
    label_set
        .id(name)
        .ok_or_else(|| ValidationError::UnknownLabel(name.to_owned()))
}

impl WireRecord {
    fn into_record(self, label_set: &LabelSet) -> std::result::Result<PredictionRecord, ValidationError> {
        let class_probs = match self.class_probs {
            None => None,
            Some(map) => {
                let mut probs = vec![0.0; label_set.len()];
                for (name, p) in map {
                    probs[resolve_label(label_set, &name)?.index()] = p;
                }
                Some(probs)
            }
        };
        Ok(PredictionRecord {
            timestamp: parse_timestamp(&self.timestamp)?,
            predicted_label: resolve_label(label_set, &self.predicted_label)?,
            confidence: self.confidence,
            class_probs,
            true_label: self
                .true_label
                .as_deref()
                .map(|t| resolve_label(label_set, t))
                .transpose()?,
            embedding: self.embedding,
            text: self.text,
            source_id: self.source_id,
        })
    }

    fn from_record(r: &PredictionRecord, label_set: &LabelSet) -> Self {
        Self {
            timestamp: format_timestamp(r.timestamp),
            predicted_label: label_set.name(r.predicted_label).to_owned(),
            confidence: r.confidence,
            class_probs: r.class_probs.as_ref().map(|probs| {
                probs
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (label_set.name(LabelId(i as u32)).to_owned(), p))
                    .collect()
            }),
            true_label: r.true_label.map(|t| label_set.name(t).to_owned()),
            embedding: r.embedding.clone(),
            text: r.text.clone(),
            source_id: r.source_id.clone(),
        }
    }
}

/// Reads a whole prediction log and returns it as a validated, time-sorted
/// [`Dataset`] named `"input"`.
pub fn parse_records<R: Read>(mut source: R, format: InputFormat, label_set: &LabelSet) -> Result<Dataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Malformed {
        line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        reason: "invalid UTF-8".into(),
    })?;
    let records = match format {
        InputFormat::Jsonl => parse_jsonl(text, label_set)?,
        InputFormat::Csv => parse_csv(text, label_set)?,
    };
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(Dataset::from_sorted_unchecked("input", label_set.clone(), records))
}

fn parse_jsonl(text: &str, label_set: &LabelSet) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let wire: WireRecord = serde_json::from_str(line).map_err(|e| Error::Malformed {
            line: line_no,
            reason: e.to_string(),
        })?;
        let record = wire
            .into_record(label_set)
            .and_then(|r| validate_record(r, label_set))
            .and_then(|r| check_embedding_dim(&r, &mut dim).map(|_| r))
            .map_err(|source| Error::InvalidRecord { line: line_no, source })?;
        records.push(record);
    }
    Ok(records)
}

pub const CSV_COLUMNS: [&str; 5] = ["timestamp", "predicted_label", "confidence", "true_label", "text"];

fn parse_csv(text: &str, label_set: &LabelSet) -> Result<Vec<PredictionRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let mut col = [None; 5];
    for (i, h) in headers.iter().enumerate() {
        let slot = CSV_COLUMNS
            .iter()
            .position(|c| *c == h)
            .ok_or_else(|| Error::Malformed {
                line: 1,
                reason: format!("unexpected column `{h}`"),
            })?;
        col[slot] = Some(i);
    }
    for required in 0..3 {
        if col[required].is_none() {
            return Err(Error::Malformed {
                line: 1,
                reason: format!("missing column `{}`", CSV_COLUMNS[required]),
            });
        }
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let cell = |slot: usize| col[slot].and_then(|i| row.get(i)).filter(|s| !s.is_empty());
        let confidence: f64 = cell(2).unwrap_or("").parse().map_err(|_| Error::Malformed {
            line,
            reason: format!("confidence `{}` is not a number", cell(2).unwrap_or("")),
        })?;
        let build = || -> std::result::Result<PredictionRecord, ValidationError> {
            let mut r = PredictionRecord::new(
                parse_timestamp(cell(0).unwrap_or(""))?,
                resolve_label(label_set, cell(1).unwrap_or(""))?,
                confidence,
            );
            r.true_label = cell(3).map(|t| resolve_label(label_set, t)).transpose()?;
            r.text = cell(4).map(str::to_owned);
            validate_record(r, label_set)
        };
        records.push(build().map_err(|source| Error::InvalidRecord { line, source })?);
    }
    Ok(records)
}

/// Canonical JSONL serialization: one record per line, fixed field order,
/// `class_probs` keys sorted.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for r in dataset.records() {
        let wire = WireRecord::from_record(r, dataset.label_set());
        serde_json::to_writer(&mut out, &wire).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_jsonl(dataset, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// CSV serialization. Only the fixed CSV columns are written; class
/// probabilities, embeddings and source ids have no CSV representation.
pub fn write_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    let ls = dataset.label_set();
    for r in dataset.records() {
        w.write_record([
            format_timestamp(r.timestamp).as_str(),
            ls.name(r.predicted_label),
            r.confidence.to_string().as_str(),
            r.true_label.map_or("", |t| ls.name(t)),
            r.text.as_deref().unwrap_or(""),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
