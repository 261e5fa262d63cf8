//! Comparison detectors run on the same pre/during windows as the
//! zero-training metrics: scalar two-sample distances on confidences and
//! vector-space drift on texts or precomputed embeddings.

mod embedding;
mod text;
mod univariate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use embedding::{
    centroid_drift, clustering_drift, js_divergence, kmeans, median_heuristic, mmd_rbf, mmd_rbf_detailed,
    mmd_rbf_with_bandwidth, KMeans, MmdResult, CLUSTER_SMOOTHING, KMEANS_MAX_ITER, KMEANS_TOL,
};
pub use text::{tfidf_vectorize, tokenize, DocVector, TfIdf};
pub use univariate::{ks_statistic, psi, psi_detailed, quantile_sorted, wasserstein_1d, PsiResult, PSI_EPSILON};

use crate::error::{Error, Result};
use crate::model::PredictionRecord;
use crate::rng::Rng64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    Ks,
    Psi,
    Wasserstein,
    TfidfCentroid,
    /// Centroid cosine distance on precomputed sentence embeddings.
    EmbeddingCentroid,
    Mmd,
    ClusteringJs,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 7] = [
        BaselineMethod::Ks,
        BaselineMethod::Psi,
        BaselineMethod::Wasserstein,
        BaselineMethod::TfidfCentroid,
        BaselineMethod::EmbeddingCentroid,
        BaselineMethod::Mmd,
        BaselineMethod::ClusteringJs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::Ks => "ks",
            BaselineMethod::Psi => "psi",
            BaselineMethod::Wasserstein => "wasserstein",
            BaselineMethod::TfidfCentroid => "tfidf_centroid",
            BaselineMethod::EmbeddingCentroid => "embedding_centroid",
            BaselineMethod::Mmd => "mmd",
            BaselineMethod::ClusteringJs => "clustering_js",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown baseline method `{s}`")))
    }
}

/// Drift score of one method in its native unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineScore {
    pub method: BaselineMethod,
    pub score: f64,
    /// Every constant the method used, for reproducibility.
    pub details: BTreeMap<String, Value>,
}

/// Outcome of attempting a method on a window pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BaselineOutcome {
    Scored(BaselineScore),
    Skipped { method: BaselineMethod, reason: String },
}

impl BaselineOutcome {
    pub fn method(&self) -> BaselineMethod {
        match self {
            BaselineOutcome::Scored(s) => s.method,
            BaselineOutcome::Skipped { method, .. } => *method,
        }
    }

    pub fn score(&self) -> Option<&BaselineScore> {
        match self {
            BaselineOutcome::Scored(s) => Some(s),
            BaselineOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub methods: Vec<BaselineMethod>,
    pub psi_bins: usize,
    pub kmeans_k: usize,
    /// Per-window cap on vectors fed to the quadratic methods (MMD, k-means).
    pub max_samples: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            methods: BaselineMethod::ALL.to_vec(),
            psi_bins: 10,
            kmeans_k: 5,
            max_samples: 500,
        }
    }
}

/// Seeded subsample of at most `cap` items, keeping their original order.
fn subsample<'a, T>(items: &[&'a T], cap: usize, rng: &mut Rng64) -> Vec<&'a T> {
    if items.len() <= cap {
        return items.to_vec();
    }
    let mut idx: Vec<usize> = (0..items.len()).collect();
    // partial Fisher-Yates: the first `cap` slots become a uniform sample
    for i in 0..cap {
        let j = i + rng.below(items.len() - i);
        idx.swap(i, j);
    }
    idx.truncate(cap);
    idx.sort_unstable();
    idx.into_iter().map(|i| items[i]).collect()
}

fn vectors<'a>(records: &'a [&PredictionRecord]) -> (Vec<&'a Vec<f64>>, usize) {
    let v: Vec<&Vec<f64>> = records.iter().filter_map(|r| r.embedding.as_ref()).collect();
    let skipped = records.len() - v.len();
    (v, skipped)
}

fn score(method: BaselineMethod, score: f64, details: Vec<(&str, Value)>) -> BaselineOutcome {
    BaselineOutcome::Scored(BaselineScore {
        method,
        score,
        details: details.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
    })
}

/// Runs every configured method on `pre` versus `during`.
///
/// Scalar methods compare confidence distributions. Text and embedding
/// methods use the records that carry the field and skip the rest, counting
/// them in `details`. A method whose inputs are missing or degenerate is
/// reported as skipped rather than failing the run.
pub fn run_baselines(
    pre: &[&PredictionRecord],
    during: &[&PredictionRecord],
    config: &BaselineConfig,
    seed: u64,
) -> Vec<BaselineOutcome> {
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    methods
        .into_iter()
        .map(|m| {
            run_one(m, pre, during, config, seed).unwrap_or_else(|e| BaselineOutcome::Skipped {
                method: m,
                reason: e.to_string(),
            })
        })
        .collect()
}

fn run_one(
    method: BaselineMethod,
    pre: &[&PredictionRecord],
    during: &[&PredictionRecord],
    config: &BaselineConfig,
    seed: u64,
) -> Result<BaselineOutcome> {
    let conf = |rs: &[&PredictionRecord]| rs.iter().map(|r| r.confidence).collect::<Vec<_>>();
    let sizes = |a: usize, b: usize| vec![("n_reference", json!(a)), ("n_candidate", json!(b))];
    Ok(match method {
        BaselineMethod::Ks => {
            let d = ks_statistic(&conf(pre), &conf(during))?;
            let mut det = sizes(pre.len(), during.len());
            det.push(("feature", json!("confidence")));
            score(method, d, det)
        }
        BaselineMethod::Psi => {
            let r = psi_detailed(&conf(pre), &conf(during), config.psi_bins)?;
            let mut det = sizes(pre.len(), during.len());
            det.extend([
                ("feature", json!("confidence")),
                ("n_bins", json!(config.psi_bins)),
                ("epsilon", json!(PSI_EPSILON)),
                ("edges", json!(r.edges)),
            ]);
            score(method, r.score, det)
        }
        BaselineMethod::Wasserstein => {
            let w = wasserstein_1d(&conf(pre), &conf(during))?;
            let mut det = sizes(pre.len(), during.len());
            det.push(("feature", json!("confidence")));
            score(method, w, det)
        }
        BaselineMethod::TfidfCentroid => {
            let a: Vec<&str> = pre.iter().filter_map(|r| r.text.as_deref()).collect();
            let b: Vec<&str> = during.iter().filter_map(|r| r.text.as_deref()).collect();
            if a.is_empty() || b.is_empty() {
                return Err(Error::param("text", "no records with text in a window"));
            }
            let corpus: Vec<&str> = a.iter().chain(&b).copied().collect();
            let fit = tfidf_vectorize(&corpus)?;
            let (va, vb) = fit.vectors.split_at(a.len());
            let d = centroid_drift(va, vb)?;
            let mut det = sizes(a.len(), b.len());
            det.extend([
                ("vocabulary_size", json!(fit.vocabulary.len())),
                ("skipped_records", json!(pre.len() + during.len() - corpus.len())),
            ]);
            score(method, d, det)
        }
        BaselineMethod::EmbeddingCentroid => {
            let (a, sa) = vectors(pre);
            let (b, sb) = vectors(during);
            let da: Vec<DocVector> = a.iter().map(|v| DocVector::Dense((*v).clone())).collect();
            let db: Vec<DocVector> = b.iter().map(|v| DocVector::Dense((*v).clone())).collect();
            let d = centroid_drift(&da, &db)?;
            let mut det = sizes(a.len(), b.len());
            det.push(("skipped_records", json!(sa + sb)));
            score(method, d, det)
        }
        BaselineMethod::Mmd | BaselineMethod::ClusteringJs => {
            let (a, sa) = vectors(pre);
            let (b, sb) = vectors(during);
            let mut rng = Rng64::derived(seed, method as u64);
            let a = subsample(&a, config.max_samples, &mut rng);
            let b = subsample(&b, config.max_samples, &mut rng);
            let a: Vec<&[f64]> = a.into_iter().map(Vec::as_slice).collect();
            let b: Vec<&[f64]> = b.into_iter().map(Vec::as_slice).collect();
            let mut det = sizes(a.len(), b.len());
            det.extend([
                ("skipped_records", json!(sa + sb)),
                ("max_samples", json!(config.max_samples)),
                ("seed", json!(seed)),
            ]);
            if method == BaselineMethod::Mmd {
                let r = mmd_rbf_detailed(&a, &b)?;
                det.extend([("sigma2", json!(r.sigma2)), ("estimator", json!("biased_v"))]);
                score(method, r.score, det)
            } else {
                let d = clustering_drift(&a, &b, config.kmeans_k, seed)?;
                det.extend([
                    ("k", json!(config.kmeans_k)),
                    ("max_iter", json!(KMEANS_MAX_ITER)),
                    ("tol", json!(KMEANS_TOL)),
                    ("smoothing", json!(CLUSTER_SMOOTHING)),
                ]);
                score(method, d, det)
            }
        }
    })
}
