//! TF-IDF document vectors.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A document or embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub enum DocVector {
    /// Sorted `(index, weight)` pairs over a `dim`-sized space.
    Sparse {
        dim: usize,
        entries: Vec<(usize, f64)>,
    },
    Dense(Vec<f64>),
}

impl DocVector {
    pub fn dim(&self) -> usize {
        match self {
            DocVector::Sparse { dim, .. } => *dim,
            DocVector::Dense(v) => v.len(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            DocVector::Sparse { entries, .. } => entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt(),
            DocVector::Dense(v) => v.iter().map(|w| w * w).sum::<f64>().sqrt(),
        }
    }

    pub fn dot(&self, other: &DocVector) -> f64 {
        match (self, other) {
            (DocVector::Dense(a), DocVector::Dense(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            (DocVector::Sparse { entries: a, .. }, DocVector::Sparse { entries: b, .. }) => {
                let (mut i, mut j, mut s) = (0, 0, 0.0);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            s += a[i].1 * b[j].1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                s
            }
            (DocVector::Sparse { entries, .. }, DocVector::Dense(d))
            | (DocVector::Dense(d), DocVector::Sparse { entries, .. }) => entries.iter().map(|&(i, w)| w * d[i]).sum(),
        }
    }

    /// Adds `self` into a dense accumulator of the same dimension.
    pub fn add_to(&self, acc: &mut [f64]) {
        match self {
            DocVector::Sparse { entries, .. } => {
                for &(i, w) in entries {
                    acc[i] += w;
                }
            }
            DocVector::Dense(v) => {
                for (a, w) in acc.iter_mut().zip(v) {
                    *a += w;
                }
            }
        }
    }
}

impl From<Vec<f64>> for DocVector {
    fn from(v: Vec<f64>) -> Self {
        DocVector::Dense(v)
    }
}

/// Lowercased maximal alphanumeric runs of at least two characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdf {
    /// Sorted vocabulary; vector index `i` is `vocabulary[i]`.
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub vectors: Vec<DocVector>,
}

/// Fits TF-IDF on `corpus` and returns one L2-normalized vector per document.
///
/// `tf` is the raw count and `idf = ln((1 + N) / (1 + df)) + 1`. Documents
/// without tokens map to the zero vector.
pub fn tfidf_vectorize<S: AsRef<str>>(corpus: &[S]) -> Result<TfIdf> {
    if corpus.is_empty() {
        return Err(Error::EmptySample);
    }
    let docs: Vec<BTreeMap<String, usize>> = corpus
        .iter()
        .map(|d| {
            let mut tf = BTreeMap::new();
            for t in tokenize(d.as_ref()) {
                *tf.entry(t).or_insert(0) += 1;
            }
            tf
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in &docs {
        for t in d.keys() {
            *df.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::param("corpus", "no document yields a token"));
    }
    let n = docs.len() as f64;
    let vocabulary: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let idf: Vec<f64> = df
        .values()
        .map(|&k| ((1.0 + n) / (1.0 + k as f64)).ln() + 1.0)
        .collect();
    let index: BTreeMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let dim = vocabulary.len();
    let vectors = docs
        .iter()
        .map(|d| {
            let mut entries: Vec<(usize, f64)> = d
                .iter()
                .map(|(t, &c)| {
                    let i = index[t.as_str()];
                    (i, c as f64 * idf[i])
                })
                .collect();
            let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for e in &mut entries {
                    e.1 /= norm;
                }
            }
            DocVector::Sparse { dim, entries }
        })
        .collect();
    Ok(TfIdf {
        vocabulary,
        idf,
        vectors,
    })
}
