//! Distances between sets of vectors: centroid cosine distance, RBF-kernel
//! MMD and k-means cluster-distribution divergence.

use crate::baselines::text::DocVector;
use crate::error::{Error, Result};
use crate::rng::Rng64;

fn common_dim<V: AsRef<[f64]>>(x: &[V], y: &[V]) -> Result<usize> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let d = x[0].as_ref().len();
    for v in x.iter().chain(y) {
        if v.as_ref().len() != d {
            return Err(Error::DimensionMismatch(d, v.as_ref().len()));
        }
    }
    Ok(d)
}

fn centroid(vs: &[DocVector], dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for v in vs {
        v.add_to(&mut acc);
    }
    let n = vs.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// Cosine distance `1 - cos` between the mean of `pre` and the mean of `post`.
pub fn centroid_drift(pre: &[DocVector], post: &[DocVector]) -> Result<f64> {
    if pre.is_empty() || post.is_empty() {
        return Err(Error::EmptySample);
    }
    let dim = pre[0].dim();
    if let Some(v) = pre.iter().chain(post).find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch(dim, v.dim()));
    }
    let a = centroid(pre, dim);
    let b = centroid(post, dim);
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateCentroid);
    }
    let cos = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of the non-zero pairwise squared distances of the pooled sample,
/// or 1 when every pair coincides.
pub fn median_heuristic<V: AsRef<[f64]>>(pooled: &[V]) -> f64 {
    let mut d: Vec<f64> = Vec::with_capacity(pooled.len() * pooled.len().saturating_sub(1) / 2);
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            let s = sq_dist(pooled[i].as_ref(), pooled[j].as_ref());
            if s > 0.0 {
                d.push(s);
            }
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len() / 2;
    if d.len() % 2 == 1 {
        d[m]
    } else {
        0.5 * (d[m - 1] + d[m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmdResult {
    pub score: f64,
    /// Kernel bandwidth as `sigma^2`.
    pub sigma2: f64,
}

/// Biased (V-statistic) MMD with an RBF kernel whose bandwidth is chosen by
/// the median heuristic. Returns `sqrt(max(MMD^2, 0))`.
pub fn mmd_rbf<V: AsRef<[f64]>>(x: &[V], y: &[V]) -> Result<f64> {
    mmd_rbf_detailed(x, y).map(|r| r.score)
}

pub fn mmd_rbf_detailed<V: AsRef<[f64]>>(x: &[V], y: &[V]) -> Result<MmdResult> {
    common_dim(x, y)?;
    let pooled: Vec<&[f64]> = x.iter().chain(y).map(AsRef::as_ref).collect();
    let sigma2 = median_heuristic(&pooled);
    let score = mmd_rbf_with_bandwidth(x, y, sigma2)?;
    Ok(MmdResult { score, sigma2 })
}

/// MMD as in [`mmd_rbf`] with a caller-chosen `sigma^2`.
pub fn mmd_rbf_with_bandwidth<V: AsRef<[f64]>>(x: &[V], y: &[V], sigma2: f64) -> Result<f64> {
    common_dim(x, y)?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::param("sigma2", format!("must be positive, got {sigma2}")));
    }
    let k = |a: &[f64], b: &[f64]| (-sq_dist(a, b) / (2.0 * sigma2)).exp();
    // Within-sample means over all ordered pairs, diagonal included.
    let within = |s: &[V]| {
        let mut off = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                off += k(s[i].as_ref(), s[j].as_ref());
            }
        }
        (s.len() as f64 + 2.0 * off) / (s.len() * s.len()) as f64
    };
    let mut cross = 0.0;
    for a in x {
        for b in y {
            cross += k(a.as_ref(), b.as_ref());
        }
    }
    let cross = cross / (x.len() * y.len()) as f64;
    let mmd2 = within(x) + within(y) - 2.0 * cross;
    Ok(mmd2.max(0.0).sqrt())
}

/// Jensen-Shannon divergence in bits.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    for (name, d) in [("p", p), ("q", q)] {
        if d.iter().any(|&v| v < 0.0 || v.is_nan()) {
            return Err(Error::param(name, "negative probability"));
        }
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::param(name, format!("sums to {s}, not 1")));
        }
    }
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        if a > 0.0 {
            js += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            js += 0.5 * b * (b / m).log2();
        }
    }
    Ok(js.clamp(0.0, 1.0))
}

pub const KMEANS_MAX_ITER: usize = 100;
pub const KMEANS_TOL: f64 = 1e-6;
pub const CLUSTER_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, cent) in centroids.iter().enumerate() {
        let d = sq_dist(point, cent);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

/// Lloyd's k-means with farthest-point seeding.
///
/// The first centre is a uniformly drawn point; each further centre is the
/// point farthest from its nearest chosen centre (lowest index on ties).
/// Iteration stops once no centroid moves more than [`KMEANS_TOL`] or after
/// [`KMEANS_MAX_ITER`] rounds. Empty clusters keep their previous centroid.
pub fn kmeans<V: AsRef<[f64]>>(points: &[V], k: usize, rng: &mut Rng64) -> Result<KMeans> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2, got {k}")));
    }
    if k > points.len() {
        return Err(Error::param("k", format!("{k} clusters for {} points", points.len())));
    }
    let dim = points[0].as_ref().len();
    let mut centroids = vec![points[rng.below(points.len())].as_ref().to_vec()];
    let mut min_d: Vec<f64> = points.iter().map(|p| sq_dist(p.as_ref(), &centroids[0])).collect();
    while centroids.len() < k {
        let (far, _) = min_d
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &d)| if d > b.1 { (i, d) } else { b });
        let c = points[far].as_ref().to_vec();
        for (m, p) in min_d.iter_mut().zip(points) {
            *m = m.min(sq_dist(p.as_ref(), &c));
        }
        centroids.push(c);
    }

    let mut assignments = vec![0usize; points.len()];
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        for (a, p) in assignments.iter_mut().zip(points) {
            *a = nearest(p.as_ref(), &centroids);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p.as_ref()) {
                *s += v;
            }
        }
        let mut moved: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            moved = moved.max(sq_dist(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if moved <= KMEANS_TOL {
            break;
        }
    }
    for (a, p) in assignments.iter_mut().zip(points) {
        *a = nearest(p.as_ref(), &centroids);
    }
    Ok(KMeans {
        centroids,
        assignments,
        iterations,
    })
}

fn smoothed_distribution(assignments: &[usize], k: usize) -> Vec<f64> {
    let mut p = vec![0.0; k];
    for &a in assignments {
        p[a] += 1.0;
    }
    let n = assignments.len() as f64;
    let z = 1.0 + k as f64 * CLUSTER_SMOOTHING;
    p.iter().map(|c| (c / n + CLUSTER_SMOOTHING) / z).collect()
}

/// Fits k-means on the pooled vectors and returns the base-2 JS divergence
/// between the two windows' cluster-assignment distributions.
pub fn clustering_drift<V: AsRef<[f64]>>(x: &[V], y: &[V], k: usize, seed: u64) -> Result<f64> {
    common_dim(x, y)?;
    let pooled: Vec<&[f64]> = x.iter().chain(y).map(AsRef::as_ref).collect();
    let fit = kmeans(&pooled, k, &mut Rng64::new(seed))?;
    let (ax, ay) = fit.assignments.split_at(x.len());
    js_divergence(&smoothed_distribution(ax, k), &smoothed_distribution(ay, k))
}
