use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng64;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrResult {
    pub alpha: f64,
    /// In input order.
    pub rejected: Vec<bool>,
    /// Benjamini-Hochberg adjusted p-values, in input order.
    pub adjusted: Vec<f64>,
}

/// Benjamini-Hochberg step-up procedure.
pub fn bh_fdr(p_values: &[f64], alpha: f64) -> Result<FdrResult> {
    if let Some(&p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::param("p_values", format!("{p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]).then(i.cmp(&j)));

    let k = (1..=m)
        .rev()
        .find(|&rank| p_values[order[rank - 1]] <= rank as f64 * alpha / m as f64)
        .unwrap_or(0);

    let mut rejected = vec![false; m];
    for &i in &order[..k] {
        rejected[i] = true;
    }
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (1..=m).rev() {
        let i = order[rank - 1];
        running = running.min(m as f64 * p_values[i] / rank as f64);
        adjusted[i] = running.min(1.0);
    }
    Ok(FdrResult {
        alpha,
        rejected,
        adjusted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: usize,
    pub df_within: usize,
}

/// One-way ANOVA decomposition.
pub fn anova<G: AsRef<[f64]>>(groups: &[G]) -> Result<Anova> {
    if groups.len() < 2 {
        return Err(Error::param("groups", "need at least 2 groups"));
    }
    if groups.iter().any(|g| g.as_ref().len() < 2) {
        return Err(Error::param("groups", "each group needs at least 2 samples"));
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let g = g.as_ref();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    if ssw <= 0.0 {
        return Err(Error::DegenerateGroups);
    }
    let df_between = groups.len() - 1;
    let df_within = n - groups.len();
    Ok(Anova {
        f: (ssb / df_between as f64) / (ssw / df_within as f64),
        ss_between: ssb,
        ss_within: ssw,
        df_between,
        df_within,
    })
}

pub fn anova_f<G: AsRef<[f64]>>(groups: &[G]) -> Result<f64> {
    anova(groups).map(|a| a.f)
}

/// Counts a permuted statistic as at least as extreme as the observed one,
/// with a relative slack for floating-point ties.
fn at_least(stat: f64, observed: f64) -> bool {
    stat >= observed - 1e-12 * observed.abs().max(1.0)
}

fn check_iterations(iterations: usize) -> Result<()> {
    if iterations < 1 {
        return Err(Error::param("iterations", "must be at least 1"));
    }
    Ok(())
}

/// Two-sided permutation p-value for the difference in means,
/// `(1 + #{|perm diff| >= |obs diff|}) / (1 + iterations)`.
pub fn permutation_p(group_a: &[f64], group_b: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    check_iterations(iterations)?;
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (na, nb) = (group_a.len(), group_b.len());
    let mut pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let total: f64 = pooled.iter().sum();
    let diff = |sa: f64| (sa / na as f64 - (total - sa) / nb as f64).abs();
    let observed = diff(group_a.iter().sum());
    let mut rng = Rng64::new(seed);
    let mut hits = 0usize;
    for _ in 0..iterations {
        rng.shuffle(&mut pooled);
        if at_least(diff(pooled[..na].iter().sum()), observed) {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (1 + iterations) as f64)
}

/// Permutation p-value for the one-way ANOVA F statistic (group labels
/// shuffled, group sizes kept).
pub fn anova_permutation_p<G: AsRef<[f64]>>(groups: &[G], iterations: usize, seed: u64) -> Result<f64> {
    check_iterations(iterations)?;
    let observed = anova_f(groups)?;
    let sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    let mut pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref()).copied().collect();
    let mut rng = Rng64::new(seed);
    let mut hits = 0usize;
    for _ in 0..iterations {
        rng.shuffle(&mut pooled);
        let mut start = 0;
        let slices: Vec<&[f64]> = sizes
            .iter()
            .map(|&s| {
                start += s;
                &pooled[start - s..start]
            })
            .collect();
        // a permutation that puts all spread between groups has F = inf
        let f = anova_f(&slices).unwrap_or(f64::INFINITY);
        if at_least(f, observed) {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (1 + iterations) as f64)
}

/// Sample Pearson correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::param("x", "need at least 3 paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided permutation p-value for Pearson's r (pairs broken by shuffling `y`).
pub fn pearson_permutation_p(x: &[f64], y: &[f64], iterations: usize, seed: u64) -> Result<f64> {
    check_iterations(iterations)?;
    let observed = pearson_r(x, y)?.abs();
    let mut shuffled = y.to_vec();
    let mut rng = Rng64::new(seed);
    let mut hits = 0usize;
    for _ in 0..iterations {
        rng.shuffle(&mut shuffled);
        if at_least(pearson_r(x, &shuffled)?.abs(), observed) {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (1 + iterations) as f64)
}
