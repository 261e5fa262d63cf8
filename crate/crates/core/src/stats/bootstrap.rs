use serde::{Deserialize, Serialize};

use crate::baselines::quantile_sorted;
use crate::error::{Error, Result};
use crate::rng::Rng64;

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    /// `(baseline - mean(sample)) * 100`.
    DropPoints {
        baseline: f64,
    },
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::DropPoints { .. } => "drop_points",
        }
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        match *self {
            Statistic::Mean => mean,
            Statistic::DropPoints { baseline } => (baseline - mean) * 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapParams {
    pub iterations: usize,
    pub seed: u64,
    pub level: f64,
}

impl Default for BootstrapParams {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            seed: DEFAULT_SEED,
            level: DEFAULT_LEVEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub statistic_name: String,
    pub point_estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Always `"percentile"`.
    pub method: String,
    /// The point estimate fell outside `[lower, upper]`.
    pub point_outside_interval: bool,
}

/// Percentile bootstrap confidence interval of `statistic`.
pub fn bootstrap_ci(samples: &[f64], statistic: Statistic, params: BootstrapParams) -> Result<BootstrapCI> {
    bootstrap_ci_with(samples, statistic.name(), |xs| statistic.eval(xs), params)
}

/// Percentile bootstrap for an arbitrary statistic.
///
/// Each of `params.iterations` resamples draws `n` indices with replacement
/// from one sequential [`Rng64`] stream seeded with `params.seed`; the bounds
/// are the linear-interpolation quantiles at `(1 - level) / 2` and
/// `1 - (1 - level) / 2` of the sorted resampled statistics.
pub fn bootstrap_ci_with<F>(samples: &[f64], name: &str, statistic: F, params: BootstrapParams) -> Result<BootstrapCI>
where
    F: Fn(&[f64]) -> f64,
{
    if samples.len() < 2 {
        return Err(Error::param(
            "samples",
            format!("need at least 2, got {}", samples.len()),
        ));
    }
    if params.iterations < 1 {
        return Err(Error::param("iterations", "must be at least 1"));
    }
    if !(params.level > 0.0 && params.level < 1.0) {
        return Err(Error::param("level", format!("{} outside (0, 1)", params.level)));
    }
    let n = samples.len();
    let mut rng = Rng64::new(params.seed);
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..params.iterations)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[rng.below(n)];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - params.level) / 2.0;
    let lower = quantile_sorted(&stats, tail);
    let upper = quantile_sorted(&stats, 1.0 - tail);
    let point = statistic(samples);
    Ok(BootstrapCI {
        statistic_name: name.to_owned(),
        point_estimate: point,
        lower,
        upper,
        level: params.level,
        iterations: params.iterations,
        seed: params.seed,
        method: "percentile".to_owned(),
        point_outside_interval: point < lower || point > upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sample_collapses() {
        let ci = bootstrap_ci(&[0.25; 30], Statistic::Mean, BootstrapParams::default()).unwrap();
        assert_eq!((ci.lower, ci.upper, ci.point_estimate), (0.25, 0.25, 0.25));
        assert!(!ci.point_outside_interval);
    }

    #[test]
    fn same_seed_same_interval() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sqrt()).collect();
        let a = bootstrap_ci(&xs, Statistic::Mean, BootstrapParams::default()).unwrap();
        let b = bootstrap_ci(&xs, Statistic::Mean, BootstrapParams::default()).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ci(
            &xs,
            Statistic::Mean,
            BootstrapParams {
                seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(a.lower, c.lower);
        assert!(a.lower < a.point_estimate && a.point_estimate < a.upper);
    }

    #[test]
    fn drop_points_statistic() {
        let xs = [0.7, 0.72, 0.74, 0.7];
        let ci = bootstrap_ci(
            &xs,
            Statistic::DropPoints { baseline: 0.85 },
            BootstrapParams::default(),
        )
        .unwrap();
        assert!((ci.point_estimate - 13.5).abs() < 1e-9);
        assert!(ci.lower <= 13.5 && ci.upper >= 13.5);
        assert_eq!(ci.statistic_name, "drop_points");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(bootstrap_ci(&[1.0], Statistic::Mean, BootstrapParams::default()).is_err());
        let zero = BootstrapParams {
            iterations: 0,
            ..Default::default()
        };
        assert!(bootstrap_ci(&[1.0, 2.0], Statistic::Mean, zero).is_err());
        let level = BootstrapParams {
            level: 1.0,
            ..Default::default()
        };
        assert!(bootstrap_ci(&[1.0, 2.0], Statistic::Mean, level).is_err());
    }
}
