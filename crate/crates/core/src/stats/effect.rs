use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (divisor `n - 1`).
fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_groups(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::param("groups", "each group needs at least 2 samples"));
    }
    Ok(())
}

/// Cohen's d with the pooled sample standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    check_groups(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    if pooled <= 0.0 {
        return Err(Error::DegenerateGroups);
    }
    Ok((mean(a) - mean(b)) / pooled.sqrt())
}

/// Small-sample correction factor `J = 1 - 3 / (4 (n_a + n_b) - 9)`.
pub fn hedges_correction(na: usize, nb: usize) -> f64 {
    1.0 - 3.0 / (4.0 * (na + nb) as f64 - 9.0)
}

pub fn hedges_g(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(cohens_d(a, b)? * hedges_correction(a.len(), b.len()))
}

/// Glass's delta, standardized by the control group `b`.
pub fn glass_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    check_groups(a, b)?;
    let sb = sample_variance(b);
    if sb <= 0.0 {
        return Err(Error::DegenerateGroups);
    }
    Ok((mean(a) - mean(b)) / sb.sqrt())
}

/// Cliff's delta `(#(a > b) - #(a < b)) / (n_a n_b)`, counted by binary
/// search over the sorted control group.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut balance: i64 = 0;
    for &x in a {
        let less = sorted.partition_point(|&y| y < x);
        let greater = sorted.len() - sorted.partition_point(|&y| y <= x);
        balance += less as i64 - greater as i64;
    }
    Ok(balance as f64 / (a.len() * b.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectCategory {
    Negligible,
    Small,
    Medium,
    Large,
}

impl fmt::Display for EffectCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectCategory::Negligible => "negligible",
            EffectCategory::Small => "small",
            EffectCategory::Medium => "medium",
            EffectCategory::Large => "large",
        })
    }
}

/// Bands on `|d|`: below 0.2 negligible, below 0.5 small, below 0.8 medium,
/// otherwise large.
pub fn classify_effect_size(d: f64) -> EffectCategory {
    let d = d.abs();
    if d < 0.2 {
        EffectCategory::Negligible
    } else if d < 0.5 {
        EffectCategory::Small
    } else if d < 0.8 {
        EffectCategory::Medium
    } else {
        EffectCategory::Large
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectMeasure {
    pub value: f64,
    pub category: EffectCategory,
}

impl EffectMeasure {
    fn from_value(value: f64) -> Self {
        Self {
            value,
            category: classify_effect_size(value),
        }
    }
}

/// The four effect sizes of `group_a` against control `group_b`. A measure
/// is `None` when its denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeReport {
    pub cohens_d: Option<EffectMeasure>,
    pub glass_delta: Option<EffectMeasure>,
    pub hedges_g: Option<EffectMeasure>,
    pub cliffs_delta: EffectMeasure,
    pub n_a: usize,
    pub n_b: usize,
}

pub fn effect_sizes(group_a: &[f64], group_b: &[f64]) -> Result<EffectSizeReport> {
    check_groups(group_a, group_b)?;
    let soft = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(EffectMeasure::from_value(v))),
        Err(Error::DegenerateGroups) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(EffectSizeReport {
        cohens_d: soft(cohens_d(group_a, group_b))?,
        glass_delta: soft(glass_delta(group_a, group_b))?,
        hedges_g: soft(hedges_g(group_a, group_b))?,
        cliffs_delta: EffectMeasure::from_value(cliffs_delta(group_a, group_b)?),
        n_a: group_a.len(),
        n_b: group_b.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups_are_zero() {
        let a = [1.0, 2.0, 4.0];
        let r = effect_sizes(&a, &a).unwrap();
        assert_eq!(r.cohens_d.unwrap().value, 0.0);
        assert_eq!(r.glass_delta.unwrap().value, 0.0);
        assert_eq!(r.hedges_g.unwrap().value, 0.0);
        assert_eq!(r.cliffs_delta.value, 0.0);
    }

    #[test]
    fn hand_computed_example() {
        let r = effect_sizes(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap();
        assert!((r.cohens_d.as_ref().unwrap().value + 2.0).abs() < 1e-15);
        assert!((r.glass_delta.as_ref().unwrap().value + 2.0).abs() < 1e-15);
        assert!((r.hedges_g.as_ref().unwrap().value + 1.6).abs() < 1e-15);
        assert!((r.cliffs_delta.value + 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(r.cohens_d.unwrap().category, EffectCategory::Large);
    }

    #[test]
    fn cliffs_with_tie() {
        assert_eq!(cliffs_delta(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), -0.25);
    }

    #[test]
    fn degenerate_groups() {
        assert!(matches!(
            cohens_d(&[1.0, 1.0], &[2.0, 2.0]),
            Err(Error::DegenerateGroups)
        ));
        let r = effect_sizes(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert!(r.cohens_d.is_none() && r.hedges_g.is_none() && r.glass_delta.is_none());
        assert_eq!(r.cliffs_delta.value, -1.0);
        // zero control spread only disables Glass's delta
        let r = effect_sizes(&[1.0, 3.0], &[2.0, 2.0]).unwrap();
        assert!(r.glass_delta.is_none());
        assert_eq!(r.cohens_d.unwrap().value, 0.0);
        assert!(effect_sizes(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn classification_bands() {
        assert_eq!(classify_effect_size(0.175), EffectCategory::Negligible);
        assert_eq!(classify_effect_size(0.5), EffectCategory::Medium);
        assert_eq!(classify_effect_size(-0.9), EffectCategory::Large);
        assert_eq!(classify_effect_size(0.2), EffectCategory::Small);
        assert_eq!(classify_effect_size(0.8), EffectCategory::Large);
    }
}
