//! Two-sample distances on scalar samples.

use crate::error::{Error, Result};

fn sorted_sample(xs: &[f64], name: &'static str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::param(name, "contains NaN"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_sample(a, "a")?;
    let b = sorted_sample(b, "b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Linear-interpolation quantile of sorted data (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const PSI_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiResult {
    pub score: f64,
    /// Interior bin edges; the outer bins are open-ended.
    pub edges: Vec<f64>,
    pub reference_props: Vec<f64>,
    pub candidate_props: Vec<f64>,
}

/// Population Stability Index with `n_bins` reference-quantile bins.
///
/// Bin `i` holds values in `(e_i, e_{i+1}]` with `e_0 = -inf` and
/// `e_n = +inf`. Proportions are floored at [`PSI_EPSILON`] before the log
/// ratio. The reference sample comes first.
pub fn psi(reference: &[f64], candidate: &[f64], n_bins: usize) -> Result<f64> {
    psi_detailed(reference, candidate, n_bins).map(|r| r.score)
}

pub fn psi_detailed(reference: &[f64], candidate: &[f64], n_bins: usize) -> Result<PsiResult> {
    if n_bins < 2 {
        return Err(Error::param("n_bins", format!("need at least 2, got {n_bins}")));
    }
    let r = sorted_sample(reference, "reference")?;
    let c = sorted_sample(candidate, "candidate")?;
    let edges: Vec<f64> = (1..n_bins)
        .map(|k| quantile_sorted(&r, k as f64 / n_bins as f64))
        .collect();
    let props = |xs: &[f64]| {
        let mut counts = vec![0usize; n_bins];
        for &x in xs {
            counts[edges.partition_point(|&e| e < x)] += 1;
        }
        counts.iter().map(|&k| k as f64 / xs.len() as f64).collect::<Vec<_>>()
    };
    let rp = props(&r);
    let cp = props(&c);
    let score = rp
        .iter()
        .zip(&cp)
        .map(|(&pr, &pc)| {
            let (pr, pc) = (pr.max(PSI_EPSILON), pc.max(PSI_EPSILON));
            (pc - pr) * (pc / pr).ln()
        })
        .sum::<f64>()
        .max(0.0);
    Ok(PsiResult {
        score,
        edges,
        reference_props: rp,
        candidate_props: cp,
    })
}

/// 1-Wasserstein distance between two empirical distributions, integrating
/// `|F_a - F_b|` over the pooled support.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_sample(a, "a")?;
    let b = sorted_sample(b, "b")?;
    let mut pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    for w in pooled.windows(2) {
        let x = w[0];
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        total += (i as f64 / na - j as f64 / nb).abs() * (w[1] - x);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.5);
        assert!(matches!(ks_statistic(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        // F_a jumps to 1 at x=1; F_b is 0.5 there.
        assert_eq!(ks_statistic(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), 0.5);
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_1d(&[0.3, 0.1], &[0.1, 0.3]).unwrap(), 0.0);
        assert!((wasserstein_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(wasserstein_1d(&[0.0], &[5.0]).unwrap(), 5.0);
        assert!(wasserstein_1d(&[1.0], &[]).is_err());
    }

    #[test]
    fn psi_identical_is_zero() {
        let r: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(psi(&r, &r, 10).unwrap() <= 1e-9);
    }

    #[test]
    fn psi_rejects_one_bin() {
        assert!(psi(&[1.0, 2.0], &[1.0], 1).is_err());
    }

    #[test]
    fn psi_shift_past_reference_max() {
        let r: Vec<f64> = (0..100).map(|i| i as f64 + 0.5).collect();
        let c: Vec<f64> = (0..50).map(|i| 1000.0 + i as f64).collect();
        // oracle: all candidate mass in the last bin, reference 0.1 per bin
        let eps = 1e-4_f64;
        let expected = 9.0 * (eps - 0.1) * (eps / 0.1).ln() + (1.0 - 0.1) * (1.0_f64 / 0.1).ln();
        let got = psi(&r, &c, 10).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(got > 8.0);
    }

    #[test]
    fn psi_concentrated_in_one_bin() {
        // uniform reference 0.5..99.5; interior quantile edges are 10.4, 20.3, ...
        let r: Vec<f64> = (0..100).map(|i| i as f64 + 0.5).collect();
        let c = vec![33.0; 40];
        let res = psi_detailed(&r, &c, 10).unwrap();
        assert!((res.edges[0] - 10.4).abs() < 1e-12);
        assert!(res.reference_props.iter().all(|&p| (p - 0.1).abs() < 1e-12));
        assert_eq!(res.candidate_props[3], 1.0);
        // hand computation: 9 bins at (eps - 0.1) ln(eps / 0.1), one at 0.9 ln 10
        let expected = 9.0 * (1e-4 - 0.1) * (1e-4_f64 / 0.1).ln() + 0.9 * 10f64.ln();
        assert!((res.score - expected).abs() < 1e-12);
        assert!((expected - 8.283_089).abs() < 1e-6);
    }
}
