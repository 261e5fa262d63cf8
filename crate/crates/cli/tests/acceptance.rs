//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use tempdrift_core::alerting::{
    default_profiles, detect_drift, industry_breach, rate, BaselineThresholds, DetectionConfig, Severity,
};
use tempdrift_core::baselines::{
    centroid_drift, js_divergence, ks_statistic, mmd_rbf_detailed, psi, run_baselines, wasserstein_1d, BaselineConfig,
    BaselineMethod, DocVector,
};
use tempdrift_core::metrics::{bin_summary, max_drop, BinMetrics};
use tempdrift_core::model::{parse_records, to_jsonl_string};
use tempdrift_core::stats::{
    anova_f, bh_fdr, bootstrap_ci, classify_effect_size, effect_sizes, pearson_r, BootstrapParams, EffectCategory,
    Statistic,
};
use tempdrift_core::synth::{generate_stream, DriftSpec, RecordsPerDay, SynthConfig};
use tempdrift_core::temporal::{assign_bins, window_partition};
use tempdrift_core::{InputFormat, LabelId, LabelSet, Metric, PredictionRecord, Rng64, TemporalBin, WindowMetrics};

struct Verdict {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> (Verdict, Duration) {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    if elapsed >= limit {
        v.passed = false;
        v.detail = format!("{}; took {elapsed:?}, limit {limit:?}", v.detail);
    }
    (v, elapsed)
}

// ---------------------------------------------------------------- AC1

fn ac1() -> Verdict {
    let breaches = industry_breach(23.4, &default_profiles()).expect("valid profiles");
    let multipliers: Vec<f64> = breaches.iter().map(|b| b.multiplier).collect();
    let severities: Vec<Severity> = breaches.iter().map(|b| b.severity).collect();
    let ok = multipliers == [4.7, 7.8, 11.7, 2.9]
        && severities
            == [
                Severity::Critical,
                Severity::Critical,
                Severity::Critical,
                Severity::High,
            ];
    check(ok, format!("multipliers {multipliers:?}, severities {severities:?}"))
}

// ---------------------------------------------------------------- AC2

fn ac2() -> Verdict {
    use EffectCategory::*;
    let grid = [0.19, 0.2, 0.49, 0.5, 0.79, 0.8];
    let want = [Negligible, Small, Small, Medium, Medium, Large];
    let got: Vec<EffectCategory> = grid.iter().map(|&d| classify_effect_size(d)).collect();
    check(got == want, format!("{got:?}"))
}

// ---------------------------------------------------------------- AC3

fn sample(rng: &mut Rng64, max_len: usize) -> Vec<f64> {
    let n = 1 + rng.below(max_len);
    // coarse values so ties occur
    let coarse = rng.next_f64() < 0.3;
    (0..n)
        .map(|_| {
            let x = rng.normal() * 2.0 + 0.5;
            if coarse {
                x.round()
            } else {
                x
            }
        })
        .collect()
}

fn ecdf(xs: &[f64], t: f64) -> f64 {
    xs.iter().filter(|&&x| x <= t).count() as f64 / xs.len() as f64
}

fn oracle_ks(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&t| (ecdf(a, t) - ecdf(b, t)).abs())
        .fold(0.0, f64::max)
}

fn oracle_quantile(xs: &[f64], q: f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

fn oracle_psi(r: &[f64], c: &[f64], bins: usize) -> f64 {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend((1..bins).map(|k| oracle_quantile(r, k as f64 / bins as f64)));
    edges.push(f64::INFINITY);
    let share = |xs: &[f64], i: usize| {
        xs.iter().filter(|&&x| x > edges[i] && x <= edges[i + 1]).count() as f64 / xs.len() as f64
    };
    (0..bins)
        .map(|i| {
            let p = share(r, i).max(1e-4);
            let q = share(c, i).max(1e-4);
            (q - p) * (q / p).ln()
        })
        .sum::<f64>()
        .max(0.0)
}

/// Integral of |F_a^-1(u) - F_b^-1(u)| over u in (0, 1).
fn oracle_wasserstein(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut cuts: Vec<f64> = (0..=sa.len()).map(|i| i as f64 / sa.len() as f64).collect();
    cuts.extend((0..=sb.len()).map(|j| j as f64 / sb.len() as f64));
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let inv = |s: &[f64], u: f64| s[((u * s.len() as f64).floor() as usize).min(s.len() - 1)];
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (inv(&sa, mid) - inv(&sb, mid)).abs() * (w[1] - w[0])
        })
        .sum()
}

fn random_distribution(rng: &mut Rng64, k: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..k)
        .map(|_| if rng.next_f64() < 0.2 { 0.0 } else { rng.next_f64() })
        .collect();
    if p.iter().all(|&x| x == 0.0) {
        p[0] = 1.0;
    }
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

fn oracle_js(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    let kl = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&m)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, mm)| a * (a.ln() - mm.ln()) / std::f64::consts::LN_2)
            .sum()
    };
    0.5 * kl(p) + 0.5 * kl(q)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn var1(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// (d, glass, g, cliff)
fn oracle_effects(a: &[f64], b: &[f64]) -> [f64; 4] {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let sp = (((na - 1.0) * var1(a) + (nb - 1.0) * var1(b)) / (na + nb - 2.0)).sqrt();
    let d = (mean(a) - mean(b)) / sp;
    let glass = (mean(a) - mean(b)) / var1(b).sqrt();
    let g = d * (1.0 - 3.0 / (4.0 * (na + nb) - 9.0));
    let mut dom = 0i64;
    for x in a {
        for y in b {
            dom += (x > y) as i64 - (x < y) as i64;
        }
    }
    [d, glass, g, dom as f64 / (na * nb)]
}

fn oracle_anova(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = mean(&all);
    let ssb: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let ssw: f64 = groups.iter().map(|g| var1(g) * (g.len() - 1) as f64).sum();
    let k = groups.len() as f64;
    (ssb / (k - 1.0)) / (ssw / (all.len() as f64 - k))
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn oracle_bh(p: &[f64], alpha: f64) -> (Vec<bool>, Vec<f64>) {
    let m = p.len();
    let rank = |i: usize| 1 + (0..m).filter(|&j| p[j] < p[i] || (p[j] == p[i] && j < i)).count();
    let ranks: Vec<usize> = (0..m).map(rank).collect();
    let k = (0..m)
        .filter(|&i| p[i] <= ranks[i] as f64 * alpha / m as f64)
        .map(|i| ranks[i])
        .max()
        .unwrap_or(0);
    let rejected = ranks.iter().map(|&r| r <= k).collect();
    let adjusted = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| ranks[j] >= ranks[i])
                .map(|j| m as f64 * p[j] / ranks[j] as f64)
                .fold(1.0, f64::min)
        })
        .collect();
    (rejected, adjusted)
}

fn oracle_mmd(x: &[Vec<f64>], y: &[Vec<f64>]) -> (f64, f64) {
    let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
    let pooled: Vec<&Vec<f64>> = x.iter().chain(y).collect();
    let mut ds = Vec::new();
    for i in 0..pooled.len() {
        for j in 0..i {
            let v = d2(pooled[i], pooled[j]);
            if v > 0.0 {
                ds.push(v);
            }
        }
    }
    let sigma2 = if ds.is_empty() {
        1.0
    } else {
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = ds.len();
        if n % 2 == 1 {
            ds[n / 2]
        } else {
            (ds[n / 2 - 1] + ds[n / 2]) / 2.0
        }
    };
    let k = |a: &[f64], b: &[f64]| (-d2(a, b) / (2.0 * sigma2)).exp();
    let avg = |s: &[Vec<f64>], t: &[Vec<f64>]| {
        let mut acc = 0.0;
        for a in s {
            for b in t {
                acc += k(a, b);
            }
        }
        acc / (s.len() * t.len()) as f64
    };
    let m2 = avg(x, x) + avg(y, y) - 2.0 * avg(x, y);
    (m2.max(0.0).sqrt(), sigma2)
}

fn oracle_centroid(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let dim = x[0].len();
    let c = |s: &[Vec<f64>]| {
        (0..dim)
            .map(|i| s.iter().map(|v| v[i]).sum::<f64>() / s.len() as f64)
            .collect::<Vec<_>>()
    };
    let (a, b) = (c(x), c(y));
    let dot: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
    let na = a.iter().map(|u| u * u).sum::<f64>().sqrt();
    let nb = b.iter().map(|u| u * u).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

fn vectors(rng: &mut Rng64, n: usize, dim: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.normal() + shift).collect())
        .collect()
}

fn ac3() -> Verdict {
    const INSTANCES: usize = 120;
    const TOL: f64 = 1e-9;
    let mut rng = Rng64::new(2024);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, err: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(w) => w.1 = w.1.max(err),
        None => worst.push((name, err)),
    };
    for _ in 0..INSTANCES {
        let a = sample(&mut rng, 50);
        let b = sample(&mut rng, 50);
        record(
            "ks_statistic",
            (ks_statistic(&a, &b).unwrap() - oracle_ks(&a, &b)).abs(),
        );
        let bins = 2 + rng.below(9);
        record("psi", (psi(&a, &b, bins).unwrap() - oracle_psi(&a, &b, bins)).abs());
        record(
            "wasserstein_1d",
            (wasserstein_1d(&a, &b).unwrap() - oracle_wasserstein(&a, &b)).abs(),
        );

        let k = 2 + rng.below(8);
        let p = random_distribution(&mut rng, k);
        let q = random_distribution(&mut rng, k);
        record(
            "js_divergence",
            (js_divergence(&p, &q).unwrap() - oracle_js(&p, &q)).abs(),
        );

        let ga: Vec<f64> = (0..2 + rng.below(49)).map(|_| rng.normal()).collect();
        let gb: Vec<f64> = (0..2 + rng.below(49)).map(|_| rng.normal() + 0.5).collect();
        let r = effect_sizes(&ga, &gb).unwrap();
        let o = oracle_effects(&ga, &gb);
        let got = [
            r.cohens_d.unwrap().value,
            r.glass_delta.unwrap().value,
            r.hedges_g.unwrap().value,
            r.cliffs_delta.value,
        ];
        record(
            "effect_sizes",
            got.iter().zip(o).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max),
        );

        let groups: Vec<Vec<f64>> = (0..2 + rng.below(4))
            .map(|gi| (0..2 + rng.below(15)).map(|_| rng.normal() + gi as f64 * 0.3).collect())
            .collect();
        record("anova_f", (anova_f(&groups).unwrap() - oracle_anova(&groups)).abs());

        let n = 3 + rng.below(48);
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.6 * v + rng.normal()).collect();
        record("pearson_r", (pearson_r(&x, &y).unwrap() - oracle_pearson(&x, &y)).abs());

        let m = 1 + rng.below(50);
        let pv: Vec<f64> = (0..m)
            .map(|_| {
                if rng.next_f64() < 0.4 {
                    rng.next_f64() * 0.02
                } else {
                    rng.next_f64()
                }
            })
            .collect();
        let alpha = [0.01, 0.05, 0.1][rng.below(3)];
        let fdr = bh_fdr(&pv, alpha).unwrap();
        let (rej, adj) = oracle_bh(&pv, alpha);
        let adj_err = fdr
            .adjusted
            .iter()
            .zip(&adj)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        record("bh_fdr", if fdr.rejected == rej { adj_err } else { f64::INFINITY });

        let dim = 1 + rng.below(6);
        let (nx, ny, shift) = (2 + rng.below(24), 2 + rng.below(24), rng.next_f64());
        let vx = vectors(&mut rng, nx, dim, 0.0);
        let vy = vectors(&mut rng, ny, dim, shift);
        let got = mmd_rbf_detailed(&vx, &vy).unwrap();
        let (want, sigma2) = oracle_mmd(&vx, &vy);
        record("mmd_rbf", (got.score - want).abs().max((got.sigma2 - sigma2).abs()));

        let (nx, ny, shift) = (1 + rng.below(50), 1 + rng.below(50), rng.next_f64());
        let cx = vectors(&mut rng, nx, dim, 1.0);
        let cy = vectors(&mut rng, ny, dim, 1.0 + shift);
        let dx: Vec<DocVector> = cx.iter().cloned().map(DocVector::from).collect();
        let dy: Vec<DocVector> = cy.iter().cloned().map(DocVector::from).collect();
        record(
            "centroid_drift",
            (centroid_drift(&dx, &dy).unwrap() - oracle_centroid(&cx, &cy)).abs(),
        );
    }
    let failing: Vec<String> = worst
        .iter()
        // NaN errors count as failures
        .filter(|(_, e)| e.is_nan() || *e > TOL)
        .map(|(n, e)| format!("{n} err {e:e}"))
        .collect();
    let max_err = worst.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    check(
        failing.is_empty() && worst.len() == 10,
        if failing.is_empty() {
            format!("10 functions x {INSTANCES} instances, max abs error {max_err:.1e}")
        } else {
            failing.join(", ")
        },
    )
}

// ---------------------------------------------------------------- AC4

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 5, 1).unwrap()
}

fn random_bin(rng: &mut Rng64, k: usize, max_n: usize) -> TemporalBin {
    let n = 1 + rng.below(max_n);
    let skew = random_distribution(rng, k);
    let labeled = rng.next_f64() < 0.7;
    let with_probs = rng.next_f64() < 0.5;
    let base = day0().and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp();
    let records = (0..n)
        .map(|i| {
            let label = rng.categorical(&skew);
            let mut r = PredictionRecord::new(base + i as i64, LabelId(label as u32), 1.0 - rng.next_f64());
            if labeled && rng.next_f64() < 0.8 {
                r.true_label = Some(LabelId(rng.below(k) as u32));
            }
            if with_probs {
                r.class_probs = Some(random_distribution(rng, k));
            }
            r
        })
        .collect();
    TemporalBin { day: day0(), records }
}

fn labels(k: usize) -> LabelSet {
    LabelSet::new((0..k).map(|i| format!("l{i}"))).unwrap()
}

fn brute_summary(bin: &TemporalBin, k: usize) -> BinMetrics {
    let r = &bin.records;
    let n = r.len();
    let nf = n as f64;
    let mut mean_conf = 0.0;
    for x in r {
        mean_conf += x.confidence;
    }
    mean_conf /= nf;
    let mut var = 0.0;
    for x in r {
        var += (x.confidence - mean_conf).powi(2);
    }
    let std = (var / nf).sqrt();
    let mut counts = vec![0usize; k];
    for x in r {
        counts[x.predicted_label.0 as usize] += 1;
    }
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / nf;
            h -= p * p.ln() / std::f64::consts::LN_2;
        }
    }
    let labeled: Vec<&PredictionRecord> = r.iter().filter(|x| x.true_label.is_some()).collect();
    let accuracy = if labeled.is_empty() {
        None
    } else {
        Some(
            labeled
                .iter()
                .filter(|x| x.true_label == Some(x.predicted_label))
                .count() as f64
                / labeled.len() as f64,
        )
    };
    let probs: Vec<&Vec<f64>> = r.iter().filter_map(|x| x.class_probs.as_ref()).collect();
    let pe = if probs.is_empty() {
        None
    } else {
        let tot: f64 = probs
            .iter()
            .map(|p| {
                p.iter()
                    .filter(|&&v| v > 0.0)
                    .map(|&v| -v * v.ln() / std::f64::consts::LN_2)
                    .sum::<f64>()
            })
            .sum();
        Some(tot / probs.len() as f64)
    };
    let mut changes = 0;
    for i in 1..n {
        if r[i].predicted_label != r[i - 1].predicted_label {
            changes += 1;
        }
    }
    BinMetrics {
        day: bin.day,
        n,
        n_labeled: labeled.len(),
        mean_confidence: mean_conf,
        confidence_std: std,
        prediction_entropy_mean: pe,
        label_entropy: h,
        accuracy,
        pcs: *counts.iter().max().unwrap() as f64 / nf,
        csi: std / mean_conf,
        str: (n >= 2).then(|| changes as f64 / (n - 1) as f64),
        ced: mean_conf * h,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn close_opt(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => close(x, y, tol),
        (None, None) => true,
        _ => false,
    }
}

fn same_summary(a: &BinMetrics, b: &BinMetrics, tol: f64) -> bool {
    a.n == b.n
        && a.n_labeled == b.n_labeled
        && close(a.mean_confidence, b.mean_confidence, tol)
        && close(a.confidence_std, b.confidence_std, tol)
        && close_opt(a.prediction_entropy_mean, b.prediction_entropy_mean, tol)
        && close(a.label_entropy, b.label_entropy, tol)
        && close_opt(a.accuracy, b.accuracy, tol)
        && close(a.pcs, b.pcs, tol)
        && close(a.csi, b.csi, tol)
        && close_opt(a.str, b.str, tol)
        && close(a.ced, b.ced, tol)
}

fn ac4() -> Verdict {
    let mut rng = Rng64::new(7);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k = 2 + rng.below(4);
        let bin = random_bin(&mut rng, k, 200);
        if !same_summary(&bin_summary(&bin, &labels(k)), &brute_summary(&bin, k), 1e-12) {
            mismatches += 1;
        }
    }

    let mut violations: Vec<String> = Vec::new();
    for t in 0..10_000 {
        let k = 2 + rng.below(4);
        let ls = labels(k);
        let mut bin = random_bin(&mut rng, k, 60);
        if t % 10 == 0 {
            // unanimous bin
            let l = bin.records[0].predicted_label;
            bin.records.iter_mut().for_each(|r| r.predicted_label = l);
        }
        if t % 10 == 1 {
            // perfectly uniform bin
            let reps = 1 + rng.below(5);
            let base = bin.records[0].clone();
            bin.records = (0..k * reps)
                .map(|i| {
                    let mut r = base.clone();
                    r.predicted_label = LabelId((i % k) as u32);
                    r
                })
                .collect();
        }
        let m = bin_summary(&bin, &ls);
        let unanimous = bin
            .records
            .iter()
            .all(|r| r.predicted_label == bin.records[0].predicted_label);
        let lo = 1.0 / k as f64;
        if !(m.pcs >= lo - 1e-12 && m.pcs <= 1.0) {
            violations.push(format!("pcs bound {}", m.pcs));
        }
        if unanimous != (m.pcs == 1.0) {
            violations.push("pcs = 1 iff unanimous".into());
        }
        if t % 10 == 1 && !close(m.pcs, lo, 1e-12) {
            violations.push("pcs = 1/k at uniform".into());
        }
        if m.ced > m.mean_confidence * (k as f64).log2() + 1e-12 {
            violations.push("ced bound".into());
        }
        if unanimous != (m.ced == 0.0) {
            violations.push("ced = 0 iff unanimous".into());
        }
        if let Some(s) = m.str {
            if !(0.0..=1.0).contains(&s) {
                violations.push("str bound".into());
            }
        }

        // bijective relabel
        let mut perm: Vec<usize> = (0..k).collect();
        rng.shuffle(&mut perm);
        let mut relabeled = bin.clone();
        for r in &mut relabeled.records {
            r.predicted_label = LabelId(perm[r.predicted_label.0 as usize] as u32);
            r.true_label = r.true_label.map(|t| LabelId(perm[t.0 as usize] as u32));
        }
        let mr = bin_summary(&relabeled, &ls);
        if mr.str != m.str || !close(mr.pcs, m.pcs, 1e-12) || !close(mr.ced, m.ced, 1e-12) {
            violations.push("relabel invariance".into());
        }

        // record order
        let mut shuffled = bin.clone();
        rng.shuffle(&mut shuffled.records);
        let ms = bin_summary(&shuffled, &ls);
        if !(close(ms.pcs, m.pcs, 1e-12)
            && close(ms.csi, m.csi, 1e-12)
            && close(ms.ced, m.ced, 1e-12)
            && close_opt(ms.accuracy, m.accuracy, 1e-12))
        {
            violations.push("order invariance".into());
        }
    }
    violations.dedup();
    check(
        mismatches == 0 && violations.is_empty(),
        format!(
            "1000 bins vs recomputation: {mismatches} mismatches; 10000 bins: {} property violations {violations:?}",
            violations.len()
        ),
    )
}

// ---------------------------------------------------------------- AC5

fn ac5() -> Verdict {
    let mut rng = Rng64::new(99);
    let xs: Vec<f64> = (0..200).map(|_| 0.7 + 0.1 * rng.normal()).collect();
    let p = BootstrapParams::default();
    let a = serde_json::to_string(&bootstrap_ci(&xs, Statistic::Mean, p).unwrap()).unwrap();
    let b = serde_json::to_string(&bootstrap_ci(&xs, Statistic::Mean, p).unwrap()).unwrap();
    let deterministic = a == b && p.seed == 42 && p.iterations == 1000;

    let flat = bootstrap_ci(&[0.625; 40], Statistic::Mean, p).unwrap();
    let collapses = flat.lower == flat.upper && flat.lower == flat.point_estimate;

    let true_mean = 0.7;
    let mut covered = 0;
    for trial in 0..100u64 {
        let mut g = Rng64::derived(5, trial);
        let xs: Vec<f64> = (0..200).map(|_| true_mean + 0.1 * g.normal()).collect();
        let ci = bootstrap_ci(&xs, Statistic::Mean, p).unwrap();
        if ci.lower <= true_mean && true_mean <= ci.upper {
            covered += 1;
        }
    }
    check(
        deterministic && collapses && covered >= 90,
        format!("deterministic={deterministic}, degenerate collapses={collapses}, coverage {covered}/100"),
    )
}

// ---------------------------------------------------------------- AC6

const AC6_RECORDS_PER_DAY: usize = 5000;

fn ac6_config(seed: u64, drift: DriftSpec) -> SynthConfig {
    SynthConfig {
        records_per_day: RecordsPerDay::Fixed(AC6_RECORDS_PER_DAY),
        seed,
        drift,
        ..Default::default()
    }
}

fn window_metrics(cfg: &SynthConfig) -> WindowMetrics {
    let ds = generate_stream(cfg).unwrap();
    let bins = assign_bins(&ds).unwrap();
    let w = window_partition(&bins, &cfg.event_config()).unwrap();
    WindowMetrics::compute(&w, ds.label_set())
}

fn ac6() -> Verdict {
    let det = DetectionConfig::default();
    let profiles = default_profiles();
    let (mut conf_hits, mut acc_hits, mut null_fp) = (0, 0, 0);
    let (mut conf_off, mut acc_off) = (0, 0);
    let (mut conf_range, mut acc_range) = ((f64::MAX, f64::MIN), (f64::MAX, f64::MIN));
    for seed in 0..100u64 {
        let conf = ac6_config(
            seed,
            DriftSpec {
                confidence_delta: -0.13,
                ..Default::default()
            },
        );
        let wm = window_metrics(&conf);
        conf_hits += detect_drift("conf", &wm, &det, &profiles).unwrap().detected as usize;
        let d = max_drop(&wm, Metric::MeanConfidence, det.min_bin_size)
            .unwrap()
            .drop_points;
        conf_range = (conf_range.0.min(d), conf_range.1.max(d));
        conf_off += ((d - 13.0).abs() > 2.0) as usize;

        let acc = ac6_config(
            seed,
            DriftSpec {
                accuracy_delta: -0.234,
                ..Default::default()
            },
        );
        let wm = window_metrics(&acc);
        acc_hits += detect_drift("acc", &wm, &det, &profiles).unwrap().detected as usize;
        let d = max_drop(&wm, Metric::Accuracy, det.min_bin_size).unwrap().drop_points;
        acc_range = (acc_range.0.min(d), acc_range.1.max(d));
        acc_off += ((d - 23.4).abs() > 3.0) as usize;

        let null = ac6_config(seed, DriftSpec::default());
        null_fp += detect_drift("null", &window_metrics(&null), &det, &profiles)
            .unwrap()
            .detected as usize;
    }
    check(
        conf_hits >= 95 && acc_hits >= 95 && conf_off == 0 && acc_off == 0 && null_fp <= 10,
        format!(
            "confidence drop detected {conf_hits}/100, recovered {:.2}..{:.2} pts; accuracy drop detected {acc_hits}/100, recovered {:.2}..{:.2} pts; null false positives {null_fp}/100",
            conf_range.0, conf_range.1, acc_range.0, acc_range.1
        ),
    )
}

// ---------------------------------------------------------------- AC7

fn ac7_suite() -> Vec<(&'static str, SynthConfig)> {
    let base = SynthConfig {
        records_per_day: RecordsPerDay::Fixed(400),
        baseline_label_probs: vec![0.2, 0.2, 0.6],
        emit_text: true,
        embedding_dim: 16,
        seed: 42,
        ..Default::default()
    };
    let with = |seed_offset: u64, drift: DriftSpec| SynthConfig {
        seed: base.seed + seed_offset,
        drift,
        ..base.clone()
    };
    vec![
        (
            "confidence decay",
            with(
                0,
                DriftSpec {
                    confidence_delta: -0.13,
                    ..Default::default()
                },
            ),
        ),
        (
            "label shift",
            with(
                1,
                DriftSpec {
                    label_shift: Some(vec![0.45, 0.2, 0.35]),
                    ..Default::default()
                },
            ),
        ),
        (
            // unseen vocabulary; the model answers it with softer, less stable predictions
            "vocabulary churn",
            with(
                2,
                DriftSpec {
                    vocab_churn: 0.6,
                    confidence_delta: -0.05,
                    transition_boost: 0.2,
                    ..Default::default()
                },
            ),
        ),
        (
            "entropy inflation",
            with(
                3,
                DriftSpec {
                    label_shift: Some(vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]),
                    transition_boost: 0.3,
                    ..Default::default()
                },
            ),
        ),
    ]
}

fn ac7() -> Verdict {
    let det = DetectionConfig::default();
    let thresholds = BaselineThresholds::default();
    let bcfg = BaselineConfig::default();
    let mut zero_training = Vec::new();
    let mut per_method: Vec<(BaselineMethod, Vec<bool>)> =
        BaselineMethod::ALL.iter().map(|&m| (m, Vec::new())).collect();
    let mut misses = Vec::new();
    for (name, cfg) in ac7_suite() {
        let ds = generate_stream(&cfg).unwrap();
        let bins = assign_bins(&ds).unwrap();
        let w = window_partition(&bins, &cfg.event_config()).unwrap();
        let wm = WindowMetrics::compute(&w, ds.label_set());
        let hit = detect_drift(name, &wm, &det, &[]).unwrap().detected;
        if !hit {
            misses.push(name);
        }
        zero_training.push(hit);
        let pre: Vec<&PredictionRecord> = w.pre.iter().flat_map(|b| &b.records).collect();
        let during: Vec<&PredictionRecord> = w.during.iter().flat_map(|b| &b.records).collect();
        for outcome in run_baselines(&pre, &during, &bcfg, 42) {
            let flag = thresholds.detects(&outcome, pre.len(), during.len());
            per_method
                .iter_mut()
                .find(|(m, _)| *m == outcome.method())
                .unwrap()
                .1
                .push(flag);
        }
    }
    let zt = rate(&zero_training).unwrap();
    let rates: Vec<(BaselineMethod, f64)> = per_method.iter().map(|(m, f)| (*m, rate(f).unwrap())).collect();
    let best = rates.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let listing: Vec<String> = rates.iter().map(|(m, r)| format!("{m} {:.0}%", r * 100.0)).collect();
    check(
        zt >= best,
        format!(
            "zero-training {:.0}% (missed {misses:?}); baselines: {}",
            zt * 100.0,
            listing.join(", ")
        ),
    )
}

// ---------------------------------------------------------------- AC8

fn scaling_stream(n: usize) -> String {
    let days = 26;
    let per_day: Vec<usize> = (0..days).map(|d| n / days + usize::from(d < n % days)).collect();
    let cfg = SynthConfig {
        records_per_day: RecordsPerDay::PerDay(per_day),
        drift: DriftSpec {
            confidence_delta: -0.13,
            ..Default::default()
        },
        ..Default::default()
    };
    to_jsonl_string(&generate_stream(&cfg).unwrap())
}

/// Parse, bin, window, metrics, drops and verdict.
fn zero_training_path(jsonl: &str) -> bool {
    let cfg = SynthConfig::default();
    let ds = parse_records(jsonl.as_bytes(), InputFormat::Jsonl, &LabelSet::sentiment3()).unwrap();
    let bins = assign_bins(&ds).unwrap();
    let w = window_partition(&bins, &cfg.event_config()).unwrap();
    let wm = WindowMetrics::compute(&w, ds.label_set());
    for m in [Metric::Accuracy, Metric::MeanConfidence, Metric::Pcs, Metric::Ced] {
        max_drop(&wm, m, 5).unwrap();
    }
    detect_drift("scaling", &wm, &DetectionConfig::default(), &default_profiles())
        .unwrap()
        .detected
}

fn median_time(jsonl: &str, runs: usize) -> f64 {
    let mut t: Vec<f64> = (0..runs)
        .map(|_| {
            let s = Instant::now();
            std::hint::black_box(zero_training_path(jsonl));
            s.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t[runs / 2]
}

fn ac8() -> Verdict {
    let corpus = scaling_stream(12_279);
    let start = Instant::now();
    let detected = zero_training_path(&corpus);
    let corpus_time = start.elapsed();

    let sizes = [10_000usize, 20_000, 40_000];
    let streams: Vec<String> = sizes.iter().map(|&n| scaling_stream(n)).collect();
    let times: Vec<f64> = streams.iter().map(|s| median_time(s, 7)).collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let (mx, my) = (mean(&xs), mean(&times));
    let sxy: f64 = xs.iter().zip(&times).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&times)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = times.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    check(
        corpus_time < Duration::from_secs(10) && r2 >= 0.95 && detected,
        format!(
            "12,279 records in {corpus_time:.2?}; 10k/20k/40k medians {:.1}/{:.1}/{:.1} ms, linear R^2 = {r2:.4}",
            times[0] * 1e3,
            times[1] * 1e3,
            times[2] * 1e3
        ),
    )
}

// ---------------------------------------------------------------- AC9

fn ac9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[input]\npaths = [\"stream.jsonl\"]\n\n[synth]\nrecords_per_day = 150\nemit_text = true\nembedding_dim = 8\n\n[synth.drift]\nconfidence_delta = -0.1\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_tempdrift");
    let run = |args: &[&str]| {
        Command::new(bin)
            .args(args)
            .current_dir(dir.path())
            .output()
            .expect("binary runs")
    };
    let cfg = config.to_str().unwrap();
    let synth = run(&["synth", "--config", cfg, "--out", "stream.jsonl"]);
    if !synth.status.success() {
        return check(
            false,
            format!("synth failed: {}", String::from_utf8_lossy(&synth.stderr)),
        );
    }
    let a = run(&["analyze", "--config", cfg, "--out", "a.json"]);
    let b = run(&["analyze", "--config", cfg, "--out", "b.json"]);
    if !(a.status.success() && b.status.success()) {
        return check(false, format!("analyze failed: {}", String::from_utf8_lossy(&a.stderr)));
    }
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    let jb = std::fs::read(dir.path().join("b.json")).unwrap();
    check(
        ja == jb && !ja.is_empty(),
        format!("two analyze runs, {} bytes each, identical={}", ja.len(), ja == jb),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, &'static str, Duration, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("AC1", "industry breach reproduction", Duration::from_millis(1), ac1),
        ("AC2", "effect-size band boundaries", Duration::from_millis(1), ac2),
        ("AC3", "oracle equivalence", Duration::from_secs(30), ac3),
        ("AC4", "metric correctness and invariants", Duration::from_secs(30), ac4),
        (
            "AC5",
            "bootstrap determinism and coverage",
            Duration::from_secs(60),
            ac5,
        ),
        (
            "AC6",
            "detection on synthetic ground truth",
            Duration::from_secs(120),
            ac6,
        ),
        ("AC7", "detection-rate comparison", Duration::from_secs(120), ac7),
        (
            "AC8",
            "linear scaling of the metric path",
            Duration::from_secs(120),
            ac8,
        ),
        ("AC9", "end-to-end determinism", Duration::from_secs(60), ac9),
    ];
    let mut failed = 0;
    for (id, title, limit, f) in criteria {
        let (v, elapsed) = timed(limit, f);
        if !v.passed {
            failed += 1;
        }
        println!(
            "{id} {} {title} [{:.3} ms] {}",
            if v.passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64() * 1e3,
            v.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
