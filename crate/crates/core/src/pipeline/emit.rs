use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::{DriftReport, EmitFormat};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::stats::EffectMeasure;

/// Rounds to 6 significant digits.
fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_i64() || n.is_u64() {
        out.push_str(&n.to_string());
        return;
    }
    let x = round_sig6(n.as_f64().expect("json number"));
    if x == 0.0 {
        // also folds -0
        out.push('0');
    } else {
        let _ = write!(out, "{x}");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat(' ').take(n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(out, &map[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical JSON: keys sorted, two-space indentation, floats rounded to 6
/// significant digits and printed in shortest form, non-finite floats as
/// `null`, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Config(format!("serialize report: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

pub fn emit_report(report: &DriftReport, format: EmitFormat) -> Result<Vec<u8>> {
    match format {
        EmitFormat::Json => canonical_json(report).map(String::into_bytes),
        EmitFormat::Markdown => Ok(markdown(report).into_bytes()),
        EmitFormat::CsvSeries => csv_series(report),
    }
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

fn measure_row(out: &mut String, metric: Metric, name: &str, m: Option<&EffectMeasure>) {
    let (value, cat) = match m {
        Some(m) => (f4(m.value), m.category.to_string()),
        None => ("n/a".into(), "undefined".into()),
    };
    let _ = writeln!(out, "| {metric} | {name} | {value} | {cat} |");
}

fn markdown(report: &DriftReport) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let _ = writeln!(out, "# Drift report: {}\n", d.name);
    let _ = writeln!(
        out,
        "{} records over {} days ({} to {}), {} {}.\n",
        d.n_records, d.n_days, d.first_day, d.last_day, report.tool, report.version
    );
    for e in &report.events {
        let w = &e.windows;
        let _ = writeln!(out, "## Event: {}\n", e.name);
        let _ = writeln!(
            out,
            "Windows: pre {} days / {} records, during {} days / {} records, post {} days / {} records.\n",
            w.pre_days, w.pre_records, w.during_days, w.during_records, w.post_days, w.post_records
        );
        let v = &e.verdict;
        let triggers: Vec<String> = v
            .trigger_metrics
            .iter()
            .map(|t| match t.z_score {
                Some(z) => format!("{} (z = {z:.2})", t.metric),
                None => format!("{} (zero-variance baseline)", t.metric),
            })
            .collect();
        let _ = writeln!(
            out,
            "**Verdict:** {}{}\n",
            if v.detected { "drift detected" } else { "no drift" },
            if triggers.is_empty() {
                String::new()
            } else {
                format!(" via {}", triggers.join(", "))
            }
        );

        out.push_str("### Degradation\n\n| Metric | Baseline | Worst | Worst day | Drop (pts) | 95% CI |\n|---|---|---|---|---|---|\n");
        for drop in &e.drops {
            let name = format!("{}_drop_points", drop.metric);
            let ci = e
                .bootstrap
                .iter()
                .find(|c| c.statistic_name == name)
                .map(|c| format!("[{:.2}, {:.2}]", c.lower, c.upper))
                .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {:.1} | {} |",
                drop.metric,
                f4(drop.baseline_value),
                f4(drop.worst_window_value),
                drop.worst_day,
                drop.drop_points,
                ci
            );
        }

        out.push_str(
            "\n### Effect sizes (during vs pre)\n\n| Metric | Measure | Value | Magnitude |\n|---|---|---|---|\n",
        );
        for m in &e.effect_sizes {
            let r = &m.effects;
            measure_row(&mut out, m.metric, "Cohen's d", r.cohens_d.as_ref());
            measure_row(&mut out, m.metric, "Glass's delta", r.glass_delta.as_ref());
            measure_row(&mut out, m.metric, "Hedges' g", r.hedges_g.as_ref());
            measure_row(&mut out, m.metric, "Cliff's delta", Some(&r.cliffs_delta));
        }

        out.push_str("\n### Significance\n\n");
        if let Some(a) = &e.anova {
            let _ = writeln!(
                out,
                "- ANOVA on daily {}: F({}, {}) = {:.3}, permutation p = {:.4}",
                a.metric, a.df_between, a.df_within, a.f, a.p_value
            );
        }
        if let Some(c) = &e.correlation {
            let _ = writeln!(
                out,
                "- Correlation of {} with {} over {} days: r = {:.3}, permutation p = {:.4}",
                c.x, c.y, c.n_days, c.r, c.p_value
            );
        }
        out.push_str("\n| Test | p | BH-adjusted p | Rejected |\n|---|---|---|---|\n");
        for t in &e.fdr.tests {
            let _ = writeln!(
                out,
                "| {} | {:.4} | {:.4} | {} |",
                t.name,
                t.p_value,
                t.adjusted_p,
                if t.rejected { "yes" } else { "no" }
            );
        }

        if let Some(drop) = &v.max_drop {
            let _ = writeln!(
                out,
                "\n### Industry impact ({} drop of {:.1} points)\n\n| Profile | Threshold (pts) | Multiplier | Severity |\n|---|---|---|---|",
                drop.metric, drop.drop_points
            );
            for b in &v.breaches {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.1}x | {} |",
                    b.profile, b.threshold_points, b.multiplier, b.severity
                );
            }
        }

        if !e.baselines.is_empty() {
            out.push_str("\n### Baselines\n\n| Method | Score | Drift |\n|---|---|---|\n");
            for b in &e.baselines {
                let score = b
                    .outcome
                    .score()
                    .map(|s| f4(s.score))
                    .unwrap_or_else(|| "skipped".into());
                let _ = writeln!(
                    out,
                    "| {} | {} | {} |",
                    b.outcome.method(),
                    score,
                    if b.detected { "yes" } else { "no" }
                );
            }
        }
        if !e.warnings.is_empty() {
            out.push_str("\nWarnings:\n\n");
            for w in &e.warnings {
                let _ = writeln!(out, "- {w}");
            }
        }
        out.push('\n');
    }
    if let Some(ms) = report.runtime_ms {
        let _ = writeln!(out, "Runtime: {ms:.1} ms");
    }
    out
}

pub(crate) const SERIES_COLUMNS: [&str; 13] = [
    "event",
    "window",
    "day",
    "n",
    "n_labeled",
    "mean_confidence",
    "confidence_std",
    "label_entropy",
    "accuracy",
    "pcs",
    "csi",
    "str",
    "ced",
];

fn csv_series(report: &DriftReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(SERIES_COLUMNS).map_err(io)?;
    let num = |x: f64| format!("{}", round_sig6(x));
    let optn = |x: Option<f64>| x.map(num).unwrap_or_default();
    for e in &report.events {
        for row in e.series.iter().filter(|r| r.qualifying) {
            let m = &row.metrics;
            let window = match row.window {
                super::Window::Pre => "pre",
                super::Window::During => "during",
                super::Window::Post => "post",
            };
            w.write_record([
                e.name.clone(),
                window.to_owned(),
                m.day.to_string(),
                m.n.to_string(),
                m.n_labeled.to_string(),
                num(m.mean_confidence),
                num(m.confidence_std),
                num(m.label_entropy),
                optn(m.accuracy),
                num(m.pcs),
                num(m.csi),
                optn(m.str),
                num(m.ced),
            ])
            .map_err(io)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}
