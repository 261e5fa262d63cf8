//! Shared fixtures for the benchmarks.

use tempdrift_core::synth::{generate_stream, DriftSpec, RecordsPerDay, SynthConfig};
use tempdrift_core::Dataset;

/// A 26-day stream of about `n` records with a confidence drop in days 14 to 18.
pub fn stream(n: usize, emit_text: bool, embedding_dim: usize) -> (SynthConfig, Dataset) {
    let days = 26;
    let per_day = (0..days).map(|d| n / days + usize::from(d < n % days)).collect();
    let cfg = SynthConfig {
        records_per_day: RecordsPerDay::PerDay(per_day),
        emit_text,
        embedding_dim,
        drift: DriftSpec {
            confidence_delta: -0.13,
            ..Default::default()
        },
        ..Default::default()
    };
    let ds = generate_stream(&cfg).expect("valid generator config");
    (cfg, ds)
}
