//! Shared fixtures for the benchmarks.

use kappa_core::{sample_family, FamilySpec, PairedSample, SeedSpec};

/// `count` independent standard-normal samples of size `n`, drawn from
/// fixed substreams so every run times the same data.
pub fn normal_samples(n: usize, count: usize) -> Vec<PairedSample> {
    let spec = FamilySpec::normal(0.0, 1.0, 1.0).expect("valid family");
    (0..count as u64)
        .map(|r| sample_family(&spec, n, SeedSpec::new(0xBE7C, r)).expect("n >= 2"))
        .collect()
}
