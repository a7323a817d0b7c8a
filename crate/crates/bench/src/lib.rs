//! Shared fixtures for the benchmarks.

use hhcarbon_core::synth::{generate, DgpConfig};
use hhcarbon_core::{builtin_table, ConsumptionBundle, HouseholdRecord, PerSector};

pub fn panel(households: usize, seed: u64) -> Vec<HouseholdRecord> {
    let config = DgpConfig {
        n_households: households,
        seed,
        ..DgpConfig::default()
    };
    generate(&config, &builtin_table()).expect("default config is feasible")
}

pub fn bundles(records: &[HouseholdRecord]) -> Vec<ConsumptionBundle> {
    records.iter().map(HouseholdRecord::bundle).collect()
}

/// Deterministic, skewed positive values for the inequality benchmarks.
pub fn skewed_values(n: usize) -> Vec<f64> {
    let mut x: u64 = 0x2545_F491_4F6C_DD1D;
    (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let u = (x >> 11) as f64 / (1u64 << 53) as f64;
            (-(1.0 - u).ln()).powi(2) * 1000.0
        })
        .collect()
}

pub fn uniform_bundle(year: i32, yuan: f64) -> ConsumptionBundle {
    ConsumptionBundle {
        year,
        spend: PerSector::splat(yuan),
    }
}
