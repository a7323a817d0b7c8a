use hhcarbon_core::cla::estimate_footprint;
use hhcarbon_core::intensity::builtin_table;
use hhcarbon_core::panel::{build_design, fit, Estimator, Outcome, RegressionSpec};
use hhcarbon_core::panel_file::{read_panel, write_panel};
use hhcarbon_core::synth::{generate_panel, repeated_households_filter, Allocation, DgpConfig};
use hhcarbon_core::ValidationMode;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = DgpConfig> {
    (
        any::<u64>(),
        1usize..40,
        0.05f64..1.0,
        0.0f64..1.0,
        -0.05f64..0.05,
        prop::bool::ANY,
    )
        .prop_map(|(seed, n, observe, noise, beta, fixed)| DgpConfig {
            seed,
            n_households: n,
            observe_prob: observe,
            noise_sd: noise,
            beta_credit: beta,
            allocation: if fixed {
                Allocation::Fixed(hhcarbon_core::PerSector([
                    3.0, 1.0, 1.0, 0.5, 2.0, 1.0, 1.0, 0.5,
                ]))
            } else {
                Allocation::RandomShares { min_weight: 0.1 }
            },
            ..DgpConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_records_are_valid_and_hit_targets(cfg in config()) {
        let t = builtin_table();
        let panel = generate_panel(&cfg, &t).unwrap();
        prop_assert_eq!(panel.records.len(), panel.target_ln_energy.len());
        let households: std::collections::BTreeSet<_> = panel.records.iter().map(|r| &r.household_id).collect();
        prop_assert_eq!(households.len(), cfg.n_households);
        for (r, target) in panel.records.iter().zip(&panel.target_ln_energy) {
            prop_assert!(r.range_violations().is_empty(), "{:?}", r.range_violations());
            let f = estimate_footprint(&r.bundle(), &t).unwrap();
            prop_assert!((f.energy_use.ln() - target).abs() <= 1e-9);
        }
    }

    #[test]
    fn panel_file_round_trip(cfg in config()) {
        let t = builtin_table();
        let panel = generate_panel(&cfg, &t).unwrap();
        let mut buf = Vec::new();
        write_panel(&panel.records, &mut buf).unwrap();
        let read = read_panel(buf.as_slice(), ValidationMode::Hard).unwrap();
        prop_assert!(read.rejected.is_empty());
        prop_assert_eq!(&read.records, &panel.records);
        let mut again = Vec::new();
        write_panel(&read.records, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}

#[test]
fn seed_changes_panel_and_repeat_is_identical() {
    let t = builtin_table();
    let cfg = DgpConfig {
        n_households: 50,
        ..DgpConfig::default()
    };
    let a = generate_panel(&cfg, &t).unwrap();
    assert_eq!(a, generate_panel(&cfg, &t).unwrap());
    let other = DgpConfig {
        seed: 8,
        ..cfg.clone()
    };
    assert_ne!(a.records, generate_panel(&other, &t).unwrap().records);
}

#[test]
fn households_do_not_depend_on_panel_size() {
    // Per-household streams: the first households are unchanged when more are added.
    let t = builtin_table();
    let small = generate_panel(
        &DgpConfig {
            n_households: 10,
            ..DgpConfig::default()
        },
        &t,
    )
    .unwrap();
    let large = generate_panel(
        &DgpConfig {
            n_households: 80,
            ..DgpConfig::default()
        },
        &t,
    )
    .unwrap();
    assert_eq!(small.records[..], large.records[..small.records.len()]);
}

#[test]
fn within_fe_is_unbiased_where_pooled_is_not() {
    // Credit loads on the household effect, so pooled OLS is biased upward.
    let t = builtin_table();
    let cfg = DgpConfig {
        n_households: 3000,
        seed: 99,
        ..DgpConfig::default()
    };
    let records = repeated_households_filter(&generate_panel(&cfg, &t).unwrap().records);
    let beta = |e| {
        let spec = RegressionSpec::new(Outcome::LnEnergy, e);
        let f = fit(&build_design(&records, &spec, &t).unwrap(), &spec).unwrap();
        f.get("ln_credit").unwrap()
    };
    let fe = beta(Estimator::WithinFe);
    let ols = beta(Estimator::PooledOls);
    assert!((fe.estimate - cfg.beta_credit).abs() < 4.0 * fe.std_error);
    assert!(ols.estimate - cfg.beta_credit > 4.0 * ols.std_error);
}
