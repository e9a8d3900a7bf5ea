use coinflip::{
    decay_fit, ks_exponential, run, run_perturbation, smooth3, DecayProbe, InitialDistribution,
    PaymentRule, Perturbation, SimConfig, CONSERVATION_LIMIT,
};
use proptest::prelude::*;

fn rule_strategy() -> impl Strategy<Value = PaymentRule> {
    prop_oneof![
        Just(PaymentRule::HalfAssets),
        Just(PaymentRule::random_fraction(0.25, 0.75).unwrap()),
        (0.1f64..10.0).prop_map(|m| PaymentRule::harmonic(m).unwrap()),
    ]
}

fn init_strategy() -> impl Strategy<Value = InitialDistribution> {
    prop_oneof![
        (1e-6f64..1e3).prop_map(|value| InitialDistribution::Constant { value }),
        (1e-6f64..1e3).prop_map(|m| InitialDistribution::UniformRescaled {
            lo: 0.0,
            hi: 1.0,
            target_mean: m
        }),
        (1e-6f64..1e3).prop_map(|m| InitialDistribution::TruncatedNormalRescaled {
            mu: m,
            sigma: m / 5.0,
            target_mean: m
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_conserve_and_stay_positive(
        n in 2usize..300,
        per_player in 1u64..40,
        seed in any::<u64>(),
        rule in rule_strategy(),
        init in init_strategy(),
        p in 0.05f64..0.95,
    ) {
        let mut cfg = SimConfig::new(n, per_player * n as u64 / 2 + 1, seed).with_even_snapshots(5);
        cfg.rule = rule;
        cfg.init = init;
        cfg.win = coinflip::WinModel::new(p).unwrap();
        let r = run(&cfg).unwrap();
        prop_assert!(r.conservation_drift < CONSERVATION_LIMIT);
        prop_assert!(r.final_assets.min() > 0.0);
        let m0 = r.initial_mean;
        for s in &r.snapshots {
            prop_assert!(s.min_asset > 0.0);
            prop_assert!((s.mean - m0).abs() <= 1e-12 * m0, "{} vs {m0}", s.mean);
        }
        prop_assert!((r.final_assets.mean() - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), rule in rule_strategy()) {
        let mut cfg = SimConfig::new(64, 2000, seed).with_even_snapshots(3);
        cfg.rule = rule;
        prop_assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }
}

#[test]
fn different_seeds_differ() {
    let a = run(&SimConfig::new(64, 2000, 1)).unwrap();
    let b = run(&SimConfig::new(64, 2000, 2)).unwrap();
    assert_ne!(a.final_assets, b.final_assets);
}

#[test]
fn half_assets_relaxes_to_exponential() {
    let n = 10_000;
    let cfg = SimConfig::new(n, 50 * n as u64, 42);
    let r = run(&cfg).unwrap();
    let ks = ks_exponential(r.final_assets.as_slice(), r.initial_mean).unwrap();
    assert!(ks < 0.03, "{ks}");
}

fn perturbation_config(seed: u64) -> SimConfig {
    let mut cfg = SimConfig::new(10_000, 0, seed).with_matches_per_player(4.0);
    cfg.init = InitialDistribution::Constant { value: 1.0 };
    cfg.with_even_snapshots(16)
}

#[test]
fn bump_decays_below_noise() {
    let bump = Perturbation::GaussianBump {
        weight: 0.5,
        center: 1.0,
        width: 0.2,
    };
    let trace = run_perturbation(&perturbation_config(7), &bump, &DecayProbe::default()).unwrap();
    assert!(trace.conservation_drift < CONSERVATION_LIMIT);
    let d: Vec<f64> = trace.points.iter().map(|p| p.distance).collect();
    assert!(d[0] > 10.0 * trace.noise_floor, "{d:?}");
    assert!(*d.last().unwrap() < 0.2 * d[0], "{d:?}");
    let fit = decay_fit(&trace.as_pairs(), trace.noise_floor).unwrap();
    assert!(fit.rate > 0.0, "{fit:?}");
    let smooth = smooth3(&d);
    assert!(smooth.first() > smooth.last());
}

#[test]
fn unperturbed_start_stays_near_noise_floor() {
    let trace = run_perturbation(
        &perturbation_config(8),
        &Perturbation::None,
        &DecayProbe::default(),
    )
    .unwrap();
    for p in &trace.points {
        assert!(
            p.distance < 2.0 * trace.noise_floor,
            "{p:?} floor {}",
            trace.noise_floor
        );
    }
}

#[test]
fn perturbation_mean_is_checked() {
    let off_center = Perturbation::GaussianBump {
        weight: 0.5,
        center: 2.0,
        width: 0.2,
    };
    assert!(
        run_perturbation(&perturbation_config(9), &off_center, &DecayProbe::default()).is_err()
    );
}
