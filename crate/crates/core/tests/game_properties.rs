use coinflip::{
    inverse_pre_asset, resolve_match, sample_pair, PaymentRule, WinModel, Winner, MIN_KEPT,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rules(mean: f64) -> Vec<PaymentRule> {
    vec![
        PaymentRule::HalfAssets,
        PaymentRule::random_fraction(0.25, 0.75).unwrap(),
        PaymentRule::harmonic(mean).unwrap(),
    ]
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

proptest! {
    #[test]
    fn half_assets_match_conserves_to_one_ulp(
        a in 1e-12f64..1e12,
        b in 1e-12f64..1e12,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = resolve_match(a, b, WinModel::new(p).unwrap(), &PaymentRule::HalfAssets, &mut rng)
            .unwrap();
        prop_assert!(ulps(o.new_a_i + o.new_a_j, a + b) <= 1);
        prop_assert!(o.new_a_i > 0.0 && o.new_a_j > 0.0);
    }

    #[test]
    fn every_rule_conserves_and_stays_positive(
        ra in -12.0f64..12.0,
        rb in -12.0f64..12.0,
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let m = 1.0;
        let (a, b) = (10f64.powf(ra), 10f64.powf(rb));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for rule in rules(m) {
            let o = resolve_match(a, b, WinModel::new(p).unwrap(), &rule, &mut rng).unwrap();
            let total = a + b;
            prop_assert!(((o.new_a_i + o.new_a_j) - total).abs() <= 1e-15 * total,
                "{rule:?}: {a} + {b} -> {} + {}", o.new_a_i, o.new_a_j);
            prop_assert!(o.new_a_i > 0.0 && o.new_a_j > 0.0, "{rule:?}: {o:?}");
            let loser_before = match o.winner { Winner::First => b, Winner::Second => a };
            prop_assert!(o.payment >= 0.0 && o.payment < loser_before || loser_before <= MIN_KEPT);
        }
    }

    #[test]
    fn inverse_pre_asset_round_trips(a in 1e-9f64..1e9) {
        for rule in [PaymentRule::HalfAssets, PaymentRule::harmonic(1.0).unwrap()] {
            let x = inverse_pre_asset(&rule, a).unwrap();
            let back = x - rule.deterministic_payment(x).unwrap();
            prop_assert!((back - a).abs() <= 1e-12 * a, "{rule:?} {a} -> {x} -> {back}");
        }
    }
}

#[test]
fn no_bankruptcy_over_a_million_random_matches() {
    let m = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for rule in rules(m) {
        for _ in 0..1_000_000 / 3 + 1 {
            let a = m * 10f64.powf(rng.random_range(-12.0..12.0));
            let b = m * 10f64.powf(rng.random_range(-12.0..12.0));
            let o = resolve_match(a, b, WinModel::fair(), &rule, &mut rng).unwrap();
            assert!(o.new_a_i > 0.0 && o.new_a_j > 0.0, "{rule:?} {a} {b} {o:?}");
        }
    }
}

#[test]
fn pairs_are_uniform_over_unordered_pairs() {
    // For n = 3 each unordered pair has probability 1/3.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 1_000_000;
    let mut counts = [0u64; 3];
    for _ in 0..draws {
        let (i, j) = sample_pair(3, &mut rng).unwrap();
        assert_ne!(i, j);
        counts[3 - i - j] += 1;
    }
    let expected = draws as f64 / 3.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 2 degrees of freedom, 99.9th percentile is 13.8.
    assert!(chi2 < 13.8, "{counts:?} chi2 {chi2}");
    for c in counts {
        assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.01);
    }
}

#[test]
fn ordered_pairs_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let draws = 600_000;
    let mut counts = [[0u64; 4]; 4];
    for _ in 0..draws {
        let (i, j) = sample_pair(4, &mut rng).unwrap();
        counts[i][j] += 1;
    }
    let expected = draws as f64 / 12.0;
    let mut chi2 = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if i == j {
                assert_eq!(c, 0);
            } else {
                chi2 += (c as f64 - expected).powi(2) / expected;
            }
        }
    }
    // 11 degrees of freedom, 99.9th percentile is 31.3.
    assert!(chi2 < 31.3, "chi2 {chi2}");
}

#[test]
fn win_frequency_follows_p() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let win = WinModel::new(0.3).unwrap();
    let trials = 200_000;
    let firsts = (0..trials)
        .filter(|_| {
            resolve_match(1.0, 1.0, win, &PaymentRule::HalfAssets, &mut rng)
                .unwrap()
                .winner
                == Winner::First
        })
        .count();
    let freq = firsts as f64 / trials as f64;
    let sd = (0.3f64 * 0.7 / trials as f64).sqrt();
    assert!((freq - 0.3).abs() < 5.0 * sd, "{freq}");
}
