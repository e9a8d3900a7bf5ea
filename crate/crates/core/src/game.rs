//! Payment rules, the win model and single-match resolution.
//!
//! A match pairs two players `i` and `j`. With probability `p_i` the first
//! player wins and receives `Δ(a_j)` from the second; otherwise the second
//! player wins and receives `Δ(a_i)`. Every payment rule keeps the loser's
//! assets strictly positive.

use rand::Rng;
use serde::Serialize;

use crate::error::{config_err, Error, Result};

/// The loser's payment function `Δ(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentRule {
    /// The loser pays half of its assets.
    #[default]
    HalfAssets,
    /// The loser pays a fraction of its assets drawn uniformly from
    /// `[min_fraction, max_fraction]` on every match.
    RandomFraction {
        min_fraction: f64,
        max_fraction: f64,
    },
    /// The loser pays `a·m/(a + m)` where `m` is the (conserved) population mean.
    Harmonic { global_mean: f64 },
}


impl PaymentRule {
    /// Default bounds for [`PaymentRule::RandomFraction`].
    pub const DEFAULT_FRACTION_BOUNDS: (f64, f64) = (0.25, 0.75);

    pub fn random_fraction(min_fraction: f64, max_fraction: f64) -> Result<Self> {
        let rule = PaymentRule::RandomFraction {
            min_fraction,
            max_fraction,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn harmonic(global_mean: f64) -> Result<Self> {
        let rule = PaymentRule::Harmonic { global_mean };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PaymentRule::HalfAssets => Ok(()),
            PaymentRule::RandomFraction {
                min_fraction,
                max_fraction,
            } => {
                if !(min_fraction > 0.0 && min_fraction <= max_fraction && max_fraction < 1.0) {
                    return Err(config_err(format!(
                        "random fraction bounds [{min_fraction}, {max_fraction}] violate the \
                         no-bankruptcy condition 0 < min <= max < 1"
                    )));
                }
                Ok(())
            }
            PaymentRule::Harmonic { global_mean } => {
                if !(global_mean > 0.0 && global_mean.is_finite()) {
                    return Err(config_err(format!(
                        "harmonic rule needs a positive finite mean, got {global_mean}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PaymentRule::HalfAssets => "half_assets",
            PaymentRule::RandomFraction { .. } => "random_fraction",
            PaymentRule::Harmonic { .. } => "harmonic",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, PaymentRule::RandomFraction { .. })
    }

    /// Payment for a deterministic rule, `None` for stochastic ones.
    #[inline]
    pub fn deterministic_payment(&self, a: f64) -> Option<f64> {
        match *self {
            PaymentRule::HalfAssets => Some(Settlement::keeping(a, 0.5 * a).payment),
            PaymentRule::Harmonic { global_mean } => {
                Some(Settlement::keeping(a, harmonic_kept(a, global_mean)).payment)
            }
            PaymentRule::RandomFraction { .. } => None,
        }
    }

    /// Payment owed by a loser holding `a`. Assumes a validated rule.
    #[inline]
    pub fn payment<R: Rng + ?Sized>(&self, a: f64, rng: &mut R) -> f64 {
        self.settle(a, rng).payment
    }

    #[inline]
    pub(crate) fn settle<R: Rng + ?Sized>(&self, a: f64, rng: &mut R) -> Settlement {
        match *self {
            PaymentRule::HalfAssets => Settlement::keeping(a, 0.5 * a),
            PaymentRule::RandomFraction {
                min_fraction,
                max_fraction,
            } => {
                let u: f64 = rng.random();
                let fraction = min_fraction + (max_fraction - min_fraction) * u;
                Settlement::keeping(a, a - fraction * a)
            }
            PaymentRule::Harmonic { global_mean } => {
                Settlement::keeping(a, harmonic_kept(a, global_mean))
            }
        }
    }
}

/// Smallest amount a loser keeps: the smallest positive normal double.
///
/// The harmonic rule leaves `≈ a²/m` to a loser with `a ≪ m`, which
/// underflows to zero after a handful of consecutive losses without a floor.
pub const MIN_KEPT: f64 = f64::MIN_POSITIVE;

/// What the loser pays and what it keeps.
///
/// The kernel writes `kept` back directly: for `a ≫ kept` the difference
/// `a - payment` can round to zero even though `kept` is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Settlement {
    pub payment: f64,
    pub kept: f64,
}

impl Settlement {
    #[inline]
    fn keeping(a: f64, kept: f64) -> Self {
        let kept = if kept >= MIN_KEPT {
            kept
        } else {
            MIN_KEPT.min(a)
        };
        Settlement {
            payment: a - kept,
            kept,
        }
    }
}

/// `a - a·m/(a + m) = a·(a/(a + m))`.
#[inline]
fn harmonic_kept(a: f64, m: f64) -> f64 {
    a * (a / (a + m))
}

/// Validated payment for a loser holding `a`.
///
/// Deterministic rules never touch `rng`.
pub fn payment_amount<R: Rng + ?Sized>(rule: &PaymentRule, a: f64, rng: &mut R) -> Result<f64> {
    rule.validate()?;
    check_asset(a)?;
    Ok(rule.payment(a, rng))
}

fn check_asset(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "asset must be positive and finite, got {a}"
        )))
    }
}

/// Constant probability that the first player of a pair wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WinModel {
    p_first: f64,
}

impl WinModel {
    /// `p_first` may be 0 or 1 to force an outcome.
    pub fn new(p_first: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_first) {
            return Err(config_err(format!(
                "win probability must lie in [0, 1], got {p_first}"
            )));
        }
        Ok(Self { p_first })
    }

    pub fn fair() -> Self {
        Self { p_first: 0.5 }
    }

    pub fn p_first(&self) -> f64 {
        self.p_first
    }

    pub fn p_second(&self) -> f64 {
        1.0 - self.p_first
    }
}

impl Default for WinModel {
    fn default() -> Self {
        Self::fair()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub new_a_i: f64,
    pub new_a_j: f64,
    pub winner: Winner,
    pub payment: f64,
}

/// Plays one match between holders of `a_i` and `a_j`.
///
/// Consumes one uniform draw for the coin, then whatever the payment rule
/// needs.
pub fn resolve_match<R: Rng + ?Sized>(
    a_i: f64,
    a_j: f64,
    win: WinModel,
    rule: &PaymentRule,
    rng: &mut R,
) -> Result<MatchOutcome> {
    rule.validate()?;
    check_asset(a_i)?;
    check_asset(a_j)?;
    let outcome = play(a_i, a_j, win, rule, rng);
    if outcome.new_a_i > 0.0 && outcome.new_a_j > 0.0 {
        Ok(outcome)
    } else {
        Err(Error::Bankruptcy {
            a_i: outcome.new_a_i,
            a_j: outcome.new_a_j,
        })
    }
}

/// Unchecked match kernel used by the engine's inner loop.
#[inline]
pub(crate) fn play<R: Rng + ?Sized>(
    a_i: f64,
    a_j: f64,
    win: WinModel,
    rule: &PaymentRule,
    rng: &mut R,
) -> MatchOutcome {
    let coin: f64 = rng.random();
    if coin < win.p_first {
        let s = rule.settle(a_j, rng);
        MatchOutcome {
            new_a_i: a_i + s.payment,
            new_a_j: s.kept,
            winner: Winner::First,
            payment: s.payment,
        }
    } else {
        let s = rule.settle(a_i, rng);
        MatchOutcome {
            new_a_i: s.kept,
            new_a_j: a_j + s.payment,
            winner: Winner::Second,
            payment: s.payment,
        }
    }
}

/// Solves `x - Δ(x) = a` for the assets `x` a loser held before paying.
///
/// `x - Δ(x)` is strictly increasing for both deterministic rules and never
/// exceeds `x`, so the root lies in `[a, ∞)`. The bracket `[a, 2a]` is
/// doubled until it contains the root, then bisected to full precision.
pub fn inverse_pre_asset(rule: &PaymentRule, a: f64) -> Result<f64> {
    rule.validate()?;
    check_asset(a)?;
    if !rule.is_deterministic() {
        return Err(Error::NotInvertible(rule.name()));
    }
    let after_payment = |x: f64| x - rule.deterministic_payment(x).expect("deterministic rule");

    let mut lo = a;
    let mut hi = 2.0 * a;
    while after_payment(hi) < a {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!("no pre-asset found for {a}")));
        }
    }
    for _ in 0..2048 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if after_payment(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let err_lo = (after_payment(lo) - a).abs();
    let err_hi = (after_payment(hi) - a).abs();
    Ok(if err_lo <= err_hi { lo } else { hi })
}
