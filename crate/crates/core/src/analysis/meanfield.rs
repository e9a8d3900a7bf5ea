//! Numerical checks of the stationary pair equation and its small-payment
//! limit `f f'' - (f')² = 0`.

use super::density::DensityFn;
use crate::error::{config_err, Error, Result};
use crate::game::{inverse_pre_asset, PaymentRule};

fn check_probability(p_first: f64) -> Result<()> {
    if p_first > 0.0 && p_first < 1.0 {
        Ok(())
    } else {
        Err(config_err(format!(
            "win probability must lie in (0, 1), got {p_first}"
        )))
    }
}

struct Shifted {
    i_plus: f64,
    j_minus: f64,
    i_minus: f64,
    j_plus: f64,
}

fn shifted_arguments(rule: &PaymentRule, a_i: f64, a_j: f64) -> Result<Shifted> {
    let pay = |a: f64| -> Result<f64> {
        let pre = inverse_pre_asset(rule, a)?;
        Ok(rule
            .deterministic_payment(pre)
            .expect("inverse succeeded, rule is deterministic"))
    };
    let paid_by_i = pay(a_i)?;
    let paid_by_j = pay(a_j)?;
    Ok(Shifted {
        i_plus: a_i + paid_by_i,
        j_minus: a_j - paid_by_i,
        i_minus: a_i - paid_by_j,
        j_plus: a_j + paid_by_j,
    })
}

fn residual_from<D: DensityFn + ?Sized>(
    f: &D,
    p_first: f64,
    a_i: f64,
    a_j: f64,
    s: &Shifted,
) -> f64 {
    f.pdf(a_i) * f.pdf(a_j)
        - (p_first * f.pdf(s.i_plus) * f.pdf(s.j_minus)
            + (1.0 - p_first) * f.pdf(s.i_minus) * f.pdf(s.j_plus))
}

/// Residual of the stationary pair equation at `(a_i, a_j)`:
///
/// `f(a_i)f(a_j) - [p_i f(a_i+Δ'_i) f(a_j-Δ'_i) + (1-p_i) f(a_i-Δ''_j) f(a_j+Δ''_j)]`
///
/// where `Δ'_i = Δ(x)` with `x - Δ(x) = a_i`, and likewise `Δ''_j` for `a_j`.
/// Points where a shifted argument leaves `(0, ∞)` are a domain error.
pub fn fixed_point_residual<D: DensityFn + ?Sized>(
    f: &D,
    p_first: f64,
    rule: &PaymentRule,
    a_i: f64,
    a_j: f64,
) -> Result<f64> {
    check_probability(p_first)?;
    let s = shifted_arguments(rule, a_i, a_j)?;
    if !(s.j_minus > 0.0 && s.i_minus > 0.0) {
        return Err(Error::Domain(format!(
            "shifted assets ({}, {}) leave the positive half-line at ({a_i}, {a_j})",
            s.j_minus, s.i_minus
        )));
    }
    Ok(residual_from(f, p_first, a_i, a_j, &s))
}

/// Same expression as [`fixed_point_residual`] without the domain check.
///
/// Meaningful only for densities whose `pdf` is an analytic formula valid
/// past zero. With `HalfAssets` the checked domain is empty (`Δ'_i = a_i`,
/// `Δ''_j = a_j`), so this is the only way to evaluate that rule.
pub fn fixed_point_residual_formal<D: DensityFn + ?Sized>(
    f: &D,
    p_first: f64,
    rule: &PaymentRule,
    a_i: f64,
    a_j: f64,
) -> Result<f64> {
    check_probability(p_first)?;
    let s = shifted_arguments(rule, a_i, a_j)?;
    Ok(residual_from(f, p_first, a_i, a_j, &s))
}

/// Result of evaluating the residual over a square grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualScan {
    pub max_abs: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Evaluates [`fixed_point_residual`] on a `points × points` grid over
/// `[lo, hi]²`, skipping out-of-domain points.
pub fn scan_fixed_point_residual<D: DensityFn + ?Sized>(
    f: &D,
    p_first: f64,
    rule: &PaymentRule,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<ResidualScan> {
    if points < 2 || !(hi > lo && lo > 0.0) {
        return Err(config_err(
            "residual grid needs >= 2 points on a positive interval",
        ));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut scan = ResidualScan {
        max_abs: 0.0,
        evaluated: 0,
        skipped: 0,
    };
    for i in 0..points {
        for j in 0..points {
            let (a_i, a_j) = (lo + i as f64 * step, lo + j as f64 * step);
            match fixed_point_residual(f, p_first, rule, a_i, a_j) {
                Ok(r) => {
                    scan.max_abs = scan.max_abs.max(r.abs());
                    scan.evaluated += 1;
                }
                Err(Error::Domain(_)) => scan.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(scan)
}

/// `f(a) f''(a) - f'(a)²` from central differences with step `h`:
/// `f' ≈ (f(a+h) - f(a-h)) / 2h`, `f'' ≈ (f(a+h) - 2f(a) + f(a-h)) / h²`.
///
/// Both differences are assembled from [`DensityFn::increment`], so a
/// density with an accurate increment keeps the second difference free of
/// the `ε/h²` rounding floor.
pub fn ode_defect<D: DensityFn + ?Sized>(f: &D, a: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(config_err(format!(
            "difference step must be positive, got {h}"
        )));
    }
    if !(h < a) {
        return Err(Error::Domain(format!(
            "step {h} reaches past zero from a = {a}"
        )));
    }
    let up = f.increment(a, h);
    let down = f.increment(a, -h);
    let first = (up - down) / (2.0 * h);
    let second = (up + down) / (h * h);
    Ok(f.pdf(a) * second - first * first)
}

/// [`ode_defect`] divided by `f(a)²`.
pub fn relative_ode_defect<D: DensityFn + ?Sized>(f: &D, a: f64, h: f64) -> Result<f64> {
    let fa = f.pdf(a);
    Ok(ode_defect(f, a, h)? / (fa * fa))
}
