//! Goodness of fit against the exponential fixed point.

use serde::Serialize;

use super::density::{DensityFn, Exponential};
use super::histogram::Histogram;
use crate::error::{config_err, Error, Result};
use crate::sum::NeumaierSum;

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov–Smirnov distance between the empirical CDF of
/// `samples` and `F(a) = 1 - e^{-a/mean}`.
///
/// `mean` is a known parameter (the conserved population mean), not an
/// estimate, so no Lilliefors correction applies.
pub fn ks_exponential(samples: &[f64], mean: f64) -> Result<f64> {
    let reference = Exponential::new(mean)?;
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS of an empty sample".into()));
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (k, &x)| {
        let f = reference.cdf(x);
        let above = (k + 1) as f64 / n - f;
        let below = f - k as f64 / n;
        d.max(above).max(below)
    });
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov distance `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "two-sample KS needs two non-empty samples".into(),
        ));
    }
    let xa = sorted(a);
    let xb = sorted(b);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// `Σ_b |density_b - ref(midpoint_b)| · width_b`.
pub fn l1_distance<D: DensityFn + ?Sized>(h: &Histogram, reference: &D) -> f64 {
    h.densities()
        .iter()
        .zip(h.midpoints().zip(h.widths()))
        .map(|(d, (mid, w))| (d - reference.pdf(mid)).abs() * w)
        .sum()
}

/// `⟨a^k⟩ / (k! ⟨a⟩^k)`; equals one for every `k` on an exponential population.
pub fn moment_ratio(samples: &[f64], k: u32) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(config_err(format!("moment order must be 1..=4, got {k}")));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("moments of an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<NeumaierSum>().value() / n;
    let raw = samples
        .iter()
        .map(|a| a.powi(k as i32))
        .sum::<NeumaierSum>()
        .value()
        / n;
    let factorial: f64 = (1..=k).map(f64::from).product();
    Ok(raw / (factorial * mean.powi(k as i32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRatio {
    pub k: u32,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub ks: f64,
    pub l1: f64,
    pub moment_ratios: Vec<MomentRatio>,
}

impl GofReport {
    /// KS and moments from the raw samples, L1 from `hist`, all against
    /// the exponential with the given mean.
    pub fn compute(samples: &[f64], mean: f64, hist: &Histogram, orders: &[u32]) -> Result<Self> {
        let reference = Exponential::new(mean)?;
        let moment_ratios = orders
            .iter()
            .map(|&k| moment_ratio(samples, k).map(|ratio| MomentRatio { k, ratio }))
            .collect::<Result<_>>()?;
        Ok(Self {
            ks: ks_exponential(samples, mean)?,
            l1: l1_distance(hist, &reference),
            moment_ratios,
        })
    }

    pub fn ratio(&self, k: u32) -> Option<f64> {
        self.moment_ratios
            .iter()
            .find(|m| m.k == k)
            .map(|m| m.ratio)
    }
}
