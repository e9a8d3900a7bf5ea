//! Population state and initial asset distributions.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{config_err, Error, Result};
use crate::sum::compensated_sum;

/// Assets of `N ≥ 2` players, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetVector {
    assets: Vec<f64>,
    initial_total: f64,
}

impl AssetVector {
    pub fn new(assets: Vec<f64>) -> Result<Self> {
        if assets.len() < 2 {
            return Err(config_err(format!(
                "a population needs at least 2 players, got {}",
                assets.len()
            )));
        }
        if let Some((k, &a)) = assets
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && a.is_finite()))
        {
            return Err(Error::Domain(format!(
                "asset {k} is not positive and finite: {a}"
            )));
        }
        let initial_total = compensated_sum(&assets);
        Ok(Self {
            assets,
            initial_total,
        })
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.assets
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.assets
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.assets
    }

    /// Total recorded when the vector was built.
    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    pub fn total(&self) -> f64 {
        total_assets(self)
    }

    pub fn mean(&self) -> f64 {
        mean_assets(self)
    }

    pub fn min(&self) -> f64 {
        self.assets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.assets
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Single-column CSV with header `asset`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"asset\n")?;
        for a in &self.assets {
            writeln!(out, "{a:.16e}")?;
        }
        Ok(())
    }
}

/// Compensated sum of all assets.
pub fn total_assets(v: &AssetVector) -> f64 {
    compensated_sum(&v.assets)
}

pub fn mean_assets(v: &AssetVector) -> f64 {
    total_assets(v) / v.len() as f64
}

/// How the initial assets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDistribution {
    Constant {
        value: f64,
    },
    /// Uniform on `[lo, hi]` (zero draws rejected), rescaled to `target_mean`.
    UniformRescaled {
        lo: f64,
        hi: f64,
        target_mean: f64,
    },
    /// Normal with standard deviation `sigma`, non-positive draws resampled,
    /// rescaled to `target_mean`.
    TruncatedNormalRescaled {
        mu: f64,
        sigma: f64,
        target_mean: f64,
    },
}

impl InitialDistribution {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(config_err(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        match *self {
            InitialDistribution::Constant { value } => positive("constant value", value),
            InitialDistribution::UniformRescaled {
                lo,
                hi,
                target_mean,
            } => {
                if !(lo >= 0.0 && hi.is_finite()) {
                    return Err(config_err(format!("uniform bounds need 0 <= lo, got {lo}")));
                }
                if !(hi > lo) {
                    return Err(config_err(format!(
                        "uniform bounds need hi > lo, got [{lo}, {hi}]"
                    )));
                }
                positive("target_mean", target_mean)
            }
            InitialDistribution::TruncatedNormalRescaled {
                mu,
                sigma,
                target_mean,
            } => {
                if !mu.is_finite() {
                    return Err(config_err(format!("normal mu must be finite, got {mu}")));
                }
                positive("sigma", sigma)?;
                // Resampling needs a non-negligible positive tail.
                if mu / sigma < -8.0 {
                    return Err(config_err(format!(
                        "normal N({mu}, {sigma}) has almost no positive mass"
                    )));
                }
                positive("target_mean", target_mean)
            }
        }
    }

    /// Mean of the population this distribution produces.
    pub fn mean(&self) -> f64 {
        match *self {
            InitialDistribution::Constant { value } => value,
            InitialDistribution::UniformRescaled { target_mean, .. }
            | InitialDistribution::TruncatedNormalRescaled { target_mean, .. } => target_mean,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialDistribution::Constant { .. } => "constant",
            InitialDistribution::UniformRescaled { .. } => "uniform",
            InitialDistribution::TruncatedNormalRescaled { .. } => "normal",
        }
    }
}

/// Draws an initial population of `n` players.
pub fn init_population<R: Rng + ?Sized>(
    dist: &InitialDistribution,
    n: usize,
    rng: &mut R,
) -> Result<AssetVector> {
    if n < 2 {
        return Err(config_err(format!(
            "population size must be at least 2, got {n}"
        )));
    }
    dist.validate()?;
    let assets = match *dist {
        InitialDistribution::Constant { value } => vec![value; n],
        InitialDistribution::UniformRescaled {
            lo,
            hi,
            target_mean,
        } => {
            let draws = (0..n)
                .map(|_| loop {
                    let x = rng.random_range(lo..=hi);
                    if x > 0.0 {
                        break x;
                    }
                })
                .collect();
            rescale_to_mean(draws, target_mean)
        }
        InitialDistribution::TruncatedNormalRescaled {
            mu,
            sigma,
            target_mean,
        } => {
            let normal = Normal::new(mu, sigma).map_err(|e| config_err(e.to_string()))?;
            let draws = (0..n)
                .map(|_| loop {
                    let x = normal.sample(rng);
                    if x > 0.0 {
                        break x;
                    }
                })
                .collect();
            rescale_to_mean(draws, target_mean)
        }
    };
    AssetVector::new(assets)
}

/// Multiplies every entry so the compensated sample mean hits `target`.
///
/// The multiplicative pass lands within a few ulps; whatever rounding is
/// left is folded into the largest entry, which moves it by a relative
/// amount of order `n·ε`.
pub(crate) fn rescale_to_mean(mut values: Vec<f64>, target: f64) -> Vec<f64> {
    let n = values.len() as f64;
    let factor = target / (compensated_sum(&values) / n);
    for v in &mut values {
        *v *= factor;
    }
    let Some(largest) = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])) else {
        return values;
    };
    for _ in 0..4 {
        let mean = compensated_sum(&values) / n;
        if mean == target {
            break;
        }
        values[largest] += (target - mean) * n;
    }
    values
}
