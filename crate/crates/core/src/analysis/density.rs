use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{config_err, Result};

/// A normalized probability density on the positive half-line.
pub trait DensityFn {
    fn pdf(&self, a: f64) -> f64;

    /// First moment of the density.
    fn mean(&self) -> f64;

    /// `f(a + delta) - f(a)`.
    ///
    /// Finite differences are built from these increments. Densities with a
    /// closed form should override this to avoid the cancellation of the
    /// plain subtraction.
    fn increment(&self, a: f64, delta: f64) -> f64 {
        self.pdf(a + delta) - self.pdf(a)
    }
}

impl<D: DensityFn + ?Sized> DensityFn for &D {
    fn pdf(&self, a: f64) -> f64 {
        (**self).pdf(a)
    }

    fn mean(&self) -> f64 {
        (**self).mean()
    }

    fn increment(&self, a: f64, delta: f64) -> f64 {
        (**self).increment(a, delta)
    }
}

/// `f(a) = e^{-a/A} / A`, the fixed point of the game.
///
/// `pdf` evaluates the closed form for any real argument, which lets the
/// formal fixed-point residual probe shifted arguments below zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    mean: f64,
}

impl Exponential {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(config_err(format!(
                "exponential mean must be positive, got {mean}"
            )));
        }
        Ok(Self { mean })
    }

    pub fn cdf(&self, a: f64) -> f64 {
        if a <= 0.0 {
            0.0
        } else {
            -(-a / self.mean).exp_m1()
        }
    }

    /// `F^{-1}(q)` for `q` in `[0, 1)`.
    pub fn quantile(&self, q: f64) -> f64 {
        -self.mean * (-q).ln_1p()
    }
}

impl DensityFn for Exponential {
    fn pdf(&self, a: f64) -> f64 {
        (-a / self.mean).exp() / self.mean
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn increment(&self, a: f64, delta: f64) -> f64 {
        self.pdf(a) * (-delta / self.mean).exp_m1()
    }
}

/// Uniform density on `[lo, hi]`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformDensity {
    lo: f64,
    hi: f64,
}

impl UniformDensity {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(config_err(format!(
                "uniform density needs 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }
}

impl DensityFn for UniformDensity {
    fn pdf(&self, a: f64) -> f64 {
        if (self.lo..=self.hi).contains(&a) {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn mean(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Normal density `N(mu, sigma²)` restricted to `(0, ∞)` and renormalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormalDensity {
    normal: Normal,
    mu: f64,
    sigma: f64,
    tail_mass: f64,
}

impl TruncatedNormalDensity {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let normal = Normal::new(mu, sigma).map_err(|e| config_err(e.to_string()))?;
        let tail_mass = normal.sf(0.0);
        if !(tail_mass > 0.0) {
            return Err(config_err(format!("N({mu}, {sigma}) has no positive mass")));
        }
        Ok(Self {
            normal,
            mu,
            sigma,
            tail_mass,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl DensityFn for TruncatedNormalDensity {
    fn pdf(&self, a: f64) -> f64 {
        if a < 0.0 {
            0.0
        } else {
            self.normal.pdf(a) / self.tail_mass
        }
    }

    fn mean(&self) -> f64 {
        let std_normal = Normal::standard();
        let alpha = -self.mu / self.sigma;
        self.mu + self.sigma * std_normal.pdf(alpha) / std_normal.sf(alpha)
    }
}
