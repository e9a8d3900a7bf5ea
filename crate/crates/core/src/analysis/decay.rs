use serde::Serialize;

use crate::error::{Error, Result};

/// Exponential decay `d(t) ≈ e^{intercept - rate·t}` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    /// Points above the noise floor that entered the fit.
    pub used: usize,
}

/// Least-squares line through `(t, ln d)` over the points with
/// `d > noise_floor`; the rate is minus the slope.
pub fn decay_fit(points: &[(f64, f64)], noise_floor: f64) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(t, d)| t.is_finite() && d > noise_floor && d > 0.0)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs 3 points above the noise floor {noise_floor:e}, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let t_mean = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = usable.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, y)| {
        (
            sxy + (t - t_mean) * (y - y_mean),
            sxx + (t - t_mean) * (t - t_mean),
        )
    });
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData(
            "decay fit needs distinct times".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(DecayFit {
        rate: -slope,
        intercept: y_mean - slope * t_mean,
        used: usable.len(),
    })
}

/// Centered 3-point moving average; drops the two endpoints.
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| (w[0] + w[1] + w[2]) / 3.0)
        .collect()
}

pub fn is_strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
