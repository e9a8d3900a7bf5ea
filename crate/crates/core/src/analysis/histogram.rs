use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    #[default]
    Linear,
    /// Geometrically spaced edges; needs a strictly positive lower edge.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistRange {
    /// `[0, max]` for linear bins, `[min, max]` for log bins.
    Auto,
    Fixed {
        lo: f64,
        hi: f64,
    },
}

/// Density-normalized histogram.
///
/// Samples outside the range are not counted; the densities integrate to
/// one over the samples that fall inside.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    densities: Vec<f64>,
    counts: Vec<u64>,
    in_range: u64,
}

impl Histogram {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    /// Number of samples that fell inside the range.
    pub fn in_range(&self) -> u64 {
        self.in_range
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| w[1] - w[0])
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// `Σ density · width`.
    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.widths())
            .map(|(d, w)| d * w)
            .sum()
    }

    /// CSV with columns `bin_left,bin_right,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"bin_left,bin_right,density\n")?;
        for (w, d) in self.edges.windows(2).zip(&self.densities) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", w[0], w[1], d)?;
        }
        Ok(())
    }
}

pub fn make_histogram(
    samples: &[f64],
    bins: usize,
    range: HistRange,
    binning: Binning,
) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "cannot histogram an empty sample".into(),
        ));
    }
    if bins == 0 {
        return Err(config_err("histogram needs at least one bin"));
    }
    let (lo, hi) = match range {
        HistRange::Fixed { lo, hi } => (lo, hi),
        HistRange::Auto => {
            let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = match binning {
                Binning::Linear => 0.0,
                Binning::Log => samples.iter().copied().fold(f64::INFINITY, f64::min),
            };
            (lo, max)
        }
    };
    if !(hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(config_err(format!("histogram range [{lo}, {hi}] is empty")));
    }
    if binning == Binning::Log && !(lo > 0.0) {
        return Err(config_err(format!(
            "log binning needs a positive lower edge, got {lo}"
        )));
    }

    let edges: Vec<f64> = match binning {
        Binning::Linear => {
            let width = (hi - lo) / bins as f64;
            (0..=bins)
                .map(|k| if k == bins { hi } else { lo + k as f64 * width })
                .collect()
        }
        Binning::Log => {
            let ratio = (hi / lo).ln();
            (0..=bins)
                .map(|k| {
                    if k == bins {
                        hi
                    } else {
                        lo * (ratio * k as f64 / bins as f64).exp()
                    }
                })
                .collect()
        }
    };

    let mut counts = vec![0u64; bins];
    let mut in_range = 0u64;
    for &x in samples {
        if !(x >= lo && x <= hi) {
            continue;
        }
        let guess = match binning {
            Binning::Linear => (x - lo) / (hi - lo) * bins as f64,
            Binning::Log => (x / lo).ln() / (hi / lo).ln() * bins as f64,
        };
        let mut idx = (guess as usize).min(bins - 1);
        // Settle rounding at the edges against the stored edge values.
        while idx > 0 && x < edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bins && x >= edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
        in_range += 1;
    }
    if in_range == 0 {
        return Err(Error::InsufficientData(format!(
            "no samples inside the histogram range [{lo}, {hi}]"
        )));
    }
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (in_range as f64 * (w[1] - w[0])))
        .collect();
    Ok(Histogram {
        edges,
        densities,
        counts,
        in_range,
    })
}
