//! Monte Carlo driver: uniform random pairing, one match per time step,
//! snapshots and conservation monitoring.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal};
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::analysis::{l1_distance, make_histogram, Binning, Exponential, HistRange, Histogram};
use crate::error::{config_err, Error, Result};
use crate::game::{play, PaymentRule, WinModel};
use crate::population::{init_population, rescale_to_mean, AssetVector, InitialDistribution};
use crate::sum::compensated_sum;

/// Name of the pseudo-random generator behind every run.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

/// Relative drift of the total assets that aborts a run.
pub const CONSERVATION_LIMIT: f64 = 1e-8;

/// Full description of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub total_matches: u64,
    pub seed: u64,
    pub rule: PaymentRule,
    pub win: WinModel,
    pub init: InitialDistribution,
    /// Match counts at which to snapshot, strictly ascending; 0 snapshots the
    /// initial state.
    pub snapshot_schedule: Vec<u64>,
    /// Snapshots beyond this many keep only a histogram.
    pub snapshot_asset_cap: usize,
    pub snapshot_bins: usize,
    /// Matches between conservation checks (besides snapshots and the end).
    pub check_interval: u64,
}

impl SimConfig {
    /// Fair coin, half-assets payments, every player starting at `1/n`.
    pub fn new(n: usize, total_matches: u64, seed: u64) -> Self {
        Self {
            n,
            total_matches,
            seed,
            rule: PaymentRule::HalfAssets,
            win: WinModel::fair(),
            init: InitialDistribution::Constant {
                value: 1.0 / n.max(1) as f64,
            },
            snapshot_schedule: Vec::new(),
            snapshot_asset_cap: 64,
            snapshot_bins: 50,
            check_interval: n.max(1) as u64,
        }
    }

    /// Sets the total number of matches from matches per player (`2·M/n`).
    pub fn with_matches_per_player(mut self, per_player: f64) -> Self {
        self.total_matches = (per_player * self.n as f64 / 2.0).round() as u64;
        self
    }

    /// Evenly spaced snapshots at `k·total/count`, `k = 1..=count`.
    pub fn with_even_snapshots(mut self, count: u64) -> Self {
        let total = self.total_matches;
        let mut schedule: Vec<u64> = (1..=count).map(|k| k * total / count.max(1)).collect();
        schedule.dedup();
        self.snapshot_schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(config_err(format!(
                "population size must be at least 2, got {}",
                self.n
            )));
        }
        if self.total_matches < 1 {
            return Err(config_err("total_matches must be at least 1"));
        }
        if self.check_interval < 1 {
            return Err(config_err("check_interval must be at least 1"));
        }
        if self.snapshot_bins < 1 {
            return Err(config_err("snapshot_bins must be at least 1"));
        }
        if self.snapshot_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("snapshot schedule must be strictly ascending"));
        }
        if let Some(&last) = self.snapshot_schedule.last() {
            if last > self.total_matches {
                return Err(config_err(format!(
                    "snapshot at {last} lies beyond total_matches {}",
                    self.total_matches
                )));
            }
        }
        self.rule.validate()?;
        self.init.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotData {
    Assets(AssetVector),
    Histogram(Histogram),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t_matches: u64,
    pub min_asset: f64,
    pub mean: f64,
    pub data: SnapshotData,
}

impl Snapshot {
    pub fn assets(&self) -> Option<&AssetVector> {
        match &self.data {
            SnapshotData::Assets(v) => Some(v),
            SnapshotData::Histogram(_) => None,
        }
    }

    /// Expected matches per player at this snapshot, `2·t/n`.
    pub fn matches_per_player(&self, n: usize) -> f64 {
        2.0 * self.t_matches as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_assets: AssetVector,
    pub snapshots: Vec<Snapshot>,
    /// Largest `|total(t) - total(0)| / total(0)` seen during the run.
    pub conservation_drift: f64,
    pub initial_mean: f64,
}

/// Uniform pair of distinct players: `i` uniform on `[0, n)`, `j` uniform on
/// the remaining `n - 1`.
pub fn sample_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(config_err(format!(
            "cannot pair players in a population of {n}"
        )));
    }
    Ok(pair_unchecked(n, rng))
}

#[inline]
fn pair_unchecked<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Runs `config.total_matches` sequential matches from a freshly drawn
/// population. Bit-identical for identical configs.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let assets = init_population(&config.init, config.n, &mut rng)?;
    evolve(config, assets, &mut rng, |_, _| {})
}

/// Runs from a caller-supplied initial state; `config.init` and `config.n`
/// are ignored in favour of `assets`.
pub fn run_from(config: &SimConfig, assets: AssetVector) -> Result<RunResult> {
    let config = SimConfig {
        n: assets.len(),
        ..config.clone()
    };
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    evolve(&config, assets, &mut rng, |_, _| {})
}

fn drift(v: &[f64], initial_total: f64) -> f64 {
    (compensated_sum(v) - initial_total).abs() / initial_total
}

fn evolve<R, F>(
    config: &SimConfig,
    mut assets: AssetVector,
    rng: &mut R,
    mut on_snapshot: F,
) -> Result<RunResult>
where
    R: Rng + ?Sized,
    F: FnMut(u64, &[f64]),
{
    let n = assets.len();
    let initial_total = assets.initial_total();
    let initial_mean = initial_total / n as f64;
    let rule = config.rule;
    let win = config.win;
    let schedule = &config.snapshot_schedule;

    let mut snapshots = Vec::with_capacity(schedule.len());
    let mut next = 0usize;
    let mut max_drift = 0.0f64;

    let mut take_snapshot = |t: u64, v: &AssetVector, max_drift: &mut f64| -> Result<()> {
        let d = drift(v.as_slice(), initial_total);
        *max_drift = max_drift.max(d);
        if d > CONSERVATION_LIMIT {
            return Err(Error::Integrity {
                drift: d,
                limit: CONSERVATION_LIMIT,
                matches: t,
            });
        }
        on_snapshot(t, v.as_slice());
        let data = if snapshots.len() < config.snapshot_asset_cap {
            SnapshotData::Assets(v.clone())
        } else {
            SnapshotData::Histogram(make_histogram(
                v.as_slice(),
                config.snapshot_bins,
                HistRange::Auto,
                Binning::Linear,
            )?)
        };
        snapshots.push(Snapshot {
            t_matches: t,
            min_asset: v.min(),
            mean: v.mean(),
            data,
        });
        Ok(())
    };

    if schedule.first() == Some(&0) {
        take_snapshot(0, &assets, &mut max_drift)?;
        next = 1;
    }

    for t in 1..=config.total_matches {
        let (i, j) = pair_unchecked(n, rng);
        let slice = assets.as_mut_slice();
        let out = play(slice[i], slice[j], win, &rule, rng);
        if !(out.new_a_i > 0.0 && out.new_a_j > 0.0) {
            return Err(Error::Bankruptcy {
                a_i: out.new_a_i,
                a_j: out.new_a_j,
            });
        }
        slice[i] = out.new_a_i;
        slice[j] = out.new_a_j;

        if next < schedule.len() && schedule[next] == t {
            take_snapshot(t, &assets, &mut max_drift)?;
            next += 1;
        } else if t % config.check_interval == 0 {
            let d = drift(assets.as_slice(), initial_total);
            max_drift = max_drift.max(d);
            if d > CONSERVATION_LIMIT {
                return Err(Error::Integrity {
                    drift: d,
                    limit: CONSERVATION_LIMIT,
                    matches: t,
                });
            }
        }
    }

    let d = drift(assets.as_slice(), initial_total);
    max_drift = max_drift.max(d);
    if d > CONSERVATION_LIMIT {
        return Err(Error::Integrity {
            drift: d,
            limit: CONSERVATION_LIMIT,
            matches: config.total_matches,
        });
    }

    Ok(RunResult {
        final_assets: assets,
        snapshots,
        conservation_drift: max_drift,
        initial_mean,
    })
}

/// Deviation from the exponential imposed on the initial population.
///
/// The initial density is `(1 - w)·Exp(m) + w·q` for a component density `q`
/// whose mean is the population mean `m`, so the perturbation
/// `w·(q - Exp(m))` carries no mass and no mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// Normal bump restricted to positive values.
    GaussianBump {
        weight: f64,
        center: f64,
        width: f64,
    },
    /// Gamma component with the given shape and mean `m`.
    Gamma {
        weight: f64,
        shape: f64,
    },
}

/// Relative tolerance on the mean of a perturbation component.
pub const PERTURBATION_MEAN_TOLERANCE: f64 = 1e-6;

impl Perturbation {
    fn weight(&self) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::GaussianBump { weight, .. } | Perturbation::Gamma { weight, .. } => {
                weight
            }
        }
    }

    pub fn validate(&self, mean: f64) -> Result<()> {
        let w = self.weight();
        if !(0.0..1.0).contains(&w) {
            return Err(config_err(format!(
                "perturbation weight must lie in [0, 1), got {w}"
            )));
        }
        match *self {
            Perturbation::None => Ok(()),
            Perturbation::Gamma { shape, .. } => {
                if shape > 0.0 && shape.is_finite() {
                    Ok(())
                } else {
                    Err(config_err(format!(
                        "gamma shape must be positive, got {shape}"
                    )))
                }
            }
            Perturbation::GaussianBump { center, width, .. } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(config_err(format!("invalid bump N({center}, {width})")));
                }
                let std = StdNormal::standard();
                let alpha = -center / width;
                let tail = std.sf(alpha);
                if !(tail > 1e-12) {
                    return Err(config_err("bump has no positive mass"));
                }
                let bump_mean = center + width * std.pdf(alpha) / tail;
                if (bump_mean - mean).abs() > PERTURBATION_MEAN_TOLERANCE * mean {
                    return Err(config_err(format!(
                        "bump mean {bump_mean} does not preserve the population mean {mean}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Draws `n` initial assets with the perturbed density, rescaled so the
    /// sample mean is exactly `mean`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, mean: f64, rng: &mut R) -> Result<AssetVector> {
        self.validate(mean)?;
        let exp = Exp::new(1.0 / mean).map_err(|e| config_err(e.to_string()))?;
        let w = self.weight();
        let draw_exp = |rng: &mut R| loop {
            let x = exp.sample(rng);
            if x > 0.0 {
                break x;
            }
        };
        let values: Vec<f64> = match *self {
            Perturbation::None => (0..n).map(|_| draw_exp(rng)).collect(),
            Perturbation::GaussianBump { center, width, .. } => {
                let bump = Normal::new(center, width).map_err(|e| config_err(e.to_string()))?;
                (0..n)
                    .map(|_| {
                        if rng.random::<f64>() < w {
                            loop {
                                let x = bump.sample(rng);
                                if x > 0.0 {
                                    break x;
                                }
                            }
                        } else {
                            draw_exp(rng)
                        }
                    })
                    .collect()
            }
            Perturbation::Gamma { shape, .. } => {
                let gamma =
                    Gamma::new(shape, mean / shape).map_err(|e| config_err(e.to_string()))?;
                (0..n)
                    .map(|_| {
                        if rng.random::<f64>() < w {
                            loop {
                                let x = gamma.sample(rng);
                                if x > 0.0 {
                                    break x;
                                }
                            }
                        } else {
                            draw_exp(rng)
                        }
                    })
                    .collect()
            }
        };
        AssetVector::new(rescale_to_mean(values, mean))
    }
}

/// Binning used to measure the distance to the exponential reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayProbe {
    pub bins: usize,
    /// Histogram range is `[0, range_in_means · mean]`.
    pub range_in_means: f64,
    /// Independent exponential samples used to estimate the noise floor.
    pub noise_replicates: usize,
}

impl Default for DecayProbe {
    fn default() -> Self {
        Self {
            bins: 25,
            range_in_means: 8.0,
            noise_replicates: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayPoint {
    /// Expected matches per player, `2·matches/n`.
    pub t_per_player: f64,
    /// L1 distance between the snapshot histogram and the exponential.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTrace {
    pub points: Vec<DecayPoint>,
    /// Largest L1 distance seen among unperturbed exponential samples of the
    /// same size and binning.
    pub noise_floor: f64,
    pub conservation_drift: f64,
}

impl DecayTrace {
    pub fn as_pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.t_per_player, p.distance))
            .collect()
    }
}

/// Starts from a perturbed exponential population and records how the L1
/// distance to the exponential evolves at each scheduled snapshot.
///
/// The population mean is `config.init.mean()`; `config.init` is otherwise
/// unused. A point at `t = 0` is always included.
pub fn run_perturbation(
    config: &SimConfig,
    perturbation: &Perturbation,
    probe: &DecayProbe,
) -> Result<DecayTrace> {
    config.validate()?;
    let mean = config.init.mean();
    perturbation.validate(mean)?;
    if probe.bins < 1 || !(probe.range_in_means > 0.0) {
        return Err(config_err(
            "decay probe needs bins >= 1 and a positive range",
        ));
    }
    let reference = Exponential::new(mean)?;
    let range = HistRange::Fixed {
        lo: 0.0,
        hi: probe.range_in_means * mean,
    };
    let distance = |v: &[f64]| -> Result<f64> {
        let h = make_histogram(v, probe.bins, range, Binning::Linear)?;
        Ok(l1_distance(&h, &reference))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let assets = perturbation.sample(config.n, mean, &mut rng)?;
    let n = assets.len();

    let mut points = vec![DecayPoint {
        t_per_player: 0.0,
        distance: distance(assets.as_slice())?,
    }];
    let mut failure = None;
    let schedule: Vec<u64> = config
        .snapshot_schedule
        .iter()
        .copied()
        .filter(|&t| t > 0)
        .collect();
    let run_config = SimConfig {
        n,
        snapshot_schedule: schedule,
        snapshot_asset_cap: 0,
        ..config.clone()
    };
    let result = evolve(&run_config, assets, &mut rng, |t, v| match distance(v) {
        Ok(d) => points.push(DecayPoint {
            t_per_player: 2.0 * t as f64 / n as f64,
            distance: d,
        }),
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed);
    noise_rng.set_stream(1);
    let mut noise_floor = 0.0f64;
    for _ in 0..probe.noise_replicates {
        let sample = Perturbation::None.sample(n, mean, &mut noise_rng)?;
        noise_floor = noise_floor.max(distance(sample.as_slice())?);
    }

    Ok(DecayTrace {
        points,
        noise_floor,
        conservation_drift: result.conservation_drift,
    })
}
