//! Experiment configuration: the strict JSON schema, command-line overrides
//! and resolution into engine configs.

use std::path::PathBuf;

use coinflip::{Binning, InitialDistribution, PaymentRule, SimConfig, WinModel};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_N: usize = 10_000;
pub const DEFAULT_MATCHES_PER_N: u64 = 100;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_SNAPSHOTS: u64 = 10;
pub const DEFAULT_KS_THRESHOLD: f64 = 0.03;
pub const DEFAULT_OUTPUT_DIR: &str = "coinflip-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Half-assets payments from three initial distributions.
    Fig2a,
    /// Constant start under three payment rules.
    Fig2b,
    Custom,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "custom" => Ok(Preset::Custom),
            other => Err(format!(
                "unknown preset `{other}` (expected fig2a, fig2b or custom)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub replicas: Option<u32>,
    pub sim: Option<RawSim>,
    pub analysis: Option<RawAnalysis>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSim {
    pub n: Option<usize>,
    pub matches: Option<u64>,
    pub p_win: Option<f64>,
    pub rule: Option<RawRule>,
    pub init: Option<RawInit>,
    /// Explicit snapshot match counts; overrides `snapshot_count`.
    pub snapshots: Option<Vec<u64>>,
    pub snapshot_count: Option<u64>,
    pub snapshot_asset_cap: Option<usize>,
    pub check_interval: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawRule {
    HalfAssets,
    RandomFraction([f64; 2]),
    /// Mean defaults to the initial population mean.
    Harmonic(Option<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RawInit {
    Constant(Option<f64>),
    Uniform(RawUniform),
    Normal(RawNormal),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawUniform {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub target_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNormal {
    pub mu: Option<f64>,
    /// Standard deviation.
    pub sigma: Option<f64>,
    pub target_mean: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAnalysis {
    pub bins: Option<usize>,
    pub moment_orders: Option<Vec<u32>>,
    pub binning: Option<Binning>,
    pub ks_threshold: Option<f64>,
    pub pairwise_threshold: Option<f64>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub n: Option<usize>,
    pub matches: Option<u64>,
    pub bins: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, raw: &mut RawConfig) {
        if let Some(p) = self.preset {
            raw.preset = Some(p);
        }
        if let Some(s) = self.seed {
            raw.seed = Some(s);
        }
        if let Some(d) = &self.output_dir {
            raw.output_dir = Some(d.clone());
        }
        let sim = raw.sim.get_or_insert_with(RawSim::default);
        if let Some(n) = self.n {
            sim.n = Some(n);
        }
        if let Some(m) = self.matches {
            sim.matches = Some(m);
        }
        if let Some(b) = self.bins {
            raw.analysis.get_or_insert_with(RawAnalysis::default).bins = Some(b);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisSpec {
    pub bins: usize,
    pub moment_orders: Vec<u32>,
    pub binning: Binning,
    pub ks_threshold: f64,
    pub pairwise_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubRun {
    pub name: String,
    pub sim: SimConfig,
}

/// A validated experiment with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub seed: u64,
    /// True when no seed was given and one was drawn from the clock.
    pub seed_generated: bool,
    pub output_dir: PathBuf,
    pub replicas: u32,
    pub runs: Vec<SubRun>,
    pub analysis: AnalysisSpec,
}

/// Parses and validates a JSON config document.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, CliError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<ExperimentSpec, CliError> {
    let mut raw: RawConfig =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    overrides.apply(&mut raw);
    resolve(raw)
}

/// Sub-run seed derived from the experiment seed with a SplitMix64 step, so
/// sub-runs and replicas use unrelated streams.
pub fn derive_seed(master: u64, run: usize, replica: u32) -> u64 {
    let mut z = master
        .wrapping_add((run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((replica as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn clock_seed() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn resolve_init(raw: &RawInit, n: usize) -> InitialDistribution {
    let mean = 1.0 / n as f64;
    match raw {
        RawInit::Constant(v) => InitialDistribution::Constant {
            value: v.unwrap_or(mean),
        },
        RawInit::Uniform(u) => InitialDistribution::UniformRescaled {
            lo: u.lo.unwrap_or(0.0),
            hi: u.hi.unwrap_or(1.0),
            target_mean: u.target_mean.unwrap_or(mean),
        },
        RawInit::Normal(g) => InitialDistribution::TruncatedNormalRescaled {
            mu: g.mu.unwrap_or(mean),
            sigma: g.sigma.unwrap_or(mean / 5.0),
            target_mean: g.target_mean.unwrap_or(mean),
        },
    }
}

fn resolve_rule(raw: &RawRule, init: &InitialDistribution) -> Result<PaymentRule, CliError> {
    let rule = match *raw {
        RawRule::HalfAssets => PaymentRule::HalfAssets,
        RawRule::RandomFraction([lo, hi]) => PaymentRule::random_fraction(lo, hi)?,
        RawRule::Harmonic(mean) => PaymentRule::harmonic(mean.unwrap_or(init.mean()))?,
    };
    Ok(rule)
}

pub fn resolve(raw: RawConfig) -> Result<ExperimentSpec, CliError> {
    let preset = match raw.preset {
        Some(p) => p,
        None => return cfg_err("`preset` is required (fig2a, fig2b or custom)"),
    };
    let (seed, seed_generated) = match raw.seed {
        Some(s) => (s, false),
        None => (clock_seed(), true),
    };
    let sim = raw.sim.unwrap_or_default();
    let n = sim.n.unwrap_or(DEFAULT_N);
    if n < 2 {
        return cfg_err(format!("n must be at least 2, got {n}"));
    }
    let matches = sim.matches.unwrap_or(DEFAULT_MATCHES_PER_N * n as u64);
    if matches < 1 {
        return cfg_err("matches must be at least 1");
    }
    let win = WinModel::new(sim.p_win.unwrap_or(0.5))?;
    let replicas = raw.replicas.unwrap_or(1);
    if replicas < 1 {
        return cfg_err("replicas must be at least 1");
    }

    let default_init = RawInit::Constant(None);
    let variants: Vec<(String, InitialDistribution, PaymentRule)> = match preset {
        Preset::Fig2a => {
            if sim.rule.is_some() || sim.init.is_some() {
                return cfg_err("preset fig2a fixes the rule and the initial distributions");
            }
            [
                RawInit::Constant(None),
                RawInit::Uniform(RawUniform::default()),
                RawInit::Normal(RawNormal::default()),
            ]
            .iter()
            .map(|raw_init| {
                let init = resolve_init(raw_init, n);
                (
                    format!("fig2a_{}", init.name()),
                    init,
                    PaymentRule::HalfAssets,
                )
            })
            .collect()
        }
        Preset::Fig2b => {
            if sim.rule.is_some() || sim.init.is_some() {
                return cfg_err("preset fig2b fixes the initial distribution and the rules");
            }
            let init = resolve_init(&default_init, n);
            let (lo, hi) = PaymentRule::DEFAULT_FRACTION_BOUNDS;
            [
                RawRule::HalfAssets,
                RawRule::RandomFraction([lo, hi]),
                RawRule::Harmonic(None),
            ]
            .iter()
            .map(|raw_rule| {
                let rule = resolve_rule(raw_rule, &init)?;
                Ok((format!("fig2b_{}", rule.name()), init, rule))
            })
            .collect::<Result<_, CliError>>()?
        }
        Preset::Custom => {
            let init = resolve_init(sim.init.as_ref().unwrap_or(&default_init), n);
            let rule = resolve_rule(sim.rule.as_ref().unwrap_or(&RawRule::HalfAssets), &init)?;
            vec![("custom".to_string(), init, rule)]
        }
    };

    let runs = variants
        .into_iter()
        .enumerate()
        .map(|(k, (name, init, rule))| {
            let mut cfg = SimConfig::new(n, matches, derive_seed(seed, k, 0));
            cfg.rule = rule;
            cfg.win = win;
            cfg.init = init;
            cfg = match &sim.snapshots {
                Some(list) => SimConfig {
                    snapshot_schedule: list.clone(),
                    ..cfg
                },
                None => cfg.with_even_snapshots(sim.snapshot_count.unwrap_or(DEFAULT_SNAPSHOTS)),
            };
            if let Some(cap) = sim.snapshot_asset_cap {
                cfg.snapshot_asset_cap = cap;
            }
            if let Some(every) = sim.check_interval {
                cfg.check_interval = every;
            }
            cfg.validate()?;
            Ok(SubRun { name, sim: cfg })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let a = raw.analysis.unwrap_or_default();
    let analysis = AnalysisSpec {
        bins: a.bins.unwrap_or(DEFAULT_BINS),
        moment_orders: a.moment_orders.unwrap_or_else(|| vec![2, 3, 4]),
        binning: a.binning.unwrap_or_default(),
        ks_threshold: a.ks_threshold.unwrap_or(DEFAULT_KS_THRESHOLD),
        pairwise_threshold: a.pairwise_threshold.unwrap_or(DEFAULT_KS_THRESHOLD),
    };
    if analysis.bins < 1 {
        return cfg_err("bins must be at least 1");
    }
    if let Some(k) = analysis
        .moment_orders
        .iter()
        .find(|k| !(1..=4).contains(*k))
    {
        return cfg_err(format!("moment orders must be in 1..=4, got {k}"));
    }
    for (name, t) in [
        ("ks_threshold", analysis.ks_threshold),
        ("pairwise_threshold", analysis.pairwise_threshold),
    ] {
        if !(t > 0.0 && t <= 1.0) {
            return cfg_err(format!("{name} must lie in (0, 1], got {t}"));
        }
    }

    Ok(ExperimentSpec {
        preset,
        seed,
        seed_generated,
        output_dir: raw
            .output_dir
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        replicas,
        runs,
        analysis,
    })
}
