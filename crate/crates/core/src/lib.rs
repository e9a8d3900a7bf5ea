//! Simulation and analysis of a pairwise zero-sum betting game.
//!
//! Players meet in uniformly random pairs and bet on a coin toss; the loser
//! pays the winner according to a [`PaymentRule`] that never bankrupts it.
//! The asset distribution relaxes to the exponential `e^{-a/⟨a⟩}/⟨a⟩`
//! whatever the initial state and payment rule. This crate provides the
//! match kernel ([`game`]), the population state ([`population`]), the Monte
//! Carlo driver ([`engine`]) and the statistics used to check convergence
//! and the mean-field fixed point ([`analysis`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod game;
pub mod population;
pub mod sum;

pub use analysis::{
    decay_fit, fixed_point_residual, fixed_point_residual_formal, is_strictly_decreasing,
    ks_exponential, ks_two_sample, l1_distance, make_histogram, moment_ratio, ode_defect,
    relative_ode_defect, scan_fixed_point_residual, smooth3, Binning, DecayFit, DensityFn,
    Exponential, GofReport, HistRange, Histogram, MomentRatio, ResidualScan,
    TruncatedNormalDensity, UniformDensity,
};
pub use engine::{
    run, run_from, run_perturbation, sample_pair, DecayPoint, DecayProbe, DecayTrace, Perturbation,
    RunResult, SimConfig, Snapshot, SnapshotData, CONSERVATION_LIMIT, GENERATOR,
};
pub use error::{Error, Result};
pub use game::{
    inverse_pre_asset, payment_amount, resolve_match, MatchOutcome, PaymentRule, WinModel, Winner,
    MIN_KEPT,
};
pub use population::{
    init_population, mean_assets, total_assets, AssetVector, InitialDistribution,
};
pub use sum::{compensated_sum, NeumaierSum};
