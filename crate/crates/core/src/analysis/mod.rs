//! Statistics of asset samples and numerical checks of the mean-field
//! fixed point.

pub mod decay;
pub mod density;
pub mod gof;
pub mod histogram;
pub mod meanfield;

pub use decay::{decay_fit, is_strictly_decreasing, smooth3, DecayFit};
pub use density::{DensityFn, Exponential, TruncatedNormalDensity, UniformDensity};
pub use gof::{ks_exponential, ks_two_sample, l1_distance, moment_ratio, GofReport, MomentRatio};
pub use histogram::{make_histogram, Binning, HistRange, Histogram};
pub use meanfield::{
    fixed_point_residual, fixed_point_residual_formal, ode_defect, relative_ode_defect,
    scan_fixed_point_residual, ResidualScan,
};
