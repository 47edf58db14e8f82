//! Gaussian density ratios, classification, parity and regularity diagnostics.

pub mod classify;
pub mod density;
pub mod parity;
pub mod regularity;

pub use classify::{classify, density_report, DensityReport, Label, Thresholds};
pub use density::{
    entropy_estimate, gaussian_density_ratio, segment_ratio, static_ratio, DensityValue, EntropyOptions,
    EntropyReport, SpacetimeTrack, StaticTrack,
};
pub use parity::{disk_parity, ParityResult};
pub use regularity::{
    curvature_samples_from_diagnostics, curvature_samples_from_trajectory, monitor_curvature_bound,
    regularity_scale, CurvatureBoundReport, RegularityScale,
};
