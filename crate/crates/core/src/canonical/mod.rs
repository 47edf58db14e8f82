//! Reference solutions: shrinking circle, self-similar residuals, expander triods and
//! shrinking-ball barriers.

pub mod barrier;
pub mod circle;
pub mod expander;
pub mod shrinker;

pub use barrier::{barrier_check, BarrierBall, BarrierReport, BarrierViolation};
pub use circle::{circle_radius, exact_circle, extinction_time, ExactCircleTrack};
pub use expander::{expander_triod, ExpanderOptions, ExpanderTriod};
pub use shrinker::{expander_residual, shrinker_residual, ResidualField};
