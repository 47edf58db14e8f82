//! Mean curvature flow of curve networks with triple junctions.
//!
//! Networks are polylines in `R^d` joined at fixed endpoints (valence one) and triple
//! junctions (valence three). The crate evolves them by curvature, measures Gaussian
//! density ratios, builds reference solutions, desingularises non-regular junctions,
//! assigns planar `Z_2` multiplicities and minimises a translator functional whose
//! minimisers slice into the flow.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`, which is what file IO and the command line use.

// `!(x > 0)` is the NaN-rejecting form; `Scalar` carries no assign-op bounds.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::assign_op_pattern)]
#![allow(clippy::type_complexity, clippy::needless_range_loop)]

pub mod analysis;
pub mod canonical;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod multiplicity;
pub mod network;
pub mod regularize;
pub mod scalar;
pub mod shapes;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type SpacetimePoint = geometry::SpacetimePoint<f64>;
pub type Rotation = geometry::Rotation<f64>;
pub type Network = network::Network<f64>;
pub type Edge = network::Edge<f64>;
pub type Vertex = network::Vertex<f64>;
pub type FlowState = flow::FlowState<f64>;
pub type StepParams = flow::StepParams<f64>;
pub type Trajectory = flow::Trajectory<f64>;
pub type StopEvent = flow::StopEvent<f64>;
