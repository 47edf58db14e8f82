//! Semi-discrete curvature flow of networks with Fermat-projected triple junctions.

pub mod junction;
pub mod run;
pub mod step;

use std::fmt;

use crate::geometry::Point;

pub use junction::{fermat_point, junction_project, FermatPoint};
pub use run::{
    geometric_snapshot_times, run, DensityMonitor, DiagnosticsRow, Monitors, RunOptions, RunOutcome, Snapshot,
    Trajectory,
};
pub use step::{adaptive_dt, curvature_field, remesh, spacing_field, step, AdaptiveSpacing, FlowState, StepParams, StepReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopKind {
    CurvatureBlowup,
    JunctionCollision,
    EmbeddednessLoss,
    EdgeCollapse,
    DensityExceedsZeta,
}

/// The two ways a maximal smooth flow can end: curvature blows up or two triple
/// junctions collide.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Curvature,
    Collision,
}

impl StopKind {
    pub fn branch(self) -> Branch {
        match self {
            StopKind::JunctionCollision => Branch::Collision,
            _ => Branch::Curvature,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StopKind::CurvatureBlowup => "curvature-blowup",
            StopKind::JunctionCollision => "junction-collision",
            StopKind::EmbeddednessLoss => "embeddedness-loss",
            StopKind::EdgeCollapse => "edge-collapse",
            StopKind::DensityExceedsZeta => "density-exceeds-zeta",
        }
    }
}

impl fmt::Display for StopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StopEvent<T> {
    pub kind: StopKind,
    pub time: T,
    pub location: Option<Point<T>>,
    pub detail: String,
}
