//! Translating-soliton regularisation: a weighted area functional on surfaces over the
//! network whose minimisers, sliced at height `z = t/ε`, approximate the flow at time `t`.

mod minimize;
mod orientation;
mod regflow;
mod residual;
mod surface;

pub use minimize::{minimize, MinimizeOptions, MinimizeReport, StopReason};
pub use orientation::{assign_orientation, OrientationAssignment, OrientationStatus};
pub use regflow::{regularized_flow, RegularizedFlow, RegularizedFlowOptions};
pub use residual::{translator_residual, ResidualReport, MINIMISED_GRADIENT};
pub use surface::{
    build_initial_surface, exp_divided_difference, Column, ColumnKind, GluedSurface, GridVertex, Sheet,
    TranslatorEnergy, Triangle,
};
