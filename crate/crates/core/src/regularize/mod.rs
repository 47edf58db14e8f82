//! Non-regular triple junctions: detection, desingularisation by gluing in a scaled
//! expander, and flows of the desingularised networks as the scale goes to zero.

pub mod desingularize;
pub mod detect;
pub mod experiment;

pub use desingularize::{desingularize, desingularize_with, Desingularisation, DesingularizeOptions, GlueMethod};
pub use detect::{detect_nonregular, JunctionAngles};
pub use experiment::{
    convergence_experiment, density_ceilings, Ceilings, CeilingParams, ExperimentParams, ExperimentReport, ScaleRun,
};
