//! Scenario files and the tab-separated tables written by the command line.
//!
//! Every file starts with `# format = <name>-v1` and the parameter echo; floats are
//! printed in shortest round-trip form, so reading them back is exact.

mod report;
mod scenario;

pub use report::{
    density_table, diagnostics_table, num, parameter_echo, snapshot_file, surface_table, table, with_header, Echo,
    CONVERGENCE_FORMAT, DENSITY_FORMAT, DIAGNOSTICS_FORMAT, MULTIPLICITY_FORMAT, REGULARIZE_FORMAT, SUMMARY_FORMAT,
    SURFACE_FORMAT,
};
pub use scenario::{
    AdaptiveRecord, AnalysisRecord, EdgeRecord, EllipticRecord, ExperimentKind, FlowRecord, MonitorRecord,
    NetworkRecord, RegularizeRecord, Scenario, VertexRecord, SCENARIO_FORMAT,
};
