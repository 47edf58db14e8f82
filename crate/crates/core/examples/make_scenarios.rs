//! Writes the scenario files shipped in `scenarios/` from the shape builders.
//!
//! Usage: `cargo run --example make_scenarios -- <dir>`

use std::f64::consts::TAU;
use std::path::PathBuf;

use trijunction::geometry::{Point, Rotation};
use trijunction::io::{AnalysisRecord, EllipticRecord, ExperimentKind, FlowRecord, RegularizeRecord, Scenario};
use trijunction::network::make_y;
use trijunction::shapes;

fn flow(t_end: f64, target_h: f64) -> FlowRecord {
    FlowRecord {
        t_end,
        target_h,
        cfl: 0.2,
        omega: 0.5,
        remesh_interval: 10,
        dt_max: None,
        adaptive: None,
        diagnostics_every: 10,
    }
}

fn main() -> trijunction::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scenarios".into()));
    std::fs::create_dir_all(&dir)?;
    let mut out: Vec<(&str, Scenario)> = Vec::new();

    let y = make_y(2, &Rotation::identity(2), 1.0, 21);
    let mut sc = Scenario::for_network(&y);
    sc.flow = Some(flow(1.0, 0.05));
    sc.snapshots = vec![0.5];
    out.push(("y-static", sc));

    let mut sc = Scenario::for_network(&shapes::lens(0.5, 1.0, 1.0 / 64.0));
    sc.flow = Some(flow(0.2, 1.0 / 64.0));
    sc.snapshots = vec![0.025, 0.05, 0.075];
    out.push(("lens", sc));

    let mut sc = Scenario::for_network(&shapes::circle(&Point::xy(0.0, 0.0), 1.0, 128));
    sc.flow = Some(flow(1.0, TAU / 128.0));
    sc.snapshots = vec![0.125, 0.25, 0.375];
    out.push(("circle", sc));

    let mut sc = Scenario::for_network(&y);
    sc.kind = ExperimentKind::Analyze;
    sc.analysis = Some(AnalysisRecord {
        centres: vec![vec![0.0, 0.0, 1.0], vec![0.5, 0.0, 1.0]],
        scales: vec![0.02, 0.04, 0.06],
    });
    out.push(("y-analyze", sc));

    let mut sc = Scenario::for_network(&shapes::circle(&Point::xy(0.0, 0.0), 1.0, 128));
    sc.kind = ExperimentKind::Analyze;
    sc.flow = Some(flow(1.0, TAU / 128.0));
    sc.analysis = Some(AnalysisRecord {
        centres: vec![vec![0.0, 0.0, 0.5]],
        scales: vec![0.1, 0.2, 0.4, 0.6],
    });
    out.push(("circle-analyze", sc));

    let mut sc = Scenario::for_network(&shapes::two_circles_and_segment(0.5, 1.5, 0.1));
    sc.kind = ExperimentKind::Multiplicity;
    out.push(("two-circles", sc));

    let seg = shapes::segment(Point::xy(-1.0, 0.0), Point::xy(1.0, 0.0), 0.1);
    let mut sc = Scenario::for_network(&seg);
    sc.kind = ExperimentKind::Translate;
    sc.elliptic = Some(EllipticRecord {
        epsilon: 0.05,
        z_max: None,
        rows_per_eps: 4,
        times: vec![0.005, 0.01, 0.02],
    });
    out.push(("segment-translate", sc));

    let mut sc = Scenario::for_network(&shapes::curved_triod(0.2, 16));
    sc.kind = ExperimentKind::Translate;
    sc.elliptic = Some(EllipticRecord {
        epsilon: 0.05,
        z_max: None,
        rows_per_eps: 4,
        times: vec![0.005, 0.01],
    });
    out.push(("curved-triod-translate", sc));

    let mut sc = Scenario::for_network(&shapes::triod([0.0, 90.0, 225.0], 1.0, 1.0 / 32.0));
    sc.kind = ExperimentKind::Regularize;
    sc.regularize = Some(RegularizeRecord {
        scales: vec![4e-2, 2e-2, 1e-2],
        t_end: 4e-3,
        target_h: 1.0 / 64.0,
    });
    out.push(("triod-regularize", sc));

    let mut sc = Scenario::for_network(&shapes::curved_triod(0.2, 16));
    sc.kind = ExperimentKind::Convergence;
    sc.flow = Some(flow(0.01, 1.0 / 16.0));
    out.push(("curved-triod-convergence", sc));

    for (name, sc) in out {
        std::fs::write(dir.join(format!("{name}.toml")), sc.to_toml())?;
    }
    Ok(())
}
