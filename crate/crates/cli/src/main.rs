//! `trijunction`: runs scenario files through the flow, density analysis,
//! desingularisation, translator regularisation and multiplicity modules.
//!
//! Every numeric parameter comes from the scenario file or a flag; nothing is read from
//! the environment. Outputs go to `--out` (default `.`) as tab-separated tables and
//! scenario-format snapshots, each starting with its format line and parameter echo.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use trijunction::analysis::{density_report, SpacetimeTrack, StaticTrack};
use trijunction::elliptic::{regularized_flow, translator_residual, RegularizedFlowOptions};
use trijunction::flow::{run, FlowState, RunOptions, StepParams, StopKind};
use trijunction::io::{self, EllipticRecord, Scenario};
use trijunction::metric::hausdorff;
use trijunction::multiplicity::{assign_multiplicities, drop_vanishing};
use trijunction::network::resample;
use trijunction::regularize::{convergence_experiment, ExperimentParams};
use trijunction::{Error, Network, Point};

#[derive(Parser, Debug)]
#[command(name = "trijunction", version, about = "Curvature flow of curve networks with triple junctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flow the network; writes snapshots, diagnostics.tsv and summary.tsv.
    /// Exit status 10-14 names the stop event.
    Simulate(Common),
    /// Gaussian density ratios at the `[analysis]` centres and scales (density.tsv).
    Analyze(Common),
    /// Desingularise non-regular junctions at the `[regularize]` scales and compare the flows.
    Regularize(Common),
    /// Minimise the translator energy over the network and slice it (`[elliptic]`).
    Translate(Common),
    /// Planar Z_2 multiplicities and the list of vanishing edges.
    Multiplicity(Common),
    /// Run the flow at spacings h, h/2 and h/4 and report the differences.
    Convergence(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML, format trijunction/scenario-v1).
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Snapshot times (simulate) or slice times (translate), comma separated.
    #[arg(long, value_name = "T1,T2,...", value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Density threshold in (3/2, sqrt(2 pi / e)); default 1.51.
    #[arg(long)]
    zeta: Option<f64>,
    /// Time step factor, dt = cfl h_min^2; default 0.2.
    #[arg(long)]
    cfl: Option<f64>,
    /// Target node spacing of the flow (and of the regularize runs).
    #[arg(long)]
    target_h: Option<f64>,
    /// Translator scale epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Top height of the translator surface; default max(10 eps, t_max / eps + 4 eps).
    #[arg(long)]
    zmax: Option<f64>,
    /// Seed recorded in every output; default 0.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn stop_code(kind: StopKind) -> u8 {
    match kind {
        StopKind::CurvatureBlowup => 10,
        StopKind::JunctionCollision => 11,
        StopKind::EmbeddednessLoss => 12,
        StopKind::EdgeCollapse => 13,
        StopKind::DensityExceedsZeta => 14,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Analyze(c) => ("analyze", c),
        Command::Regularize(c) => ("regularize", c),
        Command::Translate(c) => ("translate", c),
        Command::Multiplicity(c) => ("multiplicity", c),
        Command::Convergence(c) => ("convergence", c),
    };
    let sc = match load(common) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("trijunction {name}: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))
        .and_then(|_| match &cli.command {
            Command::Simulate(_) => simulate(&sc, &common.out),
            Command::Analyze(_) => analyze(&sc, &common.out),
            Command::Regularize(_) => regularize(&sc, &common.out),
            Command::Translate(_) => translate(&sc, &common.out),
            Command::Multiplicity(_) => multiplicity(&sc, &common.out),
            Command::Convergence(_) => convergence(&sc, &common.out),
        });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("trijunction {name}: {e:#}");
            let usage = e.downcast_ref::<Error>().is_some_and(|e| {
                matches!(e, Error::Parse { .. } | Error::InvalidParameter { .. })
            });
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_FAILURE })
        }
    }
}

/// Scenario with the command-line overrides applied and range-checked.
fn load(c: &Common) -> anyhow::Result<Scenario> {
    let mut sc = Scenario::load(&c.scenario).with_context(|| format!("loading {}", c.scenario.display()))?;
    if let Some(z) = c.zeta {
        sc.monitors.zeta = z;
    }
    if c.cfl.is_some() || c.target_h.is_some() {
        let has_flow = sc.flow.is_some();
        if let Some(f) = sc.flow.as_mut() {
            f.cfl = c.cfl.unwrap_or(f.cfl);
            f.target_h = c.target_h.unwrap_or(f.target_h);
        }
        if let Some(r) = sc.regularize.as_mut() {
            r.target_h = c.target_h.unwrap_or(r.target_h);
        }
        if !has_flow && (c.cfl.is_some() || sc.regularize.is_none()) {
            bail!("--cfl and --target-h need a [flow] section in the scenario");
        }
    }
    if c.epsilon.is_some() || c.zmax.is_some() {
        let e = sc.elliptic.get_or_insert(EllipticRecord {
            epsilon: f64::NAN,
            z_max: None,
            rows_per_eps: 4,
            times: Vec::new(),
        });
        e.epsilon = c.epsilon.unwrap_or(e.epsilon);
        if c.zmax.is_some() {
            e.z_max = c.zmax;
        }
        if e.epsilon.is_nan() {
            bail!("--zmax needs --epsilon or an [elliptic] section");
        }
    }
    if let Some(t) = &c.snapshots {
        sc.snapshots = t.clone();
        if let Some(e) = sc.elliptic.as_mut() {
            e.times = t.clone();
        }
    }
    if let Some(s) = c.seed {
        sc.seed = s;
    }
    sc.validate()?;
    Ok(sc)
}

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

fn simulate(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let net = sc.network()?;
    let params = sc.step_params()?;
    let f = sc.flow.as_ref().expect("step_params checked the flow section");
    let opts = RunOptions {
        snapshot_times: sc.snapshots.clone(),
        diagnostics_every: f.diagnostics_every,
        ..RunOptions::new(f.t_end)
    };
    let l0 = net.total_length();
    let outcome = run(FlowState::new(net, 0.0)?, &params, &sc.monitors(), &opts)?;
    let echo = io::parameter_echo(sc);
    write(out, "diagnostics.tsv", &io::diagnostics_table(&outcome.diagnostics, &echo))?;
    for (i, snap) in outcome.trajectory.snapshots.iter().enumerate() {
        write(out, &format!("snapshots/snapshot-{i:04}.toml"), &io::snapshot_file(sc, &snap.net, snap.t))?;
    }
    let fin = &outcome.final_state;
    let (status, kind, time, location, detail) = match &outcome.stop {
        None => ("completed".to_string(), "none".to_string(), fin.t, "-".to_string(), "-".to_string()),
        Some(ev) => (
            "stopped".into(),
            ev.kind.name().into(),
            ev.time,
            ev.location
                .as_ref()
                .map_or("-".into(), |p| p.coords().iter().map(|&x| io::num(x)).collect::<Vec<_>>().join(",")),
            field(&ev.detail),
        ),
    };
    let row = vec![
        status.clone(),
        kind.clone(),
        io::num(time),
        location,
        outcome.steps.to_string(),
        io::num(fin.net.total_length() - l0),
        io::num(outcome.max_relative_length_increase),
        io::num(outcome.max_speed),
        detail,
    ];
    let cols = [
        "status",
        "stop",
        "t",
        "location",
        "steps",
        "length_change",
        "max_relative_length_increase",
        "max_speed",
        "detail",
    ];
    write(out, "summary.tsv", &io::table(io::SUMMARY_FORMAT, &echo, &cols, &[row]))?;
    println!("{status}\t{kind}\tt = {time}\tsteps = {}", outcome.steps);
    Ok(outcome.stop.map_or(0, |ev| stop_code(ev.kind)))
}

fn analyze(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let Some(a) = &sc.analysis else { bail!("analyze needs an [analysis] section") };
    let net = sc.network()?;
    let dim = net.dim();
    let centres: Vec<(Point, f64)> = a
        .centres
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.len() != dim + 1 {
                bail!("analysis.centres[{i}] needs {dim} coordinates and a time");
            }
            Ok((Point::new(&c[..dim]), c[dim]))
        })
        .collect::<anyhow::Result<_>>()?;
    // a scenario without [flow] is a static network
    let trajectory = match &sc.flow {
        Some(f) => {
            let mut times: Vec<f64> = centres
                .iter()
                .flat_map(|(_, t)| a.scales.iter().map(move |r| t - r * r))
                .filter(|&s| s > 0.0 && s < f.t_end)
                .collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let opts = RunOptions {
                snapshot_times: times,
                diagnostics_every: 0,
                ..RunOptions::new(f.t_end)
            };
            Some(run(FlowState::new(net.clone(), 0.0)?, &sc.step_params()?, &sc.monitors(), &opts)?.trajectory)
        }
        None => None,
    };
    let stat = StaticTrack(&net);
    let track: &dyn SpacetimeTrack<f64> = match &trajectory {
        Some(t) => t,
        None => &stat,
    };
    let th = sc.thresholds();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for (i, (x, t)) in centres.iter().enumerate() {
        let xs = x.coords().iter().map(|&c| io::num(c)).collect::<Vec<_>>().join(",");
        match density_report(track, x, *t, &a.scales, &th) {
            Ok(r) => {
                let top = r.ratios.first().copied().unwrap_or(f64::NAN);
                rows.push(vec![
                    i.to_string(),
                    xs,
                    io::num(*t),
                    "ok".into(),
                    r.label.name().into(),
                    io::num(top),
                    io::num(r.max_monotonicity_violation),
                ]);
                println!("centre {i}\t{}\tratio {top}", r.label.name());
                reports.push(r);
            }
            Err(e) => {
                println!("centre {i}\terror: {e}");
                rows.push(vec![i.to_string(), xs, io::num(*t), field(&e.to_string()), "-".into(), "-".into(), "-".into()]);
            }
        }
    }
    let echo = io::parameter_echo(sc);
    write(out, "density.tsv", &io::density_table(&reports, &echo))?;
    let cols = ["centre", "x", "t", "status", "label", "smallest_scale_ratio", "monotonicity_violation"];
    write(out, "density-summary.tsv", &io::table(io::SUMMARY_FORMAT, &echo, &cols, &rows))?;
    Ok(0)
}

fn regularize(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let Some(r) = &sc.regularize else { bail!("regularize needs a [regularize] section") };
    let mut params = ExperimentParams::new(r.t_end, r.target_h);
    if let Some(f) = &sc.flow {
        params.step.cfl = f.cfl;
        params.step.omega = f.omega;
        params.step.remesh_interval = f.remesh_interval;
    }
    params.monitors = sc.monitors();
    let report = convergence_experiment(&sc.network()?, &r.scales, &params)?;
    let mut echo = io::parameter_echo(sc);
    echo.push(("result.t_w".into(), io::num(report.t_w)));
    echo.push(("result.original_inner".into(), io::num(report.original_ceilings.inner)));
    echo.push(("result.original_annulus".into(), io::num(report.original_ceilings.annulus)));
    echo.push(("result.curvature_spread".into(), io::num(report.curvature_spread())));
    for (a, b, d) in &report.matched_hausdorff {
        echo.push((format!("result.hausdorff.{}-{}", io::num(*a), io::num(*b)), io::num(*d)));
    }
    write(out, "regularize.tsv", &io::with_header(io::REGULARIZE_FORMAT, &echo, &report.table()))?;
    print!("{}", report.table());
    Ok(0)
}

fn translate(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let Some(e) = &sc.elliptic else { bail!("translate needs an [elliptic] section") };
    let net = sc.network()?;
    let opts = RegularizedFlowOptions {
        z_max: e.z_max,
        rows_per_eps: e.rows_per_eps,
        ..RegularizedFlowOptions::default()
    };
    let rf = regularized_flow(&net, e.epsilon, &e.times, &opts)?;
    let res = translator_residual(&rf.surface);
    let echo = io::parameter_echo(sc);
    for (i, (t, slice)) in rf.slices.iter().enumerate() {
        write(out, &format!("slices/slice-{i:04}.toml"), &io::snapshot_file(sc, slice, *t))?;
    }
    write(out, "surface.tsv", &io::surface_table(&rf.surface, &echo))?;
    let moved = rf.slices.iter().map(|(_, s)| hausdorff(s, &net)).fold(0.0, f64::max);
    let rep = &rf.report;
    let row = vec![
        io::num(rf.surface.eps),
        io::num(rf.surface.z_max),
        rf.surface.rows().to_string(),
        rep.iterations.to_string(),
        io::num(rep.energy()),
        io::num(rep.gradient_norm),
        format!("{:?}", rep.reason),
        io::num(res.max),
        res.unminimised.to_string(),
        io::num(moved),
    ];
    let cols = [
        "epsilon",
        "z_max",
        "rows",
        "iterations",
        "energy",
        "gradient_norm",
        "stop",
        "residual",
        "unminimised",
        "max_slice_displacement",
    ];
    write(out, "translate.tsv", &io::table(io::SUMMARY_FORMAT, &echo, &cols, &[row]))?;
    println!(
        "{:?} after {} iterations\tresidual {}\tslices moved {}",
        rep.reason, rep.iterations, res.max, moved
    );
    Ok(if rep.converged() { 0 } else { EXIT_FAILURE })
}

fn multiplicity(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let net = sc.network()?;
    let a = assign_multiplicities(&net)?;
    let echo = io::parameter_echo(sc);
    write(out, "multiplicity.tsv", &io::with_header(io::MULTIPLICITY_FORMAT, &echo, &a.report()))?;
    let names: Vec<String> = a.vanishing.iter().map(|e| e.to_string()).collect();
    println!("vanishing: {}", names.join(","));
    if !a.vanishing.is_empty() {
        match drop_vanishing(&net, &a) {
            Ok(reduced) => {
                let mut base = sc.clone();
                base.kind = io::ExperimentKind::Simulate;
                write(out, "reduced.toml", &io::snapshot_file(&base, &reduced, 0.0))?;
            }
            Err(e) => println!("not reduced: {e}"),
        }
    }
    Ok(0)
}

fn convergence(sc: &Scenario, out: &Path) -> anyhow::Result<u8> {
    let net = sc.network()?;
    let base = sc.step_params()?;
    let f = sc.flow.as_ref().expect("step_params checked the flow section");
    let mut finals: Vec<(f64, Network, Option<StopKind>, f64, usize)> = Vec::new();
    for level in 0..3 {
        let h = base.target_h / f64::from(1u32 << level);
        let mut start = net.clone();
        for e in &mut start.edges {
            *e = resample(e, h)?;
        }
        let nodes = start.node_count();
        let params = StepParams { target_h: h, ..base.clone() };
        let o = run(FlowState::new(start, 0.0)?, &params, &sc.monitors(), &RunOptions::new(f.t_end))?;
        finals.push((h, o.final_state.net, o.stop.map(|e| e.kind), o.final_state.t, nodes));
    }
    let mut rows = Vec::new();
    let mut diffs: Vec<f64> = Vec::new();
    for (i, (h, n, stop, t, nodes)) in finals.iter().enumerate() {
        let d = finals.get(i + 1).map(|next| hausdorff(n, &next.1));
        let order = match (diffs.last(), d) {
            (Some(&prev), Some(cur)) if cur > 0.0 => io::num((prev / cur).log2()),
            _ => "-".into(),
        };
        if let Some(d) = d {
            diffs.push(d);
        }
        rows.push(vec![
            i.to_string(),
            io::num(*h),
            nodes.to_string(),
            stop.map_or("none", |k| k.name()).to_string(),
            io::num(*t),
            io::num(n.total_length()),
            d.map_or("-".into(), io::num),
            order,
        ]);
    }
    let cols = ["level", "h", "nodes", "stop", "t", "total_length", "hausdorff_to_next", "order"];
    let echo = io::parameter_echo(sc);
    let text = io::table(io::CONVERGENCE_FORMAT, &echo, &cols, &rows);
    write(out, "convergence.tsv", &text)?;
    print!("{}", text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(0)
}
