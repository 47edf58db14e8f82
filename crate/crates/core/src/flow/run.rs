//! Time integration with snapshots, diagnostics and stop monitors.

use crate::analysis::density::static_ratio;
use crate::error::{Error, Result};
use crate::flow::step::{adaptive_dt, step, FlowState, StepParams};
use crate::flow::{StopEvent, StopKind};
use crate::geometry::Point;
use crate::network::{close_segment_pairs, max_curvature, max_junction_angle_deviation, EdgeEnds, Network, VertexKind};
use crate::scalar::Scalar;

/// Stops the run when a static-slice density ratio at a junction or at the most curved
/// node exceeds `zeta`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMonitor<T> {
    pub zeta: T,
    pub interval: usize,
    pub scales: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monitors<T> {
    /// sup |A| above which the run stops; infinite disables the check.
    pub curvature_limit: T,
    /// Junction separation below which two junctions have collided; defaults to the
    /// collapse length of the step parameters.
    pub junction_collision_distance: Option<T>,
    /// Steps between embeddedness checks; zero disables them.
    pub embed_check_interval: usize,
    /// Embeddedness tolerance relative to the network diameter.
    pub embed_rel: T,
    pub density: Option<DensityMonitor<T>>,
}

impl<T: Scalar> Default for Monitors<T> {
    fn default() -> Self {
        Monitors {
            curvature_limit: T::infinity(),
            junction_collision_distance: None,
            embed_check_interval: 10,
            embed_rel: T::lit(1e-9),
            density: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions<T> {
    pub t_end: T,
    /// Times at which snapshots are recorded in addition to the initial and final state.
    pub snapshot_times: Vec<T>,
    /// Steps between diagnostics rows; zero records only the first and last rows.
    pub diagnostics_every: usize,
    pub max_steps: usize,
}

impl<T: Scalar> RunOptions<T> {
    pub fn new(t_end: T) -> Self {
        RunOptions {
            t_end,
            snapshot_times: Vec::new(),
            diagnostics_every: 1,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub net: Network<T>,
}

/// Recorded snapshots in increasing time order.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Snapshot<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn push(&mut self, t: T, net: Network<T>) {
        debug_assert!(self.snapshots.last().is_none_or(|s| s.t <= t));
        self.snapshots.push(Snapshot { t, net });
    }

    pub fn time_range(&self) -> Option<(T, T)> {
        Some((self.snapshots.first()?.t, self.snapshots.last()?.t))
    }

    /// Snapshot nearest in time to `t`, with the absolute time mismatch.
    pub fn nearest(&self, t: T) -> Option<(&Snapshot<T>, T)> {
        let idx = self.snapshots.partition_point(|s| s.t < t);
        let mut best: Option<(&Snapshot<T>, T)> = None;
        for i in [idx.wrapping_sub(1), idx] {
            if let Some(s) = self.snapshots.get(i) {
                let gap = (s.t - t).abs();
                if best.is_none_or(|(_, g)| gap < g) {
                    best = Some((s, gap));
                }
            }
        }
        best
    }

    /// Snapshots with `t0 <= t <= t1`.
    pub fn window(&self, t0: T, t1: T) -> impl Iterator<Item = &Snapshot<T>> + '_ {
        self.snapshots.iter().filter(move |s| s.t >= t0 && s.t <= t1)
    }

    pub fn final_snapshot(&self) -> Option<&Snapshot<T>> {
        self.snapshots.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow<T> {
    pub t: T,
    pub total_length: T,
    pub max_curvature: T,
    pub min_junction_distance: T,
    pub min_spacing: T,
    pub angle_deviation: T,
}

impl<T: Scalar> DiagnosticsRow<T> {
    pub fn of(net: &Network<T>, t: T) -> Self {
        DiagnosticsRow {
            t,
            total_length: net.total_length(),
            max_curvature: max_curvature(net),
            min_junction_distance: net.min_junction_distance(),
            min_spacing: net.min_spacing(),
            angle_deviation: max_junction_angle_deviation(net),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    pub trajectory: Trajectory<T>,
    pub diagnostics: Vec<DiagnosticsRow<T>>,
    pub stop: Option<StopEvent<T>>,
    pub final_state: FlowState<T>,
    pub steps: usize,
    /// Largest per-step relative increase of total length (negative when strictly decreasing).
    pub max_relative_length_increase: T,
    /// Largest node speed over all accepted steps.
    pub max_speed: T,
    pub degenerate_junction_steps: usize,
}

impl<T: Scalar> RunOutcome<T> {
    pub fn completed(&self) -> bool {
        self.stop.is_none()
    }
}

fn check_events<T: Scalar>(
    state: &FlowState<T>,
    params: &StepParams<T>,
    monitors: &Monitors<T>,
    embed_due: bool,
    density_due: bool,
) -> Option<StopEvent<T>> {
    let net = &state.net;
    let collapse = params.collapse_length();
    for (ei, e) in net.edges.iter().enumerate() {
        let len = e.length();
        let (limit, junction_pair) = match e.ends {
            EdgeEnds::Closed => (collapse * T::lit(1.5), false),
            EdgeEnds::Open { start, end } => (
                collapse,
                start != end
                    && net.vertex(start).kind() == VertexKind::Junction
                    && net.vertex(end).kind() == VertexKind::Junction,
            ),
        };
        if len < limit {
            let mid = e.nodes[e.nodes.len() / 2].clone();
            return Some(StopEvent {
                kind: if junction_pair {
                    StopKind::JunctionCollision
                } else {
                    StopKind::EdgeCollapse
                },
                time: state.t,
                location: Some(mid),
                detail: format!("edge {ei} length {len} below {limit}"),
            });
        }
    }
    let jd = monitors.junction_collision_distance.unwrap_or(collapse);
    let js: Vec<_> = net.junctions().collect();
    for (i, a) in js.iter().enumerate() {
        for b in &js[i + 1..] {
            let pa = &net.vertex(*a).position;
            let pb = &net.vertex(*b).position;
            if pa.dist(pb) < jd {
                return Some(StopEvent {
                    kind: StopKind::JunctionCollision,
                    time: state.t,
                    location: Some(pa.lerp(pb, T::half())),
                    detail: format!("junctions {a} and {b} at distance {}", pa.dist(pb)),
                });
            }
        }
    }
    if monitors.curvature_limit.is_finite() {
        let mut worst: Option<(T, Point<T>)> = None;
        for (ei, ks) in state.curvature.iter().enumerate() {
            for (i, k) in ks.iter().enumerate() {
                let kn = k.norm();
                if worst.as_ref().is_none_or(|(w, _)| kn > *w) {
                    worst = Some((kn, net.edges[ei].nodes[i].clone()));
                }
            }
        }
        if let Some((kn, at)) = worst {
            if kn > monitors.curvature_limit {
                return Some(StopEvent {
                    kind: StopKind::CurvatureBlowup,
                    time: state.t,
                    location: Some(at),
                    detail: format!("sup|A| = {kn}"),
                });
            }
        }
    }
    if embed_due {
        let tol = monitors.embed_rel * net.diameter();
        if let Some((a, b, d)) = close_segment_pairs(net, tol).into_iter().next() {
            let (p, _) = net.edge(a.edge).segment(a.index);
            return Some(StopEvent {
                kind: StopKind::EmbeddednessLoss,
                time: state.t,
                location: Some(p.clone()),
                detail: format!("segments {a:?} and {b:?} at distance {d}"),
            });
        }
    }
    if let (true, Some(dm)) = (density_due, &monitors.density) {
        let mut centres: Vec<Point<T>> = js.iter().map(|v| net.vertex(*v).position.clone()).collect();
        let mut worst: Option<(T, Point<T>)> = None;
        for (ei, ks) in state.curvature.iter().enumerate() {
            for (i, k) in ks.iter().enumerate() {
                if worst.as_ref().is_none_or(|(w, _)| k.norm() > *w) {
                    worst = Some((k.norm(), net.edges[ei].nodes[i].clone()));
                }
            }
        }
        if let Some((_, p)) = worst {
            centres.push(p);
        }
        for c in &centres {
            for &r in &dm.scales {
                let theta = static_ratio(net, c, r);
                if theta > dm.zeta {
                    return Some(StopEvent {
                        kind: StopKind::DensityExceedsZeta,
                        time: state.t,
                        location: Some(c.clone()),
                        detail: format!("density ratio {theta} at scale {r}"),
                    });
                }
            }
        }
    }
    None
}

/// Integrates until `t_end` or the first stop event.
pub fn run<T: Scalar>(
    mut state: FlowState<T>,
    params: &StepParams<T>,
    monitors: &Monitors<T>,
    opts: &RunOptions<T>,
) -> Result<RunOutcome<T>> {
    params.check()?;
    if !(opts.t_end > state.t) {
        return Err(Error::param("t_end", "must exceed the initial time"));
    }
    let mut targets: Vec<T> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s > state.t && s < opts.t_end)
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();
    targets.push(opts.t_end);

    let mut trajectory = Trajectory::default();
    trajectory.push(state.t, state.net.clone());
    let mut diagnostics = vec![DiagnosticsRow::of(&state.net, state.t)];
    let mut max_inc = T::neg_infinity();
    let mut max_speed = T::zero();
    let mut degenerate_steps = 0;
    let mut stop = check_events(&state, params, monitors, true, monitors.density.is_some());
    let mut next = 0usize;
    let mut length = state.net.total_length();
    let mut steps = 0usize;

    while stop.is_none() && next < targets.len() {
        if steps >= opts.max_steps {
            return Err(Error::NoConvergence(format!(
                "step budget {} exhausted at t = {}",
                opts.max_steps, state.t
            )));
        }
        let target = targets[next];
        let dt = match adaptive_dt(&state, params) {
            Ok(dt) => dt,
            Err(ev) => {
                stop = Some(ev);
                break;
            }
        };
        let remaining = target - state.t;
        let land = dt >= remaining;
        let dt = if land { remaining } else { dt };
        match step(&mut state, params, dt) {
            Ok(rep) => {
                steps += 1;
                if land {
                    state.t = target;
                }
                max_speed = max_speed.max(rep.max_speed);
                if rep.degenerate_junctions > 0 {
                    degenerate_steps += 1;
                }
                let new_len = state.net.total_length();
                max_inc = max_inc.max((new_len - length) / length);
                length = new_len;
                let embed_due = monitors.embed_check_interval > 0 && steps.is_multiple_of(monitors.embed_check_interval);
                let density_due = monitors
                    .density
                    .as_ref()
                    .is_some_and(|d| d.interval > 0 && steps.is_multiple_of(d.interval));
                stop = check_events(&state, params, monitors, embed_due, density_due);
                if opts.diagnostics_every > 0 && steps.is_multiple_of(opts.diagnostics_every) {
                    diagnostics.push(DiagnosticsRow::of(&state.net, state.t));
                }
                if land && stop.is_none() {
                    trajectory.push(state.t, state.net.clone());
                    next += 1;
                }
            }
            Err(ev) => {
                stop = Some(ev);
            }
        }
    }
    if trajectory.final_snapshot().is_none_or(|s| s.t < state.t) {
        trajectory.push(state.t, state.net.clone());
    }
    if diagnostics.last().is_none_or(|d| d.t < state.t) {
        diagnostics.push(DiagnosticsRow::of(&state.net, state.t));
    }
    Ok(RunOutcome {
        trajectory,
        diagnostics,
        stop,
        final_state: state,
        steps,
        max_relative_length_increase: max_inc,
        max_speed,
        degenerate_junction_steps: degenerate_steps,
    })
}

/// Snapshot times `t_c - r^2` for `count` scales geometric between `r_min` and `r_max`,
/// so that density ratios centred at time `t_c` find a slice at every scale.
pub fn geometric_snapshot_times<T: Scalar>(t_c: T, r_min: T, r_max: T, count: usize) -> Vec<T> {
    let mut out: Vec<T> = (0..count)
        .map(|i| {
            let w = if count > 1 {
                T::from_usize_lossy(i) / T::from_usize_lossy(count - 1)
            } else {
                T::zero()
            };
            let r = r_min * (r_max / r_min).powf(w);
            t_c - r * r
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
