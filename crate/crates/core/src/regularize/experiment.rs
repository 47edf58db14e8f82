use rayon::prelude::*;

use crate::analysis::{static_ratio, SpacetimeTrack};
use crate::error::{Error, Result};
use crate::flow::{run, AdaptiveSpacing, FlowState, Monitors, RunOptions, StepParams, StopEvent, Trajectory};
use crate::geometry::Point;
use crate::metric::hausdorff;
use crate::network::Network;
use crate::regularize::desingularize::{desingularize_with, DesingularizeOptions, GlueMethod};
use crate::regularize::detect::detect_nonregular;
use crate::scalar::Scalar;

/// Where and when the density ceilings are sampled: centres in `B_r(p)` and in
/// `B_{2r}(p) \ B_r(p)` around the junction `p`, times in `(0, tau)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CeilingParams<T> {
    pub radius: T,
    pub tau: T,
    pub epsilon: T,
    /// Radial and angular sample counts per region.
    pub rings: usize,
    pub spokes: usize,
    pub times: usize,
}

impl<T: Scalar> Default for CeilingParams<T> {
    fn default() -> Self {
        CeilingParams {
            radius: T::lit(0.25),
            tau: T::lit(4e-3),
            epsilon: T::lit(0.1),
            rings: 6,
            spokes: 24,
            times: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams<T> {
    pub t_end: T,
    /// Far-field spacing and time-step controls; the adaptive floor is set per scale.
    pub step: StepParams<T>,
    /// Adaptive spacing floor as a multiple of `s`.
    pub min_h_factor: T,
    pub nodes_per_radius: T,
    pub grading: T,
    pub monitors: Monitors<T>,
    /// Transient window for angle and Hausdorff checks; `None` uses `s_1^2` for the
    /// largest scale `s_1`.
    pub t_w: Option<T>,
    /// Number of geometrically spaced snapshot times in `(0, t_end]`.
    pub snapshots: usize,
    pub ceiling: CeilingParams<T>,
    pub desingularize: DesingularizeOptions<T>,
}

impl<T: Scalar> ExperimentParams<T> {
    pub fn new(t_end: T, target_h: T) -> Self {
        ExperimentParams {
            t_end,
            step: StepParams::new(target_h),
            min_h_factor: T::lit(1.0 / 1024.0),
            nodes_per_radius: T::lit(20.0),
            grading: T::lit(0.25),
            monitors: Monitors::default(),
            t_w: None,
            snapshots: 16,
            ceiling: CeilingParams::default(),
            desingularize: DesingularizeOptions::default(),
        }
    }

    fn step_for(&self, s: T) -> StepParams<T> {
        StepParams {
            adaptive: Some(AdaptiveSpacing {
                min_h: (s * self.min_h_factor).min(self.step.target_h),
                nodes_per_radius: self.nodes_per_radius,
                grading: self.grading,
            }),
            ..self.step.clone()
        }
    }
}

/// Largest initial-slice density `∫_N ρ_{x,t}(·, 0)` over the inner ball and the annulus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ceilings<T> {
    pub inner: T,
    pub annulus: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleRun<T> {
    pub s: T,
    pub methods: Vec<GlueMethod>,
    pub c0_distance: T,
    pub stop: Option<StopEvent<T>>,
    pub steps: usize,
    /// `sup_{0 < t <= T} sup|A| sqrt(t)`.
    pub curvature_constant: T,
    /// Largest junction angle deviation (radians) at `t >= t_w`.
    pub angle_deviation: T,
    pub final_angle_deviation: T,
    pub initial_ceilings: Ceilings<T>,
    /// Largest Gaussian density ratio of the evolving network at sampled centres.
    pub evolved_ceilings: Ceilings<T>,
    pub trajectory: Trajectory<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport<T> {
    pub t_w: T,
    pub epsilon: T,
    /// Ceilings of the undisturbed initial network.
    pub original_ceilings: Ceilings<T>,
    /// Ordered by decreasing scale.
    pub runs: Vec<ScaleRun<T>>,
    /// `(s_a, s_b, max Hausdorff distance at shared snapshot times t >= t_w)` for
    /// consecutive scales.
    pub matched_hausdorff: Vec<(T, T, T)>,
}

impl<T: Scalar> ExperimentReport<T> {
    /// Largest relative spread `(max - min) / max` of the curvature constants.
    pub fn curvature_spread(&self) -> T {
        let (lo, hi) = self
            .runs
            .iter()
            .fold((T::infinity(), T::zero()), |(lo, hi), r| {
                (lo.min(r.curvature_constant), hi.max(r.curvature_constant))
            });
        if hi > T::zero() {
            (hi - lo) / hi
        } else {
            T::zero()
        }
    }

    /// Tab-separated table, one row per scale.
    pub fn table(&self) -> String {
        let mut s = String::from(
            "s\tmethod\tc0_distance\tsup_A_sqrt_t\tstop\tangle_dev_deg\tfinal_angle_dev_deg\tinitial_inner\tinitial_annulus\tevolved_inner\tevolved_annulus\n",
        );
        for r in &self.runs {
            let method = r.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",");
            let stop = r.stop.as_ref().map_or("none", |e| e.kind.name());
            s.push_str(&format!(
                "{}\t{}\t{:.6e}\t{:.6}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                r.s.to_f64_lossy(),
                if method.is_empty() { "none" } else { &method },
                r.c0_distance.to_f64_lossy(),
                r.curvature_constant.to_f64_lossy(),
                stop,
                r.angle_deviation.to_f64_lossy().to_degrees(),
                r.final_angle_deviation.to_f64_lossy().to_degrees(),
                r.initial_ceilings.inner.to_f64_lossy(),
                r.initial_ceilings.annulus.to_f64_lossy(),
                r.evolved_ceilings.inner.to_f64_lossy(),
                r.evolved_ceilings.annulus.to_f64_lossy(),
            ));
        }
        s
    }
}

fn ring_centres<T: Scalar>(p: &Point<T>, r_lo: T, r_hi: T, rings: usize, spokes: usize) -> Vec<Point<T>> {
    let mut out = Vec::new();
    if r_lo == T::zero() {
        out.push(p.clone());
    }
    for i in 0..rings {
        // rings strictly inside the open region
        let rad = r_lo + (r_hi - r_lo) * (T::from_usize_lossy(i) + T::half()) / T::from_usize_lossy(rings);
        for k in 0..spokes {
            let a = T::two() * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(spokes);
            let mut q = p.clone();
            q[0] += rad * a.cos();
            q[1] += rad * a.sin();
            out.push(q);
        }
    }
    out
}

fn sample_times<T: Scalar>(tau: T, count: usize) -> Vec<T> {
    // geometric in (tau 1e-4, tau)
    let lo = T::lit(1e-4);
    (0..count)
        .map(|i| {
            let f = if count > 1 {
                T::from_usize_lossy(i) / T::from_usize_lossy(count - 1)
            } else {
                T::one()
            };
            tau * lo.powf(T::one() - f)
        })
        .collect()
}

/// Initial-slice density ceilings around `p`.
pub fn density_ceilings<T: Scalar>(net: &Network<T>, p: &Point<T>, c: &CeilingParams<T>) -> Ceilings<T> {
    let times = sample_times(c.tau, c.times);
    let eval = |centres: Vec<Point<T>>| -> T {
        centres
            .par_iter()
            .map(|x| {
                times
                    .iter()
                    .map(|&t| static_ratio(net, x, t.sqrt()))
                    .fold(T::zero(), T::max)
            })
            .reduce(T::zero, T::max)
    };
    Ceilings {
        inner: eval(ring_centres(p, T::zero(), c.radius, c.rings, c.spokes)),
        annulus: eval(ring_centres(p, c.radius, T::two() * c.radius, c.rings, c.spokes)),
    }
}

/// Density ratios of the evolving network at centres `(x, t_c)` for snapshot times
/// `t_c`, at every scale whose slice time is itself a snapshot.
fn evolved_ceilings<T: Scalar>(traj: &Trajectory<T>, p: &Point<T>, c: &CeilingParams<T>) -> Ceilings<T> {
    let times: Vec<T> = traj.snapshots.iter().map(|s| s.t).filter(|&t| t <= c.tau).collect();
    let eval = |centres: Vec<Point<T>>| -> T {
        centres
            .par_iter()
            .map(|x| {
                let mut best = T::zero();
                for (i, &tc) in times.iter().enumerate() {
                    for &ts in &times[..i] {
                        if let Ok(v) = traj.density_ratio(x, tc, (tc - ts).sqrt()) {
                            best = best.max(v.value);
                        }
                    }
                }
                best
            })
            .reduce(T::zero, T::max)
    };
    let rings = c.rings.div_ceil(2).max(1);
    let spokes = c.spokes.div_ceil(2).max(4);
    Ceilings {
        inner: eval(ring_centres(p, T::zero(), c.radius, rings, spokes)),
        annulus: eval(ring_centres(p, c.radius, T::two() * c.radius, rings, spokes)),
    }
}

fn snapshot_times<T: Scalar>(t_end: T, t_w: T, count: usize) -> Vec<T> {
    let count = count.max(2);
    let lo = (t_w * T::lit(0.05)).min(t_end * T::lit(1e-3));
    let ratio = t_end / lo;
    let mut out: Vec<T> = (0..count)
        .map(|i| lo * ratio.powf(T::from_usize_lossy(i) / T::from_usize_lossy(count - 1)))
        .collect();
    if t_w < t_end {
        out.push(t_w);
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    out
}

/// Desingularises `net` at each scale, flows each result to `t_end` and compares the runs.
pub fn convergence_experiment<T: Scalar>(
    net: &Network<T>,
    scales: &[T],
    params: &ExperimentParams<T>,
) -> Result<ExperimentReport<T>> {
    if scales.is_empty() {
        return Err(Error::param("scales", "at least one scale is required"));
    }
    if net.dim() != 2 {
        return Err(Error::Dimension { expected: 2, found: net.dim() });
    }
    let mut scales = scales.to_vec();
    scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let t_w = params.t_w.unwrap_or(scales[0] * scales[0]);
    let targets: Vec<_> = detect_nonregular(net, &params.desingularize.tol)
        .into_iter()
        .filter(|j| !j.regular)
        .map(|j| j.vertex)
        .collect();
    let centre = match targets.first() {
        Some(&v) => net.vertex(v).position.clone(),
        None => net
            .junctions()
            .next()
            .map(|v| net.vertex(v).position.clone())
            .unwrap_or_else(|| Point::zeros(2)),
    };
    let original_ceilings = density_ceilings(net, &centre, &params.ceiling);
    let times = snapshot_times(params.t_end, t_w, params.snapshots);

    let runs: Vec<ScaleRun<T>> = scales
        .par_iter()
        .map(|&s| -> Result<ScaleRun<T>> {
            let d = desingularize_with(net, s, &params.desingularize)?;
            let initial_ceilings = density_ceilings(&d.net, &centre, &params.ceiling);
            let step = params.step_for(s);
            let opts = RunOptions {
                snapshot_times: times.clone(),
                diagnostics_every: 1,
                ..RunOptions::new(params.t_end)
            };
            let out = run(FlowState::new(d.net, T::zero())?, &step, &params.monitors, &opts)?;
            let curvature_constant = out
                .diagnostics
                .iter()
                .filter(|r| r.t > T::zero())
                .map(|r| r.max_curvature * r.t.sqrt())
                .fold(T::zero(), T::max);
            let angle_deviation = out
                .diagnostics
                .iter()
                .filter(|r| r.t >= t_w)
                .map(|r| r.angle_deviation)
                .fold(T::zero(), T::max);
            let final_angle_deviation = out.diagnostics.last().map_or(T::zero(), |r| r.angle_deviation);
            let evolved = evolved_ceilings(&out.trajectory, &centre, &params.ceiling);
            Ok(ScaleRun {
                s,
                methods: d.methods.iter().map(|m| m.1).collect(),
                c0_distance: d.c0_distance,
                stop: out.stop,
                steps: out.steps,
                curvature_constant,
                angle_deviation,
                final_angle_deviation,
                initial_ceilings,
                evolved_ceilings: evolved,
                trajectory: out.trajectory,
            })
        })
        .collect::<Result<_>>()?;

    let matched_hausdorff = runs
        .windows(2)
        .map(|w| {
            let mut worst = T::zero();
            for a in w[0].trajectory.snapshots.iter().filter(|s| s.t >= t_w) {
                if let Some(b) = w[1].trajectory.snapshots.iter().find(|b| b.t == a.t) {
                    worst = worst.max(hausdorff(&a.net, &b.net));
                }
            }
            (w[0].s, w[1].s, worst)
        })
        .collect();
    Ok(ExperimentReport {
        t_w,
        epsilon: params.ceiling.epsilon,
        original_ceilings,
        runs,
        matched_hausdorff,
    })
}
