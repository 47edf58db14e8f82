//! Curvature-based regularity scale and the `sup|A| √t` monitor.

use crate::error::{Error, Result};
use crate::flow::{DiagnosticsRow, Snapshot, Trajectory};
use crate::geometry::SpacetimePoint;
use crate::network::{discrete_curvature, max_curvature, VertexKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityScale<T> {
    /// Zero when no dyadic scale qualifies.
    pub r: T,
    /// Larger scales were not examined because `r^2` exceeded the recorded history.
    pub capped_by_history: bool,
}

/// Whether the backwards cylinder `B_r(x) x [t - r^2, t]` holds at most one junction and
/// curvature at most `1/r`, judged on the given snapshots.
fn cylinder_ok<T: Scalar>(snaps: &[&Snapshot<T>], x: &SpacetimePoint<T>, r: T) -> bool {
    let mut seen: Option<usize> = None;
    let bound = T::one() / r;
    for s in snaps {
        for (vi, v) in s.net.vertices.iter().enumerate() {
            if v.kind() == VertexKind::Junction && v.position.dist(&x.x) < r {
                match seen {
                    None => seen = Some(vi),
                    Some(w) if w != vi => return false,
                    _ => {}
                }
            }
        }
        for e in &s.net.edges {
            for i in e.interior_range() {
                if e.nodes[i].dist(&x.x) < r {
                    if let Ok(k) = discrete_curvature(e, i) {
                        if k.norm() > bound {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Largest dyadic `r = 4 diam / 2^j` passing the cylinder test at `x`.
pub fn regularity_scale<T: Scalar>(traj: &Trajectory<T>, x: &SpacetimePoint<T>) -> Result<RegularityScale<T>> {
    let (t0, t1) = traj
        .time_range()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let slack = T::lit(1e-12) * (T::one() + t1.abs());
    if x.t < t0 - slack || x.t > t1 + slack {
        return Err(Error::InsufficientHistory {
            requested: x.t.to_f64_lossy(),
            start: t0.to_f64_lossy(),
            end: t1.to_f64_lossy(),
        });
    }
    let (current, _) = traj.nearest(x.t).expect("nonempty");
    let r_max = T::lit(4.0) * current.net.diameter();
    let history = x.t - t0;
    let mut capped = false;
    let mut r = r_max;
    for _ in 0..64 {
        if r * r > history + slack {
            capped = true;
        } else {
            let mut snaps: Vec<&Snapshot<T>> = traj.window(x.t - r * r, x.t).collect();
            snaps.push(current);
            if cylinder_ok(&snaps, x, r) {
                return Ok(RegularityScale {
                    r,
                    capped_by_history: capped,
                });
            }
        }
        r = r * T::half();
    }
    Ok(RegularityScale {
        r: T::zero(),
        capped_by_history: capped,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureBoundReport<T> {
    /// `(t, sup|A|(t) √t)` samples.
    pub series: Vec<(T, T)>,
    pub max: T,
    pub window: T,
    pub value_at_window: T,
    /// Maximum over `t >= window`.
    pub max_after_window: T,
    pub nonincreasing_after_window: bool,
    /// `max_after_window / value_at_window` (infinite when the latter vanishes and the former does not).
    pub ratio_to_window: T,
}

/// Scale-invariant curvature monitor from samples `(t, sup|A|)` of a flow started at `t = 0`.
pub fn monitor_curvature_bound<T: Scalar>(samples: &[(T, T)], t_w: T) -> CurvatureBoundReport<T> {
    let series: Vec<(T, T)> = samples
        .iter()
        .map(|&(t, k)| (t, k * t.max(T::zero()).sqrt()))
        .collect();
    let max = series.iter().map(|s| s.1).fold(T::zero(), T::max);
    let after: Vec<(T, T)> = series.iter().copied().filter(|s| s.0 >= t_w).collect();
    let value_at_window = after.first().map_or(T::zero(), |s| s.1);
    let max_after = after.iter().map(|s| s.1).fold(T::zero(), T::max);
    let tol = T::lit(1e-12);
    let nonincreasing = after
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 * (T::one() + tol) + tol);
    let ratio = if value_at_window > T::zero() {
        max_after / value_at_window
    } else if max_after > T::zero() {
        T::infinity()
    } else {
        T::one()
    };
    CurvatureBoundReport {
        series,
        max,
        window: t_w,
        value_at_window,
        max_after_window: max_after,
        nonincreasing_after_window: nonincreasing,
        ratio_to_window: ratio,
    }
}

pub fn curvature_samples_from_diagnostics<T: Scalar>(rows: &[DiagnosticsRow<T>]) -> Vec<(T, T)> {
    rows.iter().map(|r| (r.t, r.max_curvature)).collect()
}

pub fn curvature_samples_from_trajectory<T: Scalar>(traj: &Trajectory<T>) -> Vec<(T, T)> {
    traj.snapshots.iter().map(|s| (s.t, max_curvature(&s.net))).collect()
}
