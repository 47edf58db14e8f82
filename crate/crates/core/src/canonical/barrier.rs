//! Shrinking balls as barriers: a flow starting outside `B_{R0}(x0)` stays outside
//! `B_{R(t)}(x0)` with `R(t) = sqrt(R0^2 - 2t)`.

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::Point;
use crate::metric::point_network_distance;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierBall<T> {
    pub centre: Point<T>,
    pub r0: T,
}

impl<T: Scalar> BarrierBall<T> {
    /// Radius at time `t`; zero at and after `R0^2 / 2`.
    pub fn radius(&self, t: T) -> T {
        (self.r0 * self.r0 - T::two() * t).max(T::zero()).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierViolation<T> {
    pub t: T,
    pub distance: T,
    pub radius: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierReport<T> {
    pub pass: bool,
    pub first_violation: Option<BarrierViolation<T>>,
    /// Smallest `distance - R(t)` over the snapshots checked.
    pub min_margin: T,
    pub snapshots_checked: usize,
}

/// Checks `dist(x0, M_t) >= R(t) - tol` at every snapshot, with times measured from the
/// first snapshot.
pub fn barrier_check<T: Scalar>(traj: &Trajectory<T>, ball: &BarrierBall<T>, tol: T) -> Result<BarrierReport<T>> {
    let first = traj
        .snapshots
        .first()
        .ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let t0 = first.t;
    if point_network_distance(&ball.centre, &first.net) < ball.r0 {
        return Err(Error::Precondition("initial network meets the barrier ball".into()));
    }
    let mut min_margin = T::infinity();
    let mut first_violation = None;
    for s in &traj.snapshots {
        let radius = ball.radius(s.t - t0);
        let distance = point_network_distance(&ball.centre, &s.net);
        min_margin = min_margin.min(distance - radius);
        if distance < radius - tol && first_violation.is_none() {
            first_violation = Some(BarrierViolation {
                t: s.t,
                distance,
                radius,
            });
        }
    }
    Ok(BarrierReport {
        pass: first_violation.is_none(),
        first_violation,
        min_margin,
        snapshots_checked: traj.snapshots.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use crate::network::make_y;

    #[test]
    fn far_ball_passes_and_overlap_rejected() {
        let y = make_y(2, &Rotation::identity(2), 1.0, 5);
        let mut traj = Trajectory::default();
        traj.push(0.0, y.clone());
        traj.push(0.1, y);
        let far = BarrierBall {
            centre: Point::xy(5.0, 5.0),
            r0: 1.0,
        };
        assert!(barrier_check(&traj, &far, 1e-6).unwrap().pass);
        let near = BarrierBall {
            centre: Point::xy(0.0, 0.0),
            r0: 0.5,
        };
        assert!(barrier_check(&traj, &near, 1e-6).is_err());
    }
}
