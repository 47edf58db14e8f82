//! The shrinking circle `R(t)^2 = R0^2 - 2t` and its exact density ratios.

use crate::analysis::density::{DensityValue, SpacetimeTrack};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{circle_loop, Network};
use crate::scalar::Scalar;

pub fn circle_radius<T: Scalar>(r0: T, t: T) -> Result<T> {
    let r2 = r0 * r0 - T::two() * t;
    if !(r2 > T::zero()) {
        return Err(Error::param("t", "at or beyond the extinction time R0^2/2"));
    }
    Ok(r2.sqrt())
}

pub fn extinction_time<T: Scalar>(r0: T) -> T {
    r0 * r0 * T::half()
}

/// Closed regular polygon with `nodes` vertices on the circle of radius `sqrt(R0^2 - 2t)`
/// about `centre`, in the plane of the first two axes.
pub fn exact_circle<T: Scalar>(centre: &Point<T>, r0: T, t: T, nodes: usize) -> Result<Network<T>> {
    if nodes < 3 {
        return Err(Error::param("nodes", "a closed loop needs at least three nodes"));
    }
    let r = circle_radius(r0, t)?;
    let mut net = Network::new(centre.dim());
    net.add_closed_loop(circle_loop(centre.dim(), centre, r, nodes));
    Ok(net)
}

/// The exact shrinking circle as a space-time track. Density ratios integrate the
/// kernel over the true circle with the periodic trapezoid rule, which converges
/// geometrically for this analytic integrand.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCircleTrack<T> {
    pub centre: Point<T>,
    pub r0: T,
}

impl<T: Scalar> SpacetimeTrack<T> for ExactCircleTrack<T> {
    fn time_range(&self) -> (T, T) {
        (T::neg_infinity(), extinction_time(self.r0))
    }

    fn density_ratio(&self, x: &Point<T>, t: T, r: T) -> Result<DensityValue<T>> {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::param("r", "scale must be positive and finite"));
        }
        let s = t - r * r;
        let r2 = self.r0 * self.r0 - T::two() * s;
        if !(r2 > T::zero()) {
            return Ok(DensityValue {
                value: T::zero(),
                slice_time: s,
                time_mismatch: T::zero(),
            });
        }
        let rho = r2.sqrt();
        let m = (T::lit(64.0) * rho / r).ceil().to_usize().unwrap_or(1 << 20).clamp(256, 1 << 20);
        let dth = T::two() * T::PI() / T::from_usize_lossy(m);
        let inv = T::one() / (T::lit(4.0) * r * r);
        let mut acc = T::zero();
        for i in 0..m {
            let th = dth * T::from_usize_lossy(i);
            let mut y = self.centre.clone();
            y[0] += rho * th.cos();
            y[1] += rho * th.sin();
            acc += (-(y.dist_sq(x)) * inv).exp();
        }
        let value = acc * dth * rho / ((T::lit(4.0) * T::PI()).sqrt() * r);
        Ok(DensityValue {
            value,
            slice_time: s,
            time_mismatch: T::zero(),
        })
    }
}
