//! Gaussian density ratios of the backwards heat kernel over network slices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::geometry::Point;
use crate::network::Network;
use crate::scalar::Scalar;

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Kernel support is truncated where `exp(-|y - x|^2 / 4r^2) < exp(-36)`.
const CUTOFF_RADII: f64 = 12.0;

/// `∫_segment (4π r²)^(-1/2) exp(-|y - x|² / 4r²) dH¹(y)` by composite 8-point
/// Gauss-Legendre on pieces no longer than `r / 2`.
pub fn segment_ratio<T: Scalar>(a: &Point<T>, b: &Point<T>, x: &Point<T>, r: T) -> T {
    let d = b - a;
    let len_sq = d.norm_sq();
    if !(len_sq > T::zero()) {
        return T::zero();
    }
    let ax = a - x;
    let cut = T::lit(CUTOFF_RADII) * r;
    // |a + s d - x|^2 = len_sq s^2 + 2 bq s + c
    let bq = ax.dot(&d);
    let c = ax.norm_sq() - cut * cut;
    let disc = bq * bq - len_sq * c;
    if disc <= T::zero() {
        return T::zero();
    }
    let sq = disc.sqrt();
    let s0 = ((-bq - sq) / len_sq).max(T::zero());
    let s1 = ((-bq + sq) / len_sq).min(T::one());
    if s1 <= s0 {
        return T::zero();
    }
    // distances measured from the foot point avoid cancellation on long segments
    let foot = -bq / len_sq;
    let perp_sq = ax.axpy(foot, &d).norm_sq();
    let len = len_sq.sqrt();
    let span = (s1 - s0) * len;
    let pieces = (T::two() * span / r).ceil().to_usize().unwrap_or(1).max(1);
    let h = (s1 - s0) / T::from_usize_lossy(pieces);
    let inv4r2 = T::one() / (T::lit(4.0) * r * r);
    let mut total = T::zero();
    for p in 0..pieces {
        let mid = s0 + h * (T::from_usize_lossy(p) + T::half());
        let mut acc = T::zero();
        for (xi, wi) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for sgn in [-T::one(), T::one()] {
                let s = mid + sgn * T::lit(*xi) * h * T::half();
                let along = (s - foot) * len;
                acc += T::lit(*wi) * (-(perp_sq + along * along) * inv4r2).exp();
            }
        }
        total += acc * h * T::half();
    }
    total * len / ((T::lit(4.0) * T::PI()).sqrt() * r)
}

/// Density ratio of a static network used as the slice at time `t - r^2`.
pub fn static_ratio<T: Scalar>(net: &Network<T>, x: &Point<T>, r: T) -> T {
    net.segments().map(|(_, a, b)| segment_ratio(a, b, x, r)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityValue<T> {
    pub value: T,
    /// Time of the slice actually integrated.
    pub slice_time: T,
    /// `|slice_time - (t - r^2)|`, the snapshot interpolation error in time.
    pub time_mismatch: T,
}

/// A space-time family of networks that density ratios can be evaluated on.
pub trait SpacetimeTrack<T: Scalar>: Sync {
    /// Times for which slices are available.
    fn time_range(&self) -> (T, T);

    /// `Θ((x, t), r)`, integrating over the slice at time `t - r^2`.
    fn density_ratio(&self, x: &Point<T>, t: T, r: T) -> Result<DensityValue<T>>;
}

/// A network held fixed for all times.
pub struct StaticTrack<'a, T>(pub &'a Network<T>);

impl<T: Scalar> SpacetimeTrack<T> for StaticTrack<'_, T> {
    fn time_range(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }

    fn density_ratio(&self, x: &Point<T>, t: T, r: T) -> Result<DensityValue<T>> {
        check_scale(r)?;
        Ok(DensityValue {
            value: static_ratio(self.0, x, r),
            slice_time: t - r * r,
            time_mismatch: T::zero(),
        })
    }
}

fn check_scale<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::param("r", "scale must be positive and finite"))
    }
}

impl<T: Scalar> SpacetimeTrack<T> for Trajectory<T> {
    fn time_range(&self) -> (T, T) {
        self.time_range().unwrap_or((T::zero(), T::zero()))
    }

    fn density_ratio(&self, x: &Point<T>, t: T, r: T) -> Result<DensityValue<T>> {
        check_scale(r)?;
        let s = t - r * r;
        let (t0, t1) = SpacetimeTrack::time_range(self);
        let slack = T::lit(1e-12) * (T::one() + t0.abs().max(t1.abs()));
        if s < t0 - slack || s > t1 + slack {
            return Err(Error::InsufficientHistory {
                requested: s.to_f64_lossy(),
                start: t0.to_f64_lossy(),
                end: t1.to_f64_lossy(),
            });
        }
        let (snap, gap) = self.nearest(s).expect("nonempty trajectory");
        Ok(DensityValue {
            value: static_ratio(&snap.net, x, r),
            slice_time: snap.t,
            time_mismatch: gap,
        })
    }
}

/// `Θ(X, r)` for `X = (x, t)`.
pub fn gaussian_density_ratio<T: Scalar>(
    track: &dyn SpacetimeTrack<T>,
    x: &Point<T>,
    t: T,
    r: T,
) -> Result<DensityValue<T>> {
    track.density_ratio(x, t, r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyOptions<T> {
    /// Grid points per axis over the bounding box (the default is 41 in the plane and
    /// 15 in higher dimension).
    pub grid: Option<usize>,
    pub scales: usize,
    /// Smallest scale; defaults to the largest node spacing.
    pub r_min: Option<T>,
    /// Pattern-search refinement around the best grid sample.
    pub refine: bool,
}

impl<T: Scalar> Default for EntropyOptions<T> {
    fn default() -> Self {
        EntropyOptions {
            grid: None,
            scales: 40,
            r_min: None,
            refine: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport<T> {
    /// Supremum found; a lower bound on the entropy.
    pub value: T,
    pub centre: Point<T>,
    pub scale: T,
    pub grid_per_axis: usize,
    pub centres_evaluated: usize,
    pub r_min: T,
    pub r_max: T,
    pub scales: usize,
}

/// Supremum of static density ratios over centres and scales.
pub fn entropy_estimate<T: Scalar>(net: &Network<T>, opts: &EntropyOptions<T>) -> EntropyReport<T> {
    let dim = net.dim();
    let (lo, hi) = net.bounding_box();
    let diam = net.diameter().max(T::min_positive_value());
    let r_min = opts.r_min.unwrap_or_else(|| net.max_spacing()).max(diam * T::lit(1e-6));
    let r_max = T::lit(4.0) * diam;
    let grid = opts.grid.unwrap_or(if dim == 2 { 41 } else { 15 }).max(2);
    let nscales = opts.scales.max(2);
    let scales: Vec<T> = (0..nscales)
        .map(|i| {
            let w = T::from_usize_lossy(i) / T::from_usize_lossy(nscales - 1);
            r_min * (r_max / r_min).powf(w)
        })
        .collect();

    let mut centres: Vec<Point<T>> = Vec::new();
    let total = grid.pow(dim as u32);
    for code in 0..total {
        let mut p = Point::zeros(dim);
        let mut rem = code;
        for k in 0..dim {
            let i = rem % grid;
            rem /= grid;
            let w = T::from_usize_lossy(i) / T::from_usize_lossy(grid - 1);
            p[k] = lo[k] + w * (hi[k] - lo[k]);
        }
        centres.push(p);
    }
    centres.extend(net.vertices.iter().map(|v| v.position.clone()));

    let evaluated = centres.len();
    let best = centres
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut b = (T::neg_infinity(), ci, 0usize);
            for (si, &r) in scales.iter().enumerate() {
                let v = static_ratio(net, c, r);
                if v > b.0 {
                    b = (v, ci, si);
                }
            }
            b
        })
        .reduce(
            || (T::neg_infinity(), usize::MAX, 0),
            |a, b| {
                // ties broken by index so the result is schedule independent
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let (mut value, ci, si) = best;
    let mut centre = centres[ci].clone();
    let mut scale = scales[si];

    if opts.refine {
        let cell = (0..dim)
            .map(|k| (hi[k] - lo[k]) / T::from_usize_lossy(grid - 1))
            .fold(T::zero(), T::max)
            .max(r_min);
        let mut step_x = cell;
        let mut step_log = (r_max / r_min).ln() / T::from_usize_lossy(nscales - 1);
        let floor = diam * T::lit(1e-7);
        while step_x > floor {
            let mut improved = false;
            for k in 0..=dim {
                for sgn in [-T::one(), T::one()] {
                    let (c, r) = if k < dim {
                        let mut c = centre.clone();
                        c[k] += sgn * step_x;
                        (c, scale)
                    } else {
                        (centre.clone(), scale * (sgn * step_log).exp())
                    };
                    if !(r >= r_min && r <= r_max) {
                        continue;
                    }
                    let v = static_ratio(net, &c, r);
                    if v > value {
                        value = v;
                        centre = c;
                        scale = r;
                        improved = true;
                    }
                }
            }
            if !improved {
                step_x = step_x * T::half();
                step_log = step_log * T::half();
            }
        }
    }
    EntropyReport {
        value,
        centre,
        scale,
        grid_per_axis: grid,
        centres_evaluated: evaluated,
        r_min,
        r_max,
        scales: nscales,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erf_segment(x0: f64, x1: f64, r: f64) -> f64 {
        // point at the origin on the x-axis segment [x0, x1]
        0.5 * (libm_erf(x1 / (2.0 * r)) - libm_erf(x0 / (2.0 * r)))
    }

    fn libm_erf(x: f64) -> f64 {
        libm::erf(x)
    }

    #[test]
    fn segment_matches_error_function() {
        let a = Point::xy(-0.3, 0.0);
        let b = Point::xy(0.7, 0.0);
        for r in [0.01, 0.1, 0.5, 3.0] {
            let got = segment_ratio(&a, &b, &Point::xy(0.0, 0.0), r);
            let want = erf_segment(-0.3, 0.7, r);
            assert!((got - want).abs() < 1e-13, "r={r}: {got} vs {want}");
        }
    }

    #[test]
    fn offset_point_picks_up_normal_factor() {
        let a = Point::xy(-50.0, 0.0);
        let b = Point::xy(50.0, 0.0);
        let r: f64 = 0.4;
        let h: f64 = 0.3;
        let got = segment_ratio(&a, &b, &Point::xy(0.0, h), r);
        let want = (-h * h / (4.0 * r * r)).exp();
        assert!((got - want).abs() < 1e-13, "{got} vs {want}");
    }
}
