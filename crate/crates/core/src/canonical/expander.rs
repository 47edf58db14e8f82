//! Self-expanding triods `k = x^⊥/2` (time one) by shooting three arcs from a
//! 120-degree junction and matching their asymptotic directions.
//!
//! Along an arclength-parametrised planar arc with angle `θ` and normal
//! `N = (-sin θ, cos θ)` the equation reads `θ' = (x · N) / 2`. The support function
//! `x · N` decays like `exp(-s^2/4)`, so each arm becomes a ray from the origin.

use crate::error::{Error, Result};
use crate::geometry::{orthonormal_span, Point};
use crate::linalg::solve_dense;
use crate::network::Network;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpanderOptions<T> {
    /// RK4 step in arclength (unit-scale coordinates).
    pub ds: T,
    /// Arclength each arm is integrated to.
    pub arm_length: T,
    /// Target max-norm of the asymptotic angle mismatch.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for ExpanderOptions<T> {
    fn default() -> Self {
        ExpanderOptions {
            ds: T::lit(0.01),
            arm_length: T::lit(12.0),
            tol: T::lit(1e-10),
            max_iter: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpanderTriod<T> {
    /// Orthonormal basis of the plane of the arms.
    pub plane: [Point<T>; 2],
    pub scale: T,
    pub junction: Point<T>,
    /// Samples from the junction outward at arclength spacing `ds * scale`; arm `i`
    /// follows input direction `i`.
    pub arms: [Vec<Point<T>>; 3],
    /// Max deviation (radians) of the final arm angles from the inputs.
    pub asymptotic_error: T,
    pub iterations: usize,
}

fn wrap<T: Scalar>(a: T) -> T {
    let two_pi = T::two() * T::PI();
    let mut x = a % two_pi;
    if x > T::PI() {
        x -= two_pi;
    } else if x <= -T::PI() {
        x += two_pi;
    }
    x
}

/// Integrates one arm in the plane; returns samples `(x, y)` and the final angle.
fn shoot<T: Scalar>(px: T, py: T, theta0: T, opts: &ExpanderOptions<T>, keep: bool) -> (Vec<(T, T)>, T) {
    let f = |s: (T, T, T)| -> (T, T, T) {
        let (x, y, th) = s;
        let (sn, cs) = th.sin_cos();
        (cs, sn, (-x * sn + y * cs) * T::half())
    };
    let steps = (opts.arm_length / opts.ds).ceil().to_usize().unwrap_or(1);
    let h = opts.ds;
    let mut s = (px, py, theta0);
    let mut out = Vec::new();
    if keep {
        out.reserve(steps + 1);
        out.push((s.0, s.1));
    }
    let half = T::half();
    let sixth = T::one() / T::lit(6.0);
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f((s.0 + half * h * k1.0, s.1 + half * h * k1.1, s.2 + half * h * k1.2));
        let k3 = f((s.0 + half * h * k2.0, s.1 + half * h * k2.1, s.2 + half * h * k2.2));
        let k4 = f((s.0 + h * k3.0, s.1 + h * k3.1, s.2 + h * k3.2));
        s = (
            s.0 + h * sixth * (k1.0 + T::two() * k2.0 + T::two() * k3.0 + k4.0),
            s.1 + h * sixth * (k1.1 + T::two() * k2.1 + T::two() * k3.1 + k4.1),
            s.2 + h * sixth * (k1.2 + T::two() * k2.2 + T::two() * k3.2 + k4.2),
        );
        if keep {
            out.push((s.0, s.1));
        }
    }
    (out, s.2)
}

/// Expander triod asymptotic to the rays along `directions`, scaled by `scale`.
pub fn expander_triod<T: Scalar>(
    directions: &[Point<T>; 3],
    scale: T,
    opts: &ExpanderOptions<T>,
) -> Result<ExpanderTriod<T>> {
    if !(scale > T::zero()) {
        return Err(Error::param("scale", "must be positive"));
    }
    let dim = directions[0].dim();
    let units: Vec<Point<T>> = directions
        .iter()
        .map(|d| d.normalized().ok_or_else(|| Error::param("directions", "zero direction")))
        .collect::<Result<_>>()?;
    let basis = orthonormal_span(&units, T::lit(1e-9));
    if basis.len() != 2 {
        return Err(Error::Precondition(format!(
            "ray directions span {} dimensions; expander gluing needs a plane",
            basis.len()
        )));
    }
    let plane_tol = T::lit(1e-9);
    let mut alpha = [T::zero(); 3];
    for (i, u) in units.iter().enumerate() {
        let a = u.dot(&basis[0]);
        let b = u.dot(&basis[1]);
        if ((a * a + b * b).sqrt() - T::one()).abs() > plane_tol {
            return Err(Error::Precondition("ray directions are not coplanar".into()));
        }
        alpha[i] = b.atan2(a);
    }
    for i in 0..3 {
        for j in i + 1..3 {
            if wrap(alpha[i] - alpha[j]).abs() < T::lit(1e-9) {
                return Err(Error::Precondition("coincident ray directions".into()));
            }
        }
    }
    // arms are generated counterclockwise; pair them with the inputs in ccw order
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        let ai = (alpha[i] - alpha[0] + T::two() * T::PI()) % (T::two() * T::PI());
        let aj = (alpha[j] - alpha[0] + T::two() * T::PI()) % (T::two() * T::PI());
        ai.partial_cmp(&aj).unwrap()
    });
    let third = T::two() * T::PI() / T::lit(3.0);
    let (mut sx, mut sy) = (T::zero(), T::zero());
    for (i, &o) in order.iter().enumerate() {
        let a = alpha[o] - third * T::from_usize_lossy(i);
        sx += a.cos();
        sy += a.sin();
    }
    let mut u = [T::zero(), T::zero(), sy.atan2(sx)];

    let residual = |u: &[T; 3]| -> [T; 3] {
        let mut r = [T::zero(); 3];
        for (i, &o) in order.iter().enumerate() {
            let (_, th) = shoot(u[0], u[1], u[2] + third * T::from_usize_lossy(i), opts, false);
            r[i] = wrap(th - alpha[o]);
        }
        r
    };
    let norm = |r: &[T; 3]| r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = opts.tol.max(T::epsilon() * T::lit(1e3));
    let mut r = residual(&u);
    let mut iterations = 0;
    while norm(&r) > tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence(format!(
                "expander shooting stalled at angle mismatch {}",
                norm(&r)
            )));
        }
        iterations += 1;
        let fd = T::epsilon().sqrt();
        let mut jac = vec![T::zero(); 9];
        for c in 0..3 {
            let mut up = u;
            let mut dn = u;
            up[c] += fd;
            dn[c] -= fd;
            let rp = residual(&up);
            let rm = residual(&dn);
            for row in 0..3 {
                jac[row * 3 + c] = wrap(rp[row] - rm[row]) / (T::two() * fd);
            }
        }
        let rhs: Vec<T> = r.iter().map(|v| -*v).collect();
        let delta = solve_dense(&jac, &rhs, T::lit(1e-14))
            .ok_or_else(|| Error::NoConvergence("singular shooting Jacobian".into()))?;
        let mut damping = T::one();
        let current = norm(&r);
        loop {
            let cand = [
                u[0] + damping * delta[0],
                u[1] + damping * delta[1],
                u[2] + damping * delta[2],
            ];
            let rc = residual(&cand);
            if norm(&rc) < current || damping < T::lit(1e-4) {
                u = cand;
                r = rc;
                break;
            }
            damping = damping * T::half();
        }
    }

    let to_ambient = |x: T, y: T| -> Point<T> {
        let mut p = basis[0].scale(x * scale);
        p.add_assign_scaled(y * scale, &basis[1]);
        p
    };
    let mut arms: [Vec<Point<T>>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, &o) in order.iter().enumerate() {
        let (samples, _) = shoot(u[0], u[1], u[2] + third * T::from_usize_lossy(i), opts, true);
        arms[o] = samples.into_iter().map(|(x, y)| to_ambient(x, y)).collect();
    }
    debug_assert_eq!(arms[0][0].dim(), dim);
    Ok(ExpanderTriod {
        plane: [basis[0].clone(), basis[1].clone()],
        scale,
        junction: to_ambient(u[0], u[1]),
        arms,
        asymptotic_error: norm(&r),
        iterations,
    })
}

impl<T: Scalar> ExpanderTriod<T> {
    /// Point of arm `i` at distance `rho` from the origin, from the last crossing of that
    /// distance; `None` beyond the integrated length.
    pub fn arm_point_at_radius(&self, i: usize, rho: T) -> Option<Point<T>> {
        let arm = &self.arms[i];
        let mut idx = None;
        for k in (1..arm.len()).rev() {
            let r0 = arm[k - 1].norm();
            let r1 = arm[k].norm();
            if (r0 - rho) * (r1 - rho) <= T::zero() && r0 != r1 {
                idx = Some((k, r0, r1));
                break;
            }
        }
        let (k, r0, r1) = idx?;
        let w = (rho - r0) / (r1 - r0);
        Some(arm[k - 1].lerp(&arm[k], w))
    }

    /// Stand-alone network: the three arms truncated at distance `radius` from the
    /// origin, joined to fixed endpoints, sampled every `stride` integration steps.
    pub fn network(&self, radius: T, stride: usize) -> Network<T> {
        let dim = self.junction.dim();
        let mut net = Network::new(dim);
        let j = net.add_vertex(self.junction.clone());
        for arm in &self.arms {
            let mut interior = Vec::new();
            let mut end = None;
            for (k, p) in arm.iter().enumerate().skip(1) {
                if p.norm() >= radius {
                    end = Some(p.clone());
                    break;
                }
                if k % stride.max(1) == 0 {
                    interior.push(p.clone());
                }
            }
            let end = end.unwrap_or_else(|| arm[arm.len() - 1].clone());
            if interior.last().is_some_and(|q| q.dist(&end) < T::lit(1e-12) * radius) {
                interior.pop();
            }
            let v = net.add_vertex(end);
            net.add_edge(j, v, interior);
        }
        net
    }
}
