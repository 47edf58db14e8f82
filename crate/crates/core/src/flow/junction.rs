//! Discrete equal-angle condition: the junction sits at the Fermat point of its three
//! neighbouring nodes.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::solve_dense;
use crate::network::{Network, VertexId, VertexKind};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct FermatPoint<T> {
    pub point: Point<T>,
    /// Index of the triangle vertex with an angle of at least 120 degrees; the point
    /// is then clamped onto it.
    pub degenerate: Option<usize>,
}

fn objective_gradient<T: Scalar>(p: &Point<T>, q: [&Point<T>; 3]) -> Point<T> {
    let mut g = Point::zeros(p.dim());
    for qi in q {
        if let Some(u) = (qi - p).normalized() {
            g = &g + &u;
        }
    }
    g
}

/// Minimiser of `sum |p - q_i|`.
pub fn fermat_point<T: Scalar>(q: [&Point<T>; 3]) -> Result<FermatPoint<T>> {
    let side = |i: usize, j: usize| q[i].dist(q[j]);
    let a = [side(1, 2), side(0, 2), side(0, 1)];
    let scale = a[0].max(a[1]).max(a[2]);
    if a.iter().any(|&s| !(s > T::epsilon() * scale)) || !(scale > T::zero()) {
        return Err(Error::Degenerate("coincident Fermat triangle vertices".into()));
    }
    let mut angle = [T::zero(); 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let c = (q[j] - q[i]).dot(&(q[k] - q[i])) / (a[k] * a[j]);
        let c = c.max(-T::one()).min(T::one());
        if c <= -T::half() {
            return Ok(FermatPoint {
                point: q[i].clone(),
                degenerate: Some(i),
            });
        }
        angle[i] = c.acos();
    }
    let third = T::FRAC_PI_3();
    let w: Vec<T> = (0..3).map(|i| a[i] / (angle[i] + third).sin()).collect();
    let wsum = w[0] + w[1] + w[2];
    let mut p = q[0].scale(w[0] / wsum);
    p.add_assign_scaled(w[1] / wsum, q[1]);
    p.add_assign_scaled(w[2] / wsum, q[2]);

    // Newton polish near the 120-degree boundary, where the closed form loses digits.
    let tol = T::lit(1e-12);
    for _ in 0..4 {
        let g = objective_gradient(&p, q);
        if g.norm() <= tol {
            break;
        }
        let d = p.dim();
        let mut h = vec![T::zero(); d * d];
        for qi in q {
            let diff = qi - &p;
            let r = diff.norm();
            let u = diff.scale(T::one() / r);
            for r0 in 0..d {
                for c0 in 0..d {
                    let id = if r0 == c0 { T::one() } else { T::zero() };
                    h[r0 * d + c0] += (id - u[r0] * u[c0]) / r;
                }
            }
        }
        // descent direction for f = sum |p - q_i| is +H^{-1} g with g = -grad f
        let Some(step) = solve_dense(&h, g.coords(), T::lit(1e-14)) else {
            break;
        };
        let cand = p.axpy(T::one(), &Point::from_vec(step));
        if objective_gradient(&cand, q).norm() < g.norm() {
            p = cand;
        } else {
            break;
        }
    }
    Ok(FermatPoint {
        point: p,
        degenerate: None,
    })
}

/// Fermat projection of a junction onto its three adjacent first interior nodes.
pub fn junction_project<T: Scalar>(net: &Network<T>, v: VertexId) -> Result<FermatPoint<T>> {
    let vert = net.vertex(v);
    if vert.kind() != VertexKind::Junction {
        return Err(Error::Precondition(format!("{v} is not a triple junction")));
    }
    let q: Vec<&Point<T>> = vert
        .incident
        .iter()
        .map(|(e, flag)| net.edge(*e).node_next_to(*flag))
        .collect();
    fermat_point([q[0], q[1], q[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_neighbours_fix_the_centre() {
        let p0 = Point::xy(0.3, -0.7);
        let q: Vec<Point<f64>> = (0..3)
            .map(|i| {
                let a = 0.4 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                p0.axpy(1.0, &Point::xy(a.cos(), a.sin()))
            })
            .collect();
        let f = fermat_point([&q[0], &q[1], &q[2]]).unwrap();
        assert!(f.point.dist(&p0) < 1e-15);
        assert!(objective_gradient(&f.point, [&q[0], &q[1], &q[2]]).norm() < 1e-10);
    }

    #[test]
    fn equilateral_gives_centroid() {
        let q = [Point::xy(0.0, 0.0), Point::xy(1.0, 0.0), Point::xy(0.5, 3f64.sqrt() / 2.0)];
        let f = fermat_point([&q[0], &q[1], &q[2]]).unwrap();
        let c = Point::xy(0.5, 3f64.sqrt() / 6.0);
        assert!(f.point.dist(&c) < 1e-15);
    }

    #[test]
    fn obtuse_triangle_clamps() {
        let q = [Point::xy(0.0, 0.0), Point::xy(1.0, 0.1), Point::xy(-1.0, 0.1)];
        let f = fermat_point([&q[0], &q[1], &q[2]]).unwrap();
        assert_eq!(f.degenerate, Some(0));
        assert_eq!(f.point, q[0]);
        assert!(fermat_point([&q[0], &q[0], &q[1]]).is_err());
    }
}
