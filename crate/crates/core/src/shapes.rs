//! Standard planar test networks.

use crate::geometry::Point;
use crate::network::{circle_loop, Network, VertexId};
use crate::scalar::Scalar;

fn segments_for<T: Scalar>(length: T, h: T) -> usize {
    (length / h).ceil().to_usize().unwrap_or(1).max(1)
}

fn straight_interior<T: Scalar>(a: &Point<T>, b: &Point<T>, h: T) -> Vec<Point<T>> {
    let n = segments_for(a.dist(b), h);
    (1..n)
        .map(|i| a.lerp(b, T::from_usize_lossy(i) / T::from_usize_lossy(n)))
        .collect()
}

fn arc_interior<T: Scalar>(centre: &Point<T>, radius: T, a0: T, a1: T, h: T) -> Vec<Point<T>> {
    let n = segments_for(radius * (a1 - a0).abs(), h);
    (1..n)
        .map(|i| {
            let a = a0 + (a1 - a0) * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            Point::xy(centre[0] + radius * a.cos(), centre[1] + radius * a.sin())
        })
        .collect()
}

/// Closed circle of `nodes` equally spaced nodes.
pub fn circle<T: Scalar>(centre: &Point<T>, radius: T, nodes: usize) -> Network<T> {
    let mut net = Network::new(centre.dim());
    net.add_closed_loop(circle_loop(centre.dim(), centre, radius, nodes));
    net
}

/// Straight segment between two fixed endpoints.
pub fn segment<T: Scalar>(a: Point<T>, b: Point<T>, h: T) -> Network<T> {
    let mut net = Network::new(a.dim());
    let interior = straight_interior(&a, &b, h);
    let va = net.add_vertex(a);
    let vb = net.add_vertex(b);
    net.add_edge(va, vb, interior);
    net
}

/// Triod with straight rays at the given angles (degrees) from the origin.
pub fn triod<T: Scalar>(angles_deg: [T; 3], ray_length: T, h: T) -> Network<T> {
    let mut net = Network::new(2);
    let o = Point::zeros(2);
    let j = net.add_vertex(o.clone());
    for a in angles_deg {
        let r = a.to_radians();
        let end = Point::xy(ray_length * r.cos(), ray_length * r.sin());
        let interior = straight_interior(&o, &end, h);
        let v = net.add_vertex(end);
        net.add_edge(j, v, interior);
    }
    net
}

/// Symmetric lens: junctions at `(±a, 0)` joined by two circular arcs meeting at 120
/// degrees, with horizontal legs of length `leg` to fixed endpoints.
pub fn lens<T: Scalar>(a: T, leg: T, h: T) -> Network<T> {
    let mut net = Network::new(2);
    let sixty = T::FRAC_PI_3();
    let radius = a / sixty.sin();
    let j1 = net.add_vertex(Point::xy(-a, T::zero()));
    let j2 = net.add_vertex(Point::xy(a, T::zero()));
    let e1 = net.add_vertex(Point::xy(-a - leg, T::zero()));
    let e2 = net.add_vertex(Point::xy(a + leg, T::zero()));
    let deg = |d: f64| T::lit(d).to_radians();
    let upper = Point::xy(T::zero(), -radius * T::half());
    let lower = Point::xy(T::zero(), radius * T::half());
    net.add_edge(j2, j1, arc_interior(&upper, radius, deg(30.0), deg(150.0), h));
    net.add_edge(j2, j1, arc_interior(&lower, radius, deg(-30.0), deg(-150.0), h));
    let p1 = net.vertex(j1).position.clone();
    let q1 = net.vertex(e1).position.clone();
    net.add_edge(j1, e1, straight_interior(&p1, &q1, h));
    let p2 = net.vertex(j2).position.clone();
    let q2 = net.vertex(e2).position.clone();
    net.add_edge(j2, e2, straight_interior(&p2, &q2, h));
    net
}

/// Collision time of [`lens`]: the enclosed area `(4 a^2 / 3)(2π/3 - √3/2)` decreases at
/// the constant rate `4π/3`.
pub fn lens_collapse_time<T: Scalar>(a: T) -> T {
    let two_thirds_pi = T::two() * T::PI() / T::lit(3.0);
    let area = T::lit(4.0) * a * a / T::lit(3.0) * (two_thirds_pi - T::lit(3.0).sqrt() * T::half());
    area / (T::two() * two_thirds_pi)
}

/// Theta network: junctions at `(±1, 0)` joined by an upper arc, a straight middle edge
/// and a lower arc, all meeting at 120 degrees.
pub fn theta<T: Scalar>(h: T) -> Network<T> {
    let mut net = Network::new(2);
    let one = T::one();
    let j1 = net.add_vertex(Point::xy(-one, T::zero()));
    let j2 = net.add_vertex(Point::xy(one, T::zero()));
    let sixty = T::FRAC_PI_3();
    let radius = one / sixty.sin();
    let deg = |d: f64| T::lit(d).to_radians();
    // 240-degree arcs leave the junctions at ±60 degrees from the x-axis
    let upper = Point::xy(T::zero(), radius * T::half());
    let lower = Point::xy(T::zero(), -radius * T::half());
    net.add_edge(j2, j1, arc_interior(&upper, radius, deg(-30.0), deg(210.0), h));
    let a = net.vertex(j2).position.clone();
    let b = net.vertex(j1).position.clone();
    net.add_edge(j2, j1, straight_interior(&a, &b, h));
    net.add_edge(j2, j1, arc_interior(&lower, radius, deg(30.0), deg(-210.0), h));
    net
}

/// Two circles of radius `r` centred at `(±c, 0)`, joined by the segment between their
/// nearest points. Each circle is a loop edge at its junction.
pub fn two_circles_and_segment<T: Scalar>(r: T, c: T, h: T) -> Network<T> {
    let mut net = Network::new(2);
    let jl = net.add_vertex(Point::xy(-c + r, T::zero()));
    let jr = net.add_vertex(Point::xy(c - r, T::zero()));
    let circle_edge = |net: &mut Network<T>, j: VertexId, centre: Point<T>, start: T| {
        let two_pi = T::two() * T::PI();
        let interior = arc_interior(&centre, r, start, start + two_pi, h);
        net.add_edge(j, j, interior);
    };
    circle_edge(&mut net, jl, Point::xy(-c, T::zero()), T::zero());
    circle_edge(&mut net, jr, Point::xy(c, T::zero()), T::PI());
    let a = net.vertex(jl).position.clone();
    let b = net.vertex(jr).position.clone();
    net.add_edge(jl, jr, straight_interior(&a, &b, h));
    net
}

/// Regular triod whose arms are rotated copies of `σ ↦ (σ, amp sin(πσ))`, `σ ∈ [0, 1]`,
/// sampled at `n` segments per arm.
pub fn curved_triod<T: Scalar>(amp: T, n: usize) -> Network<T> {
    let mut net = Network::new(2);
    let j = net.add_vertex(Point::zeros(2));
    for k in 0..3 {
        let rot = T::two() * T::PI() * T::from_usize_lossy(k) / T::lit(3.0);
        let (s, c) = rot.sin_cos();
        let place = |x: T, y: T| Point::xy(c * x - s * y, s * x + c * y);
        let pts: Vec<Point<T>> = (1..n)
            .map(|i| {
                let sig = T::from_usize_lossy(i) / T::from_usize_lossy(n);
                place(sig, amp * (T::PI() * sig).sin())
            })
            .collect();
        let v = net.add_vertex(place(T::one(), T::zero()));
        net.add_edge(j, v, pts);
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{validate, Tolerances};

    #[test]
    fn builders_validate() {
        let tol = Tolerances::default();
        let lens: Network<f64> = lens(0.5, 1.0, 0.02);
        let rep = validate(&lens, &tol);
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert!(rep.junctions.iter().all(|j| j.tangent_sum < 0.05));
        let th: Network<f64> = theta(0.05);
        let rep = validate(&th, &tol);
        assert!(rep.is_valid());
        assert!(rep.junctions.iter().all(|j| j.tangent_sum < 0.05));
        let ct: Network<f64> = curved_triod(0.2, 20);
        let rep = validate(&ct, &tol);
        assert!(rep.is_valid() && rep.junctions[0].tangent_sum < 1e-12);
        let tc: Network<f64> = two_circles_and_segment(0.5, 1.5, 0.05);
        assert!(validate(&tc, &tol).is_valid());
    }

    #[test]
    fn lens_time_value() {
        assert!((lens_collapse_time(0.5f64) - 0.09775).abs() < 1e-4);
    }
}
