//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trijunction::geometry::{point_segment_dist_sq, segment_segment_dist_sq, Point};
use trijunction::network::{circle_loop, Network};

/// Random embedded planar network: straight polyline edges between random points in the
/// unit square (no crossings, no near-touching), plus up to two disjoint circles.
/// Vertex valences are arbitrary.
pub fn random_planar_network(seed: u64) -> Network<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let npts = rng.gen_range(3..10);
    let pts: Vec<Point<f64>> = (0..npts)
        .map(|_| Point::xy(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
        .collect();
    let margin = 1e-3;
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for _ in 0..4 * npts {
        let a = rng.gen_range(0..npts);
        let b = rng.gen_range(0..npts);
        if a == b || segs.iter().any(|&(p, q)| (p, q) == (a, b) || (q, p) == (a, b)) {
            continue;
        }
        if pts[a].dist(&pts[b]) < 0.05 {
            continue;
        }
        // clear of every other point
        if (0..npts).any(|k| k != a && k != b && point_segment_dist_sq(&pts[k], &pts[a], &pts[b]).0 < margin * margin) {
            continue;
        }
        let ok = segs.iter().all(|&(p, q)| {
            let shared = [p, q].iter().filter(|&&v| v == a || v == b).count();
            if shared == 0 {
                segment_segment_dist_sq(&pts[a], &pts[b], &pts[p], &pts[q]) > margin * margin
            } else {
                // sharing an endpoint: reject nearly overlapping directions
                let s = if p == a || p == b { p } else { q };
                let o1 = if s == a { b } else { a };
                let o2 = if s == p { q } else { p };
                let u = (&pts[o1] - &pts[s]).normalized().unwrap();
                let v = (&pts[o2] - &pts[s]).normalized().unwrap();
                u.dot(&v) < 1.0 - 1e-4
            }
        });
        if ok {
            segs.push((a, b));
        }
    }
    let mut net = Network::new(2);
    let mut id = vec![None; npts];
    for &(a, b) in &segs {
        for v in [a, b] {
            if id[v].is_none() {
                id[v] = Some(net.add_vertex(pts[v].clone()));
            }
        }
        let n = (pts[a].dist(&pts[b]) / 0.1).ceil() as usize;
        let interior = (1..n).map(|k| pts[a].lerp(&pts[b], k as f64 / n as f64)).collect();
        net.add_edge(id[a].unwrap(), id[b].unwrap(), interior);
    }
    let mut circles: Vec<(Point<f64>, f64)> = Vec::new();
    for _ in 0..rng.gen_range(0..3) {
        let c = Point::xy(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2));
        let r = rng.gen_range(0.03..0.15);
        let clear_of_segments = segs.iter().all(|&(a, b)| {
            let d = point_segment_dist_sq(&c, &pts[a], &pts[b]).0.sqrt();
            // the circle must not meet the segment: either well outside or well inside the
            // inscribed 24-gon
            let inner = 0.99 * r - margin;
            d > r + margin || (pts[a].dist(&c) < inner && pts[b].dist(&c) < inner)
        });
        let clear_of_circles = circles.iter().all(|(c2, r2)| {
            let d = c.dist(c2);
            d > r + r2 + margin || d + r.min(*r2) < 0.99 * r.max(*r2) - margin
        });
        if clear_of_segments && clear_of_circles {
            net.add_closed_loop(circle_loop(2, &c, r, 24));
            circles.push((c, r));
        }
    }
    if net.edges.is_empty() {
        net.add_closed_loop(circle_loop(2, &Point::xy(0.5, 0.5), 0.25, 24));
    }
    net
}
