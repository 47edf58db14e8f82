//! Distances between networks and points, accelerated by a uniform segment grid.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::geometry::{point_segment_dist_sq, Point};
use crate::network::Network;
use crate::scalar::Scalar;

type CellKey = SmallVec<[i64; 3]>;

/// Segments of a network bucketed into cubic cells of side `cell`; a segment is
/// registered in every cell its bounding box touches.
pub struct SegmentGrid<T> {
    cell: T,
    segments: Vec<(Point<T>, Point<T>)>,
    buckets: HashMap<CellKey, Vec<usize>>,
}

impl<T: Scalar> SegmentGrid<T> {
    pub fn new(net: &Network<T>) -> Self {
        let segments: Vec<_> = net.segments().map(|(_, a, b)| (a.clone(), b.clone())).collect();
        let mean = if segments.is_empty() {
            T::one()
        } else {
            segments.iter().map(|(a, b)| a.dist(b)).sum::<T>() / T::from_usize_lossy(segments.len())
        };
        let cell = if mean > T::zero() { mean } else { T::one() };
        let mut buckets: HashMap<CellKey, Vec<usize>> = HashMap::new();
        for (i, (a, b)) in segments.iter().enumerate() {
            let lo: CellKey = (0..a.dim()).map(|k| Self::key(a[k].min(b[k]), cell)).collect();
            let hi: CellKey = (0..a.dim()).map(|k| Self::key(a[k].max(b[k]), cell)).collect();
            let mut cur = lo.clone();
            loop {
                buckets.entry(cur.clone()).or_default().push(i);
                let mut k = 0;
                loop {
                    if k == cur.len() {
                        break;
                    }
                    if cur[k] < hi[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = lo[k];
                    k += 1;
                }
                if k == cur.len() {
                    break;
                }
            }
        }
        SegmentGrid {
            cell,
            segments,
            buckets,
        }
    }

    fn key(x: T, cell: T) -> i64 {
        (x / cell).floor().to_i64().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Distance from `p` to the nearest segment (infinite for an empty network).
    pub fn distance(&self, p: &Point<T>) -> T {
        if self.segments.is_empty() {
            return T::infinity();
        }
        let centre: CellKey = (0..p.dim()).map(|k| Self::key(p[k], self.cell)).collect();
        let mut best = T::infinity();
        let d = p.dim();
        let count = 3usize.pow(d as u32);
        for code in 0..count {
            let mut c = centre.clone();
            let mut rem = code;
            for slot in c.iter_mut() {
                *slot += (rem % 3) as i64 - 1;
                rem /= 3;
            }
            if let Some(list) = self.buckets.get(&c) {
                for &i in list {
                    let (a, b) = &self.segments[i];
                    best = best.min(point_segment_dist_sq(p, a, b).0);
                }
            }
        }
        // Any segment within one cell side of p is registered in the neighbourhood.
        if best <= self.cell * self.cell {
            return best.sqrt();
        }
        self.segments
            .iter()
            .map(|(a, b)| point_segment_dist_sq(p, a, b).0)
            .fold(T::infinity(), T::min)
            .sqrt()
    }
}

/// Distance from a point to the network's polylines.
pub fn point_network_distance<T: Scalar>(p: &Point<T>, net: &Network<T>) -> T {
    net.segments()
        .map(|(_, a, b)| point_segment_dist_sq(p, a, b).0)
        .fold(T::infinity(), T::min)
        .sqrt()
}

/// Sup over nodes of `a` of the distance to `b`, with each segment of `a` also
/// sampled at `extra` interior points.
pub fn directed_hausdorff<T: Scalar>(a: &Network<T>, b: &Network<T>, extra: usize) -> T {
    let grid = SegmentGrid::new(b);
    let mut worst = T::zero();
    for (_, p, q) in a.segments() {
        for i in 0..=extra {
            let w = T::from_usize_lossy(i) / T::from_usize_lossy(extra + 1);
            worst = worst.max(grid.distance(&p.lerp(q, w)));
        }
    }
    for v in &a.vertices {
        worst = worst.max(grid.distance(&v.position));
    }
    worst
}

/// Symmetric Hausdorff distance between the polyline sets of two networks, evaluated at
/// nodes and segment midpoints of each.
pub fn hausdorff<T: Scalar>(a: &Network<T>, b: &Network<T>) -> T {
    directed_hausdorff(a, b, 1).max(directed_hausdorff(b, a, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::circle_loop;

    #[test]
    fn grid_matches_brute_force() {
        let mut net = Network::new(2);
        net.add_closed_loop(circle_loop(2, &Point::xy(0.0, 0.0), 1.0, 40));
        let grid = SegmentGrid::new(&net);
        for i in 0..50 {
            let p = Point::xy(-2.0 + 0.08 * i as f64, 0.3 - 0.01 * i as f64);
            let a = grid.distance(&p);
            let b = point_network_distance(&p, &net);
            assert!((a - b).abs() < 1e-14, "{a} {b}");
        }
    }

    #[test]
    fn hausdorff_of_concentric_circles() {
        let mut a = Network::new(2);
        a.add_closed_loop(circle_loop(2, &Point::xy(0.0, 0.0), 1.0, 400));
        let mut b = Network::new(2);
        b.add_closed_loop(circle_loop(2, &Point::xy(0.0, 0.0), 1.1, 400));
        let d = hausdorff(&a, &b);
        assert!((d - 0.1f64).abs() < 1e-3, "{d}");
        assert!(hausdorff(&a, &a) < 1e-15);
    }
}
