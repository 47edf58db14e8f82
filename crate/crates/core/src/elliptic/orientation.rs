use std::collections::VecDeque;

use crate::network::{EdgeEnds, EdgeId, Network, VertexId, VertexKind};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrientationStatus {
    Consistent,
    /// Odd cycle of edges through junctions; no choice of signs makes every junction a
    /// source or a sink.
    NonOrientable { witness: Vec<EdgeId> },
}

/// Per-edge sign relative to the stored node order. At every junction of a consistent
/// assignment the three edges are all oriented into it or all out of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationAssignment {
    pub signs: Vec<i8>,
    /// Junction colour: `true` for sources.
    pub source: Vec<Option<bool>>,
    pub status: OrientationStatus,
}

impl OrientationAssignment {
    pub fn is_consistent(&self) -> bool {
        self.status == OrientationStatus::Consistent
    }
}

/// Two-colours the junctions (sources and sinks) by breadth-first search; edges run from
/// sources to sinks, and edges without two junction ends take whichever sign their one
/// junction dictates.
pub fn assign_orientation<T: Scalar>(net: &Network<T>) -> OrientationAssignment {
    let nv = net.vertices.len();
    let is_junction = |v: VertexId| net.vertex(v).kind() == VertexKind::Junction;
    let mut colour: Vec<Option<bool>> = vec![None; nv];
    // BFS parent edge, for witness extraction
    let mut parent: Vec<Option<(VertexId, EdgeId)>> = vec![None; nv];
    let mut depth = vec![0usize; nv];
    let mut status = OrientationStatus::Consistent;
    'outer: for root in net.vertex_ids().filter(|&v| is_junction(v)) {
        if colour[root.0].is_some() {
            continue;
        }
        colour[root.0] = Some(true);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let c = colour[v.0].unwrap();
            for &(e, _) in &net.vertex(v).incident {
                let EdgeEnds::Open { start, end } = net.edge(e).ends else { continue };
                let w = if start == v { end } else { start };
                if start == end {
                    status = OrientationStatus::NonOrientable { witness: vec![e] };
                    break 'outer;
                }
                if !is_junction(w) {
                    continue;
                }
                match colour[w.0] {
                    None => {
                        colour[w.0] = Some(!c);
                        parent[w.0] = Some((v, e));
                        depth[w.0] = depth[v.0] + 1;
                        queue.push_back(w);
                    }
                    Some(cw) if cw == c => {
                        status = OrientationStatus::NonOrientable {
                            witness: odd_cycle(&parent, &depth, v, w, e),
                        };
                        break 'outer;
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let signs = net
        .edges
        .iter()
        .map(|edge| match edge.ends {
            EdgeEnds::Closed => 1,
            EdgeEnds::Open { start, end } => {
                // +1 when the stored direction runs source -> sink
                match (colour[start.0], colour[end.0]) {
                    (Some(true), _) | (_, Some(false)) => 1,
                    (Some(false), _) | (_, Some(true)) => -1,
                    (None, None) => 1,
                }
            }
        })
        .collect();
    OrientationAssignment {
        signs,
        source: colour,
        status,
    }
}

fn odd_cycle(
    parent: &[Option<(VertexId, EdgeId)>],
    depth: &[usize],
    mut a: VertexId,
    mut b: VertexId,
    closing: EdgeId,
) -> Vec<EdgeId> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    while depth[a.0] > depth[b.0] {
        let (p, e) = parent[a.0].unwrap();
        left.push(e);
        a = p;
    }
    while depth[b.0] > depth[a.0] {
        let (p, e) = parent[b.0].unwrap();
        right.push(e);
        b = p;
    }
    while a != b {
        let (pa, ea) = parent[a.0].unwrap();
        let (pb, eb) = parent[b.0].unwrap();
        left.push(ea);
        right.push(eb);
        a = pa;
        b = pb;
    }
    right.reverse();
    left.push(closing);
    left.extend(right);
    left
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Rotation};
    use crate::network::{make_y, EndFlag};
    use crate::shapes;

    /// Every junction sees all incident edges pointing in, or all pointing out.
    fn satisfies(net: &Network<f64>, signs: &[i8]) -> bool {
        net.junctions().all(|v| {
            let dirs: Vec<bool> = net
                .vertex(v)
                .incident
                .iter()
                .map(|&(e, flag)| (flag == EndFlag::End) == (signs[e.0] > 0))
                .collect();
            dirs.iter().all(|&d| d == dirs[0])
        })
    }

    #[test]
    fn triod_orientable() {
        let y = make_y(2, &Rotation::identity(2), 1.0, 4);
        let a = assign_orientation(&y);
        assert!(a.is_consistent() && satisfies(&y, &a.signs));
    }

    #[test]
    fn theta_matches_brute_force() {
        let th: Network<f64> = shapes::theta(0.1);
        let brute = (0..8u8).any(|m| {
            let signs: Vec<i8> = (0..3).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
            satisfies(&th, &signs)
        });
        let a = assign_orientation(&th);
        assert_eq!(a.is_consistent(), brute);
        assert!(satisfies(&th, &a.signs));
    }

    #[test]
    fn triangle_of_junctions_is_not() {
        // three junctions in a triangle, each with one leg to a fixed end
        let mut net = Network::new(2);
        let js: Vec<VertexId> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                net.add_vertex(Point::xy(a.cos(), a.sin()))
            })
            .collect();
        for k in 0..3 {
            net.add_edge(js[k], js[(k + 1) % 3], Vec::new());
            let p = net.vertex(js[k]).position.scale(2.0);
            let f = net.add_vertex(p);
            net.add_edge(js[k], f, Vec::new());
        }
        let a = assign_orientation(&net);
        match a.status {
            OrientationStatus::NonOrientable { witness } => assert_eq!(witness.len(), 3),
            _ => panic!("triangle must be non-orientable"),
        }
    }

    #[test]
    fn loop_edge_is_not() {
        let net: Network<f64> = shapes::two_circles_and_segment(0.5, 1.5, 0.1);
        assert!(!assign_orientation(&net).is_consistent());
    }
}
