//! Curve networks stored as polylines (front tracking) with endpoint/junction incidence.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rotation};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Which end of an edge touches a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EndFlag {
    Start,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeEnds {
    Open { start: VertexId, end: VertexId },
    /// Periodic polyline without vertices; the last node connects back to the first.
    Closed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub nodes: Vec<Point<T>>,
    pub ends: EdgeEnds,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// Valence one: a fixed boundary endpoint.
    Fixed,
    /// Valence three.
    Junction,
    /// Any other valence; rejected by the flow, tolerated by the multiplicity code.
    Other(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<T> {
    pub position: Point<T>,
    pub incident: Vec<(EdgeId, EndFlag)>,
}

impl<T> Vertex<T> {
    pub fn valence(&self) -> usize {
        self.incident.len()
    }

    pub fn kind(&self) -> VertexKind {
        match self.incident.len() {
            1 => VertexKind::Fixed,
            3 => VertexKind::Junction,
            n => VertexKind::Other(n),
        }
    }
}

/// Reference to the segment between nodes `index` and `index + 1` (cyclically for
/// closed edges) of `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentRef {
    pub edge: EdgeId,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    dim: usize,
    pub edges: Vec<Edge<T>>,
    pub vertices: Vec<Vertex<T>>,
}

impl<T: Scalar> Edge<T> {
    pub fn is_closed(&self) -> bool {
        matches!(self.ends, EdgeEnds::Closed)
    }

    pub fn segment_count(&self) -> usize {
        if self.is_closed() {
            self.nodes.len()
        } else {
            self.nodes.len().saturating_sub(1)
        }
    }

    pub fn segment(&self, i: usize) -> (&Point<T>, &Point<T>) {
        let j = (i + 1) % self.nodes.len();
        (&self.nodes[i], &self.nodes[j])
    }

    pub fn length(&self) -> T {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.dist(b)
            })
            .sum()
    }

    /// Indices of nodes that carry a three-point curvature stencil.
    pub fn interior_range(&self) -> std::ops::Range<usize> {
        if self.is_closed() {
            0..self.nodes.len()
        } else {
            1..self.nodes.len().saturating_sub(1)
        }
    }

    /// Neighbour indices (prev, next) of an interior node.
    pub fn neighbours(&self, i: usize) -> (usize, usize) {
        let n = self.nodes.len();
        if self.is_closed() {
            ((i + n - 1) % n, (i + 1) % n)
        } else {
            (i - 1, i + 1)
        }
    }

    pub fn min_spacing(&self) -> T {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.dist(b)
            })
            .fold(T::infinity(), T::min)
    }

    pub fn max_spacing(&self) -> T {
        (0..self.segment_count())
            .map(|i| {
                let (a, b) = self.segment(i);
                a.dist(b)
            })
            .fold(T::zero(), T::max)
    }

    /// Node adjacent to the given end, i.e. the first interior node seen from that end.
    pub fn node_next_to(&self, end: EndFlag) -> &Point<T> {
        match end {
            EndFlag::Start => &self.nodes[1],
            EndFlag::End => &self.nodes[self.nodes.len() - 2],
        }
    }

    pub fn end_node(&self, end: EndFlag) -> &Point<T> {
        match end {
            EndFlag::Start => &self.nodes[0],
            EndFlag::End => &self.nodes[self.nodes.len() - 1],
        }
    }

    /// Unit tangent leaving the given end into the edge.
    pub fn outward_tangent(&self, end: EndFlag) -> Option<Point<T>> {
        (self.node_next_to(end) - self.end_node(end)).normalized()
    }
}

impl<T: Scalar> Network<T> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "ambient dimension must be at least 2");
        Network {
            dim,
            edges: Vec::new(),
            vertices: Vec::new(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_vertex(&mut self, position: Point<T>) -> VertexId {
        assert_eq!(position.dim(), self.dim);
        self.vertices.push(Vertex {
            position,
            incident: Vec::new(),
        });
        VertexId(self.vertices.len() - 1)
    }

    /// Adds an open edge; `interior` are the nodes strictly between the two vertices.
    pub fn add_edge(&mut self, start: VertexId, end: VertexId, interior: Vec<Point<T>>) -> EdgeId {
        let mut nodes = Vec::with_capacity(interior.len() + 2);
        nodes.push(self.vertices[start.0].position.clone());
        nodes.extend(interior);
        nodes.push(self.vertices[end.0].position.clone());
        self.push_open_edge(start, end, nodes)
    }

    /// Adds an open edge from a full node list whose end nodes must coincide with the
    /// vertex positions up to `tol`; the end nodes are then snapped exactly.
    pub fn add_edge_with_nodes(
        &mut self,
        start: VertexId,
        end: VertexId,
        mut nodes: Vec<Point<T>>,
        tol: T,
    ) -> Result<EdgeId> {
        if nodes.len() < 2 {
            return Err(Error::InvalidNetwork("an open edge needs at least two nodes".into()));
        }
        if start.0 >= self.vertices.len() || end.0 >= self.vertices.len() {
            return Err(Error::InvalidNetwork("edge references a missing vertex".into()));
        }
        let last = nodes.len() - 1;
        if nodes[0].dist(&self.vertices[start.0].position) > tol
            || nodes[last].dist(&self.vertices[end.0].position) > tol
        {
            return Err(Error::InvalidNetwork(
                "edge end nodes do not coincide with their vertices".into(),
            ));
        }
        nodes[0] = self.vertices[start.0].position.clone();
        nodes[last] = self.vertices[end.0].position.clone();
        Ok(self.push_open_edge(start, end, nodes))
    }

    fn push_open_edge(&mut self, start: VertexId, end: VertexId, nodes: Vec<Point<T>>) -> EdgeId {
        let id = EdgeId(self.edges.len());
        self.edges.push(Edge {
            nodes,
            ends: EdgeEnds::Open { start, end },
        });
        self.vertices[start.0].incident.push((id, EndFlag::Start));
        self.vertices[end.0].incident.push((id, EndFlag::End));
        id
    }

    pub fn add_closed_loop(&mut self, nodes: Vec<Point<T>>) -> EdgeId {
        assert!(nodes.len() >= 3, "closed loop needs at least three nodes");
        self.edges.push(Edge {
            nodes,
            ends: EdgeEnds::Closed,
        });
        EdgeId(self.edges.len() - 1)
    }

    pub fn edge(&self, id: EdgeId) -> &Edge<T> {
        &self.edges[id.0]
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex<T> {
        &self.vertices[id.0]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn junctions(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids()
            .filter(move |v| self.vertices[v.0].kind() == VertexKind::Junction)
    }

    /// Moves a vertex and the coincident end nodes of its incident edges.
    pub fn set_vertex_position(&mut self, v: VertexId, p: Point<T>) {
        let incident = self.vertices[v.0].incident.clone();
        for (e, flag) in incident {
            let edge = &mut self.edges[e.0];
            let idx = match flag {
                EndFlag::Start => 0,
                EndFlag::End => edge.nodes.len() - 1,
            };
            edge.nodes[idx] = p.clone();
        }
        self.vertices[v.0].position = p;
    }

    pub fn total_length(&self) -> T {
        self.edges.iter().map(|e| e.length()).sum()
    }

    pub fn node_count(&self) -> usize {
        self.edges.iter().map(|e| e.nodes.len()).sum()
    }

    pub fn segments(&self) -> impl Iterator<Item = (SegmentRef, &Point<T>, &Point<T>)> + '_ {
        self.edges.iter().enumerate().flat_map(|(ei, e)| {
            (0..e.segment_count()).map(move |i| {
                let (a, b) = e.segment(i);
                (
                    SegmentRef {
                        edge: EdgeId(ei),
                        index: i,
                    },
                    a,
                    b,
                )
            })
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Point<T>> + '_ {
        self.edges.iter().flat_map(|e| e.nodes.iter())
    }

    /// Axis-aligned bounding box (min, max) over all nodes and vertices.
    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        let mut lo = Point::new(&vec![T::infinity(); self.dim]);
        let mut hi = Point::new(&vec![T::neg_infinity(); self.dim]);
        let all = self.nodes().chain(self.vertices.iter().map(|v| &v.position));
        for p in all {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> T {
        let (lo, hi) = self.bounding_box();
        if lo[0].is_finite() {
            lo.dist(&hi)
        } else {
            T::zero()
        }
    }

    pub fn min_spacing(&self) -> T {
        self.edges
            .iter()
            .map(|e| e.min_spacing())
            .fold(T::infinity(), T::min)
    }

    pub fn max_spacing(&self) -> T {
        self.edges.iter().map(|e| e.max_spacing()).fold(T::zero(), T::max)
    }

    /// Unit tangents leaving a vertex along each incident edge.
    pub fn vertex_tangents(&self, v: VertexId) -> Vec<Option<Point<T>>> {
        self.vertices[v.0]
            .incident
            .iter()
            .map(|(e, flag)| self.edges[e.0].outward_tangent(*flag))
            .collect()
    }

    /// Applies `f` to every node and vertex position.
    pub fn map_points(&self, f: impl Fn(&Point<T>) -> Point<T>) -> Self {
        Network {
            dim: self.dim,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    nodes: e.nodes.iter().map(&f).collect(),
                    ends: e.ends,
                })
                .collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| Vertex {
                    position: f(&v.position),
                    incident: v.incident.clone(),
                })
                .collect(),
        }
    }

    pub fn scaled(&self, lambda: T) -> Self {
        self.map_points(|p| p.scale(lambda))
    }

    pub fn rotated(&self, r: &Rotation<T>) -> Self {
        self.map_points(|p| r.apply(p))
    }

    pub fn translated(&self, v: &Point<T>) -> Self {
        self.map_points(|p| p + v)
    }

    pub fn convert<U: Scalar>(&self) -> Network<U> {
        Network {
            dim: self.dim,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    nodes: e.nodes.iter().map(|p| p.convert()).collect(),
                    ends: e.ends,
                })
                .collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| Vertex {
                    position: v.position.convert(),
                    incident: v.incident.clone(),
                })
                .collect(),
        }
    }

    /// Smallest distance between two distinct junction vertices (infinite if fewer than two).
    pub fn min_junction_distance(&self) -> T {
        let js: Vec<_> = self.junctions().collect();
        let mut best = T::infinity();
        for (i, a) in js.iter().enumerate() {
            for b in &js[i + 1..] {
                best = best.min(self.vertices[a.0].position.dist(&self.vertices[b.0].position));
            }
        }
        best
    }

    /// Removes vertices without incidences and renumbers ids.
    pub fn compact(&mut self) {
        let mut remap = vec![None; self.vertices.len()];
        let mut kept = Vec::new();
        for (i, v) in self.vertices.drain(..).enumerate() {
            if !v.incident.is_empty() {
                remap[i] = Some(VertexId(kept.len()));
                kept.push(v);
            }
        }
        self.vertices = kept;
        for e in &mut self.edges {
            if let EdgeEnds::Open { start, end } = &mut e.ends {
                *start = remap[start.0].expect("edge references removed vertex");
                *end = remap[end.0].expect("edge references removed vertex");
            }
        }
    }
}

/// Tolerances for the discrete geometric checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Embeddedness tolerance relative to the network diameter.
    pub embed_rel: T,
    /// Minimum angle between distinct tangents at a junction (radians).
    pub angle: T,
    /// Bound on |sum of unit tangents| for a regular junction.
    pub reg: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            embed_rel: T::lit(1e-9),
            angle: T::lit(1e-3),
            reg: T::lit(1e-6),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    /// Two non-adjacent segments are closer than the embeddedness tolerance.
    Embedding {
        a: SegmentRef,
        b: SegmentRef,
        distance: T,
    },
    Valence { vertex: VertexId, valence: usize },
    /// Two tangents at a junction are closer in angle than the angle tolerance.
    CoincidentTangents {
        vertex: VertexId,
        edges: (EdgeId, EdgeId),
        angle: T,
    },
    DegenerateEdge { edge: EdgeId, reason: String },
    Reference(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JunctionStatus<T> {
    pub vertex: VertexId,
    /// Pairwise angles between the incident unit tangents (radians).
    pub angles: Vec<T>,
    pub tangent_sum: T,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<T> {
    pub violations: Vec<Violation<T>>,
    pub junctions: Vec<JunctionStatus<T>>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn all_regular(&self) -> bool {
        self.junctions.iter().all(|j| j.regular)
    }

    pub fn embedding_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Embedding { .. }))
            .count()
    }
}

/// Status of the three unit tangents at a junction.
pub fn junction_status<T: Scalar>(net: &Network<T>, v: VertexId, reg_tol: T) -> Option<JunctionStatus<T>> {
    let tangents: Option<Vec<Point<T>>> = net.vertex_tangents(v).into_iter().collect();
    let tangents = tangents?;
    let mut sum = Point::zeros(net.dim());
    for t in &tangents {
        sum = &sum + t;
    }
    let mut angles = Vec::new();
    for i in 0..tangents.len() {
        for j in i + 1..tangents.len() {
            let c = tangents[i].dot(&tangents[j]).max(-T::one()).min(T::one());
            angles.push(c.acos());
        }
    }
    let tangent_sum = sum.norm();
    Some(JunctionStatus {
        vertex: v,
        angles,
        tangent_sum,
        regular: tangent_sum < reg_tol,
    })
}

fn segments_adjacent<T: Scalar>(net: &Network<T>, a: SegmentRef, b: SegmentRef) -> bool {
    if a.edge == b.edge {
        let e = net.edge(a.edge);
        let m = e.segment_count();
        let (i, j) = (a.index.min(b.index), a.index.max(b.index));
        if j == i + 1 || i == j {
            return true;
        }
        if e.is_closed() && i == 0 && j == m - 1 {
            return true;
        }
        // both ends on the same vertex (loop edge)
        if let EdgeEnds::Open { start, end } = e.ends {
            if start == end && i == 0 && j == m - 1 {
                return true;
            }
        }
        return false;
    }
    // Segments of different edges touch only through a shared vertex.
    let ends_of = |s: SegmentRef| -> Vec<VertexId> {
        let e = net.edge(s.edge);
        let mut out = Vec::new();
        if let EdgeEnds::Open { start, end } = e.ends {
            if s.index == 0 {
                out.push(start);
            }
            if s.index + 1 == e.segment_count() {
                out.push(end);
            }
        }
        out
    };
    let ea = ends_of(a);
    ends_of(b).iter().any(|v| ea.contains(v))
}

/// Pairs of non-adjacent segments closer than `tol`, found by sweep-and-prune on the
/// first coordinate.
pub fn close_segment_pairs<T: Scalar>(net: &Network<T>, tol: T) -> Vec<(SegmentRef, SegmentRef, T)> {
    let d = net.dim();
    let mut segs: Vec<(SegmentRef, Point<T>, Point<T>, Point<T>, Point<T>)> = net
        .segments()
        .map(|(r, a, b)| {
            let mut lo = a.clone();
            let mut hi = a.clone();
            for k in 0..d {
                lo[k] = a[k].min(b[k]) - tol;
                hi[k] = a[k].max(b[k]) + tol;
            }
            (r, a.clone(), b.clone(), lo, hi)
        })
        .collect();
    segs.sort_by(|x, y| x.3[0].partial_cmp(&y.3[0]).unwrap_or(std::cmp::Ordering::Equal));
    let tol_sq = tol * tol;
    let mut out = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for i in 0..segs.len() {
        let lo0 = segs[i].3[0];
        active.retain(|&j| segs[j].4[0] >= lo0);
        for &j in &active {
            let overlap = (1..d).all(|k| segs[i].3[k] <= segs[j].4[k] && segs[j].3[k] <= segs[i].4[k]);
            if !overlap || segments_adjacent(net, segs[i].0, segs[j].0) {
                continue;
            }
            let dsq = crate::geometry::segment_segment_dist_sq(&segs[i].1, &segs[i].2, &segs[j].1, &segs[j].2);
            if dsq < tol_sq {
                let (a, b) = if segs[i].0 < segs[j].0 {
                    (segs[i].0, segs[j].0)
                } else {
                    (segs[j].0, segs[i].0)
                };
                out.push((a, b, dsq.sqrt()));
            }
        }
        active.push(i);
    }
    out.sort_by_key(|x| (x.0, x.1));
    out
}

/// Structural and geometric checks of a network.
pub fn validate<T: Scalar>(net: &Network<T>, tol: &Tolerances<T>) -> ValidationReport<T> {
    let mut violations = Vec::new();
    let diam = net.diameter();
    let embed_tol = tol.embed_rel * diam.max(T::min_positive_value());

    // references
    for (ei, e) in net.edges.iter().enumerate() {
        let id = EdgeId(ei);
        match e.ends {
            EdgeEnds::Open { start, end } => {
                if e.nodes.len() < 2 {
                    violations.push(Violation::DegenerateEdge {
                        edge: id,
                        reason: "fewer than two nodes".into(),
                    });
                    continue;
                }
                for (v, flag) in [(start, EndFlag::Start), (end, EndFlag::End)] {
                    match net.vertices.get(v.0) {
                        None => violations.push(Violation::Reference(format!("{id} references missing {v}"))),
                        Some(vx) => {
                            if !vx.incident.contains(&(id, flag)) {
                                violations.push(Violation::Reference(format!("{v} does not list {id}")));
                            }
                            if e.end_node(flag).dist(&vx.position) > embed_tol {
                                violations.push(Violation::Reference(format!(
                                    "{id} end node does not coincide with {v}"
                                )));
                            }
                        }
                    }
                }
            }
            EdgeEnds::Closed => {
                if e.nodes.len() < 3 {
                    violations.push(Violation::DegenerateEdge {
                        edge: id,
                        reason: "closed loop with fewer than three nodes".into(),
                    });
                    continue;
                }
            }
        }
        if !e.nodes.iter().all(|p| p.is_finite() && p.dim() == net.dim()) {
            violations.push(Violation::DegenerateEdge {
                edge: id,
                reason: "non-finite or wrong-dimension node".into(),
            });
            continue;
        }
        for i in 0..e.segment_count() {
            let (a, b) = e.segment(i);
            if a.dist(b) <= T::zero() {
                violations.push(Violation::DegenerateEdge {
                    edge: id,
                    reason: format!("consecutive nodes {i} and {} coincide", (i + 1) % e.nodes.len()),
                });
            }
        }
    }
    for (vi, v) in net.vertices.iter().enumerate() {
        for (e, flag) in &v.incident {
            let ok = net.edges.get(e.0).is_some_and(|edge| match (edge.ends, flag) {
                (EdgeEnds::Open { start, .. }, EndFlag::Start) => start.0 == vi,
                (EdgeEnds::Open { end, .. }, EndFlag::End) => end.0 == vi,
                _ => false,
            });
            if !ok {
                violations.push(Violation::Reference(format!("v{vi} lists inconsistent incidence {e}")));
            }
        }
        match v.kind() {
            VertexKind::Fixed | VertexKind::Junction => {}
            VertexKind::Other(n) => violations.push(Violation::Valence {
                vertex: VertexId(vi),
                valence: n,
            }),
        }
    }
    if violations
        .iter()
        .any(|v| matches!(v, Violation::Reference(_) | Violation::DegenerateEdge { .. }))
    {
        return ValidationReport {
            violations,
            junctions: Vec::new(),
        };
    }

    for (a, b, distance) in close_segment_pairs(net, embed_tol) {
        violations.push(Violation::Embedding { a, b, distance });
    }

    let mut junctions = Vec::new();
    for v in net.junctions() {
        let inc = &net.vertices[v.0].incident;
        let tangents = net.vertex_tangents(v);
        for i in 0..3 {
            for j in i + 1..3 {
                if let (Some(ti), Some(tj)) = (&tangents[i], &tangents[j]) {
                    let ang = ti.dot(tj).max(-T::one()).min(T::one()).acos();
                    if ang < tol.angle {
                        violations.push(Violation::CoincidentTangents {
                            vertex: v,
                            edges: (inc[i].0, inc[j].0),
                            angle: ang,
                        });
                    }
                }
            }
        }
        if let Some(status) = junction_status(net, v, tol.reg) {
            junctions.push(status);
        }
    }
    ValidationReport { violations, junctions }
}

/// Three straight rays from the origin at mutual 120 degrees in the (e1, e2)-plane,
/// mapped by `rotation`. Vertex 0 is the junction; vertices 1..=3 are the fixed ends.
pub fn make_y<T: Scalar>(dim: usize, rotation: &Rotation<T>, ray_length: T, nodes_per_ray: usize) -> Network<T> {
    assert!(dim >= 2 && rotation.dim() == dim);
    assert!(nodes_per_ray >= 2);
    let mut net = Network::new(dim);
    let j = net.add_vertex(Point::zeros(dim));
    let third = T::lit(2.0 / 3.0) * T::PI();
    for k in 0..3 {
        let angle = third * T::from_usize_lossy(k);
        let mut dir = Point::zeros(dim);
        dir[0] = angle.cos();
        dir[1] = angle.sin();
        let dir = rotation.apply(&dir);
        let end = net.add_vertex(dir.scale(ray_length));
        let n = nodes_per_ray - 1;
        let interior = (1..n)
            .map(|i| dir.scale(ray_length * T::from_usize_lossy(i) / T::from_usize_lossy(n)))
            .collect();
        net.add_edge(j, end, interior);
    }
    net
}

fn cumulative_arclength<T: Scalar>(nodes: &[Point<T>], closed: bool) -> Vec<T> {
    let mut s = Vec::with_capacity(nodes.len() + 1);
    s.push(T::zero());
    let m = if closed { nodes.len() } else { nodes.len() - 1 };
    for i in 0..m {
        let next = &nodes[(i + 1) % nodes.len()];
        let prev = *s.last().unwrap();
        s.push(prev + nodes[i].dist(next));
    }
    s
}

/// Point at arclength `target` along a polyline with cumulative lengths `cum`.
fn point_at<T: Scalar>(nodes: &[Point<T>], cum: &[T], target: T, cursor: &mut usize) -> Point<T> {
    let n = nodes.len();
    while *cursor + 2 < cum.len() && cum[*cursor + 1] < target {
        *cursor += 1;
    }
    let i = *cursor;
    let seg = cum[i + 1] - cum[i];
    let w = if seg > T::zero() {
        ((target - cum[i]) / seg).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    nodes[i].lerp(&nodes[(i + 1) % n], w)
}

/// Re-samples a polyline so that nodes are equidistributed in arclength with spacing
/// close to `target_h`. Open edges keep both end nodes exactly; edges shorter than
/// `target_h` become two-node segments. Closed loops keep node 0 and at least three nodes.
pub fn resample<T: Scalar>(edge: &Edge<T>, target_h: T) -> Result<Edge<T>> {
    if !(target_h > T::zero()) {
        return Err(Error::param("target_h", "must be positive"));
    }
    let h = vec![target_h; edge.nodes.len()];
    Ok(resample_graded(edge, &h))
}

/// Re-samples with a spatially varying target spacing given at the input nodes
/// (linearly interpolated in arclength). Node density is proportional to 1/h.
pub fn resample_graded<T: Scalar>(edge: &Edge<T>, local_h: &[T]) -> Edge<T> {
    let closed = edge.is_closed();
    let nodes = &edge.nodes;
    assert_eq!(local_h.len(), nodes.len());
    let cum = cumulative_arclength(nodes, closed);
    let m = cum.len() - 1;
    // integrated node density
    let mut phi = Vec::with_capacity(m + 1);
    phi.push(T::zero());
    for i in 0..m {
        let h0 = local_h[i];
        let h1 = local_h[(i + 1) % nodes.len()];
        let seg = cum[i + 1] - cum[i];
        let prev = *phi.last().unwrap();
        phi.push(prev + seg * T::half() * (T::one() / h0 + T::one() / h1));
    }
    let total = phi[m];
    let min_segments = if closed { 3 } else { 1 };
    let n = total.round().to_usize().unwrap_or(min_segments).max(min_segments);
    let mut out = Vec::with_capacity(n + 1);
    out.push(nodes[0].clone());
    let mut cursor = 0usize;
    let mut pcursor = 0usize;
    for k in 1..n {
        let target_phi = total * T::from_usize_lossy(k) / T::from_usize_lossy(n);
        while pcursor + 2 < phi.len() && phi[pcursor + 1] < target_phi {
            pcursor += 1;
        }
        let i = pcursor;
        let dphi = phi[i + 1] - phi[i];
        let w = if dphi > T::zero() {
            ((target_phi - phi[i]) / dphi).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let s = cum[i] + w * (cum[i + 1] - cum[i]);
        out.push(point_at(nodes, &cum, s, &mut cursor));
    }
    if !closed {
        out.push(nodes[nodes.len() - 1].clone());
    }
    Edge {
        nodes: out,
        ends: edge.ends,
    }
}

/// Three-point curvature vector 2 (u+ - u-) / (d+ + d-) from unit chords u and chord
/// lengths d on either side of `cur`.
pub fn curvature_vector<T: Scalar>(prev: &Point<T>, cur: &Point<T>, next: &Point<T>) -> Result<Point<T>> {
    let fwd = next - cur;
    let bwd = cur - prev;
    let dp = fwd.norm();
    let dm = bwd.norm();
    if !(dp > T::zero()) || !(dm > T::zero()) {
        return Err(Error::Degenerate("zero-length chord in curvature stencil".into()));
    }
    let up = fwd.scale(T::one() / dp);
    let um = bwd.scale(T::one() / dm);
    Ok((&up - &um).scale(T::two() / (dp + dm)))
}

/// Discrete curvature vector at an interior node of `edge`.
pub fn discrete_curvature<T: Scalar>(edge: &Edge<T>, index: usize) -> Result<Point<T>> {
    if !edge.interior_range().contains(&index) {
        return Err(Error::param("index", format!("node {index} is not interior")));
    }
    let (p, n) = edge.neighbours(index);
    curvature_vector(&edge.nodes[p], &edge.nodes[index], &edge.nodes[n])
}

/// Largest discrete curvature magnitude over all interior nodes (sup |A|).
pub fn max_curvature<T: Scalar>(net: &Network<T>) -> T {
    let mut best = T::zero();
    for e in &net.edges {
        for i in e.interior_range() {
            if let Ok(k) = discrete_curvature(e, i) {
                best = best.max(k.norm());
            }
        }
    }
    best
}

/// Largest deviation (radians) of any junction angle from 120 degrees.
pub fn max_junction_angle_deviation<T: Scalar>(net: &Network<T>) -> T {
    let target = T::lit(2.0 / 3.0) * T::PI();
    let mut worst = T::zero();
    for v in net.junctions() {
        if let Some(s) = junction_status(net, v, T::zero()) {
            for a in s.angles {
                worst = worst.max((a - target).abs());
            }
        }
    }
    worst
}

/// Regular N-gon of radius `r` about `centre` in the (e1, e2)-plane.
pub fn circle_loop<T: Scalar>(dim: usize, centre: &Point<T>, r: T, n: usize) -> Vec<Point<T>> {
    (0..n)
        .map(|i| {
            let th = T::two() * T::PI() * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let mut p = centre.clone();
            p[0] += r * th.cos();
            p[1] += r * th.sin();
            debug_assert_eq!(p.dim(), dim);
            p
        })
        .collect()
}
