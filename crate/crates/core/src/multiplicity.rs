//! `Z_2` multiplicities of planar networks. Every edge is labelled by the sum of the two
//! complement regions on its sides; edges whose sides lie in the same region get zero
//! and vanish instantly under the flow.

use std::cmp::Ordering;
use std::fmt;

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{EdgeEnds, EdgeId, EndFlag, Network, VertexId};
use crate::scalar::Scalar;

/// Directed traversal of one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub edge: EdgeId,
    pub forward: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionMap {
    /// Number of regions; region 0 is the unbounded one.
    pub count: usize,
    /// Per edge `(left, right)` with respect to the stored node order.
    pub sides: Vec<(usize, usize)>,
    /// Boundary cycles of the planar subdivision, each with its region.
    pub cycles: Vec<(Vec<HalfEdge>, usize)>,
    pub components: usize,
}

impl RegionMap {
    /// `V - E + F - (1 + C)`; zero for a planar subdivision. Closed loops count as
    /// one vertex and one edge.
    pub fn euler_defect<T: Scalar>(&self, net: &Network<T>) -> i64 {
        let loops = net.edges.iter().filter(|e| e.is_closed()).count();
        let v = (net.vertices.iter().filter(|v| !v.incident.is_empty()).count() + loops) as i64;
        let e = net.edges.len() as i64;
        v - e + self.count as i64 - 1 - self.components as i64
    }
}

/// Element of the region-indexed `Z_2` vector space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement(pub BitVec);

impl GroupElement {
    pub fn zero(regions: usize) -> Self {
        GroupElement(bitvec![0; regions])
    }

    pub fn is_zero(&self) -> bool {
        self.0.not_any()
    }

    /// 1 for nonzero elements, 0 otherwise.
    pub fn norm(&self) -> u8 {
        u8::from(!self.is_zero())
    }

    pub fn add_assign(&mut self, other: &Self) {
        *self.0.as_mut_bitslice() ^= other.0.as_bitslice();
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0.iter().by_vals() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleStatus {
    Cycle,
    /// The incident multiplicities at this vertex do not sum to zero.
    Boundary { vertex: VertexId },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityAssignment {
    pub regions: RegionMap,
    pub per_edge: Vec<GroupElement>,
    pub status: CycleStatus,
    pub vanishing: Vec<EdgeId>,
}

impl MultiplicityAssignment {
    /// One line per edge: id, left and right region, group element, norm; then the verdict.
    pub fn report(&self) -> String {
        let mut s = String::from("edge\tleft\tright\tgroup_element\tnorm\n");
        for (i, g) in self.per_edge.iter().enumerate() {
            let (l, r) = self.regions.sides[i];
            s.push_str(&format!("e{i}\t{l}\t{r}\t{g}\t{}\n", g.norm()));
        }
        match &self.status {
            CycleStatus::Cycle => s.push_str("# cycle-check: pass\n"),
            CycleStatus::Boundary { vertex } => s.push_str(&format!("# cycle-check: fail at {vertex}\n")),
        }
        let v: Vec<String> = self.vanishing.iter().map(|e| e.to_string()).collect();
        s.push_str(&format!("# vanishing: {}\n", v.join(",")));
        s
    }
}

fn half_edge_nodes<T: Scalar>(net: &Network<T>, h: HalfEdge) -> Box<dyn Iterator<Item = &Point<T>> + '_> {
    let nodes = &net.edge(h.edge).nodes;
    if h.forward {
        Box::new(nodes.iter())
    } else {
        Box::new(nodes.iter().rev())
    }
}

fn signed_area<T: Scalar>(net: &Network<T>, cycle: &[HalfEdge]) -> T {
    let mut a = T::zero();
    for &h in cycle {
        let pts: Vec<&Point<T>> = half_edge_nodes(net, h).collect();
        let closed = net.edge(h.edge).is_closed();
        let m = if closed { pts.len() } else { pts.len() - 1 };
        for i in 0..m {
            let p = pts[i];
            let q = pts[(i + 1) % pts.len()];
            a += p[0] * q[1] - q[0] * p[1];
        }
    }
    a * T::half()
}

fn polygon<T: Scalar>(net: &Network<T>, cycle: &[HalfEdge]) -> Vec<Point<T>> {
    let mut out = Vec::new();
    for &h in cycle {
        let pts: Vec<&Point<T>> = half_edge_nodes(net, h).collect();
        let skip_last = !net.edge(h.edge).is_closed();
        let n = if skip_last { pts.len() - 1 } else { pts.len() };
        out.extend(pts[..n].iter().map(|p| (*p).clone()));
    }
    out
}

fn contains<T: Scalar>(poly: &[Point<T>], p: &Point<T>) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn components<T: Scalar>(net: &Network<T>) -> (Vec<usize>, usize) {
    // union-find over edges through shared vertices
    let n = net.edges.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for v in &net.vertices {
        for w in v.incident.windows(2) {
            let a = find(&mut parent, w[0].0 .0);
            let b = find(&mut parent, w[1].0 .0);
            parent[a] = b;
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut comp = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        comp[i] = label[r];
    }
    (comp, count)
}

/// Faces of the planar subdivision by tracing half-edges with the face on the left.
pub fn compute_regions<T: Scalar>(net: &Network<T>) -> Result<RegionMap> {
    if net.dim() != 2 {
        return Err(Error::Dimension { expected: 2, found: net.dim() });
    }
    // outgoing half-edges at each vertex, sorted counter-clockwise
    let mut outgoing: Vec<Vec<(T, HalfEdge)>> = vec![Vec::new(); net.vertices.len()];
    for (vi, v) in net.vertices.iter().enumerate() {
        for &(e, flag) in &v.incident {
            let d = net.edge(e).node_next_to(flag) - &v.position;
            let h = HalfEdge {
                edge: e,
                forward: flag == EndFlag::Start,
            };
            outgoing[vi].push((d[1].atan2(d[0]), h));
        }
        outgoing[vi].sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    }
    let head = |h: HalfEdge| -> Option<VertexId> {
        match net.edge(h.edge).ends {
            EdgeEnds::Open { start, end } => Some(if h.forward { end } else { start }),
            EdgeEnds::Closed => None,
        }
    };
    let twin = |h: HalfEdge| HalfEdge {
        edge: h.edge,
        forward: !h.forward,
    };
    let index = |h: HalfEdge| 2 * h.edge.0 + usize::from(!h.forward);
    let mut visited = vec![false; 2 * net.edges.len()];
    let mut cycles: Vec<Vec<HalfEdge>> = Vec::new();
    for ei in 0..net.edges.len() {
        for forward in [true, false] {
            let start = HalfEdge { edge: EdgeId(ei), forward };
            if visited[index(start)] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut h = start;
            loop {
                visited[index(h)] = true;
                cycle.push(h);
                let Some(v) = head(h) else { break };
                let out = &outgoing[v.0];
                let t = twin(h);
                let k = out
                    .iter()
                    .position(|&(_, o)| o == t)
                    .ok_or_else(|| Error::InvalidNetwork(format!("{v} misses an incidence")))?;
                // next clockwise from the twin keeps the face on the left
                h = out[(k + out.len() - 1) % out.len()].1;
                if h == start {
                    break;
                }
                if visited[index(h)] {
                    return Err(Error::InvalidNetwork("face tracing did not close".into()));
                }
            }
            cycles.push(cycle);
        }
    }
    let (comp_of_edge, n_comp) = components(net);
    // tree-like boundaries have zero area up to rounding
    let area_tol = T::lit(1e-12) * net.diameter() * net.diameter();
    let areas: Vec<T> = cycles
        .iter()
        .map(|c| {
            let a = signed_area(net, c);
            if a.abs() <= area_tol {
                T::zero()
            } else {
                a
            }
        })
        .collect();
    let mut region_of = vec![0usize; cycles.len()];
    let mut count = 1;
    for (i, a) in areas.iter().enumerate() {
        if *a > T::zero() {
            region_of[i] = count;
            count += 1;
        }
    }
    // each outer boundary lies in the smallest bounded face of another component
    let polys: Vec<Option<Vec<Point<T>>>> = cycles
        .iter()
        .zip(&areas)
        .map(|(c, a)| (*a > T::zero()).then(|| polygon(net, c)))
        .collect();
    for (i, c) in cycles.iter().enumerate() {
        if areas[i] > T::zero() {
            continue;
        }
        let comp = comp_of_edge[c[0].edge.0];
        let probe = &net.edge(c[0].edge).nodes[0];
        let mut best: Option<(T, usize)> = None;
        for (j, poly) in polys.iter().enumerate() {
            let Some(poly) = poly else { continue };
            if comp_of_edge[cycles[j][0].edge.0] == comp || !contains(poly, probe) {
                continue;
            }
            if best.is_none_or(|(a, _)| areas[j] < a) {
                best = Some((areas[j], j));
            }
        }
        region_of[i] = best.map_or(0, |(_, j)| region_of[j]);
    }
    let mut sides = vec![(usize::MAX, usize::MAX); net.edges.len()];
    for (ci, c) in cycles.iter().enumerate() {
        for h in c {
            let s = &mut sides[h.edge.0];
            if h.forward {
                s.0 = region_of[ci];
            } else {
                s.1 = region_of[ci];
            }
        }
    }
    Ok(RegionMap {
        count,
        sides,
        cycles: cycles.into_iter().zip(region_of).collect(),
        components: n_comp,
    })
}

/// `[left] + [right]` over `Z_2`.
pub fn edge_multiplicity(edge: EdgeId, regions: &RegionMap) -> GroupElement {
    let mut g = GroupElement::zero(regions.count);
    let (l, r) = regions.sides[edge.0];
    let flip = |g: &mut GroupElement, i: usize| {
        let cur = g.0[i];
        g.0.set(i, !cur);
    };
    flip(&mut g, l);
    flip(&mut g, r);
    g
}

/// Checks that the incident multiplicities sum to zero at every vertex of valence at
/// least two.
pub fn cycle_check<T: Scalar>(per_edge: &[GroupElement], net: &Network<T>) -> CycleStatus {
    for v in net.vertex_ids() {
        let vert = net.vertex(v);
        if vert.valence() < 2 {
            continue;
        }
        let Some(first) = per_edge.first() else { break };
        let mut sum = GroupElement::zero(first.0.len());
        for (e, _) in &vert.incident {
            sum.add_assign(&per_edge[e.0]);
        }
        if !sum.is_zero() {
            return CycleStatus::Boundary { vertex: v };
        }
    }
    CycleStatus::Cycle
}

/// Regions, per-edge multiplicities, cycle check and vanishing edges in one pass.
pub fn assign_multiplicities<T: Scalar>(net: &Network<T>) -> Result<MultiplicityAssignment> {
    let regions = compute_regions(net)?;
    let per_edge: Vec<GroupElement> = net.edge_ids().map(|e| edge_multiplicity(e, &regions)).collect();
    let status = cycle_check(&per_edge, net);
    let vanishing = net.edge_ids().filter(|e| per_edge[e.0].is_zero()).collect();
    Ok(MultiplicityAssignment {
        regions,
        per_edge,
        status,
        vanishing,
    })
}

/// `Σ_i ∫_{edge i} φ |g_i| dH^1` by the trapezoid rule on the nodes.
pub fn weighted_measure<T: Scalar>(
    net: &Network<T>,
    assignment: &MultiplicityAssignment,
    phi: impl Fn(&Point<T>) -> T,
) -> T {
    let mut total = T::zero();
    for (i, e) in net.edges.iter().enumerate() {
        if assignment.per_edge[i].is_zero() {
            continue;
        }
        let vals: Vec<T> = e.nodes.iter().map(&phi).collect();
        let n = e.nodes.len();
        for k in 0..e.segment_count() {
            let j = (k + 1) % n;
            total += T::half() * (vals[k] + vals[j]) * e.nodes[k].dist(&e.nodes[j]);
        }
    }
    total
}

/// Removes zero-multiplicity edges and merges the resulting valence-two vertices into
/// smooth edges. Isolated vertices are dropped.
pub fn drop_vanishing<T: Scalar>(net: &Network<T>, assignment: &MultiplicityAssignment) -> Result<Network<T>> {
    if let CycleStatus::Boundary { vertex } = assignment.status {
        return Err(Error::Precondition(format!("multiplicities are not a cycle at {vertex}")));
    }
    if assignment.vanishing.is_empty() {
        return Ok(net.clone());
    }
    // rebuild with surviving edges
    let mut out = Network::new(net.dim());
    for v in &net.vertices {
        out.add_vertex(v.position.clone());
    }
    for (i, e) in net.edges.iter().enumerate() {
        if assignment.per_edge[i].is_zero() {
            continue;
        }
        match e.ends {
            EdgeEnds::Open { start, end } => {
                let interior = e.nodes[1..e.nodes.len() - 1].to_vec();
                out.add_edge(start, end, interior);
            }
            EdgeEnds::Closed => {
                out.add_closed_loop(e.nodes.clone());
            }
        }
    }
    merge_valence_two(&mut out);
    out.compact();
    for v in out.vertex_ids() {
        let val = out.vertex(v).valence();
        if val != 1 && val != 3 {
            return Err(Error::InvalidNetwork(format!(
                "{v} has valence {val} after removing vanishing edges"
            )));
        }
    }
    Ok(out)
}

fn merge_valence_two<T: Scalar>(net: &mut Network<T>) {
    loop {
        let Some(vi) = net.vertices.iter().position(|v| v.incident.len() == 2) else {
            return;
        };
        let inc = net.vertices[vi].incident.clone();
        net.vertices[vi].incident.clear();
        let (ea, fa) = inc[0];
        let (eb, fb) = inc[1];
        if ea == eb {
            // loop edge through vi becomes a closed loop
            let mut nodes = net.edges[ea.0].nodes.clone();
            nodes.pop();
            net.edges[ea.0] = crate::network::Edge {
                nodes,
                ends: EdgeEnds::Closed,
            };
            continue;
        }
        // orient a to end at vi and b to start at vi
        let mut a = net.edges[ea.0].clone();
        let mut b = net.edges[eb.0].clone();
        let (EdgeEnds::Open { start: sa, end: ta }, EdgeEnds::Open { start: sb, end: tb }) = (a.ends, b.ends) else {
            unreachable!("closed loops have no vertices")
        };
        let (a_from, a_flag_far) = if fa == EndFlag::End {
            (sa, EndFlag::Start)
        } else {
            a.nodes.reverse();
            (ta, EndFlag::End)
        };
        let (b_to, b_flag_far) = if fb == EndFlag::Start {
            (tb, EndFlag::End)
        } else {
            b.nodes.reverse();
            (sb, EndFlag::Start)
        };
        let mut nodes = a.nodes;
        nodes.extend(b.nodes.into_iter().skip(1));
        let merged = crate::network::Edge {
            nodes,
            ends: EdgeEnds::Open { start: a_from, end: b_to },
        };
        // the merged edge replaces a; b becomes an orphan removed below
        net.edges[ea.0] = merged;
        let fix = |net: &mut Network<T>, v: VertexId, old: (EdgeId, EndFlag), new: (EdgeId, EndFlag)| {
            if let Some(slot) = net.vertices[v.0].incident.iter_mut().find(|x| **x == old) {
                *slot = new;
            }
        };
        fix(net, a_from, (ea, a_flag_far), (ea, EndFlag::Start));
        fix(net, b_to, (eb, b_flag_far), (ea, EndFlag::End));
        remove_edge(net, eb);
    }
}

fn remove_edge<T: Scalar>(net: &mut Network<T>, e: EdgeId) {
    net.edges.remove(e.0);
    for v in &mut net.vertices {
        v.incident.retain(|(x, _)| *x != e);
        for (x, _) in &mut v.incident {
            if x.0 > e.0 {
                x.0 -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn circle_has_two_regions() {
        let c: Network<f64> = shapes::circle(&Point::xy(0.0, 0.0), 1.0, 32);
        let r = compute_regions(&c).unwrap();
        assert_eq!(r.count, 2);
        assert_eq!(r.euler_defect(&c), 0);
        assert!(!edge_multiplicity(EdgeId(0), &r).is_zero());
    }

    #[test]
    fn theta_has_three_regions_and_all_edges_count() {
        let th: Network<f64> = shapes::theta(0.05);
        let a = assign_multiplicities(&th).unwrap();
        assert_eq!(a.regions.count, 3);
        assert_eq!(a.regions.euler_defect(&th), 0);
        assert_eq!(a.status, CycleStatus::Cycle);
        assert!(a.vanishing.is_empty());
        let m = weighted_measure(&th, &a, |_| 1.0);
        assert!((m - th.total_length()).abs() < 1e-12);
        assert_eq!(weighted_measure(&th, &a, |_| 0.0), 0.0);
    }

    #[test]
    fn segment_between_circles_vanishes() {
        let net: Network<f64> = shapes::two_circles_and_segment(0.5, 1.5, 0.05);
        let a = assign_multiplicities(&net).unwrap();
        assert_eq!(a.regions.count, 3);
        assert_eq!(a.vanishing, vec![EdgeId(2)]);
        assert!(!a.per_edge[0].is_zero() && !a.per_edge[1].is_zero());
        assert_eq!(a.status, CycleStatus::Cycle);
        let circles = net.edges[0].length() + net.edges[1].length();
        assert!((weighted_measure(&net, &a, |_| 1.0) - circles).abs() < 1e-12);

        let dropped = drop_vanishing(&net, &a).unwrap();
        assert_eq!(dropped.edges.len(), 2);
        assert!(dropped.edges.iter().all(|e| e.is_closed()));
        assert!(dropped.vertices.is_empty());
        let again = drop_vanishing(&dropped, &assign_multiplicities(&dropped).unwrap()).unwrap();
        assert_eq!(again, dropped);
    }

    #[test]
    fn nested_circles_share_the_annulus() {
        let mut net: Network<f64> = shapes::circle(&Point::xy(0.0, 0.0), 2.0, 40);
        net.add_closed_loop(crate::network::circle_loop(2, &Point::xy(0.3, 0.0), 0.5, 20));
        let r = compute_regions(&net).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.euler_defect(&net), 0);
        let (l0, r0) = r.sides[0];
        let (l1, r1) = r.sides[1];
        assert_eq!(r0, 0);
        assert_eq!(l0, r1);
        assert_ne!(l1, l0);
    }

    #[test]
    fn merging_joins_split_edge() {
        let mut net = Network::new(2);
        let a = net.add_vertex(Point::xy(0.0, 0.0));
        let m = net.add_vertex(Point::xy(1.0, 0.0));
        let b = net.add_vertex(Point::xy(2.0, 0.0));
        net.add_edge(a, m, vec![Point::xy(0.5, 0.0)]);
        net.add_edge(b, m, vec![Point::xy(1.5, 0.0)]);
        merge_valence_two(&mut net);
        net.compact();
        assert_eq!(net.edges.len(), 1);
        assert_eq!(net.edges[0].nodes.len(), 5);
        assert_eq!(net.vertices.len(), 2);
        assert!(net.vertices.iter().all(|v| v.valence() == 1));
        assert_eq!(net.edges[0].nodes[4], Point::xy(2.0, 0.0));
    }
}
