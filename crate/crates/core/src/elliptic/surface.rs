use crate::elliptic::orientation::{assign_orientation, OrientationStatus};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{EdgeEnds, EdgeId, EndFlag, Network, VertexId, VertexKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    /// Shared by the three sheets meeting at a junction.
    Junction(VertexId),
    /// Vertical line over a fixed endpoint; never moves.
    Fixed(VertexId),
    Interior { edge: EdgeId, index: usize },
}

/// Horizontal positions of one grid column, one per height row.
#[derive(Clone, Debug, PartialEq)]
pub struct Column<T> {
    pub kind: ColumnKind,
    pub pts: Vec<Point<T>>,
    /// Unit horizontal direction along which an interior column moves: the normal of
    /// the boundary curve at its node. Tangential motion only reparametrises a row, so
    /// it is removed. Junction and fixed columns have none.
    pub direction: Option<[T; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sheet {
    pub edge: EdgeId,
    /// Column ids along the edge, in node order.
    pub columns: Vec<usize>,
    pub closed: bool,
    pub sign: i8,
}

/// Grid vertex `(column, row)`.
pub type GridVertex = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle<T> {
    pub v: [GridVertex; 3],
    /// `(2/ε) exp[-z_a/ε, -z_b/ε, -z_c/ε]`: energy per unit area.
    pub weight: T,
}

/// Triangulated sheets over `edge × [0, z_max]`, one per network edge, glued along the
/// junction columns. Row heights are fixed; only horizontal positions move.
#[derive(Clone, Debug, PartialEq)]
pub struct GluedSurface<T> {
    pub eps: T,
    pub z_max: T,
    pub heights: Vec<T>,
    pub columns: Vec<Column<T>>,
    pub sheets: Vec<Sheet>,
    /// The network at height zero.
    pub boundary: Network<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslatorEnergy<T> {
    pub value: T,
    pub per_triangle: Vec<T>,
}

/// `φ_2(d) = (e^d - 1 - d) / d^2`.
fn phi2<T: Scalar>(d: T) -> T {
    if d.abs() < T::lit(0.1) {
        // Taylor to d^8; remainder below 3e-17
        let mut term = T::one();
        let mut sum = T::zero();
        for k in 2..=10u32 {
            term = term / T::lit(f64::from(k));
            if k > 2 {
                term = term * d;
            }
            sum += term;
        }
        sum
    } else {
        (d.exp_m1() - d) / (d * d)
    }
}

/// Second divided difference of `exp` at `a, b, c`.
pub fn exp_divided_difference<T: Scalar>(a: T, b: T, c: T) -> T {
    let mut v = [a, b, c];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let [x, y, z] = v;
    let tol = T::lit(1e-12);
    let close = |p: T, q: T| (p - q).abs() <= tol * (T::one() + p.abs().max(q.abs()));
    if close(x, y) && close(y, z) {
        return y.exp() * T::half();
    }
    if close(x, y) {
        return x.exp() * phi2(z - x);
    }
    if close(y, z) {
        return z.exp() * phi2(x - z);
    }
    // first divided differences via expm1 to avoid cancellation
    let d1 = |p: T, q: T| p.exp() * (q - p).exp_m1() / (q - p);
    (d1(y, z) - d1(x, y)) / (z - x)
}

pub(crate) fn lift<T: Scalar>(p: &Point<T>, z: T) -> [T; 3] {
    [p[0], p[1], z]
}

pub(crate) fn sub3<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross3<T: Scalar>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot3<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3<T: Scalar>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let mut s = T::zero();
    let mut c = T::zero();
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

impl<T: Scalar> GluedSurface<T> {
    pub fn rows(&self) -> usize {
        self.heights.len() - 1
    }

    pub fn is_movable(&self, v: GridVertex) -> bool {
        v.1 > 0 && v.1 < self.rows() && !matches!(self.columns[v.0].kind, ColumnKind::Fixed(_))
    }

    pub fn position(&self, v: GridVertex) -> [T; 3] {
        lift(&self.columns[v.0].pts[v.1], self.heights[v.1])
    }

    /// Two triangles per quad, split along the `(i, j)`-`(i+1, j+1)` diagonal.
    pub fn triangles(&self) -> Vec<Triangle<T>> {
        let inv = -T::one() / self.eps;
        let rows = self.rows();
        let mut w_low = Vec::with_capacity(rows);
        let mut w_high = Vec::with_capacity(rows);
        for j in 0..rows {
            let a = self.heights[j] * inv;
            let b = self.heights[j + 1] * inv;
            let scale = T::two() / self.eps;
            w_low.push(scale * exp_divided_difference(a, a, b));
            w_high.push(scale * exp_divided_difference(a, b, b));
        }
        let mut out = Vec::new();
        for sh in &self.sheets {
            let n = sh.columns.len();
            let segs = if sh.closed { n } else { n - 1 };
            for i in 0..segs {
                let c0 = sh.columns[i];
                let c1 = sh.columns[(i + 1) % n];
                for j in 0..rows {
                    out.push(Triangle {
                        v: [(c0, j), (c1, j), (c1, j + 1)],
                        weight: w_low[j],
                    });
                    out.push(Triangle {
                        v: [(c0, j), (c1, j + 1), (c0, j + 1)],
                        weight: w_high[j],
                    });
                }
            }
        }
        out
    }

    pub fn triangle_normal(&self, t: &Triangle<T>) -> [T; 3] {
        let a = self.position(t.v[0]);
        let b = self.position(t.v[1]);
        let c = self.position(t.v[2]);
        cross3(sub3(b, a), sub3(c, a))
    }

    /// `I^ε = (1/ε) ∫ e^{-z/ε} dμ`, exact for the piecewise-linear height on each triangle.
    pub fn energy(&self) -> TranslatorEnergy<T> {
        let per_triangle: Vec<T> = self
            .triangles()
            .iter()
            .map(|t| t.weight * T::half() * norm3(self.triangle_normal(t)))
            .collect();
        TranslatorEnergy {
            value: compensated_sum(per_triangle.iter().copied()),
            per_triangle,
        }
    }

    /// Energy gradient with respect to every column point (zero for pinned rows and
    /// fixed columns). Indexed `[column][row]`, horizontal components only.
    pub fn gradient(&self) -> Vec<Vec<[T; 2]>> {
        let mut g: Vec<Vec<[T; 2]>> = self
            .columns
            .iter()
            .map(|c| vec![[T::zero(); 2]; c.pts.len()])
            .collect();
        for t in self.triangles() {
            let p = [self.position(t.v[0]), self.position(t.v[1]), self.position(t.v[2])];
            let n = cross3(sub3(p[1], p[0]), sub3(p[2], p[0]));
            let len = norm3(n);
            if !(len > T::zero()) {
                continue;
            }
            let nh = [n[0] / len, n[1] / len, n[2] / len];
            for k in 0..3 {
                // ∇_a A = ½ (b - c) × n̂ for the cyclic order (a, b, c)
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let d = cross3(sub3(b, c), nh);
                let (col, row) = t.v[k];
                let s = t.weight * T::half();
                g[col][row][0] += s * d[0];
                g[col][row][1] += s * d[1];
            }
        }
        for (ci, col) in self.columns.iter().enumerate() {
            for j in 0..col.pts.len() {
                if !self.is_movable((ci, j)) {
                    g[ci][j] = [T::zero(); 2];
                }
            }
        }
        g
    }

    /// Largest gradient component over the free coordinates: both horizontal components
    /// on junction columns, the normal component elsewhere.
    pub fn gradient_norm(&self) -> T {
        let g = self.gradient();
        let mut m = T::zero();
        for (c, col) in self.columns.iter().enumerate() {
            for v in &g[c] {
                let a = match col.direction {
                    Some(d) => (v[0] * d[0] + v[1] * d[1]).abs(),
                    None => v[0].abs().max(v[1].abs()),
                };
                m = m.max(a);
            }
        }
        m
    }

    /// Row index and interpolation weight for height `z`.
    fn locate(&self, z: T) -> (usize, T) {
        let rows = self.rows();
        let mut j = self.heights.partition_point(|&h| h <= z).saturating_sub(1);
        if j >= rows {
            j = rows - 1;
        }
        let w = (z - self.heights[j]) / (self.heights[j + 1] - self.heights[j]);
        (j, w.max(T::zero()).min(T::one()))
    }

    /// Intersection with the plane at height `z`, restricted to the band
    /// `[2ε, z_max - 2ε]` away from both boundary layers.
    pub fn slice(&self, z: T) -> Result<Network<T>> {
        let lo = T::two() * self.eps;
        let hi = self.z_max - T::two() * self.eps;
        let slack = T::lit(1e-12) * self.z_max;
        if !(z >= lo - slack && z <= hi + slack) {
            return Err(Error::param(
                "z",
                format!("{z:?} outside the admissible band [{lo:?}, {hi:?}]"),
            ));
        }
        self.raw_slice(z)
    }

    /// Slice at any height in `[0, z_max]`, artifact bands included.
    pub fn raw_slice(&self, z: T) -> Result<Network<T>> {
        if !(z >= T::zero() && z <= self.z_max) {
            return Err(Error::param("z", "outside [0, z_max]"));
        }
        let (j, w) = self.locate(z);
        let at = |c: usize| -> Point<T> {
            let col = &self.columns[c];
            if w == T::zero() {
                col.pts[j].clone()
            } else if w == T::one() {
                col.pts[j + 1].clone()
            } else {
                col.pts[j].lerp(&col.pts[j + 1], w)
            }
        };
        let mut net = Network::new(2);
        for v in &self.boundary.vertices {
            net.add_vertex(v.position.clone());
        }
        for c in &self.columns {
            if let ColumnKind::Junction(v) | ColumnKind::Fixed(v) = c.kind {
                let p = if w == T::zero() {
                    c.pts[j].clone()
                } else if w == T::one() {
                    c.pts[j + 1].clone()
                } else {
                    c.pts[j].lerp(&c.pts[j + 1], w)
                };
                net.vertices[v.0].position = p;
            }
        }
        let inner = w > T::zero() && w < T::one();
        for sh in &self.sheets {
            let n = sh.columns.len();
            let segs = if sh.closed { n } else { n - 1 };
            let mut nodes = Vec::with_capacity(2 * n);
            for i in 0..segs {
                let c0 = sh.columns[i];
                let c1 = sh.columns[(i + 1) % n];
                nodes.push(at(c0));
                if inner {
                    // plane meets the diagonal (c0, j)-(c1, j+1)
                    nodes.push(self.columns[c0].pts[j].lerp(&self.columns[c1].pts[j + 1], w));
                }
            }
            if sh.closed {
                net.add_closed_loop(nodes);
            } else {
                nodes.push(at(sh.columns[n - 1]));
                let EdgeEnds::Open { start, end } = self.boundary.edge(sh.edge).ends else {
                    unreachable!("open sheet over a closed edge")
                };
                let interior = nodes[1..nodes.len() - 1].to_vec();
                net.add_edge(start, end, interior);
            }
        }
        Ok(net)
    }

    /// Redistributes every sheet row by arclength, keeping junction and fixed columns.
    pub fn equidistribute_rows(&mut self) {
        for sh in self.sheets.clone() {
            let n = sh.columns.len();
            for j in 1..self.rows() {
                let mut pts: Vec<Point<T>> = sh.columns.iter().map(|&c| self.columns[c].pts[j].clone()).collect();
                if sh.closed {
                    pts.push(pts[0].clone());
                }
                let mut cum = vec![T::zero()];
                for k in 1..pts.len() {
                    let prev = *cum.last().unwrap();
                    cum.push(prev + pts[k - 1].dist(&pts[k]));
                }
                let total = *cum.last().unwrap();
                let segs = pts.len() - 1;
                let mut cursor = 0;
                let new: Vec<Point<T>> = (0..pts.len())
                    .map(|k| {
                        let target = total * T::from_usize_lossy(k) / T::from_usize_lossy(segs);
                        while cursor + 2 < cum.len() && cum[cursor + 1] < target {
                            cursor += 1;
                        }
                        let seg = cum[cursor + 1] - cum[cursor];
                        let w = if seg > T::zero() {
                            ((target - cum[cursor]) / seg).max(T::zero()).min(T::one())
                        } else {
                            T::zero()
                        };
                        pts[cursor].lerp(&pts[cursor + 1], w)
                    })
                    .collect();
                for (k, &c) in sh.columns.iter().enumerate().take(n) {
                    if matches!(self.columns[c].kind, ColumnKind::Interior { .. }) {
                        self.columns[c].pts[j] = new[k].clone();
                    }
                }
            }
        }
    }
}

/// Product surface `net × [0, z_max]` with `rows` equal height steps. Every sheet carries
/// unit multiplicity with the sign from [`assign_orientation`].
pub fn build_initial_surface<T: Scalar>(net: &Network<T>, eps: T, z_max: T, rows: usize) -> Result<GluedSurface<T>> {
    if net.dim() != 2 {
        return Err(Error::Dimension { expected: 2, found: net.dim() });
    }
    if !(eps > T::zero()) {
        return Err(Error::param("eps", "must be positive"));
    }
    if !(z_max >= T::lit(5.0) * eps) {
        return Err(Error::param("z_max", "must be at least 5 eps"));
    }
    if rows < 2 {
        return Err(Error::param("rows", "need at least two height steps"));
    }
    for v in net.vertex_ids() {
        if let VertexKind::Other(k) = net.vertex(v).kind() {
            return Err(Error::Precondition(format!("{v} has valence {k}")));
        }
    }
    let orient = assign_orientation(net);
    if let OrientationStatus::NonOrientable { witness } = orient.status {
        return Err(Error::NonOrientable {
            witness: witness.into_iter().map(|e| e.0).collect(),
        });
    }
    let heights: Vec<T> = (0..=rows)
        .map(|j| z_max * T::from_usize_lossy(j) / T::from_usize_lossy(rows))
        .collect();
    let mut columns: Vec<Column<T>> = Vec::new();
    let mut vertex_column = vec![usize::MAX; net.vertices.len()];
    for v in net.vertex_ids() {
        let kind = match net.vertex(v).kind() {
            VertexKind::Junction => ColumnKind::Junction(v),
            _ => ColumnKind::Fixed(v),
        };
        vertex_column[v.0] = columns.len();
        columns.push(Column {
            kind,
            pts: vec![net.vertex(v).position.clone(); rows + 1],
            direction: None,
        });
    }
    let mut sheets = Vec::with_capacity(net.edges.len());
    for (ei, e) in net.edges.iter().enumerate() {
        let edge = EdgeId(ei);
        let mut ids = Vec::with_capacity(e.nodes.len());
        let closed = e.is_closed();
        for (i, p) in e.nodes.iter().enumerate() {
            let id = match e.ends {
                EdgeEnds::Open { start, .. } if i == 0 => vertex_column[start.0],
                EdgeEnds::Open { end, .. } if i + 1 == e.nodes.len() => vertex_column[end.0],
                _ => {
                    let (a, b) = e.neighbours(i);
                    let chord = &e.nodes[b] - &e.nodes[a];
                    let len = chord.norm();
                    if !(len > T::zero()) {
                        return Err(Error::Degenerate(format!("{edge} has coincident nodes near {i}")));
                    }
                    columns.push(Column {
                        kind: ColumnKind::Interior { edge, index: i },
                        pts: vec![p.clone(); rows + 1],
                        direction: Some([-chord[1] / len, chord[0] / len]),
                    });
                    columns.len() - 1
                }
            };
            ids.push(id);
        }
        sheets.push(Sheet {
            edge,
            columns: ids,
            closed,
            sign: orient.signs[ei],
        });
    }
    // end nodes of edges are the vertex positions exactly
    debug_assert!(net.edges.iter().all(|e| match e.ends {
        EdgeEnds::Open { start, end } =>
            *e.end_node(EndFlag::Start) == net.vertex(start).position
                && *e.end_node(EndFlag::End) == net.vertex(end).position,
        EdgeEnds::Closed => true,
    }));
    Ok(GluedSurface {
        eps,
        z_max,
        heights,
        columns,
        sheets,
        boundary: net.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use crate::network::make_y;
    use crate::shapes;

    #[test]
    fn divided_difference_matches_quadrature() {
        // ∫_simplex e^{a u + b v + c (1-u-v)} du dv = f[a, b, c]
        let cases = [(-1.0, -1.0, -1.25), (-0.3, -0.55, -0.55), (0.2, -0.7, 1.1), (0.0, 0.0, 0.0)];
        for (a, b, c) in cases {
            let n = 400;
            let h = 1.0 / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                for k in 0..n - i {
                    // centroid rule on the two triangles of each cell
                    let u = (i as f64 + 1.0 / 3.0) * h;
                    let v = (k as f64 + 1.0 / 3.0) * h;
                    s += (a * u + b * v + c * (1.0 - u - v)).exp() * 0.5 * h * h;
                    if k + 1 < n - i {
                        let u = (i as f64 + 2.0 / 3.0) * h;
                        let v = (k as f64 + 2.0 / 3.0) * h;
                        s += (a * u + b * v + c * (1.0 - u - v)).exp() * 0.5 * h * h;
                    }
                }
            }
            let f = exp_divided_difference(a, b, c);
            assert!((f - s).abs() < 1e-5 * f, "{a} {b} {c}: {f} vs {s}");
        }
        assert!((exp_divided_difference(-1.0, -1.0, -1.0 + 1e-9) - (-1.0f64).exp() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn segment_product_energy_closed_form() {
        let seg: Network<f64> = shapes::segment(Point::xy(0.0, 0.0), Point::xy(2.0, 0.0), 0.25);
        let eps = 0.1;
        let s = build_initial_surface(&seg, eps, 1.0, 20).unwrap();
        let want = 2.0 * (1.0 - (-1.0f64 / eps).exp());
        assert!((s.energy().value - want).abs() < 1e-13);
        assert!(s.gradient_norm() < 1e-14);
    }

    #[test]
    fn y_product_energy_and_tail() {
        let y = make_y(2, &Rotation::identity(2), 1.5, 7);
        let eps = 0.05;
        let e1 = build_initial_surface(&y, eps, 10.0 * eps, 30).unwrap().energy().value;
        let want = 4.5 * (1.0 - (-10.0f64).exp());
        assert!((e1 - want).abs() < 1e-13);
        let e2 = build_initial_surface(&y, eps, 20.0 * eps, 60).unwrap().energy().value;
        assert!(((e2 - e1) / e2).abs() < 1e-4);
    }

    #[test]
    fn slices_of_product_surface_equal_boundary() {
        let th: Network<f64> = shapes::curved_triod(0.2, 10);
        let s = build_initial_surface(&th, 0.05, 0.5, 20).unwrap();
        assert_eq!(s.raw_slice(0.0).unwrap(), th);
        let mid = s.slice(0.2).unwrap();
        assert_eq!(mid.node_count(), th.node_count());
        assert!(crate::metric::hausdorff(&mid, &th) < 1e-15);
        assert!(s.slice(0.05).is_err());
    }

    #[test]
    fn non_orientable_rejected() {
        let net: Network<f64> = shapes::two_circles_and_segment(0.5, 1.5, 0.1);
        assert!(matches!(
            build_initial_surface(&net, 0.05, 0.5, 10),
            Err(Error::NonOrientable { .. })
        ));
    }
}
