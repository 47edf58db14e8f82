use crate::network::{junction_status, Network, Tolerances, VertexId, VertexKind};
use crate::scalar::Scalar;

/// Angle data at one valence-3 vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct JunctionAngles<T> {
    pub vertex: VertexId,
    /// Pairwise angles between the outward unit tangents, in radians.
    pub angles: Vec<T>,
    pub tangent_sum: T,
    pub regular: bool,
    /// Two tangents coincide to within the angle tolerance; no desingularisation applies.
    pub fatal: bool,
}

/// Angle report for every triple junction. Junctions whose first segments have zero
/// length are reported fatal with empty angles.
pub fn detect_nonregular<T: Scalar>(net: &Network<T>, tol: &Tolerances<T>) -> Vec<JunctionAngles<T>> {
    net.vertex_ids()
        .filter(|&v| net.vertex(v).kind() == VertexKind::Junction)
        .map(|v| match junction_status(net, v, tol.reg) {
            Some(s) => {
                let fatal = s.angles.iter().any(|&a| a < tol.angle);
                JunctionAngles {
                    vertex: v,
                    angles: s.angles,
                    tangent_sum: s.tangent_sum,
                    regular: s.regular && !fatal,
                    fatal,
                }
            }
            None => JunctionAngles {
                vertex: v,
                angles: Vec::new(),
                tangent_sum: T::nan(),
                regular: false,
                fatal: true,
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Rotation};
    use crate::network::make_y;
    use crate::shapes::triod;

    #[test]
    fn static_y_regular() {
        let y = make_y(2, &Rotation::identity(2), 1.0, 6);
        let r = detect_nonregular(&y, &Tolerances::default());
        assert_eq!(r.len(), 1);
        assert!(r[0].regular && !r[0].fatal);
    }

    #[test]
    fn right_angle_triod_flagged() {
        let t = triod([0.0, 90.0, 225.0], 1.0, 0.1);
        let r = detect_nonregular(&t, &Tolerances::default());
        assert!(!r[0].regular && !r[0].fatal);
        // |e1 + e2 + (-1,-1)/√2| = √2 - 1
        assert!((r[0].tangent_sum - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn coincident_tangents_fatal() {
        let mut net = Network::new(2);
        let j = net.add_vertex(Point::xy(0.0, 0.0));
        for p in [Point::xy(1.0, 0.0), Point::xy(2.0, 0.0), Point::xy(-1.0, 0.0)] {
            let v = net.add_vertex(p);
            net.add_edge(j, v, Vec::new());
        }
        let r = detect_nonregular(&net, &Tolerances::default());
        assert!(r[0].fatal && !r[0].regular);
    }
}
