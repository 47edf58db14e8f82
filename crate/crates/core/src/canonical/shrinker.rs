//! Residuals of the self-similar equations `k = -x^⊥/2` (shrinker at `t = -1`) and
//! `k = x^⊥/(2t)` (expander at time `t`).

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{curvature_vector, Edge};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualField<T> {
    /// One entry per node; `None` at end nodes of open edges.
    pub per_node: Vec<Option<Point<T>>>,
    pub max: T,
}

/// Component of `x` orthogonal to the chord through the two neighbours.
fn normal_part<T: Scalar>(prev: &Point<T>, x: &Point<T>, next: &Point<T>) -> Result<Point<T>> {
    let chord = (next - prev)
        .normalized()
        .ok_or_else(|| Error::Degenerate("zero-length chord".into()))?;
    Ok(x.reject(&chord))
}

/// `k + c x^⊥` at every interior node.
fn residual<T: Scalar>(edge: &Edge<T>, c: T) -> Result<ResidualField<T>> {
    let mut per_node = vec![None; edge.nodes.len()];
    let mut max = T::zero();
    for i in edge.interior_range() {
        let (p, n) = edge.neighbours(i);
        let (xp, x, xn) = (&edge.nodes[p], &edge.nodes[i], &edge.nodes[n]);
        let k = curvature_vector(xp, x, xn)?;
        let perp = normal_part(xp, x, xn)?;
        let r = k.axpy(c, &perp);
        max = max.max(r.norm());
        per_node[i] = Some(r);
    }
    Ok(ResidualField { per_node, max })
}

/// `k + x^⊥/2` per interior node.
pub fn shrinker_residual<T: Scalar>(edge: &Edge<T>) -> Result<ResidualField<T>> {
    residual(edge, T::half())
}

/// `k - x^⊥/(2t)` per interior node; at `t = 1` the expander equation `k = x^⊥/2`.
pub fn expander_residual<T: Scalar>(edge: &Edge<T>, t: T) -> Result<ResidualField<T>> {
    if !(t > T::zero()) {
        return Err(Error::param("t", "expander time must be positive"));
    }
    residual(edge, -T::one() / (T::two() * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{circle_loop, EdgeEnds, VertexId};

    fn closed(r: f64, n: usize) -> Edge<f64> {
        Edge {
            nodes: circle_loop(2, &Point::xy(0.0, 0.0), r, n),
            ends: EdgeEnds::Closed,
        }
    }

    #[test]
    fn circle_residuals() {
        let s = shrinker_residual(&closed(2f64.sqrt(), 256)).unwrap();
        assert!(s.max < 1e-12, "{}", s.max);
        let u = shrinker_residual(&closed(1.0, 256)).unwrap();
        assert!((u.max - 0.5).abs() < 1e-12);
    }

    #[test]
    fn line_through_origin() {
        let e = Edge {
            nodes: (0..11).map(|i| Point::xy(-1.0 + 0.2 * i as f64, -2.0 + 0.4 * i as f64)).collect(),
            ends: EdgeEnds::Open {
                start: VertexId(0),
                end: VertexId(1),
            },
        };
        let s = shrinker_residual(&e).unwrap();
        assert!(s.max < 1e-14);
        assert!(s.per_node[0].is_none());
    }
}
