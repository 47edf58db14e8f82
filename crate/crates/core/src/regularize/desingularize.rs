use std::collections::HashMap;

use crate::canonical::{expander_triod, ExpanderOptions, ExpanderTriod};
use crate::error::{Error, Result};
use crate::flow::{fermat_point, junction_project};
use crate::geometry::Point;
use crate::metric::hausdorff;
use crate::network::{EdgeId, EndFlag, Network, Tolerances, VertexId};
use crate::regularize::detect::detect_nonregular;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GlueMethod {
    ExpanderGlue,
    FermatProjection,
}

impl GlueMethod {
    pub fn name(self) -> &'static str {
        match self {
            GlueMethod::ExpanderGlue => "expander-glue",
            GlueMethod::FermatProjection => "fermat-projection",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesingularizeOptions<T> {
    /// Node spacing inside the balls; `None` uses `s / 32`.
    pub spacing: Option<T>,
    /// Expander scale as a fraction of `s`.
    pub expander_fraction: T,
    pub expander: ExpanderOptions<T>,
    pub tol: Tolerances<T>,
}

impl<T: Scalar> Default for DesingularizeOptions<T> {
    fn default() -> Self {
        DesingularizeOptions {
            spacing: None,
            expander_fraction: T::lit(0.125),
            expander: ExpanderOptions::default(),
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Desingularisation<T> {
    pub scale: T,
    pub net: Network<T>,
    pub methods: Vec<(VertexId, GlueMethod)>,
    /// Hausdorff distance between input and output.
    pub c0_distance: T,
}

/// `x^3 (10 - 15x + 6x^2)`: zero and one with two vanishing derivatives at the ends.
fn smoothstep<T: Scalar>(x: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    x * x * x * (T::lit(10.0) + x * (T::lit(-15.0) + T::lit(6.0) * x))
}

/// One edge seen from a junction: nodes ordered outward.
struct Arm<T> {
    edge: EdgeId,
    flag: EndFlag,
    nodes: Vec<Point<T>>,
    /// First outward index at distance `>= s`; nodes from here on are kept.
    exit: usize,
}

impl<T: Scalar> Arm<T> {
    /// First point at distance `rho` from `p` along the outward polyline.
    fn point_at_radius(&self, p: &Point<T>, rho: T) -> Point<T> {
        for k in 1..=self.exit {
            let a = &self.nodes[k - 1];
            let b = &self.nodes[k];
            if b.dist(p) >= rho {
                // |a - p + w (b - a)| = rho, taking the root in [0, 1]
                let d = b - a;
                let ap = a - p;
                let qa = d.norm_sq();
                let qb = ap.dot(&d);
                let qc = ap.norm_sq() - rho * rho;
                let disc = (qb * qb - qa * qc).max(T::zero());
                let w = ((-qb + disc.sqrt()) / qa).max(T::zero()).min(T::one());
                return a.axpy(w, &d);
            }
        }
        self.nodes[self.exit].clone()
    }
}

fn arms_at<T: Scalar>(net: &Network<T>, v: VertexId, s: T) -> Result<Vec<Arm<T>>> {
    let p = net.vertex(v).position.clone();
    net.vertex(v)
        .incident
        .iter()
        .map(|&(e, flag)| {
            let mut nodes = net.edge(e).nodes.clone();
            if flag == EndFlag::End {
                nodes.reverse();
            }
            let exit = (1..nodes.len())
                .find(|&k| nodes[k].dist(&p) >= s)
                .ok_or_else(|| Error::Precondition(format!("{e} does not leave the ball of radius {s:?} around {v}")))?;
            Ok(Arm { edge: e, flag, nodes, exit })
        })
        .collect()
}

/// Expander arm `i` inside `B_s`, blended into the original curve over `B_s \ B_{s/2}`.
/// Returns the new junction and the replacement nodes after it, ordered outward.
fn glue_expander<T: Scalar>(
    p: &Point<T>,
    arms: &[Arm<T>],
    ex: &ExpanderTriod<T>,
    s: T,
    h: T,
    opts: &DesingularizeOptions<T>,
) -> Option<(Point<T>, Vec<Vec<Point<T>>>)> {
    let half_s = s * T::half();
    let sample_ds = opts.expander.ds * ex.scale;
    let stride = (h / sample_ds).round().to_usize().unwrap_or(1).max(1);
    let m = (half_s / h).ceil().to_usize().unwrap_or(1).max(1);
    let dr = half_s / T::from_usize_lossy(m);
    let mut out = Vec::with_capacity(3);
    for (i, arm) in arms.iter().enumerate() {
        let mut pts = Vec::new();
        for q in ex.arms[i].iter().skip(stride).step_by(stride) {
            if q.norm() >= half_s - T::half() * dr {
                break;
            }
            pts.push(p + q);
        }
        for j in 0..m {
            let rho = half_s + dr * T::from_usize_lossy(j);
            let e = p + &ex.arm_point_at_radius(i, rho)?;
            let c = arm.point_at_radius(p, rho);
            let w = smoothstep((rho - half_s) / half_s);
            pts.push(e.lerp(&c, w));
        }
        out.push(pts);
    }
    Some((p + &ex.junction, out))
}

/// Junction at the Fermat point of the three exit points, straight segments to them.
fn fermat_fallback<T: Scalar>(p: &Point<T>, arms: &[Arm<T>], s: T, h: T) -> Result<(Point<T>, Vec<Vec<Point<T>>>)> {
    let exits: Vec<Point<T>> = arms.iter().map(|a| a.point_at_radius(p, s)).collect();
    let f = fermat_point([&exits[0], &exits[1], &exits[2]])?;
    if f.degenerate.is_some() {
        return Err(Error::Degenerate(
            "exit points span an angle of at least 120 degrees; no regular junction inside the ball".into(),
        ));
    }
    let out = arms
        .iter()
        .zip(exits.iter())
        .map(|(arm, q)| {
            let n = (f.point.dist(q) / h).ceil().to_usize().unwrap_or(1).max(1);
            let mut pts: Vec<Point<T>> = (1..=n)
                .map(|k| f.point.lerp(q, T::from_usize_lossy(k) / T::from_usize_lossy(n)))
                .collect();
            if pts.last().is_some_and(|last| last.dist(&arm.nodes[arm.exit]) < h * T::lit(1e-6)) {
                pts.pop();
            }
            pts
        })
        .collect();
    Ok((f.point, out))
}

/// Replaces a neighbourhood of radius `s` of every non-regular junction so that all
/// junctions meet at 120 degrees; nodes outside the balls are copied unchanged.
pub fn desingularize<T: Scalar>(net: &Network<T>, s: T) -> Result<Desingularisation<T>> {
    desingularize_with(net, s, &DesingularizeOptions::default())
}

pub fn desingularize_with<T: Scalar>(
    net: &Network<T>,
    s: T,
    opts: &DesingularizeOptions<T>,
) -> Result<Desingularisation<T>> {
    if !(s > T::zero() && s.is_finite()) {
        return Err(Error::param("s", "must be positive"));
    }
    let h = opts.spacing.unwrap_or(s / T::lit(32.0));
    if !(h > T::zero() && h < s) {
        return Err(Error::param("spacing", "must lie in (0, s)"));
    }
    let report = detect_nonregular(net, &opts.tol);
    if let Some(bad) = report.iter().find(|j| j.fatal) {
        return Err(Error::Precondition(format!(
            "{} has coincident tangents; no tangent cone to desingularise",
            bad.vertex
        )));
    }
    let targets: Vec<VertexId> = report.iter().filter(|j| !j.regular).map(|j| j.vertex).collect();
    if targets.is_empty() {
        return Ok(Desingularisation {
            scale: s,
            net: net.clone(),
            methods: Vec::new(),
            c0_distance: T::zero(),
        });
    }
    for (i, &v) in targets.iter().enumerate() {
        let p = &net.vertex(v).position;
        for &w in &targets[i + 1..] {
            if p.dist(&net.vertex(w).position) < T::two() * s {
                return Err(Error::Precondition(format!("balls around {v} and {w} overlap; shrink s")));
            }
        }
        for w in net.vertex_ids() {
            if w != v && p.dist(&net.vertex(w).position) <= s {
                return Err(Error::Precondition(format!("{w} lies in the ball around {v}; shrink s")));
            }
        }
    }

    let mut out = net.clone();
    let mut methods = Vec::with_capacity(targets.len());
    // (edge, end) -> (outward replacement including the junction, exit index)
    let mut replace: HashMap<(EdgeId, EndFlag), (Vec<Point<T>>, usize)> = HashMap::new();
    for &v in &targets {
        let p = net.vertex(v).position.clone();
        let arms = arms_at(net, v, s)?;
        let dirs: Vec<Point<T>> = arms.iter().map(|a| &a.nodes[1] - &p).collect();
        let glued = expander_triod(
            &[dirs[0].clone(), dirs[1].clone(), dirs[2].clone()],
            s * opts.expander_fraction,
            &opts.expander,
        )
        .ok()
        .and_then(|ex| glue_expander(&p, &arms, &ex, s, h, opts));
        let (junction, inner, method) = match glued {
            Some((j, inner)) => (j, inner, GlueMethod::ExpanderGlue),
            None => {
                let (j, inner) = fermat_fallback(&p, &arms, s, h)?;
                (j, inner, GlueMethod::FermatProjection)
            }
        };
        for (arm, pts) in arms.iter().zip(inner) {
            let mut seq = Vec::with_capacity(pts.len() + 1);
            seq.push(junction.clone());
            seq.extend(pts);
            replace.insert((arm.edge, arm.flag), (seq, arm.exit));
        }
        out.vertices[v.0].position = junction;
        methods.push((v, method));
    }

    for (ei, edge) in out.edges.iter_mut().enumerate() {
        let e = EdgeId(ei);
        if let Some((seq, exit)) = replace.get(&(e, EndFlag::End)) {
            let keep = edge.nodes.len() - exit;
            edge.nodes.truncate(keep);
            edge.nodes.extend(seq.iter().rev().cloned());
        }
        if let Some((seq, exit)) = replace.get(&(e, EndFlag::Start)) {
            let tail = edge.nodes.split_off(*exit);
            edge.nodes.clone_from(seq);
            edge.nodes.extend(tail);
        }
    }
    for &v in &targets {
        let f = junction_project(&out, v)?;
        if f.degenerate.is_some() {
            return Err(Error::Degenerate(format!("{v}: first nodes admit no interior Fermat point")));
        }
        out.set_vertex_position(v, f.point);
    }
    let c0_distance = hausdorff(net, &out);
    Ok(Desingularisation {
        scale: s,
        net: out,
        methods,
        c0_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use crate::network::{make_y, validate};
    use crate::shapes::triod;

    #[test]
    fn smoothstep_ends() {
        assert_eq!(smoothstep(0.0f64), 0.0);
        assert_eq!(smoothstep(1.0f64), 1.0);
        assert!((smoothstep(0.5f64) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regular_input_unchanged() {
        let y = make_y(2, &Rotation::identity(2), 1.0, 11);
        let d = desingularize(&y, 0.1).unwrap();
        assert_eq!(d.net, y);
        assert!(d.methods.is_empty());
        assert_eq!(d.c0_distance, 0.0);
    }

    fn check_output(net: &Network<f64>, d: &Desingularisation<f64>, s: f64) {
        let tol = Tolerances::default();
        let rep = validate(&d.net, &tol);
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert!(detect_nonregular(&d.net, &tol).iter().all(|j| j.regular));
        assert!(d.c0_distance <= s, "{} > {s}", d.c0_distance);
        let centre = &net.vertices[0].position;
        let outside: Vec<&Point<f64>> = net.nodes().filter(|q| q.dist(centre) >= s).collect();
        for q in outside {
            assert!(d.net.nodes().any(|r| r == q), "node {q:?} moved");
        }
    }

    #[test]
    fn right_angle_triod_glued() {
        let net = triod([0.0, 90.0, 225.0], 1.0, 1.0 / 64.0);
        for s in [4e-2, 2e-2, 1e-2] {
            let d = desingularize(&net, s).unwrap();
            assert_eq!(d.methods[0].1, GlueMethod::ExpanderGlue);
            check_output(&net, &d, s);
        }
    }

    #[test]
    fn out_of_plane_uses_fermat_point() {
        let mut net = Network::new(3);
        let j = net.add_vertex(Point::new(&[0.0, 0.0, 0.0]));
        for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            let end = Point::new(&dir);
            let interior = (1..20).map(|k| end.scale(k as f64 / 20.0)).collect();
            let v = net.add_vertex(end);
            net.add_edge(j, v, interior);
        }
        let d = desingularize(&net, 0.1).unwrap();
        assert_eq!(d.methods[0].1, GlueMethod::FermatProjection);
        check_output(&net, &d, 0.1);
    }

    #[test]
    fn overlapping_balls_rejected() {
        let net = triod([0.0, 90.0, 225.0], 0.05, 0.01);
        assert!(desingularize(&net, 0.1).is_err());
    }
}
