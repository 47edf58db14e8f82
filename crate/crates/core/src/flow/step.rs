//! Explicit front-tracking time step.

use crate::error::{Error, Result};
use crate::flow::junction::junction_project;
use crate::flow::{StopEvent, StopKind};
use crate::geometry::Point;
use crate::network::{curvature_vector, resample_graded, EdgeEnds, EndFlag, Network, VertexKind};
use crate::scalar::Scalar;

/// Curvature-adaptive node spacing: `h = clamp(rho / nodes_per_radius, min_h, target_h)`
/// with `rho` the local radius of curvature, graded to be Lipschitz along each edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveSpacing<T> {
    pub min_h: T,
    pub nodes_per_radius: T,
    /// Lipschitz constant of the spacing field along arclength.
    pub grading: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepParams<T> {
    pub cfl: T,
    pub target_h: T,
    /// Weight of the tangential redistribution term, in `[0, 1]`.
    pub omega: T,
    /// Steps between remeshing passes; zero disables remeshing.
    pub remesh_interval: usize,
    pub dt_max: T,
    pub adaptive: Option<AdaptiveSpacing<T>>,
}

impl<T: Scalar> StepParams<T> {
    pub fn new(target_h: T) -> Self {
        StepParams {
            cfl: T::lit(0.2),
            target_h,
            omega: T::half(),
            remesh_interval: 10,
            dt_max: T::infinity(),
            adaptive: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl <= T::half()) {
            return Err(Error::param("cfl", "must lie in (0, 0.5]"));
        }
        if !(self.target_h > T::zero() && self.target_h.is_finite()) {
            return Err(Error::param("target_h", "must be positive and finite"));
        }
        if !(self.omega >= T::zero() && self.omega <= T::one()) {
            return Err(Error::param("omega", "must lie in [0, 1]"));
        }
        if !(self.dt_max > T::zero()) {
            return Err(Error::param("dt_max", "must be positive"));
        }
        if let Some(a) = &self.adaptive {
            if !(a.min_h > T::zero() && a.min_h <= self.target_h) {
                return Err(Error::param("adaptive.min_h", "must lie in (0, target_h]"));
            }
            if !(a.nodes_per_radius > T::zero() && a.grading > T::zero()) {
                return Err(Error::param("adaptive", "nodes_per_radius and grading must be positive"));
            }
        }
        Ok(())
    }

    /// Same parameters for data rescaled by `lambda` in space (and `lambda^2` in time).
    pub fn rescaled(&self, lambda: T) -> Self {
        StepParams {
            cfl: self.cfl,
            target_h: self.target_h * lambda,
            omega: self.omega,
            remesh_interval: self.remesh_interval,
            dt_max: self.dt_max * lambda * lambda,
            adaptive: self.adaptive.map(|a| AdaptiveSpacing {
                min_h: a.min_h * lambda,
                ..a
            }),
        }
    }

    /// Edge length below which an open edge is declared collapsed (closed loops use 1.5x).
    pub fn collapse_length(&self) -> T {
        match &self.adaptive {
            Some(a) => a.min_h,
            None => self.target_h,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub net: Network<T>,
    pub t: T,
    /// Per edge, per node curvature vectors (zero at vertices).
    pub curvature: Vec<Vec<Point<T>>>,
    /// Per edge, per node velocities of the last accepted step (zero at fixed ends).
    pub velocity: Vec<Vec<Point<T>>>,
    pub steps: usize,
}

impl<T: Scalar> FlowState<T> {
    pub fn new(net: Network<T>, t: T) -> Result<Self> {
        if !(t >= T::zero()) {
            return Err(Error::param("t", "initial time must be nonnegative"));
        }
        for v in net.vertex_ids() {
            if let VertexKind::Other(n) = net.vertex(v).kind() {
                return Err(Error::Precondition(format!("{v} has valence {n}; the flow needs 1 or 3")));
            }
        }
        let zeros = zero_fields(&net);
        let mut s = FlowState {
            curvature: zeros.clone(),
            velocity: zeros,
            net,
            t,
            steps: 0,
        };
        s.curvature = curvature_field(&s.net);
        Ok(s)
    }

    pub fn max_speed(&self) -> T {
        self.velocity
            .iter()
            .flat_map(|e| e.iter())
            .map(|v| v.norm())
            .fold(T::zero(), T::max)
    }
}

fn zero_fields<T: Scalar>(net: &Network<T>) -> Vec<Vec<Point<T>>> {
    net.edges
        .iter()
        .map(|e| vec![Point::zeros(net.dim()); e.nodes.len()])
        .collect()
}

/// Curvature vectors at interior nodes; zero at vertices and degenerate stencils.
pub fn curvature_field<T: Scalar>(net: &Network<T>) -> Vec<Vec<Point<T>>> {
    net.edges
        .iter()
        .map(|e| {
            let mut out = vec![Point::zeros(net.dim()); e.nodes.len()];
            for i in e.interior_range() {
                let (p, n) = e.neighbours(i);
                if let Ok(k) = curvature_vector(&e.nodes[p], &e.nodes[i], &e.nodes[n]) {
                    out[i] = k;
                }
            }
            out
        })
        .collect()
}

/// `dt = cfl * h_min^2`, capped by `dt_max`.
pub fn adaptive_dt<T: Scalar>(state: &FlowState<T>, params: &StepParams<T>) -> std::result::Result<T, StopEvent<T>> {
    let h_min = state.net.min_spacing();
    if !(h_min > T::zero()) {
        return Err(StopEvent {
            kind: StopKind::EdgeCollapse,
            time: state.t,
            location: None,
            detail: "zero node spacing".into(),
        });
    }
    Ok((params.cfl * h_min * h_min).min(params.dt_max))
}

/// Normal velocity plus the tangential redistribution term at one node.
fn node_velocity<T: Scalar>(prev: &Point<T>, cur: &Point<T>, next: &Point<T>, omega: T) -> Option<(Point<T>, Point<T>)> {
    let fwd = next - cur;
    let bwd = cur - prev;
    let dp = fwd.norm();
    let dm = bwd.norm();
    if !(dp > T::zero() && dm > T::zero()) {
        return None;
    }
    let up = fwd.scale(T::one() / dp);
    let um = bwd.scale(T::one() / dm);
    let sum_d = dp + dm;
    let k = (&up - &um).scale(T::two() / sum_d);
    let mut v = k.clone();
    if omega > T::zero() {
        if let Some(tan) = (&up + &um).normalized() {
            let w = &(next + prev).scale(T::half()) - cur;
            let c = omega * w.dot(&tan) * T::lit(4.0) / (sum_d * sum_d);
            v.add_assign_scaled(c, &tan);
        }
    }
    Some((k, v))
}

/// Summary of an accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    pub dt: T,
    pub max_speed: T,
    pub remeshed: bool,
    /// Junctions whose Fermat triangle had an angle of at least 120 degrees.
    pub degenerate_junctions: usize,
}

/// Advances the state by `dt`. On a stop event the state is left at the start of the step.
pub fn step<T: Scalar>(
    state: &mut FlowState<T>,
    params: &StepParams<T>,
    dt: T,
) -> std::result::Result<StepReport<T>, StopEvent<T>> {
    let dim = state.net.dim();
    let old = &state.net;
    let mut net = old.clone();
    let mut curvature = zero_fields(old);
    let mut velocity = zero_fields(old);

    for (ei, e) in old.edges.iter().enumerate() {
        for i in e.interior_range() {
            let (p, n) = e.neighbours(i);
            match node_velocity(&e.nodes[p], &e.nodes[i], &e.nodes[n], params.omega) {
                Some((k, v)) => {
                    net.edges[ei].nodes[i] = e.nodes[i].axpy(dt, &v);
                    curvature[ei][i] = k;
                    velocity[ei][i] = v;
                }
                None => {
                    return Err(StopEvent {
                        kind: StopKind::EdgeCollapse,
                        time: state.t,
                        location: Some(e.nodes[i].clone()),
                        detail: format!("zero-length chord on edge {ei}"),
                    })
                }
            }
        }
    }

    // Jacobi sweep: every junction projects against the moved interior nodes.
    let junctions: Vec<_> = net.junctions().collect();
    let mut targets = Vec::with_capacity(junctions.len());
    let mut degenerate = 0;
    for &v in &junctions {
        match junction_project(&net, v) {
            Ok(f) => {
                if let Some(i) = f.degenerate {
                    degenerate += 1;
                    targets.push((v, f.point, Some(i)));
                } else {
                    targets.push((v, f.point, None));
                }
            }
            Err(_) => {
                return Err(StopEvent {
                    kind: StopKind::EdgeCollapse,
                    time: state.t + dt,
                    location: Some(net.vertex(v).position.clone()),
                    detail: format!("coincident neighbours at junction {v}"),
                })
            }
        }
    }
    for (v, p, _) in &targets {
        let old_p = net.vertex(*v).position.clone();
        let vel = (p - &old_p).scale(T::one() / dt);
        for (e, flag) in net.vertex(*v).incident.clone() {
            let idx = match flag {
                EndFlag::Start => 0,
                EndFlag::End => velocity[e.0].len() - 1,
            };
            velocity[e.0][idx] = vel.clone();
        }
        net.set_vertex_position(*v, p.clone());
    }
    // A clamped junction coincides with a neighbour node, which is removed.
    for (v, _, clamp) in &targets {
        if let Some(i) = clamp {
            let (e, flag) = net.vertex(*v).incident[*i];
            let edge = &mut net.edges[e.0];
            if edge.nodes.len() <= 2 {
                return Err(StopEvent {
                    kind: StopKind::EdgeCollapse,
                    time: state.t + dt,
                    location: Some(edge.nodes[0].clone()),
                    detail: format!("junction {v} reached the far end of edge {}", e.0),
                });
            }
            let idx = match flag {
                EndFlag::Start => 1,
                EndFlag::End => edge.nodes.len() - 2,
            };
            edge.nodes.remove(idx);
            curvature[e.0].remove(idx);
            velocity[e.0].remove(idx);
        }
    }

    state.net = net;
    state.t += dt;
    state.steps += 1;
    let mut remeshed = false;
    if params.remesh_interval > 0 && state.steps.is_multiple_of(params.remesh_interval) {
        remeshed = remesh(&mut state.net, params);
        if remeshed {
            reproject_junctions(&mut state.net).map_err(|detail| StopEvent {
                kind: StopKind::EdgeCollapse,
                time: state.t,
                location: None,
                detail,
            })?;
            curvature = curvature_field(&state.net);
            velocity = resize_like(&velocity, &state.net, dim);
        }
    }
    let max_speed = velocity
        .iter()
        .flat_map(|e| e.iter())
        .map(|v| v.norm())
        .fold(T::zero(), T::max);
    state.curvature = curvature;
    state.velocity = velocity;
    Ok(StepReport {
        dt,
        max_speed,
        remeshed,
        degenerate_junctions: degenerate,
    })
}

fn resize_like<T: Scalar>(old: &[Vec<Point<T>>], net: &Network<T>, dim: usize) -> Vec<Vec<Point<T>>> {
    net.edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if old[i].len() == e.nodes.len() {
                old[i].clone()
            } else {
                vec![Point::zeros(dim); e.nodes.len()]
            }
        })
        .collect()
}

fn reproject_junctions<T: Scalar>(net: &mut Network<T>) -> std::result::Result<(), String> {
    let js: Vec<_> = net.junctions().collect();
    for v in js {
        let f = junction_project(net, v).map_err(|e| e.to_string())?;
        net.set_vertex_position(v, f.point);
        if let Some(i) = f.degenerate {
            let (e, flag) = net.vertex(v).incident[i];
            let edge = &mut net.edges[e.0];
            if edge.nodes.len() <= 2 {
                return Err(format!("junction {v} reached the far end of edge {}", e.0));
            }
            let idx = match flag {
                EndFlag::Start => 1,
                EndFlag::End => edge.nodes.len() - 2,
            };
            edge.nodes.remove(idx);
        }
    }
    Ok(())
}

/// Local target spacing at every node of every edge.
pub fn spacing_field<T: Scalar>(net: &Network<T>, params: &StepParams<T>) -> Vec<Vec<T>> {
    let Some(ad) = params.adaptive else {
        return net.edges.iter().map(|e| vec![params.target_h; e.nodes.len()]).collect();
    };
    let kappa = curvature_field(net);
    let mut h: Vec<Vec<T>> = net
        .edges
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let mut hv: Vec<T> = kappa[ei]
                .iter()
                .map(|k| {
                    let kn = k.norm();
                    let rho_h = if kn > T::zero() {
                        T::one() / (kn * ad.nodes_per_radius)
                    } else {
                        T::infinity()
                    };
                    rho_h.min(params.target_h).max(ad.min_h)
                })
                .collect();
            if !e.is_closed() {
                let n = hv.len();
                if n >= 3 {
                    hv[0] = hv[1];
                    hv[n - 1] = hv[n - 2];
                } else {
                    hv = vec![params.target_h; n];
                }
            }
            hv
        })
        .collect();
    // Shared vertices take the smallest incident value.
    for v in &net.vertices {
        let mut m = T::infinity();
        for (e, flag) in &v.incident {
            let idx = if *flag == EndFlag::Start { 0 } else { h[e.0].len() - 1 };
            m = m.min(h[e.0][idx]);
        }
        for (e, flag) in &v.incident {
            let idx = if *flag == EndFlag::Start { 0 } else { h[e.0].len() - 1 };
            h[e.0][idx] = m;
        }
    }
    for (ei, e) in net.edges.iter().enumerate() {
        let n = e.nodes.len();
        let passes = if e.is_closed() { 2 } else { 1 };
        for _ in 0..passes {
            for i in 0..e.segment_count() {
                let j = (i + 1) % n;
                let lim = h[ei][i] + ad.grading * e.nodes[i].dist(&e.nodes[j]);
                if h[ei][j] > lim {
                    h[ei][j] = lim;
                }
            }
            for i in (0..e.segment_count()).rev() {
                let j = (i + 1) % n;
                let lim = h[ei][j] + ad.grading * e.nodes[i].dist(&e.nodes[j]);
                if h[ei][i] > lim {
                    h[ei][i] = lim;
                }
            }
        }
    }
    h
}

/// Resamples every edge whose spacing left `[h/2, 2h]` of its local target. Returns
/// whether anything changed.
pub fn remesh<T: Scalar>(net: &mut Network<T>, params: &StepParams<T>) -> bool {
    let field = spacing_field(net, params);
    let mut changed = false;
    for (ei, hv) in field.iter().enumerate() {
        let e = &net.edges[ei];
        let n = e.nodes.len();
        let out_of_band = (0..e.segment_count()).any(|i| {
            let j = (i + 1) % n;
            let h = T::half() * (hv[i] + hv[j]);
            let d = e.nodes[i].dist(&e.nodes[j]);
            d < T::half() * h || d > T::two() * h
        });
        if out_of_band {
            let new = resample_graded(e, hv);
            if new.nodes.len() >= 2 && !(matches!(new.ends, EdgeEnds::Closed) && new.nodes.len() < 3) {
                net.edges[ei] = new;
                changed = true;
            }
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use crate::network::{circle_loop, make_y};

    #[test]
    fn dt_formula_and_clamp() {
        let net = make_y(2, &Rotation::identity(2), 1.0, 11);
        let st = FlowState::new(net, 0.0).unwrap();
        let mut p = StepParams::new(0.1);
        let dt = adaptive_dt(&st, &p).unwrap();
        assert!((dt - 2e-3f64).abs() < 1e-15);
        p.dt_max = 1e-3;
        assert_eq!(adaptive_dt(&st, &p).unwrap(), 1e-3);
    }

    #[test]
    fn static_y_does_not_move() {
        let net = make_y(2, &Rotation::identity(2), 1.0, 11);
        let mut st = FlowState::new(net.clone(), 0.0).unwrap();
        let p = StepParams::new(0.1);
        for _ in 0..50 {
            let dt = adaptive_dt(&st, &p).unwrap();
            let r = step(&mut st, &p, dt).unwrap();
            assert!(r.max_speed < 1e-12);
        }
        for (a, b) in st.net.nodes().zip(net.nodes()) {
            assert!(a.dist(b) < 1e-12);
        }
    }

    #[test]
    fn regular_polygon_shrinks_at_unit_curvature() {
        let mut net = Network::new(2);
        net.add_closed_loop(circle_loop(2, &Point::xy(0.0, 0.0), 1.0, 64));
        let mut st = FlowState::new(net, 0.0).unwrap();
        let p = StepParams::new(2.0 * std::f64::consts::PI / 64.0);
        let dt = 1e-4;
        step(&mut st, &p, dt).unwrap();
        let r = st.net.edges[0].nodes[5].norm();
        assert!((r - (1.0 - dt)).abs() < 1e-13);
    }

    #[test]
    fn graded_field_is_lipschitz() {
        let mut net = Network::new(2);
        net.add_closed_loop(circle_loop(2, &Point::xy(0.0, 0.0), 0.05, 64));
        let mut p = StepParams::new(0.1);
        p.adaptive = Some(AdaptiveSpacing {
            min_h: 1e-3,
            nodes_per_radius: 8.0,
            grading: 0.3,
        });
        let h = spacing_field(&net, &p);
        for v in &h[0] {
            assert!((v - 0.05f64 / 8.0).abs() < 1e-6);
        }
    }
}
