use std::collections::VecDeque;

use crate::elliptic::surface::{cross3, dot3, norm3, sub3, GluedSurface, GridVertex, Triangle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeOptions<T> {
    pub max_iterations: usize,
    /// Stop once every free gradient component, multiplied by `e^{z/ε}` at its row, is
    /// at most this. The weight decays exponentially, so an unscaled tolerance would
    /// leave the upper rows unconverged; the scaled test also bounds the plain gradient.
    pub grad_tol: T,
    /// Stop once an accepted step lowers the energy by less than this fraction; zero
    /// disables the test. Upper rows carry exponentially little energy, so this test
    /// fires long before they converge and is off by default.
    pub energy_rtol: T,
    pub memory: usize,
    /// Triangles whose area falls below this fraction of their starting area count as
    /// collapsed.
    pub min_area_fraction: T,
    /// On a mesh inversion, redistribute the rows by arclength and retry once.
    pub resample_on_inversion: bool,
}

impl<T: Scalar> Default for MinimizeOptions<T> {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 20_000,
            grad_tol: T::lit(1e-9),
            energy_rtol: T::zero(),
            memory: 10,
            min_area_fraction: T::lit(1e-6),
            resample_on_inversion: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    EnergyStagnation,
    /// No trial step decreased the energy at floating-point resolution.
    LineSearchStalled,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeReport<T> {
    pub iterations: usize,
    /// Energy after every accepted step, starting with the initial energy. Built from
    /// exact per-step differences, so it never increases.
    pub energy_history: Vec<T>,
    /// Largest free gradient component.
    pub gradient_norm: T,
    /// Largest free gradient component times `e^{z/ε}`; the quantity `grad_tol` bounds.
    pub scaled_gradient_norm: T,
    pub reason: StopReason,
    pub resampled: bool,
}

impl<T: Scalar> MinimizeReport<T> {
    pub fn energy(&self) -> T {
        *self.energy_history.last().unwrap()
    }

    pub fn converged(&self) -> bool {
        matches!(self.reason, StopReason::GradientTolerance | StopReason::EnergyStagnation)
    }
}

/// One unknown grid vertex: two planar coordinates, or one offset along `direction`
/// from `base`.
struct Slot<T> {
    vertex: GridVertex,
    offset: usize,
    direction: Option<[T; 2]>,
    base: [T; 2],
}

struct Problem<T> {
    slots: Vec<Slot<T>>,
    len: usize,
    /// `e^{z/ε}` per unknown.
    unweight: Vec<T>,
    triangles: Vec<Triangle<T>>,
    area0: Vec<T>,
}

enum Trial<T> {
    Accepted { delta: T },
    Inverted { triangle: usize },
    NoDecrease,
}

impl<T: Scalar> Problem<T> {
    fn new(s: &GluedSurface<T>) -> Self {
        let mut slots = Vec::new();
        let mut len = 0;
        for (c, col) in s.columns.iter().enumerate() {
            for j in 0..col.pts.len() {
                if !s.is_movable((c, j)) {
                    continue;
                }
                let p = &col.pts[j];
                let base = match col.direction {
                    Some(d) => {
                        let a = p[0] * d[0] + p[1] * d[1];
                        [p[0] - a * d[0], p[1] - a * d[1]]
                    }
                    None => [T::zero(); 2],
                };
                slots.push(Slot {
                    vertex: (c, j),
                    offset: len,
                    direction: col.direction,
                    base,
                });
                len += if col.direction.is_some() { 1 } else { 2 };
            }
        }
        let mut unweight = vec![T::one(); len];
        for sl in &slots {
            let u = (s.heights[sl.vertex.1] / s.eps).exp();
            unweight[sl.offset] = u;
            if sl.direction.is_none() {
                unweight[sl.offset + 1] = u;
            }
        }
        let triangles = s.triangles();
        let area0 = triangles.iter().map(|t| norm3(s.triangle_normal(t))).collect();
        Problem {
            slots,
            len,
            unweight,
            triangles,
            area0,
        }
    }

    fn read(&self, s: &GluedSurface<T>) -> Vec<T> {
        let mut x = vec![T::zero(); self.len];
        for sl in &self.slots {
            let p = &s.columns[sl.vertex.0].pts[sl.vertex.1];
            match sl.direction {
                Some(d) => x[sl.offset] = p[0] * d[0] + p[1] * d[1],
                None => {
                    x[sl.offset] = p[0];
                    x[sl.offset + 1] = p[1];
                }
            }
        }
        x
    }

    fn write(&self, s: &mut GluedSurface<T>, x: &[T]) {
        for sl in &self.slots {
            let p = &mut s.columns[sl.vertex.0].pts[sl.vertex.1];
            match sl.direction {
                Some(d) => {
                    p[0] = sl.base[0] + x[sl.offset] * d[0];
                    p[1] = sl.base[1] + x[sl.offset] * d[1];
                }
                None => {
                    p[0] = x[sl.offset];
                    p[1] = x[sl.offset + 1];
                }
            }
        }
    }

    /// Planar displacement of every grid vertex for a step `dx` in the unknowns.
    fn displacements(&self, s: &GluedSurface<T>, dx: &[T]) -> Vec<Vec<[T; 2]>> {
        let mut d: Vec<Vec<[T; 2]>> = s.columns.iter().map(|c| vec![[T::zero(); 2]; c.pts.len()]).collect();
        for sl in &self.slots {
            d[sl.vertex.0][sl.vertex.1] = match sl.direction {
                Some(u) => [dx[sl.offset] * u[0], dx[sl.offset] * u[1]],
                None => [dx[sl.offset], dx[sl.offset + 1]],
            };
        }
        d
    }

    fn scaled_norm(&self, g: &[T]) -> T {
        g.iter()
            .zip(&self.unweight)
            .fold(T::zero(), |m, (&v, &u)| m.max(v.abs() * u))
    }

    fn gradient(&self, s: &GluedSurface<T>) -> Vec<T> {
        let g = s.gradient();
        let mut out = vec![T::zero(); self.len];
        for sl in &self.slots {
            let v = g[sl.vertex.0][sl.vertex.1];
            match sl.direction {
                Some(d) => out[sl.offset] = v[0] * d[0] + v[1] * d[1],
                None => {
                    out[sl.offset] = v[0];
                    out[sl.offset + 1] = v[1];
                }
            }
        }
        out
    }

    /// Diagonal of the area Hessian, `Σ w |opposite edge|² / (4 A)` per coordinate.
    fn diagonal(&self, s: &GluedSurface<T>) -> Vec<T> {
        let mut d: Vec<Vec<T>> = s.columns.iter().map(|c| vec![T::zero(); c.pts.len()]).collect();
        for t in &self.triangles {
            let p = [s.position(t.v[0]), s.position(t.v[1]), s.position(t.v[2])];
            let area = T::half() * norm3(cross3(sub3(p[1], p[0]), sub3(p[2], p[0])));
            if !(area > T::zero()) {
                continue;
            }
            for k in 0..3 {
                let opp = sub3(p[(k + 1) % 3], p[(k + 2) % 3]);
                let (c, j) = t.v[k];
                d[c][j] += t.weight * dot3(opp, opp) / (T::lit(4.0) * area);
            }
        }
        let mut out = vec![T::one(); self.len];
        for sl in &self.slots {
            let v = d[sl.vertex.0][sl.vertex.1].max(T::min_positive_value().sqrt());
            out[sl.offset] = v;
            if sl.direction.is_none() {
                out[sl.offset + 1] = v;
            }
        }
        out
    }

    /// Energy change of moving from `s` by `dx`, accumulated per triangle without
    /// cancellation; rejects steps that flip or collapse a triangle.
    fn trial(&self, s: &GluedSurface<T>, dx: &[T], min_frac: T) -> Trial<T> {
        let moves = self.displacements(s, dx);
        let disp = |v: GridVertex| -> [T; 3] {
            let m = moves[v.0][v.1];
            [m[0], m[1], T::zero()]
        };
        let mut terms = Vec::with_capacity(self.triangles.len());
        for (ti, t) in self.triangles.iter().enumerate() {
            let a = s.position(t.v[0]);
            let b = s.position(t.v[1]);
            let c = s.position(t.v[2]);
            let (da, db, dc) = (disp(t.v[0]), disp(t.v[1]), disp(t.v[2]));
            let e1 = sub3(b, a);
            let e2 = sub3(c, a);
            let d1 = sub3(db, da);
            let d2 = sub3(dc, da);
            if d1.iter().chain(d2.iter()).all(|&v| v == T::zero()) {
                continue;
            }
            let e2n = [e2[0] + d2[0], e2[1] + d2[1], e2[2] + d2[2]];
            let n = cross3(e1, e2);
            let x1 = cross3(d1, e2n);
            let x2 = cross3(e1, d2);
            let dn = [x1[0] + x2[0], x1[1] + x2[1], x1[2] + x2[2]];
            let nn = [n[0] + dn[0], n[1] + dn[1], n[2] + dn[2]];
            let len = norm3(n);
            let len_new = norm3(nn);
            if !(dot3(nn, n) > T::zero()) || !(len_new > min_frac * self.area0[ti]) {
                return Trial::Inverted { triangle: ti };
            }
            let sum = [nn[0] + n[0], nn[1] + n[1], nn[2] + n[2]];
            // ½ (|N'| - |N|) as a quotient, exact for small steps
            terms.push(t.weight * T::half() * dot3(dn, sum) / (len_new + len));
        }
        let delta = crate::elliptic::surface::compensated_sum(terms.into_iter());
        if delta < T::zero() {
            Trial::Accepted { delta }
        } else {
            Trial::NoDecrease
        }
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn max_abs<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
}

/// Minimises the translator energy over the horizontal positions of all interior rows
/// (junction columns shared between their sheets) by preconditioned L-BFGS with an
/// Armijo backtracking search.
pub fn minimize<T: Scalar>(surface: &mut GluedSurface<T>, opts: &MinimizeOptions<T>) -> Result<MinimizeReport<T>> {
    match run(surface, opts) {
        Err(Error::MeshInversion { .. }) if opts.resample_on_inversion => {
            surface.equidistribute_rows();
            let mut rep = run(surface, opts)?;
            rep.resampled = true;
            Ok(rep)
        }
        other => other,
    }
}

fn run<T: Scalar>(s: &mut GluedSurface<T>, opts: &MinimizeOptions<T>) -> Result<MinimizeReport<T>> {
    let prob = Problem::new(s);
    let mut energy = s.energy().value;
    let mut history = vec![energy];
    let mut x = prob.read(s);
    let mut g = prob.gradient(s);
    let mut hist: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::new();
    let c1 = T::lit(1e-4);
    let mut iterations = 0;
    let reason = loop {
        if prob.scaled_norm(&g) <= opts.grad_tol {
            break StopReason::GradientTolerance;
        }
        if iterations >= opts.max_iterations {
            break StopReason::MaxIterations;
        }
        // two-loop recursion with a scaled diagonal initial inverse Hessian
        let diag = prob.diagonal(s);
        let mut q: Vec<T> = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (sv, yv, rho) in hist.iter().rev() {
            let a = *rho * dot(sv, &q);
            for (qi, &yi) in q.iter_mut().zip(yv) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = match hist.back() {
            Some((sv, yv, _)) => {
                let dy: Vec<T> = yv.iter().zip(&diag).map(|(&y, &d)| y / d).collect();
                dot(sv, yv) / dot(yv, &dy)
            }
            None => T::one(),
        };
        for (qi, &d) in q.iter_mut().zip(&diag) {
            *qi = *qi * gamma / d;
        }
        for ((sv, yv, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(yv, &q);
            for (qi, &si) in q.iter_mut().zip(sv) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<T> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < T::zero()) {
            // not a descent direction: drop the memory and use the preconditioned gradient
            hist.clear();
            dir = g.iter().zip(&diag).map(|(&gi, &d)| -gi / d).collect();
            slope = dot(&g, &dir);
        }
        let mut step = T::one();
        let mut accepted = None;
        let mut inverted = None;
        let mut stalled = false;
        for _ in 0..60 {
            let dx: Vec<T> = dir.iter().map(|&d| d * step).collect();
            match prob.trial(s, &dx, opts.min_area_fraction) {
                Trial::Accepted { delta } if delta <= c1 * step * slope => {
                    accepted = Some((dx, delta));
                    break;
                }
                Trial::Inverted { triangle } => inverted = Some(triangle),
                Trial::Accepted { .. } => {}
                Trial::NoDecrease => {
                    if max_abs(&dx) <= T::epsilon() * (T::one() + max_abs(&x)) {
                        stalled = true;
                        break;
                    }
                }
            }
            step = step * T::half();
        }
        let Some((dx, delta)) = accepted else {
            if let (Some(ti), false) = (inverted, stalled) {
                let t = &prob.triangles[ti];
                let (column, row) = t.v[0];
                let sheet = s.sheets.iter().position(|sh| sh.columns.contains(&column)).unwrap_or(0);
                return Err(Error::MeshInversion { sheet, column, row });
            }
            break StopReason::LineSearchStalled;
        };
        for (xi, &d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        prob.write(s, &x);
        energy += delta;
        history.push(energy);
        iterations += 1;
        let g_new = prob.gradient(s);
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&dx, &y);
        if sy > T::zero() {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((dx, y, T::one() / sy));
        }
        g = g_new;
        if -delta <= opts.energy_rtol * energy.abs() {
            break StopReason::EnergyStagnation;
        }
    };
    Ok(MinimizeReport {
        iterations,
        energy_history: history,
        gradient_norm: max_abs(&g),
        scaled_gradient_norm: prob.scaled_norm(&g),
        reason,
        resampled: false,
    })
}
