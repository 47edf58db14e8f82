use crate::elliptic::surface::{cross3, norm3, sub3, ColumnKind, GluedSurface, GridVertex};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    /// Max of `|H⃗ + (1/ε) e_z^⊥|` over sheet-interior vertices in the band
    /// `[2ε, z_max - 2ε]`.
    pub max: T,
    pub at: Option<GridVertex>,
    pub vertices: usize,
    /// Max horizontal energy gradient; the residual only certifies a soliton when this is small.
    pub gradient_norm: T,
    /// Set when the gradient is too large for the surface to count as minimised.
    pub unminimised: bool,
}

/// Gradient threshold above which [`translator_residual`] flags its input.
pub const MINIMISED_GRADIENT: f64 = 1e-6;

/// Translating-soliton defect of the discrete surface. `H⃗` is the cotangent-weight
/// mean curvature vector `-∇A / (A_star / 3)`, with `A_star` the area of the vertex star;
/// the normal is the area-weighted star normal. Junction columns, where three sheets
/// meet, carry no normal and are skipped.
pub fn translator_residual<T: Scalar>(s: &GluedSurface<T>) -> ResidualReport<T> {
    let rows = s.rows();
    let mut grad = vec![vec![[T::zero(); 3]; rows + 1]; s.columns.len()];
    let mut star = vec![vec![T::zero(); rows + 1]; s.columns.len()];
    let mut normal = vec![vec![[T::zero(); 3]; rows + 1]; s.columns.len()];
    for t in s.triangles() {
        let p = [s.position(t.v[0]), s.position(t.v[1]), s.position(t.v[2])];
        let n = cross3(sub3(p[1], p[0]), sub3(p[2], p[0]));
        let len = norm3(n);
        if !(len > T::zero()) {
            continue;
        }
        let nh = [n[0] / len, n[1] / len, n[2] / len];
        for k in 0..3 {
            let d = cross3(sub3(p[(k + 1) % 3], p[(k + 2) % 3]), nh);
            let (c, j) = t.v[k];
            for i in 0..3 {
                grad[c][j][i] += T::half() * d[i];
                normal[c][j][i] += n[i];
            }
            star[c][j] += T::half() * len;
        }
    }
    let lo = T::two() * s.eps;
    let hi = s.z_max - T::two() * s.eps;
    let inv_eps = T::one() / s.eps;
    let mut max = T::zero();
    let mut at = None;
    let mut vertices = 0;
    for (c, col) in s.columns.iter().enumerate() {
        if !matches!(col.kind, ColumnKind::Interior { .. }) {
            continue;
        }
        for j in 1..rows {
            let z = s.heights[j];
            if z < lo || z > hi || !(star[c][j] > T::zero()) {
                continue;
            }
            let scale = -T::lit(3.0) / star[c][j];
            let h = [grad[c][j][0] * scale, grad[c][j][1] * scale, grad[c][j][2] * scale];
            let nl = norm3(normal[c][j]);
            let n = [normal[c][j][0] / nl, normal[c][j][1] / nl, normal[c][j][2] / nl];
            let r = [
                h[0] + inv_eps * n[2] * n[0],
                h[1] + inv_eps * n[2] * n[1],
                h[2] + inv_eps * n[2] * n[2],
            ];
            let v = norm3(r);
            vertices += 1;
            if v > max || at.is_none() {
                max = v;
                at = Some((c, j));
            }
        }
    }
    let gradient_norm = s.gradient_norm();
    ResidualReport {
        max,
        at,
        vertices,
        gradient_norm,
        unminimised: gradient_norm > T::lit(MINIMISED_GRADIENT),
    }
}
