use crate::elliptic::minimize::{minimize, MinimizeOptions, MinimizeReport};
use crate::elliptic::surface::{build_initial_surface, GluedSurface};
use crate::error::{Error, Result};
use crate::network::{resample, Network};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedFlowOptions<T> {
    /// Defaults to `max(10ε, t_max/ε + 4ε)`, which keeps every requested slice out of
    /// the top artifact band.
    pub z_max: Option<T>,
    /// Height rows per unit `ε`.
    pub rows_per_eps: usize,
    /// Resample every edge to this spacing before building the surface.
    pub spacing: Option<T>,
    pub minimize: MinimizeOptions<T>,
}

impl<T: Scalar> Default for RegularizedFlowOptions<T> {
    fn default() -> Self {
        RegularizedFlowOptions {
            z_max: None,
            rows_per_eps: 4,
            spacing: None,
            minimize: MinimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedFlow<T> {
    pub surface: GluedSurface<T>,
    pub report: MinimizeReport<T>,
    /// `(t, slice at z = t/ε)` in the order requested.
    pub slices: Vec<(T, Network<T>)>,
}

/// Builds the product surface over `net`, minimises the translator energy and slices
/// the minimiser at `z = t/ε` for every requested time.
pub fn regularized_flow<T: Scalar>(
    net: &Network<T>,
    eps: T,
    times: &[T],
    opts: &RegularizedFlowOptions<T>,
) -> Result<RegularizedFlow<T>> {
    if !(eps > T::zero()) {
        return Err(Error::param("eps", "must be positive"));
    }
    let t_max = times.iter().copied().fold(T::zero(), T::max);
    let four = T::lit(4.0);
    let z_max = opts
        .z_max
        .unwrap_or_else(|| (T::lit(10.0) * eps).max(t_max / eps + four * eps));
    let lo = T::two() * eps * eps;
    let hi = eps * (z_max - T::two() * eps);
    let slack = T::lit(1e-12) * hi;
    if let Some(t) = times.iter().find(|&&t| !(t >= lo - slack && t <= hi + slack)) {
        return Err(Error::param(
            "times",
            format!("{t:?} outside the admissible window [{lo:?}, {hi:?}]"),
        ));
    }
    if opts.rows_per_eps == 0 {
        return Err(Error::param("rows_per_eps", "must be positive"));
    }
    let rows = (z_max / eps * T::from_usize_lossy(opts.rows_per_eps))
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::param("z_max", "row count not representable"))?;
    let boundary = match opts.spacing {
        Some(h) => {
            let mut out = net.clone();
            for e in &mut out.edges {
                *e = resample(e, h)?;
            }
            out
        }
        None => net.clone(),
    };
    let mut surface = build_initial_surface(&boundary, eps, z_max, rows)?;
    let report = minimize(&mut surface, &opts.minimize)?;
    let slices = times
        .iter()
        .map(|&t| surface.slice(t / eps).map(|n| (t, n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegularizedFlow { surface, report, slices })
}
