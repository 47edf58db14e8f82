//! Density thresholds and labels.

use std::fmt;

use crate::error::Result;
use crate::geometry::Point;
use crate::scalar::Scalar;

use super::density::SpacetimeTrack;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    /// Density near one.
    Regular,
    /// Density near 3/2.
    Triple,
    AboveZeta,
    AboveTwo,
    /// Between the bands above; none of the other labels applies.
    Intermediate,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Regular => "regular",
            Label::Triple => "triple",
            Label::AboveZeta => "above-zeta",
            Label::AboveTwo => "above-2",
            Label::Intermediate => "intermediate",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds<T> {
    /// Strictly between 3/2 and the shrinking-circle density.
    pub zeta: T,
    pub delta: T,
}

impl<T: Scalar> Default for Thresholds<T> {
    fn default() -> Self {
        Thresholds {
            zeta: T::lit(1.51),
            delta: T::lit(0.02),
        }
    }
}

/// Labels are tested from the top down: above-2, above-zeta, triple, regular.
pub fn classify<T: Scalar>(theta: T, th: &Thresholds<T>) -> Label {
    if theta >= T::two() - th.delta {
        Label::AboveTwo
    } else if theta > th.zeta {
        Label::AboveZeta
    } else if (theta - T::lit(1.5)).abs() < th.delta {
        Label::Triple
    } else if theta < T::one() + th.delta {
        Label::Regular
    } else {
        Label::Intermediate
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport<T> {
    pub centre: Point<T>,
    pub t: T,
    /// Strictly increasing.
    pub scales: Vec<T>,
    pub ratios: Vec<T>,
    pub time_mismatch: Vec<T>,
    /// Label of the ratio at the smallest scale.
    pub label: Label,
    pub thresholds: Thresholds<T>,
    /// Largest decrease `Θ(r_i) - Θ(r_{i+1})` between consecutive scales (zero if monotone).
    pub max_monotonicity_violation: T,
}

/// Ratios at the given scales, sorted increasingly, with the label of the smallest scale.
pub fn density_report<T: Scalar>(
    track: &dyn SpacetimeTrack<T>,
    centre: &Point<T>,
    t: T,
    scales: &[T],
    th: &Thresholds<T>,
) -> Result<DensityReport<T>> {
    let mut sc = scales.to_vec();
    sc.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sc.dedup();
    let mut ratios = Vec::with_capacity(sc.len());
    let mut mismatch = Vec::with_capacity(sc.len());
    for &r in &sc {
        let v = track.density_ratio(centre, t, r)?;
        ratios.push(v.value);
        mismatch.push(v.time_mismatch);
    }
    let worst = ratios
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(T::zero(), T::max);
    let label = ratios.first().map_or(Label::Regular, |&v| classify(v, th));
    Ok(DensityReport {
        centre: centre.clone(),
        t,
        scales: sc,
        ratios,
        time_mismatch: mismatch,
        label,
        thresholds: *th,
        max_monotonicity_violation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_at_reference_values() {
        let th = Thresholds::default();
        assert_eq!(classify(1.0, &th), Label::Regular);
        assert_eq!(classify(1.5, &th), Label::Triple);
        assert_eq!(classify(1.52, &th), Label::AboveZeta);
        assert_eq!(classify(1.99, &th), Label::AboveTwo);
        assert_eq!(classify(1.25, &th), Label::Intermediate);
    }
}
