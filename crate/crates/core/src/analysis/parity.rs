//! Crossing counts of small spheres with a network.
//!
//! In the plane the sphere is the circle bounding a disk. A curve enters and leaves the
//! disk, so the count is even unless the disk holds an odd number of odd-valence vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{Network, Tolerances};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ParityResult<T> {
    pub count: usize,
    pub even: bool,
    pub triple_candidate: bool,
    pub crossings: Vec<Point<T>>,
}

fn suggestion<T: Scalar>(dim: usize, radius: T, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mag = 1e-2 * radius.to_f64_lossy();
    (0..dim).map(|_| rng.gen_range(-1.0..1.0) * mag).collect()
}

/// Number of transversal crossings of the sphere `|y - centre| = radius` with the network.
pub fn disk_parity<T: Scalar>(
    net: &Network<T>,
    centre: &Point<T>,
    radius: T,
    tol: &Tolerances<T>,
    seed: u64,
) -> Result<ParityResult<T>> {
    if !(radius > T::zero()) {
        return Err(Error::param("radius", "must be positive"));
    }
    if centre.dim() != net.dim() {
        return Err(Error::Dimension {
            expected: net.dim(),
            found: centre.dim(),
        });
    }
    let embed = tol.embed_rel * net.diameter().max(radius);
    let reject = |reason: String| Error::NonTransversal {
        reason,
        suggested_shift: suggestion(net.dim(), radius, seed),
    };
    for v in net.junctions() {
        let p = &net.vertex(v).position;
        if (p.dist(centre) - radius).abs() <= embed {
            return Err(reject(format!("junction {v} lies on the sphere")));
        }
    }
    for p in net.nodes() {
        if (p.dist(centre) - radius).abs() <= embed {
            return Err(reject("a node lies on the sphere".into()));
        }
    }
    let min_sin = tol.angle.sin();
    let mut crossings = Vec::new();
    for (_, a, b) in net.segments() {
        let d = b - a;
        let ac = a - centre;
        let qa = d.norm_sq();
        let qb = T::two() * ac.dot(&d);
        let qc = ac.norm_sq() - radius * radius;
        let disc = qb * qb - T::lit(4.0) * qa * qc;
        if disc < T::zero() || !(qa > T::zero()) {
            continue;
        }
        let sq = disc.sqrt();
        // numerically stable root pair
        let qq = -T::half() * (qb + if qb >= T::zero() { sq } else { -sq });
        let mut roots = Vec::with_capacity(2);
        if qq != T::zero() {
            roots.push(qq / qa);
            roots.push(qc / qq);
        } else {
            roots.push(T::zero());
        }
        for s in roots {
            if s > T::zero() && s < T::one() {
                let y = a.axpy(s, &d);
                let n = (&y - centre).scale(T::one() / radius);
                let u = d.scale(T::one() / qa.sqrt());
                if u.dot(&n).abs() < min_sin {
                    return Err(reject("tangential contact".into()));
                }
                crossings.push(y);
            }
        }
    }
    let count = crossings.len();
    Ok(ParityResult {
        count,
        even: count % 2 == 0,
        triple_candidate: count == 3,
        crossings,
    })
}
