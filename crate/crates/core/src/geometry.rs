//! Points in R^d, spacetime points, rotations and elementary distance queries.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point (or vector) in R^d, d = 1 + k. Stored inline for d <= 3.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Point<T> {
    coords: SmallVec<[T; 3]>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: &[T]) -> Self {
        Point {
            coords: SmallVec::from_slice(coords),
        }
    }

    pub fn from_vec(coords: Vec<T>) -> Self {
        Point {
            coords: SmallVec::from_vec(coords),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Point {
            coords: SmallVec::from_elem(T::zero(), dim),
        }
    }

    /// The unit vector e_axis in R^dim.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut p = Self::zeros(dim);
        p.coords[axis] = T::one();
        p
    }

    pub fn xy(x: T, y: T) -> Self {
        Self::new(&[x, y])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [T] {
        &mut self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(&self, other: &Self) -> T {
        self.dist_sq(other).sqrt()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Self) -> T {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .fold(T::zero(), |acc, (a, b)| {
                let d = *a - *b;
                acc + d * d
            })
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Point {
            coords: self.coords.iter().map(|c| *c * s).collect(),
        }
    }

    /// self + s * other
    #[inline]
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        Point {
            coords: self
                .coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| *a + s * *b)
                .collect(),
        }
    }

    /// (1 - w) * self + w * other
    #[inline]
    pub fn lerp(&self, other: &Self, w: T) -> Self {
        Point {
            coords: self
                .coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| *a + w * (*b - *a))
                .collect(),
        }
    }

    /// Component of `self` orthogonal to the unit vector `dir`.
    pub fn reject(&self, dir: &Self) -> Self {
        self.axpy(-self.dot(dir), dir)
    }

    pub fn add_assign_scaled(&mut self, s: T, other: &Self) {
        for (a, b) in self.coords.iter_mut().zip(other.coords.iter()) {
            *a += s * *b;
        }
    }

    pub fn convert<U: Scalar>(&self) -> Point<U> {
        Point {
            coords: self
                .coords
                .iter()
                .map(|c| U::lit(c.to_f64_lossy()))
                .collect(),
        }
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

impl<T> IndexMut<usize> for Point<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.coords[i]
    }
}

impl<T: Scalar> Add for &Point<T> {
    type Output = Point<T>;
    fn add(self, rhs: &Point<T>) -> Point<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Scalar> Sub for &Point<T> {
    type Output = Point<T>;
    fn sub(self, rhs: &Point<T>) -> Point<T> {
        Point {
            coords: self
                .coords
                .iter()
                .zip(rhs.coords.iter())
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Scalar> Mul<T> for &Point<T> {
    type Output = Point<T>;
    fn mul(self, rhs: T) -> Point<T> {
        self.scale(rhs)
    }
}

impl<T: Scalar> Neg for &Point<T> {
    type Output = Point<T>;
    fn neg(self) -> Point<T> {
        self.scale(-T::one())
    }
}

/// A point X = (x, t) of spacetime R^d x R.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePoint<T> {
    pub x: Point<T>,
    pub t: T,
}

impl<T: Scalar> SpacetimePoint<T> {
    pub fn new(x: Point<T>, t: T) -> Self {
        SpacetimePoint { x, t }
    }
}

/// Parabolic rescaling D_lambda(x, t) = (lambda x, lambda^2 t).
pub fn parabolic_rescale<T: Scalar>(p: &SpacetimePoint<T>, lambda: T) -> Result<SpacetimePoint<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    Ok(SpacetimePoint {
        x: p.x.scale(lambda),
        t: p.t * lambda * lambda,
    })
}

/// Dense orthogonal d x d matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation<T> {
    dim: usize,
    m: Vec<T>,
}

impl<T: Scalar> Rotation<T> {
    pub fn identity(dim: usize) -> Self {
        let mut m = vec![T::zero(); dim * dim];
        for i in 0..dim {
            m[i * dim + i] = T::one();
        }
        Rotation { dim, m }
    }

    /// Rotation by `angle` in the (axis_a, axis_b) coordinate plane, counterclockwise
    /// from e_a towards e_b.
    pub fn in_plane(dim: usize, axis_a: usize, axis_b: usize, angle: T) -> Self {
        assert!(axis_a < dim && axis_b < dim && axis_a != axis_b);
        let mut r = Self::identity(dim);
        let (s, c) = angle.sin_cos();
        r.m[axis_a * dim + axis_a] = c;
        r.m[axis_b * dim + axis_b] = c;
        r.m[axis_b * dim + axis_a] = s;
        r.m[axis_a * dim + axis_b] = -s;
        r
    }

    /// Builds the matrix from its columns; they must be orthonormal.
    pub fn from_columns(cols: &[Point<T>]) -> Result<Self> {
        let dim = cols.len();
        if cols.iter().any(|c| c.dim() != dim) {
            return Err(Error::param("columns", "need d columns of length d"));
        }
        let mut m = vec![T::zero(); dim * dim];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..dim {
                m[i * dim + j] = c[i];
            }
        }
        let r = Rotation { dim, m };
        let tol = T::lit(1e3) * T::epsilon();
        for i in 0..dim {
            for j in 0..dim {
                let d = cols[i].dot(&cols[j]);
                let target = if i == j { T::one() } else { T::zero() };
                if (d - target).abs() > tol {
                    return Err(Error::param("columns", "not orthonormal"));
                }
            }
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, p: &Point<T>) -> Point<T> {
        let d = self.dim;
        let mut out = Point::zeros(d);
        for i in 0..d {
            let mut acc = T::zero();
            for j in 0..d {
                acc += self.m[i * d + j] * p[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn compose(&self, inner: &Self) -> Self {
        let d = self.dim;
        let mut m = vec![T::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = T::zero();
                for k in 0..d {
                    acc += self.m[i * d + k] * inner.m[k * d + j];
                }
                m[i * d + j] = acc;
            }
        }
        Rotation { dim: d, m }
    }
}

/// Squared distance from `p` to the segment [a, b] and the clamped parameter.
pub fn point_segment_dist_sq<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> (T, T) {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let s = if len_sq > T::zero() {
        ((p - a).dot(&ab) / len_sq).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let q = a.axpy(s, &ab);
    (p.dist_sq(&q), s)
}

/// Squared distance between segments [p0, p1] and [q0, q1] in R^d.
pub fn segment_segment_dist_sq<T: Scalar>(
    p0: &Point<T>,
    p1: &Point<T>,
    q0: &Point<T>,
    q1: &Point<T>,
) -> T {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(&r);
    let zero = T::zero();
    let one = T::one();
    let (s, t);
    if a <= zero && e <= zero {
        return p0.dist_sq(q0);
    }
    if a <= zero {
        s = zero;
        t = (f / e).max(zero).min(one);
    } else {
        let c = d1.dot(&r);
        if e <= zero {
            t = zero;
            s = (-c / a).max(zero).min(one);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > zero {
                ((b * f - c * e) / denom).max(zero).min(one)
            } else {
                zero
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < zero {
                t0 = zero;
                s0 = (-c / a).max(zero).min(one);
            } else if t0 > one {
                t0 = one;
                s0 = ((b - c) / a).max(zero).min(one);
            }
            s = s0;
            t = t0;
        }
    }
    let cp = p0.axpy(s, &d1);
    let cq = q0.axpy(t, &d2);
    cp.dist_sq(&cq)
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt). Vectors
/// whose residual falls below `tol` are treated as dependent.
pub fn orthonormal_span<T: Scalar>(vectors: &[Point<T>], tol: T) -> Vec<Point<T>> {
    let mut basis: Vec<Point<T>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            w = w.reject(b);
        }
        if w.norm() > tol {
            basis.push(w.normalized().expect("nonzero"));
        }
    }
    basis
}

/// Completes an orthonormal set to a basis of R^dim.
pub fn complete_basis<T: Scalar>(partial: &[Point<T>], dim: usize) -> Vec<Point<T>> {
    let mut basis = partial.to_vec();
    for axis in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut w = Point::unit(dim, axis);
        for b in &basis {
            w = w.reject(b);
        }
        if w.norm() > T::lit(1e-3) {
            basis.push(w.normalized().expect("nonzero"));
        }
    }
    basis
}
