//! Points on the flat 2-torus, tangent vectors, and 2×2 real matrices.
//!
//! The torus is `R²/Z²` with fundamental domain `[0,1)²`. Points are stored
//! reduced; tangent vectors and matrices live in the universal cover and are
//! plain Euclidean objects.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Reduces a real number to the half-open fundamental interval `[0, 1)`.
///
/// `wrap_unit(1.0) == 0.0`; negative inputs land in `[0,1)` as well.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // `x - floor(x)` can round to exactly 1.0 for x slightly below an integer.
    if r >= 1.0 { r - 1.0 } else { r }
}

/// Signed distance from `a` to the nearest representative of `b` on the
/// circle `R/Z`, in `[-1/2, 1/2)`.
#[inline]
pub fn circle_displacement(from: f64, to: f64) -> f64 {
    let d = wrap_unit(to - from);
    if d >= 0.5 { d - 1.0 } else { d }
}

/// A tangent vector (or any element of `R²`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    /// First component.
    pub x: f64,
    /// Second component.
    pub y: f64,
}

impl Vec2 {
    /// Creates a vector from its components.
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Euclidean dot product.
    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product (signed parallelogram area).
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Squared Euclidean norm.
    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// The same direction with unit norm. Returns `None` for (near-)zero
    /// vectors that cannot be normalized meaningfully.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Vec2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    /// Unsigned angle between `self` and `other`, in `[0, π]`.
    pub fn angle_to(self, other: Vec2) -> f64 {
        self.cross(other).abs().atan2(self.dot(other))
    }

    /// Counter-clockwise rotation by 90 degrees.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// True if both components are finite.
    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// A 2×2 real matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    /// Row 1, column 1.
    pub a: f64,
    /// Row 1, column 2.
    pub b: f64,
    /// Row 2, column 1.
    pub c: f64,
    /// Row 2, column 2.
    pub d: f64,
}

impl Mat2 {
    /// Creates a matrix `[[a, b], [c, d]]`.
    #[inline]
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    /// The identity matrix.
    #[inline]
    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    /// Builds the matrix with the given columns.
    #[inline]
    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        Mat2::new(c1.x, c2.x, c1.y, c2.y)
    }

    /// Diagonal matrix `diag(a, d)`.
    #[inline]
    pub const fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    /// Determinant.
    #[inline]
    pub fn det(self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Trace.
    #[inline]
    pub fn trace(self) -> f64 {
        self.a + self.d
    }

    /// Transpose.
    #[inline]
    pub fn transpose(self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    /// Matrix inverse, or `None` when the determinant vanishes or the result
    /// would not be finite.
    pub fn inverse(self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 {
            return None;
        }
        let inv = Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det);
        inv.is_finite().then_some(inv)
    }

    /// Matrix-vector product.
    #[inline]
    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    /// Matrix-matrix product `self * rhs`.
    #[inline]
    pub fn mul_mat(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Frobenius norm.
    pub fn frobenius(self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Singular values `(σ_max, σ_min)`, computed from the closed form for
    /// 2×2 matrices (eigenvalues of `MᵀM`).
    pub fn singular_values(self) -> (f64, f64) {
        let g11 = self.a * self.a + self.c * self.c;
        let g22 = self.b * self.b + self.d * self.d;
        let g12 = self.a * self.b + self.c * self.d;
        let mean = 0.5 * (g11 + g22);
        let disc = (0.5 * (g11 - g22)).hypot(g12);
        let hi = (mean + disc).max(0.0).sqrt();
        let lo = (mean - disc).max(0.0).sqrt();
        (hi, lo)
    }

    /// Operator (spectral) norm: the largest singular value.
    pub fn op_norm(self) -> f64 {
        self.singular_values().0
    }

    /// True if all four entries are finite.
    #[inline]
    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Mul<Mat2> for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, rhs: Mat2) -> Mat2 {
        self.mul_mat(rhs)
    }
}

impl Mul<Vec2> for Mat2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        self.apply(v)
    }
}

/// A point of the torus, stored with both coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    /// Creates a torus point, reducing the coordinates mod 1.
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        TorusPoint { x: wrap_unit(x), y: wrap_unit(y) }
    }

    /// x-coordinate in `[0,1)`.
    #[inline]
    pub fn x(self) -> f64 {
        self.x
    }

    /// y-coordinate in `[0,1)`.
    #[inline]
    pub fn y(self) -> f64 {
        self.y
    }

    /// Both coordinates as a (covering-space) vector.
    #[inline]
    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Translates the point by a covering-space vector, reducing mod 1.
    #[inline]
    pub fn translate(self, v: Vec2) -> TorusPoint {
        TorusPoint::new(self.x + v.x, self.y + v.y)
    }

    /// Shortest covering-space vector from `self` to `other`
    /// (components in `[-1/2, 1/2)`).
    #[inline]
    pub fn displacement_to(self, other: TorusPoint) -> Vec2 {
        Vec2::new(
            circle_displacement(self.x, other.x),
            circle_displacement(self.y, other.y),
        )
    }

    /// Distance induced by the flat metric (length of the shortest
    /// displacement).
    #[inline]
    pub fn dist(self, other: TorusPoint) -> f64 {
        self.displacement_to(other).norm()
    }

    /// True if both coordinates are finite (always the case for values built
    /// through [`TorusPoint::new`] from finite input).
    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}
