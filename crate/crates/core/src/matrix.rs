//! Hyperbolic integer matrices, the shear family `A(t)` they generate, and
//! the eigenbasis chart used by the slow-down construction.
//!
//! Throughout, `A = [[a, b], [c, d]]` is an integer matrix with determinant 1
//! and trace `a + d > 2`, acting on the torus as an area-preserving Anosov
//! automorphism. Replacing the slope of the twisted coordinate by `t` yields
//! the one-parameter shear family
//!
//! ```text
//! A(t) = [[a + |b|(t-1), b], [c + sgn(b) d (t-1), d]],
//! ```
//!
//! which is again hyperbolic (with determinant 1) whenever its trace
//! `a + d + |b|(t-1)` exceeds 2. Its eigenvalues are
//! `μ±(t) = (T ± sqrt(T²-4))/2` with `T` that trace, and explicit
//! eigenvectors are `(2b, φ±(T))` where `φ±(u) = 2d - u ± sqrt(u² - 4)`.

use crate::error::{Error, Result};
use crate::torus::{Mat2, TorusPoint, Vec2};
use serde::{Deserialize, Serialize};

/// A hyperbolic element of `SL(2, Z)` with positive trace.
///
/// Invariants enforced at construction: integer entries, `det = 1`,
/// `trace > 2`, and `b ≠ 0` (the twisted coordinate must actually couple,
/// which every hyperbolic matrix satisfies after an integral change of basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicMatrix {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl HyperbolicMatrix {
    /// Validates and wraps an integer matrix `[[a, b], [c, d]]`.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a
            .checked_mul(d)
            .and_then(|ad| b.checked_mul(c).map(|bc| ad - bc))
            .ok_or_else(|| Error::domain("matrix entries overflow i64 in determinant"))?;
        if det != 1 {
            return Err(Error::domain(format!(
                "det [[{a}, {b}], [{c}, {d}]] = {det} must equal 1"
            )));
        }
        let tr = a + d;
        if tr <= 2 {
            let hint = if tr < -2 {
                "; negate the matrix to make the trace positive".to_string()
            } else {
                String::new()
            };
            return Err(Error::TraceTooSmall {
                trace: tr as f64,
                context: format!("matrix [[{a}, {b}], [{c}, {d}]]"),
                hint,
            });
        }
        if b == 0 {
            return Err(Error::domain(format!(
                "entry b = 0 in [[{a}, {b}], [{c}, {d}]]; the construction twists the \
                 coordinate coupled through b and needs b != 0"
            )));
        }
        Ok(HyperbolicMatrix { a, b, c, d })
    }

    /// Entry `a` (row 1, col 1).
    pub fn a(&self) -> i64 {
        self.a
    }
    /// Entry `b` (row 1, col 2).
    pub fn b(&self) -> i64 {
        self.b
    }
    /// Entry `c` (row 2, col 1).
    pub fn c(&self) -> i64 {
        self.c
    }
    /// Entry `d` (row 2, col 2).
    pub fn d(&self) -> i64 {
        self.d
    }

    /// Integer trace `a + d`.
    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    /// `|b|` as a float.
    pub fn abs_b(&self) -> f64 {
        (self.b as f64).abs()
    }

    /// `sgn(b)` as a float (`±1`; `b = 0` is excluded at construction).
    pub fn sgn_b(&self) -> f64 {
        if self.b > 0 { 1.0 } else { -1.0 }
    }

    /// The discriminant `(a+d)² - 4` of the characteristic polynomial.
    pub fn discriminant(&self) -> i64 {
        let t = self.trace();
        t * t - 4
    }

    /// The matrix as floating-point [`Mat2`].
    pub fn as_mat2(&self) -> Mat2 {
        Mat2::new(self.a as f64, self.b as f64, self.c as f64, self.d as f64)
    }

    /// Exact inverse `[[d, -b], [-c, a]]` as a float matrix.
    pub fn inverse_mat2(&self) -> Mat2 {
        Mat2::new(self.d as f64, -self.b as f64, -self.c as f64, self.a as f64)
    }

    /// Applies the automorphism to a torus point (exactly linear, then
    /// reduced mod 1).
    pub fn apply(&self, p: TorusPoint) -> TorusPoint {
        TorusPoint::new(
            self.a as f64 * p.x() + self.b as f64 * p.y(),
            self.c as f64 * p.x() + self.d as f64 * p.y(),
        )
    }

    /// Applies the inverse automorphism to a torus point.
    pub fn apply_inverse(&self, p: TorusPoint) -> TorusPoint {
        TorusPoint::new(
            self.d as f64 * p.x() - self.b as f64 * p.y(),
            -(self.c as f64) * p.x() + self.a as f64 * p.y(),
        )
    }

    /// Trace of the shear member `A(t)`: `a + d + |b|(t - 1)`.
    pub fn shear_trace(&self, t: f64) -> f64 {
        self.trace() as f64 + self.abs_b() * (t - 1.0)
    }

    /// The shear family member
    /// `A(t) = [[a + |b|(t-1), b], [c + sgn(b) d (t-1), d]]`.
    ///
    /// Errors with [`Error::TraceTooSmall`] when `a + d + |b|(t-1) <= 2`,
    /// i.e. when the member would not be hyperbolic.
    pub fn shear(&self, t: f64) -> Result<Mat2> {
        let tr = self.shear_trace(t);
        if !(tr > 2.0) {
            return Err(Error::TraceTooSmall {
                trace: tr,
                context: format!("shear member at slope t = {t}"),
                hint: String::new(),
            });
        }
        Ok(self.shear_unchecked(t))
    }

    /// The shear matrix without the hyperbolicity check (used to evaluate
    /// derivative cocycles whose slopes are certified elsewhere).
    pub fn shear_unchecked(&self, t: f64) -> Mat2 {
        Mat2::new(
            self.a as f64 + self.abs_b() * (t - 1.0),
            self.b as f64,
            self.c as f64 + self.sgn_b() * self.d as f64 * (t - 1.0),
            self.d as f64,
        )
    }

    /// `φ⁺(u) = 2d - u + sqrt(u² - 4)`, increasing in `u` for `u > 2`,
    /// with range `[2(d-1), 2d)`.
    pub fn phi_plus(&self, u: f64) -> f64 {
        2.0 * self.d as f64 - u + (u * u - 4.0).sqrt()
    }

    /// `φ⁻(u) = 2d - u - sqrt(u² - 4)`, decreasing in `u` for `u > 2`.
    pub fn phi_minus(&self, u: f64) -> f64 {
        2.0 * self.d as f64 - u - (u * u - 4.0).sqrt()
    }

    /// Expanding eigenvalue `μ⁺(t) = (T + sqrt(T²-4))/2` of `A(t)`,
    /// where `T = a + d + |b|(t-1)`. Requires `T > 2`.
    pub fn mu_plus(&self, t: f64) -> Result<f64> {
        let tr = self.shear_trace(t);
        if !(tr > 2.0) {
            return Err(Error::TraceTooSmall {
                trace: tr,
                context: format!("eigenvalue of shear member at slope t = {t}"),
                hint: String::new(),
            });
        }
        Ok(0.5 * (tr + (tr * tr - 4.0).sqrt()))
    }

    /// Contracting eigenvalue `μ⁻(t) = (T - sqrt(T²-4))/2 = 1/μ⁺(t)`.
    pub fn mu_minus(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.mu_plus(t)?)
    }

    /// Expansion rate `Λ = log μ⁺(1)` of the unperturbed automorphism.
    pub fn expansion_rate(&self) -> f64 {
        // trace > 2 is guaranteed, so unwrap is safe.
        self.mu_plus(1.0).expect("validated matrix has trace > 2").ln()
    }

    /// Unnormalized expanding eigenvector `e⁺(t) = (2b, φ⁺(T))` of `A(t)`.
    pub fn eigenvector_plus(&self, t: f64) -> Vec2 {
        Vec2::new(2.0 * self.b as f64, self.phi_plus(self.shear_trace(t)))
    }

    /// Unnormalized contracting eigenvector `e⁻(t) = (2b, φ⁻(T))` of `A(t)`.
    pub fn eigenvector_minus(&self, t: f64) -> Vec2 {
        Vec2::new(2.0 * self.b as f64, self.phi_minus(self.shear_trace(t)))
    }

    /// Eigenbasis chart at slope 1 (see [`EigenBasis`]).
    pub fn eigen_basis(&self) -> EigenBasis {
        EigenBasis::new(self)
    }
}

/// Orthonormal-as-possible coordinates adapted to the unperturbed
/// automorphism: the chart matrix `B` has the *unit* expanding and
/// contracting eigenvectors of `A(1)` as columns, so `ξ = B⁻¹ v` expresses a
/// tangent vector in eigen-coordinates and `‖ξ‖` is the adapted norm.
///
/// `K₁ ‖ξ‖ ≤ ‖B ξ‖ ≤ K₂ ‖ξ‖` with `K₁ = σ_min(B) ≤ 1 ≤ σ_max(B) = K₂`
/// (equalities when `A` is symmetric, making `B` orthogonal).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EigenBasis {
    /// Unit expanding eigenvector (first chart direction).
    pub unstable: Vec2,
    /// Unit contracting eigenvector (second chart direction).
    pub stable: Vec2,
    /// Chart-to-plane matrix `B = [unstable | stable]`.
    pub from_chart: Mat2,
    /// Plane-to-chart matrix `B⁻¹`.
    pub to_chart: Mat2,
    /// `det B` (sine of the signed angle between the unit eigenvectors).
    pub det: f64,
    /// Smallest singular value of `B` (`≤ 1`).
    pub k1: f64,
    /// Largest singular value of `B` (`≥ 1`).
    pub k2: f64,
}

impl EigenBasis {
    fn new(m: &HyperbolicMatrix) -> EigenBasis {
        let u = m
            .eigenvector_plus(1.0)
            .normalized()
            .expect("expanding eigenvector of a validated matrix is nonzero");
        let s = m
            .eigenvector_minus(1.0)
            .normalized()
            .expect("contracting eigenvector of a validated matrix is nonzero");
        let from_chart = Mat2::from_columns(u, s);
        let to_chart = from_chart
            .inverse()
            .expect("eigenvectors of a hyperbolic matrix are independent");
        let (k2, k1) = from_chart.singular_values();
        EigenBasis {
            unstable: u,
            stable: s,
            from_chart,
            to_chart,
            det: from_chart.det(),
            k1,
            k2,
        }
    }

    /// Chart coordinates of a plane vector.
    #[inline]
    pub fn to_chart(&self, v: Vec2) -> Vec2 {
        self.to_chart.apply(v)
    }

    /// Plane vector from chart coordinates.
    #[inline]
    pub fn from_chart(&self, xi: Vec2) -> Vec2 {
        self.from_chart.apply(xi)
    }

    /// Adapted norm `‖B⁻¹ v‖` of a plane vector.
    #[inline]
    pub fn adapted_norm(&self, v: Vec2) -> f64 {
        self.to_chart(v).norm()
    }
}
