//! The common interface of the torus diffeomorphisms studied by this crate,
//! plus orbit and cocycle helpers shared by the estimators.

use crate::error::{Error, Result};
use crate::matrix::HyperbolicMatrix;
use crate::torus::{Mat2, TorusPoint, Vec2};

/// A C¹ diffeomorphism of the 2-torus with computable derivative cocycle and
/// inverse.
pub trait TorusMap: Sync {
    /// Image of a point.
    fn apply(&self, p: TorusPoint) -> TorusPoint;

    /// Derivative (Jacobian) at a point, in covering-space coordinates.
    fn derivative(&self, p: TorusPoint) -> Mat2;

    /// Image and derivative together. Implementations that obtain both from
    /// one computation (e.g. one ODE solve) should override this.
    fn apply_with_derivative(&self, p: TorusPoint) -> (TorusPoint, Mat2) {
        (self.apply(p), self.derivative(p))
    }

    /// Preimage of a point.
    ///
    /// Fallible: implementations that integrate an inverse flow report
    /// integration failures, and defensive branch checks report
    /// [`Error::NotInvertibleAt`].
    fn inverse_apply(&self, p: TorusPoint) -> Result<TorusPoint>;

    /// Derivative of the inverse map at `p`, i.e. `(DF)⁻¹` at the preimage.
    fn inverse_derivative(&self, p: TorusPoint) -> Result<Mat2> {
        let q = self.inverse_apply(p)?;
        self.derivative(q).inverse().ok_or_else(|| Error::NotInvertibleAt {
            x: q.x(),
            y: q.y(),
            detail: "derivative is singular at the preimage".into(),
        })
    }
}

/// The unperturbed automorphism as a [`TorusMap`].
#[derive(Debug, Clone, Copy)]
pub struct ToralAutomorphism {
    matrix: HyperbolicMatrix,
}

impl ToralAutomorphism {
    /// Wraps a hyperbolic matrix.
    pub fn new(matrix: HyperbolicMatrix) -> Self {
        ToralAutomorphism { matrix }
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.matrix
    }
}

impl TorusMap for ToralAutomorphism {
    fn apply(&self, p: TorusPoint) -> TorusPoint {
        self.matrix.apply(p)
    }

    fn derivative(&self, _p: TorusPoint) -> Mat2 {
        self.matrix.as_mat2()
    }

    fn inverse_apply(&self, p: TorusPoint) -> Result<TorusPoint> {
        Ok(self.matrix.apply_inverse(p))
    }

    fn inverse_derivative(&self, _p: TorusPoint) -> Result<Mat2> {
        Ok(self.matrix.inverse_mat2())
    }
}

/// The forward orbit `p, F(p), ..., F^n(p)` (length `n + 1`).
pub fn orbit<M: TorusMap + ?Sized>(map: &M, p: TorusPoint, n: usize) -> Vec<TorusPoint> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p);
    let mut q = p;
    for _ in 0..n {
        q = map.apply(q);
        out.push(q);
    }
    out
}

/// Applies `F` `n` times.
pub fn iterate<M: TorusMap + ?Sized>(map: &M, p: TorusPoint, n: usize) -> TorusPoint {
    let mut q = p;
    for _ in 0..n {
        q = map.apply(q);
    }
    q
}

/// Applies `F⁻¹` `n` times.
pub fn iterate_inverse<M: TorusMap + ?Sized>(
    map: &M,
    p: TorusPoint,
    n: usize,
) -> Result<TorusPoint> {
    let mut q = p;
    for _ in 0..n {
        q = map.inverse_apply(q)?;
    }
    Ok(q)
}

/// Derivative of `Fⁿ` along the orbit of `p` (product of Jacobians, leftmost
/// factor at the last orbit point).
pub fn derivative_along_orbit<M: TorusMap + ?Sized>(
    map: &M,
    p: TorusPoint,
    n: usize,
) -> (TorusPoint, Mat2) {
    let mut q = p;
    let mut acc = Mat2::identity();
    for _ in 0..n {
        let (next, df) = map.apply_with_derivative(q);
        acc = df.mul_mat(acc);
        q = next;
    }
    (q, acc)
}

/// Central finite-difference Jacobian, wrap-aware in both the input offsets
/// and the output differences. Used to cross-check analytic derivatives.
pub fn finite_difference_jacobian<M: TorusMap + ?Sized>(
    map: &M,
    p: TorusPoint,
    h: f64,
) -> Mat2 {
    let col = |dir: Vec2| -> Vec2 {
        let plus = map.apply(p.translate(dir * h));
        let minus = map.apply(p.translate(dir * -h));
        // Shortest displacement between the two images; valid when the
        // images are much closer than half the torus, which h ≪ 1 ensures.
        minus.displacement_to(plus) * (1.0 / (2.0 * h))
    };
    let c1 = col(Vec2::new(1.0, 0.0));
    let c2 = col(Vec2::new(0.0, 1.0));
    Mat2::from_columns(c1, c2)
}
