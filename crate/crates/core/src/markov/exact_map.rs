//! The banded-shear family with exact rational parameters, acting on the
//! plane lift with coordinates in `Q(√D)`.
//!
//! The map is `F = L ∘ h` where `L` is the base automorphism and
//! `h(x, y) = (x, y + sgn(b)·g(x))` shears vertically by the periodic
//! profile `g`. Written out, with `g̃` the lift of `g`:
//!
//! ```text
//! F(x, y) = (a x + b y + |b| g̃(x),  c x + d y + sgn(b) d g̃(x))
//! F⁻¹(X, Y) = (x, -c X + a Y - sgn(b) g̃(x))   with x = d X - b Y
//! ```
//!
//! `g` vanishes off the strip `[m, m+l]`, has slope `-β` on the slow band
//! `[m, m+l-δ]` and slope `β(l-δ)/δ` on the fast band `[m+l-δ, m+l]`; it is
//! continuous and periodic. With rational `m, l, δ, β` and integer matrix
//! entries, both `F` and `F⁻¹` are piecewise affine with rational
//! coefficients, so they preserve `Q(√D)` coordinates exactly.
//!
//! The branch in force at a point is decided by one scalar functional — `x`
//! forward, `d X - b Y` backward — compared against the breakpoint grid
//! `ℤ + {m, m+l-δ, m+l}`. Segment tracing splits segments exactly at the
//! grid crossings of that functional and then evaluates each piece with the
//! single branch valid on it.

use super::surd::{rational_sign, Surd, SurdPoint};
use crate::error::{Error, Result};
use crate::matrix::HyperbolicMatrix;
use crate::twist::TwistParams;
use num::bigint::BigInt;
use num::rational::{BigRational, Rational64};
use num::{One, Zero};
use std::cmp::Ordering;

/// Exact-parameter member of the banded-shear family.
///
/// Unlike the floating-point family this one admits `β = 0` (the unperturbed
/// automorphism), which serves as the fully solvable reference case.
#[derive(Debug, Clone)]
pub struct ExactTwistSpec {
    matrix: HyperbolicMatrix,
    m: BigRational,
    l: BigRational,
    delta: BigRational,
    beta: BigRational,
    /// Slope of `g` on the fast band: `β(l-δ)/δ`.
    fast_g_slope: BigRational,
    disc: i64,
}

fn to_big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl ExactTwistSpec {
    /// Validates and freezes an exact parameter set.
    ///
    /// Requirements, all checked exactly: `0 < m`, `0 < l`, `m + l < 1`,
    /// `0 < δ ≤ l`, `0 ≤ β < 1`, and the slow-band trace condition
    /// `trace - |b|·β > 2` that keeps every derivative cone-hyperbolic.
    pub fn new(
        matrix: HyperbolicMatrix,
        m: Rational64,
        l: Rational64,
        delta: Rational64,
        beta: Rational64,
    ) -> Result<ExactTwistSpec> {
        let (m, l, delta, beta) = (to_big(m), to_big(l), to_big(delta), to_big(beta));
        let zero = BigRational::zero();
        let one = BigRational::one();
        if m <= zero || l <= zero {
            return Err(Error::domain("strip parameters need m > 0 and l > 0"));
        }
        if &m + &l >= one {
            return Err(Error::domain("strip must satisfy m + l < 1"));
        }
        if delta <= zero || delta > l {
            return Err(Error::domain("fast band needs 0 < delta <= l"));
        }
        if beta < zero || beta >= one {
            return Err(Error::domain("slope defect needs 0 <= beta < 1"));
        }
        let slow_trace = BigRational::from(BigInt::from(matrix.trace()))
            - BigRational::from(BigInt::from(matrix.b().abs())) * &beta;
        if slow_trace <= BigRational::from(BigInt::from(2)) {
            return Err(Error::domain(format!(
                "slow-band trace {} must exceed 2; decrease beta",
                slow_trace
            )));
        }
        let fast_g_slope = &beta * (&l - &delta) / &delta;
        let disc = matrix.discriminant();
        Ok(ExactTwistSpec { matrix, m, l, delta, beta, fast_g_slope, disc })
    }

    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.matrix
    }

    /// Discriminant `(a+d)² - 4` of the quadratic field all coordinates
    /// live in.
    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub(crate) fn m(&self) -> &BigRational {
        &self.m
    }

    pub(crate) fn l(&self) -> &BigRational {
        &self.l
    }

    pub(crate) fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub(crate) fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn is_linear(&self) -> bool {
        self.beta.is_zero()
    }

    /// Strip edges and the fast-band edge: `m`, `m+l-δ`, `m+l`. Branches of
    /// the shear change exactly at integer translates of these.
    pub(crate) fn breakpoints(&self) -> [BigRational; 3] {
        [
            self.m.clone(),
            &self.m + &self.l - &self.delta,
            &self.m + &self.l,
        ]
    }

    /// Exact fast-band interval `[m+l-δ, m+l]` as rationals.
    pub(crate) fn fast_band(&self) -> (BigRational, BigRational) {
        (&self.m + &self.l - &self.delta, &self.m + &self.l)
    }

    /// Floating-point mirror of the parameters (`w = 0`), for handing to the
    /// floating-point family and the growth-bound helpers. The mirror is
    /// only valid there when `β > 0`.
    pub fn to_twist_params(&self) -> TwistParams {
        TwistParams {
            m: super::surd::rational_to_f64(&self.m),
            l: super::surd::rational_to_f64(&self.l),
            delta: super::surd::rational_to_f64(&self.delta),
            beta: super::surd::rational_to_f64(&self.beta),
            w: 0.0,
        }
    }

    /// The lifted profile `g̃(x) = g(x mod 1)` at an exact lift coordinate.
    pub(crate) fn g_lift(&self, x: &Surd) -> Surd {
        if self.beta.is_zero() {
            return Surd::zero();
        }
        let (r, _) = x.reduce_mod_one(self.disc);
        // r ∈ [0, 1): find the branch by exact comparison against the
        // breakpoints, then evaluate the affine piece.
        let [b1, b2, b3] = self.breakpoints();
        if cmp_rat(&r, &b1, self.disc) == Ordering::Less {
            return Surd::zero(); // r < m
        }
        if cmp_rat(&r, &b2, self.disc) == Ordering::Less {
            // slow band: g = -β (r - m)
            return r.shift(&-self.m.clone()).scale(&-self.beta.clone());
        }
        if cmp_rat(&r, &b3, self.disc) == Ordering::Less {
            // fast band: g = β(l-δ)/δ · (r - (m+l))
            return r.shift(&-b3).scale(&self.fast_g_slope);
        }
        Surd::zero() // r >= m + l
    }

    /// Exact forward image of a lift point.
    pub(crate) fn forward_point(&self, p: &SurdPoint) -> SurdPoint {
        let m = &self.matrix;
        let g = self.g_lift(&p.x);
        let lin_x = scale_i64(&p.x, m.a()).add(&scale_i64(&p.y, m.b()));
        let lin_y = scale_i64(&p.x, m.c()).add(&scale_i64(&p.y, m.d()));
        SurdPoint::new(
            lin_x.add(&scale_i64(&g, m.b().abs())),
            lin_y.add(&scale_i64(&g, m.b().signum() * m.d())),
        )
    }

    /// Exact backward image of a lift point.
    pub(crate) fn backward_point(&self, p: &SurdPoint) -> SurdPoint {
        let m = &self.matrix;
        let x = scale_i64(&p.x, m.d()).sub(&scale_i64(&p.y, m.b()));
        let g = self.g_lift(&x);
        let y = scale_i64(&p.x, -m.c())
            .add(&scale_i64(&p.y, m.a()))
            .sub(&scale_i64(&g, m.b().signum()));
        SurdPoint::new(x, y)
    }

    /// The scalar functional whose breakpoint-grid crossings delimit the
    /// forward branches: the lift `x` coordinate.
    pub(crate) fn forward_functional(&self, p: &SurdPoint) -> Surd {
        p.x.clone()
    }

    /// Branch functional of the inverse: the preimage `x = d X - b Y`.
    pub(crate) fn backward_functional(&self, p: &SurdPoint) -> Surd {
        scale_i64(&p.x, self.matrix.d()).sub(&scale_i64(&p.y, self.matrix.b()))
    }

    /// Expanding eigenvalue `μ⁺ = (t + √D)/2` as an exact field element.
    pub(crate) fn mu_plus(&self) -> Surd {
        Surd {
            a: BigRational::new(BigInt::from(self.matrix.trace()), BigInt::from(2)),
            b: BigRational::new(BigInt::one(), BigInt::from(2)),
        }
    }

    /// Contracting eigenvalue `μ⁻ = (t - √D)/2`.
    pub(crate) fn mu_minus(&self) -> Surd {
        Surd {
            a: BigRational::new(BigInt::from(self.matrix.trace()), BigInt::from(2)),
            b: BigRational::new(-BigInt::one(), BigInt::from(2)),
        }
    }

    /// Slope of the expanding eigenline: `σ⁺ = (μ⁺ - a)/b`.
    pub(crate) fn sigma_plus(&self) -> Surd {
        self.eigen_slope(self.mu_plus())
    }

    /// Slope of the contracting eigenline: `σ⁻ = (μ⁻ - a)/b`.
    pub(crate) fn sigma_minus(&self) -> Surd {
        self.eigen_slope(self.mu_minus())
    }

    fn eigen_slope(&self, mu: Surd) -> Surd {
        let shifted = mu.shift(&-BigRational::from(BigInt::from(self.matrix.a())));
        shifted.scale(&BigRational::new(BigInt::one(), BigInt::from(self.matrix.b())))
    }
}

/// Scale a field element by a machine integer.
pub(crate) fn scale_i64(s: &Surd, k: i64) -> Surd {
    s.scale(&BigRational::from(BigInt::from(k)))
}

/// Compare a field element against a rational, exactly.
pub(crate) fn cmp_rat(s: &Surd, q: &BigRational, disc: i64) -> Ordering {
    s.sub(&Surd::from_rational(q.clone())).sign(disc).cmp(&0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::TorusMap;
    use crate::torus::TorusPoint;
    use crate::twist::TwistMap;

    fn cat() -> HyperbolicMatrix {
        HyperbolicMatrix::new(2, 1, 1, 1).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn banded() -> ExactTwistSpec {
        ExactTwistSpec::new(cat(), r(3, 8), r(1, 4), r(1, 16), r(3, 10)).unwrap()
    }

    fn linear() -> ExactTwistSpec {
        ExactTwistSpec::new(cat(), r(3, 8), r(1, 4), r(1, 16), r(0, 1)).unwrap()
    }

    fn point(xn: i64, xd: i64, yn: i64, yd: i64) -> SurdPoint {
        SurdPoint::new(
            Surd::from_rational(super::super::surd::big_rational(xn, xd)),
            Surd::from_rational(super::super::surd::big_rational(yn, yd)),
        )
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ExactTwistSpec::new(cat(), r(1, 2), r(1, 2), r(1, 8), r(1, 10)).is_err()); // m+l = 1
        assert!(ExactTwistSpec::new(cat(), r(3, 8), r(1, 4), r(1, 2), r(1, 10)).is_err()); // delta > l
        assert!(ExactTwistSpec::new(cat(), r(3, 8), r(1, 4), r(1, 16), r(1, 1)).is_err()); // beta = 1
        assert!(ExactTwistSpec::new(cat(), r(3, 8), r(1, 4), r(1, 16), r(-1, 10)).is_err()); // beta < 0
        assert!(ExactTwistSpec::new(cat(), r(-1, 8), r(1, 4), r(1, 16), r(1, 10)).is_err()); // m < 0
    }

    #[test]
    fn rejects_slow_trace_at_most_two() {
        // For [[2,3],[1,2]] the slow-band trace is 4 - 3β, which drops to 2
        // at β = 2/3.
        let wide = HyperbolicMatrix::new(2, 3, 1, 2).unwrap();
        assert!(ExactTwistSpec::new(wide, r(3, 8), r(1, 4), r(1, 16), r(3, 4)).is_err());
        let wide = HyperbolicMatrix::new(2, 3, 1, 2).unwrap();
        assert!(ExactTwistSpec::new(wide, r(3, 8), r(1, 4), r(1, 16), r(1, 2)).is_ok());
    }

    #[test]
    fn linear_case_is_the_matrix_action() {
        let spec = linear();
        let p = point(5, 8, -3, 7);
        let img = spec.forward_point(&p);
        // [[2,1],[1,1]] (5/8, -3/7) = (10/8 - 3/7, 5/8 - 3/7)
        assert_eq!(img, point(46, 56, 11, 56));
    }

    #[test]
    fn profile_vanishes_off_strip_and_is_periodic() {
        let spec = banded();
        let probe = Surd::from_rational(super::super::surd::big_rational(1, 5)); // 0.2 < m
        assert!(spec.g_lift(&probe).is_zero());
        let probe = Surd::from_rational(super::super::surd::big_rational(7, 10)); // 0.7 > m+l
        assert!(spec.g_lift(&probe).is_zero());
        // Deep slow band: g(1/2) = -β(1/2 - 3/8) = -3/80.
        let inside = Surd::from_rational(super::super::surd::big_rational(1, 2));
        assert_eq!(
            spec.g_lift(&inside),
            Surd::from_rational(super::super::surd::big_rational(-3, 80))
        );
        // Periodicity across several integer translates.
        for k in [-3i64, 2, 17] {
            let shifted = inside.shift(&BigRational::from(BigInt::from(k)));
            assert_eq!(spec.g_lift(&shifted), spec.g_lift(&inside));
        }
        // Fast-band edge value: g(m+l-δ) = -β(l-δ) = -(3/10)(3/16) = -9/160.
        let edge = Surd::from_rational(&spec.m + &spec.l - &spec.delta);
        assert_eq!(
            spec.g_lift(&edge),
            Surd::from_rational(super::super::surd::big_rational(-9, 160))
        );
    }

    #[test]
    fn backward_inverts_forward_exactly() {
        let spec = banded();
        for p in [
            point(1, 3, 2, 7),
            point(9, 16, 1, 5), // x inside the slow band
            point(39, 64, -2, 3), // x inside the fast band
            point(-7, 5, 22, 9),
        ] {
            let round = spec.backward_point(&spec.forward_point(&p));
            assert_eq!(round, p);
            let round = spec.forward_point(&spec.backward_point(&p));
            assert_eq!(round, p);
        }
    }

    #[test]
    fn matches_floating_family_on_the_torus() {
        let spec = banded();
        let float_map = TwistMap::new(cat(), spec.to_twist_params()).unwrap();
        for &(x, y) in &[
            (0.1, 0.9),
            (0.45, 0.275), // slow band
            (0.60, 0.33),  // fast band
            (0.98, 0.02),
        ] {
            let p = point((x * 1000.0) as i64, 1000, (y * 1000.0) as i64, 1000);
            let exact = spec.forward_point(&p);
            let (ex, _) = exact.x.reduce_mod_one(spec.disc());
            let (ey, _) = exact.y.reduce_mod_one(spec.disc());
            let from_exact = TorusPoint::new(ex.to_f64(spec.disc()), ey.to_f64(spec.disc()));
            let from_float = float_map.apply(TorusPoint::new(x, y));
            let gap = from_exact.displacement_to(from_float);
            assert!(
                gap.x.abs() < 1e-12 && gap.y.abs() < 1e-12,
                "mismatch at ({x}, {y}): ({}, {})",
                gap.x,
                gap.y
            );
        }
    }

    #[test]
    fn eigen_slopes_satisfy_the_eigen_equations() {
        let spec = banded();
        let disc = spec.disc();
        for (mu, sigma) in [
            (spec.mu_plus(), spec.sigma_plus()),
            (spec.mu_minus(), spec.sigma_minus()),
        ] {
            // A (1, σ) = μ (1, σ): a + bσ = μ and c + dσ = μσ.
            let a_row = Surd::from_int(spec.matrix.a()).add(&scale_i64(&sigma, spec.matrix.b()));
            assert_eq!(a_row, mu);
            let c_row = Surd::from_int(spec.matrix.c()).add(&scale_i64(&sigma, spec.matrix.d()));
            assert_eq!(c_row, mu.mul(&sigma, disc));
        }
        // μ⁺ μ⁻ = det = 1.
        assert_eq!(spec.mu_plus().mul(&spec.mu_minus(), disc), Surd::from_int(1));
    }

    #[test]
    fn branch_functionals_agree_with_the_maps() {
        let spec = banded();
        let p = point(4, 9, -5, 11);
        assert_eq!(spec.forward_functional(&p), p.x);
        let back = spec.backward_point(&p);
        assert_eq!(spec.backward_functional(&p), back.x);
    }
}
