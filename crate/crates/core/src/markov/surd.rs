//! Exact arithmetic in the real quadratic field `Q(√D)`.
//!
//! Every coordinate produced by the piecewise-linear banded map, its inverse,
//! and the eigen-direction seeds lies in `Q(√D)` with `D = (a+d)² - 4` the
//! discriminant of the base matrix: the map has rational coefficients and the
//! seed directions have the form `(μ± - a)/b` with `μ± = ((a+d) ± √D)/2`.
//! Closedness under the field operations means leaf vertices, segment
//! crossings, areas, and all comparison predicates evaluate exactly — no
//! epsilon tuning, no near-degenerate misclassification.
//!
//! `D` is never a perfect square for an admissible matrix (`trace > 2` makes
//! `D = t² - 4` fall strictly between `(t-1)²` and `t²`), so the
//! representation `a + b√D` is unique and equality is coefficient equality.
//!
//! The discriminant is passed explicitly to the operations that need it
//! (products, inverses, sign tests); a mismatch between operands from
//! different fields is a programming error, guarded in debug builds by the
//! call sites keeping a single `D` per construction.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// An element `a + b·√D` of the quadratic field, with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Surd {
    /// Rational part.
    pub a: BigRational,
    /// Coefficient of `√D`.
    pub b: BigRational,
}

impl Surd {
    pub(crate) fn zero() -> Surd {
        Surd { a: BigRational::zero(), b: BigRational::zero() }
    }

    pub(crate) fn from_rational(a: BigRational) -> Surd {
        Surd { a, b: BigRational::zero() }
    }

    pub(crate) fn from_int(n: i64) -> Surd {
        Surd::from_rational(BigRational::from(BigInt::from(n)))
    }

    /// The pure radical `q·√D`.
    pub(crate) fn radical(q: BigRational) -> Surd {
        Surd { a: BigRational::zero(), b: q }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub(crate) fn add(&self, rhs: &Surd) -> Surd {
        Surd { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }

    pub(crate) fn sub(&self, rhs: &Surd) -> Surd {
        Surd { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }

    pub(crate) fn neg(&self) -> Surd {
        Surd { a: -self.a.clone(), b: -self.b.clone() }
    }

    /// Product; needs `D` because `√D · √D = D`.
    pub(crate) fn mul(&self, rhs: &Surd, disc: i64) -> Surd {
        let d = BigRational::from(BigInt::from(disc));
        Surd {
            a: &self.a * &rhs.a + (&self.b * &rhs.b) * &d,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }

    /// Scale by a rational (no radical mixing, so no `D`).
    pub(crate) fn scale(&self, q: &BigRational) -> Surd {
        Surd { a: &self.a * q, b: &self.b * q }
    }

    /// Translate by a rational.
    pub(crate) fn shift(&self, q: &BigRational) -> Surd {
        Surd { a: &self.a + q, b: self.b.clone() }
    }

    /// Multiplicative inverse via the conjugate: `1/(a + b√D) =
    /// (a - b√D)/(a² - b²D)`. The norm `a² - b²D` vanishes only at zero
    /// (D is not a square), which the caller must exclude.
    pub(crate) fn inv(&self, disc: i64) -> Surd {
        let d = BigRational::from(BigInt::from(disc));
        let norm = &self.a * &self.a - (&self.b * &self.b) * &d;
        assert!(!norm.is_zero(), "inverse of zero field element");
        Surd { a: &self.a / &norm, b: -(&self.b / &norm) }
    }

    pub(crate) fn div(&self, rhs: &Surd, disc: i64) -> Surd {
        self.mul(&rhs.inv(disc), disc)
    }

    /// Exact sign: `-1`, `0`, or `1`.
    ///
    /// For mixed-sign parts `a + b√D` compares `a²` against `b²·D` — the sign
    /// of the larger magnitude wins because squaring preserves order on
    /// non-negative rationals.
    pub(crate) fn sign(&self, disc: i64) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: |a| vs |b|√D, i.e. a² vs b²D.
        let d = BigRational::from(BigInt::from(disc));
        let lhs = &self.a * &self.a;
        let rhs = (&self.b * &self.b) * &d;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub(crate) fn cmp(&self, rhs: &Surd, disc: i64) -> Ordering {
        match self.sub(rhs).sign(disc) {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    pub(crate) fn is_positive(&self, disc: i64) -> bool {
        self.sign(disc) > 0
    }

    pub(crate) fn is_negative(&self, disc: i64) -> bool {
        self.sign(disc) < 0
    }

    /// Floating approximation. Exactness of the construction never depends
    /// on this: it feeds bounding boxes, bucket indices, and first guesses,
    /// all of which are verified or widened by safety margins.
    pub(crate) fn to_f64(&self, disc: i64) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (disc as f64).sqrt()
    }

    /// Exact floor, seeded by the floating approximation and then verified
    /// (and corrected by exponential search) against the exact order.
    pub(crate) fn floor(&self, disc: i64) -> BigInt {
        let guess = self.to_f64(disc).floor();
        let mut k = if guess.is_finite() && guess.abs() < 1e18 {
            BigInt::from(guess as i64)
        } else {
            BigInt::zero()
        };
        // Invariant target: k <= self < k + 1, checked exactly.
        let below = |k: &BigInt| -> bool {
            // k <= self  <=>  self - k >= 0
            self.shift(&-BigRational::from(k.clone())).sign(disc) >= 0
        };
        let mut step = BigInt::one();
        while !below(&k) {
            k -= &step;
            step *= 2;
        }
        step = BigInt::one();
        loop {
            let next = &k + BigInt::one();
            if !below(&next) {
                break;
            }
            k = next;
            // Exponential advance, then settle one-by-one once overshooting.
            let jump = &k + &step;
            if below(&jump) {
                k = jump;
                step *= 2;
            } else {
                step = BigInt::one();
            }
        }
        k
    }

    /// The representative of this element mod 1 in `[0, 1)`, with the floor.
    pub(crate) fn reduce_mod_one(&self, disc: i64) -> (Surd, BigInt) {
        let k = self.floor(disc);
        (self.shift(&-BigRational::from(k.clone())), k)
    }
}

pub(crate) fn rational_sign(q: &BigRational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

/// `BigRational -> f64` that survives components too large for a direct
/// conversion by shifting numerator and denominator together.
pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let nb = q.numer().bits();
    let db = q.denom().bits();
    let shift = nb.max(db).saturating_sub(512) as usize;
    let n = q.numer() >> shift;
    let d = q.denom() >> shift;
    let dv = d.to_f64().unwrap_or(f64::NAN);
    if dv == 0.0 {
        return 0.0;
    }
    n.to_f64().unwrap_or(f64::NAN) / dv
}

/// A point (or vector) with coordinates in the field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct SurdPoint {
    pub x: Surd,
    pub y: Surd,
}

impl SurdPoint {
    pub(crate) fn new(x: Surd, y: Surd) -> SurdPoint {
        SurdPoint { x, y }
    }

    pub(crate) fn origin() -> SurdPoint {
        SurdPoint::new(Surd::zero(), Surd::zero())
    }

    pub(crate) fn add(&self, rhs: &SurdPoint) -> SurdPoint {
        SurdPoint::new(self.x.add(&rhs.x), self.y.add(&rhs.y))
    }

    pub(crate) fn sub(&self, rhs: &SurdPoint) -> SurdPoint {
        SurdPoint::new(self.x.sub(&rhs.x), self.y.sub(&rhs.y))
    }

    pub(crate) fn scale(&self, q: &Surd, disc: i64) -> SurdPoint {
        SurdPoint::new(self.x.mul(q, disc), self.y.mul(q, disc))
    }

    pub(crate) fn to_f64(&self, disc: i64) -> (f64, f64) {
        (self.x.to_f64(disc), self.y.to_f64(disc))
    }
}

/// Exact 2D cross product `u × v = u.x v.y - u.y v.x`.
pub(crate) fn cross(u: &SurdPoint, v: &SurdPoint, disc: i64) -> Surd {
    u.x.mul(&v.y, disc).sub(&u.y.mul(&v.x, disc))
}

/// Sign of the orientation of the triple `(a, b, c)`: positive when `c`
/// lies to the left of the directed line `a -> b`.
pub(crate) fn orient(a: &SurdPoint, b: &SurdPoint, c: &SurdPoint, disc: i64) -> i8 {
    cross(&b.sub(a), &c.sub(a), disc).sign(disc)
}

pub(crate) fn big_rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: i64 = 5;

    fn s(a_num: i64, a_den: i64, b_num: i64, b_den: i64) -> Surd {
        Surd { a: big_rational(a_num, a_den), b: big_rational(b_num, b_den) }
    }

    #[test]
    fn radical_squares_to_the_discriminant() {
        let root = Surd::radical(BigRational::one());
        let square = root.mul(&root, D);
        assert_eq!(square, Surd::from_int(5));
    }

    #[test]
    fn golden_ratio_identities() {
        // φ = (1 + √5)/2 satisfies φ² = φ + 1 and 1/φ = φ - 1.
        let phi = s(1, 2, 1, 2);
        assert_eq!(phi.mul(&phi, D), phi.shift(&BigRational::one()));
        assert_eq!(phi.inv(D), phi.shift(&-BigRational::one()));
    }

    #[test]
    fn sign_handles_mixed_parts_exactly() {
        // 9/4 - √5 > 0 because 81/16 > 5; 2 - √5 < 0 because 4 < 5.
        assert_eq!(s(9, 4, -1, 1).sign(D), 1);
        assert_eq!(s(2, 1, -1, 1).sign(D), -1);
        assert_eq!(s(-2, 1, 1, 1).sign(D), 1);
        assert_eq!(s(-9, 4, 1, 1).sign(D), -1);
        assert_eq!(Surd::zero().sign(D), 0);
        // Pure parts.
        assert_eq!(s(0, 1, -3, 7).sign(D), -1);
        assert_eq!(s(3, 7, 0, 1).sign(D), 1);
    }

    #[test]
    fn comparisons_order_conjugates() {
        let phi = s(1, 2, 1, 2);
        let psi = s(1, 2, -1, 2); // conjugate, ≈ -0.618
        assert_eq!(phi.cmp(&psi, D), Ordering::Greater);
        assert_eq!(psi.cmp(&phi, D), Ordering::Less);
        assert_eq!(phi.cmp(&phi.clone(), D), Ordering::Equal);
    }

    #[test]
    fn floor_is_exact_near_integers() {
        let phi = s(1, 2, 1, 2); // ≈ 1.618
        assert_eq!(phi.floor(D), BigInt::from(1));
        let neg = phi.neg(); // ≈ -1.618
        assert_eq!(neg.floor(D), BigInt::from(-2));
        assert_eq!(Surd::from_int(7).floor(D), BigInt::from(7));
        assert_eq!(Surd::from_int(-7).floor(D), BigInt::from(-7));
        // Just below an integer: 3 - (√5 - 2.236...) tiny offsets.
        let tiny = s(3, 1, 0, 1).sub(&s(9, 4, -1, 1)); // 3 - (9/4 - √5) = 3/4 + √5 ≈ 2.986
        assert_eq!(tiny.floor(D), BigInt::from(2));
    }

    #[test]
    fn reduce_mod_one_lands_in_unit_interval() {
        let x = s(-7, 2, 3, 4); // -3.5 + 0.75·√5 ≈ -1.823
        let (r, k) = x.reduce_mod_one(D);
        assert_eq!(k, BigInt::from(-2));
        assert!(r.sign(D) >= 0);
        assert!(r.sub(&Surd::from_int(1)).sign(D) < 0);
        // r + k reproduces x.
        assert_eq!(r.shift(&BigRational::from(k)), x);
    }

    #[test]
    fn orientation_predicate_matches_geometry() {
        let o = SurdPoint::origin();
        let e1 = SurdPoint::new(Surd::from_int(1), Surd::zero());
        let up = SurdPoint::new(Surd::zero(), Surd::from_int(1));
        let down = SurdPoint::new(Surd::zero(), Surd::from_int(-1));
        let on = SurdPoint::new(Surd::from_int(2), Surd::zero());
        assert_eq!(orient(&o, &e1, &up, D), 1);
        assert_eq!(orient(&o, &e1, &down, D), -1);
        assert_eq!(orient(&o, &e1, &on, D), 0);
    }

    #[test]
    fn division_round_trips() {
        let x = s(3, 7, -2, 5);
        let y = s(-1, 3, 4, 9);
        let z = x.div(&y, D).mul(&y, D);
        assert_eq!(z, x);
    }

    #[test]
    fn float_approximation_is_close() {
        let phi = s(1, 2, 1, 2);
        assert!((phi.to_f64(D) - 1.618_033_988_749_895).abs() < 1e-12);
    }
}
