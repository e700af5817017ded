//! The twist family: a strip-supported shear deformation of a hyperbolic
//! toral automorphism, optionally mollified to a smooth map.
//!
//! # Construction
//!
//! Fix a hyperbolic `A = [[a, b], [c, d]]` (see
//! [`HyperbolicMatrix`](crate::matrix::HyperbolicMatrix)) and strip
//! parameters `0 < m`, `0 < δ ≤ l`, `m + l < 1`, `β ∈ (0, 1)`. The circle
//! map `f` is the identity outside `[m, m+l]`, has slope `1 - β` on
//! `(m, m+l-δ]` (the *slow band*) and slope
//!
//! ```text
//! t_fast = (β l + δ (1 - β)) / δ  > 1
//! ```
//!
//! on `(m+l-δ, m+l]` (the *fast band*), chosen so that `f` is again a degree
//! one circle homeomorphism. Writing `f` as the identity plus ramps,
//!
//! ```text
//! f(x) = x + Σ_j Δ_j · relu(x - p_j),
//! ```
//!
//! with slope jumps `Δ = (-β, +βl/δ, -β(l-δ)/δ)` at the breakpoints
//! `p = (m, m+l-δ, m+l)`, mollification by the kernel of width `w`
//! (see [`mollifier`](crate::mollifier)) replaces each `relu` by the smoothed
//! ramp and yields a `C^∞` circle diffeomorphism that agrees with `f`
//! outside `w`-windows around the breakpoints. `w = 0` keeps the
//! piecewise-linear map; `δ = l` collapses `f` to the identity, recovering
//! the unperturbed automorphism exactly.
//!
//! The torus map applies `f` to the coordinate coupled through `b`:
//!
//! ```text
//! F(x, y) = ( (a - |b|) x + b y + |b| f(x),
//!             (c - sgn(b) d) x + d y + sgn(b) d f(x) )   (mod 1),
//! ```
//!
//! so its derivative at `(x, y)` is exactly the shear member `A(f'(x))` and
//! `det DF ≡ 1`: the family is area-preserving and equals `A` wherever
//! `f' = 1`.

use crate::error::{Error, Result};
use crate::map::TorusMap;
use crate::matrix::HyperbolicMatrix;
use crate::mollifier::{smoothed_ramp, smoothed_ramp_deriv, smoothed_ramp_second_deriv};
use crate::torus::{circle_displacement, wrap_unit, Mat2, TorusPoint};
use serde::{Deserialize, Serialize};

/// Parameters of the twist family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistParams {
    /// Left edge of the twisted strip.
    pub m: f64,
    /// Strip width; the strip is `[m, m + l]`.
    pub l: f64,
    /// Fast-band width, `0 < δ ≤ l` (`δ = l` gives the identity profile).
    pub delta: f64,
    /// Slow-band slope defect: the slow band has slope `1 - β`.
    pub beta: f64,
    /// Mollification width (`0` keeps the piecewise-linear map).
    pub w: f64,
}

impl TwistParams {
    /// The fast-band slope `(β l + δ (1 - β)) / δ`.
    pub fn fast_slope(&self) -> f64 {
        (self.beta * self.l + self.delta * (1.0 - self.beta)) / self.delta
    }

    /// The slow-band slope `1 - β`.
    pub fn slow_slope(&self) -> f64 {
        1.0 - self.beta
    }

    /// Validates the parameters against a base matrix.
    fn validate(&self, matrix: &HyperbolicMatrix) -> Result<()> {
        let TwistParams { m, l, delta, beta, w } = *self;
        for (name, v) in [("m", m), ("l", l), ("delta", delta), ("beta", beta), ("w", w)] {
            if !v.is_finite() {
                return Err(Error::non_finite(&format!("twist parameter {name}")));
            }
        }
        if !(m > 0.0) {
            return Err(Error::domain(format!("m = {m} must satisfy m > 0")));
        }
        if !(l > 0.0) {
            return Err(Error::domain(format!("l = {l} must satisfy l > 0")));
        }
        if !(m + l < 1.0) {
            return Err(Error::domain(format!(
                "m + l = {} must satisfy m + l < 1",
                m + l
            )));
        }
        if !(delta > 0.0 && delta <= l) {
            return Err(Error::domain(format!(
                "delta = {delta} must satisfy 0 < delta <= l = {l}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!("beta = {beta} must satisfy 0 < beta < 1")));
        }
        let slow_trace = matrix.trace() as f64 - matrix.abs_b() * beta;
        if !(slow_trace > 2.0) {
            return Err(Error::TraceTooSmall {
                trace: slow_trace,
                context: format!("slow-band derivative (slope 1 - beta = {})", 1.0 - beta),
                hint: "; decrease beta".into(),
            });
        }
        if w < 0.0 {
            return Err(Error::domain(format!("w = {w} must satisfy w >= 0")));
        }
        if w > 0.0 {
            if !(w < delta / 4.0) {
                return Err(Error::domain(format!(
                    "w = {w} must satisfy w < delta/4 = {}",
                    delta / 4.0
                )));
            }
            if delta < l && !(2.0 * w < l - delta) {
                return Err(Error::domain(format!(
                    "2w = {} must be < l - delta = {} so the mollification windows stay disjoint",
                    2.0 * w,
                    l - delta
                )));
            }
        }
        // The widened strip must stay inside (0, 1) so the map is the plain
        // automorphism in a neighborhood of x = 0.
        if !(m - w > 0.0) {
            return Err(Error::domain(format!("m - w = {} must be > 0", m - w)));
        }
        if !(m + l + w < 1.0) {
            return Err(Error::domain(format!("m + l + w = {} must be < 1", m + l + w)));
        }
        Ok(())
    }
}

/// The mollified circle map `f` (identity plus smoothed ramps).
#[derive(Debug, Clone)]
pub struct TwistProfile {
    /// `(breakpoint, slope jump)` pairs, zero jumps removed.
    jumps: Vec<(f64, f64)>,
    w: f64,
}

impl TwistProfile {
    fn new(params: &TwistParams) -> TwistProfile {
        let TwistParams { m, l, delta, beta, w } = *params;
        let raw = [
            (m, -beta),
            (m + l - delta, beta * l / delta),
            (m + l, -beta * (l - delta) / delta),
        ];
        // Merge coincident breakpoints (δ = l makes the first two collide)
        // and drop zero jumps; the identity profile ends up empty.
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for (p, j) in raw {
            if let Some(last) = jumps.last_mut() {
                if last.0 == p {
                    last.1 += j;
                    continue;
                }
            }
            jumps.push((p, j));
        }
        jumps.retain(|&(_, j)| j != 0.0);
        TwistProfile { jumps, w }
    }

    /// `f(x)` for `x ∈ [0, 1)`; the value is again in `[0, 1)`.
    pub fn value(&self, x: f64) -> f64 {
        let mut v = x;
        for &(p, j) in &self.jumps {
            v += j * smoothed_ramp(x - p, self.w);
        }
        v
    }

    /// `f'(x)`.
    pub fn deriv(&self, x: f64) -> f64 {
        let mut s = 1.0;
        for &(p, j) in &self.jumps {
            s += j * smoothed_ramp_deriv(x - p, self.w);
        }
        s
    }

    /// `f''(x)` (only defined for `w > 0`; the piecewise-linear profile has
    /// zero second derivative away from the breakpoints).
    pub fn second_deriv(&self, x: f64) -> f64 {
        if self.w == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for &(p, j) in &self.jumps {
            s += j * smoothed_ramp_second_deriv(x - p, self.w);
        }
        s
    }

    /// True when the profile is exactly the identity (`δ = l`).
    pub fn is_identity(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Solves `f(x) = target` for `x ∈ [0, 1)` by bisection + Newton.
    ///
    /// `f` is strictly increasing with slope in `[1-β, t_fast]`, so the
    /// solution is unique.
    fn invert(&self, target: f64) -> Result<f64> {
        if self.is_identity() {
            return Ok(target);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        // f(x) - target is increasing; f(0) = 0 ≤ target < 1 = f(1⁻).
        let mut x = target; // good initial guess: f is close to the identity
        for iteration in 0..200 {
            let fx = self.value(x) - target;
            if fx.abs() < 1e-14 {
                return Ok(wrap_unit(x));
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.deriv(x);
            let newton = x - fx / d;
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                return Ok(wrap_unit(x));
            }
            debug_assert!(iteration < 199);
        }
        Err(Error::NoConvergence {
            context: "strip profile inversion".into(),
            residual: (self.value(x) - target).abs(),
            iterations: 200,
        })
    }
}

/// A member of the twist family.
#[derive(Debug, Clone)]
pub struct TwistMap {
    matrix: HyperbolicMatrix,
    params: TwistParams,
    profile: TwistProfile,
}

impl TwistMap {
    /// Builds and validates a twist map over the given base matrix.
    pub fn new(matrix: HyperbolicMatrix, params: TwistParams) -> Result<TwistMap> {
        params.validate(&matrix)?;
        let profile = TwistProfile::new(&params);
        debug_assert!({
            let sum: f64 = profile.jumps.iter().map(|&(_, j)| j).sum();
            let moment: f64 = profile.jumps.iter().map(|&(p, j)| p * j).sum();
            sum.abs() < 1e-12 && moment.abs() < 1e-12
        });
        Ok(TwistMap { matrix, params, profile })
    }

    /// The base matrix.
    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.matrix
    }

    /// The parameters.
    pub fn params(&self) -> &TwistParams {
        &self.params
    }

    /// The circle map applied inside the strip.
    pub fn profile(&self) -> &TwistProfile {
        &self.profile
    }

    /// True when the map coincides with the unperturbed automorphism
    /// (`δ = l`).
    pub fn is_linear(&self) -> bool {
        self.profile.is_identity()
    }

    /// The slow band `[m, m + l - δ]` (x-interval of slope `1 - β`).
    pub fn slow_band(&self) -> (f64, f64) {
        (self.params.m, self.params.m + self.params.l - self.params.delta)
    }

    /// The fast band `[m + l - δ, m + l]` (x-interval of slope `t_fast`).
    pub fn fast_band(&self) -> (f64, f64) {
        (self.params.m + self.params.l - self.params.delta, self.params.m + self.params.l)
    }

    /// The x-interval on which the mollified map provably has slope exactly
    /// `t_fast`: the fast band shrunk by `w` on both sides.
    pub fn fast_band_core(&self) -> (f64, f64) {
        let (lo, hi) = self.fast_band();
        (lo + self.params.w, hi - self.params.w)
    }

    /// The widened strip `[m - w, m + l + w]` outside which `F = A` exactly.
    pub fn support(&self) -> (f64, f64) {
        (self.params.m - self.params.w, self.params.m + self.params.l + self.params.w)
    }

    /// Range of the profile slope: `(1 - β, t_fast)`.
    pub fn slope_range(&self) -> (f64, f64) {
        if self.is_linear() {
            (1.0, 1.0)
        } else {
            (self.params.slow_slope(), self.params.fast_slope())
        }
    }
}

impl TorusMap for TwistMap {
    fn apply(&self, p: TorusPoint) -> TorusPoint {
        if self.is_linear() {
            // δ = l: bit-for-bit the unperturbed automorphism.
            return self.matrix.apply(p);
        }
        let (x, y) = (p.x(), p.y());
        let m = &self.matrix;
        let f = self.profile.value(x);
        let (a, b, c, d) = (m.a() as f64, m.b() as f64, m.c() as f64, m.d() as f64);
        let (ab, sb) = (m.abs_b(), m.sgn_b());
        TorusPoint::new(
            (a - ab) * x + b * y + ab * f,
            (c - sb * d) * x + d * y + sb * d * f,
        )
    }

    fn derivative(&self, p: TorusPoint) -> Mat2 {
        self.matrix.shear_unchecked(self.profile.deriv(p.x()))
    }

    fn inverse_apply(&self, p: TorusPoint) -> Result<TorusPoint> {
        if self.is_linear() {
            return Ok(self.matrix.apply_inverse(p));
        }
        let (big_x, big_y) = (p.x(), p.y());
        let m = &self.matrix;
        let (a, b, c, d) = (m.a() as f64, m.b() as f64, m.c() as f64, m.d() as f64);
        let (ab, sb) = (m.abs_b(), m.sgn_b());
        // The combination d·X - b·Y eliminates both y and f(x):
        // d(a-|b|) - b(c - sgn(b) d) = det A = 1 and d|b| - b sgn(b) d = 0.
        let x = wrap_unit(d * big_x - b * big_y);
        let f = self.profile.value(x);
        // First component: b y ≡ X - (a-|b|) x - |b| f (mod 1). There are
        // |b| candidate y values in [0, 1); the second component selects one.
        let r = wrap_unit(big_x - (a - ab) * x - ab * f);
        let mut found: Option<TorusPoint> = None;
        let mut best_residual = f64::INFINITY;
        for k in 0..(ab as i64) {
            let y = wrap_unit((r + k as f64) / b);
            let checked = (c - sb * d) * x + d * y + sb * d * f;
            let residual = circle_displacement(wrap_unit(checked), big_y).abs();
            best_residual = best_residual.min(residual);
            if residual < 1e-9 {
                if found.is_some() {
                    return Err(Error::NotInvertibleAt {
                        x: big_x,
                        y: big_y,
                        detail: "two preimage candidates satisfy both components".into(),
                    });
                }
                found = Some(TorusPoint::new(x, y));
            }
        }
        found.ok_or_else(|| Error::NotInvertibleAt {
            x: big_x,
            y: big_y,
            detail: format!(
                "no preimage candidate satisfies the second component \
                 (best residual {best_residual:.3e})"
            ),
        })
    }
}

/// Inverts only the circle factor: solves `f(x) = target`.
///
/// Exposed for diagnostics and for independent checks of the profile.
pub fn invert_profile(map: &TwistMap, target: f64) -> Result<f64> {
    map.profile.invert(wrap_unit(target))
}
