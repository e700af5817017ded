//! Radial speed profiles for the slow-down deformation.
//!
//! The deformation flow multiplies the hyperbolic vector field by a profile
//! `ψ(u)` of the squared chart radius `u = s₁² + s₂²`:
//!
//! * [`SlowdownProfile`] (`ψ₀`) vanishes like `(u/r₀²)^{1+α}` at the origin,
//!   equals exactly that power law up to `u = (r₀/2)²`, and climbs smoothly
//!   to `1` at `u = r₀²` while keeping its slope under the certified
//!   headroom bound `(1+α)(1-ε)^{-2(1+α)} r₀⁻² (u/r₀²)^α`. The climb is
//!   built by *modulating the power-law slope*: `ψ₀′ = pl′ ·
//!   (1 + A·S₁)(1 - S₂)` with smoothstep windows `S₁` (gain) and `S₂`
//!   (cutoff at the right end), and the single gain `A` solved linearly so
//!   that `ψ₀(r₀²) = 1` exactly.
//! * [`RegularizedProfile`] (`ψ_η`) caps `ψ₀` away from zero by substituting
//!   `u ↦ M(u, η) = η·m(u/η)`, where the universal reparametrization `m`
//!   is constant `1/2` on `[0, 0.42]` and identity beyond `0.42 + w_m`. The
//!   window width `w_m` is solved once so the two branches join smoothly;
//!   the form `m(z) = z·e^{G(z)}` with `G′ = -(1-S₀₁)/z` makes
//!   `z·m′(z) ≤ m(z)`, which is exactly pointwise monotonicity of `ψ_η`
//!   in `η`.
//!
//! Every constructed profile re-verifies its defining properties on a dense
//! grid and refuses to exist otherwise.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use std::sync::OnceLock;

/// Smooth monotone step: `0` for `x ≤ 0`, `1` for `x ≥ 1`, C^∞ throughout,
/// with `s01(x) + s01(1-x) = 1`.
pub fn s01(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let b = (-1.0 / x).exp();
        let c = (-1.0 / (1.0 - x)).exp();
        b / (b + c)
    }
}

/// Uniform-knot cubic Hermite table of an antiderivative: values are
/// cumulative integrals, knot derivatives are the exact integrand.
#[derive(Debug, Clone)]
struct HermiteTable {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl HermiteTable {
    /// Builds the cumulative table of `integrand` on `[x0, x1]` with `n`
    /// knots, integrating each interval with the 32-point Gauss rule.
    fn cumulative(x0: f64, x1: f64, n: usize, integrand: &dyn Fn(f64) -> f64) -> HermiteTable {
        let dx = (x1 - x0) / (n - 1) as f64;
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        let rule = GaussLegendre::rule32();
        let mut acc = 0.0;
        values.push(0.0);
        derivs.push(integrand(x0));
        for k in 1..n {
            let a = x0 + (k - 1) as f64 * dx;
            let b = x0 + k as f64 * dx;
            acc += rule.integrate(a, b, integrand);
            values.push(acc);
            derivs.push(integrand(b));
        }
        HermiteTable { x0, dx, values, derivs }
    }

    fn end_value(&self) -> f64 {
        *self.values.last().expect("table is never empty")
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let pos = (x - self.x0) / self.dx;
        let k = (pos.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = pos - k as f64;
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.derivs[k] * self.dx, self.derivs[k + 1] * self.dx);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1
    }
}

/// The base speed profile `ψ₀` (see module docs).
#[derive(Debug, Clone)]
pub struct SlowdownProfile {
    alpha: f64,
    eps: f64,
    r0: f64,
    /// End of the exact power-law region, `(r₀/2)²`.
    a: f64,
    /// End of the climb, `r₀²`; the profile is `1` beyond.
    b: f64,
    /// Slope gain solved so that `ψ₀(r₀²) = 1`.
    gain: f64,
    /// Cumulative table of `pl′·(1 + gain·S₁)(1 - S₂)` on `[a, b]`.
    table: HermiteTable,
}

const GAIN_WINDOW_FRACTION: f64 = 0.25;
const CUTOFF_WINDOW_FRACTION: f64 = 0.015;
const PROFILE_KNOTS: usize = 8193;

impl SlowdownProfile {
    /// Validates the parameter triple and constructs the profile, verifying
    /// all its defining properties on a dense grid.
    pub fn new(alpha: f64, eps: f64, r0: f64) -> Result<SlowdownProfile> {
        if !(alpha > 0.0 && alpha < 1.0 / 3.0) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in (0, 1/3)")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("eps = {eps} must lie in (0, 1)")));
        }
        let sharpness = (1.0 + alpha) / (1.0 - eps).powf(2.0 * (1.0 + alpha));
        if !(sharpness < 4.0 / 3.0) {
            return Err(Error::domain(format!(
                "(1+alpha)(1-eps)^(-2(1+alpha)) = {sharpness} must stay below 4/3"
            )));
        }
        if !(r0 > 0.0 && r0 < 0.5) {
            return Err(Error::domain(format!("r0 = {r0} must lie in (0, 0.5)")));
        }
        let b = r0 * r0;
        let a = b / 4.0;
        let span = b - a;
        let gain_end = a + GAIN_WINDOW_FRACTION * span;
        let cutoff_w = CUTOFF_WINDOW_FRACTION * span;
        let pl = |u: f64| (u / b).powf(1.0 + alpha);
        let pl_d = |u: f64| (1.0 + alpha) / b * (u / b).powf(alpha);
        let s1 = move |u: f64| s01((u - a) / (gain_end - a));
        let s2 = move |u: f64| s01((u - (b - cutoff_w)) / cutoff_w);

        // Two cumulative integrals: the ungained slope with cutoff, and the
        // gain-weighted part; the gain is then a linear solve for ψ₀(b) = 1.
        let base = HermiteTable::cumulative(a, b, PROFILE_KNOTS, &|u| pl_d(u) * (1.0 - s2(u)));
        let gain_part =
            HermiteTable::cumulative(a, b, PROFILE_KNOTS, &|u| pl_d(u) * s1(u) * (1.0 - s2(u)));
        if gain_part.end_value().abs() < 1e-9 {
            return Err(Error::domain("gain window integral degenerate".to_string()));
        }
        let gain = (1.0 - pl(a) - base.end_value()) / gain_part.end_value();
        if !(gain > -0.5 && gain < 0.5) {
            return Err(Error::domain(format!(
                "profile slope gain {gain} is implausible; parameters too extreme"
            )));
        }
        // Combine into a single table: values J + gain·I share the knots.
        let values = base
            .values
            .iter()
            .zip(&gain_part.values)
            .map(|(j, i)| j + gain * i)
            .collect();
        let derivs = base
            .derivs
            .iter()
            .zip(&gain_part.derivs)
            .map(|(j, i)| j + gain * i)
            .collect();
        let table = HermiteTable { x0: a, dx: base.dx, values, derivs };

        let profile = SlowdownProfile { alpha, eps, r0, a, b, gain, table };
        profile.verify()?;
        Ok(profile)
    }

    fn verify(&self) -> Result<()> {
        let check = |ok: bool, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::domain(format!("base profile violates: {what}")))
            }
        };
        // Endpoint exactness.
        check((self.value(self.b) - 1.0).abs() < 1e-12, "value 1 at the climb end")?;
        check(self.value(self.b * 1.0001) == 1.0, "constant 1 beyond the climb")?;
        check(self.value(0.0) == 0.0, "vanishing at the origin")?;
        // Dense grid: monotone, dominated slope, above the power law.
        let n = 4000;
        for k in 0..=n {
            let u = self.b * k as f64 / n as f64;
            let v = self.value(u);
            let d = self.deriv(u);
            check(v >= 0.0 && v <= 1.0, "range [0, 1]")?;
            check(d >= 0.0, "nondecreasing")?;
            check(d <= self.slope_headroom(u) * (1.0 + 1e-12) + 1e-300, "slope headroom")?;
            check(v + 1e-13 >= (u / self.b).powf(1.0 + self.alpha), "above the power law")?;
            if u > 0.0 {
                check(v > 0.0, "positive away from the origin")?;
            }
        }
        Ok(())
    }

    /// `ψ₀(u)`.
    pub fn value(&self, u: f64) -> f64 {
        if u >= self.b {
            1.0
        } else if u <= self.a {
            (u / self.b).powf(1.0 + self.alpha)
        } else {
            // The exact profile is monotone with supremum 1; clamp away the
            // ~1e-14 cumulative-table rounding so callers can rely on ψ₀ ≤ 1
            // (the conjugate density 1/ψ₀ must stay ≥ 1).
            ((self.a / self.b).powf(1.0 + self.alpha) + self.table.eval(u)).min(1.0)
        }
    }

    /// `ψ₀′(u)` (closed form; zero outside `(0, r₀²)`).
    pub fn deriv(&self, u: f64) -> f64 {
        if u >= self.b || u < 0.0 {
            0.0
        } else {
            let pl_d = (1.0 + self.alpha) / self.b * (u / self.b).powf(self.alpha);
            if u <= self.a {
                pl_d
            } else {
                let span = self.b - self.a;
                let gain_end = self.a + GAIN_WINDOW_FRACTION * span;
                let cutoff_w = CUTOFF_WINDOW_FRACTION * span;
                let s1v = s01((u - self.a) / (gain_end - self.a));
                let s2v = s01((u - (self.b - cutoff_w)) / cutoff_w);
                pl_d * (1.0 + self.gain * s1v) * (1.0 - s2v)
            }
        }
    }

    /// The certified slope bound `(1+α)(1-ε)^{-2(1+α)} r₀⁻² (u/r₀²)^α`.
    pub fn slope_headroom(&self, u: f64) -> f64 {
        (1.0 + self.alpha) / ((1.0 - self.eps).powf(2.0 * (1.0 + self.alpha)) * self.b)
            * (u / self.b).powf(self.alpha)
    }

    /// Exponent of the power law at the origin.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Headroom parameter of the slope bound.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Radius of the deformation disk.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Squared disk radius `r₀²` (where the profile reaches 1).
    pub fn saturation(&self) -> f64 {
        self.b
    }

    /// Slope gain `A` of the climb (diagnostic).
    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// Universal reparametrization `m(z)`: constant `1/2` on `[0, Z_CAP]`,
/// identity beyond `Z_CAP + w_m`, of the form `z·e^{G(z)}` in between.
#[derive(Debug)]
struct CapProfile {
    wm: f64,
    /// Table of `G` on `[Z_CAP, Z_CAP + w_m]` (built right-to-left).
    g: HermiteTable,
}

const Z_CAP: f64 = 0.42;
const CAP_KNOTS: usize = 2049;

fn cap_integrand(t: f64, wm: f64) -> f64 {
    (1.0 - s01((t - Z_CAP) / wm)) / t
}

/// `∫_{Z_CAP}^{Z_CAP+wm} (1 - S₀₁((t-Z_CAP)/wm))/t dt`, the total log-boost.
fn cap_total(wm: f64) -> f64 {
    let rule = GaussLegendre::rule32();
    let mut acc = 0.0;
    let panels = 8;
    for p in 0..panels {
        let a = Z_CAP + wm * p as f64 / panels as f64;
        let b = Z_CAP + wm * (p + 1) as f64 / panels as f64;
        acc += rule.integrate(a, b, |t| cap_integrand(t, wm));
    }
    acc
}

fn cap_profile() -> &'static CapProfile {
    static CAP: OnceLock<CapProfile> = OnceLock::new();
    CAP.get_or_init(|| {
        // Solve cap_total(wm) = ln(1/(2·Z_CAP)) so the constant branch sits
        // exactly at 1/2. cap_total is strictly increasing in wm.
        let target = (1.0 / (2.0 * Z_CAP)).ln();
        let (mut lo, mut hi) = (1e-4, 1.0 - Z_CAP - 1e-9);
        assert!(
            cap_total(lo) < target && cap_total(hi) > target,
            "cap window bracket must contain the solution"
        );
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if cap_total(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let wm = 0.5 * (lo + hi);
        assert!(Z_CAP + wm < 1.0, "cap window must close before z = 1");
        // G decays from the target at Z_CAP to exactly 0 at Z_CAP + wm.
        // Build the cumulative of the integrand left-to-right, then flip.
        let cum =
            HermiteTable::cumulative(Z_CAP, Z_CAP + wm, CAP_KNOTS, &|t| cap_integrand(t, wm));
        let end = cum.end_value();
        let values = cum.values.iter().map(|v| end - v).collect();
        let derivs = cum.derivs.iter().map(|d| -d).collect();
        CapProfile { wm, g: HermiteTable { x0: Z_CAP, dx: cum.dx, values, derivs } }
    })
}

/// `m(z)` of the cap reparametrization.
pub fn cap_map(z: f64) -> f64 {
    let cap = cap_profile();
    if z <= Z_CAP {
        0.5
    } else if z >= Z_CAP + cap.wm {
        z
    } else {
        z * cap.g.eval(z).exp()
    }
}

/// `m′(z) = e^{G(z)} S₀₁((z - Z_CAP)/w_m)` (zero on the constant branch,
/// one on the identity branch).
pub fn cap_map_deriv(z: f64) -> f64 {
    let cap = cap_profile();
    if z <= Z_CAP {
        0.0
    } else if z >= Z_CAP + cap.wm {
        1.0
    } else {
        cap.g.eval(z).exp() * s01((z - Z_CAP) / cap.wm)
    }
}

/// Fraction of `η` below which `ψ_η` is exactly constant.
pub fn cap_fraction() -> f64 {
    Z_CAP
}

/// Fraction of `η` above which `ψ_η` coincides exactly with `ψ₀`.
pub fn identity_fraction() -> f64 {
    Z_CAP + cap_profile().wm
}

/// The regularized profile `ψ_η = ψ₀(η·m(u/η))` (see module docs).
#[derive(Debug, Clone)]
pub struct RegularizedProfile {
    base: SlowdownProfile,
    eta: f64,
    /// `ψ₀(η/2)`: the exact constant on the capped core.
    floor: f64,
}

impl RegularizedProfile {
    /// Builds `ψ_η` over a base profile; `η` must lie in `[0, 2r₀²]`.
    /// `η = 0` *is* the base profile; `η = 2r₀²` is identically `1`.
    pub fn new(base: &SlowdownProfile, eta: f64) -> Result<RegularizedProfile> {
        if !(0.0..=2.0 * base.saturation() + 1e-15).contains(&eta) {
            return Err(Error::domain(format!(
                "eta = {eta} must lie in [0, 2 r0^2] = [0, {}]",
                2.0 * base.saturation()
            )));
        }
        let floor = if eta > 0.0 { base.value(eta / 2.0) } else { 0.0 };
        let profile = RegularizedProfile { base: base.clone(), eta, floor };
        profile.verify()?;
        Ok(profile)
    }

    fn verify(&self) -> Result<()> {
        let check = |ok: bool, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "regularized profile (eta = {}) violates: {what}",
                    self.eta
                )))
            }
        };
        let b = self.base.saturation();
        // Saturation and the capped core are exact.
        check(self.value(b) == 1.0 && self.value(1.5 * b) == 1.0, "constant 1 beyond r0^2")?;
        if self.eta > 0.0 {
            check(self.value(0.0) == self.floor, "capped core constant")?;
            check(self.value(self.eta / 4.0) == self.floor, "capped through eta/4")?;
            check(self.floor > 0.0, "positive floor")?;
            // Coincidence with the base profile from eta on.
            for &u in &[self.eta, 1.25 * self.eta, 2.0 * self.eta] {
                check((self.value(u) - self.base.value(u)).abs() < 1e-13, "matches base above eta")?;
            }
        }
        // Dense grid: range, monotonicity, slope headroom, domination of base.
        let n = 2500;
        for k in 0..=n {
            let u = b * k as f64 / n as f64;
            let v = self.value(u);
            let d = self.deriv(u);
            check(v >= 0.0 && v <= 1.0, "range [0, 1]")?;
            check(d >= 0.0, "nondecreasing")?;
            check(
                d <= self.base.slope_headroom(u) * (1.0 + 1e-10) + 1e-300,
                "slope headroom",
            )?;
            check(v + 1e-13 >= self.base.value(u), "dominates the base profile")?;
            if u > 0.0 {
                check(v > 0.0, "positive away from the origin")?;
            }
        }
        Ok(())
    }

    /// `ψ_η(u)`.
    pub fn value(&self, u: f64) -> f64 {
        if self.eta == 0.0 {
            return self.base.value(u);
        }
        let z = u / self.eta;
        if z <= Z_CAP {
            self.floor
        } else if z >= identity_fraction() {
            self.base.value(u)
        } else {
            self.base.value(self.eta * cap_map(z))
        }
    }

    /// `ψ_η′(u)`.
    pub fn deriv(&self, u: f64) -> f64 {
        if self.eta == 0.0 {
            return self.base.deriv(u);
        }
        let z = u / self.eta;
        if z <= Z_CAP {
            0.0
        } else if z >= identity_fraction() {
            self.base.deriv(u)
        } else {
            self.base.deriv(self.eta * cap_map(z)) * cap_map_deriv(z)
        }
    }

    /// Regularization level `η`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The constant value on the capped core, `ψ₀(η/2)`.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// The underlying base profile.
    pub fn base(&self) -> &SlowdownProfile {
        &self.base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use approx::assert_abs_diff_eq;

    fn profile() -> SlowdownProfile {
        SlowdownProfile::new(0.24, 0.025, 0.06).unwrap()
    }

    #[test]
    fn smoothstep_partition_of_unity() {
        assert_eq!(s01(-0.5), 0.0);
        assert_eq!(s01(0.0), 0.0);
        assert_eq!(s01(1.0), 1.0);
        assert_eq!(s01(2.0), 1.0);
        assert_abs_diff_eq!(s01(0.5), 0.5, epsilon = 1e-15);
        for k in 1..20 {
            let x = k as f64 / 20.0;
            assert_abs_diff_eq!(s01(x) + s01(1.0 - x), 1.0, epsilon = 1e-15);
            assert!(s01(x + 0.01) >= s01(x));
        }
    }

    #[test]
    fn base_profile_power_law_region_is_exact() {
        let p = profile();
        let b = p.saturation();
        for &f in &[0.01, 0.1, 0.2, 0.25] {
            let u = f * b;
            assert_eq!(p.value(u), (u / b).powf(1.24));
            assert_eq!(p.deriv(u), 1.24 / b * (u / b).powf(0.24));
        }
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(b), 1.0);
        assert_eq!(p.value(2.0 * b), 1.0);
        assert_eq!(p.deriv(1.1 * b), 0.0);
    }

    #[test]
    fn base_profile_gain_is_small_and_positive() {
        let p = profile();
        assert!(p.gain() > 0.0 && p.gain() < 0.05, "gain = {}", p.gain());
    }

    /// Independent oracle: re-integrate the slope with a different
    /// quadrature and panelization than the table builder used.
    #[test]
    fn base_profile_value_matches_direct_quadrature() {
        let p = profile();
        let b = p.saturation();
        let a = b / 4.0;
        for &f in &[0.3, 0.5, 0.7, 0.9, 0.999] {
            let u = a + f * (b - a);
            // 400 panels so each panel is much narrower than the cutoff
            // window (0.015 of the climb span) that the slope passes through.
            let direct = (a / b).powf(1.24)
                + crate::quadrature::GaussLegendre::rule64().integrate_panels(a, u, 400, |t| p.deriv(t));
            assert_abs_diff_eq!(p.value(u), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn base_profile_derivative_matches_finite_differences() {
        let p = profile();
        let b = p.saturation();
        let h = b * 1e-7;
        for k in 1..40 {
            let u = b * k as f64 / 40.0;
            let fd = (p.value(u + h) - p.value(u - h)) / (2.0 * h);
            assert_abs_diff_eq!(p.deriv(u), fd, epsilon = 1e-4 * (1.0 / b));
        }
    }

    #[test]
    fn cap_map_branches_and_joins() {
        // Constant branch at exactly 1/2.
        assert_eq!(cap_map(0.0), 0.5);
        assert_eq!(cap_map(0.25), 0.5);
        assert_eq!(cap_map(Z_CAP), 0.5);
        // Identity branch.
        let idf = identity_fraction();
        assert!(idf < 1.0, "cap window must close before 1, got {idf}");
        assert_eq!(cap_map(idf), idf);
        assert_eq!(cap_map(1.0), 1.0);
        assert_eq!(cap_map_deriv(1.0), 1.0);
        // Joins are continuous.
        assert_abs_diff_eq!(cap_map(Z_CAP + 1e-9), 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(cap_map(idf - 1e-9), idf, epsilon = 1e-7);
        // Monotone, above both branches, and with the η-monotonicity
        // inequality z·m′(z) ≤ m(z).
        let mut prev = 0.5;
        for k in 0..=1000 {
            let z = k as f64 / 1000.0;
            let m = cap_map(z);
            assert!(m >= prev - 1e-14, "monotone at z = {z}");
            assert!(m >= z - 1e-14 && m >= 0.5 - 1e-14, "above branches at z = {z}");
            assert!(z * cap_map_deriv(z) <= m + 1e-12, "eta-monotonicity at z = {z}");
            prev = m;
        }
    }

    #[test]
    fn regularized_profile_exact_regions() {
        let p = profile();
        let b = p.saturation();
        let eta = b / 4.0;
        let r = RegularizedProfile::new(&p, eta).unwrap();
        // Capped core: exactly ψ₀(η/2).
        let floor = p.value(eta / 2.0);
        assert_eq!(r.value(0.0), floor);
        assert_eq!(r.value(0.42 * eta * 0.999), floor);
        assert_eq!(r.floor(), floor);
        // Coincides with the base from the identity fraction onward.
        for &f in &[0.6, 0.8, 1.0, 2.0] {
            assert_eq!(r.value(f * eta), p.value(f * eta));
            assert_eq!(r.deriv(f * eta), p.deriv(f * eta));
        }
        // Full regularization is identically one.
        let full = RegularizedProfile::new(&p, 2.0 * b).unwrap();
        assert_eq!(full.value(0.0), 1.0);
        assert_eq!(full.value(0.3 * b), 1.0);
        assert_eq!(full.value(2.0 * b), 1.0);
        // Zero regularization is the base profile.
        let zero = RegularizedProfile::new(&p, 0.0).unwrap();
        assert_eq!(zero.value(0.37 * b), p.value(0.37 * b));
    }

    #[test]
    fn regularized_profiles_are_monotone_in_eta() {
        let p = profile();
        let b = p.saturation();
        let ladder: Vec<RegularizedProfile> = [0.0, b / 64.0, b / 16.0, b / 4.0, b, 2.0 * b]
            .iter()
            .map(|&eta| RegularizedProfile::new(&p, eta).unwrap())
            .collect();
        for pair in ladder.windows(2) {
            for k in 0..=400 {
                let u = 1.2 * b * k as f64 / 400.0;
                assert!(
                    pair[0].value(u) <= pair[1].value(u) + 1e-13,
                    "eta {} vs {} at u = {u}",
                    pair[0].eta(),
                    pair[1].eta()
                );
            }
        }
    }

    #[test]
    fn regularized_profile_derivative_matches_finite_differences() {
        let p = profile();
        let b = p.saturation();
        let eta = b / 16.0;
        let r = RegularizedProfile::new(&p, eta).unwrap();
        let h = eta * 1e-7;
        // Sample across the cap window, the identity join, and beyond.
        for &f in &[0.3, 0.43, 0.5, 0.55, 0.6, 0.9, 1.5] {
            let u = f * eta;
            let fd = (r.value(u + h) - r.value(u - h)) / (2.0 * h);
            assert_abs_diff_eq!(r.deriv(u), fd, epsilon = 2e-4 * (1.0 / b));
        }
    }

    #[test]
    fn smallest_ladder_floor_reference_value() {
        // η = r₀²/64 puts η/2 deep in the power-law region:
        // ψ₀(η/2) = (1/128)^{1.24}.
        let p = profile();
        let r = RegularizedProfile::new(&p, p.saturation() / 64.0).unwrap();
        assert_abs_diff_eq!(r.floor(), (1.0f64 / 128.0).powf(1.24), epsilon = 1e-15);
        assert_abs_diff_eq!(r.floor(), 2.43815e-3, epsilon = 1e-7);
    }

    #[test]
    fn parameter_domain_is_enforced() {
        assert!(SlowdownProfile::new(0.4, 0.025, 0.06).is_err()); // alpha cap
        assert!(SlowdownProfile::new(0.32, 0.025, 0.06).is_err()); // sharpness
        assert!(SlowdownProfile::new(0.24, 0.025, 0.7).is_err()); // r0 cap
        let p = profile();
        assert!(RegularizedProfile::new(&p, -0.1).is_err());
        assert!(RegularizedProfile::new(&p, 3.0 * p.saturation()).is_err());
    }
}
