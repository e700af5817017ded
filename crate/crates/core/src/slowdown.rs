//! Slow-down deformations of the automorphism.
//!
//! The second family decelerates the hyperbolic automorphism inside a small
//! disk around its fixed point. In the eigenbasis chart `(s₁, s₂)` the
//! automorphism is the time-one map of the linear flow
//! `ṡ₁ = Λ s₁, ṡ₂ = -Λ s₂`; the deformation multiplies that field by
//! `ψ_η(s₁² + s₂²)` (see [`crate::profile`]), which vanishes like a power law
//! at the origin before the regularization floors it. The deformed map `G`
//! is the time-one map of the slowed flow inside the gluing disk `D_{r₁}`
//! and the base map (the plain automorphism, or a member of the twist
//! family supported away from the disk) outside.
//!
//! With `r₁ = 2 μ⁺ r₀`, every unit-time trajectory from the gluing circle
//! stays where `ψ_η ≡ 1`, so both branches agree near the seam and `G` is a
//! C^∞ diffeomorphism. `G` preserves the probability measure
//! `μ_η = K_η⁻¹ κ_η d·Leb` with density `κ_η = 1/ψ_η(s₁²+s₂²)` on the core
//! disk and `1` elsewhere; the normalizer `K_η` is computed here by
//! quadrature. For the undeformed base (`s = 0`) the typical Lyapunov
//! exponent of `G` is exactly `Λ/K_η` — the flow is a time change of the
//! linear flow — which this module exposes as an oracle.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::map::{ToralAutomorphism, TorusMap};
use crate::matrix::{EigenBasis, HyperbolicMatrix};
use crate::ode::{integrate, integrate_with_observer, OdeSettings, StepControl};
use crate::profile::{cap_fraction, identity_fraction, RegularizedProfile, SlowdownProfile};
use crate::quadrature::GaussLegendre;
use crate::torus::{Mat2, TorusPoint, Vec2};
use crate::twist::{TwistMap, TwistParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Panels per smooth segment of the normalizer quadrature.
const NORMALIZER_PANELS: usize = 48;

/// Message for the unreachable integrator failure inside infallible
/// trait methods (the field is smooth and globally Lipschitz on the
/// region trajectories can reach, so adaptive stepping cannot stall
/// for admissible parameters).
const FLOW_EXPECT: &str =
    "unit-time slow-down flow failed; this indicates corrupted profile state";

/// Parameters selecting one member of the slow-down family.
///
/// `alpha`, `eps`, `r0` shape the radial profile (see
/// [`SlowdownProfile::new`]); `eta` is the regularization scale; `s` indexes
/// the outer deformation: `0` glues to the plain automorphism, `1` to the
/// full twist map, intermediate values scale the twist's slope defect `β`
/// linearly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowDownParams {
    /// Power-law exponent of the profile at the origin.
    pub alpha: f64,
    /// Slope-headroom parameter of the profile.
    pub eps: f64,
    /// Core disk radius.
    pub r0: f64,
    /// Regularization scale, in `(0, 2 r0²]`.
    pub eta: f64,
    /// Outer-twist strength in `[0, 1]`.
    pub s: f64,
}

impl SlowDownParams {
    /// Builds the family member, gluing to `twist` scaled by `s` outside the
    /// disk.
    pub fn build(&self, matrix: HyperbolicMatrix, twist: &TwistParams) -> Result<SlowdownMap> {
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::domain(format!("s = {} must lie in [0, 1]", self.s)));
        }
        let base = SlowdownProfile::new(self.alpha, self.eps, self.r0)?;
        let profile = RegularizedProfile::new(&base, self.eta)?;
        let outer = if self.s == 0.0 {
            None
        } else {
            Some(TwistMap::new(
                matrix,
                TwistParams { beta: self.s * twist.beta, ..*twist },
            )?)
        };
        SlowdownMap::new(matrix, profile, outer)
    }
}

/// The eigenbasis chart around the fixed point, with its two radii: the core
/// disk `D_{r₀}` (where the profile dips below 1) and the gluing disk
/// `D_{r₁}`, `r₁ = 2 μ⁺ r₀`.
#[derive(Debug, Clone)]
pub struct DiskChart {
    basis: EigenBasis,
    r0: f64,
    r1: f64,
}

impl DiskChart {
    /// Builds the chart and verifies that `D_{r₁}` embeds injectively in the
    /// torus (its image must not meet any of its integer translates).
    pub fn new(matrix: &HyperbolicMatrix, r0: f64) -> Result<DiskChart> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::domain(format!("r0 = {r0} must be positive")));
        }
        let basis = matrix.eigen_basis();
        let mu = matrix.mu_plus(1.0).expect("validated matrix has trace > 2");
        let r1 = 2.0 * mu * r0;
        // Injectivity with margin: two chart points s, s' with |s|,|s'| ≤ r₁
        // map to the same torus point only if B(s−s') is a nonzero lattice
        // vector, impossible when σ_max(B)·2r₁ < 1. We demand the stronger
        // σ_max(B)·r₁ < 1/2 so the shortest-displacement lift is also the
        // chart lift for every disk point.
        if !(basis.k2 * r1 < 0.5) {
            return Err(Error::RegionOverlap {
                detail: format!(
                    "gluing disk of radius r1 = {r1} does not embed: \
                     sigma_max(B) * r1 = {} must be < 1/2 (shrink r0)",
                    basis.k2 * r1
                ),
            });
        }
        Ok(DiskChart { basis, r0, r1 })
    }

    /// Chart coordinates of `p` if it lies in the chart disk of the given
    /// radius (`radius ≤ r₁`), else `None`.
    pub fn lookup(&self, p: TorusPoint, radius: f64) -> Option<Vec2> {
        debug_assert!(radius <= self.r1 * (1.0 + 1e-12));
        let d = TorusPoint::new(0.0, 0.0).displacement_to(p);
        let s = self.basis.to_chart(d);
        (s.norm() <= radius).then_some(s)
    }

    /// Torus point of chart coordinates `s` (wraps; defined for any `s`).
    pub fn to_torus(&self, s: Vec2) -> TorusPoint {
        let v = self.basis.from_chart(s);
        TorusPoint::new(v.x, v.y)
    }

    /// Largest `|x|`-extent of the embedded gluing disk, used for the
    /// clearance check against the twist strip.
    pub fn x_extent(&self) -> f64 {
        self.r1 * Vec2::new(self.basis.from_chart.a, self.basis.from_chart.b).norm()
    }

    /// Core radius `r₀`.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Gluing radius `r₁ = 2 μ⁺ r₀`.
    pub fn r1(&self) -> f64 {
        self.r1
    }

    /// The eigenbasis spanning the chart.
    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }
}

/// What the slow-down glues to outside the disk.
#[derive(Debug, Clone)]
enum OuterMap {
    Automorphism(ToralAutomorphism),
    Twist(TwistMap),
}

impl OuterMap {
    fn as_map(&self) -> &dyn TorusMap {
        match self {
            OuterMap::Automorphism(m) => m,
            OuterMap::Twist(m) => m,
        }
    }
}

/// A member of the slow-down family: the time-one map of the `ψ_η`-slowed
/// flow inside the gluing disk, the outer map elsewhere.
#[derive(Debug, Clone)]
pub struct SlowdownMap {
    matrix: HyperbolicMatrix,
    profile: RegularizedProfile,
    chart: DiskChart,
    outer: OuterMap,
    /// `Λ = log μ⁺`.
    lambda: f64,
    /// `μ⁺` of the base automorphism.
    mu: f64,
    /// Mass normalizer `K_η` of the invariant density.
    k_eta: f64,
    ode: OdeSettings,
}

impl SlowdownMap {
    /// Glues the slowed flow to `outer` (`None` = the plain automorphism).
    ///
    /// Validates that the gluing disk embeds, that the twist strip (if any)
    /// clears the disk, and that the flow really matches the linear map on
    /// the gluing circle.
    pub fn new(
        matrix: HyperbolicMatrix,
        profile: RegularizedProfile,
        outer: Option<TwistMap>,
    ) -> Result<SlowdownMap> {
        if !(profile.eta() > 0.0) {
            return Err(Error::domain(
                "eta must be positive: the eta = 0 profile has no invariant density \
                 and the glued map would not be Anosov"
                    .to_string(),
            ));
        }
        let chart = DiskChart::new(&matrix, profile.base().r0())?;
        let outer = match outer {
            None => OuterMap::Automorphism(ToralAutomorphism::new(matrix)),
            Some(twist) => {
                if twist.matrix().as_mat2() != matrix.as_mat2() {
                    return Err(Error::domain(
                        "outer twist map must deform the same automorphism".to_string(),
                    ));
                }
                let (lo, hi) = twist.support();
                let ext = chart.x_extent();
                if !(lo > ext && hi < 1.0 - ext) {
                    return Err(Error::RegionOverlap {
                        detail: format!(
                            "twisted strip [{lo}, {hi}] meets the gluing disk \
                             (|x| ≤ {ext} around the fixed point)"
                        ),
                    });
                }
                OuterMap::Twist(twist)
            }
        };
        let lambda = matrix.expansion_rate();
        let mu = matrix.mu_plus(1.0).expect("validated matrix has trace > 2");
        let k_eta = invariant_mass_normalizer(&profile, chart.basis().det, NORMALIZER_PANELS);
        let map = SlowdownMap {
            matrix,
            profile,
            chart,
            outer,
            lambda,
            mu,
            k_eta,
            ode: OdeSettings::tight(),
        };
        map.verify_seam()?;
        Ok(map)
    }

    /// Checks that the unit-time flow equals the linear map on the gluing
    /// circle (the defining property of `r₁`).
    fn verify_seam(&self) -> Result<()> {
        let r1 = self.chart.r1();
        for j in 0..16 {
            let th = TAU * (j as f64 + 0.31) / 16.0;
            let s = Vec2::new(r1 * th.cos(), r1 * th.sin());
            let y = self.flow(s, 1.0)?;
            let lin = Vec2::new(self.mu * s.x, s.y / self.mu);
            let gap = (y - lin).norm();
            if !(gap < 1e-8) {
                return Err(Error::domain(format!(
                    "gluing seam mismatch {gap:.3e} at boundary angle {th:.3}: \
                     a unit-time trajectory from the gluing circle left the \
                     saturated region (is r0 admissible for this matrix?)"
                )));
            }
        }
        Ok(())
    }

    /// Slowed vector field in chart coordinates.
    #[inline]
    fn field2(&self, y: &[f64; 2]) -> [f64; 2] {
        let u = y[0] * y[0] + y[1] * y[1];
        let p = self.lambda * self.profile.value(u);
        [p * y[0], -p * y[1]]
    }

    /// Field of the flow joined with its variational equation; the matrix
    /// part is `Φ = [[y₂, y₃], [y₄, y₅]]` with `Φ̇ = C(s) Φ`.
    #[inline]
    fn field6(&self, y: &[f64; 6]) -> [f64; 6] {
        let (s1, s2) = (y[0], y[1]);
        let u = s1 * s1 + s2 * s2;
        let psi = self.profile.value(u);
        let dpsi = self.profile.deriv(u);
        let l = self.lambda;
        let c11 = l * (psi + 2.0 * s1 * s1 * dpsi);
        let c12 = 2.0 * l * s1 * s2 * dpsi;
        let c21 = -c12;
        let c22 = -l * (psi + 2.0 * s2 * s2 * dpsi);
        [
            l * psi * s1,
            -l * psi * s2,
            c11 * y[2] + c12 * y[4],
            c11 * y[3] + c12 * y[5],
            c21 * y[2] + c22 * y[4],
            c21 * y[3] + c22 * y[5],
        ]
    }

    /// Flows chart coordinates for time `t` (either sign).
    pub fn flow(&self, s: Vec2, t: f64) -> Result<Vec2> {
        let y = integrate(|_, y| self.field2(y), 0.0, t, [s.x, s.y], &self.ode)?;
        Ok(Vec2::new(y[0], y[1]))
    }

    /// The time-one map of the slowed flow in chart coordinates.
    pub fn flow_time_one(&self, s: Vec2) -> Result<Vec2> {
        self.flow(s, 1.0)
    }

    /// Flows chart coordinates together with the variational matrix; returns
    /// `(s(t), Φ(t))` with `Φ(0) = Id`.
    pub fn flow_with_variational(&self, s: Vec2, t: f64) -> Result<(Vec2, Mat2)> {
        let y = integrate(
            |_, y| self.field6(y),
            0.0,
            t,
            [s.x, s.y, 1.0, 0.0, 0.0, 1.0],
            &self.ode,
        )?;
        Ok((Vec2::new(y[0], y[1]), Mat2::new(y[2], y[3], y[4], y[5])))
    }

    /// Conjugates a chart-coordinate matrix into torus coordinates.
    fn conjugate_from_chart(&self, phi: Mat2) -> Mat2 {
        self.chart.basis().from_chart.mul_mat(phi).mul_mat(self.chart.basis().to_chart)
    }

    /// Invariant density `κ_η` (`1/ψ_η(s₁²+s₂²)` on the core disk, `1`
    /// elsewhere). Continuous because `ψ_η = 1` on the core boundary.
    pub fn kappa(&self, p: TorusPoint) -> f64 {
        match self.chart.lookup(p, self.chart.r0()) {
            Some(s) => 1.0 / self.profile.value(s.norm_sq()),
            None => 1.0,
        }
    }

    /// Mass normalizer `K_η = ∫ κ_η d·Leb ≥ 1`.
    pub fn normalizer(&self) -> f64 {
        self.k_eta
    }

    /// The exact typical Lyapunov exponent `Λ/K_η` of the member glued to
    /// the plain automorphism (the slowed flow is a time change of the
    /// linear flow). `None` when the outer map is a twist.
    pub fn unperturbed_abs_exponent(&self) -> Option<f64> {
        match self.outer {
            OuterMap::Automorphism(_) => Some(self.lambda / self.k_eta),
            OuterMap::Twist(_) => None,
        }
    }

    /// Expansion rate `Λ` of the base automorphism.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The radial profile in use.
    pub fn profile(&self) -> &RegularizedProfile {
        &self.profile
    }

    /// The eigenbasis chart and its radii.
    pub fn chart(&self) -> &DiskChart {
        &self.chart
    }

    /// The base automorphism.
    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.matrix
    }

    /// The outer twist, if this member glues to one.
    pub fn outer_twist(&self) -> Option<&TwistMap> {
        match &self.outer {
            OuterMap::Twist(t) => Some(t),
            OuterMap::Automorphism(_) => None,
        }
    }

    /// Replaces the integrator settings (tight by default).
    pub fn with_ode_settings(mut self, settings: OdeSettings) -> SlowdownMap {
        self.ode = settings;
        self
    }

    /// The annulus of the residence-time bound: inner radius `r₀/(2Λ)`,
    /// outer radius `r₁`.
    pub fn annulus(&self) -> (f64, f64) {
        (self.chart.r0() / (2.0 * self.lambda), self.chart.r1())
    }

    /// Longest single visit of the slowed flow to the annulus, over a
    /// `radial × angular` grid of seed points. Each seed is flowed backward
    /// and forward to the ends of its visit (integration is capped at
    /// `t_cap` per direction, so a returned value `≥ t_cap` means some visit
    /// outlasted the cap).
    pub fn max_annulus_dwell(&self, radial: usize, angular: usize, t_cap: f64) -> Result<f64> {
        let (r_in, r_out) = self.annulus();
        let settings = OdeSettings::cruise();
        let mut worst: f64 = 0.0;
        for i in 0..radial {
            let r = r_in + (r_out - r_in) * (i as f64 + 0.5) / radial as f64;
            for j in 0..angular {
                let th = TAU * (j as f64 + 0.37) / angular as f64;
                let s0 = [r * th.cos(), r * th.sin()];
                let fwd = self.annulus_exit_time(s0, t_cap, 1.0, &settings)?;
                let bwd = self.annulus_exit_time(s0, t_cap, -1.0, &settings)?;
                worst = worst.max(fwd + bwd);
            }
        }
        Ok(worst)
    }

    /// Time for the flow (forward for `dir = 1`, backward for `dir = -1`)
    /// to leave the annulus from `s0`, capped at `t_cap`.
    fn annulus_exit_time(
        &self,
        s0: [f64; 2],
        t_cap: f64,
        dir: f64,
        settings: &OdeSettings,
    ) -> Result<f64> {
        let (r_in, r_out) = self.annulus();
        // Positive inside the annulus, negative outside.
        let gauge = move |y: &[f64; 2]| {
            let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
            (n - r_in).min(r_out - n)
        };
        let field = |_t: f64, y: &[f64; 2]| {
            let f = self.field2(y);
            [dir * f[0], dir * f[1]]
        };
        let mut bracket: Option<(f64, [f64; 2], f64)> = None;
        let (t_end, _) = integrate_with_observer(
            field,
            0.0,
            t_cap,
            s0,
            settings,
            |t_prev, y_prev, t_new, y_new| {
                if gauge(y_new) < 0.0 {
                    bracket = Some((t_prev, *y_prev, t_new));
                    StepControl::Stop
                } else {
                    StepControl::Continue
                }
            },
        )?;
        match bracket {
            Some((ta, ya, tb)) => {
                let (t_exit, _) = crate::ode::bisect_event(
                    field,
                    ta,
                    ya,
                    tb,
                    |y| -gauge(y),
                    1e-9,
                    settings,
                )?;
                Ok(t_exit)
            }
            None => Ok(t_end),
        }
    }

    /// Monte-Carlo check that `G` preserves `μ_η`: returns the `μ_η`-mass of
    /// the box `[lo, hi)`, the mass of its pullback measured through the
    /// pushed-forward sample, and the standard error of their difference.
    pub fn measure_invariance_discrepancy(
        &self,
        n: usize,
        seed: u64,
        lo: (f64, f64),
        hi: (f64, f64),
    ) -> (f64, f64, f64) {
        use rayon::prelude::*;
        assert!(n >= 2, "need at least two samples");
        let in_box = |p: TorusPoint| {
            p.x() >= lo.0 && p.x() < hi.0 && p.y() >= lo.1 && p.y() < hi.1
        };
        let terms: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let p = TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
                let w = self.kappa(p) / self.k_eta;
                let direct = if in_box(p) { w } else { 0.0 };
                let pushed = if in_box(self.apply(p)) { w } else { 0.0 };
                (direct, pushed)
            })
            .collect();
        // Sequential reduction keeps the result independent of thread count.
        let n_f = n as f64;
        let mut sum_direct = 0.0;
        let mut sum_pushed = 0.0;
        for &(d, p) in &terms {
            sum_direct += d;
            sum_pushed += p;
        }
        let mean_diff = (sum_direct - sum_pushed) / n_f;
        let mut var_diff = 0.0;
        for &(d, p) in &terms {
            let c = (d - p) - mean_diff;
            var_diff += c * c;
        }
        var_diff /= n_f * (n_f - 1.0);
        (sum_direct / n_f, sum_pushed / n_f, var_diff.sqrt())
    }
}

impl TorusMap for SlowdownMap {
    fn apply(&self, p: TorusPoint) -> TorusPoint {
        match self.chart.lookup(p, self.chart.r1()) {
            Some(s) => {
                let y = self.flow(s, 1.0).expect(FLOW_EXPECT);
                self.chart.to_torus(y)
            }
            None => self.outer.as_map().apply(p),
        }
    }

    fn derivative(&self, p: TorusPoint) -> Mat2 {
        match self.chart.lookup(p, self.chart.r1()) {
            Some(s) => {
                let (_, phi) = self.flow_with_variational(s, 1.0).expect(FLOW_EXPECT);
                self.conjugate_from_chart(phi)
            }
            None => self.outer.as_map().derivative(p),
        }
    }

    fn apply_with_derivative(&self, p: TorusPoint) -> (TorusPoint, Mat2) {
        match self.chart.lookup(p, self.chart.r1()) {
            Some(s) => {
                let (y, phi) = self.flow_with_variational(s, 1.0).expect(FLOW_EXPECT);
                (self.chart.to_torus(y), self.conjugate_from_chart(phi))
            }
            None => self.outer.as_map().apply_with_derivative(p),
        }
    }

    fn inverse_apply(&self, p: TorusPoint) -> Result<TorusPoint> {
        // p has a disk preimage iff L_A⁻¹ p lies in the gluing disk: the
        // slowed and linear flows share the boundary trajectory of D_{r₁},
        // so their unit-time images of the disk coincide as sets.
        let lin_pre = self.matrix.apply_inverse(p);
        match self.chart.lookup(lin_pre, self.chart.r1()) {
            Some(s_pre) => {
                // Chart coordinates of p's lift along the disk image, then
                // flow backward for unit time.
                let sy = [self.mu * s_pre.x, s_pre.y / self.mu];
                let y = integrate(
                    |_, y: &[f64; 2]| {
                        let f = self.field2(y);
                        [-f[0], -f[1]]
                    },
                    0.0,
                    1.0,
                    sy,
                    &self.ode,
                )?;
                let s_x = Vec2::new(y[0], y[1]);
                if s_x.norm() > self.chart.r1() * (1.0 + 1e-9) {
                    return Err(Error::NotInvertibleAt {
                        x: p.x(),
                        y: p.y(),
                        detail: format!(
                            "backward flow left the gluing disk (|s| = {:.6})",
                            s_x.norm()
                        ),
                    });
                }
                Ok(self.chart.to_torus(s_x))
            }
            None => self.outer.as_map().inverse_apply(p),
        }
    }
}

/// `K_η = 1 + |det B| π ∫₀^{r₀²} (1/ψ_η(u) - 1) du`, the total mass of the
/// invariant density (the radial integral is exact over the capped core,
/// Gauss–Legendre over the smooth remainder, split at the structural joins
/// of `ψ_η`).
pub fn invariant_mass_normalizer(
    profile: &RegularizedProfile,
    basis_det: f64,
    panels: usize,
) -> f64 {
    let b = profile.base().saturation();
    let eta = profile.eta();
    assert!(eta > 0.0, "the eta = 0 profile has a divergent density");
    let core_hi = (cap_fraction() * eta).min(b);
    let mut integral = (1.0 / profile.floor() - 1.0) * core_hi;
    let mut joins = vec![
        core_hi,
        (identity_fraction() * eta).min(b),
        eta.min(b),
        (b / 4.0).clamp(core_hi, b),
        b,
    ];
    joins.sort_by(f64::total_cmp);
    let rule = GaussLegendre::rule64();
    let mut lo = core_hi;
    for hi in joins {
        if hi > lo + 1e-300 {
            integral += rule.integrate_panels(lo, hi, panels, |u| 1.0 / profile.value(u) - 1.0);
            lo = hi;
        }
    }
    1.0 + basis_det.abs() * PI * integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn cat() -> HyperbolicMatrix {
        HyperbolicMatrix::new(2, 1, 1, 1).unwrap()
    }

    fn default_twist() -> TwistParams {
        TwistParams { m: 0.375, l: 0.25, delta: 0.0625, w: 0.0625 / 8.0, beta: 0.3 }
    }

    fn params(eta_fraction: f64, s: f64) -> SlowDownParams {
        SlowDownParams { alpha: 0.24, eps: 0.025, r0: 0.06, eta: 0.0036 * eta_fraction, s }
    }

    fn member(eta_fraction: f64, s: f64) -> SlowdownMap {
        params(eta_fraction, s).build(cat(), &default_twist()).unwrap()
    }

    #[test]
    fn chart_radii_and_injectivity_guard() {
        let chart = DiskChart::new(&cat(), 0.06).unwrap();
        let mu = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(chart.r1(), 2.0 * mu * 0.06, epsilon = 1e-14);
        // The symmetric matrix has an orthogonal eigenbasis.
        assert_abs_diff_eq!(chart.basis().k2, 1.0, epsilon = 1e-12);
        // Too large a core radius breaks the embedding.
        assert!(matches!(
            DiskChart::new(&cat(), 0.2),
            Err(Error::RegionOverlap { .. })
        ));
        // Round trip through the torus and back.
        let s = Vec2::new(0.21, -0.11);
        let p = chart.to_torus(s);
        let back = chart.lookup(p, chart.r1()).unwrap();
        assert!((back - s).norm() < 1e-14);
        assert!(chart.lookup(TorusPoint::new(0.5, 0.5), chart.r1()).is_none());
    }

    #[test]
    fn strip_clearance_is_enforced() {
        // Strip starting at x = 0.25 reaches into the disk's x-extent
        // (≈ 0.314 for these parameters).
        let near = TwistParams { m: 0.25, ..default_twist() };
        let err = params(0.25, 1.0).build(cat(), &near).unwrap_err();
        assert!(matches!(err, Error::RegionOverlap { .. }), "got {err}");
        // The default strip clears it.
        member(0.25, 1.0);
    }

    #[test]
    fn parameter_domain_is_enforced() {
        // eta = 0 is rejected by the glued map.
        let base = SlowdownProfile::new(0.24, 0.025, 0.06).unwrap();
        let profile = RegularizedProfile::new(&base, 0.0).unwrap();
        assert!(SlowdownMap::new(cat(), profile, None).is_err());
        // s outside [0, 1].
        assert!(params(0.25, 1.5).build(cat(), &default_twist()).is_err());
        // Mismatched matrix between the twist and the slow-down.
        let other = HyperbolicMatrix::new(3, 1, 2, 1).unwrap();
        let twist = TwistMap::new(other, default_twist()).unwrap();
        let profile = RegularizedProfile::new(&base, 0.0009).unwrap();
        assert!(SlowdownMap::new(cat(), profile, Some(twist)).is_err());
    }

    #[test]
    fn saturated_eta_is_the_plain_base() {
        // eta = 2 r0²: the profile is identically 1, the flow is linear, and
        // the normalizer is exactly 1.
        let g = member(2.0, 0.0);
        assert_eq!(g.normalizer(), 1.0);
        let auto = ToralAutomorphism::new(cat());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = TorusPoint::new(0.32 * rng.gen::<f64>(), 0.32 * rng.gen::<f64>());
            assert!(g.apply(p).dist(auto.apply(p)) < 1e-9);
        }
    }

    #[test]
    fn fixed_point_and_outer_branch() {
        let g = member(0.25, 1.0);
        // The origin is fixed exactly (the integrator never leaves 0).
        let origin = TorusPoint::new(0.0, 0.0);
        assert_eq!(g.apply(origin), origin);
        // Off the disk the map IS the outer twist, bit for bit.
        let twist = g.outer_twist().unwrap().clone();
        let p = TorusPoint::new(0.5, 0.77);
        assert!(g.chart().lookup(p, g.chart().r1()).is_none());
        assert_eq!(g.apply(p), twist.apply(p));
        assert_eq!(g.derivative(p), twist.derivative(p));
    }

    #[test]
    fn flow_conserves_coordinate_product() {
        // s₁s₂ is a first integral of the slowed field.
        let g = member(0.0625, 0.0);
        let r1 = g.chart().r1();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = r1 * rng.gen::<f64>().sqrt();
            let th = TAU * rng.gen::<f64>();
            let s = Vec2::new(r * th.cos(), r * th.sin());
            let y = g.flow_time_one(s).unwrap();
            assert!(
                (y.x * y.y - s.x * s.y).abs() < 1e-10,
                "product drift {:e} from {s:?}",
                (y.x * y.y - s.x * s.y).abs()
            );
        }
    }

    #[test]
    fn seam_matches_linear_map_tightly() {
        let g = member(0.0625, 0.0);
        let r1 = g.chart().r1();
        let mu = (3.0 + 5.0f64.sqrt()) / 2.0;
        for j in 0..16 {
            let th = TAU * j as f64 / 16.0;
            let s = Vec2::new(r1 * th.cos(), r1 * th.sin());
            let y = g.flow_time_one(s).unwrap();
            let lin = Vec2::new(mu * s.x, s.y / mu);
            assert!((y - lin).norm() < 1e-9, "seam gap {:e}", (y - lin).norm());
        }
    }

    #[test]
    fn origin_derivative_is_the_floored_linearization() {
        // At the equilibrium the variational equation has constant
        // coefficients diag(±ψ_η(0)Λ).
        let g = member(0.25, 0.0);
        let rate = g.profile().floor() * g.lambda();
        let expected = g.chart().basis().from_chart.mul_mat(
            Mat2::diag(rate.exp(), (-rate).exp()),
        )
        .mul_mat(g.chart().basis().to_chart);
        let got = g.derivative(TorusPoint::new(0.0, 0.0));
        for (a, b) in [
            (got.a, expected.a),
            (got.b, expected.b),
            (got.c, expected.c),
            (got.d, expected.d),
        ] {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let g = member(0.0625, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(20260816);
        for k in 0..25 {
            // Half the probes target the disk, half roam the torus.
            let p = if k % 2 == 0 {
                let r = g.chart().r1() * rng.gen::<f64>().sqrt();
                let th = TAU * rng.gen::<f64>();
                g.chart().to_torus(Vec2::new(r * th.cos(), r * th.sin()))
            } else {
                TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>())
            };
            let exact = g.derivative(p);
            let fd = crate::map::finite_difference_jacobian(&g, p, 1e-6);
            for (x, y) in [
                (exact.a, fd.a),
                (exact.b, fd.b),
                (exact.c, fd.c),
                (exact.d, fd.d),
            ] {
                assert_abs_diff_eq!(x, y, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn determinant_tracks_the_density_ratio() {
        // det DG(x) = κ(x)/κ(Gx): the map trades volume against the
        // invariant density. Off the core both densities are 1.
        let g = member(0.0625, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let r = g.chart().r1() * rng.gen::<f64>().sqrt();
            let th = TAU * rng.gen::<f64>();
            let p = g.chart().to_torus(Vec2::new(r * th.cos(), r * th.sin()));
            let (image, dg) = g.apply_with_derivative(p);
            let jac = dg.det() * g.kappa(image) / g.kappa(p);
            assert_abs_diff_eq!(jac, 1.0, epsilon = 1e-8);
        }
        // Outside the disk the derivative is the (unimodular) outer map's.
        let p = TorusPoint::new(0.5, 0.2);
        assert_abs_diff_eq!(g.derivative(p).det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        for s in [0.0, 1.0] {
            let g = member(0.0625, s);
            let mut rng = ChaCha8Rng::seed_from_u64(31);
            for _ in 0..50 {
                let p = TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
                let fwd_back = g.inverse_apply(g.apply(p)).unwrap();
                assert!(fwd_back.dist(p) < 1e-8, "G⁻¹∘G drift {:e}", fwd_back.dist(p));
                let back_fwd = g.apply(g.inverse_apply(p).unwrap());
                assert!(back_fwd.dist(p) < 1e-8, "G∘G⁻¹ drift {:e}", back_fwd.dist(p));
            }
        }
    }

    #[test]
    fn normalizer_matches_independent_reference() {
        // Reference values from an independent adaptive-quadrature replica
        // of the construction (profile rebuilt symbolically, quadrature by
        // nested adaptive rules), frozen here.
        for (eta_fraction, reference) in [
            (1.0, 1.0104595766701192),
            (0.25, 1.0377285896220756),
            (0.0625, 1.0757104758266478),
            (0.015625, 1.1286854710465166),
        ] {
            let g = member(eta_fraction, 0.0);
            let rel = (g.normalizer() - reference).abs() / reference;
            assert!(
                rel < 1e-7,
                "K mismatch at eta fraction {eta_fraction}: {} vs {reference}",
                g.normalizer()
            );
        }
        // Quadrature panel refinement is converged.
        let g = member(0.015625, 0.0);
        let doubled =
            invariant_mass_normalizer(g.profile(), g.chart().basis().det, 2 * NORMALIZER_PANELS);
        assert!((doubled - g.normalizer()).abs() / doubled < 1e-10);
        // Mass grows as the regularization shrinks.
        let ladder: Vec<f64> = [2.0, 1.0, 0.25, 0.0625, 0.015625]
            .iter()
            .map(|&f| member(f, 0.0).normalizer())
            .collect();
        assert!(ladder.windows(2).all(|w| w[0] < w[1] + 1e-15));
        assert_eq!(ladder[0], 1.0);
    }

    #[test]
    fn abs_exponent_oracle_only_for_plain_base() {
        let g0 = member(0.25, 0.0);
        let expected = g0.lambda() / g0.normalizer();
        assert_abs_diff_eq!(g0.unperturbed_abs_exponent().unwrap(), expected, epsilon = 1e-15);
        assert!(member(0.25, 1.0).unperturbed_abs_exponent().is_none());
    }

    #[test]
    fn annulus_dwell_stays_below_certified_cap() {
        let g = member(0.25, 0.0);
        let cap = bounds::annulus_residence_cap(g.lambda(), g.profile().base().alpha());
        let dwell = g.max_annulus_dwell(4, 8, 1.01 * cap).unwrap();
        assert!(dwell > 0.2, "dwell {dwell} suspiciously short");
        assert!(dwell < cap, "dwell {dwell} exceeds certified cap {cap}");
    }

    #[test]
    fn measure_invariance_within_monte_carlo_error() {
        let g = member(0.0625, 0.0);
        // Box overlapping the gluing disk (which straddles x, y ≈ 0).
        let (direct, pushed, se) =
            g.measure_invariance_discrepancy(20_000, 99, (0.75, 0.75), (1.0, 1.0));
        assert!(direct > 0.01, "test box should carry visible mass");
        assert!(
            (direct - pushed).abs() <= 3.0 * se + 1e-12,
            "mass drift {:.3e} vs 3σ = {:.3e}",
            (direct - pushed).abs(),
            3.0 * se
        );
    }

    #[test]
    fn cone_slope_obeys_the_riccati_trap() {
        // The slope ζ of a tangent vector follows
        //   ζ' = -2Λ[(ψ + uψ')ζ + s₁s₂ψ'(1 + ζ²)],
        // and on the cone boundary ζ = ±ρ(α, ε) the flow pushes inward for
        // every admissible point, including the worst split s₁s₂ = ±u/2.
        let g = member(0.015625, 0.0);
        let rho = bounds::invariant_cone_aperture(0.24, 0.025).unwrap();
        let b = g.profile().base().saturation();
        for k in 0..200 {
            let u = b * ((k as f64 + 0.5) / 200.0).powi(3);
            let psi = g.profile().value(u);
            let dpsi = g.profile().deriv(u);
            for split in [u / 2.0, -u / 2.0] {
                for zeta in [rho, -rho] {
                    // Outward velocity of |ζ| at the boundary.
                    let d_zeta = -2.0
                        * g.lambda()
                        * ((psi + u * dpsi) * zeta + split * dpsi * (1.0 + zeta * zeta));
                    let outward = d_zeta * zeta.signum();
                    assert!(
                        outward <= 1e-13,
                        "cone boundary escapes at u = {u:.3e}, split {split:.3e}: {outward:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn chart_cones_certify_the_deepest_member() {
        // The constant eigen-chart cone pair with apertures 1/2 stays
        // invariant and uniformly expanding/contracting for the most deformed
        // member of the ladder, glued to either outer map. The apertures sit
        // strictly inside the invariant-aperture interval: at the minimal
        // aperture itself the worst cone-boundary flow is tangential, so its
        // angular margin vanishes and certification cannot dominate drift.
        // Coarse grid here; the acceptance suite re-runs at full resolution.
        // Extra refinement depth: leaves must get well under the width of the
        // profile's climb ring (where the slowed stretch rises off its floor)
        // before their sampled drift bound drops below the margins there, and
        // the ring is ~1e-3 wide for the deepest member. Only ring-adjacent
        // cells actually recurse that far.
        let rho = 0.5;
        let opts =
            crate::cones::CertOptions { grid_n: 64, refine_depth: 9, ..Default::default() };
        for s in [0.0, 1.0] {
            let g = member(0.015625, s);
            let system = crate::cones::chart_cones(g.chart().basis(), rho, 0.5).unwrap();
            let cert = crate::cones::certify_cone_system(&g, &system, &opts).unwrap();
            assert!(
                cert.pass,
                "certification failed for s = {s}: fwd exp {} bwd exp {} fwd ang {} bwd ang {} dominated {}",
                cert.forward_min_expansion,
                cert.backward_min_expansion,
                cert.forward_min_angle,
                cert.backward_min_angle,
                cert.drift_dominated,
            );
            // The binding margin has the scale of the floored stretch: gauge
            // expansion is exactly exp(floor · Λ) where the profile saturates,
            // and climb-ring points trade a little of that diagonal stretch
            // against an off-diagonal gauge loss, landing slightly below it.
            let floored = g.profile().floor() * g.lambda();
            assert!(
                cert.forward_min_expansion > 1.0 + 0.5 * floored
                    && cert.forward_min_expansion < 1.0 + 2.0 * floored,
                "forward margin {} should have the scale of the floored stretch {floored}",
                cert.forward_min_expansion
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn prop_inverse_round_trip(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let g = member(0.25, 0.0);
            let p = TorusPoint::new(x, y);
            let q = g.inverse_apply(g.apply(p)).unwrap();
            prop_assert!(q.dist(p) < 1e-8);
        }

        #[test]
        fn prop_disk_points_conserve_product(r in 0.0f64..1.0, th in 0.0f64..TAU) {
            let g = member(0.25, 0.0);
            let r1 = g.chart().r1();
            let s = Vec2::new(r1 * r.sqrt() * th.cos(), r1 * r.sqrt() * th.sin());
            let y = g.flow_time_one(s).unwrap();
            prop_assert!((y.x * y.y - s.x * s.y).abs() < 1e-10);
        }
    }
}
