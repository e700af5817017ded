//! Lyapunov-exponent estimators.
//!
//! Two independent routes to the expanding exponent of the physical
//! (absolutely continuous) invariant measure:
//!
//! * [`birkhoff_exponent`]: time averages of `log‖DF|_{E^u}‖` along many
//!   orbits from Lebesgue-uniform starts, the unstable line tracked by
//!   normalized push-forward of the derivative cocycle. Reports the
//!   between-orbit scatter as a standard error.
//! * [`quadrature_exponent`]: a space average — midpoint quadrature of
//!   `log‖DF|_{E^u(p)}‖ · κ(p)/K` over the torus, with the unstable
//!   direction at each node recovered from backward orbits and the invariant
//!   density `κ/K` supplied by the caller ([`InvariantDensity`]).
//!
//! The two must agree within sampling error on ergodic maps; the test suites
//! and the acceptance gate cross-check them. Exponents of the measure of
//! maximal entropy live in [`crate::periodic`], which averages over periodic
//! orbits instead.
//!
//! Everything here is deterministic: orbit starts derive from one root seed
//! through per-orbit counter streams, work is distributed with rayon but
//! reduced in fixed index order, so results are bit-reproducible across
//! thread counts.

use crate::error::{Error, Result};
use crate::map::TorusMap;
use crate::slowdown::SlowdownMap;
use crate::torus::{Mat2, TorusPoint, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which estimator produced an [`ExponentEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    /// Orbit time-averaging from random starts.
    Birkhoff,
    /// Grid quadrature against an invariant density.
    Quadrature,
    /// Averages over complete periodic-point sets.
    Periodic,
    /// Negated slope of the pressure curve.
    PressureDerivative,
}

impl std::fmt::Display for EstimatorMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimatorMethod::Birkhoff => "birkhoff",
            EstimatorMethod::Quadrature => "quadrature",
            EstimatorMethod::Periodic => "periodic",
            EstimatorMethod::PressureDerivative => "pressure_derivative",
        };
        f.write_str(s)
    }
}

/// A measured exponent with its uncertainty and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    /// The estimate itself.
    pub value: f64,
    /// Scale of the estimate's uncertainty. Sampling standard error for
    /// orbit averages; successive-refinement spread for deterministic
    /// methods. Always `≥ 0`.
    pub std_error: f64,
    /// Independent samples combined (orbits, grid cells, or periodic
    /// points).
    pub n_samples: usize,
    /// Iteration depth per sample (orbit length, grid resolution, or
    /// period).
    pub n_iters: usize,
    /// Which estimator produced the value.
    pub method: EstimatorMethod,
}

impl ExponentEstimate {
    /// Rejects non-finite values and malformed uncertainties; every
    /// constructor in this crate funnels through here.
    pub(crate) fn validated(self) -> Result<ExponentEstimate> {
        if !self.value.is_finite() {
            return Err(Error::non_finite(&format!("{} exponent estimate", self.method)));
        }
        if !(self.std_error >= 0.0 && self.std_error.is_finite()) {
            return Err(Error::non_finite(&format!("{} standard error", self.method)));
        }
        Ok(self)
    }

    /// `√(se₁² + se₂²)`: the uncertainty of the difference between two
    /// independent estimates, for cross-estimator agreement checks.
    pub fn combined_std_error(&self, other: &ExponentEstimate) -> f64 {
        self.std_error.hypot(other.std_error)
    }
}

/// Settings for [`birkhoff_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffOptions {
    /// Orbits sampled (each from an independent uniform start).
    pub n_orbits: usize,
    /// Iterations accumulated per orbit after burn-in.
    pub n_iters: usize,
    /// Iterations discarded before accumulation (decorrelates the start and
    /// converges the tracked direction onto the unstable line).
    pub burn_in: usize,
    /// Root seed; orbit `i` draws from stream `i` of this seed.
    pub seed: u64,
    /// Cap on the between-orbit standard deviation. Ergodic time averages
    /// concentrate as orbits lengthen, so scatter beyond the cap signals a
    /// sampling bug (or a non-ergodic map) rather than ordinary noise.
    pub sigma_cap: f64,
}

impl Default for BirkhoffOptions {
    fn default() -> Self {
        BirkhoffOptions {
            n_orbits: 200,
            n_iters: 100_000,
            burn_in: 1_000,
            seed: 20_260_816,
            sigma_cap: 0.25,
        }
    }
}

impl BirkhoffOptions {
    fn validate(&self) -> Result<()> {
        if self.n_orbits < 2 {
            return Err(Error::domain(format!(
                "n_orbits = {} must be >= 2 to estimate between-orbit scatter",
                self.n_orbits
            )));
        }
        if self.n_iters < 1_000 {
            return Err(Error::domain(format!(
                "n_iters = {} must be >= 1000 for a meaningful time average",
                self.n_iters
            )));
        }
        if !(self.sigma_cap > 0.0 && self.sigma_cap.is_finite()) {
            return Err(Error::domain(format!(
                "sigma_cap = {} must be positive and finite",
                self.sigma_cap
            )));
        }
        Ok(())
    }
}

/// Expanding Lyapunov exponent of the physical measure by orbit averaging.
///
/// Each orbit starts Lebesgue-uniform, discards `burn_in` iterates, then
/// accumulates `(1/n) Σ log‖DF v‖/‖v‖` with `v` the push-forward of a fixed
/// generic direction (normalized every step); after burn-in `v` lies on the
/// unstable line to machine precision. The returned value is the mean of the
/// per-orbit averages; `std_error` is their scatter over `√n_orbits`.
///
/// Maps whose physical measure is a smooth density `κ/K` (rather than
/// Lebesgue itself) are covered by the same estimator: time averages from
/// Lebesgue-typical starts converge to the `κ/K`-average whenever the two
/// measures are equivalent, as they are for every member of the shipped
/// families.
///
/// Deterministic given `opts.seed`, independent of thread count.
///
/// # Errors
///
/// [`Error::NoConvergence`] when the between-orbit standard deviation
/// exceeds `opts.sigma_cap`; [`Error::ParamDomain`] for undersized settings;
/// [`Error::NonFinite`] if a cocycle product degenerates.
pub fn birkhoff_exponent<M: TorusMap + ?Sized>(
    map: &M,
    opts: &BirkhoffOptions,
) -> Result<ExponentEstimate> {
    opts.validate()?;
    let per_orbit: Vec<Result<f64>> = (0..opts.n_orbits)
        .into_par_iter()
        .map(|index| orbit_average(map, opts, index))
        .collect();
    // Reduce sequentially in orbit order so the result does not depend on
    // the thread schedule.
    let mut means = Vec::with_capacity(opts.n_orbits);
    for r in per_orbit {
        means.push(r?);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt();
    if sigma > opts.sigma_cap {
        return Err(Error::NoConvergence {
            context: "between-orbit scatter of the Birkhoff exponent".into(),
            residual: sigma,
            iterations: opts.n_iters,
        });
    }
    ExponentEstimate {
        value: mean,
        std_error: sigma / n.sqrt(),
        n_samples: opts.n_orbits,
        n_iters: opts.n_iters,
        method: EstimatorMethod::Birkhoff,
    }
    .validated()
}

/// One orbit's time average of the unstable log-stretch.
fn orbit_average<M: TorusMap + ?Sized>(
    map: &M,
    opts: &BirkhoffOptions,
    index: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let mut p = TorusPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
    let mut v = Vec2::new(0.8, 0.6); // fixed generic direction
    for _ in 0..opts.burn_in {
        let (next, df) = map.apply_with_derivative(p);
        v = renormalize(df.apply(v))?.0;
        p = next;
    }
    let mut acc = 0.0;
    for _ in 0..opts.n_iters {
        let (next, df) = map.apply_with_derivative(p);
        let (unit, stretch) = renormalize(df.apply(v))?;
        acc += stretch.ln();
        v = unit;
        p = next;
    }
    Ok(acc / opts.n_iters as f64)
}

/// Splits a pushed vector into unit direction and stretch, rejecting
/// degenerate products.
fn renormalize(w: Vec2) -> Result<(Vec2, f64)> {
    let n = w.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::non_finite("derivative cocycle push-forward"));
    }
    Ok((w * (1.0 / n), n))
}

/// View of a map's inverse as a map in its own right, so any estimator can
/// run backward in time.
///
/// The expanding exponent of the inverse is the negated contracting exponent
/// of the original map; with unit determinant the two expanding exponents
/// coincide, which is the exponent-sum check the tests perform.
///
/// # Panics
///
/// The [`TorusMap`] interface makes forward application infallible, so this
/// wrapper panics if the wrapped map fails to invert — use it only on
/// (certified) diffeomorphisms, whose inverses are total.
#[derive(Debug, Clone, Copy)]
pub struct InverseMap<'a, M: TorusMap + ?Sized> {
    inner: &'a M,
}

impl<'a, M: TorusMap + ?Sized> InverseMap<'a, M> {
    /// Wraps a borrowed map.
    pub fn new(inner: &'a M) -> Self {
        InverseMap { inner }
    }
}

const INVERSE_EXPECT: &str =
    "wrapped map failed to invert; InverseMap requires a total inverse";

impl<M: TorusMap + ?Sized> TorusMap for InverseMap<'_, M> {
    fn apply(&self, p: TorusPoint) -> TorusPoint {
        self.inner.inverse_apply(p).expect(INVERSE_EXPECT)
    }

    fn derivative(&self, p: TorusPoint) -> Mat2 {
        self.inner.inverse_derivative(p).expect(INVERSE_EXPECT)
    }

    fn apply_with_derivative(&self, p: TorusPoint) -> (TorusPoint, Mat2) {
        let q = self.inner.inverse_apply(p).expect(INVERSE_EXPECT);
        let df = self
            .inner
            .derivative(q)
            .inverse()
            .expect("derivative of a diffeomorphism is invertible");
        (q, df)
    }

    fn inverse_apply(&self, p: TorusPoint) -> Result<TorusPoint> {
        Ok(self.inner.apply(p))
    }

    fn inverse_derivative(&self, p: TorusPoint) -> Result<Mat2> {
        Ok(self.inner.derivative(p))
    }
}

/// A normalized invariant density `κ/K` for weighting space averages.
///
/// `κ` is the unnormalized density and `K = ∫ κ d Leb` its total mass, so
/// [`InvariantDensity::weight`] integrates to one.
pub struct InvariantDensity<'a> {
    kappa: Box<dyn Fn(TorusPoint) -> f64 + Sync + Send + 'a>,
    normalizer: f64,
}

impl<'a> InvariantDensity<'a> {
    /// Lebesgue measure itself: `κ ≡ 1`, `K = 1`.
    pub fn lebesgue() -> InvariantDensity<'static> {
        InvariantDensity { kappa: Box::new(|_| 1.0), normalizer: 1.0 }
    }

    /// Wraps an unnormalized density with its total mass.
    pub fn new(
        kappa: impl Fn(TorusPoint) -> f64 + Sync + Send + 'a,
        normalizer: f64,
    ) -> Result<InvariantDensity<'a>> {
        if !(normalizer > 0.0 && normalizer.is_finite()) {
            return Err(Error::domain(format!(
                "density normalizer K = {normalizer} must be positive and finite"
            )));
        }
        Ok(InvariantDensity { kappa: Box::new(kappa), normalizer })
    }

    /// The invariant density of a slow-down member: the reciprocal stretch
    /// profile on the core disk, `1` elsewhere, with the member's own mass
    /// normalizer.
    pub fn for_slowdown(map: &SlowdownMap) -> InvariantDensity<'_> {
        InvariantDensity {
            kappa: Box::new(move |p| map.kappa(p)),
            normalizer: map.normalizer(),
        }
    }

    /// Normalized weight `κ(p)/K` at a point.
    pub fn weight(&self, p: TorusPoint) -> f64 {
        (self.kappa)(p) / self.normalizer
    }
}

/// Angular tolerance for recovering unstable directions at quadrature nodes.
/// Direction errors enter the integrand to second order, so σ radians here
/// is far below the quadrature's own discretization error.
const DIRECTION_TOL: f64 = 1e-9;

/// Expanding Lyapunov exponent as a space average: midpoint quadrature of
/// `log‖DF|_{E^u(p)}‖ · κ(p)/K` on a `grid_n × grid_n` grid, the unstable
/// direction at each node from [`crate::cones::unstable_direction`].
///
/// `std_error` reports the absolute difference against the half-resolution
/// grid — a discretization-spread proxy, not a statistical error.
/// `n_samples` is the number of cells, `n_iters` the grid resolution.
///
/// # Errors
///
/// [`Error::ParamDomain`] unless `grid_n` is even and `≥ 4` (the half grid
/// must nest); propagates direction-recovery failures.
pub fn quadrature_exponent<M: TorusMap + ?Sized>(
    map: &M,
    density: &InvariantDensity<'_>,
    grid_n: usize,
) -> Result<ExponentEstimate> {
    if grid_n < 4 || grid_n % 2 != 0 {
        return Err(Error::domain(format!(
            "grid_n = {grid_n} must be even and >= 4 so the refinement check can halve it"
        )));
    }
    let fine = quadrature_pass(map, density, grid_n)?;
    let coarse = quadrature_pass(map, density, grid_n / 2)?;
    ExponentEstimate {
        value: fine,
        std_error: (fine - coarse).abs(),
        n_samples: grid_n * grid_n,
        n_iters: grid_n,
        method: EstimatorMethod::Quadrature,
    }
    .validated()
}

/// One midpoint-rule pass at a fixed resolution.
fn quadrature_pass<M: TorusMap + ?Sized>(
    map: &M,
    density: &InvariantDensity<'_>,
    n: usize,
) -> Result<f64> {
    let cells: Vec<Result<f64>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let p = cell_center(idx, n);
            let e_u = crate::cones::unstable_direction(map, p, DIRECTION_TOL)?;
            let stretch = map.derivative(p).apply(e_u).norm();
            if !(stretch > 0.0 && stretch.is_finite()) {
                return Err(Error::non_finite("unstable stretch at quadrature node"));
            }
            Ok(stretch.ln() * density.weight(p))
        })
        .collect();
    // Fixed-order reduction, as everywhere in this module.
    let mut sum = 0.0;
    for c in cells {
        sum += c?;
    }
    Ok(sum / (n * n) as f64)
}

/// Center of flat-indexed cell `idx` on an `n × n` midpoint grid.
fn cell_center(idx: usize, n: usize) -> TorusPoint {
    let (i, j) = (idx / n, idx % n);
    TorusPoint::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64)
}
