//! Periodic-orbit machinery: exact enumeration for the linear model, Newton
//! continuation along deformation paths, exponents of the measure of maximal
//! entropy, and the pressure function.
//!
//! Period-`n` points of a hyperbolic automorphism solve `(Aⁿ − I) x ∈ Z²`,
//! a pure lattice problem: there are exactly `|det(Aⁿ − I)| = |trace(Aⁿ) − 2|`
//! solutions in the unit square and [`enumerate_linear_periodic_points`]
//! lists them in exact integer arithmetic. Deformed family members are
//! handled by [`continue_periodic_points`], which tracks every point through
//! a path of maps with Newton's method on `Fⁿ(x) − x`; topological
//! conjugacy to the automorphism keeps the count invariant, which the
//! continuation verifies rather than assumes.
//!
//! The measure of maximal entropy equidistributes over period-`n` points, so
//! averaging the per-period log-expansions and extrapolating in `n` gives
//! its exponent ([`mme_exponent`]); weighting the same data by powers of the
//! expansion gives the pressure function ([`pressure`], [`pressure_curve`]),
//! whose slopes at `t = 0` and `t = 1` recover the entropy-maximizing and
//! the physical exponents independently of the direct estimators.

use crate::error::{Error, Result};
use crate::exponents::{EstimatorMethod, ExponentEstimate};
use crate::map::{derivative_along_orbit, TorusMap};
use crate::matrix::HyperbolicMatrix;
use crate::torus::{TorusPoint, Vec2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard cap on the number of periodic points any enumeration may produce.
pub const MAX_PERIODIC_POINTS: usize = 1_000_000;

/// A complete set of period-`n` points with their unstable expansions.
///
/// `expansions[i]` is `log‖D Fⁿ|_{E^u}‖` at `points[i]` — the log of the
/// dominant eigenvalue of the period-`n` derivative cocycle, which is exact
/// at a periodic point because the unstable line is that eigenvalue's
/// eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitSet {
    /// The period `n`.
    pub period: usize,
    /// All period-`n` points in `[0, 1)²`.
    pub points: Vec<TorusPoint>,
    /// Per-point `log‖D Fⁿ|_{E^u}‖`, aligned with `points`.
    pub expansions: Vec<f64>,
    /// The topologically required count `|trace(Aⁿ) − 2|`.
    pub count_expected: usize,
}

impl PeriodicOrbitSet {
    /// Whether the set holds every point the topology demands.
    pub fn is_complete(&self) -> bool {
        self.points.len() == self.count_expected
            && self.expansions.len() == self.count_expected
    }

    /// Errors with [`Error::IncompleteSet`] unless the set is complete.
    pub fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteSet {
                period: self.period,
                found: self.points.len().min(self.expansions.len()),
                expected: self.count_expected,
            })
        }
    }

    /// Mean log-expansion per iteration step,
    /// `(1/(n·N)) Σ_p log‖D Fⁿ|_{E^u(p)}‖` — the period-`n` estimate of the
    /// exponent of the measure of maximal entropy.
    pub fn mean_exponent(&self) -> Result<f64> {
        self.require_complete()?;
        let total: f64 = self.expansions.iter().sum();
        Ok(total / (self.period as f64 * self.points.len() as f64))
    }

    /// Largest residual `dist(Fⁿ(p), p)` over the set — a direct check that
    /// the points are still periodic for `map`.
    pub fn max_residual<M: TorusMap + ?Sized>(&self, map: &M) -> f64 {
        self.points
            .iter()
            .map(|&p| crate::map::iterate(map, p, self.period).dist(p))
            .fold(0.0, f64::max)
    }

    /// Smallest pairwise distance between points (infinite for fewer than
    /// two points).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, &p) in self.points.iter().enumerate() {
            for &q in &self.points[i + 1..] {
                best = best.min(p.dist(q));
            }
        }
        best
    }
}

/// All period-`n` points of the automorphism, in exact integer arithmetic.
///
/// Solves `(Aⁿ − I) x ∈ Z²`: with `M = Aⁿ − I`, the solutions mod `Z²` are
/// `x = M⁻¹ k` for `k` ranging over the quotient `Z²/M Z²`. A column
/// Hermite form `H = M·U` (unimodular `U`) makes that quotient explicit —
/// representatives `(r, s)` with `0 ≤ r < |h₁₁|`, `0 ≤ s < |h₂₂|` — and the
/// adjugate turns each into a rational point with denominator `det M`, so
/// the defining equation holds exactly, not just to rounding.
///
/// Every expansion is `n·Λ`: the cocycle is `Aⁿ` at every point.
///
/// # Errors
///
/// [`Error::TooManyPoints`] when `|trace(Aⁿ) − 2|` reaches
/// [`MAX_PERIODIC_POINTS`]; [`Error::ParamDomain`] for `n = 0` or an entry
/// overflow before the cap is even computable.
pub fn enumerate_linear_periodic_points(
    matrix: &HyperbolicMatrix,
    n: usize,
) -> Result<PeriodicOrbitSet> {
    if n == 0 {
        return Err(Error::domain("period n = 0 is not a period"));
    }
    let power = int_power(matrix, n)?;
    let trace = power[0][0] + power[1][1];
    // det(Aⁿ) = 1 makes det(Aⁿ − I) = 2 − trace(Aⁿ), and powers of a
    // hyperbolic matrix with positive trace keep trace > 2.
    let count = (trace - 2).unsigned_abs() as usize;
    if count >= MAX_PERIODIC_POINTS {
        return Err(Error::TooManyPoints {
            context: format!("period-{n} points of the automorphism"),
            count,
            cap: MAX_PERIODIC_POINTS,
        });
    }
    let m = [
        [power[0][0] - 1, power[0][1]],
        [power[1][0], power[1][1] - 1],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    debug_assert_eq!(det, 2 - trace);
    let q = det.unsigned_abs() as i128;
    let det_sign: i128 = if det >= 0 { 1 } else { -1 };

    // Column Hermite form: U = [[x, -m01/g], [y, m00/g]] with
    // g = x·m00 + y·m01 zeroes the top-right entry of H = M·U, so
    // H = [[g, 0], [*, det/g]] and the box below enumerates Z²/MZ².
    let (g, _, _) = extended_gcd(m[0][0], m[0][1]);
    let h11 = g.unsigned_abs() as i128;
    let h22 = q / h11;

    let mut points = Vec::with_capacity(count);
    for r in 0..h11 {
        for s in 0..h22 {
            // x = adj(M)·(r, s) / det, folded into [0, 1)².
            let num0 = m[1][1] * r - m[0][1] * s;
            let num1 = -m[1][0] * r + m[0][0] * s;
            let n0 = (num0 * det_sign).rem_euclid(q);
            let n1 = (num1 * det_sign).rem_euclid(q);
            // Exact residual: M·(n0, n1) ≡ 0 (mod q) by construction.
            debug_assert_eq!((m[0][0] * n0 + m[0][1] * n1).rem_euclid(q), 0);
            debug_assert_eq!((m[1][0] * n0 + m[1][1] * n1).rem_euclid(q), 0);
            points.push(TorusPoint::new(n0 as f64 / q as f64, n1 as f64 / q as f64));
        }
    }
    debug_assert_eq!(points.len(), count);
    let expansion = n as f64 * matrix.expansion_rate();
    Ok(PeriodicOrbitSet {
        period: n,
        expansions: vec![expansion; points.len()],
        points,
        count_expected: count,
    })
}

/// `Aⁿ` in checked 128-bit integer arithmetic.
fn int_power(matrix: &HyperbolicMatrix, n: usize) -> Result<[[i128; 2]; 2]> {
    let base = [
        [matrix.a() as i128, matrix.b() as i128],
        [matrix.c() as i128, matrix.d() as i128],
    ];
    let mut acc = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        acc = int_mul(acc, base).ok_or_else(|| {
            Error::domain(format!("entries of the matrix power A^{n} overflow 128 bits"))
        })?;
    }
    Ok(acc)
}

fn int_mul(a: [[i128; 2]; 2], b: [[i128; 2]; 2]) -> Option<[[i128; 2]; 2]> {
    let mut out = [[0i128; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0]
                .checked_mul(b[0][j])?
                .checked_add(a[i][1].checked_mul(b[1][j])?)?;
        }
    }
    Some(out)
}

/// `gcd(a, b) = x·a + y·b` with `gcd > 0` (standard extended Euclid).
fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        let s = if a >= 0 { 1 } else { -1 };
        return (a * s, s, 0);
    }
    let (g, x, y) = extended_gcd(b, a.rem_euclid(b));
    (g, y, x - (a.div_euclid(b)) * y)
}

/// Newton iteration cap per orbit per continuation step.
const NEWTON_MAX_ITERS: usize = 40;
/// Convergence target for the worst per-segment shooting residual. The
/// full-period residual checked afterwards is at most the segment residual
/// summed with expansion weights `~ e^{Λn}/(e^Λ − 1)`, so `1e-14` here keeps
/// the `1e-10` postcondition satisfied through period 10.
const NEWTON_TOL: f64 = 1e-14;
/// Segment residuals below this that have stopped contracting are accepted
/// as converged: they sit at the evaluation noise floor of the map itself
/// (e.g. an integrator tolerance) and no Newton step can push them lower.
const NEWTON_NOISE_FLOOR: f64 = 1e-12;
/// A Newton update moving any orbit point farther than this means the
/// iterate is leaving the basin of its own orbit — treat as divergence
/// rather than risk landing on a neighbor.
const NEWTON_TRUST_RADIUS: f64 = 0.2;
/// Required final residual over the whole continued set.
const RESIDUAL_TOL: f64 = 1e-10;
/// Required pairwise separation of the continued set.
const SEPARATION_TOL: f64 = 1e-6;

/// Continues a complete periodic-point set along a deformation path.
///
/// `path(τ)` must produce the map at parameter `τ ∈ (0, 1]`, with `start` a
/// complete set for `start_map`, the map at `τ = 0` (typically
/// [`enumerate_linear_periodic_points`] output together with the
/// automorphism when the path starts there). The parameter is ramped in
/// `steps` equal increments; at each one every point is corrected by a
/// multiple-shooting Newton iteration on its whole orbit (see
/// [`correct_orbit`]). Expansions are recomputed at `τ = 1` from the
/// dominant cocycle eigenvalue.
///
/// The state carried between increments is the full orbit tuple
/// `(x, f(x), …, f^{n−1}(x))` of each point, seeded under `start_map`.
/// Seeding each increment from the previous converged tuple keeps every
/// initial segment residual `O(Δτ)`: re-iterating from the base point
/// instead would amplify its offset by the expansion factor `~ e^{Λn}` and
/// wrap mod `Z²`, which is exactly the failure mode multiple shooting
/// exists to avoid.
///
/// The count is preserved point-by-point; the final set is validated to
/// residuals below `1e-10` and pairwise separation above `1e-6`.
///
/// # Errors
///
/// [`Error::ContinuationLoss`] when Newton fails to converge, steps outside
/// its trust region, hits a singular or non-hyperbolic cocycle, or two
/// continued points collide. Raising `steps` shrinks the per-step parameter
/// jump and usually recovers the orbit.
pub fn continue_periodic_points<S: TorusMap + ?Sized>(
    start: &PeriodicOrbitSet,
    start_map: &S,
    path: impl Fn(f64) -> Result<Box<dyn TorusMap>>,
    steps: usize,
) -> Result<PeriodicOrbitSet> {
    start.require_complete()?;
    if steps == 0 {
        return Err(Error::domain("continuation needs steps >= 1"));
    }
    let n = start.period;
    if n == 0 {
        return Err(Error::domain("continuation needs period >= 1"));
    }
    let mut orbits: Vec<Vec<TorusPoint>> = start
        .points
        .par_iter()
        .map(|&p| crate::map::orbit(start_map, p, n - 1))
        .collect();
    let mut last_map: Option<Box<dyn TorusMap>> = None;
    for step in 1..=steps {
        let tau = step as f64 / steps as f64;
        let map = path(tau)?;
        let outcomes: Vec<Result<()>> = orbits
            .par_iter_mut()
            .map(|orbit| correct_orbit(&*map, orbit))
            .collect();
        for (idx, r) in outcomes.into_iter().enumerate() {
            if let Err(e) = r {
                return Err(Error::ContinuationLoss {
                    step,
                    detail: format!(
                        "point {idx} at ({:.6}, {:.6}), tau = {tau}: {e}",
                        start.points[idx].x(),
                        start.points[idx].y()
                    ),
                });
            }
        }
        last_map = Some(map);
    }
    let map = last_map.expect("steps >= 1 always builds a map");

    let points: Vec<TorusPoint> = orbits.iter().map(|orbit| orbit[0]).collect();
    let expansions: Vec<Result<f64>> = points
        .par_iter()
        .map(|&p| cocycle_expansion(&*map, p, n))
        .collect();
    let mut out_exp = Vec::with_capacity(points.len());
    for (idx, r) in expansions.into_iter().enumerate() {
        match r {
            Ok(e) => out_exp.push(e),
            Err(e) => {
                return Err(Error::ContinuationLoss {
                    step: steps,
                    detail: format!("expansion at continued point {idx}: {e}"),
                });
            }
        }
    }

    let result = PeriodicOrbitSet {
        period: n,
        points,
        expansions: out_exp,
        count_expected: start.count_expected,
    };
    let residual = result.max_residual(&*map);
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::ContinuationLoss {
            step: steps,
            detail: format!("final residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"),
        });
    }
    let separation = result.min_pairwise_distance();
    if !(separation > SEPARATION_TOL) {
        return Err(Error::ContinuationLoss {
            step: steps,
            detail: format!(
                "two continued points collided (min distance {separation:.3e} <= \
                 {SEPARATION_TOL:.0e}); the path likely left the Anosov regime"
            ),
        });
    }
    Ok(result)
}

/// Multiple-shooting Newton step for one periodic orbit.
///
/// Solves `f(x_k) − x_{k+1} ≡ 0 (mod Z²)` for all `n` orbit points at once
/// (indices cyclic), updating `orbit` in place. Shooting segment-by-segment
/// is essential: the single-point formulation `fⁿ(x) − x` amplifies both
/// the residual and the Jacobian conditioning by the expansion factor
/// `~ e^{Λn}`, so its Newton basin shrinks exponentially with the period
/// and the wrapped residual aliases once the drift exceeds half a lattice
/// cell. Per-segment residuals stay `O(‖orbit error‖)` uniformly in `n`,
/// and the cyclic block system below is uniformly invertible on hyperbolic
/// orbits (its kernel would be an eigenvector 1 of the period cocycle).
///
/// The linearization is `Df(x_k) δ_k − δ_{k+1} = −r_k`, a `2n × 2n` system
/// solved densely; periods are small enough that this is cheaper than
/// anything clever.
fn correct_orbit<M: TorusMap + ?Sized>(map: &M, orbit: &mut [TorusPoint]) -> Result<()> {
    let n = orbit.len();
    let dim = 2 * n;
    let mut residual = f64::INFINITY;
    let mut previous = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITERS {
        let mut system = vec![0.0; dim * dim];
        let mut rhs = vec![0.0; dim];
        residual = 0.0;
        for k in 0..n {
            let (fx, df) = map.apply_with_derivative(orbit[k]);
            let r = orbit[(k + 1) % n].displacement_to(fx);
            residual = residual.max(r.norm());
            let row = 2 * k;
            let col = 2 * k;
            let next = 2 * ((k + 1) % n);
            // `+=` rather than `=`: at period 1 the derivative block and the
            // −I block share the same columns.
            system[row * dim + col] += df.a;
            system[row * dim + col + 1] += df.b;
            system[(row + 1) * dim + col] += df.c;
            system[(row + 1) * dim + col + 1] += df.d;
            system[row * dim + next] -= 1.0;
            system[(row + 1) * dim + next + 1] -= 1.0;
            rhs[row] = -r.x;
            rhs[row + 1] = -r.y;
        }
        let stalled_at_noise = residual < NEWTON_NOISE_FLOOR && residual > 0.25 * previous;
        if residual < NEWTON_TOL || stalled_at_noise {
            return Ok(());
        }
        previous = residual;
        solve_dense(&mut system, &mut rhs, dim).ok_or_else(|| Error::NotInvertibleAt {
            x: orbit[0].x(),
            y: orbit[0].y(),
            detail: "singular shooting system: the period cocycle has eigenvalue 1".into(),
        })?;
        let mut worst_step = 0.0f64;
        for value in &rhs {
            if !value.is_finite() {
                return Err(Error::non_finite("Newton update"));
            }
        }
        for k in 0..n {
            worst_step = worst_step.max(Vec2::new(rhs[2 * k], rhs[2 * k + 1]).norm());
        }
        if worst_step > NEWTON_TRUST_RADIUS {
            return Err(Error::NoConvergence {
                context: format!(
                    "Newton step {worst_step:.3e} left the trust region {NEWTON_TRUST_RADIUS}"
                ),
                residual,
                iterations: NEWTON_MAX_ITERS,
            });
        }
        for k in 0..n {
            orbit[k] = orbit[k].translate(Vec2::new(rhs[2 * k], rhs[2 * k + 1]));
        }
    }
    Err(Error::NoConvergence {
        context: "periodic-orbit shooting iteration".into(),
        residual,
        iterations: NEWTON_MAX_ITERS,
    })
}

/// In-place Gaussian elimination with partial pivoting: overwrites `rhs`
/// with the solution of `system · x = rhs` (row-major `dim × dim`).
/// Returns `None` on a vanishing pivot; near-singular systems instead
/// surface as enormous solutions that the caller's trust region rejects.
fn solve_dense(system: &mut [f64], rhs: &mut [f64], dim: usize) -> Option<()> {
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&a, &b| {
                system[a * dim + col]
                    .abs()
                    .total_cmp(&system[b * dim + col].abs())
            })
            .expect("non-empty pivot range");
        if system[pivot_row * dim + col].abs() < 1e-30 {
            return None;
        }
        if pivot_row != col {
            for j in col..dim {
                system.swap(col * dim + j, pivot_row * dim + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = system[col * dim + col];
        for row in (col + 1)..dim {
            let factor = system[row * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            system[row * dim + col] = 0.0;
            for j in (col + 1)..dim {
                system[row * dim + j] -= factor * system[col * dim + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for col in (0..dim).rev() {
        let mut value = rhs[col];
        for j in (col + 1)..dim {
            value -= system[col * dim + j] * rhs[j];
        }
        rhs[col] = value / system[col * dim + col];
    }
    Some(())
}

/// `log‖D Fⁿ|_{E^u}‖` at a periodic point: the log of the dominant
/// eigenvalue of the period-`n` cocycle. Exact at periodic points — the
/// unstable line is the dominant eigenvector — so no power iteration.
fn cocycle_expansion<M: TorusMap + ?Sized>(map: &M, p: TorusPoint, n: usize) -> Result<f64> {
    let (_, cocycle) = derivative_along_orbit(map, p, n);
    let tr = cocycle.trace();
    let disc = tr * tr - 4.0 * cocycle.det();
    if !(disc > 0.0) {
        return Err(Error::domain(format!(
            "period-{n} cocycle at ({:.6}, {:.6}) has complex eigenvalues \
             (trace {tr:.6}, discriminant {disc:.3e}); the map is not hyperbolic there",
            p.x(),
            p.y()
        )));
    }
    let dominant = 0.5 * (tr.abs() + disc.sqrt());
    if !(dominant > 1.0) {
        return Err(Error::domain(format!(
            "dominant cocycle eigenvalue {dominant:.6} at ({:.6}, {:.6}) does not expand",
            p.x(),
            p.y()
        )));
    }
    Ok(dominant.ln())
}

/// Exponent of the measure of maximal entropy from two consecutive periods.
///
/// The period-`n` average [`PeriodicOrbitSet::mean_exponent`] carries an
/// `O(1/n)` equidistribution bias, so the affine extrapolation
/// `(n+1)·v_{n+1} − n·v_n` cancels it; the spread `|v_{n+1} − v_n|` is
/// reported as the uncertainty.
///
/// # Errors
///
/// [`Error::IncompleteSet`] for incomplete inputs; [`Error::ParamDomain`]
/// unless the periods are consecutive.
pub fn mme_exponent(
    lo: &PeriodicOrbitSet,
    hi: &PeriodicOrbitSet,
) -> Result<ExponentEstimate> {
    if hi.period != lo.period + 1 {
        return Err(Error::domain(format!(
            "extrapolation needs consecutive periods, got {} and {}",
            lo.period, hi.period
        )));
    }
    let v_lo = lo.mean_exponent()?;
    let v_hi = hi.mean_exponent()?;
    let n = lo.period as f64;
    ExponentEstimate {
        value: (n + 1.0) * v_hi - n * v_lo,
        std_error: (v_hi - v_lo).abs(),
        n_samples: lo.points.len() + hi.points.len(),
        n_iters: hi.period,
        method: EstimatorMethod::Periodic,
    }
    .validated()
}

/// Sampled pressure curve of the unstable log-stretch potential family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    /// Potential weights `t` where the curve is sampled, strictly
    /// increasing.
    pub t_grid: Vec<f64>,
    /// `P_n(t)` per grid node.
    pub p_values: Vec<f64>,
    /// The period `n` the samples were computed from.
    pub period: usize,
}

impl PressureCurve {
    /// Smallest slope increase between consecutive chords. Convexity of the
    /// true pressure makes this nonnegative up to sampling error, on any
    /// (not necessarily uniform) grid.
    pub fn min_slope_increase(&self) -> f64 {
        let slopes: Vec<f64> = self
            .t_grid
            .windows(2)
            .zip(self.p_values.windows(2))
            .map(|(t, p)| (p[1] - p[0]) / (t[1] - t[0]))
            .collect();
        slopes.windows(2).map(|s| s[1] - s[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Finite-period pressure
/// `P_n(t) = (1/n) log Σ_p ‖D Fⁿ|_{E^u(p)}‖^{−t}`
/// over a complete period-`n` set, evaluated in log-sum-exp form.
///
/// `P_n(0)` is the log point count over `n` (an entropy estimate);
/// `P_n(1) ≈ 0` for area-preserving maps; minus the slope at `0` and `1`
/// estimates the entropy-maximizing and the physical exponent respectively.
pub fn pressure(orbits: &PeriodicOrbitSet, t: f64) -> Result<f64> {
    orbits.require_complete()?;
    if !t.is_finite() {
        return Err(Error::non_finite("pressure weight t"));
    }
    let shift = orbits
        .expansions
        .iter()
        .map(|e| -t * e)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = orbits.expansions.iter().map(|e| (-t * e - shift).exp()).sum();
    Ok((shift + sum.ln()) / orbits.period as f64)
}

/// Samples [`pressure`] on a grid.
///
/// # Errors
///
/// [`Error::ParamDomain`] unless the grid has at least two strictly
/// increasing finite nodes; [`Error::IncompleteSet`] from [`pressure`].
pub fn pressure_curve(orbits: &PeriodicOrbitSet, t_grid: &[f64]) -> Result<PressureCurve> {
    if t_grid.len() < 2 {
        return Err(Error::domain(format!(
            "pressure grid needs at least 2 nodes, got {}",
            t_grid.len()
        )));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("pressure grid must be strictly increasing"));
    }
    let p_values = t_grid
        .iter()
        .map(|&t| pressure(orbits, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PressureCurve {
        t_grid: t_grid.to_vec(),
        p_values,
        period: orbits.period,
    })
}

/// Central-difference slope of the pressure at `t`.
pub fn pressure_slope(orbits: &PeriodicOrbitSet, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("slope step h = {h} must be positive")));
    }
    Ok((pressure(orbits, t + h)? - pressure(orbits, t - h)?) / (2.0 * h))
}

/// An exponent read off the pressure curve: `−dP/dt` at `t`, with the
/// half-step slope difference as the uncertainty. At `t = 0` this estimates
/// the exponent of the measure of maximal entropy, at `t = 1` the exponent
/// of the physical measure.
pub fn exponent_from_pressure_slope(
    orbits: &PeriodicOrbitSet,
    t: f64,
    h: f64,
) -> Result<ExponentEstimate> {
    let full = pressure_slope(orbits, t, h)?;
    let half = pressure_slope(orbits, t, h / 2.0)?;
    ExponentEstimate {
        value: -half,
        std_error: (full - half).abs(),
        n_samples: orbits.points.len(),
        n_iters: orbits.period,
        method: EstimatorMethod::PressureDerivative,
    }
    .validated()
}
