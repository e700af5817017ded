//! Adaptive Runge–Kutta integration (Dormand–Prince 5(4), FSAL).
//!
//! The slow-down family needs three small autonomous systems: the planar
//! flow itself, the flow with its 2×2 variational matrix (6 components), and
//! the flow with a tangent-slope Riccati equation (3 components). One
//! dimension-generic embedded pair with PI-free step control covers all of
//! them; tolerances come in a *tight* profile for certification work and a
//! *cruise* profile for long measurement runs.

use crate::error::{Error, Result};

/// Tolerances and step-control limits for an integration run.
#[derive(Debug, Clone, Copy)]
pub struct OdeSettings {
    /// Absolute tolerance per component.
    pub atol: f64,
    /// Relative tolerance per component.
    pub rtol: f64,
    /// First trial step size (positive; direction is inferred).
    pub h_init: f64,
    /// Largest allowed step size.
    pub h_max: f64,
    /// Accepted-plus-rejected step budget before giving up.
    pub max_steps: usize,
}

impl OdeSettings {
    /// Certification-grade tolerances.
    pub fn tight() -> Self {
        OdeSettings { atol: 1e-12, rtol: 1e-10, h_init: 1e-2, h_max: 0.25, max_steps: 1_000_000 }
    }

    /// Measurement-grade tolerances for long orbit averages.
    pub fn cruise() -> Self {
        OdeSettings { atol: 1e-10, rtol: 1e-8, h_init: 1e-2, h_max: 0.25, max_steps: 1_000_000 }
    }
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings::tight()
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    /// Keep integrating.
    Continue,
    /// Stop after this step; the integrator returns the current state.
    Stop,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights equal the last tableau row (FSAL); the embedded
// fourth-order weights below include the seventh stage.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and
/// returns the final state.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    settings: &OdeSettings,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    integrate_with_observer(f, t0, t1, y0, settings, |_, _, _, _| StepControl::Continue)
        .map(|(_, y)| y)
}

/// Integrates with a per-step observer called as
/// `observer(t_prev, y_prev, t_new, y_new)` after every accepted step.
/// Returning [`StepControl::Stop`] halts integration; the function returns
/// the time and state reached (`(t1, y(t1))` when run to completion).
pub fn integrate_with_observer<const N: usize, F, O>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    settings: &OdeSettings,
    mut observer: O,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N], f64, &[f64; N]) -> StepControl,
{
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("ODE initial state"));
    }
    if t0 == t1 {
        return Ok((t0, y0));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = settings.h_init.abs().min(settings.h_max).min(span).max(1e-300);
    let mut k1 = f(t, &y);
    let mut steps = 0usize;

    while (t - t1).abs() > 0.0 {
        if steps >= settings.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                detail: format!("step budget {} exhausted", settings.max_steps),
            });
        }
        steps += 1;
        let remaining = (t1 - t).abs();
        let h_eff = h.min(remaining);
        let hs = dir * h_eff;

        // Stage evaluations (k1 carried over — first-same-as-last).
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[s + 1] = f(t + hs * C[s], &ys);
        }

        // Fifth-order solution (row 6 of the tableau) and embedded error.
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = A[5][j];
            if b != 0.0 {
                for i in 0..N {
                    y_new[i] += hs * b * kj[i];
                }
            }
        }
        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                let db = (if j < 6 { A[5][j] } else { 0.0 }) - B4[j];
                e += db * kj[i];
            }
            e *= hs;
            let scale = settings.atol + settings.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / N as f64).sqrt();

        if !y_new.iter().all(|v| v.is_finite()) || !err.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                detail: "non-finite state or error estimate".into(),
            });
        }

        if err <= 1.0 {
            let t_new = if h_eff >= remaining { t1 } else { t + hs };
            let stop = observer(t, &y, t_new, &y_new) == StepControl::Stop;
            t = t_new;
            y = y_new;
            k1 = k[6]; // FSAL
            if stop {
                return Ok((t, y));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h_eff * factor).min(settings.h_max);
        } else {
            // Reject: shrink and retry from the same state.
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
            h = h_eff * factor;
            if h < 1e-14 * span.max(1.0) {
                return Err(Error::IntegrationFailure {
                    t,
                    detail: format!("step size underflow (h = {h:.3e})"),
                });
            }
        }
    }
    Ok((t, y))
}

/// Locates a zero crossing of `event` along the flow between a bracketing
/// accepted step, by bisection on the integration time. `(ta, ya)` must
/// give `event(ya) ≤ 0 < event(yb)` at `tb` (or with roles swapped); returns
/// the crossing time and state to absolute time tolerance `t_tol`.
pub fn bisect_event<const N: usize, F, E>(
    f: F,
    ta: f64,
    ya: [f64; N],
    tb: f64,
    event: E,
    t_tol: f64,
    settings: &OdeSettings,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + Copy,
    E: Fn(&[f64; N]) -> f64,
{
    let mut lo = ta;
    let mut y_lo = ya;
    let mut hi = tb;
    let sign_lo = event(&y_lo) <= 0.0;
    for _ in 0..200 {
        if (hi - lo).abs() <= t_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = integrate(f, lo, mid, y_lo, settings)?;
        if (event(&y_mid) <= 0.0) == sign_lo {
            lo = mid;
            y_lo = y_mid;
        } else {
            hi = mid;
        }
    }
    let y_hi = integrate(f, lo, hi, y_lo, settings)?;
    Ok((hi, y_hi))
}
