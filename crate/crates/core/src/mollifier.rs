//! The standard compactly supported mollifier and the smoothed ramp derived
//! from it.
//!
//! The kernel is `θ(z) = N · exp(-1/(1-z²))` on `(-1, 1)`, zero outside, with
//! `N` chosen so that `∫θ = 1`. Scaling by a width `w` gives
//! `θ_w(x) = θ(x/w)/w` supported on `[-w, w]`.
//!
//! Convolving the ramp `relu(x) = max(x, 0)` with `θ_w` yields the smoothed
//! ramp used to mollify piecewise-linear circle maps:
//!
//! ```text
//! SR_w(x) = (relu ∗ θ_w)(x) = x·Θ(x/w) - w·M(x/w),
//! ```
//!
//! where `Θ` is the kernel's CDF and `M(z) = ∫_{-1}^z t θ(t) dt` its partial
//! first moment. `SR_w` equals 0 for `x ≤ -w`, equals `x` for `x ≥ w`, is
//! `C^∞`, and has derivative `Θ(x/w) ∈ [0, 1]`.
//!
//! `Θ` and `M` have no closed form; they are tabulated once on a fine grid
//! with exactly known endpoint derivatives and evaluated by cubic Hermite
//! interpolation (error far below 1e-12, verified in tests).

use crate::quadrature::GaussLegendre;
use std::sync::OnceLock;

/// `∫_{-1}^{1} exp(-1/(1-z²)) dz`, the mass of the unnormalized kernel.
///
/// Frozen reference value; the test suite re-derives it by quadrature.
pub const KERNEL_MASS: f64 = 0.443_993_816_168_079_55;

/// Unnormalized kernel `exp(-1/(1-z²))` on `(-1,1)`, zero outside.
#[inline]
fn kernel_raw(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (-1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

/// The normalized mollifier `θ(z) = exp(-1/(1-z²)) / N` with unit mass.
#[inline]
pub fn kernel(z: f64) -> f64 {
    kernel_raw(z) / KERNEL_MASS
}

const TABLE_LEN: usize = 4097; // 4096 intervals on [-1, 1]

struct KernelTables {
    /// CDF `Θ(z_i)` at uniform nodes on [-1, 1].
    cdf: Vec<f64>,
    /// Partial first moment `M(z_i) = ∫_{-1}^{z_i} t θ(t) dt`.
    moment: Vec<f64>,
}

fn tables() -> &'static KernelTables {
    static TABLES: OnceLock<KernelTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = TABLE_LEN;
        let h = 2.0 / (n - 1) as f64;
        let rule = GaussLegendre::with_points(16);
        let mut cdf = vec![0.0; n];
        let mut moment = vec![0.0; n];
        for i in 1..n {
            let a = -1.0 + (i - 1) as f64 * h;
            let b = -1.0 + i as f64 * h;
            cdf[i] = cdf[i - 1] + rule.integrate(a, b, kernel);
            moment[i] = moment[i - 1] + rule.integrate(a, b, |t| t * kernel(t));
        }
        // The kernel has unit mass and zero mean by symmetry; pin the
        // accumulated endpoints exactly so the clamped branches agree.
        let total = cdf[n - 1];
        for v in &mut cdf {
            *v /= total;
        }
        moment[n - 1] = 0.0;
        KernelTables { cdf, moment }
    })
}

/// Cubic Hermite evaluation on the uniform table with exact derivatives.
#[inline]
fn hermite_eval(values: &[f64], deriv: impl Fn(f64) -> f64, z: f64) -> f64 {
    let n = values.len();
    let h = 2.0 / (n - 1) as f64;
    let pos = (z + 1.0) / h;
    let i = (pos.floor() as usize).min(n - 2);
    let t = pos - i as f64;
    let z0 = -1.0 + i as f64 * h;
    let z1 = z0 + h;
    let (v0, v1) = (values[i], values[i + 1]);
    let (d0, d1) = (deriv(z0) * h, deriv(z1) * h);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * v0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * v1
        + (t3 - t2) * d1
}

/// CDF `Θ(z) = ∫_{-1}^{z} θ`, clamped to 0 and 1 outside `[-1, 1]`.
pub fn kernel_cdf(z: f64) -> f64 {
    if z <= -1.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        hermite_eval(&tables().cdf, kernel, z).clamp(0.0, 1.0)
    }
}

/// Partial first moment `M(z) = ∫_{-1}^{z} t θ(t) dt`; zero outside `[-1,1]`.
pub fn kernel_first_moment(z: f64) -> f64 {
    if !(-1.0..1.0).contains(&z) {
        0.0
    } else {
        hermite_eval(&tables().moment, |t| t * kernel(t), z)
    }
}

/// Smoothed ramp `SR_w(x) = (relu ∗ θ_w)(x)`.
///
/// For `w = 0` this is the plain ramp `max(x, 0)`.
#[inline]
pub fn smoothed_ramp(x: f64, w: f64) -> f64 {
    if w == 0.0 {
        return x.max(0.0);
    }
    if x <= -w {
        0.0
    } else if x >= w {
        x
    } else {
        let z = x / w;
        x * kernel_cdf(z) - w * kernel_first_moment(z)
    }
}

/// Derivative of the smoothed ramp: `Θ(x/w) ∈ [0, 1]`.
///
/// For `w = 0` this is the step function (value `0` for `x < 0`, `1` for
/// `x ≥ 0`, matching the right-continuous convention of the plain ramp).
#[inline]
pub fn smoothed_ramp_deriv(x: f64, w: f64) -> f64 {
    if w == 0.0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    kernel_cdf(x / w)
}

/// Second derivative of the smoothed ramp: `θ_w(x) = θ(x/w)/w` (for `w > 0`).
#[inline]
pub fn smoothed_ramp_second_deriv(x: f64, w: f64) -> f64 {
    debug_assert!(w > 0.0, "second derivative needs positive width");
    kernel(x / w) / w
}
