//! Exact tracing of the invariant manifolds through the origin.
//!
//! The origin is a fixed point of every member of the banded family (the
//! shear profile vanishes at `x = 0`), and its unstable/stable manifolds are
//! piecewise-straight curves: images of eigenline seeds under a
//! piecewise-affine map. A leaf is represented as a polyline with vertices
//! in `Q(√D)`, in plane lift coordinates, anchored at the origin.
//!
//! Growing a leaf one step means applying the map (unstable) or its inverse
//! (stable) to the polyline: each segment is split exactly where the branch
//! functional crosses the breakpoint grid `ℤ + {m, m+l-δ, m+l}`, after which
//! every piece lies in a single affine branch and maps to the segment
//! between its endpoint images. Point evaluation is branch-consistent even
//! exactly on a threshold because the profile is continuous, so no separate
//! branch bookkeeping is needed — only the split insertion.
//!
//! Seeds must clear the shear strip modulo 1 (`κ < m` and `κ < 1 - m - l`
//! for x-halfwidth `κ`): on the cleared seed all backward (unstable) or
//! forward (stable) iterates act linearly and contract toward the origin,
//! which is exactly the condition for the seed to lie in the true invariant
//! manifold.

use super::exact_map::ExactTwistSpec;
use super::surd::{orient, Surd, SurdPoint};
use crate::error::{Error, Result};
use crate::torus::Vec2;
use num::bigint::BigInt;
use num::rational::{BigRational, Rational64};
use num::ToPrimitive;
use std::cmp::Ordering;

/// Which invariant manifold a polyline approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldFlavor {
    /// Expanding leaf, grown by forward images.
    Unstable,
    /// Contracting leaf, grown by backward images.
    Stable,
}

impl ManifoldFlavor {
    pub(crate) fn label(self) -> &'static str {
        match self {
            ManifoldFlavor::Unstable => "unstable",
            ManifoldFlavor::Stable => "stable",
        }
    }
}

/// Exact leaf polyline in lift coordinates.
#[derive(Debug, Clone)]
pub(crate) struct ExactPolyline {
    pub vertices: Vec<SurdPoint>,
}

impl ExactPolyline {
    pub(crate) fn segments(&self) -> impl Iterator<Item = (&SurdPoint, &SurdPoint)> {
        self.vertices.iter().zip(self.vertices.iter().skip(1))
    }

    pub(crate) fn arclength(&self, disc: i64) -> f64 {
        self.segments()
            .map(|(p, q)| {
                let (px, py) = p.to_f64(disc);
                let (qx, qy) = q.to_f64(disc);
                ((qx - px).powi(2) + (qy - py).powi(2)).sqrt()
            })
            .sum()
    }

    /// Exact membership test: does the point lie on some segment?
    pub(crate) fn contains_point(&self, pt: &SurdPoint, disc: i64) -> bool {
        self.segments().any(|(p, q)| on_segment(p, q, pt, disc))
    }
}

/// Exact point-on-closed-segment predicate.
pub(crate) fn on_segment(p: &SurdPoint, q: &SurdPoint, r: &SurdPoint, disc: i64) -> bool {
    if orient(p, q, r, disc) != 0 {
        return false;
    }
    within(&p.x, &q.x, &r.x, disc) && within(&p.y, &q.y, &r.y, disc)
}

fn within(a: &Surd, b: &Surd, v: &Surd, disc: i64) -> bool {
    let (lo, hi) = match a.cmp(b, disc) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    };
    lo.cmp(v, disc) != Ordering::Greater && v.cmp(hi, disc) != Ordering::Greater
}

/// A traced leaf in plain floating-point form: ordered lift vertices
/// anchored at the origin, tangent everywhere to the appropriate invariant
/// cone.
#[derive(Debug, Clone)]
pub struct ManifoldPolyline {
    /// Which manifold.
    pub flavor: ManifoldFlavor,
    /// Number of map applications the seed received.
    pub depth: usize,
    /// Lift-coordinate vertices (the leaf is read modulo `ℤ²`).
    pub vertices: Vec<Vec2>,
    /// Total length of the polyline.
    pub arclength: f64,
}

/// Controls for leaf tracing.
#[derive(Debug, Clone)]
pub struct TraceOptions {
    /// Hard cap on polyline vertices; exceeding it is a
    /// [`Error::BudgetExceeded`].
    pub max_vertices: usize,
    /// Seed x-halfwidth; `None` picks `min(m, 1-m-l)/2`. Must clear the
    /// strip modulo 1: `κ < m` and `κ < 1 - m - l`.
    pub seed_halfwidth: Option<Rational64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_vertices: 200_000, seed_halfwidth: None }
    }
}

/// Traces a leaf until its arclength reaches `min_arclength`.
pub fn trace_manifold(
    spec: &ExactTwistSpec,
    flavor: ManifoldFlavor,
    min_arclength: f64,
    options: &TraceOptions,
) -> Result<ManifoldPolyline> {
    if !(min_arclength > 0.0) || !min_arclength.is_finite() {
        return Err(Error::domain("min_arclength must be positive and finite"));
    }
    let disc = spec.disc();
    let mut poly = seed_polyline(spec, flavor, options)?;
    let mut depth = 0usize;
    while poly.arclength(disc) < min_arclength {
        poly = advance(spec, &poly, flavor, options.max_vertices)?;
        depth += 1;
    }
    let vertices: Vec<Vec2> = poly
        .vertices
        .iter()
        .map(|v| {
            let (x, y) = v.to_f64(disc);
            Vec2::new(x, y)
        })
        .collect();
    let arclength = poly.arclength(disc);
    Ok(ManifoldPolyline { flavor, depth, vertices, arclength })
}

/// Builds the eigenline seed `[-κ v±, 0, +κ v±]` with `v± = (1, σ±)`.
pub(crate) fn seed_polyline(
    spec: &ExactTwistSpec,
    flavor: ManifoldFlavor,
    options: &TraceOptions,
) -> Result<ExactPolyline> {
    let kappa = seed_halfwidth(spec, options)?;
    let slope = match flavor {
        ManifoldFlavor::Unstable => spec.sigma_plus(),
        ManifoldFlavor::Stable => spec.sigma_minus(),
    };
    let kappa_s = Surd::from_rational(kappa);
    let disc = spec.disc();
    let tip = SurdPoint::new(kappa_s.clone(), slope.mul(&kappa_s, disc));
    Ok(ExactPolyline {
        vertices: vec![
            SurdPoint::new(tip.x.neg(), tip.y.neg()),
            SurdPoint::origin(),
            tip,
        ],
    })
}

fn seed_halfwidth(spec: &ExactTwistSpec, options: &TraceOptions) -> Result<BigRational> {
    let clearance = spec.m().clone().min(
        BigRational::from(BigInt::from(1)) - spec.m() - spec.l(),
    );
    let kappa = match options.seed_halfwidth {
        Some(r) => BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
        None => clearance.clone() / BigRational::from(BigInt::from(2)),
    };
    if kappa <= BigRational::from(BigInt::from(0)) || kappa >= clearance {
        return Err(Error::domain(format!(
            "seed halfwidth must lie strictly between 0 and the strip clearance {clearance}"
        )));
    }
    Ok(kappa)
}

/// One growth step: the exact image (or preimage) of the polyline, split at
/// every branch boundary.
pub(crate) fn advance(
    spec: &ExactTwistSpec,
    poly: &ExactPolyline,
    flavor: ManifoldFlavor,
    max_vertices: usize,
) -> Result<ExactPolyline> {
    let disc = spec.disc();
    let functional = |p: &SurdPoint| match flavor {
        ManifoldFlavor::Unstable => spec.forward_functional(p),
        ManifoldFlavor::Stable => spec.backward_functional(p),
    };
    let image = |p: &SurdPoint| match flavor {
        ManifoldFlavor::Unstable => spec.forward_point(p),
        ManifoldFlavor::Stable => spec.backward_point(p),
    };

    let values: Vec<Surd> = poly.vertices.iter().map(|v| functional(v)).collect();
    let mut out: Vec<SurdPoint> = Vec::with_capacity(poly.vertices.len() * 2);
    for (k, (p, q)) in poly.segments().enumerate() {
        if out.is_empty() {
            out.push(image(p));
        }
        for t in branch_split_params(spec, &values[k], &values[k + 1])? {
            let delta = q.sub(p);
            let split = p.add(&delta.scale(&t, disc));
            push_vertex(&mut out, image(&split));
        }
        push_vertex(&mut out, image(q));
        if out.len() > max_vertices {
            return Err(Error::BudgetExceeded {
                context: "manifold polyline vertices".into(),
                used: out.len(),
                budget: max_vertices,
            });
        }
    }
    Ok(ExactPolyline { vertices: out })
}

fn push_vertex(out: &mut Vec<SurdPoint>, v: SurdPoint) {
    if out.last() != Some(&v) {
        out.push(v);
    }
}

/// Exact parameters `t ∈ (0, 1)` where the affine functional (value `lp` at
/// `t = 0`, `lq` at `t = 1`) crosses the breakpoint grid, in traversal
/// order.
fn branch_split_params(spec: &ExactTwistSpec, lp: &Surd, lq: &Surd) -> Result<Vec<Surd>> {
    let disc = spec.disc();
    let span = lq.sub(lp);
    if span.is_zero() {
        return Ok(Vec::new());
    }
    let (lo, hi) = if span.is_positive(disc) {
        (lp.clone(), lq.clone())
    } else {
        (lq.clone(), lp.clone())
    };
    let k_lo = lo
        .floor(disc)
        .to_i64()
        .ok_or_else(|| Error::domain("lift coordinate out of integer range"))?;
    let k_hi = hi
        .floor(disc)
        .to_i64()
        .ok_or_else(|| Error::domain("lift coordinate out of integer range"))?;
    let breakpoints = spec.breakpoints();
    let mut params: Vec<Surd> = Vec::new();
    for k in k_lo..=k_hi + 1 {
        for offset in &breakpoints {
            let tau = Surd::from_rational(offset + BigRational::from(BigInt::from(k)));
            if tau.cmp(&lo, disc) == Ordering::Greater && tau.cmp(&hi, disc) == Ordering::Less {
                params.push(tau.sub(lp).div(&span, disc));
            }
        }
    }
    params.sort_by(|a, b| a.cmp(b, disc));
    params.dedup();
    Ok(params)
}

/// Traces a leaf to a fixed depth (number of map applications).
pub(crate) fn trace_to_depth(
    spec: &ExactTwistSpec,
    flavor: ManifoldFlavor,
    depth: usize,
    options: &TraceOptions,
) -> Result<ExactPolyline> {
    let mut poly = seed_polyline(spec, flavor, options)?;
    for _ in 0..depth {
        poly = advance(spec, &poly, flavor, options.max_vertices)?;
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::twist_cones;
    use crate::matrix::HyperbolicMatrix;

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

    fn opts() -> TraceOptions {
        TraceOptions::default()
    }

    #[test]
    fn linear_leaves_stay_exactly_on_the_eigenline() {
        let spec = linear();
        let disc = spec.disc();
        for (flavor, slope) in [
            (ManifoldFlavor::Unstable, spec.sigma_plus()),
            (ManifoldFlavor::Stable, spec.sigma_minus()),
        ] {
            let poly = trace_to_depth(&spec, flavor, 4, &opts()).unwrap();
            let dir = SurdPoint::new(Surd::from_int(1), slope.clone());
            for v in &poly.vertices {
                // v × dir = 0 exactly: collinear with the eigenline.
                assert!(super::super::surd::cross(v, &dir, disc).is_zero());
            }
        }
    }

    #[test]
    fn origin_stays_a_vertex_at_every_depth() {
        let spec = banded();
        for flavor in [ManifoldFlavor::Unstable, ManifoldFlavor::Stable] {
            let mut poly = seed_polyline(&spec, flavor, &opts()).unwrap();
            for _ in 0..5 {
                assert!(poly.vertices.contains(&SurdPoint::origin()));
                poly = advance(&spec, &poly, flavor, 200_000).unwrap();
            }
        }
    }

    #[test]
    fn segment_directions_stay_strictly_inside_the_cones() {
        let spec = banded();
        let disc = spec.disc();
        let beta = super::super::surd::rational_to_f64(spec.beta());
        let cones = twist_cones(spec.matrix(), beta).unwrap();
        for (flavor, cone) in [
            (ManifoldFlavor::Unstable, &cones.expanding),
            (ManifoldFlavor::Stable, &cones.contracting),
        ] {
            let poly = trace_to_depth(&spec, flavor, 5, &opts()).unwrap();
            for (p, q) in poly.segments() {
                let (px, py) = p.to_f64(disc);
                let (qx, qy) = q.to_f64(disc);
                let margin = cone.interior_margin(Vec2::new(qx - px, qy - py));
                assert!(
                    margin > 1e-9,
                    "{} segment direction ({}, {}) has margin {margin}",
                    flavor.label(),
                    qx - px,
                    qy - py
                );
            }
        }
    }

    #[test]
    fn leaves_are_nested_and_map_consistent() {
        let spec = banded();
        let disc = spec.disc();
        for flavor in [ManifoldFlavor::Unstable, ManifoldFlavor::Stable] {
            let shallow = trace_to_depth(&spec, flavor, 3, &opts()).unwrap();
            let deep = advance(&spec, &shallow, flavor, 200_000).unwrap();
            // Nesting: the shallow leaf is a subset of the deep one.
            for v in &shallow.vertices {
                assert!(deep.contains_point(v, disc), "{} leaf not nested", flavor.label());
            }
            // Push-forward consistency, both directions.
            for v in &shallow.vertices {
                let img = match flavor {
                    ManifoldFlavor::Unstable => spec.forward_point(v),
                    ManifoldFlavor::Stable => spec.backward_point(v),
                };
                assert!(deep.contains_point(&img, disc));
            }
            for v in &deep.vertices {
                let pre = match flavor {
                    ManifoldFlavor::Unstable => spec.backward_point(v),
                    ManifoldFlavor::Stable => spec.forward_point(v),
                };
                assert!(shallow.contains_point(&pre, disc));
            }
        }
    }

    #[test]
    fn vertex_budget_is_enforced() {
        let spec = banded();
        let tight = TraceOptions { max_vertices: 10, ..TraceOptions::default() };
        let err = trace_to_depth(&spec, ManifoldFlavor::Unstable, 6, &tight).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }), "got {err:?}");
    }

    #[test]
    fn arclength_target_is_reached() {
        let spec = banded();
        let leaf = trace_manifold(&spec, ManifoldFlavor::Unstable, 12.0, &opts()).unwrap();
        assert!(leaf.arclength >= 12.0);
        assert!(leaf.depth >= 2);
        assert!(leaf.vertices.len() >= 4);
    }

    #[test]
    fn seed_halfwidth_must_clear_the_strip() {
        let spec = banded();
        // Clearance is min(m, 1 - m - l) = min(3/8, 3/8) = 3/8.
        let too_wide = TraceOptions {
            seed_halfwidth: Some(r(3, 8)),
            ..TraceOptions::default()
        };
        assert!(seed_polyline(&spec, ManifoldFlavor::Unstable, &too_wide).is_err());
        let fits = TraceOptions {
            seed_halfwidth: Some(r(1, 4)),
            ..TraceOptions::default()
        };
        assert!(seed_polyline(&spec, ManifoldFlavor::Unstable, &fits).is_ok());
    }

    #[test]
    fn growth_rate_matches_the_expansion_factor() {
        // Unstable arclength multiplies by ≈ μ⁺ per step once the leaf is
        // long; the banded map distorts this only boundedly.
        let spec = linear();
        let disc = spec.disc();
        let l4 = trace_to_depth(&spec, ManifoldFlavor::Unstable, 4, &opts()).unwrap();
        let l5 = trace_to_depth(&spec, ManifoldFlavor::Unstable, 5, &opts()).unwrap();
        let ratio = l5.arclength(disc) / l4.arclength(disc);
        let mu = spec.mu_plus().to_f64(disc);
        assert!((ratio - mu).abs() < 1e-9, "ratio {ratio} vs mu {mu}");
    }
}
