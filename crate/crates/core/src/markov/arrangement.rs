//! Exact planar subdivision of the unit torus by two transversal leaf
//! polylines.
//!
//! The unstable and stable leaves are cut into in-square pieces (splitting
//! exactly at integer coordinate lines), intersected pairwise with exact
//! predicates in `Q(√D)`, and assembled into a half-edge structure whose
//! `next`-orbits are the faces. Every numeric decision — crossing
//! detection, angular order around a vertex, point location, areas — is an
//! exact field computation; floating point appears only in bucket indices
//! and bounding boxes, always widened by a safety margin so it can only
//! admit extra candidates, never drop one.
//!
//! Faces are reported with exact areas (via the shoelace formula on a
//! coherent lift of the face boundary, which exists precisely when the
//! boundary displacement sums to zero — the disk test), boundary-run
//! counts (a rectangle has exactly four maximal runs: unstable, stable,
//! unstable, stable), and side lengths. Dangling leaf ends (antenna edges
//! with the same face on both sides) are stripped from the reported
//! boundary but remain part of the skeleton for location queries.
//!
//! Topological conventions: same-flavor polylines never cross (leaves are
//! injective), opposite flavors never share a direction (transversality);
//! both are checked exactly and violations surface as errors rather than
//! silent misclassification. Leaf directions are never axis-parallel —
//! their slopes are Möbius images of the quadratic eigen-slope under
//! rational maps, hence irrational — which the construction relies on for
//! vertical-ray location.

use super::surd::{cross, orient, Surd, SurdPoint};
use super::trace::{on_segment, ExactPolyline, ManifoldFlavor};
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use std::cmp::Ordering;
use std::collections::HashMap;

/// Widening applied to every floating bounding box before bucketing, so
/// rounding can only add candidates.
const BUCKET_MARGIN: f64 = 1e-8;

/// Hard cap on how many unit squares an interior-sample ray may traverse
/// before the construction is declared degenerate.
const SAMPLE_RAY_SQUARES: usize = 32;

/// One straight leaf piece inside the unit square.
#[derive(Debug, Clone)]
pub(crate) struct ProjectedSegment {
    /// In-square endpoints (coordinates in `[0, 1]`).
    pub a: SurdPoint,
    pub b: SurdPoint,
    /// Direction of the parent traced segment, positively parallel to
    /// `b - a`; shared by all pieces of one traced segment.
    pub dir: SurdPoint,
    pub flavor: ManifoldFlavor,
}

/// Cuts a lift polyline at integer coordinate lines and translates each
/// piece into the unit square.
pub(crate) fn project_polyline(
    poly: &ExactPolyline,
    flavor: ManifoldFlavor,
    disc: i64,
) -> Result<Vec<ProjectedSegment>> {
    let mut out = Vec::new();
    let half = Surd::from_rational(BigRational::new(BigInt::from(1), BigInt::from(2)));
    for (p, q) in poly.segments() {
        let e = q.sub(p);
        let mut params: Vec<Surd> = Vec::new();
        integer_crossing_params(&p.x, &q.x, disc, &mut params)?;
        integer_crossing_params(&p.y, &q.y, disc, &mut params)?;
        params.sort_by(|a, b| a.cmp(b, disc));
        params.dedup();
        let mut stops = Vec::with_capacity(params.len() + 2);
        stops.push(Surd::zero());
        stops.extend(params);
        stops.push(Surd::from_int(1));
        let points: Vec<SurdPoint> =
            stops.iter().map(|t| p.add(&e.scale(t, disc))).collect();
        for w in points.windows(2) {
            let (p0, p1) = (&w[0], &w[1]);
            if p0 == p1 {
                continue;
            }
            let mid = p0.add(p1).scale(&half, disc);
            let kx = BigRational::from(mid.x.floor(disc));
            let ky = BigRational::from(mid.y.floor(disc));
            out.push(ProjectedSegment {
                a: SurdPoint::new(p0.x.shift(&-kx.clone()), p0.y.shift(&-ky.clone())),
                b: SurdPoint::new(p1.x.shift(&-kx), p1.y.shift(&-ky)),
                dir: e.clone(),
                flavor,
            });
        }
    }
    Ok(out)
}

/// Appends the exact parameters in `(0, 1)` where the affine coordinate
/// (value `a0` at 0, `a1` at 1) crosses an integer.
fn integer_crossing_params(a0: &Surd, a1: &Surd, disc: i64, out: &mut Vec<Surd>) -> Result<()> {
    let span = a1.sub(a0);
    if span.is_zero() {
        return Ok(());
    }
    let (lo, hi) = if span.is_positive(disc) { (a0, a1) } else { (a1, a0) };
    let k_lo = floor_i64(lo, disc)?;
    let k_hi = floor_i64(hi, disc)?;
    for k in k_lo..=k_hi + 1 {
        let tau = Surd::from_int(k);
        if tau.cmp(lo, disc) == Ordering::Greater && tau.cmp(hi, disc) == Ordering::Less {
            out.push(tau.sub(a0).div(&span, disc));
        }
    }
    Ok(())
}

fn floor_i64(s: &Surd, disc: i64) -> Result<i64> {
    s.floor(disc)
        .to_i64()
        .ok_or_else(|| Error::domain("lift coordinate exceeds the integer range"))
}

/// Edge of the subdivision: a straight in-square segment between two
/// canonical vertices.
#[derive(Debug, Clone)]
pub(crate) struct EdgeRec {
    /// Canonical vertex ids of the endpoints (`a`, then `b`).
    pub v: [u32; 2],
    /// In-square endpoint coordinates (these keep seam geometry that the
    /// canonical vertex representatives lose).
    pub a: SurdPoint,
    pub b: SurdPoint,
    /// Parent traced direction, positively parallel to `b - a`.
    pub dir: SurdPoint,
    pub flavor: ManifoldFlavor,
}

impl EdgeRec {
    /// Exact lift displacement from `a` to `b`.
    pub(crate) fn evec(&self) -> SurdPoint {
        self.b.sub(&self.a)
    }
}

/// A face of the subdivision.
#[derive(Debug, Clone)]
pub(crate) struct FaceRec {
    /// Boundary half-edges after antenna stripping, in `next`-order
    /// (face on the left, counterclockwise for disks).
    pub cycle: Vec<u32>,
    /// Whether the boundary walk closes in the plane lift (disk test).
    pub is_disk: bool,
    /// Exact area, present for disks.
    pub area: Option<Surd>,
    /// Coherently lifted boundary vertices (tails of `cycle`), for disks.
    pub lifted: Vec<SurdPoint>,
    /// Number of maximal same-flavor boundary runs (4 for a rectangle).
    pub runs: usize,
    /// Longest unstable boundary run (floating length).
    pub du: f64,
    /// Longest stable boundary run (floating length).
    pub ds: f64,
}

/// Structural summary used to decide whether a subdivision is a closed
/// rectangle partition.
#[derive(Debug, Clone)]
pub(crate) struct ClosureReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_ok: bool,
    pub all_disks: bool,
    pub all_rectangles: bool,
    pub area_sum_one: bool,
    pub min_area: f64,
    pub max_du: f64,
    pub max_ds: f64,
}

impl ClosureReport {
    pub(crate) fn closed(&self) -> bool {
        self.euler_ok
            && self.all_disks
            && self.all_rectangles
            && self.area_sum_one
            && self.faces >= 2
    }

    pub(crate) fn failure(&self) -> String {
        if !self.euler_ok {
            format!(
                "V - E + F = {} - {} + {} differs from the torus characteristic 0",
                self.vertices, self.edges, self.faces
            )
        } else if !self.all_disks {
            "a face wraps around the torus (nonzero boundary displacement)".into()
        } else if !self.all_rectangles {
            "a face has more or fewer than four boundary runs".into()
        } else if !self.area_sum_one {
            "face areas do not sum exactly to 1".into()
        } else if self.faces < 2 {
            format!("only {} face(s)", self.faces)
        } else {
            "closed".into()
        }
    }
}

/// Vertex-degree counts, for combinatorial census checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct DegreeCensus {
    pub deg1: usize,
    pub deg2: usize,
    pub deg4: usize,
    pub other: usize,
}

/// Exact subdivision of the torus by the projected leaf segments.
#[derive(Debug)]
pub(crate) struct Arrangement {
    pub disc: i64,
    pub verts: Vec<SurdPoint>,
    pub edges: Vec<EdgeRec>,
    /// `next` pointer per half-edge (`h = 2e + orientation`).
    half_next: Vec<u32>,
    /// Face id per half-edge.
    half_face: Vec<u32>,
    pub faces: Vec<FaceRec>,
    /// Count of proper (interior-interior) leaf crossings.
    pub crossings: usize,
    /// Outgoing half-edges per vertex, angularly sorted (for degrees).
    outgoing: Vec<Vec<u32>>,
    /// Edge ids bucketed by x-strips for location queries.
    x_buckets: Vec<Vec<u32>>,
}

fn halfedge_tail(edges: &[EdgeRec], h: u32) -> u32 {
    edges[(h >> 1) as usize].v[(h & 1) as usize]
}

fn halfedge_head(edges: &[EdgeRec], h: u32) -> u32 {
    edges[(h >> 1) as usize].v[1 - (h & 1) as usize]
}

fn halfedge_dir(edges: &[EdgeRec], h: u32) -> SurdPoint {
    let d = &edges[(h >> 1) as usize].dir;
    if h & 1 == 0 {
        d.clone()
    } else {
        SurdPoint::new(d.x.neg(), d.y.neg())
    }
}

fn halfedge_evec(edges: &[EdgeRec], h: u32) -> SurdPoint {
    let e = edges[(h >> 1) as usize].evec();
    if h & 1 == 0 {
        e
    } else {
        SurdPoint::new(e.x.neg(), e.y.neg())
    }
}

/// In-square coordinates of the tail of a half-edge.
fn halfedge_tail_point(edges: &[EdgeRec], h: u32) -> SurdPoint {
    let e = &edges[(h >> 1) as usize];
    if h & 1 == 0 {
        e.a.clone()
    } else {
        e.b.clone()
    }
}

/// Strict angular order of nonzero directions, counterclockwise from the
/// positive x-axis: upper half-plane first (including the positive x-axis),
/// then lower; within a half-plane by exact cross-product sign.
fn angular_cmp(u: &SurdPoint, v: &SurdPoint, disc: i64) -> Ordering {
    let lower = |w: &SurdPoint| -> bool {
        match w.y.sign(disc) {
            -1 => true,
            1 => false,
            _ => w.x.sign(disc) < 0,
        }
    };
    match lower(u).cmp(&lower(v)) {
        Ordering::Equal => match cross(u, v, disc).sign(disc) {
            1 => Ordering::Less,
            -1 => Ordering::Greater,
            _ => Ordering::Equal,
        },
        o => o,
    }
}

impl Arrangement {
    /// Builds the subdivision. `vertex_cap` bounds vertices and edges;
    /// exceeding it is a [`Error::BudgetExceeded`].
    pub(crate) fn build(
        segments: &[ProjectedSegment],
        disc: i64,
        vertex_cap: usize,
    ) -> Result<Arrangement> {
        let u_ids: Vec<usize> = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.flavor == ManifoldFlavor::Unstable)
            .map(|(i, _)| i)
            .collect();
        let s_ids: Vec<usize> = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.flavor == ManifoldFlavor::Stable)
            .map(|(i, _)| i)
            .collect();
        if u_ids.is_empty() || s_ids.is_empty() {
            return Err(Error::domain("both leaf flavors must contribute segments"));
        }

        // --- crossing detection, bucketed by floating bounding boxes ---
        let grid = ((u_ids.len() + s_ids.len()) as f64).sqrt().ceil() as usize;
        let grid = grid.clamp(4, 256);
        let bbox = |s: &ProjectedSegment| -> (f64, f64, f64, f64) {
            let (ax, ay) = s.a.to_f64(disc);
            let (bx, by) = s.b.to_f64(disc);
            (
                ax.min(bx) - BUCKET_MARGIN,
                ax.max(bx) + BUCKET_MARGIN,
                ay.min(by) - BUCKET_MARGIN,
                ay.max(by) + BUCKET_MARGIN,
            )
        };
        let cell_of = |x: f64| -> usize { ((x * grid as f64) as isize).clamp(0, grid as isize - 1) as usize };
        let mut grid_cells: Vec<Vec<u32>> = vec![Vec::new(); grid * grid];
        for (slot, &i) in u_ids.iter().enumerate() {
            let (x0, x1, y0, y1) = bbox(&segments[i]);
            for gx in cell_of(x0)..=cell_of(x1) {
                for gy in cell_of(y0)..=cell_of(y1) {
                    grid_cells[gx * grid + gy].push(slot as u32);
                }
            }
        }

        let mut splits: Vec<Vec<(Surd, SurdPoint)>> = vec![Vec::new(); segments.len()];
        let mut crossings = 0usize;
        let mut stamp = vec![0u32; u_ids.len()];
        let mut stamp_gen = 0u32;
        for &si in &s_ids {
            stamp_gen += 1;
            let s = &segments[si];
            let (x0, x1, y0, y1) = bbox(s);
            for gx in cell_of(x0)..=cell_of(x1) {
                for gy in cell_of(y0)..=cell_of(y1) {
                    for &slot in &grid_cells[gx * grid + gy] {
                        if stamp[slot as usize] == stamp_gen {
                            continue;
                        }
                        stamp[slot as usize] = stamp_gen;
                        let ui = u_ids[slot as usize];
                        let u = &segments[ui];
                        intersect_pair(u, s, ui, si, disc, &mut splits, &mut crossings)?;
                    }
                }
            }
        }

        // --- split segments into edges, dedupe vertices canonically ---
        let mut verts: Vec<SurdPoint> = Vec::new();
        let mut vert_ids: HashMap<SurdPoint, u32> = HashMap::new();
        let mut intern = |p: &SurdPoint, verts: &mut Vec<SurdPoint>| -> u32 {
            let c = canonical(p, disc);
            if let Some(&id) = vert_ids.get(&c) {
                return id;
            }
            let id = verts.len() as u32;
            vert_ids.insert(c.clone(), id);
            verts.push(c);
            id
        };
        let mut edges: Vec<EdgeRec> = Vec::new();
        for (i, seg) in segments.iter().enumerate() {
            let mut events = std::mem::take(&mut splits[i]);
            events.sort_by(|a, b| a.0.cmp(&b.0, disc));
            events.dedup_by(|a, b| a.0 == b.0);
            let mut chain: Vec<SurdPoint> = Vec::with_capacity(events.len() + 2);
            chain.push(seg.a.clone());
            chain.extend(events.into_iter().map(|(_, p)| p));
            chain.push(seg.b.clone());
            for w in chain.windows(2) {
                if w[0] == w[1] {
                    continue;
                }
                let va = intern(&w[0], &mut verts);
                let vb = intern(&w[1], &mut verts);
                edges.push(EdgeRec {
                    v: [va, vb],
                    a: w[0].clone(),
                    b: w[1].clone(),
                    dir: seg.dir.clone(),
                    flavor: seg.flavor,
                });
            }
            if verts.len() + edges.len() > vertex_cap {
                return Err(Error::BudgetExceeded {
                    context: "arrangement vertices and edges".into(),
                    used: verts.len() + edges.len(),
                    budget: vertex_cap,
                });
            }
        }

        // --- half-edge structure: angular sort, next pointers ---
        let mut outgoing: Vec<Vec<u32>> = vec![Vec::new(); verts.len()];
        for (e, rec) in edges.iter().enumerate() {
            outgoing[rec.v[0] as usize].push(2 * e as u32);
            outgoing[rec.v[1] as usize].push(2 * e as u32 + 1);
        }
        let mut pos = vec![0u32; 2 * edges.len()];
        for list in outgoing.iter_mut() {
            list.sort_by(|&h1, &h2| {
                angular_cmp(&halfedge_dir(&edges, h1), &halfedge_dir(&edges, h2), disc)
            });
            for (i, &h) in list.iter().enumerate() {
                pos[h as usize] = i as u32;
            }
        }
        let mut half_next = vec![0u32; 2 * edges.len()];
        for h in 0..2 * edges.len() as u32 {
            let w = halfedge_head(&edges, h) as usize;
            let list = &outgoing[w];
            let i = pos[(h ^ 1) as usize] as usize;
            half_next[h as usize] = list[(i + list.len() - 1) % list.len()];
        }

        // --- faces: next-orbits ---
        let mut half_face = vec![u32::MAX; 2 * edges.len()];
        let mut faces: Vec<FaceRec> = Vec::new();
        for h0 in 0..2 * edges.len() as u32 {
            if half_face[h0 as usize] != u32::MAX {
                continue;
            }
            let fid = faces.len() as u32;
            let mut cycle = Vec::new();
            let mut h = h0;
            loop {
                half_face[h as usize] = fid;
                cycle.push(h);
                h = half_next[h as usize];
                if h == h0 {
                    break;
                }
                if cycle.len() > 2 * edges.len() {
                    return Err(Error::DegenerateCell {
                        detail: "face walk failed to close".into(),
                    });
                }
            }
            faces.push(process_face(&edges, cycle, disc)?);
        }

        // --- x-strip buckets for location queries ---
        let nb = ((edges.len() as f64).sqrt().ceil() as usize).clamp(8, 1024);
        let mut x_buckets: Vec<Vec<u32>> = vec![Vec::new(); nb];
        for (e, rec) in edges.iter().enumerate() {
            let ax = rec.a.x.to_f64(disc);
            let bx = rec.b.x.to_f64(disc);
            let lo = ((ax.min(bx) - BUCKET_MARGIN) * nb as f64) as isize;
            let hi = ((ax.max(bx) + BUCKET_MARGIN) * nb as f64) as isize;
            for i in lo.clamp(0, nb as isize - 1)..=hi.clamp(0, nb as isize - 1) {
                x_buckets[i as usize].push(e as u32);
            }
        }

        Ok(Arrangement {
            disc,
            verts,
            edges,
            half_next,
            half_face,
            faces,
            crossings,
            outgoing,
            x_buckets,
        })
    }

    pub(crate) fn closure(&self) -> ClosureReport {
        let vertices = self.verts.len();
        let edges = self.edges.len();
        let nfaces = self.faces.len();
        let euler_ok = vertices as isize - edges as isize + nfaces as isize == 0;
        let all_disks = self.faces.iter().all(|f| f.is_disk);
        let all_rectangles = self.faces.iter().all(|f| f.runs == 4);
        let area_sum_one = all_disks && {
            let mut sum = Surd::zero();
            for f in &self.faces {
                match &f.area {
                    Some(a) => sum = sum.add(a),
                    None => return self.closure_fail_report(),
                }
            }
            sum == Surd::from_int(1)
        };
        let min_area = self
            .faces
            .iter()
            .filter_map(|f| f.area.as_ref())
            .map(|a| a.to_f64(self.disc))
            .fold(f64::INFINITY, f64::min);
        let max_du = self.faces.iter().map(|f| f.du).fold(0.0, f64::max);
        let max_ds = self.faces.iter().map(|f| f.ds).fold(0.0, f64::max);
        ClosureReport {
            vertices,
            edges,
            faces: nfaces,
            euler_ok,
            all_disks,
            all_rectangles,
            area_sum_one,
            min_area,
            max_du,
            max_ds,
        }
    }

    fn closure_fail_report(&self) -> ClosureReport {
        ClosureReport {
            vertices: self.verts.len(),
            edges: self.edges.len(),
            faces: self.faces.len(),
            euler_ok: false,
            all_disks: false,
            all_rectangles: false,
            area_sum_one: false,
            min_area: f64::NAN,
            max_du: f64::NAN,
            max_ds: f64::NAN,
        }
    }

    pub(crate) fn degree_census(&self) -> DegreeCensus {
        let mut c = DegreeCensus { deg1: 0, deg2: 0, deg4: 0, other: 0 };
        for list in &self.outgoing {
            match list.len() {
                1 => c.deg1 += 1,
                2 => c.deg2 += 1,
                4 => c.deg4 += 1,
                _ => c.other += 1,
            }
        }
        c
    }

    /// Face below the first skeleton crossing straight above `p` (with
    /// cyclic wrap through `y = 0`), which is the face containing `p`.
    /// `p` must be canonical (`[0,1)` coordinates) and off the skeleton.
    pub(crate) fn locate(&self, p: &SurdPoint) -> Result<usize> {
        let disc = self.disc;
        let px = p.x.to_f64(disc);
        let nb = self.x_buckets.len();
        let bucket = ((px * nb as f64) as isize).clamp(0, nb as isize - 1) as usize;
        // (y_at, normalized direction, edge) of the best candidate, for
        // candidates above p and anywhere (for the wrap case).
        let mut best_above: Option<(Surd, SurdPoint, u32)> = None;
        let mut best_any: Option<(Surd, SurdPoint, u32)> = None;
        for &e in &self.x_buckets[bucket] {
            let rec = &self.edges[e as usize];
            let (lo, hi) = if rec.a.x.cmp(&rec.b.x, disc) == Ordering::Less {
                (&rec.a, &rec.b)
            } else {
                (&rec.b, &rec.a)
            };
            // Half-open rule [lo.x, hi.x): symbolic perturbation x + ε.
            if lo.x.cmp(&p.x, disc) == Ordering::Greater
                || p.x.cmp(&hi.x, disc) != Ordering::Less
            {
                continue;
            }
            let run = hi.x.sub(&lo.x);
            let rise = hi.y.sub(&lo.y);
            let y_at = lo.y.add(&p.x.sub(&lo.x).mul(&rise.div(&run, disc), disc));
            // Direction normalized to positive x, for slope tie-breaks.
            let d = hi.sub(lo);
            if y_at.cmp(&p.y, disc) == Ordering::Equal {
                return Err(Error::DegenerateCell {
                    detail: "location query lies on the skeleton".into(),
                });
            }
            let entry = (y_at.clone(), d, e);
            if y_at.cmp(&p.y, disc) == Ordering::Greater {
                replace_if_lower(&mut best_above, entry.clone(), disc);
            }
            replace_if_lower(&mut best_any, entry, disc);
        }
        let (_, _, e) = best_above
            .or(best_any)
            .ok_or_else(|| Error::DegenerateCell {
                detail: "no skeleton on the vertical through the query point".into(),
            })?;
        // The face below the crossing: the half-edge running in the -x
        // direction has it on its left.
        let h = if self.edges[e as usize].evec().x.sign(disc) > 0 {
            2 * e + 1
        } else {
            2 * e
        };
        Ok(self.half_face[h as usize] as usize)
    }

    /// A point strictly inside the face, constructed exactly: from the
    /// midpoint of a boundary edge, march into the face along the left
    /// normal, and stop halfway to the first skeleton hit.
    pub(crate) fn face_sample(&self, face: usize) -> Result<SurdPoint> {
        let disc = self.disc;
        let f = &self.faces[face];
        if !f.is_disk || f.cycle.is_empty() {
            return Err(Error::DegenerateCell {
                detail: "interior sample requested for a non-disk face".into(),
            });
        }
        // Longest boundary edge gives the most comfortable launch pad.
        let h0 = *f
            .cycle
            .iter()
            .max_by(|&&h1, &&h2| {
                let n1 = evec_norm(&self.edges, h1, disc);
                let n2 = evec_norm(&self.edges, h2, disc);
                n1.total_cmp(&n2)
            })
            .expect("nonempty cycle");
        let rec = &self.edges[(h0 >> 1) as usize];
        let half = Surd::from_rational(BigRational::new(BigInt::from(1), BigInt::from(2)));
        let mid = rec.a.add(&rec.b).scale(&half, disc);
        let d = halfedge_dir(&self.edges, h0);
        let normal = SurdPoint::new(d.y.neg(), d.x.clone());

        // March square by square: within each square find the first exact
        // hit of `cur + t·normal` against bucketed candidate edges.
        let mut cur = mid.clone();
        let mut t_accum = Surd::zero();
        for leg in 0..SAMPLE_RAY_SQUARES {
            let t_exit = ray_square_exit(&cur, &normal, disc)?;
            // On the launch leg the only zero-parameter solution is the
            // launch point itself, which is not a hit; on later legs the
            // entry point may lie exactly on a seam vertex of the skeleton
            // and must count as the first hit.
            let min_t_sign = if leg == 0 { 1 } else { 0 };
            let mut t_hit: Option<Surd> = None;
            for e in self.ray_candidates(&cur, &normal, &t_exit) {
                let erec = &self.edges[e as usize];
                let evec = erec.evec();
                let denom = cross(&normal, &evec, disc);
                if denom.is_zero() {
                    continue; // parallel; collinear-through-mid is impossible
                }
                let offset = erec.a.sub(&cur);
                let t = cross(&offset, &evec, disc).div(&denom, disc);
                let s = cross(&offset, &normal, disc).div(&denom, disc);
                if t.sign(disc) < min_t_sign
                    || t.cmp(&t_exit, disc) == Ordering::Greater
                    || s.sign(disc) < 0
                    || s.cmp(&Surd::from_int(1), disc) == Ordering::Greater
                {
                    continue;
                }
                match &t_hit {
                    Some(best) if t.cmp(best, disc) != Ordering::Less => {}
                    _ => t_hit = Some(t),
                }
            }
            if let Some(t) = t_hit {
                let t_mid = t_accum.add(&t).mul(&half, disc);
                let lift = mid.add(&normal.scale(&t_mid, disc));
                let (x, _) = lift.x.reduce_mod_one(disc);
                let (y, _) = lift.y.reduce_mod_one(disc);
                return Ok(SurdPoint::new(x, y));
            }
            // No hit in this square: step to the wall and wrap.
            cur = cur.add(&normal.scale(&t_exit, disc));
            t_accum = t_accum.add(&t_exit);
            cur = wrap_onto_entry_wall(&cur, &normal, disc);
        }
        Err(Error::DegenerateCell {
            detail: "interior-sample ray crossed too many squares without a hit".into(),
        })
    }

    /// Candidate edges for a ray piece inside the current square.
    fn ray_candidates(&self, cur: &SurdPoint, normal: &SurdPoint, t_exit: &Surd) -> Vec<u32> {
        let disc = self.disc;
        let (cx, _) = cur.to_f64(disc);
        let step = normal.scale(t_exit, disc);
        let ex = cx + step.x.to_f64(disc);
        let nb = self.x_buckets.len();
        let lo = (((cx.min(ex) - BUCKET_MARGIN) * nb as f64) as isize).clamp(0, nb as isize - 1);
        let hi = (((cx.max(ex) + BUCKET_MARGIN) * nb as f64) as isize).clamp(0, nb as isize - 1);
        let mut out: Vec<u32> = Vec::new();
        for b in lo..=hi {
            out.extend_from_slice(&self.x_buckets[b as usize]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exact membership of a canonical point in the skeleton of one flavor.
    pub(crate) fn point_on_flavor(&self, p: &SurdPoint, flavor: ManifoldFlavor) -> bool {
        let disc = self.disc;
        let one = Surd::from_int(1);
        let mut xs = vec![p.x.clone()];
        if p.x.is_zero() {
            xs.push(one.clone());
        }
        let mut ys = vec![p.y.clone()];
        if p.y.is_zero() {
            ys.push(one);
        }
        for x in &xs {
            for y in &ys {
                let rep = SurdPoint::new(x.clone(), y.clone());
                let nb = self.x_buckets.len();
                let bucket =
                    ((x.to_f64(disc) * nb as f64) as isize).clamp(0, nb as isize - 1) as usize;
                for &e in &self.x_buckets[bucket] {
                    let rec = &self.edges[e as usize];
                    if rec.flavor == flavor && on_segment(&rec.a, &rec.b, &rep, disc) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Exact area sum over all disk faces.
    pub(crate) fn area_sum(&self) -> Surd {
        let mut sum = Surd::zero();
        for f in &self.faces {
            if let Some(a) = &f.area {
                sum = sum.add(a);
            }
        }
        sum
    }

    /// Flavor of an edge by id.
    pub(crate) fn edge_flavor(&self, e: u32) -> ManifoldFlavor {
        self.edges[(e >> 1) as usize].flavor
    }

    /// The face on the left of a half-edge.
    pub(crate) fn face_of_halfedge(&self, h: u32) -> usize {
        self.half_face[h as usize] as usize
    }
}

fn evec_norm(edges: &[EdgeRec], h: u32, disc: i64) -> f64 {
    let e = halfedge_evec(edges, h);
    let (x, y) = e.to_f64(disc);
    (x * x + y * y).sqrt()
}

fn replace_if_lower(
    best: &mut Option<(Surd, SurdPoint, u32)>,
    entry: (Surd, SurdPoint, u32),
    disc: i64,
) {
    match best {
        None => *best = Some(entry),
        Some((by, bd, _)) => match entry.0.cmp(by, disc) {
            Ordering::Less => *best = Some(entry),
            Ordering::Equal => {
                // Same crossing height: the ray x + ε meets the shallower
                // slope first. Directions are normalized to positive x, so
                // slope order is the cross-product sign.
                if cross(&entry.1, bd, disc).sign(disc) > 0 {
                    *best = Some(entry);
                }
            }
            Ordering::Greater => {}
        },
    }
}

/// Exact parameter at which `cur + t·dir` leaves the unit square.
fn ray_square_exit(cur: &SurdPoint, dir: &SurdPoint, disc: i64) -> Result<Surd> {
    let mut best: Option<Surd> = None;
    for (c, d) in [(&cur.x, &dir.x), (&cur.y, &dir.y)] {
        let t = match d.sign(disc) {
            1 => Surd::from_int(1).sub(c).div(d, disc),
            -1 => c.neg().div(d, disc),
            _ => continue,
        };
        best = Some(match best {
            None => t,
            Some(b) => {
                if t.cmp(&b, disc) == Ordering::Less {
                    t
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| Error::DegenerateCell { detail: "zero ray direction".into() })
}

/// After stepping onto a square wall, wraps the coordinate(s) on the wall
/// to the opposite side for continued marching.
fn wrap_onto_entry_wall(p: &SurdPoint, dir: &SurdPoint, disc: i64) -> SurdPoint {
    let one = Surd::from_int(1);
    let wrap_coord = |c: &Surd, d: &Surd| -> Surd {
        if d.sign(disc) > 0 && c.cmp(&one, disc) == Ordering::Equal {
            Surd::zero()
        } else if d.sign(disc) < 0 && c.is_zero() {
            one.clone()
        } else {
            c.clone()
        }
    };
    SurdPoint::new(wrap_coord(&p.x, &dir.x), wrap_coord(&p.y, &dir.y))
}

/// Canonical torus representative: coordinates in `[0, 1)` with exact
/// boundary wrap (inputs are already in `[0, 1]`).
fn canonical(p: &SurdPoint, disc: i64) -> SurdPoint {
    let one = Surd::from_int(1);
    let wrap = |c: &Surd| -> Surd {
        if c.cmp(&one, disc) == Ordering::Equal {
            Surd::zero()
        } else {
            c.clone()
        }
    };
    SurdPoint::new(wrap(&p.x), wrap(&p.y))
}

/// Exact intersection handling for one unstable/stable segment pair.
fn intersect_pair(
    u: &ProjectedSegment,
    s: &ProjectedSegment,
    ui: usize,
    si: usize,
    disc: i64,
    splits: &mut [Vec<(Surd, SurdPoint)>],
    crossings: &mut usize,
) -> Result<()> {
    let o1 = orient(&u.a, &u.b, &s.a, disc);
    let o2 = orient(&u.a, &u.b, &s.b, disc);
    let o3 = orient(&s.a, &s.b, &u.a, disc);
    let o4 = orient(&s.a, &s.b, &u.b, disc);
    if o1 == 0 && o2 == 0 {
        return Err(Error::DegenerateCell {
            detail: "unstable and stable segments are collinear".into(),
        });
    }
    if o1 as i16 * o2 as i16 == -1 && o3 as i16 * o4 as i16 == -1 {
        let eu = u.b.sub(&u.a);
        let es = s.b.sub(&s.a);
        let denom = cross(&eu, &es, disc);
        let t = cross(&s.a.sub(&u.a), &es, disc).div(&denom, disc);
        let p = u.a.add(&eu.scale(&t, disc));
        let su = param_along(s, &p, disc);
        splits[ui].push((t, p.clone()));
        splits[si].push((su, p));
        *crossings += 1;
        return Ok(());
    }
    // T-junction events: an endpoint of one segment strictly inside the
    // other. Shared endpoints fall through (parameter 0 or 1) and are
    // glued by canonical vertex interning instead.
    if o1 == 0 {
        maybe_endpoint_split(u, &s.a, ui, disc, splits);
    }
    if o2 == 0 {
        maybe_endpoint_split(u, &s.b, ui, disc, splits);
    }
    if o3 == 0 {
        maybe_endpoint_split(s, &u.a, si, disc, splits);
    }
    if o4 == 0 {
        maybe_endpoint_split(s, &u.b, si, disc, splits);
    }
    Ok(())
}

/// Parameter of a point known to lie on the segment's line (segments are
/// never vertical, so the x-coordinate determines it).
fn param_along(seg: &ProjectedSegment, p: &SurdPoint, disc: i64) -> Surd {
    p.x.sub(&seg.a.x).div(&seg.b.x.sub(&seg.a.x), disc)
}

fn maybe_endpoint_split(
    seg: &ProjectedSegment,
    p: &SurdPoint,
    idx: usize,
    disc: i64,
    splits: &mut [Vec<(Surd, SurdPoint)>],
) {
    let t = param_along(seg, p, disc);
    if t.sign(disc) > 0 && t.cmp(&Surd::from_int(1), disc) == Ordering::Less {
        splits[idx].push((t, p.clone()));
    }
}

/// Builds the per-face record: antenna stripping, disk test, lifted
/// boundary, exact area, flavor runs, side lengths.
fn process_face(edges: &[EdgeRec], raw: Vec<u32>, disc: i64) -> Result<FaceRec> {
    // Strip antennae: cancel adjacent (h, twin h) pairs, cyclically.
    let mut cycle: Vec<u32> = Vec::with_capacity(raw.len());
    for h in raw {
        if cycle.last() == Some(&(h ^ 1)) {
            cycle.pop();
        } else {
            cycle.push(h);
        }
    }
    while cycle.len() >= 2 && cycle.first().map(|&f| f ^ 1) == cycle.last().copied() {
        cycle.pop();
        cycle.remove(0);
    }

    let mut displacement = SurdPoint::origin();
    for &h in &cycle {
        displacement = displacement.add(&halfedge_evec(edges, h));
    }
    let is_disk = !cycle.is_empty() && displacement.x.is_zero() && displacement.y.is_zero();

    let mut lifted: Vec<SurdPoint> = Vec::new();
    let mut area = None;
    if is_disk {
        let mut pos = halfedge_tail_point(edges, cycle[0]);
        for &h in &cycle {
            lifted.push(pos.clone());
            pos = pos.add(&halfedge_evec(edges, h));
        }
        let mut twice = Surd::zero();
        for i in 0..lifted.len() {
            let p = &lifted[i];
            let q = &lifted[(i + 1) % lifted.len()];
            twice = twice.add(&cross(p, q, disc));
        }
        if twice.sign(disc) <= 0 {
            return Err(Error::DegenerateCell {
                detail: "disk face has nonpositive oriented area".into(),
            });
        }
        area = Some(twice.scale(&BigRational::new(BigInt::from(1), BigInt::from(2))));
    }

    // Maximal same-flavor runs around the stripped cycle.
    let mut runs = 0usize;
    let mut du = 0f64;
    let mut ds = 0f64;
    if !cycle.is_empty() {
        let flavors: Vec<ManifoldFlavor> =
            cycle.iter().map(|&h| edges[(h >> 1) as usize].flavor).collect();
        let n = cycle.len();
        // Start each run where the flavor changes; a uniform cycle is one run.
        let mut run_lengths: Vec<(ManifoldFlavor, f64)> = Vec::new();
        let start = (0..n).find(|&i| flavors[i] != flavors[(i + n - 1) % n]);
        match start {
            None => {
                runs = 1;
                let total: f64 = cycle.iter().map(|&h| evec_norm(edges, h, disc)).sum();
                run_lengths.push((flavors[0], total));
            }
            Some(s0) => {
                let mut i = s0;
                loop {
                    let flavor = flavors[i];
                    let mut len = 0f64;
                    let mut j = i;
                    while flavors[j] == flavor {
                        len += evec_norm(edges, cycle[j], disc);
                        j = (j + 1) % n;
                        if j == s0 {
                            break;
                        }
                    }
                    run_lengths.push((flavor, len));
                    runs += 1;
                    i = j;
                    if i == s0 {
                        break;
                    }
                }
            }
        }
        for (flavor, len) in run_lengths {
            match flavor {
                ManifoldFlavor::Unstable => du = du.max(len),
                ManifoldFlavor::Stable => ds = ds.max(len),
            }
        }
    }

    Ok(FaceRec { cycle, is_disk, area, lifted, runs, du, ds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;

    const D: i64 = 5;

    fn rp(xn: i64, xd: i64, yn: i64, yd: i64) -> SurdPoint {
        SurdPoint::new(
            Surd::from_rational(BigRational::new(BigInt::from(xn), BigInt::from(xd))),
            Surd::from_rational(BigRational::new(BigInt::from(yn), BigInt::from(yd))),
        )
    }

    fn polyline(points: &[(i64, i64, i64, i64)]) -> ExactPolyline {
        ExactPolyline {
            vertices: points.iter().map(|&(a, b, c, d)| rp(a, b, c, d)).collect(),
        }
    }

    /// Two transversal closed geodesics: slope 2 through the origin
    /// (unstable flavor) and slope -1/2 (stable flavor). They meet in 5
    /// points, cutting the torus into 5 parallelogram faces of area 1/5.
    fn geodesic_pair() -> Vec<ProjectedSegment> {
        let u = polyline(&[(0, 1, 0, 1), (1, 1, 2, 1)]);
        let s = polyline(&[(0, 1, 0, 1), (2, 1, -1, 1)]);
        let mut segs = project_polyline(&u, ManifoldFlavor::Unstable, D).unwrap();
        segs.extend(project_polyline(&s, ManifoldFlavor::Stable, D).unwrap());
        segs
    }

    #[test]
    fn projection_splits_at_integer_lines() {
        let u = polyline(&[(0, 1, 0, 1), (1, 1, 2, 1)]);
        let segs = project_polyline(&u, ManifoldFlavor::Unstable, D).unwrap();
        assert_eq!(segs.len(), 2);
        for seg in &segs {
            for p in [&seg.a, &seg.b] {
                for c in [&p.x, &p.y] {
                    assert!(c.sign(D) >= 0 && c.cmp(&Surd::from_int(1), D) != Ordering::Greater);
                }
            }
        }
    }

    #[test]
    fn geodesic_arrangement_has_five_parallelograms() {
        let arr = Arrangement::build(&geodesic_pair(), D, 100_000).unwrap();
        let report = arr.closure();
        assert!(report.euler_ok, "{report:?}");
        assert!(report.all_disks);
        assert!(report.all_rectangles);
        assert!(report.area_sum_one);
        assert!(report.closed());
        assert_eq!(arr.faces.len(), 5);
        assert_eq!(arr.crossings, 4); // the fifth meeting point is the shared origin vertex
        let fifth = Surd::from_rational(BigRational::new(BigInt::from(1), BigInt::from(5)));
        for f in &arr.faces {
            assert_eq!(f.area.as_ref().unwrap(), &fifth);
            assert_eq!(f.runs, 4);
        }
        let census = arr.degree_census();
        assert_eq!(census.deg4, 5); // 4 proper crossings + origin
        assert_eq!(census.deg2, 2); // seam vertices of the two loops
        assert_eq!(census.deg1, 0);
        assert_eq!(census.other, 0);
    }

    #[test]
    fn samples_locate_back_to_their_faces() {
        let arr = Arrangement::build(&geodesic_pair(), D, 100_000).unwrap();
        for f in 0..arr.faces.len() {
            let sample = arr.face_sample(f).unwrap();
            assert!(!arr.point_on_flavor(&sample, ManifoldFlavor::Unstable));
            assert!(!arr.point_on_flavor(&sample, ManifoldFlavor::Stable));
            assert_eq!(arr.locate(&sample).unwrap(), f);
        }
    }

    #[test]
    fn locate_is_stable_at_the_seam_and_under_vertex_alignment() {
        let arr = Arrangement::build(&geodesic_pair(), D, 100_000).unwrap();
        // A query on the x = 0 seam (not on the skeleton) agrees with a
        // nearby interior query.
        let on_seam = arr.locate(&rp(0, 1, 1, 8)).unwrap();
        let nearby = arr.locate(&rp(1, 100, 1, 8)).unwrap();
        assert_eq!(on_seam, nearby);
        // A query vertically below a degree-4 vertex: (1/2, 0) is a vertex;
        // query at x = 1/2 below it.
        let below_vertex = arr.locate(&rp(1, 2, 1, 16)).unwrap();
        let beside = arr.locate(&rp(51, 100, 1, 16)).unwrap();
        assert_eq!(below_vertex, beside);
    }

    #[test]
    fn antenna_edges_do_not_change_faces_or_areas() {
        let mut segs = geodesic_pair();
        // A dangling unstable stub attached at the existing vertex (1/2, 0),
        // poking into a face interior; it crosses nothing.
        let stub = polyline(&[(1, 2, 0, 1), (3, 5, 1, 20)]);
        segs.extend(project_polyline(&stub, ManifoldFlavor::Unstable, D).unwrap());
        let arr = Arrangement::build(&segs, D, 100_000).unwrap();
        let report = arr.closure();
        assert!(report.euler_ok);
        assert!(report.all_disks);
        assert!(report.all_rectangles, "antenna should be stripped from runs");
        assert!(report.area_sum_one);
        assert_eq!(arr.faces.len(), 5);
        assert_eq!(arr.degree_census().deg1, 1); // the stub tip
        for f in 0..arr.faces.len() {
            let sample = arr.face_sample(f).unwrap();
            assert_eq!(arr.locate(&sample).unwrap(), f);
        }
    }

    #[test]
    fn short_transversal_segments_fail_closure_honestly() {
        // Two short crossing sticks: a tree-like skeleton, no closed faces.
        let u = polyline(&[(-1, 4, -1, 4), (1, 4, 1, 4)]);
        let s = polyline(&[(-1, 8, 1, 8), (1, 8, -1, 8)]);
        let mut segs = project_polyline(&u, ManifoldFlavor::Unstable, D).unwrap();
        segs.extend(project_polyline(&s, ManifoldFlavor::Stable, D).unwrap());
        let arr = Arrangement::build(&segs, D, 100_000).unwrap();
        let report = arr.closure();
        assert!(!report.closed());
        assert!(!report.euler_ok);
    }

    #[test]
    fn vertex_budget_is_respected() {
        let err = Arrangement::build(&geodesic_pair(), D, 4).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn missing_flavor_is_rejected() {
        let u = polyline(&[(0, 1, 0, 1), (1, 1, 2, 1)]);
        let segs = project_polyline(&u, ManifoldFlavor::Unstable, D).unwrap();
        assert!(Arrangement::build(&segs, D, 100_000).is_err());
    }
}
