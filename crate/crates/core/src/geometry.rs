//! Geometric services on the embedding: triangle normals, side points,
//! rotational order of triangles around an edge, and the ray-parity test
//! that identifies the unbounded region.
//!
//! Everything here is tolerance-based floating point. Degenerate inputs are
//! rejected loudly instead of being resolved with adaptive precision; the
//! complex definition already forbids the configurations that would need it.

use crate::complex::OrientedComplex2;
use crate::scalar::{real, Real};
use crate::vec3::Vec3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Angular tolerance below which two fan members are considered colliding.
pub const FAN_ANGLE_TOL: f64 = 1e-9;
/// Side points sit at this fraction of the shortest incident edge length.
pub const SIDE_POINT_EPS_FRACTION: f64 = 1e-3;
/// Fixed seed for the reproducible ray-direction sequence.
pub const RAY_SEED: u64 = 0x732e_7465_7261_7921;
/// Retry budget for rays that graze an edge or vertex.
pub const RAY_MAX_RETRIES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("coplanar fan ambiguity at edge {0}")]
    CoplanarFan(usize),
    #[error("side point segment of triangle {triangle} is blocked by triangle {blocker}")]
    SidePointBlocked { triangle: usize, blocker: usize },
    #[error("degenerate ray: retries exhausted")]
    DegenerateRay,
}

/// One of the two off-surface witness points of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidePoint<T> {
    pub triangle: usize,
    /// +1 for the normal side, -1 for the opposite side.
    pub sign: i8,
    pub position: Vec3<T>,
}

/// Triangles incident at an edge in rotational order.
///
/// The list is cyclic: element `i` is rotationally followed by element
/// `(i + 1) % len`, rotating about the canonically oriented edge in the
/// right-hand sense. Each entry carries the triangle's agreement sign with
/// the edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeFan {
    pub edge: usize,
    pub incident: Vec<(usize, i8)>,
}

impl EdgeFan {
    /// True iff `other` lists the same cyclic sequence (any starting point).
    pub fn cyclically_equal(&self, other: &EdgeFan) -> bool {
        let a = &self.incident;
        let b = &other.incident;
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        (0..a.len()).any(|shift| (0..a.len()).all(|i| a[i] == b[(i + shift) % b.len()]))
    }
}

/// Unit normal of a triangle, consistent with the vertex-order cross
/// product `ab x bc`.
pub fn triangle_normal<T: Real>(
    complex: &OrientedComplex2<T>,
    t: usize,
) -> Result<Vec3<T>, GeometryError> {
    let [a, b, c] = complex.triangle_positions(t);
    b.sub(a)
        .cross(c.sub(b))
        .normalized()
        .ok_or(GeometryError::DegenerateTriangle(t))
}

fn centroid<T: Real>(ps: &[Vec3<T>; 3]) -> Vec3<T> {
    let third = T::one() / real::<T>(3.0);
    ps[0].add(ps[1]).add(ps[2]).scale(third)
}

fn shortest_edge_len<T: Real>(ps: &[Vec3<T>; 3]) -> T {
    let e0 = ps[1].sub(ps[0]).norm();
    let e1 = ps[2].sub(ps[1]).norm();
    let e2 = ps[0].sub(ps[2]).norm();
    e0.min(e1).min(e2)
}

/// The side point of a triangle on the given side, without any clearance
/// check against the rest of the complex.
pub fn side_point<T: Real>(
    complex: &OrientedComplex2<T>,
    t: usize,
    sign: i8,
) -> Result<SidePoint<T>, GeometryError> {
    let ps = complex.triangle_positions(t);
    let n = triangle_normal(complex, t)?;
    let eps = shortest_edge_len(&ps) * real::<T>(SIDE_POINT_EPS_FRACTION);
    let dir = if sign >= 0 {
        n
    } else {
        n.scale(T::zero() - T::one())
    };
    Ok(SidePoint {
        triangle: t,
        sign: if sign >= 0 { 1 } else { -1 },
        position: centroid(&ps).add(dir.scale(eps)),
    })
}

/// Both side points of a triangle, checked so that the segment between them
/// intersects no other triangle of the complex.
pub fn validated_side_points<T: Real>(
    complex: &OrientedComplex2<T>,
    t: usize,
) -> Result<(SidePoint<T>, SidePoint<T>), GeometryError> {
    let plus = side_point(complex, t, 1)?;
    let minus = side_point(complex, t, -1)?;
    let tol = plus.position.sub(minus.position).norm() * real::<T>(1e-9);
    for other in 0..complex.triangle_count() {
        if other == t {
            continue;
        }
        let tri = complex.triangle_positions(other);
        match segment_triangle_hit(plus.position, minus.position, &tri, tol) {
            SegTriHit::None => {}
            _ => {
                return Err(GeometryError::SidePointBlocked {
                    triangle: t,
                    blocker: other,
                })
            }
        }
    }
    Ok((plus, minus))
}

/// Rotational order of the triangles incident at an edge.
///
/// Each incident triangle's apex is projected onto the plane orthogonal to
/// the canonical edge direction and sorted by angle; ascending angle is
/// rotation about the oriented edge in the right-hand sense.
pub fn cyclic_order_around_edge<T: Real>(
    complex: &OrientedComplex2<T>,
    e: usize,
    angle_tol: T,
) -> Result<EdgeFan, GeometryError> {
    let (lo, hi) = complex.edge(e);
    let origin = complex.vertex(lo).pos;
    let dir = complex
        .vertex(hi)
        .pos
        .sub(origin)
        .normalized()
        .expect("edge endpoints distinct");
    // Orthonormal frame (u, w, dir), right handed.
    let pick = {
        let ax = dir.x.abs();
        let ay = dir.y.abs();
        let az = dir.z.abs();
        if ax <= ay && ax <= az {
            Vec3::new(T::one(), T::zero(), T::zero())
        } else if ay <= az {
            Vec3::new(T::zero(), T::one(), T::zero())
        } else {
            Vec3::new(T::zero(), T::zero(), T::one())
        }
    };
    let u = pick
        .sub(dir.scale(pick.dot(dir)))
        .normalized()
        .expect("frame axis independent of edge direction");
    let w = dir.cross(u);

    let mut entries: Vec<(T, usize, i8)> = Vec::new();
    for &(t, agree) in complex.edge_triangles(e) {
        let apex = complex.vertex(complex.apex(t, e)).pos;
        let r = apex.sub(origin);
        let proj = r.sub(dir.scale(r.dot(dir)));
        if proj.norm_sq() == T::zero() {
            return Err(GeometryError::DegenerateTriangle(t));
        }
        let angle = proj.dot(w).atan2(proj.dot(u));
        entries.push((angle, t, agree));
    }
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    if entries.len() > 1 {
        let two_pi = real::<T>(std::f64::consts::TAU);
        for i in 0..entries.len() {
            let a = entries[i].0;
            let b = entries[(i + 1) % entries.len()].0;
            let gap = if i + 1 == entries.len() {
                b + two_pi - a
            } else {
                b - a
            };
            if gap.abs() < angle_tol {
                return Err(GeometryError::CoplanarFan(e));
            }
        }
    }
    Ok(EdgeFan {
        edge: e,
        incident: entries.into_iter().map(|(_, t, s)| (t, s)).collect(),
    })
}

/// Fans for every edge of the complex, with the default angular tolerance.
pub fn all_edge_fans<T: Real>(
    complex: &OrientedComplex2<T>,
) -> Result<Vec<EdgeFan>, GeometryError> {
    let tol = real::<T>(FAN_ANGLE_TOL);
    (0..complex.edge_count())
        .map(|e| cyclic_order_around_edge(complex, e, tol))
        .collect()
}

/// Decide whether `point` lies in the unbounded region by transversal
/// crossing parity (even means unbounded). Only meaningful for watertight
/// complexes, where crossing a triangle always changes region; used as an
/// independent oracle on closed surfaces. Rays come from a fixed seeded
/// sequence; directions that graze an edge or vertex are retried.
pub fn ray_parity_external<T: Real>(
    complex: &OrientedComplex2<T>,
    point: Vec3<T>,
    seed: u64,
) -> Result<bool, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'retry: for _ in 0..RAY_MAX_RETRIES {
        let dir = random_unit_dir::<T>(&mut rng);
        let mut crossings = 0usize;
        for t in 0..complex.triangle_count() {
            let tri = complex.triangle_positions(t);
            match ray_triangle_crossing(point, dir, &tri) {
                RayHit::Miss => {}
                RayHit::Cross(_) => crossings += 1,
                RayHit::Grazing => continue 'retry,
            }
        }
        return Ok(crossings % 2 == 0);
    }
    Err(GeometryError::DegenerateRay)
}

/// One transversal ray-triangle crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayCrossing<T> {
    /// Distance along the (unit) ray direction.
    pub t: T,
    pub triangle: usize,
    /// Side of the triangle faced just after the crossing in travel
    /// direction: +1 when travelling with the triangle's normal.
    pub exit_side: i8,
}

/// All transversal crossings of a seeded random ray from `point`, sorted by
/// distance. Retries directions that graze an edge, vertex or the origin;
/// errors when the retry budget is exhausted.
pub fn ray_crossings<T: Real>(
    complex: &OrientedComplex2<T>,
    point: Vec3<T>,
    seed: u64,
) -> Result<Vec<RayCrossing<T>>, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'retry: for _ in 0..RAY_MAX_RETRIES {
        let dir = random_unit_dir::<T>(&mut rng);
        let mut out = Vec::new();
        for t in 0..complex.triangle_count() {
            let tri = complex.triangle_positions(t);
            match ray_triangle_crossing(point, dir, &tri) {
                RayHit::Miss => {}
                RayHit::Cross(dist) => {
                    let n = tri[1].sub(tri[0]).cross(tri[2].sub(tri[0]));
                    let exit_side = if dir.dot(n) > T::zero() { 1 } else { -1 };
                    out.push(RayCrossing {
                        t: dist,
                        triangle: t,
                        exit_side,
                    });
                }
                RayHit::Grazing => continue 'retry,
            }
        }
        out.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        return Ok(out);
    }
    Err(GeometryError::DegenerateRay)
}

fn random_unit_dir<T: Real>(rng: &mut ChaCha8Rng) -> Vec3<T> {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = rng.random_range(-1.0..1.0);
        let v = Vec3::<T>::from_f64(x, y, z);
        let n2 = v.norm_sq();
        if n2 > real(0.01) && n2 <= T::one() {
            return v.normalized().unwrap();
        }
    }
}

enum RayHit<T> {
    Miss,
    Cross(T),
    Grazing,
}

/// Moller-Trumbore with a strict-interior margin; anything near the
/// triangle boundary, the ray origin, or a parallel configuration close to
/// the plane reports `Grazing` so the caller can retry a fresh direction.
fn ray_triangle_crossing<T: Real>(origin: Vec3<T>, dir: Vec3<T>, tri: &[Vec3<T>; 3]) -> RayHit<T> {
    let [a, b, c] = *tri;
    let e1 = b.sub(a);
    let e2 = c.sub(a);
    let pv = dir.cross(e2);
    let det = e1.dot(pv);
    let scale = e1.norm() * e2.norm();
    let eps_det = scale * real::<T>(1e-12);
    if det.abs() <= eps_det {
        // Parallel; only degenerate when the origin is essentially in-plane
        // (the grazing ray could then slide along the triangle).
        let n = e1.cross(e2).normalized().expect("triangle non-degenerate");
        let dist = origin.sub(a).dot(n).abs();
        if dist <= scale.sqrt() * real::<T>(1e-9) {
            return RayHit::Grazing;
        }
        return RayHit::Miss;
    }
    let inv = T::one() / det;
    let tv = origin.sub(a);
    let u = tv.dot(pv) * inv;
    let qv = tv.cross(e1);
    let v = dir.dot(qv) * inv;
    let t = e2.dot(qv) * inv;
    let eps_b = real::<T>(1e-9);
    let eps_t = real::<T>(1e-9) * (T::one() + origin.sub(a).norm());
    let inside_wide = u >= -eps_b && v >= -eps_b && u + v <= T::one() + eps_b && t >= -eps_t;
    if !inside_wide {
        return RayHit::Miss;
    }
    let inside_strict = u > eps_b && v > eps_b && u + v < T::one() - eps_b && t > eps_t;
    if inside_strict {
        RayHit::Cross(t)
    } else {
        RayHit::Grazing
    }
}

/// How a segment meets a triangle (tolerance-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegTriHit<T> {
    None,
    /// Transversal touch or crossing at this point.
    Point(Vec3<T>),
    /// The whole segment lies in the triangle's plane.
    Coplanar,
}

fn side_sign<T: Real>(d: T, tol: T) -> i8 {
    if d > tol {
        1
    } else if d < -tol {
        -1
    } else {
        0
    }
}

/// Classify the intersection of segment `pq` with a triangle.
pub fn segment_triangle_hit<T: Real>(
    p: Vec3<T>,
    q: Vec3<T>,
    tri: &[Vec3<T>; 3],
    tol: T,
) -> SegTriHit<T> {
    let [a, b, c] = *tri;
    let n = b
        .sub(a)
        .cross(c.sub(a))
        .normalized()
        .expect("triangle non-degenerate");
    let d1 = p.sub(a).dot(n);
    let d2 = q.sub(a).dot(n);
    let s1 = side_sign(d1, tol);
    let s2 = side_sign(d2, tol);
    match (s1, s2) {
        (0, 0) => SegTriHit::Coplanar,
        (0, _) => in_tri_point(p, tri, tol),
        (_, 0) => in_tri_point(q, tri, tol),
        (x, y) if x == y => SegTriHit::None,
        _ => {
            let t = d1 / (d1 - d2);
            let x = p.add(q.sub(p).scale(t));
            in_tri_point(x, tri, tol)
        }
    }
}

fn in_tri_point<T: Real>(x: Vec3<T>, tri: &[Vec3<T>; 3], tol: T) -> SegTriHit<T> {
    if point_in_triangle(x, tri, tol) {
        SegTriHit::Point(x)
    } else {
        SegTriHit::None
    }
}

/// Barycentric point-in-triangle with a signed length margin: positive
/// margins accept points slightly outside, negative margins demand strict
/// interiority by that distance.
pub fn point_in_triangle<T: Real>(x: Vec3<T>, tri: &[Vec3<T>; 3], margin: T) -> bool {
    let [a, b, c] = *tri;
    let v0 = b.sub(a);
    let v1 = c.sub(a);
    let v2 = x.sub(a);
    let d00 = v0.dot(v0);
    let d01 = v0.dot(v1);
    let d11 = v1.dot(v1);
    let d20 = v2.dot(v0);
    let d21 = v2.dot(v1);
    let denom = d00 * d11 - d01 * d01;
    if denom == T::zero() {
        return false;
    }
    let u = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    let eps = margin / d00.max(d11).sqrt();
    u >= -eps && w >= -eps && u + w <= T::one() + eps
}

/// For two triangles that share the full edge `ab`: true iff they are
/// coplanar and their apexes lie on the same side of the edge, i.e. their
/// interiors overlap.
pub fn coplanar_same_side<T: Real>(
    a: Vec3<T>,
    b: Vec3<T>,
    apex1: Vec3<T>,
    apex2: Vec3<T>,
    tol: T,
) -> bool {
    let e = b.sub(a);
    let n1 = e.cross(apex1.sub(a));
    let n2 = e.cross(apex2.sub(a));
    let n1u = match n1.normalized() {
        Some(v) => v,
        None => return true, // apex on the edge line: degenerate, flag it
    };
    let coplanar = apex2.sub(a).dot(n1u).abs() <= tol;
    coplanar && n1.dot(n2) > T::zero()
}

/// True iff two triangles touch anywhere beyond the listed allowed contact
/// points (their shared vertices). Used by complex validation for pairs
/// sharing at most one vertex.
pub fn triangles_touch_beyond<T: Real>(
    t1: &[Vec3<T>; 3],
    t2: &[Vec3<T>; 3],
    allowed: &[Vec3<T>],
    tol: T,
) -> bool {
    if pair_coplanar(t1, t2, tol) {
        return coplanar_overlap(t1, t2, allowed, tol);
    }
    let near_allowed = |x: Vec3<T>| {
        allowed
            .iter()
            .any(|&a| x.sub(a).norm() <= tol * real::<T>(10.0))
    };
    for (src, dst) in [(t1, t2), (t2, t1)] {
        for k in 0..3 {
            let (sa, sb) = (src[k], src[(k + 1) % 3]);
            match segment_triangle_hit(sa, sb, dst, tol) {
                SegTriHit::None => {}
                SegTriHit::Point(x) => {
                    if !near_allowed(x) {
                        return true;
                    }
                }
                // One edge lies in the other triangle's plane while the
                // triangles themselves are not coplanar: clip the edge
                // against the triangle in that plane.
                SegTriHit::Coplanar => {
                    if in_plane_segment_touches(sa, sb, dst, allowed, tol) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn pair_coplanar<T: Real>(t1: &[Vec3<T>; 3], t2: &[Vec3<T>; 3], tol: T) -> bool {
    let n = match t1[1].sub(t1[0]).cross(t1[2].sub(t1[0])).normalized() {
        Some(n) => n,
        None => return true,
    };
    t2.iter().all(|&p| p.sub(t1[0]).dot(n).abs() <= tol)
}

/// A segment known to lie in the triangle's plane: does it meet the closed
/// triangle beyond the allowed contact points?
fn in_plane_segment_touches<T: Real>(
    sa: Vec3<T>,
    sb: Vec3<T>,
    tri: &[Vec3<T>; 3],
    allowed: &[Vec3<T>],
    tol: T,
) -> bool {
    let n = tri[1]
        .sub(tri[0])
        .cross(tri[2].sub(tri[0]))
        .normalized()
        .unwrap();
    let u = tri[1].sub(tri[0]).normalized().unwrap();
    let w = n.cross(u);
    let to2d = |p: Vec3<T>| (p.sub(tri[0]).dot(u), p.sub(tri[0]).dot(w));
    let seg_len = sb.sub(sa).norm();
    let Some((lo, hi)) = clip_segment_to_triangle_2d(
        to2d(sa),
        to2d(sb),
        [to2d(tri[0]), to2d(tri[1]), to2d(tri[2])],
    ) else {
        return false;
    };
    let snap = tol * real::<T>(10.0);
    let overlap = (hi - lo) * seg_len;
    if overlap > snap + snap {
        return true;
    }
    let mid = sa.add(sb.sub(sa).scale((lo + hi) * real::<T>(0.5)));
    !allowed.iter().any(|&a| mid.sub(a).norm() <= snap)
}

/// Parameter interval of a 2D segment inside a (closed) triangle, or None.
fn clip_segment_to_triangle_2d<T: Real>(
    p0: (T, T),
    p1: (T, T),
    mut tri: [(T, T); 3],
) -> Option<(T, T)> {
    // Orient counterclockwise so the interior is on the left of each edge.
    let area2 = (tri[1].0 - tri[0].0) * (tri[2].1 - tri[0].1)
        - (tri[1].1 - tri[0].1) * (tri[2].0 - tri[0].0);
    if area2 < T::zero() {
        tri.swap(1, 2);
    }
    let d = (p1.0 - p0.0, p1.1 - p0.1);
    let (mut lo, mut hi) = (T::zero(), T::one());
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        // Inward normal of edge ab.
        let nx = -(b.1 - a.1);
        let ny = b.0 - a.0;
        let denom = nx * d.0 + ny * d.1;
        let num = nx * (a.0 - p0.0) + ny * (a.1 - p0.1);
        if denom.is_zero() {
            if num > T::zero() {
                return None; // parallel and strictly outside
            }
            continue;
        }
        let t = num / denom;
        if denom > T::zero() {
            // entering
            if t > lo {
                lo = t;
            }
        } else if t < hi {
            hi = t;
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// Overlap test for (near-)coplanar triangles: any vertex, centroid, or edge
/// midpoint of one strictly inside the other, or a proper edge crossing away
/// from the allowed contacts.
fn coplanar_overlap<T: Real>(
    t1: &[Vec3<T>; 3],
    t2: &[Vec3<T>; 3],
    allowed: &[Vec3<T>],
    tol: T,
) -> bool {
    let near_allowed = |x: Vec3<T>| {
        allowed
            .iter()
            .any(|&a| x.sub(a).norm() <= tol * real::<T>(10.0))
    };
    let strict = T::zero() - tol * real::<T>(10.0);
    let probes = |src: &[Vec3<T>; 3], dst: &[Vec3<T>; 3]| {
        let half = real::<T>(0.5);
        let third = T::one() / real::<T>(3.0);
        let mut pts: Vec<Vec3<T>> = src.to_vec();
        for k in 0..3 {
            pts.push(src[k].add(src[(k + 1) % 3]).scale(half));
        }
        pts.push(src[0].add(src[1]).add(src[2]).scale(third));
        pts.into_iter()
            .any(|p| !near_allowed(p) && point_in_triangle(p, dst, strict))
    };
    if probes(t1, t2) || probes(t2, t1) {
        return true;
    }
    // Proper 2D edge-edge crossings within the shared plane.
    let n = t1[1]
        .sub(t1[0])
        .cross(t1[2].sub(t1[0]))
        .normalized()
        .unwrap();
    let u = t1[1].sub(t1[0]).normalized().unwrap();
    let w = n.cross(u);
    let to2d = |p: Vec3<T>| (p.sub(t1[0]).dot(u), p.sub(t1[0]).dot(w));
    for i in 0..3 {
        for j in 0..3 {
            let (a1, b1) = (t1[i], t1[(i + 1) % 3]);
            let (a2, b2) = (t2[j], t2[(j + 1) % 3]);
            if let Some(x) = proper_cross_2d(to2d(a1), to2d(b1), to2d(a2), to2d(b2), tol) {
                let p3 = t1[0].add(u.scale(x.0)).add(w.scale(x.1));
                if !near_allowed(p3) {
                    return true;
                }
            }
        }
    }
    false
}

fn proper_cross_2d<T: Real>(a: (T, T), b: (T, T), c: (T, T), d: (T, T), tol: T) -> Option<(T, T)> {
    let r = (b.0 - a.0, b.1 - a.1);
    let s = (d.0 - c.0, d.1 - c.1);
    let denom = r.0 * s.1 - r.1 * s.0;
    let len = (r.0 * r.0 + r.1 * r.1).sqrt() * (s.0 * s.0 + s.1 * s.1).sqrt();
    if denom.abs() <= len * real::<T>(1e-12) {
        return None;
    }
    let qp = (c.0 - a.0, c.1 - a.1);
    let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
    let v = (qp.0 * r.1 - qp.1 * r.0) / denom;
    let eps = tol / (len.sqrt() + T::one());
    if t > eps && t < T::one() - eps && v > eps && v < T::one() - eps {
        Some((a.0 + t * r.0, a.1 + t * r.1))
    } else {
        None
    }
}
