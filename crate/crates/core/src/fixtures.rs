//! Built-in complex generators used by tests and the benchmark harness.
//!
//! All generators produce geometrically valid complexes with predictable
//! region structure, so pipeline outputs can be checked exactly.

use crate::complex::OrientedComplex2;
use crate::vec3::Vec3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C = OrientedComplex2<f64>;
type V = Vec3<f64>;

fn v(x: f64, y: f64, z: f64) -> V {
    Vec3::new(x, y, z)
}

/// Orient a face outward with respect to an interior reference point.
fn outward(face: [usize; 3], pts: &[V], interior: V) -> [usize; 3] {
    let [a, b, c] = face.map(|i| pts[i]);
    let n = b.sub(a).cross(c.sub(a));
    let centroid = a.add(b).add(c).scale(1.0 / 3.0);
    if n.dot(centroid.sub(interior)) >= 0.0 {
        face
    } else {
        [face[0], face[2], face[1]]
    }
}

/// Two regular tetrahedra glued across one face.
///
/// Triangles 0..=2 are the lower tetrahedron's outer faces, triangle 3 the
/// shared face oriented out of the lower tetrahedron, triangles 4..=6 the
/// upper tetrahedron's outer faces. All outer faces point outward.
pub fn glued_tetrahedra() -> C {
    let pts = vec![
        v(0.25, 0.25, -1.0), // lower apex
        v(1.0, 0.0, 0.0),
        v(0.0, 1.0, 0.0),
        v(0.0, 0.0, 0.0),
        v(0.25, 0.25, 1.0), // upper apex
    ];
    let lower_interior = v(0.3, 0.3, -0.25);
    let upper_interior = v(0.3, 0.3, 0.25);
    let tris = vec![
        outward([0, 1, 2], &pts, lower_interior),
        outward([0, 2, 3], &pts, lower_interior),
        outward([0, 3, 1], &pts, lower_interior),
        outward([1, 2, 3], &pts, lower_interior), // shared; points up
        outward([4, 1, 2], &pts, upper_interior),
        outward([4, 2, 3], &pts, upper_interior),
        outward([4, 3, 1], &pts, upper_interior),
    ];
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

/// The two tetrahedra of [`glued_tetrahedra`] as vertex quadruples,
/// positively oriented. Shared vertex indexing with the complex.
pub fn glued_tetrahedra_tets() -> Vec<[usize; 4]> {
    vec![
        positive_tet([0, 1, 2, 3], &glued_tetrahedra_points()),
        positive_tet([4, 1, 2, 3], &glued_tetrahedra_points()),
    ]
}

fn glued_tetrahedra_points() -> Vec<V> {
    glued_tetrahedra()
        .vertices()
        .iter()
        .map(|vx| vx.pos)
        .collect()
}

fn positive_tet(t: [usize; 4], pts: &[V]) -> [usize; 4] {
    let [a, b, c, d] = t.map(|i| pts[i]);
    let det = b.sub(a).cross(c.sub(a)).dot(d.sub(a));
    if det > 0.0 {
        t
    } else {
        [t[0], t[1], t[3], t[2]]
    }
}

/// Split an axis-aligned quad (corners in cyclic order, counterclockwise
/// viewed from outside) into two triangles along the diagonal through its
/// lexicographically smallest corner.
fn split_quad(quad: [usize; 4], pts: &[V]) -> [[usize; 3]; 2] {
    let key = |i: usize| {
        let p = pts[i];
        (
            (p.x * 1e6).round() as i64,
            (p.y * 1e6).round() as i64,
            (p.z * 1e6).round() as i64,
        )
    };
    let m = (0..4).min_by_key(|&k| key(quad[k])).unwrap();
    let q = |k: usize| quad[(m + k) % 4];
    [[q(0), q(1), q(2)], [q(0), q(2), q(3)]]
}

/// Axis-aligned cube surface triangulated with min-corner diagonals, all
/// triangles oriented outward. 8 vertices, 12 triangles.
pub fn cube_surface(origin: V, size: f64) -> C {
    let (pts, tris) = cube_surface_data(origin, size);
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

fn cube_surface_data(origin: V, size: f64) -> (Vec<V>, Vec<[usize; 3]>) {
    let corner = |b: usize| {
        v(
            origin.x + size * ((b & 1) as f64),
            origin.y + size * (((b >> 1) & 1) as f64),
            origin.z + size * (((b >> 2) & 1) as f64),
        )
    };
    let pts: Vec<V> = (0..8).map(corner).collect();
    // Quads counterclockwise as seen from outside the cube.
    let quads: [[usize; 4]; 6] = [
        [0, 2, 3, 1], // z = 0, outward -z
        [4, 5, 7, 6], // z = 1, outward +z
        [0, 1, 5, 4], // y = 0, outward -y
        [2, 6, 7, 3], // y = 1, outward +y
        [0, 4, 6, 2], // x = 0, outward -x
        [1, 3, 7, 5], // x = 1, outward +x
    ];
    let mut tris = Vec::with_capacity(12);
    for q in quads {
        tris.extend(split_quad(q, &pts));
    }
    (pts, tris)
}

/// Chain of `n >= 1` regular tetrahedra, each sharing a face with the next
/// (a helical stack). Triangles are the faces of the chain; shared faces are
/// stored once, oriented out of the earlier tetrahedron.
pub fn tet_chain(n: usize) -> C {
    let (pts, tris) = tet_chain_data(n);
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

/// Chain complex plus its tetrahedra (positively oriented vertex quadruples).
pub fn tet_chain_with_tets(n: usize) -> (C, Vec<[usize; 4]>) {
    let (pts, tris) = tet_chain_data(n);
    let tets = (0..n)
        .map(|i| positive_tet([i, i + 1, i + 2, i + 3], &pts))
        .collect();
    (OrientedComplex2::from_positions(pts, tris).unwrap(), tets)
}

fn tet_chain_data(n: usize) -> (Vec<V>, Vec<[usize; 3]>) {
    assert!(n >= 1);
    let mut pts = vec![
        v(0.0, 0.0, 0.0),
        v(1.0, 0.0, 0.0),
        v(0.5, 3f64.sqrt() / 2.0, 0.0),
        v(0.5, 3f64.sqrt() / 6.0, (2f64 / 3.0).sqrt()),
    ];
    for k in 0..n.saturating_sub(1) {
        // Reflect the trailing vertex through the centroid of the shared
        // face; for regular tetrahedra this continues the helix.
        let face_centroid = pts[k + 1].add(pts[k + 2]).add(pts[k + 3]).scale(1.0 / 3.0);
        pts.push(face_centroid.scale(2.0).sub(pts[k]));
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for i in 0..n {
        let tet = [i, i + 1, i + 2, i + 3];
        let interior = tet
            .iter()
            .fold(Vec3::zero(), |acc, &q| acc.add(pts[q]))
            .scale(0.25);
        for f in [
            [tet[0], tet[1], tet[2]],
            [tet[0], tet[1], tet[3]],
            [tet[0], tet[2], tet[3]],
            [tet[1], tet[2], tet[3]],
        ] {
            let mut key = f;
            key.sort_unstable();
            if seen.insert(key) {
                tris.push(outward(f, &pts, interior));
            }
        }
    }
    (pts, tris)
}

/// `k` triangles sharing the unit z-axis edge, fanned at the given angles
/// (degrees). Every triangle agrees with the edge orientation.
pub fn open_fan(angles_deg: &[f64]) -> C {
    let mut pts = vec![v(0.0, 0.0, 0.0), v(0.0, 0.0, 1.0)];
    let mut tris = Vec::new();
    for (i, a) in angles_deg.iter().enumerate() {
        let r = a.to_radians();
        pts.push(v(r.cos(), r.sin(), 0.5));
        tris.push([0, 1, 2 + i]);
    }
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

/// Disjoint union of two complexes with the second translated by `offset`.
pub fn disjoint_union(a: &C, b: &C, offset: V) -> C {
    let mut pts: Vec<V> = a.vertices().iter().map(|x| x.pos).collect();
    let base = pts.len();
    pts.extend(b.vertices().iter().map(|x| x.pos.add(offset)));
    let mut tris: Vec<[usize; 3]> = a.triangles().iter().map(|t| t.vertices).collect();
    tris.extend(b.triangles().iter().map(|t| t.vertices.map(|q| q + base)));
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

pub fn two_disjoint_triangles() -> C {
    let t = open_fan(&[0.0]);
    disjoint_union(&t, &t, v(10.0, 0.0, 0.0))
}

pub fn two_disjoint_cubes() -> C {
    let c = cube_surface(Vec3::zero(), 1.0);
    disjoint_union(&c, &c, v(5.0, 0.0, 0.0))
}

/// `n` unit cubes stacked along z, every square face split into two
/// triangles. 10n + 2 triangles; the complement of the surface has n + 1
/// connected regions (n interiors plus the outside).
pub fn stacked_cubes(n: usize) -> C {
    assert!(n >= 1);
    let corner = |x: usize, y: usize, z: usize| v(x as f64, y as f64, z as f64);
    let idx = |x: usize, y: usize, z: usize| z * 4 + y * 2 + x;
    let mut pts = Vec::with_capacity(4 * (n + 1));
    for z in 0..=n {
        for y in 0..2 {
            for x in 0..2 {
                pts.push(corner(x, y, z));
            }
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut push_quad = |q: [usize; 4]| tris.extend(split_quad(q, &pts));
    // Bottom, outward -z.
    push_quad([idx(0, 0, 0), idx(0, 1, 0), idx(1, 1, 0), idx(1, 0, 0)]);
    // Top, outward +z.
    push_quad([idx(0, 0, n), idx(1, 0, n), idx(1, 1, n), idx(0, 1, n)]);
    for k in 0..n {
        // Side walls of cube k, outward.
        push_quad([
            idx(0, 0, k),
            idx(1, 0, k),
            idx(1, 0, k + 1),
            idx(0, 0, k + 1),
        ]); // y=0
        push_quad([
            idx(0, 1, k),
            idx(0, 1, k + 1),
            idx(1, 1, k + 1),
            idx(1, 1, k),
        ]); // y=1
        push_quad([
            idx(0, 0, k),
            idx(0, 0, k + 1),
            idx(0, 1, k + 1),
            idx(0, 1, k),
        ]); // x=0
        push_quad([
            idx(1, 0, k),
            idx(1, 1, k),
            idx(1, 1, k + 1),
            idx(1, 0, k + 1),
        ]); // x=1
    }
    for k in 1..n {
        // Interface between cube k-1 and cube k, oriented +z.
        push_quad([idx(0, 0, k), idx(1, 0, k), idx(1, 1, k), idx(0, 1, k)]);
    }
    OrientedComplex2::from_positions(pts, tris).unwrap()
}

/// A named test complex.
#[derive(Debug, Clone)]
pub struct NamedFixture {
    pub name: String,
    pub complex: C,
}

/// Apply seeded random orientation flips to a complex.
fn flip_some(c: &C, rng: &mut ChaCha8Rng) -> C {
    let mut cur = c.clone();
    for t in 0..c.triangle_count() {
        if rng.random_bool(0.4) {
            cur = cur.reorient_triangle(t).unwrap();
        }
    }
    cur
}

/// Deterministic family of varied fixtures: closed cubes, tetrahedron
/// chains, open fans, and disconnected pairs, with randomized placement and
/// per-triangle orientation flips.
pub fn seeded_suite(count: usize, seed: u64) -> Vec<NamedFixture> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let base = match i % 4 {
            0 => {
                let size = rng.random_range(0.5..3.0);
                let o = v(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                );
                NamedFixture {
                    name: format!("cube[{i}]"),
                    complex: cube_surface(o, size),
                }
            }
            1 => {
                let n = rng.random_range(2..=7);
                NamedFixture {
                    name: format!("tet_chain[{i}]x{n}"),
                    complex: tet_chain(n),
                }
            }
            2 => {
                let k = rng.random_range(1..=8);
                let mut angles: Vec<f64> = Vec::new();
                let mut a = rng.random_range(0.0..40.0);
                for _ in 0..k {
                    angles.push(a);
                    a += rng.random_range(20.0..(320.0 / k as f64).max(21.0));
                }
                NamedFixture {
                    name: format!("fan[{i}]x{k}"),
                    complex: open_fan(&angles),
                }
            }
            _ => {
                let a = cube_surface(Vec3::zero(), 1.0);
                let b = tet_chain(rng.random_range(1..=3));
                NamedFixture {
                    name: format!("disjoint_pair[{i}]"),
                    complex: disjoint_union(&a, &b, v(6.0, 0.0, 0.0)),
                }
            }
        };
        out.push(NamedFixture {
            name: base.name,
            complex: flip_some(&base.complex, &mut rng),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tag::{self, ExternalFusion};

    #[test]
    fn cube_has_expected_counts_and_regions() {
        let c = cube_surface(Vec3::zero(), 1.0);
        assert_eq!(c.vertex_count(), 8);
        assert_eq!(c.triangle_count(), 12);
        assert_eq!(c.edge_count(), 18);
        assert!(c.validate(1e-9, true).is_valid());
        let p = tag::region_graph(&c, ExternalFusion::Off).unwrap();
        assert_eq!(p.dual.node_count(), 2);
    }

    #[test]
    fn glued_tetrahedra_is_valid() {
        let c = glued_tetrahedra();
        assert_eq!(c.triangle_count(), 7);
        assert_eq!(c.edge_count(), 9);
        assert!(c.validate(1e-9, true).is_valid());
    }

    #[test]
    fn tet_chains_are_valid_complexes() {
        for n in 1..=8 {
            let c = tet_chain(n);
            assert_eq!(c.triangle_count(), 4 + 3 * (n - 1), "chain length {n}");
            let report = c.validate(1e-9, true);
            assert!(report.is_valid(), "chain {n}: {:?}", report.violations);
            let p = tag::region_graph(&c, ExternalFusion::Off).unwrap();
            assert_eq!(p.dual.node_count(), n + 1, "chain {n} regions");
        }
    }

    #[test]
    fn stacked_cubes_counts_and_regions() {
        for n in [1usize, 2, 5] {
            let c = stacked_cubes(n);
            assert_eq!(c.triangle_count(), 10 * n + 2);
            assert!(c.validate(1e-9, true).is_valid(), "n = {n}");
            let p = tag::region_graph(&c, ExternalFusion::On).unwrap();
            assert_eq!(p.dual.node_count(), n + 1);
            assert_eq!(p.dual.edge_count(), 10 * n + 2);
        }
    }

    #[test]
    fn seeded_suite_is_valid_and_deterministic() {
        let a = seeded_suite(8, 7);
        let b = seeded_suite(8, 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.complex, y.complex);
        }
        for f in &a {
            let report = f.complex.validate(1e-9, true);
            assert!(report.is_valid(), "{}: {:?}", f.name, report.violations);
        }
    }
}
