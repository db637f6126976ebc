//! Cross-module integration: end-to-end reorientation covariance, exact
//! oracle against the float pipeline across the seeded fixture family, and
//! the hand-built tetrahedral fixture files.

use num_traits::ToPrimitive;
use s2net_core::complex::{CellChain, OrientedComplex2};
use s2net_core::fixtures;
use s2net_core::io;
use s2net_core::network::{solve_cycle_based, DeviceSpec};
use s2net_core::oracle;
use s2net_core::tag::{self, region_graph, ExternalFusion};
use s2net_core::vec3::Vec3;
use s2net_core::Rational;
use std::path::Path;

fn load_fixture(name: &str) -> oracle::TetFixture {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    let text = std::fs::read_to_string(path).unwrap();
    io::parse_tets(&text).unwrap()
}

#[test]
fn reorientation_conjugates_the_solution() {
    // Reorienting a triangle and negating its sources flips exactly that
    // triangle's flux and mmf entries.
    let c = fixtures::glued_tetrahedra();
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    let mut device = DeviceSpec::uniform(7, 1.0);
    for t in 0..7 {
        device.reluctance[t] = 0.5 + 0.3 * t as f64;
    }
    device.loop_current[0] = 1.0;
    device.loop_current[3] = -2.0;
    device.mmf_source[5] = 0.75;
    let base = solve_cycle_based(&p.dual, &device, 1e-9).unwrap();

    for flip in 0..7 {
        let rc = c.reorient_triangle(flip).unwrap();
        let rp = region_graph(&rc, ExternalFusion::Off).unwrap();
        let mut rdevice = device.clone();
        rdevice.loop_current[flip] = -rdevice.loop_current[flip];
        rdevice.mmf_source[flip] = -rdevice.mmf_source[flip];
        let sol = solve_cycle_based(&rp.dual, &rdevice, 1e-9).unwrap();
        for t in 0..7 {
            let sign = if t == flip { -1.0 } else { 1.0 };
            assert!(
                (sol.flux[t] - sign * base.flux[t]).abs() < 1e-12,
                "flip {flip}, triangle {t}"
            );
            assert!(
                (sol.adjusted_mmf[t] - sign * base.adjusted_mmf[t]).abs() < 1e-12,
                "flip {flip}, triangle {t}"
            );
        }
    }
}

#[test]
fn incidence_row_space_equals_cycle_space_on_suite() {
    for f in fixtures::seeded_suite(24, 99) {
        let c = &f.complex;
        let a2 = c.coboundary_matrix(2);
        let p = region_graph(c, ExternalFusion::On).unwrap();
        let inc = p.dual.incidence_matrix();
        // Containment is exact-integer; dimension equality closes it.
        for row in inc.to_i64_rows() {
            assert!(a2.int_mat_vec(&row).iter().all(|&x| x == 0), "{}", f.name);
        }
        let nullity = c.triangle_count() - oracle::rank(&a2);
        assert_eq!(oracle::rank(&inc), nullity, "{}", f.name);
        // As rational spaces.
        let cycles = oracle::cycle_space_basis(&a2);
        assert!(inc.to_rational().same_row_space(&cycles), "{}", f.name);
    }
}

#[test]
fn tag_components_respect_known_region_membership() {
    // Cube: membership of a point is decided by coordinates.
    let c = fixtures::cube_surface(Vec3::zero(), 1.0);
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    let inside =
        |q: Vec3<f64>| q.x > 0.0 && q.x < 1.0 && q.y > 0.0 && q.y < 1.0 && q.z > 0.0 && q.z < 1.0;
    for comp in &p.components {
        let mut flags = Vec::new();
        for &side in comp {
            let sp = s2net_core::geometry::side_point(
                &c,
                tag::side_triangle(side),
                tag::side_sign(side),
            )
            .unwrap();
            flags.push(inside(sp.position));
        }
        assert!(
            flags.iter().all(|&x| x == flags[0]),
            "component mixes regions: {flags:?}"
        );
    }
}

#[test]
fn matroid_translation_cobases_are_spanning_trees() {
    // Bases of the coboundary column matroid are exactly the complements of
    // spanning trees of the region graph.
    for f in fixtures::seeded_suite(12, 5) {
        let c = &f.complex;
        let n = c.triangle_count();
        if n > 12 || c.triangle_components().1 != 1 {
            continue;
        }
        let p = region_graph(c, ExternalFusion::Off).unwrap();
        if p.dual.node_count() > 10 {
            continue;
        }
        let trees = s2net_core::dual_network::enumerate_trees(&p.dual, None, 1_000_000)
            .unwrap()
            .spanning_trees;
        let tree_sets: std::collections::BTreeSet<Vec<usize>> = trees.into_iter().collect();
        let a2 = c.coboundary_matrix(2);
        let rank = oracle::rank(&a2);
        // Every independent column set of size rank must be the complement
        // of a spanning tree, and vice versa.
        let cert = oracle::verify_matroid_duality(
            &a2,
            &p.dual.incidence_matrix(),
            oracle::CheckMode::Exhaustive,
        )
        .unwrap();
        assert!(cert.is_valid(), "{}", f.name);
        let all = all_subsets(n, rank);
        for b in all {
            let complement: Vec<usize> = (0..n).filter(|t| !b.contains(t)).collect();
            let is_base = {
                let rows = a2.to_i64_rows();
                let sub: Vec<Vec<i64>> = rows
                    .iter()
                    .map(|r| b.iter().map(|&cidx| r[cidx]).collect())
                    .collect();
                s2net_core::matrix::bareiss_rank(&sub) == b.len()
            };
            assert_eq!(
                is_base,
                tree_sets.contains(&complement),
                "{}: subset {b:?}",
                f.name
            );
        }
    }
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 <= n - (k - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn two_tet_fixture_file_matches_pipeline() {
    let fixture = load_fixture("two_tets.tets");
    assert_eq!(fixture.tet_count(), 2);
    let c = fixtures::glued_tetrahedra();
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    let report = oracle::cell_dual_fixture_check(&fixture, &c, &p.dual).unwrap();
    assert!(report.is_ok(), "{report:?}");
    assert_eq!(report.contracted_nodes, 3);
    assert!(fixture.acyclicity_check());
    assert_eq!(fixture.region_boundary_subset_check(6).unwrap(), 4);
}

#[test]
fn fixture_check_handles_opposed_orientations() {
    // Flip two triangles of the complex relative to the fixture's stored
    // face orientations; the contraction comparison must still line up
    // because edge directions are corrected by orientation parity.
    let fixture = load_fixture("two_tets.tets");
    let mut c = fixtures::glued_tetrahedra();
    for flip in [1usize, 4] {
        c = c.reorient_triangle(flip).unwrap();
    }
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    let report = oracle::cell_dual_fixture_check(&fixture, &c, &p.dual).unwrap();
    assert!(report.is_ok(), "{report:?}");
}

#[test]
fn six_tet_cube_fixture_checks() {
    let fixture = load_fixture("cube_six_tets.tets");
    assert_eq!(fixture.tet_count(), 6);
    assert!(fixture.verify_incidence_transpose());
    assert!(fixture.acyclicity_check());
    assert_eq!(fixture.region_boundary_subset_check(6).unwrap(), 64);
}

#[test]
fn kuhn_box_fixture_vs_cube_surface() {
    // 27 Kuhn-split cells filling [0,3]^3; the complex is the surface of
    // the middle cell. Contracting everything else must leave exactly the
    // inside/outside split the pipeline computes.
    let fixture = load_fixture("box3_kuhn.tets");
    assert_eq!(fixture.tet_count(), 162);
    let c = fixtures::cube_surface(Vec3::new(1.0, 1.0, 1.0), 1.0);
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    assert_eq!(p.dual.node_count(), 2);
    let report = oracle::cell_dual_fixture_check(&fixture, &c, &p.dual).unwrap();
    assert!(report.is_ok(), "{report:?}");
    assert_eq!(report.contracted_nodes, 2);
}

#[test]
fn fixture_mismatch_is_reported() {
    let fixture = load_fixture("two_tets.tets");
    // A complex whose vertices exist in the fixture but whose triangle is
    // not a fixture face.
    let c = OrientedComplex2::from_positions(
        vec![
            Vec3::new(0.25, 0.25, -1.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.25, 0.25, 1.0),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    match oracle::cell_dual_fixture_check(&fixture, &c, &p.dual) {
        Err(oracle::OracleError::FixtureMismatch(msg)) => {
            assert!(msg.contains("not a face"), "{msg}");
        }
        other => panic!("expected mismatch, got {other:?}"),
    }
}

#[test]
fn validation_agrees_with_exact_predicate_on_crossing_pair() {
    // The crossing fixture from validation, re-checked with the exact
    // rational predicate: the second triangle's edges pierce the first.
    let t1 = [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(0.0, 2.0, 0.0),
    ];
    let edges = [
        (Vec3::new(0.5, 0.2, -1.0), Vec3::new(0.5, 1.2, 1.0)),
        (Vec3::new(0.5, 0.2, -1.0), Vec3::new(0.6, 0.2, 1.0)),
        (Vec3::new(0.5, 1.2, 1.0), Vec3::new(0.6, 0.2, 1.0)),
    ];
    let crossing: Vec<bool> = edges
        .iter()
        .map(|&(p, q)| oracle::exact_segment_crosses_triangle(p, q, &t1))
        .collect();
    assert_eq!(crossing, vec![true, true, false]);

    let c = OrientedComplex2::from_positions(
        vec![t1[0], t1[1], t1[2], edges[0].0, edges[0].1, edges[1].1],
        vec![[0, 1, 2], [3, 4, 5]],
    )
    .unwrap();
    assert!(!c.validate(1e-9, true).is_valid());
}

#[test]
fn hurewicz_solvability_on_small_fixtures() {
    for name in ["two_tets.tets", "cube_six_tets.tets"] {
        let fixture = load_fixture(name);
        let complex = fixture.to_complex();
        let a2 = complex.coboundary_matrix(2);
        let cycles = oracle::cycle_space_basis(&a2);
        let a3 = fixture.coboundary_3().to_rational();
        for i in 0..cycles.nrows() {
            let w = a3
                .solve_consistent(cycles.row(i))
                .expect("cycle is a boundary");
            let back = a3.mat_vec(&w);
            assert_eq!(back, cycles.row(i).to_vec());
        }
    }
}

#[test]
fn chain_boundary_matches_matrix_action() {
    // Random sparse chains: the boundary operator agrees with the
    // coboundary matrix product, and double boundaries vanish.
    let c = fixtures::tet_chain(3);
    let a2 = c.coboundary_matrix(2);
    let a1 = c.coboundary_matrix(1);
    let mut lcg: u64 = 0x12345678;
    let mut next = || {
        lcg = lcg
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((lcg >> 33) as i64 % 9 - 4) as f64
    };
    for _ in 0..25 {
        let dense: Vec<f64> = (0..c.triangle_count()).map(|_| next()).collect();
        let chain = CellChain::from_entries(2, dense.iter().enumerate().map(|(t, &x)| (t, x)));
        let b = c.boundary(&chain).unwrap();
        let by_matrix = a2.mat_vec(&dense);
        for e in 0..c.edge_count() {
            assert_eq!(b.coeff(e), by_matrix[e]);
        }
        let bb = c.boundary(&b).unwrap();
        assert!(bb.is_zero());
        let edge_dense = b.to_dense(c.edge_count());
        let by_a1 = a1.mat_vec(&edge_dense);
        for (v, val) in by_a1.iter().enumerate() {
            assert_eq!(bb.coeff(v), *val);
        }
    }
    // Same agreement for arbitrary (non-boundary) 1-chains.
    for _ in 0..25 {
        let dense: Vec<f64> = (0..c.edge_count()).map(|_| next()).collect();
        let chain = CellChain::from_entries(1, dense.iter().enumerate().map(|(e, &x)| (e, x)));
        let b = c.boundary(&chain).unwrap();
        let by_matrix = a1.mat_vec(&dense);
        for v in 0..c.vertex_count() {
            assert_eq!(b.coeff(v), by_matrix[v]);
        }
    }
}

#[test]
fn exact_and_float_network_agree_on_scaled_devices() {
    // Homogeneity: scaling all reluctances scales mmf while fluxes keep
    // their transfer structure; verified against the exact solve.
    let c = fixtures::tet_chain(5);
    let p = region_graph(&c, ExternalFusion::Off).unwrap();
    let n = c.triangle_count();
    let mut device = DeviceSpec::uniform(n, 2.0);
    device.loop_current[2] = 3.0;
    for lambda in [1.0f64, 0.5, 8.0] {
        let mut scaled = device.clone();
        for t in 0..n {
            scaled.reluctance[t] *= lambda;
        }
        let sol = solve_cycle_based(&p.dual, &scaled, 1e-9).unwrap();
        let (exact_flux, _) = oracle::solve_network_exact(&p.dual, &scaled).unwrap();
        for t in 0..n {
            let fe = exact_flux[t].to_f64().unwrap();
            assert!((sol.flux[t] - fe).abs() <= 1e-12 * (1.0 + fe.abs()));
        }
    }
}

#[test]
fn minimal_supports_are_sign_vectors_across_suite() {
    // Regularity of both complementary spaces: every circuit of the cycle
    // space and of the row space of the edge-constraint matrix normalizes
    // to a -1/0/+1 vector, and the circuits span their space.
    for f in fixtures::seeded_suite(16, 11) {
        let c = &f.complex;
        if c.triangle_count() > 20 {
            continue;
        }
        let a2 = c.coboundary_matrix(2);
        let spaces = [oracle::cycle_space_basis(&a2), a2.to_rational()];
        for basis in &spaces {
            if basis.rank() == 0 {
                continue;
            }
            let vecs = match oracle::minimal_support_vectors(basis, 4096) {
                Ok(v) => v,
                Err(oracle::OracleError::LimitExceeded { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            assert!(!vecs.is_empty(), "{}", f.name);
            for v in &vecs {
                assert!(oracle::is_sign_vector(v), "{}: {v:?}", f.name);
            }
            let rows: Vec<Vec<Rational>> = vecs.clone();
            let m = s2net_core::matrix::Matrix::from_rows(rows);
            assert!(m.same_row_space(basis), "{}", f.name);
        }
    }
}

#[test]
fn core_types_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<s2net_core::Complex64>();
    assert_send_sync::<s2net_core::sign_matrix::SparseSignMatrix>();
    assert_send_sync::<s2net_core::tag::TagGraph>();
    assert_send_sync::<s2net_core::tag::DualGraph>();
    assert_send_sync::<s2net_core::Solution64>();
    assert_send_sync::<s2net_core::RationalMatrix>();

    // Fans may be computed concurrently across edges.
    let c = std::sync::Arc::new(fixtures::cube_surface(Vec3::zero(), 1.0));
    let handles: Vec<_> = (0..c.edge_count())
        .map(|e| {
            let c = std::sync::Arc::clone(&c);
            std::thread::spawn(move || {
                s2net_core::geometry::cyclic_order_around_edge(&c, e, 1e-9).unwrap()
            })
        })
        .collect();
    let fans: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let sequential = s2net_core::geometry::all_edge_fans(&*c).unwrap();
    assert_eq!(fans, sequential);
}
