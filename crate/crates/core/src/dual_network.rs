//! Nodal analysis on the region dual graph and the spanning-tree identity
//! for the equivalent inverse reluctance seen by a single loop source.
//!
//! The dual network treats each triangle as a graph edge carrying the
//! triangle's flux as a current and its adjusted mmf as a voltage drop,
//! with conductance equal to the permeance `1/r`. A loop-current source on
//! triangle `d` appears as a voltage source in series with the edge's
//! resistor, so the transfer ratio `g = flux_d / i` is
//!
//! ```text
//! g = g_d * (sum over spanning trees avoiding d of their conductance
//!            products) / (sum over all spanning trees of theirs)
//! ```
//!
//! which the module evaluates three independent ways: direct nodal solve,
//! explicit tree/2-tree enumeration, and weighted matrix-tree determinants
//! in exact rational arithmetic.

use crate::matrix::Matrix;
use crate::network::{solve_cycle_based, DeviceSpec, NetworkError, NetworkSolution};
use crate::scalar::Real;
use crate::tag::DualGraph;
use crate::{Rational, RationalMatrix};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exhaustive tree enumeration is limited to this many nodes.
pub const TREE_ENUM_NODE_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualNetworkError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(
        "graph has {nodes} nodes; enumeration is limited to {limit} (use the matrix-tree route)"
    )]
    TooManyNodes { nodes: usize, limit: usize },
    #[error("enumeration produced more than {0} trees")]
    TreeLimit(usize),
    #[error("dual graph is disconnected")]
    Disconnected,
    #[error("unknown triangle {0}")]
    UnknownTriangle(usize),
    #[error("device values not representable exactly")]
    DeviceNotRepresentable,
}

/// Spanning trees (and optionally 2-trees) of a multigraph, as edge id sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEnumeration {
    pub node_count: usize,
    pub spanning_trees: Vec<Vec<usize>>,
    /// Present when a separating pair was requested: spanning forests with
    /// exactly two components that separate the pair.
    pub two_trees: Option<Vec<Vec<usize>>>,
}

/// Solve the network by nodal analysis of the dual graph.
///
/// Same equations as the cycle-based path (the network and its dual share
/// solutions), assembled through the dual-graph view.
pub fn dual_solve<T: Real>(
    dual: &DualGraph,
    device: &DeviceSpec<T>,
    tol: T,
) -> Result<NetworkSolution<T>, DualNetworkError> {
    Ok(solve_cycle_based(dual, device, tol)?)
}

/// List every spanning tree of the dual graph; self loops never enter.
/// With `separating`, also list the 2-trees separating that node pair.
pub fn enumerate_trees(
    dual: &DualGraph,
    separating: Option<(usize, usize)>,
    limit: usize,
) -> Result<TreeEnumeration, DualNetworkError> {
    let n = dual.node_count();
    if n > TREE_ENUM_NODE_LIMIT {
        return Err(DualNetworkError::TooManyNodes {
            nodes: n,
            limit: TREE_ENUM_NODE_LIMIT,
        });
    }
    let edges: Vec<(usize, usize)> = dual.edges().to_vec();
    let mut trees = Vec::new();
    let mut chosen = Vec::new();

    // Include/exclude recursion over the edge list with a union-find
    // snapshot per inclusion; equivalent to deletion/contraction but the
    // accumulated edge set names the tree directly.
    fn recurse(
        edges: &[(usize, usize)],
        idx: usize,
        n_nodes: usize,
        parent: &mut Vec<usize>,
        joined: usize,
        chosen: &mut Vec<usize>,
        trees: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<(), DualNetworkError> {
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
                r
            } else {
                x
            }
        }
        if joined + 1 == n_nodes {
            if trees.len() >= limit {
                return Err(DualNetworkError::TreeLimit(limit));
            }
            trees.push(chosen.clone());
            return Ok(());
        }
        if idx == edges.len() || edges.len() - idx < n_nodes - 1 - joined {
            return Ok(());
        }
        let (a, b) = edges[idx];
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            let snapshot = parent.clone();
            parent[ra] = rb;
            chosen.push(idx);
            recurse(
                edges,
                idx + 1,
                n_nodes,
                parent,
                joined + 1,
                chosen,
                trees,
                limit,
            )?;
            chosen.pop();
            *parent = snapshot;
        }
        recurse(
            edges,
            idx + 1,
            n_nodes,
            parent,
            joined,
            chosen,
            trees,
            limit,
        )
    }

    let mut parent: Vec<usize> = (0..n).collect();
    if n > 0 {
        recurse(&edges, 0, n, &mut parent, 0, &mut chosen, &mut trees, limit)?;
    }

    let two_trees = separating.map(|(s, t)| {
        // Every 2-tree separating (s, t) is a spanning tree minus the one
        // tree edge on its s-t path; dedupe across trees.
        let mut seen = std::collections::BTreeSet::new();
        for tree in &trees {
            for drop in tree {
                let rest: Vec<usize> = tree.iter().copied().filter(|e| e != drop).collect();
                if separates(&rest, n, &edges, s, t) {
                    seen.insert(rest);
                }
            }
        }
        seen.into_iter().collect()
    });

    Ok(TreeEnumeration {
        node_count: n,
        spanning_trees: trees,
        two_trees,
    })
}

fn separates(edge_set: &[usize], n: usize, edges: &[(usize, usize)], s: usize, t: usize) -> bool {
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut Vec<usize>, x: usize) -> usize {
        if uf[x] != x {
            let r = find(uf, uf[x]);
            uf[x] = r;
            r
        } else {
            x
        }
    }
    for &e in edge_set {
        let (a, b) = edges[e];
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra] = rb;
    }
    find(&mut uf, s) != find(&mut uf, t)
}

fn permeances_exact(device: &DeviceSpec<f64>) -> Result<Vec<Rational>, DualNetworkError> {
    device
        .reluctance
        .iter()
        .map(|&r| {
            Rational::from_float(r)
                .filter(|x| !x.is_zero())
                .map(|x| Rational::one() / x)
                .ok_or(DualNetworkError::DeviceNotRepresentable)
        })
        .collect()
}

/// Weighted spanning-tree sum by the matrix-tree determinant of the reduced
/// weighted Laplacian, exact. Self loops are ignored; `skip` excludes one
/// edge entirely.
pub fn matrix_tree_sum(dual: &DualGraph, weights: &[Rational], skip: Option<usize>) -> Rational {
    let n = dual.node_count();
    if n <= 1 {
        return Rational::one();
    }
    let mut lap: RationalMatrix = Matrix::zeros(n - 1, n - 1);
    for (t, &(a, b)) in dual.edges().iter().enumerate() {
        if Some(t) == skip || a == b {
            continue;
        }
        let w = weights[t].clone();
        if a < n - 1 {
            lap[(a, a)] = lap[(a, a)].clone() + w.clone();
        }
        if b < n - 1 {
            lap[(b, b)] = lap[(b, b)].clone() + w.clone();
        }
        if a < n - 1 && b < n - 1 {
            lap[(a, b)] = lap[(a, b)].clone() - w.clone();
            lap[(b, a)] = lap[(b, a)].clone() - w;
        }
    }
    lap.determinant()
}

/// The three routes to the equivalent inverse reluctance, plus their spread.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseReluctanceReport {
    pub triangle: usize,
    /// Direct nodal solve with a unit loop current.
    pub direct: f64,
    /// Tree / 2-tree enumeration, when the graph is small enough.
    pub enumeration: Option<f64>,
    /// Weighted matrix-tree determinants (exact, then rounded).
    pub matrix_tree: f64,
    /// True when the triangle is a self loop and the closed form applies.
    pub self_loop: bool,
}

impl InverseReluctanceReport {
    /// Largest relative disagreement between the available routes.
    pub fn spread(&self) -> f64 {
        let mut vals = vec![self.direct, self.matrix_tree];
        if let Some(e) = self.enumeration {
            vals.push(e);
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = vals
            .iter()
            .fold(0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        (hi - lo) / scale
    }
}

/// Transfer ratio `g` with `flux_d = g * i` for a unit loop current on one
/// triangle and no other sources, evaluated by direct solve, by tree
/// enumeration (graphs up to [`TREE_ENUM_NODE_LIMIT`] nodes), and by
/// matrix-tree determinants.
///
/// A self-loop triangle has `m = 0` forced, so `g = 1/r` in closed form.
pub fn equivalent_inverse_reluctance(
    dual: &DualGraph,
    device: &DeviceSpec<f64>,
    triangle: usize,
) -> Result<InverseReluctanceReport, DualNetworkError> {
    if triangle >= dual.edge_count() {
        return Err(DualNetworkError::UnknownTriangle(triangle));
    }
    device
        .check(dual.edge_count())
        .map_err(DualNetworkError::Network)?;
    if !dual.is_connected() {
        return Err(DualNetworkError::Disconnected);
    }

    let mut drive = device.clone();
    for t in 0..drive.len() {
        drive.loop_current[t] = if t == triangle { 1.0 } else { 0.0 };
        drive.mmf_source[t] = 0.0;
    }
    let direct = solve_cycle_based(dual, &drive, 1e-9)?.flux[triangle];

    let (from, to) = dual.edge(triangle);
    if from == to {
        let g = 1.0 / device.reluctance[triangle];
        return Ok(InverseReluctanceReport {
            triangle,
            direct,
            enumeration: Some(g),
            matrix_tree: g,
            self_loop: true,
        });
    }

    let weights = permeances_exact(device)?;
    let g_d = weights[triangle].clone();

    // Matrix-tree route: g = g_d * D' / D with D' skipping the edge.
    let total = matrix_tree_sum(dual, &weights, None);
    let avoiding = matrix_tree_sum(dual, &weights, Some(triangle));
    let matrix_tree = (g_d.clone() * avoiding / total.clone())
        .to_f64()
        .unwrap_or(f64::NAN);

    // Enumeration route: same ratio assembled from explicit tree products
    // and 2-tree products (D = D' + g_d * N).
    let enumeration = match enumerate_trees(dual, Some((from, to)), 2_000_000) {
        Ok(enumeration) => {
            let product = |set: &[usize]| -> Rational {
                set.iter()
                    .map(|&e| weights[e].clone())
                    .fold(Rational::one(), |a, b| a * b)
            };
            let avoid_sum: Rational = enumeration
                .spanning_trees
                .iter()
                .filter(|t| !t.contains(&triangle))
                .map(|t| product(t))
                .sum();
            let two_tree_sum: Rational = enumeration
                .two_trees
                .as_ref()
                .expect("requested")
                .iter()
                .map(|t| product(t))
                .sum();
            let denom = avoid_sum.clone() + g_d.clone() * two_tree_sum;
            Some(
                (g_d.clone() * avoid_sum / denom)
                    .to_f64()
                    .unwrap_or(f64::NAN),
            )
        }
        Err(DualNetworkError::TooManyNodes { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(InverseReluctanceReport {
        triangle,
        direct,
        enumeration,
        matrix_tree,
        self_loop: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tag::{region_graph, ExternalFusion};

    fn close(a: f64, b: f64, tol: f64) {
        let scale = 1.0f64.max(a.abs()).max(b.abs());
        assert!((a - b).abs() <= tol * scale, "{a} vs {b}");
    }

    #[test]
    fn dual_solve_matches_cycle_solve() {
        let c = fixtures::tet_chain(3);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let n = c.triangle_count();
        let mut device = DeviceSpec::uniform(n, 2.0);
        device.loop_current[1] = 1.0;
        device.mmf_source[4] = 0.5;
        let a = dual_solve(&p.dual, &device, 1e-9).unwrap();
        let b = solve_cycle_based(&p.dual, &device, 1e-9).unwrap();
        assert_eq!(a.flux, b.flux);
        assert_eq!(a.adjusted_mmf, b.adjusted_mmf);
    }

    #[test]
    fn triangle_graph_has_three_trees() {
        let g = crate::tag::DualGraph::from_edges(3, vec![(0, 1), (1, 2), (0, 2)]);
        let enumeration = enumerate_trees(&g, None, 100).unwrap();
        assert_eq!(enumeration.spanning_trees.len(), 3);
        let unit: Vec<Rational> = vec![Rational::one(); 3];
        assert_eq!(
            matrix_tree_sum(&g, &unit, None),
            Rational::from_integer(3.into())
        );
    }

    #[test]
    fn tree_input_has_one_spanning_tree() {
        let g = crate::tag::DualGraph::from_edges(4, vec![(0, 1), (1, 2), (1, 3)]);
        let enumeration = enumerate_trees(&g, None, 100).unwrap();
        assert_eq!(enumeration.spanning_trees, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn glued_tetrahedra_tree_count_matches_determinant() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let enumeration = enumerate_trees(&p.dual, None, 1_000_000).unwrap();
        let unit: Vec<Rational> = vec![Rational::one(); 7];
        let count = matrix_tree_sum(&p.dual, &unit, None);
        assert_eq!(
            Rational::from_integer((enumeration.spanning_trees.len() as i64).into()),
            count
        );
        assert_eq!(enumeration.spanning_trees.len(), 15);
        for tree in &enumeration.spanning_trees {
            assert_eq!(tree.len(), 2);
        }
    }

    #[test]
    fn path_graph_single_tree() {
        // One-node dual of a fan: the empty tree.
        let c = fixtures::open_fan(&[0.0, 120.0]);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        assert_eq!(p.dual.node_count(), 1);
        let enumeration = enumerate_trees(&p.dual, None, 10).unwrap();
        assert_eq!(enumeration.spanning_trees, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn two_node_parallel_pair_is_a_series_combination() {
        // Loop source on one of two unit-reluctance parallel edges: the
        // source sees the other edge in series, so g = 1/(1 + 1). Tree
        // products {1, 1}, 2-tree products {1}.
        let g = crate::tag::DualGraph::from_edges(2, vec![(0, 1), (0, 1)]);
        let device = DeviceSpec::uniform(2, 1.0);
        let report = equivalent_inverse_reluctance(&g, &device, 0).unwrap();
        close(report.direct, 0.5, 1e-12);
        close(report.enumeration.unwrap(), 0.5, 1e-15);
        close(report.matrix_tree, 0.5, 1e-15);
        let enumeration = enumerate_trees(&g, Some((0, 1)), 10).unwrap();
        assert_eq!(enumeration.spanning_trees.len(), 2);
        assert_eq!(enumeration.two_trees.unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn parallel_pair_transfer_ratio() {
        // The 2-node dual of a cube has 12 parallel unit edges; trees are
        // the single edges and trees avoiding edge 0 number 11.
        let c = fixtures::cube_surface(crate::vec3::Vec3::zero(), 1.0);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        assert_eq!(p.dual.node_count(), 2);
        let device = DeviceSpec::uniform(12, 1.0);
        let report = equivalent_inverse_reluctance(&p.dual, &device, 0).unwrap();
        close(report.matrix_tree, 11.0 / 12.0, 1e-15);
        close(report.direct, 11.0 / 12.0, 1e-12);
        close(report.enumeration.unwrap(), 11.0 / 12.0, 1e-15);
        assert!(report.spread() < 1e-12);
    }

    #[test]
    fn mixed_reluctance_routes_agree() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let mut device = DeviceSpec::uniform(7, 1.0);
        device.reluctance = vec![1.0, 2.0, 4.0, 8.0, 1.0, 2.0, 4.0];
        let report = equivalent_inverse_reluctance(&p.dual, &device, 0).unwrap();
        close(report.direct, report.matrix_tree, 1e-12);
        close(report.direct, report.enumeration.unwrap(), 1e-12);
    }

    #[test]
    fn enumeration_limits_are_enforced() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        assert!(matches!(
            enumerate_trees(&p.dual, None, 3),
            Err(DualNetworkError::TreeLimit(3))
        ));
        let big = crate::tag::DualGraph::from_edges(11, (0..10).map(|i| (i, i + 1)).collect());
        assert!(matches!(
            enumerate_trees(&big, None, 100),
            Err(DualNetworkError::TooManyNodes { nodes: 11, .. })
        ));
    }

    #[test]
    fn self_loop_closed_form() {
        let c = fixtures::open_fan(&[10.0]);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let device = DeviceSpec::uniform(1, 4.0);
        let report = equivalent_inverse_reluctance(&p.dual, &device, 0).unwrap();
        assert!(report.self_loop);
        close(report.direct, 0.25, 1e-12);
        close(report.matrix_tree, 0.25, 1e-15);
    }

    #[test]
    fn glued_tetrahedra_unit_ratio_is_11_over_15() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let device = DeviceSpec::uniform(7, 1.0);
        let report = equivalent_inverse_reluctance(&p.dual, &device, 0).unwrap();
        close(report.direct, 11.0 / 15.0, 1e-12);
        close(report.enumeration.unwrap(), 11.0 / 15.0, 1e-15);
        close(report.matrix_tree, 11.0 / 15.0, 1e-15);
        assert!(report.spread() <= 1e-12);
    }

    #[test]
    fn scaling_reluctances_scales_the_ratio() {
        let c = fixtures::tet_chain(3);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let n = c.triangle_count();
        let base = DeviceSpec::uniform(n, 1.5);
        let scaled = DeviceSpec::uniform(n, 4.5);
        let a = equivalent_inverse_reluctance(&p.dual, &base, 2).unwrap();
        let b = equivalent_inverse_reluctance(&p.dual, &scaled, 2).unwrap();
        close(a.matrix_tree / 3.0, b.matrix_tree, 1e-12);
    }

    #[test]
    fn trees_never_contain_self_loops() {
        let c = fixtures::open_fan(&[0.0, 90.0, 180.0]);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let enumeration = enumerate_trees(&p.dual, None, 100).unwrap();
        for t in &enumeration.spanning_trees {
            assert!(t.is_empty());
        }
    }
}
