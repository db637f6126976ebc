//! The sliding construction: triangle adjacency graph, its connected
//! components, and the region dual multigraph with its incidence matrix.
//!
//! Every triangle contributes two side vertices (one per side of the
//! surface). Sliding over a shared edge from one triangle to the
//! rotationally next one links the facing side vertices; the connected
//! components of the resulting graph are exactly the connected regions of
//! space minus the complex. Construction is linear in the complex size.

use crate::complex::OrientedComplex2;
use crate::geometry::{self, EdgeFan, GeometryError};
use crate::scalar::Real;
use crate::sign_matrix::SparseSignMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("fan list does not cover edge {0}")]
    MissingFan(usize),
}

/// Side vertex id of a triangle: `2t` for the normal side, `2t + 1` for the
/// opposite side.
pub fn side_id(triangle: usize, sign: i8) -> usize {
    if sign > 0 {
        2 * triangle
    } else {
        2 * triangle + 1
    }
}

pub fn side_triangle(id: usize) -> usize {
    id / 2
}

pub fn side_sign(id: usize) -> i8 {
    if id % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Triangle adjacency graph on side vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagGraph {
    side_count: usize,
    edges: Vec<(usize, usize)>,
}

impl TagGraph {
    pub fn side_count(&self) -> usize {
        self.side_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Build the tag graph from precomputed edge fans.
///
/// For a fan `d1, ..., dk` (cyclic, rotationally ordered) the undirected
/// edges link the forward side of `di` to the rear side of `d(i+1)`,
/// wrapping around. A triangle whose stored orientation disagrees with the
/// edge is treated as virtually reoriented, which swaps the roles of its
/// two side vertices for that edge only.
pub fn build_tag<T: Real>(
    complex: &OrientedComplex2<T>,
    fans: &[EdgeFan],
) -> Result<TagGraph, TagError> {
    let mut covered = vec![false; complex.edge_count()];
    let mut edges = Vec::new();
    for fan in fans {
        covered[fan.edge] = true;
        let k = fan.incident.len();
        for i in 0..k {
            let (t_cur, a_cur) = fan.incident[i];
            let (t_next, a_next) = fan.incident[(i + 1) % k];
            edges.push((side_id(t_cur, a_cur), side_id(t_next, -a_next)));
        }
    }
    if let Some(e) = covered.iter().position(|&c| !c) {
        return Err(TagError::MissingFan(e));
    }
    Ok(TagGraph {
        side_count: 2 * complex.triangle_count(),
        edges,
    })
}

/// Connected components of the tag graph, each a sorted vertex set, ordered
/// by smallest contained vertex id.
pub fn components(tag: &TagGraph) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(tag.side_count());
    for &(a, b) in tag.edges() {
        uf.union(a, b);
    }
    let (labels, count) = uf.canonical_labels();
    let mut groups = vec![Vec::new(); count];
    for (v, &g) in labels.iter().enumerate() {
        groups[g].push(v);
    }
    // canonical_labels orders groups by smallest member already
    groups
}

/// Whether to fuse the unbounded-region nodes of a disconnected complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalFusion {
    Off,
    On,
}

/// Directed multigraph on tag components (or fused regions): one node per
/// component, one edge per triangle from the component holding its forward
/// side to the component holding its rear side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    node_count: usize,
    /// Indexed by triangle: (from, to) node ids. Self loops permitted.
    edges: Vec<(usize, usize)>,
    /// Side vertex ids per node, sorted.
    node_members: Vec<Vec<usize>>,
}

impl DualGraph {
    /// Build a dual graph directly from directed edges (synthetic graphs
    /// for analysis and tests; pipeline graphs come from
    /// [`build_dual_graph`]).
    pub fn from_edges(node_count: usize, edges: Vec<(usize, usize)>) -> Self {
        assert!(edges.iter().all(|&(a, b)| a < node_count && b < node_count));
        DualGraph {
            node_count,
            edges,
            node_members: vec![Vec::new(); node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, triangle: usize) -> (usize, usize) {
        self.edges[triangle]
    }

    pub fn node_members(&self, node: usize) -> &[usize] {
        &self.node_members[node]
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|(a, b)| a == b).count()
    }

    /// Node -> connected-component label map plus component count, treating
    /// edges as undirected and ignoring nothing (self loops are harmless).
    pub fn node_component_labels(&self) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.node_count);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.canonical_labels()
    }

    pub fn is_connected(&self) -> bool {
        self.node_count <= 1 || self.node_component_labels().1 == 1
    }

    /// Incidence matrix: rows are nodes, columns are triangles, +1 at the
    /// tail, -1 at the head; self-loop columns are zero.
    pub fn incidence_matrix(&self) -> SparseSignMatrix {
        let cols = self
            .edges
            .iter()
            .map(|&(from, to)| {
                if from == to {
                    Vec::new()
                } else {
                    vec![(from, 1), (to, -1)]
                }
            })
            .collect();
        SparseSignMatrix::from_columns(self.node_count, cols)
    }
}

/// Decide whether a tag component's region is unbounded.
///
/// Casts a seeded ray from a representative side point and walks its
/// transversal crossings with the component's own connected piece of the
/// complex. No own-piece crossing means the representative sees far space
/// directly; otherwise the region just beyond the farthest own-piece
/// crossing is the unbounded one, and it is this component's region exactly
/// when that crossing's far side belongs to the component. Pieces of a
/// disconnected complex are assumed not to enclose one another.
pub fn component_is_external<T: Real>(
    complex: &OrientedComplex2<T>,
    component: &[usize],
    triangle_piece: &[usize],
) -> Result<bool, TagError> {
    let rep = component[0];
    let own_piece = triangle_piece[side_triangle(rep)];
    // Validated side points guarantee the witness starts in the region
    // actually adjacent to the triangle's side.
    let (plus, minus) =
        geometry::validated_side_points(complex, side_triangle(rep)).map_err(TagError::Geometry)?;
    let sp = if side_sign(rep) > 0 { plus } else { minus };
    let crossings = geometry::ray_crossings(complex, sp.position, geometry::RAY_SEED)
        .map_err(TagError::Geometry)?;
    let last_own = crossings
        .iter()
        .rev()
        .find(|c| triangle_piece[c.triangle] == own_piece);
    match last_own {
        None => Ok(true),
        Some(c) => {
            let far_side = side_id(c.triangle, c.exit_side);
            Ok(component.binary_search(&far_side).is_ok())
        }
    }
}

/// Assemble the dual graph from tag components.
///
/// With fusion on and a disconnected complex, each component's unbounded
/// side is identified by a ray witness and all unbounded nodes are merged
/// into one, yielding the region graph. For a connected complex the
/// component graph already equals the region graph and no rays are cast.
pub fn build_dual_graph<T: Real>(
    complex: &OrientedComplex2<T>,
    tag_components: &[Vec<usize>],
    fusion: ExternalFusion,
) -> Result<DualGraph, TagError> {
    let k = tag_components.len();
    let mut comp_of_side = vec![usize::MAX; 2 * complex.triangle_count()];
    for (ci, comp) in tag_components.iter().enumerate() {
        for &v in comp {
            comp_of_side[v] = ci;
        }
    }

    let fuse = match fusion {
        ExternalFusion::Off => false,
        ExternalFusion::On => complex.triangle_components().1 > 1,
    };

    let mut node_of_comp = vec![0usize; k];
    let mut members: Vec<Vec<usize>> = Vec::new();
    if fuse {
        let (triangle_piece, _) = complex.triangle_components();
        let mut fused_node: Option<usize> = None;
        for (ci, comp) in tag_components.iter().enumerate() {
            let external = component_is_external(complex, comp, &triangle_piece)?;
            if external {
                match fused_node {
                    Some(n) => {
                        node_of_comp[ci] = n;
                        members[n].extend_from_slice(comp);
                    }
                    None => {
                        node_of_comp[ci] = members.len();
                        fused_node = Some(members.len());
                        members.push(comp.clone());
                    }
                }
            } else {
                node_of_comp[ci] = members.len();
                members.push(comp.clone());
            }
        }
        for m in &mut members {
            m.sort_unstable();
        }
    } else {
        for (ci, comp) in tag_components.iter().enumerate() {
            node_of_comp[ci] = ci;
            members.push(comp.clone());
        }
    }

    let edges = (0..complex.triangle_count())
        .map(|t| {
            let from = node_of_comp[comp_of_side[side_id(t, 1)]];
            let to = node_of_comp[comp_of_side[side_id(t, -1)]];
            (from, to)
        })
        .collect();

    Ok(DualGraph {
        node_count: members.len(),
        edges,
        node_members: members,
    })
}

/// Everything the sliding pipeline produces for one complex.
#[derive(Debug, Clone)]
pub struct RegionPipeline {
    pub fans: Vec<EdgeFan>,
    pub tag: TagGraph,
    pub components: Vec<Vec<usize>>,
    pub dual: DualGraph,
}

/// Fans, tag graph, components and dual graph in one call.
pub fn region_graph<T: Real>(
    complex: &OrientedComplex2<T>,
    fusion: ExternalFusion,
) -> Result<RegionPipeline, TagError> {
    let fans = geometry::all_edge_fans(complex).map_err(TagError::Geometry)?;
    let tag = build_tag(complex, &fans)?;
    let comps = components(&tag);
    let dual = build_dual_graph(complex, &comps, fusion)?;
    Ok(RegionPipeline {
        fans,
        tag,
        components: comps,
        dual,
    })
}

/// Union-find with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    /// Labels elements by component, components numbered in order of their
    /// smallest member. Returns (labels, component count).
    pub fn canonical_labels(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut labels = vec![0usize; n];
        let mut next = 0;
        for x in 0..n {
            let r = self.find(x);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            labels[x] = label_of_root[r];
        }
        (labels, next)
    }
}
