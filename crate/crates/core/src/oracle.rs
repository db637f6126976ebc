//! Exact-rational ground truth for the floating-point pipeline.
//!
//! Everything here eliminates over `BigRational` or `BigInt`, so rank,
//! nullspace, determinant and independence answers are exact. The module
//! provides cycle-space bases, matroid-duality certificates, total
//! unimodularity and minimal-support (circuit) enumeration, hand-built
//! tetrahedral fixtures with their cell-dual graphs, an exact network
//! solve, and exact geometric predicates for validation oracles.

use crate::complex::OrientedComplex2;
use crate::matrix::{bareiss_determinant, bareiss_pivot_columns, bareiss_rank, Matrix};
use crate::network::DeviceSpec;
use crate::sign_matrix::SparseSignMatrix;
use crate::tag::{DualGraph, UnionFind};
use crate::vec3::Vec3;
use crate::{Rational, RationalMatrix};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} exceeds enumeration limit {limit}")]
    LimitExceeded { what: &'static str, limit: usize },
    #[error("tetrahedron {0} is not positively oriented")]
    TetNotPositivelyOriented(usize),
    #[error("face {0} is shared by more than two tetrahedra")]
    FaceSharedByMoreThanTwo(usize),
    #[error("shared face {0} does not get opposite orientations")]
    IrregularSharedFace(usize),
    #[error("fixture mismatch: {0}")]
    FixtureMismatch(String),
    #[error("device values not representable exactly")]
    DeviceNotRepresentable,
}

/// Exact rank of a sign matrix.
pub fn rank(m: &SparseSignMatrix) -> usize {
    bareiss_rank(&m.to_i64_rows())
}

/// Indices of a maximal linearly independent row subset, greedy from the
/// top. Exact integer elimination, deterministic.
pub fn independent_rows(m: &SparseSignMatrix) -> Vec<usize> {
    let t = m.transpose();
    bareiss_pivot_columns(&t.to_i64_rows())
}

/// Exact basis of `{x : A2 x = 0}`, one vector per row.
pub fn cycle_space_basis(a2: &SparseSignMatrix) -> RationalMatrix {
    a2.to_rational().nullspace_basis()
}

/// Basis (rows) of the contraction of a row space to the kept columns:
/// vectors of the space vanishing off `keep`, restricted to `keep`.
pub fn contract_columns(space: &RationalMatrix, keep: &[bool]) -> RationalMatrix {
    assert_eq!(space.ncols(), keep.len());
    let outside: Vec<usize> = (0..keep.len()).filter(|&c| !keep[c]).collect();
    let kept: Vec<usize> = (0..keep.len()).filter(|&c| keep[c]).collect();
    let m_out = space.column_subset(&outside);
    let coeffs = m_out.transpose().nullspace_basis();
    coeffs.mat_mul(&space.column_subset(&kept))
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Lexicographic k-subsets of 0..n.
struct Combinations {
    n: usize,
    k: usize,
    state: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let state = if k <= n { Some((0..k).collect()) } else { None };
        Combinations { n, k, state }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.state.clone()?;
        // advance
        let mut next = cur.clone();
        let mut i = self.k;
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            if next[i] + 1 <= self.n - (self.k - i) {
                next[i] += 1;
                for j in i + 1..self.k {
                    next[j] = next[j - 1] + 1;
                }
                self.state = Some(next);
                break;
            }
        }
        Some(cur)
    }
}

/// How thoroughly an enumeration-style check should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// Outcome of the base-complement duality check between the column matroid
/// of the 2-coboundary matrix and that of the dual incidence matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualityCertificate {
    pub ground_size: usize,
    pub rank_primary: usize,
    pub rank_dual: usize,
    pub rank_sum_ok: bool,
    pub subsets_checked: usize,
    pub exhaustive: bool,
    /// A subset violating the base-complement bijection, if any.
    pub witness: Option<Vec<usize>>,
}

impl DualityCertificate {
    pub fn is_valid(&self) -> bool {
        self.rank_sum_ok && self.witness.is_none()
    }
}

fn columns_independent(m: &SparseSignMatrix, cols: &[usize]) -> bool {
    let rows = m.to_i64_rows();
    let sub: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| cols.iter().map(|&c| r[c]).collect())
        .collect();
    bareiss_rank(&sub) == cols.len()
}

/// Check that column subsets are bases of the primary matroid exactly when
/// their complements are bases of the dual one, plus the rank sum identity.
pub fn verify_matroid_duality(
    a2: &SparseSignMatrix,
    incidence: &SparseSignMatrix,
    mode: CheckMode,
) -> Result<DualityCertificate, OracleError> {
    assert_eq!(
        a2.ncols(),
        incidence.ncols(),
        "matrices share the ground set"
    );
    let n = a2.ncols();
    let rank_primary = rank(a2);
    let rank_dual = rank(incidence);
    let rank_sum_ok = rank_primary + rank_dual == n;

    let mut witness = None;
    let mut checked = 0usize;
    let complement = |b: &[usize]| -> Vec<usize> {
        let mark: BTreeSet<usize> = b.iter().copied().collect();
        (0..n).filter(|c| !mark.contains(c)).collect()
    };
    let test = |b: &Vec<usize>| -> bool {
        let is_base = columns_independent(a2, b);
        let co_is_base = columns_independent(incidence, &complement(b));
        is_base == co_is_base
    };

    let exhaustive = match mode {
        CheckMode::Exhaustive => {
            let count = binomial(n, rank_primary).ok_or(OracleError::LimitExceeded {
                what: "base subsets",
                limit: usize::MAX,
            })?;
            if count > 2_000_000 {
                return Err(OracleError::LimitExceeded {
                    what: "base subsets",
                    limit: 2_000_000,
                });
            }
            for b in Combinations::new(n, rank_primary) {
                checked += 1;
                if !test(&b) {
                    witness = Some(b);
                    break;
                }
            }
            true
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let mut pool: Vec<usize> = (0..n).collect();
                for i in 0..rank_primary.min(n) {
                    let j = rng.random_range(i..n);
                    pool.swap(i, j);
                }
                let mut b: Vec<usize> = pool[..rank_primary].to_vec();
                b.sort_unstable();
                checked += 1;
                if !test(&b) {
                    witness = Some(b);
                    break;
                }
            }
            false
        }
    };

    Ok(DualityCertificate {
        ground_size: n,
        rank_primary,
        rank_dual,
        rank_sum_ok,
        subsets_checked: checked,
        exhaustive,
        witness,
    })
}

/// Outcome of a total-unimodularity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TuReport {
    pub totally_unimodular: bool,
    pub determinants_checked: usize,
    pub exhaustive: bool,
    /// Offending submatrix (row set, column set, determinant).
    pub witness: Option<(Vec<usize>, Vec<usize>, Rational)>,
}

/// Check that every (sampled) square subdeterminant lies in {-1, 0, +1}.
pub fn total_unimodularity_check(
    m: &RationalMatrix,
    mode: CheckMode,
) -> Result<TuReport, OracleError> {
    // Every entry is itself a 1x1 subdeterminant; a non-sign entry is an
    // immediate witness and lets the rest run over integers.
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let e = &m[(i, j)];
            if !(e.is_zero() || e.abs().is_one()) {
                return Ok(TuReport {
                    totally_unimodular: false,
                    determinants_checked: 1,
                    exhaustive: false,
                    witness: Some((vec![i], vec![j], e.clone())),
                });
            }
        }
    }
    let int_rows: Vec<Vec<i64>> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| m[(i, j)].to_integer().try_into().unwrap_or(0))
                .collect()
        })
        .collect();
    let (r, c) = (m.nrows(), m.ncols());
    let mut checked = 0usize;
    let mut witness = None;

    let test = |rows: &[usize], cols: &[usize]| -> Option<Rational> {
        let sub: Vec<Vec<i64>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| int_rows[i][j]).collect())
            .collect();
        let det = bareiss_determinant(&sub);
        if det.is_zero() || det.abs().is_one() {
            None
        } else {
            Some(Rational::from_integer(det))
        }
    };

    let exhaustive = match mode {
        CheckMode::Exhaustive => {
            if c > 12 {
                return Err(OracleError::LimitExceeded {
                    what: "exhaustive subdeterminants",
                    limit: 12,
                });
            }
            'outer: for k in 1..=r.min(c) {
                for rows in Combinations::new(r, k) {
                    for cols in Combinations::new(c, k) {
                        checked += 1;
                        if let Some(det) = test(&rows, &cols) {
                            witness = Some((rows, cols, det));
                            break 'outer;
                        }
                    }
                }
            }
            true
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let k = rng.random_range(1..=r.min(c));
                let pick = |n: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
                    let mut pool: Vec<usize> = (0..n).collect();
                    for i in 0..k {
                        let j = rng.random_range(i..n);
                        pool.swap(i, j);
                    }
                    let mut out = pool[..k].to_vec();
                    out.sort_unstable();
                    out
                };
                let rows = pick(r, &mut rng);
                let cols = pick(c, &mut rng);
                checked += 1;
                if let Some(det) = test(&rows, &cols) {
                    witness = Some((rows, cols, det));
                    break;
                }
            }
            false
        }
    };

    Ok(TuReport {
        totally_unimodular: witness.is_none(),
        determinants_checked: checked,
        exhaustive,
        witness,
    })
}

/// Standard representative matrix of the row space of `basis` with respect
/// to the column set `base`: after permuting `base` first, reduced echelon
/// form with the identity exactly on `base`. `None` if `base` is not a base
/// of the column matroid.
pub fn standard_representative(basis: &RationalMatrix, base: &[usize]) -> Option<RationalMatrix> {
    let n = basis.ncols();
    let mut perm: Vec<usize> = base.to_vec();
    perm.extend((0..n).filter(|c| !base.contains(c)));
    let mut m = basis.column_subset(&perm);
    let pivots = m.rref();
    if pivots.len() != base.len() || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    let mut out = Matrix::zeros(base.len(), n);
    for i in 0..base.len() {
        for (jj, &j) in perm.iter().enumerate() {
            out[(i, j)] = m[(i, jj)].clone();
        }
    }
    Some(out)
}

fn primitive_normal_form(v: &[Rational]) -> Vec<Rational> {
    let mut denom_lcm = BigInt::one();
    for x in v {
        if !x.is_zero() {
            let d = x.denom();
            denom_lcm = num_integer::lcm(denom_lcm, d.clone());
        }
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = num_integer::gcd(g, x.clone());
    }
    if g.is_zero() {
        return vec![Rational::zero(); v.len()];
    }
    let lead_negative = ints
        .iter()
        .find(|x| !x.is_zero())
        .map(Signed::is_negative)
        .unwrap_or(false);
    let scale = if lead_negative { -g } else { g };
    ints.into_iter()
        .map(|x| Rational::from_integer(x / scale.clone()))
        .collect()
}

/// Enumerate the minimal-support vectors (matroid circuits) of the row
/// space of `basis`, normalized to primitive integer vectors with positive
/// leading entry, sorted. Fails if more than `limit` distinct vectors
/// appear or the base enumeration is too large.
pub fn minimal_support_vectors(
    basis: &RationalMatrix,
    limit: usize,
) -> Result<Vec<Vec<Rational>>, OracleError> {
    let mut reduced = basis.clone();
    let pivots = reduced.rref();
    let r = pivots.len();
    let n = basis.ncols();
    if r == 0 {
        return Ok(Vec::new());
    }
    let row_basis = {
        let rows: Vec<Vec<Rational>> = (0..r).map(|i| reduced.row(i).to_vec()).collect();
        Matrix::from_rows(rows)
    };
    let count = binomial(n, r).ok_or(OracleError::LimitExceeded {
        what: "candidate bases",
        limit: usize::MAX,
    })?;
    if count > 200_000 {
        return Err(OracleError::LimitExceeded {
            what: "candidate bases",
            limit: 200_000,
        });
    }
    let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for base in Combinations::new(n, r) {
        let Some(q) = standard_representative(&row_basis, &base) else {
            continue;
        };
        for i in 0..q.nrows() {
            let norm = primitive_normal_form(q.row(i));
            seen.insert(norm);
            if seen.len() > limit {
                return Err(OracleError::LimitExceeded {
                    what: "minimal support vectors",
                    limit,
                });
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// True iff every entry is -1, 0 or +1 after primitive normalization,
/// which is what regularity demands of minimal-support vectors.
pub fn is_sign_vector(v: &[Rational]) -> bool {
    v.iter().all(|x| x.is_zero() || x.abs().is_one())
}

// ---------------------------------------------------------------------------
// Tetrahedral fixtures and the cell dual graph
// ---------------------------------------------------------------------------

/// Hand-built decomposition of a region into positively oriented
/// tetrahedra, with every face stored once.
#[derive(Debug, Clone)]
pub struct TetFixture {
    vertices: Vec<Vec3<f64>>,
    tets: Vec<[usize; 4]>,
    /// Distinct faces in first-seen outward orientation.
    faces: Vec<[usize; 3]>,
    /// Per face: incident tets with the sign of the stored orientation in
    /// that tet's boundary.
    face_tets: Vec<Vec<(usize, i8)>>,
}

/// +1 if `x` is an even permutation of `y`, -1 if odd.
fn triple_parity(x: [usize; 3], y: [usize; 3]) -> i8 {
    let rot0 = y;
    let rot1 = [y[1], y[2], y[0]];
    let rot2 = [y[2], y[0], y[1]];
    if x == rot0 || x == rot1 || x == rot2 {
        1
    } else {
        -1
    }
}

impl TetFixture {
    /// Validate orientation regularity and index the faces.
    pub fn new(vertices: Vec<Vec3<f64>>, tets: Vec<[usize; 4]>) -> Result<Self, OracleError> {
        for (i, t) in tets.iter().enumerate() {
            let [a, b, c, d] = t.map(|v| vertices[v]);
            let vol = b.sub(a).cross(c.sub(a)).dot(d.sub(a));
            if !(vol > 0.0) {
                return Err(OracleError::TetNotPositivelyOriented(i));
            }
        }
        let mut faces: Vec<[usize; 3]> = Vec::new();
        let mut face_tets: Vec<Vec<(usize, i8)>> = Vec::new();
        let mut index: HashMap<[usize; 3], usize> = HashMap::new();
        for (ti, t) in tets.iter().enumerate() {
            let [a, b, c, d] = *t;
            for out in [[b, c, d], [a, d, c], [a, b, d], [a, c, b]] {
                let mut key = out;
                key.sort_unstable();
                let fi = *index.entry(key).or_insert_with(|| {
                    faces.push(out);
                    face_tets.push(Vec::new());
                    faces.len() - 1
                });
                let sign = triple_parity(faces[fi], out);
                face_tets[fi].push((ti, sign));
            }
        }
        for (fi, owners) in face_tets.iter().enumerate() {
            if owners.len() > 2 {
                return Err(OracleError::FaceSharedByMoreThanTwo(fi));
            }
            if owners.len() == 2 && owners[0].1 * owners[1].1 != -1 {
                return Err(OracleError::IrregularSharedFace(fi));
            }
        }
        Ok(TetFixture {
            vertices,
            tets,
            faces,
            face_tets,
        })
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Vec3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    /// 3-coboundary matrix: rows are faces, columns are tets.
    pub fn coboundary_3(&self) -> SparseSignMatrix {
        let mut cols: Vec<Vec<(usize, i8)>> = vec![Vec::new(); self.tets.len()];
        for (fi, owners) in self.face_tets.iter().enumerate() {
            for &(ti, s) in owners {
                cols[ti].push((fi, s));
            }
        }
        SparseSignMatrix::from_columns(self.faces.len(), cols)
    }

    /// The fixture's 2-skeleton as a complex, faces in stored orientation.
    pub fn to_complex(&self) -> OrientedComplex2<f64> {
        OrientedComplex2::from_positions(self.vertices.clone(), self.faces.clone())
            .expect("fixture faces form a complex")
    }

    /// Cell dual graph: one node per tet plus the external node (last id);
    /// one directed edge per face from the side its stored orientation
    /// points away from. Returns (node count, external node id, edges per
    /// face).
    pub fn cell_dual_graph(&self) -> (usize, usize, Vec<(usize, usize)>) {
        let v_ext = self.tets.len();
        let edges = self
            .face_tets
            .iter()
            .map(|owners| match owners.as_slice() {
                // Stored orientation points out of the +1 tet, so the
                // forward side point lies in the other one.
                [(t1, 1), (t2, -1)] => (*t2, *t1),
                [(t1, -1), (t2, 1)] => (*t1, *t2),
                [(t, 1)] => (v_ext, *t),
                [(t, -1)] => (*t, v_ext),
                _ => unreachable!("validated in new()"),
            })
            .collect();
        (self.tets.len() + 1, v_ext, edges)
    }

    /// Incidence matrix of the cell dual graph (external node row last).
    pub fn cell_dual_incidence(&self) -> SparseSignMatrix {
        let (nodes, _, edges) = self.cell_dual_graph();
        let cols = edges
            .iter()
            .map(|&(from, to)| {
                if from == to {
                    Vec::new()
                } else {
                    vec![(from, 1), (to, -1)]
                }
            })
            .collect();
        SparseSignMatrix::from_columns(nodes, cols)
    }

    /// The reduced incidence matrix (external row deleted) equals the
    /// negated transpose of the 3-coboundary matrix; the sign comes from
    /// the edge direction convention (edges leave the side the face's
    /// normal points into). Row spaces coincide either way.
    pub fn verify_incidence_transpose(&self) -> bool {
        let a3t = self.coboundary_3().transpose();
        let inc = self.cell_dual_incidence();
        if a3t.nrows() != self.tets.len() || a3t.ncols() != self.faces.len() {
            return false;
        }
        for t in 0..self.tets.len() {
            for f in 0..self.faces.len() {
                let red = inc.entry(t, f);
                if red != -a3t.entry(t, f) {
                    return false;
                }
            }
        }
        // The rows (external row included) add up to the zero vector, so
        // the external row is minus the sum of the others.
        inc.column_sums().iter().all(|&s| s == 0)
    }

    /// For every subset of at most `max_tets` tetrahedra: the boundary of
    /// the union, computed through the 3-coboundary matrix, must be
    /// supported exactly on the faces belonging to exactly one subset
    /// member, with that tet's orientation sign. Returns the number of
    /// subsets checked.
    pub fn region_boundary_subset_check(&self, max_tets: usize) -> Result<usize, OracleError> {
        let n = self.tets.len();
        if n > max_tets {
            return Err(OracleError::LimitExceeded {
                what: "tet subsets",
                limit: max_tets,
            });
        }
        let a3 = self.coboundary_3();
        for mask in 0u32..(1u32 << n) {
            let indicator: Vec<i64> = (0..n).map(|t| i64::from(mask & (1 << t) != 0)).collect();
            let chain = a3.int_mat_vec(&indicator);
            for (f, owners) in self.face_tets.iter().enumerate() {
                let picked: Vec<(usize, i8)> = owners
                    .iter()
                    .copied()
                    .filter(|&(t, _)| indicator[t] == 1)
                    .collect();
                let expected = match picked.as_slice() {
                    [(_, s)] => i64::from(*s),
                    _ => 0,
                };
                if chain[f] != expected {
                    return Err(OracleError::FixtureMismatch(format!(
                        "subset {mask:#b}: face {f} coefficient {} expected {expected}",
                        chain[f]
                    )));
                }
            }
        }
        Ok(1usize << n)
    }

    /// Every exact 2-cycle of the fixture's 2-skeleton is the boundary of a
    /// rational 3-chain (solvability of `A3 w = x` for a nullspace basis).
    pub fn acyclicity_check(&self) -> bool {
        let complex = self.to_complex();
        let a2 = complex.coboundary_matrix(2);
        // Face order of the generated complex matches self.faces, so A3
        // columns line up with A2 columns.
        let a3r = self.coboundary_3().to_rational();
        let cycles = cycle_space_basis(&a2);
        for i in 0..cycles.nrows() {
            if a3r.solve_consistent(cycles.row(i)).is_none() {
                return false;
            }
        }
        // And conversely boundaries are cycles.
        a2.product_is_zero(&self.coboundary_3())
    }
}

/// Report of the fixture-versus-pipeline region graph comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellDualReport {
    pub contracted_nodes: usize,
    pub dual_nodes: usize,
    pub incidence_transpose_ok: bool,
    /// First triangle (by complex index) whose edge disagrees, if any.
    pub first_mismatch: Option<usize>,
}

impl CellDualReport {
    pub fn is_ok(&self) -> bool {
        self.incidence_transpose_ok
            && self.first_mismatch.is_none()
            && self.contracted_nodes == self.dual_nodes
    }
}

/// Contract the fixture's cell dual along faces outside the complex and
/// compare the result, edge by named edge, with the pipeline's dual graph.
pub fn cell_dual_fixture_check(
    fixture: &TetFixture,
    complex: &OrientedComplex2<f64>,
    dual: &DualGraph,
) -> Result<CellDualReport, OracleError> {
    // Match complex vertices to fixture vertices by exact position.
    let mut pos_index: HashMap<[u64; 3], usize> = HashMap::new();
    for (i, p) in fixture.vertices.iter().enumerate() {
        pos_index.insert(pos_key(*p), i);
    }
    let vmap: Vec<usize> = complex
        .vertices()
        .iter()
        .map(|v| {
            pos_index.get(&pos_key(v.pos)).copied().ok_or_else(|| {
                OracleError::FixtureMismatch(format!(
                    "complex vertex {} has no fixture vertex at its position",
                    v.label
                ))
            })
        })
        .collect::<Result<_, _>>()?;

    // Face lookup by sorted triple.
    let mut face_index: HashMap<[usize; 3], usize> = HashMap::new();
    for (fi, f) in fixture.faces.iter().enumerate() {
        let mut key = *f;
        key.sort_unstable();
        face_index.insert(key, fi);
    }
    let mut tri_face: Vec<(usize, i8)> = Vec::with_capacity(complex.triangle_count());
    let mut in_s = vec![false; fixture.face_count()];
    for tri in complex.triangles() {
        let mapped = tri.vertices.map(|v| vmap[v]);
        let mut key = mapped;
        key.sort_unstable();
        let fi = *face_index.get(&key).ok_or_else(|| {
            OracleError::FixtureMismatch(format!(
                "triangle {} is not a face of the fixture",
                tri.label
            ))
        })?;
        let parity = triple_parity(mapped, fixture.faces[fi]);
        tri_face.push((fi, parity));
        in_s[fi] = true;
    }

    // Contract the cell dual along faces outside the complex.
    let (nodes, _, edges) = fixture.cell_dual_graph();
    let mut uf = UnionFind::new(nodes);
    for (fi, &(from, to)) in edges.iter().enumerate() {
        if !in_s[fi] {
            uf.union(from, to);
        }
    }
    let (labels, contracted_nodes) = uf.canonical_labels();

    // Compare edge by edge under a consistent node bijection.
    let mut map_fd: HashMap<usize, usize> = HashMap::new();
    let mut map_df: HashMap<usize, usize> = HashMap::new();
    let mut first_mismatch = None;
    for (t, &(fi, parity)) in tri_face.iter().enumerate() {
        let (mut f_from, mut f_to) = edges[fi];
        if parity < 0 {
            std::mem::swap(&mut f_from, &mut f_to);
        }
        let (cf, ct) = (labels[f_from], labels[f_to]);
        let (df, dt) = dual.edge(t);
        let ok_pairs = [(cf, df), (ct, dt)].iter().all(|&(f, d)| {
            let fwd = *map_fd.entry(f).or_insert(d);
            let bwd = *map_df.entry(d).or_insert(f);
            fwd == d && bwd == f
        });
        let loops_match = (cf == ct) == (df == dt);
        if !ok_pairs || !loops_match {
            first_mismatch = Some(t);
            break;
        }
    }

    Ok(CellDualReport {
        contracted_nodes,
        dual_nodes: dual.node_count(),
        incidence_transpose_ok: fixture.verify_incidence_transpose(),
        first_mismatch,
    })
}

fn pos_key(p: Vec3<f64>) -> [u64; 3] {
    [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()]
}

// ---------------------------------------------------------------------------
// Exact network solve
// ---------------------------------------------------------------------------

fn rational_from_f64(x: f64) -> Result<Rational, OracleError> {
    Rational::from_float(x).ok_or(OracleError::DeviceNotRepresentable)
}

/// Exact solution of the network on the dual graph: returns (flux,
/// adjusted mmf) as rationals. Device values convert exactly from f64.
pub fn solve_network_exact(
    dual: &DualGraph,
    device: &DeviceSpec<f64>,
) -> Result<(Vec<Rational>, Vec<Rational>), OracleError> {
    let n = dual.edge_count();
    let perm: Vec<Rational> = (0..n)
        .map(|t| Ok(Rational::one() / rational_from_f64(device.reluctance[t])?))
        .collect::<Result<_, OracleError>>()?;
    let cur: Vec<Rational> = device
        .loop_current
        .iter()
        .map(|&x| rational_from_f64(x))
        .collect::<Result<_, _>>()?;
    let emf: Vec<Rational> = device
        .mmf_source
        .iter()
        .map(|&x| rational_from_f64(x))
        .collect::<Result<_, _>>()?;

    // Ground the highest node of each connected component.
    let (labels, ncomp) = dual.node_component_labels();
    let mut ground_of = vec![0usize; ncomp];
    for (node, &c) in labels.iter().enumerate() {
        ground_of[c] = ground_of[c].max(node);
    }
    let mut row_of_node = vec![usize::MAX; dual.node_count()];
    let mut kept = Vec::new();
    for node in 0..dual.node_count() {
        if ground_of[labels[node]] != node {
            row_of_node[node] = kept.len();
            kept.push(node);
        }
    }
    let nk = kept.len();
    let mut lap: RationalMatrix = Matrix::zeros(nk, nk);
    let mut rhs = vec![Rational::zero(); nk];
    for (t, &(from, to)) in dual.edges().iter().enumerate() {
        if from == to {
            continue;
        }
        let w = perm[t].clone();
        let src = emf[t].clone() - w.clone() * cur[t].clone();
        let rf = row_of_node[from];
        let rt = row_of_node[to];
        if rf != usize::MAX {
            lap[(rf, rf)] = lap[(rf, rf)].clone() + w.clone();
            rhs[rf] = rhs[rf].clone() + src.clone();
        }
        if rt != usize::MAX {
            lap[(rt, rt)] = lap[(rt, rt)].clone() + w.clone();
            rhs[rt] = rhs[rt].clone() - src.clone();
        }
        if rf != usize::MAX && rt != usize::MAX {
            lap[(rf, rt)] = lap[(rf, rt)].clone() - w.clone();
            lap[(rt, rf)] = lap[(rt, rf)].clone() - w;
        }
    }
    let q_red = lap
        .solve_consistent(&rhs)
        .expect("reduced weighted Laplacian is nonsingular");
    let mut q = vec![Rational::zero(); dual.node_count()];
    for (row, &node) in kept.iter().enumerate() {
        q[node] = q_red[row].clone();
    }
    let mut flux = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for (t, &(from, to)) in dual.edges().iter().enumerate() {
        let mt = q[from].clone() - q[to].clone();
        let f = perm[t].clone() * (mt.clone() + cur[t].clone()) - emf[t].clone();
        m.push(mt);
        flux.push(f);
    }
    Ok((flux, m))
}

// ---------------------------------------------------------------------------
// Exact geometric predicates
// ---------------------------------------------------------------------------

fn rat_point(p: Vec3<f64>) -> [Rational; 3] {
    [
        Rational::from_float(p.x).expect("finite coordinate"),
        Rational::from_float(p.y).expect("finite coordinate"),
        Rational::from_float(p.z).expect("finite coordinate"),
    ]
}

fn sub3(a: &[Rational; 3], b: &[Rational; 3]) -> [Rational; 3] {
    [
        a[0].clone() - b[0].clone(),
        a[1].clone() - b[1].clone(),
        a[2].clone() - b[2].clone(),
    ]
}

fn det3(u: &[Rational; 3], v: &[Rational; 3], w: &[Rational; 3]) -> Rational {
    u[0].clone() * (v[1].clone() * w[2].clone() - v[2].clone() * w[1].clone())
        - u[1].clone() * (v[0].clone() * w[2].clone() - v[2].clone() * w[0].clone())
        + u[2].clone() * (v[0].clone() * w[1].clone() - v[1].clone() * w[0].clone())
}

/// Sign of the signed volume of tetrahedron (a, b, c, d), exact.
pub fn exact_orient3d(a: Vec3<f64>, b: Vec3<f64>, c: Vec3<f64>, d: Vec3<f64>) -> i8 {
    let (a, b, c, d) = (rat_point(a), rat_point(b), rat_point(c), rat_point(d));
    let det = det3(&sub3(&b, &a), &sub3(&c, &a), &sub3(&d, &a));
    match det.cmp(&Rational::zero()) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Exact test: does the closed segment `pq` meet the closed triangle in a
/// transversal point? Coplanar configurations return false (they are
/// handled by separate 2D logic in the float pipeline).
pub fn exact_segment_crosses_triangle(p: Vec3<f64>, q: Vec3<f64>, tri: &[Vec3<f64>; 3]) -> bool {
    let [a, b, c] = *tri;
    let o1 = exact_orient3d(a, b, c, p);
    let o2 = exact_orient3d(a, b, c, q);
    if o1 == 0 && o2 == 0 {
        return false;
    }
    if o1 * o2 > 0 {
        return false;
    }
    let s1 = exact_orient3d(p, q, a, b);
    let s2 = exact_orient3d(p, q, b, c);
    let s3 = exact_orient3d(p, q, c, a);
    (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tag::{region_graph, ExternalFusion};

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn glued_tetrahedra_ranks_and_nullity() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let a2 = c.coboundary_matrix(2);
        let inc = p.dual.incidence_matrix();
        assert_eq!(rank(&a2), 5);
        assert_eq!(rank(&inc), 2);
        let cycles = cycle_space_basis(&a2);
        assert_eq!(cycles.nrows(), 2);
        // Incidence row space spans the cycle space.
        assert!(inc.to_rational().same_row_space(&cycles));
    }

    #[test]
    fn single_triangle_ranks() {
        let c = fixtures::open_fan(&[0.0]);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        assert_eq!(rank(&c.coboundary_matrix(2)), 1);
        assert_eq!(rank(&p.dual.incidence_matrix()), 0);
        assert_eq!(cycle_space_basis(&c.coboundary_matrix(2)).nrows(), 0);
    }

    #[test]
    fn cube_nullity_matches_region_count() {
        let c = fixtures::cube_surface(Vec3::zero(), 1.0);
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let cycles = cycle_space_basis(&c.coboundary_matrix(2));
        assert_eq!(cycles.nrows(), p.dual.node_count() - 1);
        assert_eq!(cycles.nrows(), 1);
    }

    #[test]
    fn independent_rows_are_a_row_basis() {
        let c = fixtures::glued_tetrahedra();
        let a2 = c.coboundary_matrix(2);
        let rows = independent_rows(&a2);
        assert_eq!(rows.len(), 5);
        let rat = a2.to_rational();
        let sel: Vec<Vec<Rational>> = rows.iter().map(|&r| rat.row(r).to_vec()).collect();
        let sel = Matrix::from_rows(sel);
        assert_eq!(sel.rank(), 5);
        assert!(sel.same_row_space(&rat));
    }

    #[test]
    fn duality_certificate_exhaustive() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let cert = verify_matroid_duality(
            &c.coboundary_matrix(2),
            &p.dual.incidence_matrix(),
            CheckMode::Exhaustive,
        )
        .unwrap();
        assert!(cert.is_valid(), "{cert:?}");
        assert_eq!(cert.rank_primary + cert.rank_dual, 7);
        assert_eq!(cert.subsets_checked, 21); // C(7, 5)
                                              // Self-duality failure detection: compare the coboundary with
                                              // itself; ranks 5 + 5 != 7.
        let bad = verify_matroid_duality(
            &c.coboundary_matrix(2),
            &c.coboundary_matrix(2),
            CheckMode::Exhaustive,
        )
        .unwrap();
        assert!(!bad.is_valid());
    }

    #[test]
    fn printed_determinant_two_matrix_is_flagged() {
        let rows: Vec<Vec<Rational>> = [
            [1i64, 0, 0, 0, 1],
            [1, -1, 0, 0, 0],
            [0, 1, 1, 0, 0],
            [0, 0, 1, -1, 0],
            [0, 0, 0, 1, 1],
        ]
        .iter()
        .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
        .collect();
        let m = Matrix::from_rows(rows);
        assert_eq!(m.determinant(), rat(2, 1));
        let report = total_unimodularity_check(&m, CheckMode::Exhaustive).unwrap();
        assert!(!report.totally_unimodular);
        let (rws, cls, det) = report.witness.unwrap();
        assert_eq!(det, rat(2, 1));
        assert_eq!((rws.len(), cls.len()), (5, 5));
    }

    #[test]
    fn identity_is_totally_unimodular() {
        let m = RationalMatrix::identity(4);
        let report = total_unimodularity_check(&m, CheckMode::Exhaustive).unwrap();
        assert!(report.totally_unimodular);
        assert!(report.exhaustive);
    }

    #[test]
    fn cycle_space_standard_representatives_are_tu() {
        let c = fixtures::glued_tetrahedra();
        let cycles = cycle_space_basis(&c.coboundary_matrix(2));
        // {0, 3} is a base of the rank-2 cycle space; regularity makes the
        // standard representative a sign matrix and totally unimodular.
        let q = standard_representative(&cycles, &[0, 3]).unwrap();
        let report = total_unimodularity_check(&q, CheckMode::Exhaustive).unwrap();
        assert!(report.totally_unimodular, "{report:?}");
    }

    #[test]
    fn minimal_supports_of_glued_tetrahedra() {
        let c = fixtures::glued_tetrahedra();
        let cycles = cycle_space_basis(&c.coboundary_matrix(2));
        let vecs = minimal_support_vectors(&cycles, 100).unwrap();
        assert_eq!(vecs.len(), 3);
        let supports: Vec<Vec<usize>> = vecs
            .iter()
            .map(|v| (0..7).filter(|&i| !v[i].is_zero()).collect())
            .collect();
        let mut want = [
            vec![0usize, 1, 2, 3],
            vec![3usize, 4, 5, 6],
            vec![0usize, 1, 2, 4, 5, 6],
        ];
        want.sort();
        let mut got = supports.clone();
        got.sort();
        assert_eq!(got, want);
        for v in &vecs {
            assert!(is_sign_vector(v), "{v:?}");
        }
    }

    #[test]
    fn rank_one_space_single_support() {
        let m = Matrix::from_rows(vec![vec![rat(1, 1), rat(1, 1)]]);
        let vecs = minimal_support_vectors(&m, 10).unwrap();
        assert_eq!(vecs.len(), 1);
        assert_eq!(vecs[0], vec![rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn minimal_support_limit_is_enforced() {
        let c = fixtures::glued_tetrahedra();
        let cycles = cycle_space_basis(&c.coboundary_matrix(2));
        assert!(matches!(
            minimal_support_vectors(&cycles, 2),
            Err(OracleError::LimitExceeded {
                what: "minimal support vectors",
                ..
            })
        ));
    }

    #[test]
    fn two_tet_fixture_checks() {
        let c = fixtures::glued_tetrahedra();
        let pts: Vec<Vec3<f64>> = c.vertices().iter().map(|v| v.pos).collect();
        let fixture = TetFixture::new(pts, fixtures::glued_tetrahedra_tets()).unwrap();
        assert_eq!(fixture.tet_count(), 2);
        assert_eq!(fixture.face_count(), 7);
        assert!(fixture.verify_incidence_transpose());
        assert_eq!(fixture.region_boundary_subset_check(6).unwrap(), 4);
        assert!(fixture.acyclicity_check());

        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let report = cell_dual_fixture_check(&fixture, &c, &p.dual).unwrap();
        assert!(report.is_ok(), "{report:?}");
        assert_eq!(report.contracted_nodes, 3);
    }

    #[test]
    fn two_tet_fixture_with_shared_face_removed() {
        // Dropping the shared triangle merges the two inner chambers.
        let full = fixtures::glued_tetrahedra();
        let pts: Vec<Vec3<f64>> = full.vertices().iter().map(|v| v.pos).collect();
        let outer: Vec<(u64, [u64; 3])> = full
            .triangles()
            .iter()
            .filter(|t| t.label != 3)
            .map(|t| (t.label, t.vertices.map(|v| full.vertex(v).label)))
            .collect();
        let verts: Vec<(u64, Vec3<f64>)> =
            full.vertices().iter().map(|v| (v.label, v.pos)).collect();
        let c = OrientedComplex2::new(verts, outer).unwrap();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        assert_eq!(p.dual.node_count(), 2);
        let fixture = TetFixture::new(pts, fixtures::glued_tetrahedra_tets()).unwrap();
        let report = cell_dual_fixture_check(&fixture, &c, &p.dual).unwrap();
        assert!(report.is_ok(), "{report:?}");
        assert_eq!(report.contracted_nodes, 2);
    }

    #[test]
    fn exact_network_solution_of_glued_tetrahedra() {
        let c = fixtures::glued_tetrahedra();
        let p = region_graph(&c, ExternalFusion::Off).unwrap();
        let mut device = DeviceSpec::uniform(7, 1.0);
        device.loop_current[0] = 1.0;
        let (flux, m) = solve_network_exact(&p.dual, &device).unwrap();
        let want_flux = [
            rat(11, 15),
            rat(-4, 15),
            rat(-4, 15),
            rat(-1, 5),
            rat(-1, 15),
            rat(-1, 15),
            rat(-1, 15),
        ];
        assert_eq!(flux, want_flux);
        // Exact Tellegen orthogonality.
        let inner: Rational = flux.iter().zip(&m).map(|(a, b)| a * b).sum();
        assert!(inner.is_zero());
    }

    #[test]
    fn contraction_of_spaces_matches_subcomplex() {
        // Cycle space of the fixture skeleton, contracted to the complex's
        // triangles, equals the complex's own cycle space.
        let (chain, tets) = fixtures::tet_chain_with_tets(3);
        let pts: Vec<Vec3<f64>> = chain.vertices().iter().map(|v| v.pos).collect();
        let fixture = TetFixture::new(pts, tets).unwrap();
        let fix_complex = fixture.to_complex();
        let big_cycles = cycle_space_basis(&fix_complex.coboundary_matrix(2));
        // Keep only faces that are triangles of the chain complex (all of
        // them here), then drop one to get a strict subcomplex.
        let keep: Vec<bool> = (0..fix_complex.triangle_count()).map(|t| t != 0).collect();
        let contracted = contract_columns(&big_cycles, &keep);

        let sub: Vec<(u64, [u64; 3])> = fix_complex
            .triangles()
            .iter()
            .skip(1)
            .map(|t| (t.label, t.vertices.map(|v| fix_complex.vertex(v).label)))
            .collect();
        let verts: Vec<(u64, Vec3<f64>)> = fix_complex
            .vertices()
            .iter()
            .map(|v| (v.label, v.pos))
            .collect();
        let sub_complex = OrientedComplex2::new(verts, sub).unwrap();
        let sub_cycles = cycle_space_basis(&sub_complex.coboundary_matrix(2));
        assert!(contracted.same_row_space(&sub_cycles));
    }

    #[test]
    fn exact_crossing_predicate() {
        let tri = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        ];
        assert!(exact_segment_crosses_triangle(
            Vec3::new(0.5, 0.5, -1.0),
            Vec3::new(0.5, 0.5, 1.0),
            &tri
        ));
        assert!(!exact_segment_crosses_triangle(
            Vec3::new(5.0, 5.0, -1.0),
            Vec3::new(5.0, 5.0, 1.0),
            &tri
        ));
        assert!(!exact_segment_crosses_triangle(
            Vec3::new(0.5, 0.5, 0.5),
            Vec3::new(0.5, 0.5, 1.5),
            &tri
        ));
    }

    #[test]
    fn irregular_fixture_is_rejected() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.7, 0.7, 0.7),
        ];
        assert!(TetFixture::new(pts.clone(), vec![[0, 1, 2, 3], [1, 2, 3, 4]]).is_ok());
        // Same pair with the second tet written negatively oriented.
        assert!(matches!(
            TetFixture::new(pts, vec![[0, 1, 2, 3], [1, 3, 2, 4]]),
            Err(OracleError::TetNotPositivelyOriented(1))
        ));
    }
}
