//! Linear flux/mmf networks on a 2-complex.
//!
//! A device table assigns every triangle a reluctance `r`, an optional loop
//! current source `I` and an optional mmf source `E`. The single device law
//! is
//!
//! ```text
//! flux + E = (1/r) * (m + I)
//! ```
//!
//! with `m` the current-adjusted mmf; `1/r` is the permeance. Two
//! independent solve paths produce the same `(flux, m)` pair:
//!
//! * cycle-based: nodal potentials on the region dual graph, where the
//!   reduced incidence matrix is obtained combinatorially by dropping one
//!   row per connected component;
//! * coboundary-based: potentials on an exact maximal independent row
//!   subset of the 2-coboundary matrix.
//!
//! Both reduce to symmetric positive definite systems, factored densely at
//! small sizes and solved by Jacobi-preconditioned conjugate gradients
//! above that.

use crate::complex::OrientedComplex2;
use crate::scalar::{real, Real};
use crate::sign_matrix::SparseSignMatrix;
use crate::tag::DualGraph;
use thiserror::Error;

/// Systems at most this large are solved by dense Cholesky.
pub const DIRECT_SOLVE_LIMIT: usize = 512;
/// Relative residual target of the iterative solver.
pub const ITERATIVE_RTOL: f64 = 1e-12;
/// Default acceptance tolerance for solution residuals.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid device: {0}")]
    InvalidDevice(String),
    #[error("solver failed to converge: relative residual {residual}")]
    NonConvergence { residual: f64 },
    #[error("system is not positive definite")]
    NotPositiveDefinite,
    #[error("solution residual {residual} exceeds tolerance {tolerance}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
}

/// Per-triangle device parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSpec<T> {
    /// Reluctance per triangle, strictly positive.
    pub reluctance: Vec<T>,
    /// Loop current source per triangle (defaults to zero).
    pub loop_current: Vec<T>,
    /// Mmf source per triangle (defaults to zero).
    pub mmf_source: Vec<T>,
}

impl<T: Real> DeviceSpec<T> {
    pub fn uniform(n: usize, reluctance: T) -> Self {
        DeviceSpec {
            reluctance: vec![reluctance; n],
            loop_current: vec![T::zero(); n],
            mmf_source: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.reluctance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reluctance.is_empty()
    }

    /// Permeance (inverse reluctance) of one triangle.
    pub fn permeance(&self, t: usize) -> T {
        T::one() / self.reluctance[t]
    }

    pub fn check(&self, triangle_count: usize) -> Result<(), NetworkError> {
        if self.reluctance.len() != triangle_count
            || self.loop_current.len() != triangle_count
            || self.mmf_source.len() != triangle_count
        {
            return Err(NetworkError::InvalidDevice(format!(
                "device table covers {} triangles, complex has {}",
                self.reluctance.len(),
                triangle_count
            )));
        }
        for (t, r) in self.reluctance.iter().enumerate() {
            if !(*r > T::zero()) {
                return Err(NetworkError::InvalidDevice(format!(
                    "reluctance of triangle {t} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Which potentials a solution carries.
#[derive(Debug, Clone, PartialEq)]
pub enum Potentials<T> {
    /// One potential per dual-graph node; dropped (ground) nodes hold zero.
    DualNode(Vec<T>),
    /// Multipliers on the selected coboundary rows.
    CoboundaryRow { rows: Vec<usize>, z: Vec<T> },
}

/// Paired flux / adjusted-mmf solution with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution<T> {
    pub flux: Vec<T>,
    pub adjusted_mmf: Vec<T>,
    /// `adjusted_mmf + loop_current`, the raw mmf.
    pub raw_mmf: Vec<T>,
    pub potentials: Potentials<T>,
    /// Norm of the defining constraint residual of the method used.
    pub residual: T,
}

/// Assembled positive definite system for the cycle-based path.
#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    pub matrix: SparseSpd<T>,
    pub rhs: Vec<T>,
    /// Dual node id per system row.
    pub kept_nodes: Vec<usize>,
    /// Dropped (ground) node per connected component.
    pub grounds: Vec<usize>,
}

/// Reduced incidence-weighted Laplacian and source vector.
///
/// One node per connected component of the dual graph is grounded (the
/// highest-numbered node of each component); the remaining nodes index the
/// rows. Edge weights are permeances, so the matrix is symmetric positive
/// definite whenever every reluctance is positive.
pub fn assemble_cycle_system<T: Real>(
    dual: &DualGraph,
    device: &DeviceSpec<T>,
) -> Result<AssembledSystem<T>, NetworkError> {
    device.check(dual.edge_count())?;
    let (labels, ncomp) = dual.node_component_labels();
    let mut ground_of = vec![0usize; ncomp];
    for (node, &c) in labels.iter().enumerate() {
        ground_of[c] = ground_of[c].max(node);
    }
    let grounds: Vec<usize> = {
        let mut g = ground_of.clone();
        g.sort_unstable();
        g
    };
    let mut row_of_node = vec![usize::MAX; dual.node_count()];
    let mut kept_nodes = Vec::new();
    for node in 0..dual.node_count() {
        if ground_of[labels[node]] != node {
            row_of_node[node] = kept_nodes.len();
            kept_nodes.push(node);
        }
    }

    let n = kept_nodes.len();
    let mut matrix = SparseSpd::new(n);
    let mut rhs = vec![T::zero(); n];
    for (t, &(from, to)) in dual.edges().iter().enumerate() {
        if from == to {
            continue;
        }
        let w = device.permeance(t);
        let source = device.mmf_source[t] - w * device.loop_current[t];
        let rf = row_of_node[from];
        let rt = row_of_node[to];
        if rf != usize::MAX {
            matrix.add(rf, rf, w);
            rhs[rf] = rhs[rf] + source;
        }
        if rt != usize::MAX {
            matrix.add(rt, rt, w);
            rhs[rt] = rhs[rt] - source;
        }
        if rf != usize::MAX && rt != usize::MAX {
            matrix.add(rf, rt, T::zero() - w);
            matrix.add(rt, rf, T::zero() - w);
        }
    }
    Ok(AssembledSystem {
        matrix,
        rhs,
        kept_nodes,
        grounds,
    })
}

/// Solve the network through the region dual graph.
pub fn solve_cycle_based<T: Real>(
    dual: &DualGraph,
    device: &DeviceSpec<T>,
    tol: T,
) -> Result<NetworkSolution<T>, NetworkError> {
    let system = assemble_cycle_system(dual, device)?;
    let q_reduced = system.matrix.solve(&system.rhs)?;
    let mut q = vec![T::zero(); dual.node_count()];
    for (row, &node) in system.kept_nodes.iter().enumerate() {
        q[node] = q_reduced[row];
    }
    let n = dual.edge_count();
    let mut m = vec![T::zero(); n];
    let mut flux = vec![T::zero(); n];
    let mut raw = vec![T::zero(); n];
    for t in 0..n {
        let (from, to) = dual.edge(t);
        m[t] = q[from] - q[to];
        raw[t] = m[t] + device.loop_current[t];
        flux[t] = device.permeance(t) * raw[t] - device.mmf_source[t];
    }
    // Constraint residual: net flux at every region node.
    let divergence = dual.incidence_matrix().mat_vec(&flux);
    let residual = norm2(&divergence);
    check_residual(residual, tol, device, &flux)?;
    Ok(NetworkSolution {
        flux,
        adjusted_mmf: m,
        raw_mmf: raw,
        potentials: Potentials::DualNode(q),
        residual,
    })
}

/// Solve the network through an exact maximal independent row subset of the
/// 2-coboundary matrix. Row selection uses integer elimination, never
/// floating-point rank decisions.
pub fn solve_coboundary_based<T: Real>(
    complex: &OrientedComplex2<T>,
    device: &DeviceSpec<T>,
    tol: T,
) -> Result<NetworkSolution<T>, NetworkError> {
    device.check(complex.triangle_count())?;
    let a2 = complex.coboundary_matrix(2);
    let rows = crate::oracle::independent_rows(&a2);
    let nt = complex.triangle_count();

    // Column lists of the selected-row submatrix.
    let mut row_pos = vec![usize::MAX; a2.nrows()];
    for (i, &r) in rows.iter().enumerate() {
        row_pos[r] = i;
    }
    let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); nt];
    for (t, col) in cols.iter_mut().enumerate() {
        for &(r, s) in a2.col(t) {
            if row_pos[r] != usize::MAX {
                col.push((row_pos[r], sign_to_scalar::<T>(s)));
            }
        }
    }

    let n = rows.len();
    let mut matrix = SparseSpd::new(n);
    let mut rhs = vec![T::zero(); n];
    for t in 0..nt {
        let g = device.reluctance[t];
        let src = device.loop_current[t] - g * device.mmf_source[t];
        for &(i, si) in &cols[t] {
            rhs[i] = rhs[i] + si * src;
            for &(j, sj) in &cols[t] {
                matrix.add(i, j, g * si * sj);
            }
        }
    }

    let z = matrix.solve(&rhs)?;
    let mut flux = vec![T::zero(); nt];
    for t in 0..nt {
        for &(i, si) in &cols[t] {
            flux[t] = flux[t] + si * z[i];
        }
    }
    let mut m = vec![T::zero(); nt];
    let mut raw = vec![T::zero(); nt];
    for t in 0..nt {
        m[t] = device.reluctance[t] * (flux[t] + device.mmf_source[t]) - device.loop_current[t];
        raw[t] = m[t] + device.loop_current[t];
    }
    // Constraint residual: adjusted mmf against the selected edge rows.
    let residual = {
        let full = a2.mat_vec(&m);
        rows.iter().map(|&r| full[r] * full[r]).sum::<T>().sqrt()
    };
    check_residual(residual, tol, device, &flux)?;
    Ok(NetworkSolution {
        flux,
        adjusted_mmf: m,
        raw_mmf: raw,
        potentials: Potentials::CoboundaryRow { rows, z },
        residual,
    })
}

fn check_residual<T: Real>(
    residual: T,
    tol: T,
    device: &DeviceSpec<T>,
    flux: &[T],
) -> Result<(), NetworkError> {
    let scale = solution_scale(device, flux);
    if residual > tol * scale {
        return Err(NetworkError::ResidualTooLarge {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tolerance: (tol * scale).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn sign_to_scalar<T: Real>(s: i8) -> T {
    if s > 0 {
        T::one()
    } else {
        T::zero() - T::one()
    }
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

fn solution_scale<T: Real>(device: &DeviceSpec<T>, flux: &[T]) -> T {
    let drive: T = (0..device.len())
        .map(|t| {
            let a = device.permeance(t) * device.loop_current[t];
            let b = device.mmf_source[t];
            a * a + b * b
        })
        .sum::<T>()
        .sqrt();
    norm2(flux) + drive
}

/// Orthogonality and conservation diagnostics of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct TellegenDiagnostics<T> {
    /// Inner product of flux and adjusted mmf.
    pub inner_product: T,
    pub flux_norm: T,
    pub mmf_norm: T,
    /// Net flux leaving each region node, as a vector norm.
    pub node_flux_residual: T,
    /// Residual of the adjusted mmf against the edge constraint rows.
    pub cycle_residual: T,
}

impl<T: Real> TellegenDiagnostics<T> {
    pub fn pass(&self, tol: T) -> bool {
        let scale = self.flux_norm + self.mmf_norm;
        self.inner_product.abs() <= tol * self.flux_norm * self.mmf_norm
            && self.node_flux_residual <= tol * real::<T>(4.0) * scale
            && self.cycle_residual <= tol * real::<T>(6.0) * scale
    }
}

/// Evaluate Tellegen orthogonality and both conservation laws.
pub fn tellegen_check<T: Real>(
    solution: &NetworkSolution<T>,
    a2: &SparseSignMatrix,
    incidence: &SparseSignMatrix,
) -> TellegenDiagnostics<T> {
    let inner = solution
        .flux
        .iter()
        .zip(&solution.adjusted_mmf)
        .map(|(a, b)| *a * *b)
        .sum::<T>();
    TellegenDiagnostics {
        inner_product: inner,
        flux_norm: norm2(&solution.flux),
        mmf_norm: norm2(&solution.adjusted_mmf),
        node_flux_residual: norm2(&incidence.mat_vec(&solution.flux)),
        cycle_residual: norm2(&a2.mat_vec(&solution.adjusted_mmf)),
    }
}

/// Sparse symmetric positive definite matrix in full adjacency storage.
#[derive(Debug, Clone)]
pub struct SparseSpd<T> {
    n: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> SparseSpd<T> {
    pub fn new(n: usize) -> Self {
        SparseSpd {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, j: usize, w: T) {
        if w.is_zero() {
            return;
        }
        match self.rows[i].iter_mut().find(|(c, _)| *c == j) {
            Some((_, v)) => *v = *v + w,
            None => self.rows[i].push((j, w)),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|&(_, v)| v)
            .unwrap_or_else(T::zero)
    }

    pub fn mat_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.rows[i].iter().map(|&(j, w)| w * x[j]).sum::<T>())
            .collect()
    }

    /// Solve `Ax = b`: dense Cholesky up to [`DIRECT_SOLVE_LIMIT`], then
    /// Jacobi-preconditioned conjugate gradients.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, NetworkError> {
        assert_eq!(b.len(), self.n);
        if self.n == 0 {
            return Ok(Vec::new());
        }
        if self.n <= DIRECT_SOLVE_LIMIT {
            self.solve_cholesky(b)
        } else {
            self.solve_cg(b)
        }
    }

    fn solve_cholesky(&self, b: &[T]) -> Result<Vec<T>, NetworkError> {
        let n = self.n;
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            for &(j, w) in &self.rows[i] {
                a[i * n + j] = a[i * n + j] + w;
            }
        }
        for k in 0..n {
            let mut d = a[k * n + k];
            for p in 0..k {
                d = d - a[k * n + p] * a[k * n + p];
            }
            if !(d > T::zero()) {
                return Err(NetworkError::NotPositiveDefinite);
            }
            let l = d.sqrt();
            a[k * n + k] = l;
            for i in k + 1..n {
                let mut s = a[i * n + k];
                for p in 0..k {
                    s = s - a[i * n + p] * a[k * n + p];
                }
                a[i * n + k] = s / l;
            }
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for p in 0..i {
                let delta = a[i * n + p] * y[p];
                y[i] = y[i] - delta;
            }
            y[i] = y[i] / a[i * n + i];
        }
        let mut x = y;
        for i in (0..n).rev() {
            for p in i + 1..n {
                let delta = a[p * n + i] * x[p];
                x[i] = x[i] - delta;
            }
            x[i] = x[i] / a[i * n + i];
        }
        Ok(x)
    }

    fn solve_cg(&self, b: &[T]) -> Result<Vec<T>, NetworkError> {
        let n = self.n;
        let rtol = real::<T>(ITERATIVE_RTOL);
        let b_norm = norm2(b);
        if b_norm.is_zero() {
            return Ok(vec![T::zero(); n]);
        }
        let inv_diag: Vec<T> = (0..n)
            .map(|i| {
                let d = self.entry(i, i);
                if d > T::zero() {
                    T::one() / d
                } else {
                    T::one()
                }
            })
            .collect();
        let mut x = vec![T::zero(); n];
        let mut r = b.to_vec();
        let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(a, d)| *a * *d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..(8 * n + 16) {
            if norm2(&r) <= rtol * b_norm {
                return Ok(x);
            }
            let ap = self.mat_vec(&p);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] = x[i] + alpha * p[i];
                r[i] = r[i] - alpha * ap[i];
            }
            z = r.iter().zip(&inv_diag).map(|(a, d)| *a * *d).collect();
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let residual = (norm2(&r) / b_norm).to_f64().unwrap_or(f64::NAN);
        if residual <= ITERATIVE_RTOL * 10.0 {
            Ok(x)
        } else {
            Err(NetworkError::NonConvergence { residual })
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}
