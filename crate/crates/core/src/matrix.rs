//! Dense matrices generic over a [`Scalar`], with exact Gaussian elimination.
//!
//! The same elimination code serves `BigRational` (exact rank, nullspace,
//! determinants, consistent solves) and `f64` (small dense solves). Pivot
//! choice is "first nonzero", which is deterministic and exact for rational
//! inputs; floating-point callers only use these routines on well-conditioned
//! desk-scale systems.
//!
//! Integer sign matrices additionally get a fraction-free Bareiss
//! elimination over `BigInt`, which keeps intermediate growth bounded by
//! subdeterminants and never leaves the integers.

use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::Zero;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Matrix {
            nrows,
            ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut t = Matrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn column_subset(&self, cols: &[usize]) -> Matrix<T> {
        let mut m = Matrix::zeros(self.nrows, cols.len());
        for i in 0..self.nrows {
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        let mut m = Matrix::zeros(rows.len(), cols.len());
        for (ii, &i) in rows.iter().enumerate() {
            for (jj, &j) in cols.iter().enumerate() {
                m[(ii, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    /// Stack `other` below `self`; both must have equal column counts.
    pub fn vstack(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.ncols, other.ncols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            nrows: self.nrows + other.nrows,
            ncols: self.ncols,
            data,
        }
    }

    pub fn mat_mul(&self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out: Matrix<T> = Matrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let term = a.clone() * rhs[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + term;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.ncols {
                    acc = acc + self[(i, j)].clone() * v[j].clone();
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// In-place reduced row echelon form. Returns the pivot column indices
    /// in order; their count is the rank.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0;
        for pc in 0..self.ncols {
            if pr == self.nrows {
                break;
            }
            let Some(sel) = (pr..self.nrows).find(|&r| !self[(r, pc)].is_zero()) else {
                continue;
            };
            if sel != pr {
                for j in 0..self.ncols {
                    self.data.swap(sel * self.ncols + j, pr * self.ncols + j);
                }
            }
            let inv = T::one() / self[(pr, pc)].clone();
            for j in pc..self.ncols {
                self[(pr, j)] = self[(pr, j)].clone() * inv.clone();
            }
            for r in 0..self.nrows {
                if r != pr && !self[(r, pc)].is_zero() {
                    let f = self[(r, pc)].clone();
                    for j in pc..self.ncols {
                        let delta = f.clone() * self[(pr, j)].clone();
                        self[(r, j)] = self[(r, j)].clone() - delta;
                    }
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{x : Ax = 0}`, one basis vector per row of the result.
    /// Deterministic: free variables are taken in increasing column order.
    pub fn nullspace_basis(&self) -> Matrix<T> {
        let mut r = self.clone();
        let pivots = r.rref();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.ncols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        let free: Vec<usize> = (0..self.ncols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = Matrix::zeros(free.len(), self.ncols);
        for (bi, &fc) in free.iter().enumerate() {
            basis[(bi, fc)] = T::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                basis[(bi, pc)] = T::zero() - r[(pr, fc)].clone();
            }
        }
        basis
    }

    /// Determinant by fraction elimination; panics if not square.
    pub fn determinant(&self) -> T {
        assert_eq!(self.nrows, self.ncols, "determinant of non-square matrix");
        let n = self.nrows;
        let mut m = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let Some(sel) = (k..n).find(|&r| !m[(r, k)].is_zero()) else {
                return T::zero();
            };
            if sel != k {
                for j in 0..n {
                    m.data.swap(sel * n + j, k * n + j);
                }
                det = T::zero() - det;
            }
            let pivot = m[(k, k)].clone();
            det = det * pivot.clone();
            for r in k + 1..n {
                if m[(r, k)].is_zero() {
                    continue;
                }
                let f = m[(r, k)].clone() / pivot.clone();
                for j in k..n {
                    let delta = f.clone() * m[(k, j)].clone();
                    m[(r, j)] = m[(r, j)].clone() - delta;
                }
            }
        }
        det
    }

    /// One solution of `Ax = b` if the system is consistent.
    pub fn solve_consistent(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.nrows, b.len());
        let mut aug = Matrix::zeros(self.nrows, self.ncols + 1);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.ncols)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.ncols) {
            return None; // rank jumped in the augmented column
        }
        let mut x = vec![T::zero(); self.ncols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = aug[(pr, self.ncols)].clone();
        }
        Some(x)
    }

    /// Row echelon pivot columns without full reduction (rank profile).
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.clone().rref()
    }

    /// True iff the row space of `self` equals the row space of `other`.
    pub fn same_row_space(&self, other: &Matrix<T>) -> bool {
        if self.ncols != other.ncols {
            return false;
        }
        let ra = self.rank();
        let rb = other.rank();
        ra == rb && self.vstack(other).rank() == ra
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

/// Rank of an integer matrix by fraction-free Bareiss elimination.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    bareiss(&to_bigint(rows)).rank
}

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_determinant(rows: &[Vec<i64>]) -> BigInt {
    let m = to_bigint(rows);
    let n = m.len();
    assert!(
        m.iter().all(|r| r.len() == n),
        "determinant of non-square matrix"
    );
    let out = bareiss(&m);
    if out.rank < n {
        BigInt::zero()
    } else {
        out.last_pivot
    }
}

fn to_bigint(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

struct BareissOutcome {
    rank: usize,
    /// Signed final pivot: equals the determinant for full-rank square input.
    last_pivot: BigInt,
}

fn bareiss(rows: &[Vec<BigInt>]) -> BareissOutcome {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = 1i64;
    let mut prev = BigInt::from(1);
    let mut pr = 0;
    for pc in 0..ncols {
        if pr == nrows {
            break;
        }
        let Some(sel) = (pr..nrows).find(|&r| !m[r][pc].is_zero()) else {
            continue;
        };
        if sel != pr {
            m.swap(sel, pr);
            sign = -sign;
        }
        for r in pr + 1..nrows {
            for c in pc + 1..ncols {
                let num = &m[pr][pc] * &m[r][c] - &m[r][pc] * &m[pr][c];
                m[r][c] = num / &prev;
            }
            m[r][pc] = BigInt::zero();
        }
        prev = m[pr][pc].clone();
        pr += 1;
    }
    BareissOutcome {
        rank: pr,
        last_pivot: prev * BigInt::from(sign),
    }
}

/// Pivot columns (rank profile) of an integer matrix via Bareiss steps.
pub fn bareiss_pivot_columns(rows: &[Vec<i64>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m = to_bigint(rows);
    let mut prev = BigInt::from(1);
    let mut pivots = Vec::new();
    let mut pr = 0;
    for pc in 0..ncols {
        if pr == nrows {
            break;
        }
        let Some(sel) = (pr..nrows).find(|&r| !m[r][pc].is_zero()) else {
            continue;
        };
        m.swap(sel, pr);
        for r in pr + 1..nrows {
            for c in pc + 1..ncols {
                let num = &m[pr][pc] * &m[r][c] - &m[r][pc] * &m[pr][c];
                m[r][c] = num / &prev;
            }
            m[r][pc] = BigInt::zero();
        }
        prev = m[pr][pc].clone();
        pivots.push(pc);
        pr += 1;
    }
    pivots
}
