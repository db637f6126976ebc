//! Sparse matrices with entries in {-1, +1}; absent entries are zero.
//!
//! Boundary/coboundary matrices of a complex and graph incidence matrices
//! are all of this form. Columns are stored sorted by row index, so all
//! iteration is deterministic.

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseSignMatrix {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, i8)>>,
}

impl SparseSignMatrix {
    /// Build from per-column `(row, sign)` lists. Signs must be +1 or -1 and
    /// row indices in range; entries are sorted and must not repeat.
    pub fn from_columns(nrows: usize, cols: Vec<Vec<(usize, i8)>>) -> Self {
        let mut cols = cols;
        for col in &mut cols {
            col.sort_by_key(|&(r, _)| r);
            for w in col.windows(2) {
                assert!(w[0].0 != w[1].0, "duplicate row entry in column");
            }
            for &(r, s) in col.iter() {
                assert!(r < nrows, "row index out of range");
                assert!(s == 1 || s == -1, "entries must be +1 or -1");
            }
        }
        let ncols = cols.len();
        SparseSignMatrix { nrows, ncols, cols }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.nrows == 0 || self.ncols == 0
    }

    pub fn col(&self, j: usize) -> &[(usize, i8)] {
        &self.cols[j]
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.cols[j]
            .binary_search_by_key(&i, |&(r, _)| r)
            .map(|k| self.cols[j][k].1)
            .unwrap_or(0)
    }

    /// Row-major view, computed on demand.
    pub fn row_lists(&self) -> Vec<Vec<(usize, i8)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, s) in col {
                rows[i].push((j, s));
            }
        }
        rows
    }

    pub fn transpose(&self) -> SparseSignMatrix {
        SparseSignMatrix::from_columns(
            self.ncols,
            self.row_lists()
                .into_iter()
                .map(|r| r.into_iter().collect())
                .collect(),
        )
    }

    /// Negate a single column in place.
    pub fn negate_column(&mut self, j: usize) {
        for e in &mut self.cols[j] {
            e.1 = -e.1;
        }
    }

    /// Exact integer product; `self.ncols` must equal `rhs.nrows`.
    pub fn int_product(&self, rhs: &SparseSignMatrix) -> Vec<Vec<i64>> {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out = vec![vec![0i64; rhs.ncols]; self.nrows];
        for j in 0..rhs.ncols {
            for &(k, s) in rhs.col(j) {
                for &(i, t) in self.col(k) {
                    out[i][j] += i64::from(s) * i64::from(t);
                }
            }
        }
        out
    }

    /// True iff the integer product with `rhs` is the zero matrix.
    pub fn product_is_zero(&self, rhs: &SparseSignMatrix) -> bool {
        self.int_product(rhs)
            .iter()
            .all(|r| r.iter().all(|&x| x == 0))
    }

    /// Exact integer matrix-vector product `A x` with integer `x`.
    pub fn int_mat_vec(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(self.ncols, x.len());
        let mut y = vec![0i64; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0 {
                continue;
            }
            for &(i, s) in self.col(j) {
                y[i] += i64::from(s) * xj;
            }
        }
        y
    }

    /// `A x` over any scalar type.
    pub fn mat_vec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.ncols, x.len());
        let mut y = vec![T::zero(); self.nrows];
        for (j, xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            for &(i, s) in self.col(j) {
                if s > 0 {
                    y[i] = y[i].clone() + xj.clone();
                } else {
                    y[i] = y[i].clone() - xj.clone();
                }
            }
        }
        y
    }

    /// `A^T x` over any scalar type.
    pub fn transpose_mat_vec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.nrows, x.len());
        (0..self.ncols)
            .map(|j| {
                let mut acc = T::zero();
                for &(i, s) in self.col(j) {
                    if s > 0 {
                        acc = acc + x[i].clone();
                    } else {
                        acc = acc - x[i].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        let mut rows = vec![vec![0i64; self.ncols]; self.nrows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, s) in col {
                rows[i][j] = i64::from(s);
            }
        }
        rows
    }

    pub fn to_rational(&self) -> Matrix<Rational> {
        let mut m = Matrix::zeros(self.nrows, self.ncols);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = Rational::from_integer(i64::from(s).into());
            }
        }
        m
    }

    /// Dense rows over a float type, for small verification-path systems.
    pub fn to_dense<T: Scalar>(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.nrows, self.ncols);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = if s > 0 {
                    T::one()
                } else {
                    T::zero() - T::one()
                };
            }
        }
        m
    }

    /// Sum of each row as integers.
    pub fn row_sums(&self) -> Vec<i64> {
        let mut sums = vec![0i64; self.nrows];
        for col in &self.cols {
            for &(i, s) in col {
                sums[i] += i64::from(s);
            }
        }
        sums
    }

    /// Sum of each column; all zero exactly when the rows add up to the
    /// zero vector (the incidence-matrix identity).
    pub fn column_sums(&self) -> Vec<i64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(_, s)| i64::from(s)).sum())
            .collect()
    }
}
