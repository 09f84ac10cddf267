use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{invalid, LowRankError, Result};

/// Column-major dense real matrix.
///
/// Thin wrapper over [`nalgebra::DMatrix`]. Checked constructors reject
/// non-finite entries; arithmetic returns fresh matrices.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(pub(crate) DMatrix<f64>);

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    /// Builds a matrix from column-major entries.
    pub fn from_column_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("matrix must be non-empty, got {rows}x{cols}"));
        }
        if entries.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        if let Some(idx) = entries.iter().position(|x| !x.is_finite()) {
            return Err(LowRankError::NonFinite {
                row: idx % rows,
                col: idx / rows,
            });
        }
        Ok(DenseMatrix(DMatrix::from_vec(rows, cols, entries)))
    }

    /// Builds a matrix from row-major entries (convenient for literals).
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        let mut col_major = Vec::with_capacity(entries.len());
        for j in 0..cols {
            for i in 0..rows {
                col_major.push(entries[i * cols + j]);
            }
        }
        Self::from_column_major(rows, cols, col_major)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        DenseMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    /// Entries in column-major order.
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(LowRankError::DimensionMismatch {
                expected: (self.cols(), rhs.cols()),
                found: rhs.shape(),
            });
        }
        Ok(DenseMatrix(&self.0 * &rhs.0))
    }

    /// `self * rhsᵀ` without materialising the transpose.
    pub fn matmul_transposed(&self, rhs: &DenseMatrix) -> Result<Self> {
        if self.cols() != rhs.cols() {
            return Err(LowRankError::DimensionMismatch {
                expected: (rhs.rows(), self.cols()),
                found: rhs.shape(),
            });
        }
        let mut out = DMatrix::zeros(self.rows(), rhs.rows());
        out.gemm(1.0, &self.0, &rhs.0.transpose(), 0.0);
        Ok(DenseMatrix(out))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn count_nonzero(&self, threshold: f64) -> usize {
        self.0.iter().filter(|x| x.abs() > threshold).count()
    }

    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        DenseMatrix(self.0.map(f))
    }

    pub fn zip_map(&self, other: &DenseMatrix, f: impl FnMut(f64, f64) -> f64) -> Self {
        DenseMatrix(self.0.zip_map(&other.0, f))
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseMatrix(&self.0 * factor)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub(crate) fn ensure_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LowRankError::DimensionMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        match self.0.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(idx) => Err(LowRankError::NonFinite {
                row: idx % self.rows(),
                col: idx / self.rows(),
            }),
        }
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix{:?}", self.shape())?;
        if self.rows() * self.cols() <= 36 {
            write!(f, " {}", self.0)?;
        }
        Ok(())
    }
}

impl From<DMatrix<f64>> for DenseMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        DenseMatrix(m)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: f64) -> DenseMatrix {
        DenseMatrix(&self.0 * rhs)
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        DenseMatrix(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_literal_is_transposed_into_storage() {
        let m = DenseMatrix::from_row_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(m.get(0, 1), 2.0);
    }

    #[test]
    fn rejects_non_finite_and_bad_lengths() {
        assert!(matches!(
            DenseMatrix::from_column_major(2, 1, vec![1.0, f64::NAN]),
            Err(LowRankError::NonFinite { row: 1, col: 0 })
        ));
        assert!(DenseMatrix::from_column_major(2, 2, vec![1.0]).is_err());
        assert!(DenseMatrix::from_column_major(0, 2, vec![]).is_err());
    }

    #[test]
    fn matmul_transposed_matches_explicit_transpose() {
        let a = DenseMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        let b = DenseMatrix::from_fn(4, 2, |i, j| (i as f64) - (j as f64));
        let direct = a.matmul(&b.transpose()).unwrap();
        let fused = a.matmul_transposed(&b).unwrap();
        assert_eq!(direct, fused);
        assert!(a.matmul(&b).is_err());
    }
}
