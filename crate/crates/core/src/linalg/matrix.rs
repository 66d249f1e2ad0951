//! Column-major sparse matrices over the rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::scalar::{format_scalar, Scalar};
use super::sparse::SparseVec;
use super::LinalgError;

/// A `rows × cols` matrix stored as sparse columns.
///
/// Column `j` is the image of the `j`-th basis vector, so a matrix is read as
/// a linear map `Q^cols → Q^rows`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, columns: vec![SparseVec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: n, columns: (0..n).map(SparseVec::unit).collect() }
    }

    pub fn scalar(n: usize, c: &Scalar) -> Self {
        Self { rows: n, cols: n, columns: (0..n).map(|i| SparseVec::unit(i).scaled(c)).collect() }
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVec>) -> Self {
        debug_assert!(columns.iter().all(|c| c.support_end() <= rows));
        Self { rows, cols: columns.len(), columns }
    }

    /// Accumulates `(row, col, value)` triplets; repeated positions add up.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut per_col: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            debug_assert!(r < rows && c < cols, "triplet ({r},{c}) outside {rows}x{cols}");
            per_col[c].push((r, v));
        }
        Self { rows, cols, columns: per_col.into_iter().map(SparseVec::from_pairs).collect() }
    }

    /// Builds from dense rows. Every row must have `cols` entries.
    pub fn from_rows(rows: usize, cols: usize, data: &[Vec<Scalar>]) -> Result<Self, LinalgError> {
        if data.len() != rows || data.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape(format!("expected {rows}x{cols} entries, got {} rows", data.len())));
        }
        Ok(Self::from_triplets(
            rows,
            cols,
            data.iter().enumerate().flat_map(|(i, row)| {
                row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(j, v)| (i, j, v.clone()))
            }),
        ))
    }

    /// Convenience constructor from small integer rows (test fixtures).
    pub fn from_i64(data: &[&[i64]]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let dense: Vec<Vec<Scalar>> =
            data.iter().map(|r| r.iter().map(|&v| Scalar::from_integer(v.into())).collect()).collect();
        Self::from_rows(rows, cols, &dense).expect("ragged integer matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<SparseVec> {
        self.columns
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.columns[c].get(r)
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVec::nnz).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(SparseVec::is_zero)
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut out = vec![vec![Scalar::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col.iter() {
                out[i][j] = v.clone();
            }
        }
        out
    }

    /// Row-major `(row, col, value)` listing of the nonzero entries.
    pub fn triplets(&self) -> Vec<(usize, usize, Scalar)> {
        let mut out: Vec<_> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (i, j, v.clone())))
            .collect();
        out.sort_by_key(|(i, j, _)| (*i, *j));
        out
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, c) in v.iter() {
            out.axpy(c, &self.columns[j]);
        }
        out
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix { rows: self.rows, cols: rhs.cols, columns: rhs.columns.iter().map(|c| self.apply(c)).collect() })
    }

    /// Product, panicking on a shape mismatch. For internal use where shapes
    /// are fixed by construction.
    pub fn compose(&self, rhs: &Matrix) -> Matrix {
        self.mul(rhs).expect("composition of mismatched maps")
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            columns: self.columns.iter().zip(&rhs.columns).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, columns: self.columns.iter().map(SparseVec::neg).collect() }
    }

    pub fn scaled(&self, c: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, columns: self.columns.iter().map(|col| col.scaled(c)).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_triplets(self.cols, self.rows, self.triplets().into_iter().map(|(i, j, v)| (j, i, v)))
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut position = vec![None; self.rows];
        for (k, &r) in rows.iter().enumerate() {
            position[r] = Some(k);
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            columns: self.columns.iter().map(|c| c.remap(|i| position[i])).collect(),
        }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        Matrix { rows: self.rows, cols: cols.len(), columns: cols.iter().map(|&j| self.columns[j].clone()).collect() }
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != rhs.rows {
            return Err(LinalgError::Shape(format!("hstack of {} and {} rows", self.rows, rhs.rows)));
        }
        let mut columns = self.columns.clone();
        columns.extend(rhs.columns.iter().cloned());
        Ok(Matrix { rows: self.rows, cols: columns.len(), columns })
    }

    /// `[self ; rhs]`.
    pub fn vstack(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.cols {
            return Err(LinalgError::Shape(format!("vstack of {} and {} cols", self.cols, rhs.cols)));
        }
        let columns = self.columns.iter().zip(&rhs.columns).map(|(a, b)| a.add(&b.offset(self.rows))).collect();
        Ok(Matrix { rows: self.rows + rhs.rows, cols: self.cols, columns })
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, rhs: &Matrix) -> Matrix {
        let mut columns = self.columns.clone();
        columns.extend(rhs.columns.iter().map(|c| c.offset(self.rows)));
        Matrix { rows: self.rows + rhs.rows, cols: self.cols + rhs.cols, columns }
    }

    /// Places `block` with its top-left corner at `(row, col)` inside a
    /// `rows × cols` zero matrix.
    pub fn embed(&self, rows: usize, cols: usize, row: usize, col: usize) -> Matrix {
        let mut columns = vec![SparseVec::new(); cols];
        for (j, c) in self.columns.iter().enumerate() {
            columns[col + j] = c.offset(row);
        }
        Matrix { rows, cols, columns }
    }

    /// Dense rows as canonical strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.to_dense().iter().map(|r| r.iter().map(format_scalar).collect()).collect()
    }

    /// Nonzero entry counts per row, used for quick summaries.
    pub fn row_support(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for col in &self.columns {
            for (i, _) in col.iter() {
                *out.entry(i).or_insert(0) += 1;
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_strings() {
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_transpose() {
        let a = Matrix::from_i64(&[&[1, 2], &[0, 1], &[3, 0]]);
        let b = Matrix::from_i64(&[&[1, 0, 2], &[1, 1, 0]]);
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab, Matrix::from_i64(&[&[3, 2, 2], &[1, 1, 0], &[3, 0, 6]]));
        assert_eq!(ab.transpose().transpose(), ab);
        assert!(b.mul(&b).is_err());
    }

    #[test]
    fn stacking_and_selection() {
        let a = Matrix::from_i64(&[&[1, 2], &[3, 4]]);
        let v = a.vstack(&Matrix::identity(2)).unwrap();
        assert_eq!(v, Matrix::from_i64(&[&[1, 2], &[3, 4], &[1, 0], &[0, 1]]));
        assert_eq!(v.select_rows(&[3, 0]), Matrix::from_i64(&[&[0, 1], &[1, 2]]));
        assert_eq!(a.select_cols(&[1]), Matrix::from_i64(&[&[2], &[4]]));
        let d = a.direct_sum(&Matrix::identity(1));
        assert_eq!(d.get(2, 2), Scalar::from_integer(1.into()));
        assert_eq!(d.get(0, 2), Scalar::zero());
    }
}
