//! Rank, kernel, image, solve and reduced row echelon form.

use num_traits::{One, Zero};

use super::echelon::EchelonBasis;
use super::matrix::Matrix;
use super::scalar::Scalar;
use super::sparse::SparseVec;
use super::LinalgError;

pub fn rank(m: &Matrix) -> usize {
    let mut e = EchelonBasis::new();
    m.columns().iter().filter(|c| e.insert(c).is_some()).count()
}

/// Basis of `{x : m x = 0}` as the columns of a `cols × k` matrix.
///
/// Column `j` of `m` is reduced against the previous ones; each dependency
/// yields one kernel vector whose last nonzero entry sits at `j`.
pub fn kernel_basis(m: &Matrix) -> Matrix {
    Matrix::from_columns(m.cols(), kernel_vectors(m))
}

pub fn kernel_vectors(m: &Matrix) -> Vec<SparseVec> {
    let mut e = EchelonBasis::new();
    let mut out = Vec::new();
    for (j, col) in m.columns().iter().enumerate() {
        if let Err(Some(rel)) = e.insert_tagged(col, Some(SparseVec::unit(j))) {
            out.push(rel);
        }
    }
    out
}

/// The columns of `m` that are independent of the columns before them.
pub fn image_basis(m: &Matrix) -> Matrix {
    let mut e = EchelonBasis::new();
    let cols = m.columns().iter().filter(|c| e.insert(c).is_some()).cloned().collect();
    Matrix::from_columns(m.rows(), cols)
}

/// Some `x` with `m x = b`, or `None` when the system is inconsistent.
pub fn solve(m: &Matrix, b: &SparseVec) -> Result<Option<SparseVec>, LinalgError> {
    if b.support_end() > m.rows() {
        return Err(LinalgError::Shape(format!("right-hand side longer than {} rows", m.rows())));
    }
    let mut e = EchelonBasis::new();
    for (j, col) in m.columns().iter().enumerate() {
        let _ = e.insert_tagged(col, Some(SparseVec::unit(j)));
    }
    let red = e.reduce(b);
    Ok(red.residual.is_zero().then_some(red.combination))
}

pub fn solve_dense(m: &Matrix, b: &[Scalar]) -> Result<Option<Vec<Scalar>>, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::Shape(format!("right-hand side has {} entries, expected {}", b.len(), m.rows())));
    }
    Ok(solve(m, &SparseVec::from_dense(b))?.map(|x| x.to_dense(m.cols())))
}

/// Reduced row echelon form.
pub fn rref(m: &Matrix) -> Matrix {
    let mut rows = m.to_dense();
    let (nr, nc) = m.shape();
    let mut pivot_row = 0;
    for col in 0..nc {
        let Some(found) = (pivot_row..nr).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(pivot_row, found);
        let inv = Scalar::one() / rows[pivot_row][col].clone();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot) {
                *x -= &f * p;
            }
        }
        pivot_row += 1;
        if pivot_row == nr {
            break;
        }
    }
    Matrix::from_rows(nr, nc, &rows).expect("rref keeps the shape")
}
