//! Integer matrices: Smith normal form and fraction-free elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::Matrix;
use super::LinalgError;

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![vec![BigInt::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(data: &[&[i64]]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        Self { rows, cols, data: data.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect() }
    }

    /// Converts an exact matrix whose entries are all integers.
    pub fn try_from_matrix(m: &Matrix) -> Result<Self, LinalgError> {
        let mut out = Self::zeros(m.rows(), m.cols());
        for (i, j, v) in m.triplets() {
            if !v.is_integer() {
                return Err(LinalgError::WrongRing(format!("entry ({i},{j}) = {v} is not an integer")));
            }
            out.data[i][j] = v.to_integer();
        }
        Ok(out)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "integer matrix shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i][j] += &self.data[i][k] * &rhs.data[k][j];
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.data[i][j].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.data[i][i].clone()).collect()
    }
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal, `d_i | d_{i+1}`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries (all positive).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }
}

pub fn smith_normal_form(m: &Matrix) -> Result<SmithForm, LinalgError> {
    Ok(smith_int(&IntMatrix::try_from_matrix(m)?))
}

pub fn smith_int(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block goes to (t, t)
            let Some((pi, pj)) = smallest_entry(&d, t) else {
                return SmithForm { u, d, v };
            };
            swap_rows(&mut d, &mut u, t, pi);
            swap_cols(&mut d, &mut v, t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d.data[i][t].is_zero() {
                    continue;
                }
                let q = d.data[i][t].div_floor(&d.data[t][t]);
                add_row(&mut d, &mut u, i, t, &-q);
                if !d.data[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if d.data[t][j].is_zero() {
                    continue;
                }
                let q = d.data[t][j].div_floor(&d.data[t][t]);
                add_col(&mut d, &mut v, j, t, &-q);
                if !d.data[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t and redo
            let pivot = d.data[t][t].clone();
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !d.data[i][j].is_multiple_of(&pivot)));
            match offending {
                Some(i) => add_row(&mut d, &mut u, t, i, &BigInt::one()),
                None => break,
            }
        }
        if d.data[t][t].is_negative() {
            for j in 0..cols {
                d.data[t][j] = -d.data[t][j].clone();
            }
            for j in 0..rows {
                u.data[t][j] = -u.data[t][j].clone();
            }
        }
    }
    SmithForm { u, d, v }
}

fn smallest_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for j in t..d.cols {
        for i in t..d.rows {
            let x = &d.data[i][j];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < d.data[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

fn swap_rows(d: &mut IntMatrix, u: &mut IntMatrix, a: usize, b: usize) {
    if a != b {
        d.data.swap(a, b);
        u.data.swap(a, b);
    }
}

fn swap_cols(d: &mut IntMatrix, v: &mut IntMatrix, a: usize, b: usize) {
    if a != b {
        for row in d.data.iter_mut() {
            row.swap(a, b);
        }
        for row in v.data.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// row[dst] += c * row[src]
fn add_row(d: &mut IntMatrix, u: &mut IntMatrix, dst: usize, src: usize, c: &BigInt) {
    for j in 0..d.cols {
        let x = c * &d.data[src][j];
        d.data[dst][j] += x;
    }
    for j in 0..u.cols {
        let x = c * &u.data[src][j];
        u.data[dst][j] += x;
    }
}

/// col[dst] += c * col[src]
fn add_col(d: &mut IntMatrix, v: &mut IntMatrix, dst: usize, src: usize, c: &BigInt) {
    for row in d.data.iter_mut() {
        let x = c * &row[src];
        row[dst] += x;
    }
    for row in v.data.iter_mut() {
        let x = c * &row[src];
        row[dst] += x;
    }
}

/// Fraction-free (Bareiss) elimination. Returns the rank and, for square
/// input, the determinant.
pub fn bareiss(m: &IntMatrix) -> (usize, Option<BigInt>) {
    let mut a = m.data.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut negate = false;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        if p != rank {
            a.swap(p, rank);
            negate = !negate;
        }
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let x = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = x / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    let det = (rows == cols).then(|| {
        if rank < rows {
            BigInt::zero()
        } else if negate {
            -prev.clone()
        } else {
            prev.clone()
        }
    });
    (rank, det)
}
