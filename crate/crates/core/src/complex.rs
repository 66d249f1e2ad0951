//! Finite cochain complexes of free modules and block layouts of their bases.

use std::borrow::Cow;
use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;

use crate::linalg::{cohomology_step, rank, CohomologyBasis, CohomologyStep, LinalgError, Matrix, Ring};

/// Ordered keyed blocks of a basis: block `i` has key `keys[i]`, starts at
/// `offsets[i]` and spans `widths[i]` coordinates.
#[derive(Clone, Debug, Default)]
pub struct BlockLayout<K: Hash + Eq> {
    keys: Vec<K>,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    index: HashMap<K, usize>,
    total: usize,
}

impl<K: Hash + Eq + Clone> BlockLayout<K> {
    pub fn new(blocks: impl IntoIterator<Item = (K, usize)>) -> Self {
        let mut layout =
            Self { keys: Vec::new(), offsets: Vec::new(), widths: Vec::new(), index: HashMap::new(), total: 0 };
        for (key, width) in blocks {
            layout.index.insert(key.clone(), layout.keys.len());
            layout.keys.push(key);
            layout.offsets.push(layout.total);
            layout.widths.push(width);
            layout.total += width;
        }
        layout
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn block(&self, i: usize) -> (&K, usize, usize) {
        (&self.keys[i], self.offsets[i], self.widths[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, usize, usize)> + '_ {
        (0..self.keys.len()).map(move |i| self.block(i))
    }

    /// `(offset, width)` of the block with this key.
    pub fn find(&self, key: &K) -> Option<(usize, usize)> {
        self.index.get(key).map(|&i| (self.offsets[i], self.widths[i]))
    }

    pub fn offset_of(&self, key: &K) -> Option<usize> {
        self.index.get(key).map(|&i| self.offsets[i])
    }

    /// Block index and coordinate within it of a basis position.
    pub fn locate(&self, position: usize) -> Option<(usize, usize)> {
        if position >= self.total {
            return None;
        }
        let i = self.offsets.partition_point(|&o| o <= position) - 1;
        // skip zero-width blocks sharing the offset
        let i = (i..self.keys.len()).find(|&j| self.widths[j] > 0 && self.offsets[j] <= position)?;
        Some((i, position - self.offsets[i]))
    }
}

/// `C^0 → C^1 → … → C^{N-1}`; `diffs[k]: C^k → C^{k+1}` (the last one maps
/// to the zero module).
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    dims: Vec<usize>,
    diffs: Vec<Matrix>,
}

impl Complex {
    /// `diffs[k]` must be `dims[k+1] × dims[k]`; missing trailing maps are
    /// zero.
    pub fn new(dims: Vec<usize>, mut diffs: Vec<Matrix>) -> Result<Self, LinalgError> {
        if diffs.len() > dims.len() {
            return Err(LinalgError::Shape(format!("{} differentials for {} degrees", diffs.len(), dims.len())));
        }
        while diffs.len() < dims.len() {
            let k = diffs.len();
            diffs.push(Matrix::zeros(dims.get(k + 1).copied().unwrap_or(0), dims[k]));
        }
        for (k, d) in diffs.iter().enumerate() {
            let expected = (dims.get(k + 1).copied().unwrap_or(0), dims[k]);
            if d.shape() != expected {
                return Err(LinalgError::Shape(format!(
                    "d^{k} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    expected.0,
                    expected.1
                )));
            }
        }
        Ok(Self { dims, diffs })
    }

    pub fn zero() -> Self {
        Self { dims: Vec::new(), diffs: Vec::new() }
    }

    /// Number of stored degrees (`0..len`).
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims.get(k).copied().unwrap_or(0)
    }

    /// `d: C^k → C^{k+1}`.
    pub fn d(&self, k: usize) -> Cow<'_, Matrix> {
        match self.diffs.get(k) {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::zeros(self.dim(k + 1), self.dim(k))),
        }
    }

    /// `d: C^{k-1} → C^k`.
    pub fn d_in(&self, k: usize) -> Cow<'_, Matrix> {
        if k == 0 {
            Cow::Owned(Matrix::zeros(self.dim(0), 0))
        } else {
            self.d(k - 1)
        }
    }

    /// First degree where `d∘d ≠ 0`, if any.
    pub fn d_squared_failure(&self) -> Option<usize> {
        (0..self.len().saturating_sub(1)).find(|&k| !self.d(k + 1).compose(&self.d(k)).is_zero())
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.diffs.par_iter().map(rank).collect()
    }

    /// Rational Betti numbers from ranks alone.
    pub fn betti(&self) -> Vec<usize> {
        let ranks = self.ranks();
        (0..self.len()).map(|k| self.dims[k] - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.betti().iter().all(|&b| b == 0)
    }

    pub fn cohomology(&self, ring: Ring) -> Result<Vec<CohomologyStep>, LinalgError> {
        (0..self.len()).into_par_iter().map(|k| cohomology_step(&self.d_in(k), &self.d(k), ring)).collect()
    }

    pub fn cohomology_basis(&self, k: usize) -> Result<CohomologyBasis, LinalgError> {
        CohomologyBasis::new(&self.d_in(k), &self.d(k))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }

    /// `C[-1]`: degree `n` holds `C^{n-1}`, same (unsigned) differential.
    pub fn shifted(&self) -> Complex {
        let mut dims = vec![0];
        dims.extend(&self.dims);
        let mut diffs = vec![Matrix::zeros(self.dim(0), 0)];
        diffs.extend(self.diffs.iter().cloned());
        Complex { dims, diffs }
    }

    pub fn direct_sum(&self, other: &Complex) -> Complex {
        let n = self.len().max(other.len());
        let dims = (0..n).map(|k| self.dim(k) + other.dim(k)).collect();
        let diffs = (0..n).map(|k| self.d(k).direct_sum(&other.d(k))).collect();
        Complex { dims, diffs }
    }

    /// Subcomplex (or quotient) spanned by the listed coordinates in each
    /// degree; the caller guarantees `d` preserves the span.
    pub fn restrict(&self, coords: &[Vec<usize>]) -> Complex {
        let n = self.len();
        let dims = (0..n).map(|k| coords.get(k).map_or(0, |c| c.len())).collect();
        let empty = Vec::new();
        let diffs = (0..n)
            .map(|k| {
                let cols = coords.get(k).unwrap_or(&empty);
                let rows = coords.get(k + 1).unwrap_or(&empty);
                self.d(k).select_cols(cols).select_rows(rows)
            })
            .collect();
        Complex { dims, diffs }
    }

    /// Pads with zero modules up to `len` degrees.
    pub fn padded(&self, len: usize) -> Complex {
        if len <= self.len() {
            return self.clone();
        }
        let dims: Vec<usize> = (0..len).map(|k| self.dim(k)).collect();
        Complex::new(dims, self.diffs.clone()).expect("padding keeps shapes consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_complex() {
        // a<b with constant coefficients: C^0 = Q^2, C^1 = Q
        let c = Complex::new(vec![2, 1], vec![Matrix::from_i64(&[&[1, -1]])]).unwrap();
        assert_eq!(c.betti(), vec![1, 0]);
        assert_eq!(c.euler_characteristic(), 1);
        assert!(c.d_squared_failure().is_none());
    }

    #[test]
    fn shapes_checked() {
        assert!(Complex::new(vec![2, 1], vec![Matrix::zeros(2, 2)]).is_err());
        let c = Complex::new(vec![3], vec![]).unwrap();
        assert_eq!(c.betti(), vec![3]);
    }

    #[test]
    fn shift_and_sum() {
        let c = Complex::new(vec![2, 1], vec![Matrix::from_i64(&[&[1, -1]])]).unwrap();
        let s = c.shifted();
        assert_eq!(s.dims(), &[0, 2, 1]);
        assert_eq!(s.betti(), vec![0, 1, 0]);
        let d = c.direct_sum(&s);
        assert_eq!(d.betti(), vec![1, 1, 0]);
        let p = c.padded(4);
        assert_eq!(p.dims(), &[2, 1, 0, 0]);
        assert_eq!(p.betti(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn layout_lookup() {
        let l = BlockLayout::new([("a", 2), ("b", 0), ("c", 3)]);
        assert_eq!(l.total(), 5);
        assert_eq!(l.find(&"c"), Some((2, 3)));
        assert_eq!(l.locate(1), Some((0, 1)));
        assert_eq!(l.locate(2), Some((2, 0)));
        assert_eq!(l.locate(5), None);
    }
}
