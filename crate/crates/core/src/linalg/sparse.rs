//! Sparse vectors with exact entries.

use num_traits::Zero;

use super::scalar::Scalar;

/// A sparse vector: entries sorted by index, no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unit(index: usize) -> Self {
        Self { entries: vec![(index, Scalar::from_integer(1.into()))] }
    }

    /// Builds a vector from unsorted `(index, value)` pairs; repeated
    /// indices are summed and zeros dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Scalar)>>(pairs: I) -> Self {
        let mut entries: Vec<(usize, Scalar)> = pairs.into_iter().collect();
        entries.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(usize, Scalar)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some((j, w)) if *j == i => *w += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        Self { entries: out }
    }

    pub fn from_dense(values: &[Scalar]) -> Self {
        Self { entries: values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).collect() }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn leading(&self) -> Option<(usize, &Scalar)> {
        self.entries.first().map(|(i, v)| (*i, v))
    }

    /// Largest stored index plus one, or zero.
    pub fn support_end(&self) -> usize {
        self.entries.last().map_or(0, |(i, _)| i + 1)
    }

    pub fn get(&self, index: usize) -> Scalar {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(k) => self.entries[k].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn scale(&mut self, c: &Scalar) {
        if c.is_zero() {
            self.entries.clear();
            return;
        }
        for (_, v) in &mut self.entries {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn neg(&self) -> Self {
        Self { entries: self.entries.iter().map(|(i, v)| (*i, -v.clone())).collect() }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &Scalar, other: &SparseVec) {
        if c.is_zero() || other.is_zero() {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut a = std::mem::take(&mut self.entries).into_iter().peekable();
        let mut b = other.entries.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, _)), Some((j, _))) if i < j => out.push(a.next().unwrap()),
                (Some((i, _)), Some((j, _))) if i > j => {
                    let (j, w) = b.next().unwrap();
                    out.push((*j, c * w));
                }
                (Some(_), Some(_)) => {
                    let (i, v) = a.next().unwrap();
                    let (_, w) = b.next().unwrap();
                    let s = v + c * w;
                    if !s.is_zero() {
                        out.push((i, s));
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap()),
                (None, Some(_)) => {
                    let (j, w) = b.next().unwrap();
                    out.push((*j, c * w));
                }
                (None, None) => break,
            }
        }
        self.entries = out;
    }

    pub fn add(&self, other: &SparseVec) -> Self {
        let mut out = self.clone();
        out.axpy(&Scalar::from_integer(1.into()), other);
        out
    }

    pub fn sub(&self, other: &SparseVec) -> Self {
        let mut out = self.clone();
        out.axpy(&Scalar::from_integer((-1).into()), other);
        out
    }

    pub fn dot(&self, other: &SparseVec) -> Scalar {
        let mut acc = Scalar::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some((i, v)), Some((j, w))) = (a.peek(), b.peek()) {
            if i < j {
                a.next();
            } else if i > j {
                b.next();
            } else {
                acc += v * w;
                a.next();
                b.next();
            }
        }
        acc
    }

    /// Keeps the entries whose index satisfies `keep`, renumbered by `map`.
    pub fn remap<F: Fn(usize) -> Option<usize>>(&self, map: F) -> Self {
        Self::from_pairs(self.entries.iter().filter_map(|(i, v)| map(*i).map(|j| (j, v.clone()))))
    }

    /// Shifts every index by `offset`.
    pub fn offset(&self, offset: usize) -> Self {
        Self { entries: self.entries.iter().map(|(i, v)| (i + offset, v.clone())).collect() }
    }

    pub fn into_entries(self) -> Vec<(usize, Scalar)> {
        self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scalar::int;

    #[test]
    fn axpy_cancels_and_merges() {
        let mut a = SparseVec::from_pairs([(0, int(1)), (3, int(2))]);
        let b = SparseVec::from_pairs([(1, int(5)), (3, int(1))]);
        a.axpy(&int(-2), &b);
        assert_eq!(a, SparseVec::from_pairs([(0, int(1)), (1, int(-10))]));
    }

    #[test]
    fn from_pairs_sums_duplicates() {
        let v = SparseVec::from_pairs([(2, int(1)), (0, int(4)), (2, int(-1))]);
        assert_eq!(v.nnz(), 1);
        assert_eq!(v.get(0), int(4));
    }
}
