//! Incremental echelon bases.
//!
//! Vectors are kept with a unit coefficient at their leading (smallest)
//! index, one stored vector per pivot. Each stored vector may carry a tag: a
//! sparse combination of caller-supplied generators it was built from. Every
//! rank, kernel, solve and quotient computation in the crate goes through
//! this structure, so pivot choice (first nonzero index, generators in
//! insertion order) is the single source of determinism.

use std::collections::HashMap;

use num_traits::One;

use super::scalar::Scalar;
use super::sparse::SparseVec;

#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    pivots: HashMap<usize, usize>,
    vectors: Vec<SparseVec>,
    tags: Vec<Option<SparseVec>>,
}

/// Outcome of reducing a vector against a basis.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// What is left after eliminating every reachable pivot; zero iff the
    /// input lies in the span.
    pub residual: SparseVec,
    /// Sum of `coefficient * tag` over the stored vectors used.
    pub combination: SparseVec,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[SparseVec] {
        &self.vectors
    }

    /// Reduces `v` until its leading index is not a pivot.
    pub fn reduce(&self, v: &SparseVec) -> Reduction {
        let mut residual = v.clone();
        let mut combination = SparseVec::new();
        while let Some((lead, coef)) = residual.leading() {
            let Some(&k) = self.pivots.get(&lead) else { break };
            let c = coef.clone();
            residual.axpy(&-c.clone(), &self.vectors[k]);
            if let Some(tag) = &self.tags[k] {
                combination.axpy(&c, tag);
            }
        }
        Reduction { residual, combination }
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).residual.is_zero()
    }

    /// Inserts `v`. Returns `None` when `v` is already in the span, otherwise
    /// the pivot index of the new stored vector.
    pub fn insert(&mut self, v: &SparseVec) -> Option<usize> {
        self.insert_tagged(v, None).ok()
    }

    /// Inserts `v`, recorded as the combination `tag` of generators.
    ///
    /// On success returns the new pivot. When `v` is dependent, returns the
    /// combination of generators `tag - Σ c_k tag_k` that the dependency
    /// annihilates (a kernel vector in generator space).
    pub fn insert_tagged(&mut self, v: &SparseVec, tag: Option<SparseVec>) -> Result<usize, Option<SparseVec>> {
        let red = self.reduce(v);
        let tag = tag.map(|t| t.sub(&red.combination));
        let Some((lead, coef)) = red.residual.leading() else {
            return Err(tag);
        };
        let inv = Scalar::one() / coef;
        let vector = red.residual.scaled(&inv);
        let tag = tag.map(|t| t.scaled(&inv));
        self.pivots.insert(lead, self.vectors.len());
        self.vectors.push(vector);
        self.tags.push(tag);
        Ok(lead)
    }
}

/// A basis of a quotient `V / W` given by chosen representatives in `V`.
///
/// `W` is spanned by `boundaries`; representatives are picked greedily from
/// `generators` (first independent ones modulo `W`). Vectors of `V` can then
/// be expressed as coordinates in the representative basis.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    echelon: EchelonBasis,
    representatives: Vec<SparseVec>,
    boundary_rank: usize,
}

impl QuotientBasis {
    pub fn new<'a, B, G>(boundaries: B, generators: G) -> Self
    where
        B: IntoIterator<Item = &'a SparseVec>,
        G: IntoIterator<Item = &'a SparseVec>,
    {
        let mut echelon = EchelonBasis::new();
        for b in boundaries {
            echelon.insert(b);
        }
        let boundary_rank = echelon.rank();
        let mut representatives = Vec::new();
        for g in generators {
            let tag = SparseVec::unit(representatives.len());
            if echelon.insert_tagged(g, Some(tag)).is_ok() {
                representatives.push(g.clone());
            }
        }
        Self { echelon, representatives, boundary_rank }
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn boundary_rank(&self) -> usize {
        self.boundary_rank
    }

    pub fn representatives(&self) -> &[SparseVec] {
        &self.representatives
    }

    /// Coordinates of `v` modulo the boundaries, or `None` when `v` is not in
    /// `span(boundaries) + span(representatives)`.
    pub fn coordinates(&self, v: &SparseVec) -> Option<SparseVec> {
        let red = self.echelon.reduce(v);
        red.residual.is_zero().then_some(red.combination)
    }

    /// Whether `v` lies in the span of the boundaries.
    pub fn is_boundary(&self, v: &SparseVec) -> bool {
        self.coordinates(v).is_some_and(|c| c.is_zero())
    }
}

/// Rank of the span of the given vectors.
pub fn span_rank<'a, I: IntoIterator<Item = &'a SparseVec>>(vectors: I) -> usize {
    let mut e = EchelonBasis::new();
    vectors.into_iter().filter(|v| e.insert(v).is_some()).count()
}

/// A basis (subset of the inputs) of the span of the given vectors.
pub fn span_basis<'a, I: IntoIterator<Item = &'a SparseVec>>(vectors: I) -> Vec<SparseVec> {
    let mut e = EchelonBasis::new();
    vectors.into_iter().filter(|v| e.insert(v).is_some()).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scalar::int;

    fn v(pairs: &[(usize, i64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().map(|&(i, x)| (i, int(x))))
    }

    #[test]
    fn dependent_insert_reports_relation() {
        let mut e = EchelonBasis::new();
        assert!(e.insert_tagged(&v(&[(0, 1), (1, 1)]), Some(SparseVec::unit(0))).is_ok());
        assert!(e.insert_tagged(&v(&[(1, 2)]), Some(SparseVec::unit(1))).is_ok());
        let rel = e.insert_tagged(&v(&[(0, 2), (1, 4)]), Some(SparseVec::unit(2))).unwrap_err().unwrap();
        // (2,4) = 2*(1,1) + 1*(0,2)
        assert_eq!(rel, v(&[(0, -2), (1, -1), (2, 1)]));
    }

    #[test]
    fn quotient_coordinates() {
        let boundary = v(&[(0, 1), (1, -1)]);
        let gens = [v(&[(0, 1)]), v(&[(1, 1)])];
        let q = QuotientBasis::new([&boundary], gens.iter());
        assert_eq!(q.dim(), 1);
        // e1 ≡ e0 modulo (e0 - e1)
        assert_eq!(q.coordinates(&v(&[(1, 3)])).unwrap(), v(&[(0, 3)]));
        assert!(q.is_boundary(&v(&[(0, 2), (1, -2)])));
        assert!(q.coordinates(&v(&[(2, 1)])).is_none());
    }
}
