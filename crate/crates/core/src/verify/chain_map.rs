//! Chain maps between complexes and mapping-cone certificates.

use std::sync::Arc;

use serde::Serialize;

use crate::complex::Complex;
use crate::linalg::{Matrix, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainMapError {
    #[error("degree {degree}: map is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape { degree: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("map does not commute with the differentials in degree {0}")]
    NotChainMap(usize),
}

/// Degree-preserving map `f_n: A^n → B^n`. Maps of degree +1 are stored
/// against a shifted source (`shift` records that).
#[derive(Clone, Debug)]
pub struct ChainMap {
    source: Arc<Complex>,
    target: Arc<Complex>,
    maps: Vec<Matrix>,
    shift: usize,
}

/// Verdict of the mapping-cone test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeCertificate {
    /// Cone Betti numbers, starting in degree −1.
    pub cone_betti: Vec<usize>,
    pub quasi_isomorphism: bool,
}

impl ChainMap {
    /// Pads both complexes to a common length and checks shapes and
    /// commutation.
    pub fn new(
        source: Arc<Complex>,
        target: Arc<Complex>,
        maps: Vec<Matrix>,
        shift: usize,
    ) -> Result<Self, ChainMapError> {
        let f = Self::unchecked(source, target, maps, shift);
        for (n, m) in f.maps.iter().enumerate() {
            let expected = (f.target.dim(n), f.source.dim(n));
            if m.shape() != expected {
                return Err(ChainMapError::Shape {
                    degree: n,
                    rows: m.rows(),
                    cols: m.cols(),
                    expected_rows: expected.0,
                    expected_cols: expected.1,
                });
            }
        }
        if let Some(n) = f.commutation_failure() {
            return Err(ChainMapError::NotChainMap(n));
        }
        Ok(f)
    }

    pub(crate) fn unchecked(source: Arc<Complex>, target: Arc<Complex>, mut maps: Vec<Matrix>, shift: usize) -> Self {
        let len = source.len().max(target.len()).max(maps.len());
        let source = if source.len() < len { Arc::new(source.padded(len)) } else { source };
        let target = if target.len() < len { Arc::new(target.padded(len)) } else { target };
        while maps.len() < len {
            let n = maps.len();
            maps.push(Matrix::zeros(target.dim(n), source.dim(n)));
        }
        Self { source, target, maps, shift }
    }

    pub fn source(&self) -> &Arc<Complex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Complex> {
        &self.target
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn map(&self, n: usize) -> &Matrix {
        &self.maps[n]
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// First degree `n` with `d_B f_n ≠ f_{n+1} d_A`.
    pub fn commutation_failure(&self) -> Option<usize> {
        (0..self.maps.len()).find(|&n| {
            let lhs = self.target.d(n).compose(&self.maps[n]);
            let rhs = match self.maps.get(n + 1) {
                Some(next) => next.compose(&self.source.d(n)),
                None => Matrix::zeros(lhs.rows(), lhs.cols()),
            };
            lhs != rhs
        })
    }

    /// `Cone^n = B^n ⊕ A^{n+1}`, `d(b, a) = (d_B b + f a, −d_A a)`; index
    /// `k` of the result holds degree `k − 1`.
    pub fn cone(&self) -> Complex {
        let len = self.maps.len();
        let (a, b) = (&*self.source, &*self.target);
        let dim = |k: usize| if k == 0 { a.dim(0) } else { b.dim(k - 1) + a.dim(k) };
        let dims: Vec<usize> = (0..=len).map(dim).collect();
        let diffs = (0..=len)
            .map(|k| {
                // degree n = k − 1 → n + 1
                let (rows, cols) = (dim(k + 1), dims[k]);
                let b_in = if k == 0 { 0 } else { b.dim(k - 1) };
                let b_out = b.dim(k);
                let mut triplets: Vec<(usize, usize, Scalar)> = Vec::new();
                if k >= 1 {
                    triplets.extend(b.d(k - 1).triplets());
                }
                if k < len {
                    for (r, c, v) in self.maps[k].triplets() {
                        triplets.push((r, b_in + c, v));
                    }
                }
                for (r, c, v) in a.d(k).triplets() {
                    triplets.push((b_out + r, b_in + c, -v));
                }
                Matrix::from_triplets(rows, cols, triplets)
            })
            .collect();
        Complex::new(dims, diffs).expect("cone shapes")
    }

    pub fn certificate(&self) -> ConeCertificate {
        let cone_betti = self.cone().betti();
        let quasi_isomorphism = cone_betti.iter().all(|&b| b == 0);
        ConeCertificate { cone_betti, quasi_isomorphism }
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &ChainMap) -> ChainMap {
        let maps = self.maps.iter().zip(&g.maps).map(|(f, g)| g.compose(f)).collect();
        Self::unchecked(self.source.clone(), g.target.clone(), maps, self.shift + g.shift)
    }
}
