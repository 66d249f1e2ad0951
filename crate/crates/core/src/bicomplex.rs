//! The bicomplex `K^{p,q} = S^p(B, S^q)` of a bundle and its total complex.
//!
//! Cells are triples `(σ, τ, a)`: a base `p`-chain, a `q`-chain of the fiber
//! over `σ₀`, and a coordinate of the stalk at `τ₀`. Within `K^{p,q}` the
//! block of `σ` is laid out exactly like `S^q(E_{σ₀})`.
//!
//! `d_v` carries the sign `(-1)^{p+q}` of its target bidegree; `d_h` is the
//! unsigned alternating sum whose zeroth face applies the induced map of the
//! transport along `σ₀ ≤ σ₁`.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bundle::Bundle;
use crate::complex::{BlockLayout, Complex};
use crate::linalg::{scalar, Matrix, Scalar};
use crate::poset::Chain;

#[derive(Clone, Debug)]
pub struct Bicomplex {
    bundle: Arc<Bundle>,
    p_count: usize,
    q_count: usize,
    /// `[p][q]`: block of each base `p`-chain, width `dim S^q(E_{σ₀})`.
    sigma_layouts: Vec<Vec<BlockLayout<Chain>>>,
    /// `[p][q]: K^{p,q} → K^{p,q+1}`.
    d_v: Vec<Vec<Matrix>>,
    /// `[p][q]: K^{p,q} → K^{p+1,q}`.
    d_h: Vec<Vec<Matrix>>,
}

/// Which identity failed, at which bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdentityFailure {
    VerticalSquare(usize, usize),
    HorizontalSquare(usize, usize),
    Anticommute(usize, usize),
}

impl Bicomplex {
    pub fn new(bundle: Arc<Bundle>) -> Self {
        let base = bundle.base().clone();
        let fc = bundle.fiber_complexes().to_vec();
        let p_count = base.all_chains().len();
        let q_count = fc.iter().map(|c| c.complex().len()).max().unwrap_or(0);

        let sigma_layouts: Vec<Vec<BlockLayout<Chain>>> = (0..p_count)
            .map(|p| {
                (0..q_count)
                    .map(|q| BlockLayout::new(base.chains(p).iter().map(|s| (s.clone(), fc[s[0]].dim(q)))))
                    .collect()
            })
            .collect();

        // induced maps of transports, per comparable pair and degree
        let pairs: Vec<(usize, usize)> = base.chains(1).iter().map(|c| (c[0], c[1])).collect();
        let induced: HashMap<(usize, usize), Vec<Matrix>> = pairs
            .par_iter()
            .map(|&(x, y)| {
                let t = bundle.transport_unchecked(x, y);
                ((x, y), (0..q_count).map(|q| fc[y].induced(t, &fc[x], q)).collect())
            })
            .collect();

        let d_v: Vec<Vec<Matrix>> = (0..p_count)
            .map(|p| {
                (0..q_count)
                    .map(|q| {
                        let src = &sigma_layouts[p][q];
                        let rows = sigma_layouts[p].get(q + 1).map_or(0, |l| l.total());
                        let dst = sigma_layouts[p].get(q + 1);
                        let sign = scalar::sign(p + q + 1);
                        let mut triplets = Vec::new();
                        if let Some(dst) = dst {
                            for (sigma, col, _) in src.iter() {
                                let row = dst.offset_of(sigma).unwrap();
                                for (r, c, v) in fc[sigma[0]].complex().d(q).triplets() {
                                    triplets.push((row + r, col + c, &sign * v));
                                }
                            }
                        }
                        Matrix::from_triplets(rows, src.total(), triplets)
                    })
                    .collect()
            })
            .collect();

        let d_h: Vec<Vec<Matrix>> = (0..p_count)
            .map(|p| {
                (0..q_count)
                    .into_par_iter()
                    .map(|q| {
                        let src = &sigma_layouts[p][q];
                        let Some(dst) = sigma_layouts.get(p + 1).map(|l| &l[q]) else {
                            return Matrix::zeros(0, src.total());
                        };
                        let mut triplets: Vec<(usize, usize, Scalar)> = Vec::new();
                        for (sigma, row, width) in dst.iter() {
                            for i in 0..sigma.len() {
                                let mut face = sigma.clone();
                                face.remove(i);
                                let col = src.offset_of(&face).expect("face of a base chain");
                                if i == 0 {
                                    for (r, c, v) in induced[&(sigma[0], sigma[1])][q].triplets() {
                                        triplets.push((row + r, col + c, v));
                                    }
                                } else {
                                    let s = scalar::sign(i);
                                    for k in 0..width {
                                        triplets.push((row + k, col + k, s.clone()));
                                    }
                                }
                            }
                        }
                        Matrix::from_triplets(dst.total(), src.total(), triplets)
                    })
                    .collect()
            })
            .collect();

        Self { bundle, p_count, q_count, sigma_layouts, d_v, d_h }
    }

    pub fn bundle(&self) -> &Arc<Bundle> {
        &self.bundle
    }

    /// Columns `p = 0..p_count`.
    pub fn p_count(&self) -> usize {
        self.p_count
    }

    /// Rows `q = 0..q_count`.
    pub fn q_count(&self) -> usize {
        self.q_count
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.sigma_layouts.get(p).and_then(|l| l.get(q)).map_or(0, |l| l.total())
    }

    pub fn sigma_layout(&self, p: usize, q: usize) -> Option<&BlockLayout<Chain>> {
        self.sigma_layouts.get(p).and_then(|l| l.get(q))
    }

    pub fn d_v(&self, p: usize, q: usize) -> &Matrix {
        &self.d_v[p][q]
    }

    pub fn d_h(&self, p: usize, q: usize) -> &Matrix {
        &self.d_h[p][q]
    }

    /// Offset of the cell `(σ, τ)` inside `K^{p,q}`.
    pub fn cell_offset(&self, sigma: &Chain, tau: &Chain) -> Option<usize> {
        let (p, q) = (sigma.len().checked_sub(1)?, tau.len().checked_sub(1)?);
        let start = self.sigma_layout(p, q)?.offset_of(sigma)?;
        let fiber = &self.bundle.fiber_complexes()[sigma[0]];
        Some(start + fiber.layout(q)?.offset_of(tau)?)
    }

    /// `(σ, τ, a)` of a position in `K^{p,q}`.
    pub fn cell_at(&self, p: usize, q: usize, position: usize) -> Option<(Chain, Chain, usize)> {
        let layout = self.sigma_layout(p, q)?;
        let (block, inner) = layout.locate(position)?;
        let sigma = layout.keys()[block].clone();
        let fiber = self.bundle.fiber_complexes()[sigma[0]].layout(q)?;
        let (t, a) = fiber.locate(inner)?;
        Some((sigma, fiber.keys()[t].clone(), a))
    }

    /// Checks `d_v² = 0`, `d_h² = 0` and `d_h d_v + d_v d_h = 0`.
    pub fn identity_failures(&self) -> Vec<IdentityFailure> {
        let mut out = Vec::new();
        for p in 0..self.p_count {
            for q in 0..self.q_count {
                if q + 1 < self.q_count && !self.d_v[p][q + 1].compose(&self.d_v[p][q]).is_zero() {
                    out.push(IdentityFailure::VerticalSquare(p, q));
                }
                if p + 1 < self.p_count && !self.d_h[p + 1][q].compose(&self.d_h[p][q]).is_zero() {
                    out.push(IdentityFailure::HorizontalSquare(p, q));
                }
                if p + 1 < self.p_count && q + 1 < self.q_count {
                    let a = self.d_h[p][q + 1].compose(&self.d_v[p][q]);
                    let b = self.d_v[p + 1][q].compose(&self.d_h[p][q]);
                    if !a.add(&b).expect("same shape").is_zero() {
                        out.push(IdentityFailure::Anticommute(p, q));
                    }
                }
            }
        }
        out
    }

    pub fn total(&self) -> TotalComplex {
        TotalComplex::new(self)
    }
}

/// `T^n = ⊕_{p+q=n} K^{p,q}` with blocks in ascending `p`.
#[derive(Clone, Debug)]
pub struct TotalComplex {
    complex: Arc<Complex>,
    /// `[n]`: `(p, offset, width)` for each nonempty-range block.
    blocks: Vec<Vec<(usize, usize, usize)>>,
}

impl TotalComplex {
    fn new(bi: &Bicomplex) -> Self {
        let degrees = if bi.p_count == 0 || bi.q_count == 0 { 0 } else { bi.p_count + bi.q_count - 1 };
        let blocks: Vec<Vec<(usize, usize, usize)>> = (0..degrees)
            .map(|n| {
                let mut offset = 0;
                let mut row = Vec::new();
                for p in 0..bi.p_count.min(n + 1) {
                    let q = n - p;
                    if q >= bi.q_count {
                        continue;
                    }
                    let w = bi.dim(p, q);
                    row.push((p, offset, w));
                    offset += w;
                }
                row
            })
            .collect();
        let dims: Vec<usize> = blocks.iter().map(|b| b.iter().map(|x| x.2).sum()).collect();
        let diffs: Vec<Matrix> = (0..degrees)
            .into_par_iter()
            .map(|n| {
                let rows = dims.get(n + 1).copied().unwrap_or(0);
                let target = |p: usize| blocks.get(n + 1).and_then(|b| b.iter().find(|x| x.0 == p)).map(|x| x.1);
                let mut triplets = Vec::new();
                for &(p, col, _) in &blocks[n] {
                    let q = n - p;
                    if let Some(row) = target(p) {
                        for (r, c, v) in bi.d_v(p, q).triplets() {
                            triplets.push((row + r, col + c, v));
                        }
                    }
                    if let Some(row) = target(p + 1) {
                        for (r, c, v) in bi.d_h(p, q).triplets() {
                            triplets.push((row + r, col + c, v));
                        }
                    }
                }
                Matrix::from_triplets(rows, dims[n], triplets)
            })
            .collect();
        let complex = Complex::new(dims, diffs).expect("total complex shapes");
        Self { complex: Arc::new(complex), blocks }
    }

    pub fn complex(&self) -> &Arc<Complex> {
        &self.complex
    }

    /// `(p, offset, width)` blocks of `T^n`.
    pub fn blocks(&self, n: usize) -> &[(usize, usize, usize)] {
        self.blocks.get(n).map_or(&[], |b| b.as_slice())
    }

    /// Offset of `K^{p, n-p}` inside `T^n`, if present.
    pub fn block_offset(&self, n: usize, p: usize) -> Option<usize> {
        self.blocks(n).iter().find(|b| b.0 == p).map(|b| b.1)
    }

    /// First coordinate of `F^p T^n` (the filtration is a suffix).
    pub fn filtration_start(&self, n: usize, p: usize) -> usize {
        self.blocks(n).iter().find(|b| b.0 >= p).map_or(self.complex.dim(n), |b| b.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::ArrowData;
    use crate::poset::{boolean_lattice, chain_poset};
    use crate::sheaf::Sheaf;
    use std::collections::BTreeMap;

    fn i1() -> Arc<Bundle> {
        let e0 = Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1));
        let e1 = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let one = Matrix::identity(1);
        let arrows = BTreeMap::from([((0, 1), ArrowData { vertex_map: vec![0, 0], matrices: vec![one.clone(), one] })]);
        Arc::new(Bundle::new(Arc::new(chain_poset(2)), vec![e0, e1], arrows).unwrap())
    }

    #[test]
    fn i1_cells_and_identities() {
        let bi = Bicomplex::new(i1());
        // K^{0,0}: three points; K^{0,1}: one edge of E_0; K^{1,0}: σ = (0,1) over the two points of E_0
        assert_eq!((bi.dim(0, 0), bi.dim(0, 1), bi.dim(1, 0), bi.dim(1, 1)), (3, 1, 2, 1));
        assert!(bi.identity_failures().is_empty());
        let t = bi.total();
        assert_eq!(t.complex().dims(), &[3, 3, 1]);
        assert!(t.complex().d_squared_failure().is_none());
    }

    #[test]
    fn singleton_base_is_fiber() {
        let f = Arc::new(Sheaf::constant(Arc::new(chain_poset(3)), 2));
        let b = Arc::new(Bundle::constant(Arc::new(chain_poset(1)), f.clone()));
        let bi = Bicomplex::new(b.clone());
        let t = bi.total();
        let fiber = &b.fiber_complexes()[0];
        assert_eq!(t.complex().dims(), fiber.complex().dims());
        // d_v = (−1)^{q+1} d_fiber in degree q
        assert_eq!(*t.complex().d(0), fiber.complex().d(0).neg());
        assert_eq!(*t.complex().d(1), *fiber.complex().d(1));
    }

    #[test]
    fn constant_b2_identities() {
        let f = Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1));
        let bi = Bicomplex::new(Arc::new(Bundle::constant(Arc::new(boolean_lattice(2)), f)));
        assert!(bi.identity_failures().is_empty());
        assert!(bi.total().complex().d_squared_failure().is_none());
        assert_eq!(bi.cell_at(1, 1, 0), Some((vec![0, 1], vec![0, 1], 0)));
        assert_eq!(bi.cell_offset(&vec![0, 1], &vec![0, 1]), Some(0));
    }
}
