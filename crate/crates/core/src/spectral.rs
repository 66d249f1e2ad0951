//! Spectral sequence of the column filtration `F^p T^n = ⊕_{p'≥p} K^{p', n-p'}`.
//!
//! Pages are computed directly as subquotients of `T`:
//! `E_r^{p,q} = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})` with
//! `Z_r^p = {v ∈ F^p T^{p+q} : dv ∈ F^{p+r}}`, so every class comes with a
//! representative cochain in the total complex.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bicomplex::{Bicomplex, TotalComplex};
use crate::bundle::{Bundle, BundleError};
use crate::linalg::{kernel_vectors, EchelonBasis, Matrix, QuotientBasis, SparseVec};
use crate::sheaf::SheafComplex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpectralError {
    #[error("denominator not contained in Z_{r} at ({p}, {q})")]
    Denominator { r: usize, p: usize, q: usize },
    #[error("d_{r} image at ({p}, {q}) is not a class of the target")]
    Differential { r: usize, p: usize, q: usize },
}

#[derive(Clone, Debug)]
pub struct PageCell {
    pub dim: usize,
    /// Representatives in `T^{p+q}`.
    pub representatives: Vec<SparseVec>,
    quotient: QuotientBasis,
}

#[derive(Clone, Debug)]
pub struct Page {
    pub r: usize,
    pub cells: BTreeMap<(usize, usize), PageCell>,
    /// `d_r` out of `(p, q)`, as a matrix in representative bases.
    pub differentials: BTreeMap<(usize, usize), Matrix>,
}

impl Page {
    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.cells.get(&(p, q)).map_or(0, |c| c.dim)
    }
}

#[derive(Clone, Debug)]
pub struct SpectralPages {
    pub p_count: usize,
    pub q_count: usize,
    /// Page from which nothing changes.
    pub r_stab: usize,
    pub pages: Vec<Page>,
}

/// One `(r, p, q, dim)` row of the page table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PageEntry {
    pub r: usize,
    pub p: usize,
    pub q: usize,
    pub dim: usize,
}

impl SpectralPages {
    /// Computes pages `0..=max(r_max, r_stab)`.
    pub fn compute(total: &TotalComplex, p_count: usize, q_count: usize, r_max: usize) -> Result<Self, SpectralError> {
        let r_stab = p_count.max(q_count) + 1;
        let last = r_max.max(r_stab);
        let ctx = Ctx { total, complex: total.complex().clone() };
        let mut pages = Vec::with_capacity(last + 1);
        for r in 0..=last {
            pages.push(ctx.page(r, p_count, q_count)?);
        }
        Ok(Self { p_count, q_count, r_stab, pages })
    }

    pub fn of_bicomplex(bi: &Bicomplex, r_max: usize) -> Result<Self, SpectralError> {
        Self::compute(&bi.total(), bi.p_count(), bi.q_count(), r_max)
    }

    pub fn page(&self, r: usize) -> &Page {
        &self.pages[r.min(self.pages.len() - 1)]
    }

    pub fn e_infinity(&self) -> &Page {
        self.page(self.r_stab)
    }

    pub fn table(&self) -> Vec<PageEntry> {
        let mut out = Vec::new();
        for page in &self.pages {
            for (&(p, q), cell) in &page.cells {
                out.push(PageEntry { r: page.r, p, q, dim: cell.dim });
            }
        }
        out
    }

    /// Cells where `dim E_{r+1} ≠ dim ker d_r − dim im d_r`.
    pub fn consistency_failures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for w in self.pages.windows(2) {
            let (page, next) = (&w[0], &w[1]);
            let r = page.r;
            for (&(p, q), cell) in &page.cells {
                let out_rank = page.differentials.get(&(p, q)).map_or(0, crate::linalg::rank);
                let in_rank = (p >= r && q + r >= 1)
                    .then(|| page.differentials.get(&(p - r, q + r - 1)))
                    .flatten()
                    .map_or(0, crate::linalg::rank);
                if next.dim(p, q) + out_rank + in_rank != cell.dim {
                    out.push((r, p, q));
                }
            }
        }
        out
    }
}

struct Ctx<'a> {
    total: &'a TotalComplex,
    complex: Arc<crate::complex::Complex>,
}

impl Ctx<'_> {
    /// Basis of `Z_r^p ⊆ T^n` (`r` and `p` may be negative).
    fn z(&self, r: isize, p: isize, n: usize) -> Vec<SparseVec> {
        let start = self.total.filtration_start(n, p.max(0) as usize);
        let bound = self.total.filtration_start(n + 1, (p + r).max(0) as usize);
        let dim = self.complex.dim(n);
        let cols: Vec<usize> = (start..dim).collect();
        let rows: Vec<usize> = (0..bound).collect();
        let a = self.complex.d(n).select_cols(&cols).select_rows(&rows);
        kernel_vectors(&a).into_iter().map(|v| v.offset(start)).collect()
    }

    fn cell(&self, r: usize, p: usize, q: usize) -> Result<PageCell, SpectralError> {
        let n = p + q;
        let (ri, pi) = (r as isize, p as isize);
        let zr = self.z(ri, pi, n);
        let mut den = self.z(ri - 1, pi + 1, n);
        if n > 0 {
            let d = self.complex.d(n - 1);
            den.extend(self.z(ri - 1, pi - ri + 1, n - 1).iter().map(|w| d.apply(w)).filter(|v| !v.is_zero()));
        }
        let mut zspan = EchelonBasis::new();
        for v in &zr {
            zspan.insert(v);
        }
        if !den.iter().all(|v| zspan.contains(v)) {
            return Err(SpectralError::Denominator { r, p, q });
        }
        let quotient = QuotientBasis::new(den.iter(), zr.iter());
        Ok(PageCell { dim: quotient.dim(), representatives: quotient.representatives().to_vec(), quotient })
    }

    fn page(&self, r: usize, p_count: usize, q_count: usize) -> Result<Page, SpectralError> {
        let keys: Vec<(usize, usize)> = (0..p_count).flat_map(|p| (0..q_count).map(move |q| (p, q))).collect();
        let cells: BTreeMap<(usize, usize), PageCell> =
            keys.par_iter().map(|&(p, q)| self.cell(r, p, q).map(|c| ((p, q), c))).collect::<Result<_, _>>()?;
        let mut differentials = BTreeMap::new();
        for (&(p, q), cell) in &cells {
            let target = (p + r, (q + 1).checked_sub(r));
            let (tp, Some(tq)) = target else { continue };
            let Some(tcell) = cells.get(&(tp, tq)) else { continue };
            if cell.dim == 0 || tcell.dim == 0 {
                continue;
            }
            let d = self.complex.d(p + q);
            let mut cols = Vec::with_capacity(cell.dim);
            for v in &cell.representatives {
                let c = tcell.quotient.coordinates(&d.apply(v)).ok_or(SpectralError::Differential { r, p, q })?;
                cols.push(c);
            }
            differentials.insert((p, q), Matrix::from_columns(tcell.dim, cols));
        }
        Ok(Page { r, cells, differentials })
    }
}

/// Per-cell comparison of `E_2^{p,q}` with `H^p(B, H^q_fib)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct E2Cell {
    pub p: usize,
    pub q: usize,
    pub page: usize,
    pub base: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct E2Report {
    pub cells: Vec<E2Cell>,
    pub passed: bool,
}

pub fn e2_check(bundle: &Bundle, pages: &SpectralPages) -> Result<E2Report, BundleError> {
    let q_count = pages.q_count;
    let columns: Vec<Vec<usize>> = (0..q_count)
        .into_par_iter()
        .map(|q| {
            let h = bundle.fib_cohomology_sheaf(q)?;
            Ok(SheafComplex::new(Arc::new(h)).complex().betti())
        })
        .collect::<Result<_, BundleError>>()?;
    let mut cells = Vec::new();
    for p in 0..pages.p_count {
        for (q, betti) in columns.iter().enumerate() {
            let base = betti.get(p).copied().unwrap_or(0);
            cells.push(E2Cell { p, q, page: pages.page(2).dim(p, q), base });
        }
    }
    let passed = cells.iter().all(|c| c.page == c.base);
    Ok(E2Report { cells, passed })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    /// `Σ_{p+q=n} dim E_∞^{p,q}` per degree.
    pub abutment: Vec<usize>,
    /// `dim H^n(T)` per degree.
    pub total: Vec<usize>,
    pub passed: bool,
}

pub fn convergence_check(total: &TotalComplex, pages: &SpectralPages) -> ConvergenceReport {
    let betti = total.complex().betti();
    let inf = pages.e_infinity();
    let abutment: Vec<usize> = (0..betti.len())
        .map(|n| (0..=n).map(|p| if n - p < pages.q_count { inf.dim(p, n - p) } else { 0 }).sum())
        .collect();
    let passed = abutment == betti;
    ConvergenceReport { abutment, total: betti, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::ArrowData;
    use crate::poset::{boolean_lattice, chain_poset};
    use crate::sheaf::Sheaf;

    fn i1() -> Arc<Bundle> {
        let e0 = Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1));
        let e1 = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let one = Matrix::identity(1);
        let arrows = BTreeMap::from([((0, 1), ArrowData { vertex_map: vec![0, 0], matrices: vec![one.clone(), one] })]);
        Arc::new(Bundle::new(Arc::new(chain_poset(2)), vec![e0, e1], arrows).unwrap())
    }

    #[test]
    fn i1_pages() {
        let b = i1();
        let bi = Bicomplex::new(b.clone());
        let total = bi.total();
        let pages = SpectralPages::compute(&total, bi.p_count(), bi.q_count(), 0).unwrap();
        assert_eq!(pages.page(0).dim(0, 0), 3);
        assert!(pages.consistency_failures().is_empty());
        let conv = convergence_check(&total, &pages);
        assert!(conv.passed, "{conv:?}");
        assert_eq!(conv.total, vec![1, 0, 0]);
        assert!(e2_check(&b, &pages).unwrap().passed);
    }

    #[test]
    fn singleton_base_column() {
        let f = Arc::new(Sheaf::constant(Arc::new(chain_poset(3)), 1));
        let b = Arc::new(Bundle::constant(Arc::new(chain_poset(1)), f));
        let bi = Bicomplex::new(b);
        let pages = SpectralPages::of_bicomplex(&bi, 0).unwrap();
        assert_eq!(pages.p_count, 1);
        let e1: Vec<usize> = (0..3).map(|q| pages.page(1).dim(0, q)).collect();
        assert_eq!(e1, vec![1, 0, 0]);
        for r in 1..pages.pages.len() {
            assert!(pages.page(r).differentials.is_empty());
        }
    }

    #[test]
    fn constant_b2_point() {
        let f = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let b = Arc::new(Bundle::constant(Arc::new(boolean_lattice(2)), f));
        let bi = Bicomplex::new(b.clone());
        let pages = SpectralPages::of_bicomplex(&bi, 0).unwrap();
        let e2: Vec<usize> = (0..3).map(|p| pages.page(2).dim(p, 0)).collect();
        assert_eq!(e2, vec![1, 0, 0]);
        assert!(e2_check(&b, &pages).unwrap().passed);
        assert!(convergence_check(&bi.total(), &pages).passed);
    }
}
