//! Long exact sequence of a split, with `H^n(K)` replaced through a
//! quasi-isomorphism `α: L[-1] → K`.

use serde::Serialize;

use crate::linalg::{rank, CohomologyBasis, Matrix, QuotientBasis, SparseVec};
use crate::verify::chain_map::ChainMap;
use crate::verify::split::Split;
use crate::verify::VerifyError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LesTerm {
    /// `H^{n-1}(L)`.
    Lower,
    /// `H^n(X)`.
    Whole,
    /// `H^n(X_B) ⊕ H^n(X_B̄)`.
    Halves,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesSlot {
    pub degree: usize,
    pub term: LesTerm,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub composite_zero: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesReport {
    pub slots: Vec<LesSlot>,
    pub passed: bool,
}

/// `δ_n: H^n(Y) → H^{n+1}(L[-1])`: lift, apply `d_X`, land in `K`, pull back
/// along `α`.
fn connecting(
    split: &Split,
    alpha: &ChainMap,
    hy: &CohomologyBasis,
    hl: &CohomologyBasis,
    n: usize,
) -> Result<Matrix, VerifyError> {
    let whole = split.epsilon.target();
    let kernel = &split.kernel;
    let d_k = kernel.d(n);
    let generators: Vec<SparseVec> = hl.representatives().iter().map(|r| alpha.map(n + 1).apply(r)).collect();
    let quotient = QuotientBasis::new(d_k.columns(), generators.iter());
    let h_k = kernel.cohomology_basis(n + 1)?;
    if quotient.dim() != hl.dim() || h_k.dim() != hl.dim() {
        return Err(VerifyError::ConnectingMap(n));
    }
    let mixed = &split.mixed[..];
    let d_x = whole.d(n);
    let mut columns = Vec::with_capacity(hy.dim());
    for y in hy.representatives() {
        let x = y.remap(|j| Some(split.lift[n][j]));
        let dx = d_x.apply(&x);
        let position = |i: usize| mixed.get(n + 1).and_then(|m| m.binary_search(&i).ok());
        if dx.iter().any(|(i, _)| position(i).is_none()) {
            return Err(VerifyError::ConnectingMap(n));
        }
        let k = dx.remap(position);
        columns.push(quotient.coordinates(&k).ok_or(VerifyError::ConnectingMap(n))?);
    }
    Ok(Matrix::from_columns(hl.dim(), columns))
}

/// Checks `im = ker` at every slot of
/// `… → H^{n-1}(L) → H^n(X) → H^n(Y) → H^n(L) → …`.
pub fn les_exactness(split: &Split, alpha: &ChainMap) -> Result<LesReport, VerifyError> {
    let whole = split.epsilon.target();
    let halves = split.rho.target();
    let lower = alpha.source();
    let len = whole.len().max(halves.len()).max(lower.len());
    let inclusion = alpha.then(&split.epsilon);
    let mut terms: Vec<(usize, LesTerm, CohomologyBasis)> = Vec::with_capacity(3 * len);
    for n in 0..len {
        terms.push((n, LesTerm::Lower, lower.cohomology_basis(n)?));
        terms.push((n, LesTerm::Whole, whole.cohomology_basis(n)?));
        terms.push((n, LesTerm::Halves, halves.cohomology_basis(n)?));
    }
    // maps[i]: terms[i] → terms[i + 1]
    let mut maps = Vec::with_capacity(terms.len());
    for i in 0..terms.len() {
        let (n, term, ref source) = terms[i];
        let map = match (term, terms.get(i + 1)) {
            (LesTerm::Lower, Some((_, _, target))) => source.induced(inclusion.map(n), target)?,
            (LesTerm::Whole, Some((_, _, target))) => source.induced(split.rho.map(n), target)?,
            (LesTerm::Halves, Some((_, _, target))) => connecting(split, alpha, source, target, n)?,
            (_, None) => {
                let next = lower.cohomology_basis(n + 1)?;
                if next.dim() != 0 {
                    return Err(VerifyError::ConnectingMap(n));
                }
                Matrix::zeros(0, source.dim())
            }
        };
        maps.push(map);
    }
    let slots: Vec<LesSlot> = terms
        .iter()
        .enumerate()
        .map(|(i, (n, term, basis))| {
            let incoming = if i == 0 { Matrix::zeros(basis.dim(), 0) } else { maps[i - 1].clone() };
            let outgoing = &maps[i];
            let composite_zero = outgoing.compose(&incoming).is_zero();
            let (rank_in, rank_out) = (rank(&incoming), rank(outgoing));
            LesSlot {
                degree: *n,
                term: *term,
                dim: basis.dim(),
                rank_in,
                rank_out,
                composite_zero,
                exact: composite_zero && rank_in + rank_out == basis.dim(),
            }
        })
        .collect();
    let passed = slots.iter().all(|s| s.exact);
    Ok(LesReport { slots, passed })
}
