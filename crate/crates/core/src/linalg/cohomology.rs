//! Cohomology of a single slot `C^{n-1} → C^n → C^{n+1}`.

use num_bigint::BigInt;
use num_traits::One;

use super::echelon::QuotientBasis;
use super::matrix::Matrix;
use super::ops::{kernel_vectors, rank};
use super::scalar::Ring;
use super::smith::smith_normal_form;
use super::sparse::SparseVec;
use super::LinalgError;

/// `H^n = ker d_out / im d_in` with a basis of representatives.
#[derive(Clone, Debug)]
pub struct CohomologyBasis {
    quotient: QuotientBasis,
    ambient: usize,
}

impl CohomologyBasis {
    /// `d_in: C^{n-1} → C^n`, `d_out: C^n → C^{n+1}`.
    pub fn new(d_in: &Matrix, d_out: &Matrix) -> Result<Self, LinalgError> {
        check_slot(d_in, d_out)?;
        let cycles = kernel_vectors(d_out);
        Ok(Self { quotient: QuotientBasis::new(d_in.columns(), cycles.iter()), ambient: d_out.cols() })
    }

    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn representatives(&self) -> &[SparseVec] {
        self.quotient.representatives()
    }

    /// Class of a cocycle in the representative basis; `None` if `v` is not
    /// a cocycle.
    pub fn coordinates(&self, v: &SparseVec) -> Option<SparseVec> {
        self.quotient.coordinates(v)
    }

    pub fn is_coboundary(&self, v: &SparseVec) -> bool {
        self.quotient.is_boundary(v)
    }

    /// Matrix of the map `H(self) → H(target)` induced by a cochain map `f`
    /// (`f` must send cocycles to cocycles).
    pub fn induced(&self, f: &Matrix, target: &CohomologyBasis) -> Result<Matrix, LinalgError> {
        if f.cols() != self.ambient || f.rows() != target.ambient {
            return Err(LinalgError::Shape(format!(
                "induced map {}x{} between ambients {} and {}",
                f.rows(),
                f.cols(),
                self.ambient,
                target.ambient
            )));
        }
        let mut cols = Vec::with_capacity(self.dim());
        for r in self.representatives() {
            let image = f.apply(r);
            let c = target
                .coordinates(&image)
                .ok_or_else(|| LinalgError::CompositionNonzero("image of a cocycle is not a cocycle".into()))?;
            cols.push(c);
        }
        Ok(Matrix::from_columns(target.dim(), cols))
    }
}

/// Numerical invariants of one cohomology group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyStep {
    pub betti: usize,
    /// Non-unit invariant factors (only for `Ring::Integer`).
    pub torsion: Vec<BigInt>,
}

pub fn cohomology_step(d_in: &Matrix, d_out: &Matrix, ring: Ring) -> Result<CohomologyStep, LinalgError> {
    check_slot(d_in, d_out)?;
    let betti = d_out.cols() - rank(d_out) - rank(d_in);
    let torsion = match ring {
        Ring::Rational => Vec::new(),
        Ring::Integer => smith_normal_form(d_in)?.invariant_factors().into_iter().filter(|f| !f.is_one()).collect(),
    };
    Ok(CohomologyStep { betti, torsion })
}

fn check_slot(d_in: &Matrix, d_out: &Matrix) -> Result<(), LinalgError> {
    if d_in.rows() != d_out.cols() {
        return Err(LinalgError::Shape(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows(),
            d_out.cols()
        )));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(LinalgError::CompositionNonzero("d_out · d_in ≠ 0".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle() {
        // simplicial circle: 3 vertices, 3 edges
        let d0 = Matrix::from_i64(&[&[-1, 1, 0], &[0, -1, 1], &[-1, 0, 1]]);
        let h0 = cohomology_step(&Matrix::zeros(3, 0), &d0, Ring::Integer).unwrap();
        let h1 = cohomology_step(&d0, &Matrix::zeros(0, 3), Ring::Integer).unwrap();
        assert_eq!((h0.betti, h1.betti), (1, 1));
        assert!(h1.torsion.is_empty());
    }

    #[test]
    fn torsion_two() {
        let d = Matrix::from_i64(&[&[2]]);
        let h = cohomology_step(&d, &Matrix::zeros(0, 1), Ring::Integer).unwrap();
        assert_eq!(h.betti, 0);
        assert_eq!(h.torsion, vec![BigInt::from(2)]);
        let h = cohomology_step(&d, &Matrix::zeros(0, 1), Ring::Rational).unwrap();
        assert!(h.torsion.is_empty());
    }

    #[test]
    fn rejects_non_complex() {
        let d = Matrix::from_i64(&[&[1]]);
        assert!(matches!(cohomology_step(&d, &d, Ring::Rational), Err(LinalgError::CompositionNonzero(_))));
    }

    #[test]
    fn induced_identity() {
        let d0 = Matrix::from_i64(&[&[-1, 1], &[-1, 1]]);
        let h = CohomologyBasis::new(&Matrix::zeros(2, 0), &d0).unwrap();
        assert_eq!(h.dim(), 1);
        let m = h.induced(&Matrix::identity(2), &h).unwrap();
        assert_eq!(m, Matrix::identity(1));
    }
}
