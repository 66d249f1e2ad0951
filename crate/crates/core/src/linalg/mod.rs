//! Exact linear algebra over ℚ (and ℤ where noted).

pub mod cohomology;
pub mod echelon;
pub mod matrix;
pub mod ops;
pub mod scalar;
pub mod smith;
pub mod sparse;

pub use cohomology::{cohomology_step, CohomologyBasis, CohomologyStep};
pub use echelon::{span_basis, span_rank, EchelonBasis, QuotientBasis};
pub use matrix::Matrix;
pub use ops::{image_basis, kernel_basis, kernel_vectors, rank, rref, solve, solve_dense};
pub use scalar::{format_scalar, parse_scalar, Ring, Scalar};
pub use smith::{bareiss, smith_int, smith_normal_form, IntMatrix, SmithForm};
pub use sparse::SparseVec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("cannot parse scalar: {0}")]
    Parse(String),
    #[error("non-canonical scalar: {0}")]
    NonCanonical(String),
    #[error("wrong ring: {0}")]
    WrongRing(String),
    #[error("composition is not zero: {0}")]
    CompositionNonzero(String),
}
