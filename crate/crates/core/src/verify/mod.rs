//! Chain-level certification of the decomposition argument.

pub mod chain_map;
pub mod les;
pub mod main_theorem;
pub mod split;

use thiserror::Error;

use crate::bundle::BundleError;
use crate::linalg::LinalgError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("no unique minimal element above {0:?} in the upper half")]
    GluedMinimum(Vec<String>),
    #[error("bundle is not constant")]
    NotConstant,
    #[error("base has no global minimum")]
    NoMinimum,
    #[error("base is not recursively admissible")]
    NotRecursivelyAdmissible,
    #[error("connecting map in degree {0} cannot be expressed through α")]
    ConnectingMap(usize),
}
