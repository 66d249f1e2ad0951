//! Everything computed from one bundle: total sheaf, `S(E)`, bicomplex,
//! total complex and `φ`.

use std::sync::Arc;

use crate::bicomplex::{Bicomplex, TotalComplex};
use crate::bundle::{Bundle, BundleError, TotalSheaf};
use crate::sheaf::SheafComplex;
use crate::traversal::phi;
use crate::verify::chain_map::ChainMap;

#[derive(Debug)]
pub struct BundleComplexes {
    pub bundle: Arc<Bundle>,
    pub total_sheaf: TotalSheaf,
    /// `S^*(E, F)`.
    pub cochains: SheafComplex,
    pub bicomplex: Bicomplex,
    /// `T^*(E, F)`.
    pub total: TotalComplex,
    /// `φ: S^*(E, F) → T^*(E, F)`.
    pub phi: ChainMap,
}

impl BundleComplexes {
    pub fn new(bundle: Arc<Bundle>) -> Result<Self, BundleError> {
        let total_sheaf = bundle.total_sheaf()?;
        let (cochains, bicomplex) =
            rayon::join(|| SheafComplex::new(total_sheaf.sheaf().clone()), || Bicomplex::new(bundle.clone()));
        let total = bicomplex.total();
        let maps = phi(&bicomplex, &total, &total_sheaf, &cochains);
        let phi = ChainMap::unchecked(Arc::new(cochains.complex().clone()), total.complex().clone(), maps, 0);
        Ok(Self { bundle, total_sheaf, cochains, bicomplex, total, phi })
    }

    pub fn source(&self) -> &Arc<crate::complex::Complex> {
        self.phi.source()
    }
}
