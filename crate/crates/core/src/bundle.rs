//! Bundles of sheaves over a base poset and their total sheaves.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::linalg::{CohomologyBasis, LinalgError, Matrix};
use crate::poset::Poset;
use crate::sheaf::{compose_along, Sheaf, SheafComplex, SheafError, SheafMorphism};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BundleError {
    #[error("{found} fibers for {expected} base elements")]
    FiberCount { expected: usize, found: usize },
    #[error("missing arrow for base cover ({0}, {1})")]
    MissingArrow(String, String),
    #[error("arrow given for ({0}, {1}), which is not a base cover")]
    NotACover(String, String),
    #[error("arrow ({0}, {1}): {2}")]
    Arrow(String, String, Box<SheafError>),
    #[error("base paths {0} < {1} < {3} and {0} < {2} < {3} transport differently")]
    Diamond(String, String, String, String),
    #[error("base elements {0} and {1} are not comparable")]
    Incomparable(String, String),
    #[error("total sheaf: {0}")]
    Total(Box<SheafError>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("bundle is not constant")]
    NotConstant,
}

/// Data of one base cover `x ≺ y`: a monotone map `f: E_x → E_y` and
/// matrices `M_u: F_y(f(u)) → F_x(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrowData {
    pub vertex_map: Vec<usize>,
    pub matrices: Vec<Matrix>,
}

#[derive(Clone, Debug)]
pub struct Bundle {
    base: Arc<Poset>,
    fibers: Vec<Arc<Sheaf>>,
    /// Cover `x ≺ y` ↦ morphism `ξ(y) → ξ(x)`.
    arrows: BTreeMap<(usize, usize), SheafMorphism>,
    transports: Vec<Vec<Option<SheafMorphism>>>,
    fiber_complexes: OnceLock<Vec<Arc<SheafComplex>>>,
}

impl Bundle {
    pub fn new(
        base: Arc<Poset>,
        fibers: Vec<Arc<Sheaf>>,
        arrows: BTreeMap<(usize, usize), ArrowData>,
    ) -> Result<Self, BundleError> {
        let b = &*base;
        if fibers.len() != b.len() {
            return Err(BundleError::FiberCount { expected: b.len(), found: fibers.len() });
        }
        let name = |i: usize| b.names().get(i).cloned().unwrap_or_else(|| i.to_string());
        for &(x, y) in arrows.keys() {
            if x >= b.len() || y >= b.len() || !b.is_cover(x, y) {
                return Err(BundleError::NotACover(name(x), name(y)));
            }
        }
        let mut morphisms = BTreeMap::new();
        for &(x, y) in b.covers() {
            let data = arrows.get(&(x, y)).ok_or_else(|| BundleError::MissingArrow(name(x), name(y)))?;
            let m = SheafMorphism::new(
                fibers[y].clone(),
                fibers[x].clone(),
                data.vertex_map.clone(),
                data.matrices.clone(),
            )
            .map_err(|e| BundleError::Arrow(name(x), name(y), Box::new(e)))?;
            morphisms.insert((x, y), m);
        }
        Self::from_morphisms(base, fibers, morphisms)
    }

    fn from_morphisms(
        base: Arc<Poset>,
        fibers: Vec<Arc<Sheaf>>,
        arrows: BTreeMap<(usize, usize), SheafMorphism>,
    ) -> Result<Self, BundleError> {
        let b = &*base;
        let transports = compose_along(
            b,
            |x| SheafMorphism::identity(fibers[x].clone()),
            |x, a| arrows[&(x, a)].clone(),
            |first, rest| rest.then_unchecked(first),
        )
        .map_err(|(x, a, c, z)| {
            BundleError::Diamond(b.name(x).into(), b.name(a).into(), b.name(c).into(), b.name(z).into())
        })?;
        Ok(Self { base, fibers, arrows, transports, fiber_complexes: OnceLock::new() })
    }

    /// Every fiber is `sheaf`, every arrow is the identity.
    pub fn constant(base: Arc<Poset>, sheaf: Arc<Sheaf>) -> Self {
        let fibers = vec![sheaf.clone(); base.len()];
        let arrows = base.covers().iter().map(|&c| (c, SheafMorphism::identity(sheaf.clone()))).collect();
        Self::from_morphisms(base, fibers, arrows).expect("constant bundle is valid")
    }

    pub fn base(&self) -> &Arc<Poset> {
        &self.base
    }

    pub fn fibers(&self) -> &[Arc<Sheaf>] {
        &self.fibers
    }

    pub fn fiber(&self, x: usize) -> &Arc<Sheaf> {
        &self.fibers[x]
    }

    pub fn arrows(&self) -> &BTreeMap<(usize, usize), SheafMorphism> {
        &self.arrows
    }

    /// Morphism `ξ(y) → ξ(x)` for `x ≤ y`, composed along any cover path.
    pub fn transport(&self, x: usize, y: usize) -> Result<&SheafMorphism, BundleError> {
        self.transports[x][y]
            .as_ref()
            .ok_or_else(|| BundleError::Incomparable(self.base.name(x).into(), self.base.name(y).into()))
    }

    pub(crate) fn transport_unchecked(&self, x: usize, y: usize) -> &SheafMorphism {
        self.transports[x][y].as_ref().expect("transport along a comparable pair")
    }

    pub fn is_constant(&self) -> bool {
        self.fibers.windows(2).all(|w| w[0] == w[1]) && self.arrows.values().all(|m| m.is_identity())
    }

    /// Largest fiber height (`Q_max`).
    pub fn max_fiber_height(&self) -> usize {
        self.fibers.iter().map(|f| f.poset().height()).max().unwrap_or(0)
    }

    pub fn total_elements(&self) -> usize {
        self.fibers.iter().map(|f| f.poset().len()).sum()
    }

    pub fn fiber_complexes(&self) -> &[Arc<SheafComplex>] {
        self.fiber_complexes.get_or_init(|| {
            // identical fibers share one complex
            let mut out: Vec<Arc<SheafComplex>> = Vec::with_capacity(self.fibers.len());
            for (x, f) in self.fibers.iter().enumerate() {
                let shared = (0..x).find(|&y| Arc::ptr_eq(&self.fibers[y], f)).map(|y| out[y].clone());
                out.push(shared.unwrap_or_else(|| Arc::new(SheafComplex::new(f.clone()))));
            }
            out
        })
    }

    /// Restriction to the listed base elements; `map[local] = parent id`.
    pub fn restrict(&self, members: &[usize]) -> (Bundle, Vec<usize>) {
        let (poset, map) = self.base.view(members.iter().copied()).to_poset();
        let fibers: Vec<Arc<Sheaf>> = map.iter().map(|&x| self.fibers[x].clone()).collect();
        let arrows =
            poset.covers().iter().map(|&(a, b)| ((a, b), self.transport_unchecked(map[a], map[b]).clone())).collect();
        let bundle = Self::from_morphisms(Arc::new(poset), fibers, arrows).expect("restriction of a valid bundle");
        (bundle, map)
    }

    /// Arrow data as given on covers (for serialization).
    pub fn arrow_data(&self) -> BTreeMap<(usize, usize), ArrowData> {
        self.arrows
            .iter()
            .map(|(&c, m)| (c, ArrowData { vertex_map: m.vertex_map().to_vec(), matrices: m.components().to_vec() }))
            .collect()
    }

    pub fn total_sheaf(&self) -> Result<TotalSheaf, BundleError> {
        TotalSheaf::new(self)
    }

    /// Stalk `S^q(E_x, F_x)`; restrictions are the induced chain maps.
    pub fn q_cochain_sheaf(&self, q: usize) -> Result<Sheaf, BundleError> {
        let fc = self.fiber_complexes();
        let dims = fc.iter().map(|c| c.dim(q)).collect();
        let restrictions = self.arrows.iter().map(|(&(x, y), m)| ((x, y), fc[y].induced(m, &fc[x], q))).collect();
        Sheaf::new(self.base.clone(), dims, restrictions).map_err(|e| BundleError::Total(Box::new(e)))
    }

    /// Stalk `H^q(E_x, F_x)` over ℚ; restrictions are the maps induced on
    /// cohomology, expressed in deterministic representative bases.
    pub fn fib_cohomology_sheaf(&self, q: usize) -> Result<Sheaf, BundleError> {
        let fc = self.fiber_complexes();
        let bases: Vec<CohomologyBasis> =
            fc.par_iter().map(|c| c.complex().cohomology_basis(q)).collect::<Result<_, _>>()?;
        let dims = bases.iter().map(|h| h.dim()).collect();
        let mut restrictions = BTreeMap::new();
        for (&(x, y), m) in &self.arrows {
            let chain_map = fc[y].induced(m, &fc[x], q);
            restrictions.insert((x, y), bases[y].induced(&chain_map, &bases[x])?);
        }
        Sheaf::new(self.base.clone(), dims, restrictions).map_err(|e| BundleError::Total(Box::new(e)))
    }
}

/// The glued poset `E` with sheaf `F`; element ids are `(x, u)` pairs laid
/// out fiber by fiber in base order.
#[derive(Clone, Debug)]
pub struct TotalSheaf {
    sheaf: Arc<Sheaf>,
    projection: Vec<usize>,
    local: Vec<usize>,
    offsets: Vec<usize>,
}

impl TotalSheaf {
    fn new(bundle: &Bundle) -> Result<Self, BundleError> {
        let base = bundle.base();
        let mut projection = Vec::new();
        let mut local = Vec::new();
        let mut offsets = Vec::new();
        let mut names = Vec::new();
        for (x, f) in bundle.fibers().iter().enumerate() {
            offsets.push(projection.len());
            for u in 0..f.poset().len() {
                projection.push(x);
                local.push(u);
                names.push(format!("({},{})", base.name(x), f.poset().name(u)));
            }
        }
        let n = projection.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let (x, y) = (projection[i], projection[j]);
                        base.leq(x, y)
                            && bundle
                                .fiber(y)
                                .poset()
                                .leq(bundle.transport_unchecked(x, y).vertex_map()[local[i]], local[j])
                    })
                    .collect()
            })
            .collect();
        let poset = Arc::new(Poset::from_leq(names, leq));
        let dims = (0..n).map(|i| bundle.fiber(projection[i]).dim(local[i])).collect();
        let restrictions = poset
            .covers()
            .iter()
            .map(|&(i, j)| {
                let (x, y) = (projection[i], projection[j]);
                let t = bundle.transport_unchecked(x, y);
                let fu = t.vertex_map()[local[i]];
                let m = t.component(local[i]).compose(bundle.fiber(y).along(fu, local[j]));
                ((i, j), m)
            })
            .collect();
        let sheaf = Sheaf::new(poset, dims, restrictions).map_err(|e| BundleError::Total(Box::new(e)))?;
        Ok(Self { sheaf: Arc::new(sheaf), projection, local, offsets })
    }

    pub fn sheaf(&self) -> &Arc<Sheaf> {
        &self.sheaf
    }

    pub fn poset(&self) -> &Arc<Poset> {
        self.sheaf.poset()
    }

    /// `π: E → B`.
    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    /// Position of each element inside its fiber.
    pub fn local(&self) -> &[usize] {
        &self.local
    }

    /// Id of `(x, u)`.
    pub fn id(&self, x: usize, u: usize) -> usize {
        self.offsets[x] + u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{antichain, boolean_lattice, chain_poset};

    fn one() -> Matrix {
        Matrix::identity(1)
    }

    #[test]
    fn constant_over_b1_point() {
        let b = Bundle::constant(Arc::new(chain_poset(2)), Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1)));
        assert!(b.is_constant());
        let t = b.total_sheaf().unwrap();
        assert_eq!(t.poset().len(), 2);
        assert_eq!(t.poset().covers(), &[(0, 1)]);
    }

    #[test]
    fn constant_over_b1_antichain() {
        let b = Bundle::constant(Arc::new(chain_poset(2)), Arc::new(Sheaf::constant(Arc::new(antichain(2)), 1)));
        let t = b.total_sheaf().unwrap();
        // (0,a) < (1,a) and (0,b) < (1,b), nothing else
        assert_eq!(t.poset().covers(), &[(0, 2), (1, 3)]);
    }

    #[test]
    fn i1_glues_to_three_chain() {
        let e0 = Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1));
        let e1 = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let arrows = BTreeMap::from([((0, 1), ArrowData { vertex_map: vec![0, 0], matrices: vec![one(), one()] })]);
        let b = Bundle::new(Arc::new(chain_poset(2)), vec![e0, e1], arrows).unwrap();
        let t = b.total_sheaf().unwrap();
        assert_eq!(t.poset().covers(), &[(0, 1), (1, 2)]);
        assert!(t.sheaf().is_constant());
        let s0 = b.q_cochain_sheaf(0).unwrap();
        assert_eq!(s0.dims(), &[2, 1]);
        let h0 = b.fib_cohomology_sheaf(0).unwrap();
        assert_eq!(h0.dims(), &[1, 1]);
        assert_eq!(h0.restrictions()[&(0, 1)], one());
    }

    #[test]
    fn doubled_diamond_leg_is_named() {
        let point = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let base = Arc::new(boolean_lattice(2));
        let mut arrows: BTreeMap<_, _> =
            base.covers().iter().map(|&c| (c, ArrowData { vertex_map: vec![0], matrices: vec![one()] })).collect();
        arrows.get_mut(&(2, 3)).unwrap().matrices[0] = Matrix::from_i64(&[&[2]]);
        let err = Bundle::new(base, vec![point; 4], arrows).unwrap_err();
        assert!(matches!(err, BundleError::Diamond(..)), "{err}");
    }

    #[test]
    fn missing_arrow_named() {
        let point = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1));
        let err = Bundle::new(Arc::new(chain_poset(2)), vec![point.clone(), point], BTreeMap::new()).unwrap_err();
        assert_eq!(err, BundleError::MissingArrow("0".into(), "1".into()));
    }

    #[test]
    fn restriction_keeps_fibers() {
        let f = Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1));
        let b = Bundle::constant(Arc::new(boolean_lattice(2)), f);
        let (r, map) = b.restrict(&[1, 3]);
        assert_eq!(map, vec![1, 3]);
        assert_eq!(r.base().len(), 2);
        assert_eq!(r.total_elements(), 4);
        let (s, _) = b.restrict(&[2]);
        assert_eq!(s.total_sheaf().unwrap().poset().len(), 2);
    }
}
