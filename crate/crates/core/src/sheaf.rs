//! Sheaves on posets (contravariant), morphisms, and cochain complexes.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::complex::{BlockLayout, Complex};
use crate::linalg::{scalar, CohomologyStep, LinalgError, Matrix, Ring};
use crate::poset::{Chain, Poset, PosetError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SheafError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{found} stalk dimensions for {expected} elements")]
    DimsLength { expected: usize, found: usize },
    #[error("missing restriction for cover ({0}, {1})")]
    MissingRestriction(String, String),
    #[error("restriction given for ({0}, {1}), which is not a cover")]
    NotACover(String, String),
    #[error("restriction ({0}, {1}) is {2}x{3}, expected {4}x{5}")]
    Shape(String, String, usize, usize, usize, usize),
    #[error("paths {0} < {1} < {3} and {0} < {2} < {3} give different restrictions")]
    PathDependence(String, String, String, String),
    #[error("vertex map has {found} entries, expected {expected}")]
    VertexMapLength { expected: usize, found: usize },
    #[error("vertex map sends {0} outside the source poset")]
    VertexOutOfRange(String),
    #[error("vertex map is not monotone on cover ({0}, {1})")]
    NotMonotone(String, String),
    #[error("component at {0} is {1}x{2}, expected {3}x{4}")]
    ComponentShape(String, usize, usize, usize, usize),
    #[error("naturality fails on cover ({0}, {1})")]
    Naturality(String, String),
    #[error("{0} and {1} are not comparable")]
    Incomparable(String, String),
    #[error("morphisms are not composable")]
    NotComposable,
}

/// Stalk dimensions plus restriction matrices `F(u≺v): F(v) → F(u)`.
#[derive(Clone, Debug)]
pub struct Sheaf {
    poset: Arc<Poset>,
    dims: Vec<usize>,
    restrictions: BTreeMap<(usize, usize), Matrix>,
    /// `along[u][v]` for every `u ≤ v`.
    along: Vec<Vec<Option<Matrix>>>,
}

impl PartialEq for Sheaf {
    fn eq(&self, other: &Self) -> bool {
        *self.poset == *other.poset && self.dims == other.dims && self.restrictions == other.restrictions
    }
}

impl Sheaf {
    /// Validates shapes and path independence.
    pub fn new(
        poset: Arc<Poset>,
        dims: Vec<usize>,
        restrictions: BTreeMap<(usize, usize), Matrix>,
    ) -> Result<Self, SheafError> {
        let p = &*poset;
        if dims.len() != p.len() {
            return Err(SheafError::DimsLength { expected: p.len(), found: dims.len() });
        }
        for &(u, v) in restrictions.keys() {
            if u >= p.len() || v >= p.len() || !p.is_cover(u, v) {
                let name = |i: usize| p.names().get(i).cloned().unwrap_or_else(|| i.to_string());
                return Err(SheafError::NotACover(name(u), name(v)));
            }
        }
        for &(u, v) in p.covers() {
            let m = restrictions
                .get(&(u, v))
                .ok_or_else(|| SheafError::MissingRestriction(p.name(u).into(), p.name(v).into()))?;
            if m.shape() != (dims[u], dims[v]) {
                return Err(SheafError::Shape(
                    p.name(u).into(),
                    p.name(v).into(),
                    m.rows(),
                    m.cols(),
                    dims[u],
                    dims[v],
                ));
            }
        }
        let along =
            compose_along(p, |x| Matrix::identity(dims[x]), |u, a| restrictions[&(u, a)].clone(), |a, b| a.compose(b))
                .map_err(|(u, a, b, v)| {
                    SheafError::PathDependence(p.name(u).into(), p.name(a).into(), p.name(b).into(), p.name(v).into())
                })?;
        Ok(Self { poset, dims, restrictions, along })
    }

    pub fn constant(poset: Arc<Poset>, dim: usize) -> Self {
        let restrictions = poset.covers().iter().map(|&c| (c, Matrix::identity(dim))).collect();
        let dims = vec![dim; poset.len()];
        Self::new(poset, dims, restrictions).expect("constant sheaf is valid")
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, x: usize) -> usize {
        self.dims[x]
    }

    pub fn restrictions(&self) -> &BTreeMap<(usize, usize), Matrix> {
        &self.restrictions
    }

    /// `F(u ≤ v): F(v) → F(u)`; identity when `u = v`.
    pub fn restriction_along(&self, u: usize, v: usize) -> Result<&Matrix, SheafError> {
        self.along[u][v]
            .as_ref()
            .ok_or_else(|| SheafError::Incomparable(self.poset.name(u).into(), self.poset.name(v).into()))
    }

    /// Same as [`Self::restriction_along`] for pairs known to be comparable.
    pub fn along(&self, u: usize, v: usize) -> &Matrix {
        self.along[u][v].as_ref().expect("restriction along a comparable pair")
    }

    pub fn is_constant(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
            && self.restrictions.values().all(|m| *m == Matrix::identity(m.rows()))
    }
}

/// Composes cover data along every `u ≤ v`, checking that every cover path
/// gives the same result. `compose(first, rest)` builds the value for
/// `u ≺ a ≤ v` from the cover value `(u, a)` and the value for `(a, v)`.
/// Returns `(u, a, b, v)` for the first disagreement.
/// `(u, a, b, v)`: two routes `u ≺ a ≤ v` and `u ≺ b ≤ v` that disagree.
pub(crate) type Diamond = (usize, usize, usize, usize);

pub(crate) fn compose_along<T: Clone + PartialEq>(
    p: &Poset,
    identity: impl Fn(usize) -> T,
    cover: impl Fn(usize, usize) -> T,
    compose: impl Fn(&T, &T) -> T,
) -> Result<Vec<Vec<Option<T>>>, Diamond> {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    let up_size: Vec<usize> = (0..n).map(|u| (0..n).filter(|&v| p.leq(u, v)).count()).collect();
    order.sort_by_key(|&u| (up_size[u], u));
    let mut along: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
    for &u in &order {
        along[u][u] = Some(identity(u));
        for v in 0..n {
            if u == v || !p.leq(u, v) {
                continue;
            }
            let mut first: Option<(usize, T)> = None;
            for &a in p.upper_covers(u) {
                if !p.leq(a, v) {
                    continue;
                }
                let rest = along[a][v].as_ref().expect("processed above");
                let value = compose(&cover(u, a), rest);
                match &first {
                    None => first = Some((a, value)),
                    Some((a0, v0)) => {
                        if *v0 != value {
                            return Err((u, *a0, a, v));
                        }
                    }
                }
            }
            along[u][v] = first.map(|(_, v)| v);
        }
    }
    Ok(along)
}

/// `γ = (γ₁, γ₂): (P, F) → (Q, G)` with `γ₁: Q → P` monotone and
/// `γ₂(x): F(γ₁ x) → G(x)` natural in `x`.
#[derive(Clone, Debug)]
pub struct SheafMorphism {
    source: Arc<Sheaf>,
    target: Arc<Sheaf>,
    vertex_map: Vec<usize>,
    components: Vec<Matrix>,
}

impl PartialEq for SheafMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_map == other.vertex_map && self.components == other.components
    }
}

impl SheafMorphism {
    pub fn new(
        source: Arc<Sheaf>,
        target: Arc<Sheaf>,
        vertex_map: Vec<usize>,
        components: Vec<Matrix>,
    ) -> Result<Self, SheafError> {
        let (p, q) = (source.poset(), target.poset());
        if vertex_map.len() != q.len() {
            return Err(SheafError::VertexMapLength { expected: q.len(), found: vertex_map.len() });
        }
        if components.len() != q.len() {
            return Err(SheafError::VertexMapLength { expected: q.len(), found: components.len() });
        }
        for (x, &fx) in vertex_map.iter().enumerate() {
            if fx >= p.len() {
                return Err(SheafError::VertexOutOfRange(q.name(x).into()));
            }
            let expected = (target.dim(x), source.dim(fx));
            if components[x].shape() != expected {
                return Err(SheafError::ComponentShape(
                    q.name(x).into(),
                    components[x].rows(),
                    components[x].cols(),
                    expected.0,
                    expected.1,
                ));
            }
        }
        for &(x, y) in q.covers() {
            let (fx, fy) = (vertex_map[x], vertex_map[y]);
            if !p.leq(fx, fy) {
                return Err(SheafError::NotMonotone(q.name(x).into(), q.name(y).into()));
            }
            let lhs = components[x].compose(source.along(fx, fy));
            let rhs = target.along(x, y).compose(&components[y]);
            if lhs != rhs {
                return Err(SheafError::Naturality(q.name(x).into(), q.name(y).into()));
            }
        }
        Ok(Self { source, target, vertex_map, components })
    }

    pub fn identity(sheaf: Arc<Sheaf>) -> Self {
        let n = sheaf.poset().len();
        let components = (0..n).map(|x| Matrix::identity(sheaf.dim(x))).collect();
        Self { source: sheaf.clone(), target: sheaf, vertex_map: (0..n).collect(), components }
    }

    pub fn source(&self) -> &Arc<Sheaf> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Sheaf> {
        &self.target
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn component(&self, x: usize) -> &Matrix {
        &self.components[x]
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i == v)
            && self.components.iter().all(|m| *m == Matrix::identity(m.rows()))
    }

    /// `next ∘ self`, i.e. `(P,F) → (Q,G) → (R,H)`.
    pub fn then(&self, next: &SheafMorphism) -> Result<SheafMorphism, SheafError> {
        if *self.target != *next.source {
            return Err(SheafError::NotComposable);
        }
        Ok(self.then_unchecked(next))
    }

    pub(crate) fn then_unchecked(&self, next: &SheafMorphism) -> SheafMorphism {
        let vertex_map = next.vertex_map.iter().map(|&y| self.vertex_map[y]).collect();
        let components =
            next.vertex_map.iter().zip(&next.components).map(|(&y, d)| d.compose(&self.components[y])).collect();
        SheafMorphism { source: self.source.clone(), target: next.target.clone(), vertex_map, components }
    }
}

/// `S^*(P, F)` with its chain layout; coordinates of a chain live in the
/// stalk at its minimum.
#[derive(Clone, Debug)]
pub struct SheafComplex {
    sheaf: Arc<Sheaf>,
    layouts: Vec<BlockLayout<Chain>>,
    complex: Complex,
}

impl SheafComplex {
    pub fn new(sheaf: Arc<Sheaf>) -> Self {
        let p = sheaf.poset().clone();
        let layouts: Vec<BlockLayout<Chain>> = p
            .all_chains()
            .iter()
            .map(|level| BlockLayout::new(level.iter().map(|c| (c.clone(), sheaf.dim(c[0])))))
            .collect();
        let dims: Vec<usize> = layouts.iter().map(|l| l.total()).collect();
        let diffs: Vec<Matrix> = (0..layouts.len())
            .into_par_iter()
            .map(|k| {
                let Some(rows) = layouts.get(k + 1) else {
                    return Matrix::zeros(0, dims[k]);
                };
                let cols = &layouts[k];
                let blocks: Vec<Vec<(usize, usize, scalar::Scalar)>> = rows
                    .keys()
                    .par_iter()
                    .map(|chain| {
                        let row = rows.offset_of(chain).unwrap();
                        let mut out = Vec::new();
                        for j in 0..chain.len() {
                            let mut face = chain.clone();
                            face.remove(j);
                            let col = cols.offset_of(&face).expect("face of a chain is a chain");
                            if j == 0 {
                                for (r, c, v) in sheaf.along(chain[0], chain[1]).triplets() {
                                    out.push((row + r, col + c, v));
                                }
                            } else {
                                let s = scalar::sign(j);
                                for i in 0..sheaf.dim(chain[0]) {
                                    out.push((row + i, col + i, s.clone()));
                                }
                            }
                        }
                        out
                    })
                    .collect();
                Matrix::from_triplets(dims[k + 1], dims[k], blocks.into_iter().flatten())
            })
            .collect();
        let complex = Complex::new(dims, diffs).expect("cochain differential shapes");
        Self { sheaf, layouts, complex }
    }

    pub fn sheaf(&self) -> &Arc<Sheaf> {
        &self.sheaf
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    /// Chain layout in degree `k` (empty above the height).
    pub fn layout(&self, k: usize) -> Option<&BlockLayout<Chain>> {
        self.layouts.get(k)
    }

    pub fn dim(&self, k: usize) -> usize {
        self.complex.dim(k)
    }

    pub fn cohomology(&self, ring: Ring) -> Result<Vec<CohomologyStep>, LinalgError> {
        self.complex.cohomology(ring)
    }

    /// Degree-`k` component of `γ*: S^k(P,F) → S^k(Q,G)`, where `self` is
    /// the source complex `S(P,F)` and `target` is `S(Q,G)`.
    pub fn induced(&self, gamma: &SheafMorphism, target: &SheafComplex, k: usize) -> Matrix {
        let (rows, cols) = (target.dim(k), self.dim(k));
        let (Some(tl), Some(sl)) = (target.layout(k), self.layout(k)) else {
            return Matrix::zeros(rows, cols);
        };
        let mut triplets = Vec::new();
        for (sigma, row, _) in tl.iter() {
            let image: Chain = sigma.iter().map(|&y| gamma.vertex_map()[y]).collect();
            if image.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let col = sl.offset_of(&image).expect("monotone image of a chain is a chain");
            for (r, c, v) in gamma.component(sigma[0]).triplets() {
                triplets.push((row + r, col + c, v));
            }
        }
        Matrix::from_triplets(rows, cols, triplets)
    }

    /// All degrees of the induced chain map.
    pub fn induced_all(&self, gamma: &SheafMorphism, target: &SheafComplex) -> Vec<Matrix> {
        let n = self.complex.len().max(target.complex.len());
        (0..n).map(|k| self.induced(gamma, target, k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{antichain, boolean_lattice, chain_poset};

    fn int(n: i64) -> Matrix {
        Matrix::from_i64(&[&[n]])
    }

    #[test]
    fn constant_sheaves() {
        let b = Arc::new(boolean_lattice(2));
        let f = Sheaf::constant(b.clone(), 1);
        assert_eq!(f.dims(), &[1, 1, 1, 1]);
        assert!(f.is_constant());
        let z = Sheaf::constant(b, 0);
        assert_eq!(z.dims(), &[0, 0, 0, 0]);
        let s = Sheaf::constant(Arc::new(chain_poset(1)), 3);
        assert_eq!(s.dims(), &[3]);
    }

    #[test]
    fn negated_diamond_leg_is_named() {
        let b = Arc::new(boolean_lattice(2));
        let mut r: BTreeMap<_, _> = b.covers().iter().map(|&c| (c, int(1))).collect();
        r.insert((2, 3), int(-1));
        let err = Sheaf::new(b, vec![1; 4], r).unwrap_err();
        assert_eq!(err, SheafError::PathDependence("{}".into(), "{1}".into(), "{2}".into(), "{1,2}".into()));
    }

    #[test]
    fn restriction_composition() {
        let c = Arc::new(chain_poset(3));
        let r = BTreeMap::from([((0, 1), int(2)), ((1, 2), int(3))]);
        let f = Sheaf::new(c, vec![1; 3], r).unwrap();
        assert_eq!(*f.restriction_along(0, 2).unwrap(), int(6));
        assert_eq!(*f.restriction_along(1, 1).unwrap(), int(1));
        assert!(f.restriction_along(2, 0).is_err());
    }

    #[test]
    fn missing_and_misshapen() {
        let c = Arc::new(chain_poset(2));
        assert!(matches!(Sheaf::new(c.clone(), vec![1, 1], BTreeMap::new()), Err(SheafError::MissingRestriction(..))));
        let r = BTreeMap::from([((0, 1), Matrix::zeros(2, 1))]);
        assert!(matches!(Sheaf::new(c, vec![1, 1], r), Err(SheafError::Shape(..))));
    }

    #[test]
    fn small_complexes() {
        let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), 1)));
        assert_eq!(s.complex().dims(), &[1]);
        let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1)));
        assert_eq!(s.complex().dims(), &[2, 1]);
        // σ = (a, b): face 0 is b (restricted), face 1 is a with sign −1
        assert_eq!(*s.complex().d(0), Matrix::from_i64(&[&[-1, 1]]));
        assert_eq!(s.complex().betti(), vec![1, 0]);
        let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(boolean_lattice(2)), 1)));
        assert_eq!(s.complex().dims(), &[4, 5, 2]);
        assert_eq!(s.complex().betti(), vec![1, 0, 0]);
        let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(antichain(2)), 1)));
        assert_eq!(s.complex().betti(), vec![2]);
    }

    #[test]
    fn induced_identity_and_collapse() {
        let c = Arc::new(chain_poset(2));
        let f = Arc::new(Sheaf::constant(c.clone(), 1));
        let s = SheafComplex::new(f.clone());
        let id = SheafMorphism::identity(f.clone());
        assert_eq!(s.induced(&id, &s, 0), Matrix::identity(2));
        assert_eq!(s.induced(&id, &s, 1), Matrix::identity(1));
        // collapse the 2-chain onto its top element
        let g = SheafMorphism::new(f.clone(), f.clone(), vec![1, 1], vec![int(1), int(1)]).unwrap();
        assert!(s.induced(&g, &s, 1).is_zero());
        assert_eq!(s.induced(&g, &s, 0), Matrix::from_i64(&[&[0, 1], &[0, 1]]));
    }
}
