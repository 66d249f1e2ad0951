//! Deterministic fixtures and random generators for posets, sheaves and
//! bundles.
//!
//! Random sheaves and bundles are built top-down: the data attached to an
//! element is drawn from the solution space of the linear constraints
//! imposed by everything above it, so every draw is valid by construction.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bundle::{ArrowData, Bundle, BundleError};
use crate::linalg::{kernel_vectors, scalar, Matrix, Scalar, SparseVec};
use crate::poset::{boolean_lattice, chain_poset, random_poset_with, Poset};
use crate::sheaf::Sheaf;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("no valid sample after {0} attempts")]
    RetryBudget(usize),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

const RETRIES: usize = 200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every fiber `(fiber, ΔQ^dim)`, every arrow the identity.
pub fn constant_bundle(base: Poset, fiber: Poset, dim: usize) -> Bundle {
    Bundle::constant(Arc::new(base), Arc::new(Sheaf::constant(Arc::new(fiber), dim)))
}

/// Base `0 < 1`; `E_0` a chain of `len` elements, `E_1` a point, constant
/// stalks of dimension `dim`, vertex map constant, identity matrices.
/// `i1(2, 1)` glues to the 3-chain.
pub fn i1(len: usize, dim: usize) -> Bundle {
    let e0 = Arc::new(Sheaf::constant(Arc::new(chain_poset(len)), dim));
    let e1 = Arc::new(Sheaf::constant(Arc::new(chain_poset(1)), dim));
    let arrow = ArrowData { vertex_map: vec![0; len], matrices: vec![Matrix::identity(dim); len] };
    Bundle::new(Arc::new(chain_poset(2)), vec![e0, e1], BTreeMap::from([((0, 1), arrow)])).expect("I1 bundle is valid")
}

/// `i1(len, dim)` for `len ∈ 1..=3`, `dim ∈ 1..=2`.
pub fn i1_family() -> Vec<(String, Bundle)> {
    let mut out = Vec::new();
    for len in 1..=3 {
        for dim in 1..=2 {
            out.push((format!("i1-len{len}-dim{dim}"), i1(len, dim)));
        }
    }
    out
}

/// Square of 2-dimensional stalks over `B_2` with point fibers and
/// non-identity, commuting edge maps.
pub fn cube_fixture() -> Bundle {
    let base = Arc::new(boolean_lattice(2));
    let point = Arc::new(chain_poset(1));
    let fiber = Arc::new(Sheaf::constant(point, 2));
    let fibers = vec![fiber; 4];
    let m = |rows: &[&[i64]]| Matrix::from_i64(rows);
    // {} ≺ {1} ≺ {1,2} and {} ≺ {2} ≺ {1,2} compose to the same map
    let a = m(&[&[1, 1], &[0, 1]]);
    let c = m(&[&[0, 1], &[1, 0]]);
    let b = m(&[&[1, 0], &[0, -1]]);
    let d = b.compose(&a).compose(&c);
    let arrow = |mat: Matrix| ArrowData { vertex_map: vec![0], matrices: vec![mat] };
    let arrows = BTreeMap::from([((0, 1), arrow(a)), ((1, 3), arrow(c)), ((0, 2), arrow(b)), ((2, 3), arrow(d))]);
    Bundle::new(base, fibers, arrows).expect("cube fixture is valid")
}

/// Elements ordered so that everything above `u` comes before `u`.
fn top_down(p: &Poset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by_key(|&u| ((0..p.len()).filter(|&v| p.leq(u, v)).count(), u));
    order
}

/// Linear constraints on a vector of unknown matrix entries.
struct System {
    shapes: Vec<(usize, usize, usize)>,
    unknowns: usize,
    equations: Vec<Vec<(usize, Scalar)>>,
}

impl System {
    fn new() -> Self {
        Self { shapes: Vec::new(), unknowns: 0, equations: Vec::new() }
    }

    fn variable(&mut self, rows: usize, cols: usize) -> usize {
        self.shapes.push((self.unknowns, rows, cols));
        self.unknowns += rows * cols;
        self.shapes.len() - 1
    }

    /// `Σ ± L·X·R = 0`, each term `(L, X, R, sign)`; `None` is an identity.
    fn constrain(&mut self, terms: &[(Option<&Matrix>, usize, Option<&Matrix>, bool)]) {
        let first = &terms[0];
        let (_, xr, xc) = self.shapes[first.1];
        let rows = first.0.map_or(xr, Matrix::rows);
        let cols = first.2.map_or(xc, Matrix::cols);
        let mut eqs = vec![BTreeMap::<usize, Scalar>::new(); rows * cols];
        for &(l, x, r, negative) in terms {
            let (off, xr, xc) = self.shapes[x];
            let l = l.map_or_else(|| Matrix::identity(xr), Matrix::clone).to_dense();
            let r = r.map_or_else(|| Matrix::identity(xc), Matrix::clone).to_dense();
            for i in 0..rows {
                for j in 0..cols {
                    for (k, lk) in l[i].iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                        for (m, rm) in r.iter().map(|row| &row[j]).enumerate().filter(|(_, v)| !v.is_zero()) {
                            let mut c = lk * rm;
                            if negative {
                                c = -c;
                            }
                            *eqs[i * cols + j].entry(off + k * xc + m).or_insert_with(Scalar::zero) += c;
                        }
                    }
                }
            }
        }
        self.equations.extend(eqs.into_iter().map(|e| e.into_iter().filter(|(_, v)| !v.is_zero()).collect()));
    }

    /// A random integer point of the solution space.
    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Matrix> {
        let triplets =
            self.equations.iter().enumerate().flat_map(|(r, eq)| eq.iter().map(move |(c, v)| (r, *c, v.clone())));
        let system = Matrix::from_triplets(self.equations.len(), self.unknowns, triplets);
        let mut x = SparseVec::new();
        for k in kernel_vectors(&system) {
            let c = rng.gen_range(-2i64..=2);
            if c != 0 {
                x.axpy(&scalar::int(c), &primitive(&k));
            }
        }
        self.shapes
            .iter()
            .map(|&(off, rows, cols)| {
                let data: Vec<Vec<Scalar>> =
                    (0..rows).map(|i| (0..cols).map(|j| x.get(off + i * cols + j)).collect()).collect();
                Matrix::from_rows(rows, cols, &data).expect("sample shape")
            })
            .collect()
    }
}

/// Smallest integer multiple of `v`.
fn primitive(v: &SparseVec) -> SparseVec {
    let lcm = v.iter().fold(num_bigint::BigInt::one(), |acc, (_, x)| acc.lcm(x.denom()));
    let scaled = v.scaled(&Scalar::from_integer(lcm));
    let gcd = scaled.iter().fold(num_bigint::BigInt::zero(), |acc, (_, x)| acc.gcd(x.numer()));
    if gcd.is_zero() || gcd.is_one() {
        return scaled;
    }
    scaled.scaled(&Scalar::new(num_bigint::BigInt::one(), gcd.abs()))
}

/// Random restriction matrices for the given stalk dimensions.
pub fn random_sheaf<R: Rng>(poset: Arc<Poset>, dims: Vec<usize>, rng: &mut R) -> Sheaf {
    let p = &*poset;
    let mut along: HashMap<(usize, usize), Matrix> = HashMap::new();
    let mut restrictions = BTreeMap::new();
    for u in top_down(p) {
        let covers = p.upper_covers(u).to_vec();
        let mut sys = System::new();
        let vars: Vec<usize> = covers.iter().map(|&a| sys.variable(dims[u], dims[a])).collect();
        for v in (0..p.len()).filter(|&v| p.lt(u, v)) {
            let below: Vec<usize> = (0..covers.len()).filter(|&i| p.leq(covers[i], v)).collect();
            for w in below.windows(2) {
                let (i, j) = (w[0], w[1]);
                let (fa, fb) = (&along[&(covers[i], v)], &along[&(covers[j], v)]);
                sys.constrain(&[(None, vars[i], Some(fa), false), (None, vars[j], Some(fb), true)]);
            }
        }
        let sample = sys.sample(rng);
        along.insert((u, u), Matrix::identity(dims[u]));
        for (i, &a) in covers.iter().enumerate() {
            restrictions.insert((u, a), sample[i].clone());
        }
        for v in (0..p.len()).filter(|&v| p.lt(u, v)) {
            let i = covers.iter().position(|&a| p.leq(a, v)).expect("some cover lies below v");
            along.insert((u, v), sample[i].compose(&along[&(covers[i], v)]));
        }
    }
    Sheaf::new(poset, dims, restrictions).expect("sampled sheaf is path independent")
}

/// Random sheaf with stalk dimensions in `0..=max_dim`.
pub fn random_sheaf_dims<R: Rng>(poset: Arc<Poset>, max_dim: usize, rng: &mut R) -> Sheaf {
    let dims = (0..poset.len()).map(|_| rng.gen_range(0..=max_dim)).collect();
    random_sheaf(poset, dims, rng)
}

/// Random poset with a global minimum, `n ≥ 1` elements.
pub fn random_rooted_poset<R: Rng>(n: usize, density: f64, rng: &mut R) -> Poset {
    let rest = random_poset_with(n - 1, density, rng);
    let mut covers: Vec<(usize, usize)> = rest.covers().iter().map(|&(a, b)| (a + 1, b + 1)).collect();
    covers.extend(rest.minimal_elements().into_iter().map(|m| (0, m + 1)));
    Poset::new((0..n).map(|i| i.to_string()).collect(), covers).expect("rooted poset is valid")
}

/// Random recursively admissible poset with `1..=max_elements` elements.
/// The size is drawn first so that rejection does not favour small posets.
pub fn random_admissible_base<R: Rng>(max_elements: usize, rng: &mut R) -> Result<Poset, GenError> {
    let n = rng.gen_range(1..=max_elements);
    for _ in 0..RETRIES {
        let p = random_rooted_poset(n, rng.gen_range(0.2..0.8), rng);
        if p.is_recursively_admissible() {
            return Ok(p);
        }
    }
    Err(GenError::RetryBudget(RETRIES))
}

#[derive(Clone, Copy, Debug)]
pub struct BundleParams {
    /// Fibers have `1..=max_fiber` elements.
    pub max_fiber: usize,
    /// Stalks have dimension `1..=max_dim`.
    pub max_dim: usize,
}

impl Default for BundleParams {
    fn default() -> Self {
        Self { max_fiber: 3, max_dim: 2 }
    }
}

/// All order-preserving maps `p → q`.
fn monotone_maps(p: &Poset, q: &Poset) -> Vec<Vec<usize>> {
    fn go(p: &Poset, q: &Poset, order: &[usize], k: usize, f: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        if k == order.len() {
            out.push(f.iter().map(|x| x.expect("assigned")).collect());
            return;
        }
        let u = order[k];
        for t in 0..q.len() {
            f[u] = None;
            let ok = (0..p.len()).all(|v| match f[v] {
                Some(s) => (!p.leq(u, v) || q.leq(t, s)) && (!p.leq(v, u) || q.leq(s, t)),
                None => true,
            });
            if ok {
                f[u] = Some(t);
                go(p, q, order, k + 1, f, out);
            }
        }
        f[u] = None;
    }
    let mut out = Vec::new();
    go(p, q, &(0..p.len()).collect::<Vec<_>>(), 0, &mut vec![None; p.len()], &mut out);
    out
}

/// Transport data from `x` to `y` (for `x ≤ y`) as drawn so far.
struct Transport {
    vertex_map: Vec<usize>,
    matrices: Vec<Matrix>,
}

/// Random natural bundle over `base`.
pub fn random_bundle<R: Rng>(base: Arc<Poset>, params: BundleParams, rng: &mut R) -> Result<Bundle, GenError> {
    for _ in 0..RETRIES {
        if let Some(b) = try_random_bundle(&base, params, rng) {
            return b;
        }
    }
    Err(GenError::RetryBudget(RETRIES))
}

fn try_random_bundle<R: Rng>(base: &Arc<Poset>, params: BundleParams, rng: &mut R) -> Option<Result<Bundle, GenError>> {
    let b = &**base;
    let fibers: Vec<Arc<Sheaf>> = (0..b.len())
        .map(|_| {
            let n = rng.gen_range(1..=params.max_fiber);
            let p = Arc::new(random_poset_with(n, rng.gen_range(0.3..0.9), rng));
            let dims = (0..n).map(|_| rng.gen_range(1..=params.max_dim)).collect();
            Arc::new(random_sheaf(p, dims, rng))
        })
        .collect();
    let mut transports: HashMap<(usize, usize), Transport> = HashMap::new();
    let mut arrows = BTreeMap::new();
    for x in top_down(b) {
        let ex = fibers[x].poset();
        let covers = b.upper_covers(x).to_vec();
        let above: Vec<usize> = (0..b.len()).filter(|&y| b.lt(x, y)).collect();
        // vertex maps: backtrack over one map per upper cover
        let candidates: Vec<Vec<Vec<usize>>> = covers
            .iter()
            .map(|&a| {
                let mut c = monotone_maps(ex, fibers[a].poset());
                c.shuffle(rng);
                c
            })
            .collect();
        let compose = |a: usize, y: usize, f: &[usize]| -> Vec<usize> {
            f.iter().map(|&u| transports[&(a, y)].vertex_map[u]).collect()
        };
        let mut chosen: Vec<usize> = Vec::new();
        let mut next = vec![0usize; covers.len()];
        let mut i = 0;
        while i < covers.len() {
            if next[i] >= candidates[i].len() {
                if i == 0 {
                    return None;
                }
                next[i] = 0;
                i -= 1;
                chosen.pop();
                next[i] += 1;
                continue;
            }
            let f = &candidates[i][next[i]];
            let ok = above.iter().all(|&y| {
                if !b.leq(covers[i], y) {
                    return true;
                }
                (0..i)
                    .filter(|&j| b.leq(covers[j], y))
                    .all(|j| compose(covers[i], y, f) == compose(covers[j], y, &candidates[j][chosen[j]]))
            });
            if ok {
                chosen.push(next[i]);
                i += 1;
            } else {
                next[i] += 1;
            }
        }
        let maps: Vec<Vec<usize>> = (0..covers.len()).map(|i| candidates[i][chosen[i]].clone()).collect();

        // matrices: M^a_u : F_a(f_a u) → F_x(u)
        let fx = &fibers[x];
        let mut sys = System::new();
        let vars: Vec<Vec<usize>> = covers
            .iter()
            .enumerate()
            .map(|(i, &a)| (0..ex.len()).map(|u| sys.variable(fx.dim(u), fibers[a].dim(maps[i][u]))).collect())
            .collect();
        for (i, &a) in covers.iter().enumerate() {
            let fa = &fibers[a];
            for &(u, v) in ex.covers() {
                let right = fa.along(maps[i][u], maps[i][v]);
                sys.constrain(&[
                    (Some(fx.along(u, v)), vars[i][v], None, false),
                    (None, vars[i][u], Some(right), true),
                ]);
            }
        }
        for &y in &above {
            let below: Vec<usize> = (0..covers.len()).filter(|&i| b.leq(covers[i], y)).collect();
            for w in below.windows(2) {
                let (i, j) = (w[0], w[1]);
                for u in 0..ex.len() {
                    let ti = &transports[&(covers[i], y)].matrices[maps[i][u]];
                    let tj = &transports[&(covers[j], y)].matrices[maps[j][u]];
                    sys.constrain(&[(None, vars[i][u], Some(ti), false), (None, vars[j][u], Some(tj), true)]);
                }
            }
        }
        let sample = sys.sample(rng);
        let block = |i: usize, u: usize| sample[vars[i][u]].clone();
        for (i, &a) in covers.iter().enumerate() {
            let matrices = (0..ex.len()).map(|u| block(i, u)).collect();
            arrows.insert((x, a), ArrowData { vertex_map: maps[i].clone(), matrices });
        }
        transports.insert(
            (x, x),
            Transport {
                vertex_map: (0..ex.len()).collect(),
                matrices: (0..ex.len()).map(|u| Matrix::identity(fx.dim(u))).collect(),
            },
        );
        for &y in &above {
            let i = covers.iter().position(|&a| b.leq(a, y)).expect("some cover lies below y");
            let t = &transports[&(covers[i], y)];
            let vertex_map = maps[i].iter().map(|&w| t.vertex_map[w]).collect();
            let matrices = (0..ex.len()).map(|u| block(i, u).compose(&t.matrices[maps[i][u]])).collect();
            transports.insert((x, y), Transport { vertex_map, matrices });
        }
    }
    Some(Bundle::new(base.clone(), fibers, arrows).map_err(GenError::from))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        assert_eq!(i1(2, 1).total_elements(), 3);
        assert_eq!(i1_family().len(), 6);
        assert!(!cube_fixture().is_constant());
    }

    #[test]
    fn monotone_map_count() {
        // monotone maps from a 2-chain to a 2-chain: 00, 01, 11
        assert_eq!(monotone_maps(&chain_poset(2), &chain_poset(2)).len(), 3);
        assert_eq!(monotone_maps(&chain_poset(2), &crate::poset::antichain(2)).len(), 2);
    }

    #[test]
    fn random_sheaves_are_valid_and_reproducible() {
        for seed in 0..20 {
            let p = Arc::new(random_poset_with(6, 0.4, &mut rng(seed)));
            let a = random_sheaf_dims(p.clone(), 3, &mut rng(seed));
            let b = random_sheaf_dims(p, 3, &mut rng(seed));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_bundles_over_b2() {
        let base = Arc::new(boolean_lattice(2));
        let mut r = rng(7);
        for _ in 0..10 {
            let b = random_bundle(base.clone(), BundleParams::default(), &mut r).unwrap();
            assert_eq!(b.base().len(), 4);
        }
    }

    #[test]
    fn admissible_bases() {
        let mut r = rng(3);
        for _ in 0..20 {
            let p = random_admissible_base(6, &mut r).unwrap();
            assert!(p.is_recursively_admissible());
            assert!(p.len() <= 6);
        }
    }
}
