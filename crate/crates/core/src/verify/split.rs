//! Splitting `T(E)` and `S(E)` along an admissible atom `x`: the quotient
//! maps `ρ`, the kernels `D` and `M`, and the maps `α`, `α₁`, `α₂`.

use std::sync::Arc;

use serde::Serialize;

use crate::complex::Complex;
use crate::linalg::{scalar, Matrix, Scalar};
use crate::pipeline::BundleComplexes;
use crate::poset::Chain;
use crate::traversal::iota;
use crate::verify::chain_map::ChainMap;
use crate::verify::VerifyError;

/// Where a coordinate of the whole complex goes under `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Upper(usize),
    Lower(usize),
    Mixed(usize),
}

/// `0 → K → X → X_B ⊕ X_B̄ → 0` realized by coordinate deletion.
#[derive(Clone, Debug)]
pub struct Split {
    /// `ρ: X → X_B ⊕ X_B̄`.
    pub rho: ChainMap,
    /// The kernel complex (`D` or `M`).
    pub kernel: Arc<Complex>,
    /// `ε: K → X`.
    pub epsilon: ChainMap,
    /// `[n]`: positions in `X^n` of the kernel basis.
    pub mixed: Vec<Vec<usize>>,
    /// `[n]`: position in `X^n` of each basis vector of `X_B^n ⊕ X_B̄^n`.
    pub lift: Vec<Vec<usize>>,
    classes: Vec<Vec<Class>>,
    pub report: SplitReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub rho_chain_map: bool,
    pub epsilon_chain_map: bool,
    pub rho_surjective: bool,
    pub epsilon_injective: bool,
    pub exact_in_middle: bool,
    pub kernel_dims: Vec<usize>,
    pub passed: bool,
}

impl Split {
    fn build(whole: &Arc<Complex>, upper: &Complex, lower: &Complex, mut classes: Vec<Vec<Class>>) -> Self {
        let len = whole.len().max(upper.len()).max(lower.len());
        let whole = &Arc::new(whole.padded(len));
        let quotient = Arc::new(upper.direct_sum(lower).padded(len));
        classes.resize(len, Vec::new());
        let mut mixed = Vec::with_capacity(len);
        let mut lift = Vec::with_capacity(len);
        let mut rho_maps = Vec::with_capacity(len);
        let mut eps_maps = Vec::with_capacity(len);
        let mut surjective = true;
        for (n, row) in classes.iter().enumerate() {
            let up = upper.dim(n);
            let mut l = vec![usize::MAX; quotient.dim(n)];
            let mut m = Vec::new();
            let mut triplets: Vec<(usize, usize, Scalar)> = Vec::new();
            for (i, c) in row.iter().enumerate() {
                let j = match *c {
                    Class::Upper(j) => j,
                    Class::Lower(j) => up + j,
                    Class::Mixed(_) => {
                        m.push(i);
                        continue;
                    }
                };
                if l[j] != usize::MAX {
                    surjective = false;
                }
                l[j] = i;
                triplets.push((j, i, scalar::one()));
            }
            surjective &= l.iter().all(|&i| i != usize::MAX);
            rho_maps.push(Matrix::from_triplets(quotient.dim(n), whole.dim(n), triplets));
            eps_maps.push(Matrix::from_triplets(
                whole.dim(n),
                m.len(),
                m.iter().enumerate().map(|(k, &i)| (i, k, scalar::one())),
            ));
            mixed.push(m);
            lift.push(l);
        }
        let kernel = Arc::new(whole.restrict(&mixed));
        let rho = ChainMap::unchecked(whole.clone(), quotient.clone(), rho_maps, 0);
        let epsilon = ChainMap::unchecked(kernel.clone(), whole.clone(), eps_maps, 0);
        let rho_chain_map = rho.commutation_failure().is_none();
        let epsilon_chain_map = epsilon.commutation_failure().is_none();
        let epsilon_injective = (0..len).all(|n| mixed[n].len() == kernel.dim(n));
        let exact_in_middle = (0..len)
            .all(|n| rho.map(n).compose(epsilon.map(n)).is_zero() && kernel.dim(n) + quotient.dim(n) == whole.dim(n));
        let kernel_dims = kernel.dims().to_vec();
        let passed = rho_chain_map && epsilon_chain_map && surjective && epsilon_injective && exact_in_middle;
        let report = SplitReport {
            rho_chain_map,
            epsilon_chain_map,
            rho_surjective: surjective,
            epsilon_injective,
            exact_in_middle,
            kernel_dims,
            passed,
        };
        Self { rho, kernel, epsilon, mixed, lift, classes, report }
    }

    /// Position in the kernel of a coordinate of `X^n`, if mixed.
    fn kernel_index(&self, n: usize, i: usize) -> Option<usize> {
        match self.classes[n][i] {
            Class::Mixed(k) => Some(k),
            _ => None,
        }
    }
}

/// The two halves of a split base, with their id maps into the parent base.
pub struct Halves<'a> {
    pub x: usize,
    pub upper: &'a BundleComplexes,
    pub upper_map: &'a [usize],
    pub lower: &'a BundleComplexes,
    pub lower_map: &'a [usize],
}

impl Halves<'_> {
    fn local(map: &[usize], x: usize) -> usize {
        map.binary_search(&x).expect("element of the half")
    }

    fn in_upper(&self, whole: &BundleComplexes, b: usize) -> bool {
        whole.bundle.base().leq(self.x, b)
    }

    fn sub_chain(map: &[usize], sigma: &[usize]) -> Chain {
        sigma.iter().map(|&b| Self::local(map, b)).collect()
    }

    /// Id in a half's total poset of a parent total element.
    fn sub_element(whole: &BundleComplexes, half: &BundleComplexes, map: &[usize], e: usize) -> usize {
        let ts = &whole.total_sheaf;
        half.total_sheaf.id(Self::local(map, ts.projection()[e]), ts.local()[e])
    }
}

/// Visits every `σ`-block of `T^n`: `(p, q, σ, position, width)`.
fn total_blocks(whole: &BundleComplexes, n: usize, mut visit: impl FnMut(usize, usize, &Chain, usize, usize)) {
    for &(p, offset, _) in whole.total.blocks(n) {
        let q = n - p;
        let layout = whole.bicomplex.sigma_layout(p, q).expect("total block");
        for (sigma, soff, w) in layout.iter() {
            visit(p, q, sigma, offset + soff, w);
        }
    }
}

fn sub_total_offset(half: &BundleComplexes, p: usize, q: usize, sigma: &Chain) -> usize {
    let n = p + q;
    half.total.block_offset(n, p).expect("block of the half")
        + half.bicomplex.sigma_layout(p, q).and_then(|l| l.offset_of(sigma)).expect("chain of the half")
}

/// `ρ_T`, `D` and `ε_T`.
pub fn split_total(whole: &BundleComplexes, halves: &Halves<'_>) -> Split {
    let len = whole.total.complex().len();
    let mut classes = Vec::with_capacity(len);
    for n in 0..len {
        let mut row = vec![Class::Mixed(0); whole.total.complex().dim(n)];
        let mut mixed = 0;
        total_blocks(whole, n, |p, q, sigma, pos, w| {
            if w == 0 {
                return;
            }
            let first_up = halves.in_upper(whole, sigma[0]);
            let last_up = halves.in_upper(whole, *sigma.last().unwrap());
            for i in 0..w {
                row[pos + i] = if first_up {
                    let s = Halves::sub_chain(halves.upper_map, sigma);
                    Class::Upper(sub_total_offset(halves.upper, p, q, &s) + i)
                } else if !last_up {
                    let s = Halves::sub_chain(halves.lower_map, sigma);
                    Class::Lower(sub_total_offset(halves.lower, p, q, &s) + i)
                } else {
                    mixed += 1;
                    Class::Mixed(mixed - 1)
                };
            }
        });
        classes.push(row);
    }
    Split::build(whole.total.complex(), halves.upper.total.complex(), halves.lower.total.complex(), classes)
}

/// `ρ_S`, `M` and `ε_S`.
pub fn split_cochain(whole: &BundleComplexes, halves: &Halves<'_>) -> Split {
    let len = whole.cochains.complex().len();
    let proj = whole.total_sheaf.projection();
    let mut classes = Vec::with_capacity(len);
    for n in 0..len {
        let mut row = vec![Class::Mixed(0); whole.cochains.dim(n)];
        let mut mixed = 0;
        let layout = whole.cochains.layout(n).expect("cochain degree");
        for (chain, pos, w) in layout.iter() {
            let first_up = halves.in_upper(whole, proj[chain[0]]);
            let last_up = halves.in_upper(whole, proj[*chain.last().unwrap()]);
            let target = if first_up {
                Some((halves.upper, halves.upper_map, true))
            } else if !last_up {
                Some((halves.lower, halves.lower_map, false))
            } else {
                None
            };
            for i in 0..w {
                row[pos + i] = match target {
                    Some((half, map, up)) => {
                        let sub: Chain = chain.iter().map(|&e| Halves::sub_element(whole, half, map, e)).collect();
                        let j = half.cochains.layout(n).and_then(|l| l.offset_of(&sub)).expect("chain of the half") + i;
                        if up {
                            Class::Upper(j)
                        } else {
                            Class::Lower(j)
                        }
                    }
                    None => {
                        mixed += 1;
                        Class::Mixed(mixed - 1)
                    }
                };
            }
        }
        classes.push(row);
    }
    Split::build(whole.source(), halves.upper.cochains.complex(), halves.lower.cochains.complex(), classes)
}

/// `α₁: T^{n-1}(E_B̄) → D^n`, `α₁u|_{σ,τ} = (−1)^q u|_{σ',τ}` when `σ` has
/// exactly one element in `B(x)` (its last), zero otherwise.
pub fn alpha1(whole: &BundleComplexes, halves: &Halves<'_>, split: &Split) -> ChainMap {
    let source = Arc::new(halves.lower.total.complex().shifted());
    let len = split.kernel.len().max(source.len());
    let mut maps = Vec::with_capacity(len);
    for n in 0..len {
        let mut triplets: Vec<(usize, usize, Scalar)> = Vec::new();
        if n < whole.total.complex().len() {
            total_blocks(whole, n, |p, q, sigma, pos, w| {
                let ups = sigma.iter().filter(|&&b| halves.in_upper(whole, b)).count();
                if w == 0 || ups != 1 || p == 0 {
                    return;
                }
                let prefix = Halves::sub_chain(halves.lower_map, &sigma[..p]);
                let col = sub_total_offset(halves.lower, p - 1, q, &prefix);
                let sign = scalar::sign(q);
                for i in 0..w {
                    let row = split.kernel_index(n, pos + i).expect("mixed coordinate");
                    triplets.push((row, col + i, sign.clone()));
                }
            });
        }
        maps.push(Matrix::from_triplets(split.kernel.dim(n), source.dim(n), triplets));
    }
    ChainMap::unchecked(source, split.kernel.clone(), maps, 1)
}

/// Every `y ∈ E_B̄` has a unique minimal element above it in `E_B`.
/// Returns the offending element names otherwise.
pub fn glued_minimum_failures(whole: &BundleComplexes, halves: &Halves<'_>) -> Vec<String> {
    let e = whole.total_sheaf.poset();
    let proj = whole.total_sheaf.projection();
    let upper: Vec<usize> = (0..e.len()).filter(|&z| halves.in_upper(whole, proj[z])).collect();
    (0..e.len())
        .filter(|&y| !halves.in_upper(whole, proj[y]))
        .filter(|&y| e.view(upper.iter().copied().filter(|&z| e.leq(y, z))).unique_minimum().is_none())
        .map(|y| e.name(y).to_string())
        .collect()
}

/// `α₂: S^{n-1}(E_B̄) → M^n`, `α₂u|_{z₀..z_n} = u|_{z₀..z_{n-1}}` when
/// `z_{n-1} ∈ E_B̄` and `z_n ∈ E_B`, zero otherwise.
pub fn alpha2(whole: &BundleComplexes, halves: &Halves<'_>, split: &Split) -> Result<ChainMap, VerifyError> {
    let failures = glued_minimum_failures(whole, halves);
    if !failures.is_empty() {
        return Err(VerifyError::GluedMinimum(failures));
    }
    let source = Arc::new(halves.lower.cochains.complex().shifted());
    let proj = whole.total_sheaf.projection();
    let len = split.kernel.len().max(source.len());
    let mut maps = Vec::with_capacity(len);
    for n in 0..len {
        let mut triplets: Vec<(usize, usize, Scalar)> = Vec::new();
        if let (Some(layout), true) = (whole.cochains.layout(n), n >= 1) {
            for (chain, pos, w) in layout.iter() {
                let last_up = halves.in_upper(whole, proj[chain[n]]);
                let before_up = halves.in_upper(whole, proj[chain[n - 1]]);
                if !last_up || before_up || w == 0 {
                    continue;
                }
                let sub: Chain =
                    chain[..n].iter().map(|&e| Halves::sub_element(whole, halves.lower, halves.lower_map, e)).collect();
                let col = halves.lower.cochains.layout(n - 1).and_then(|l| l.offset_of(&sub)).expect("lower chain");
                for i in 0..w {
                    let row = split.kernel_index(n, pos + i).expect("mixed chain");
                    triplets.push((row, col + i, scalar::one()));
                }
            }
        }
        maps.push(Matrix::from_triplets(split.kernel.dim(n), source.dim(n), triplets));
    }
    Ok(ChainMap::unchecked(source, split.kernel.clone(), maps, 1))
}

/// `α: S^n(P, F) → T^n` for a constant bundle, `αu|_{σ,τ} = (−1)^{ι(n)} u|_τ`
/// on `p = 0` cells and zero elsewhere.
pub fn alpha_const(whole: &BundleComplexes) -> Result<ChainMap, VerifyError> {
    let bundle = &whole.bundle;
    if !bundle.is_constant() || bundle.base().is_empty() {
        return Err(VerifyError::NotConstant);
    }
    if bundle.base().global_minimum().is_none() {
        return Err(VerifyError::NoMinimum);
    }
    let fiber = bundle.fiber_complexes()[0].clone();
    let source = Arc::new(fiber.complex().clone());
    let target = whole.total.complex().clone();
    let len = source.len().max(target.len());
    let maps = (0..len)
        .map(|n| {
            let mut triplets = Vec::new();
            if n < target.len() {
                total_blocks(whole, n, |p, _, _, pos, w| {
                    if p == 0 {
                        let s = scalar::sign(iota(n));
                        triplets.extend((0..w).map(|i| (pos + i, i, s.clone())));
                    }
                });
            }
            Matrix::from_triplets(target.dim(n), source.dim(n), triplets)
        })
        .collect();
    Ok(ChainMap::unchecked(source, target, maps, 0))
}
