//! Grids of `(σ, τ)`, their traversals, and the chain map `φ: S(E) → T(E)`.

use rayon::prelude::*;

use crate::bicomplex::{Bicomplex, TotalComplex};
use crate::bundle::{Bundle, TotalSheaf};
use crate::linalg::{scalar, Matrix, Scalar};
use crate::poset::Chain;
use crate::sheaf::SheafComplex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraversalError {
    #[error("τ is not a chain of the fiber over σ₀")]
    NotInFiber,
    #[error("σ is not a chain of the base")]
    NotInBase,
}

/// `y[i][j]`: column `i` is `τ` transported along `x₀ ≤ x_i`, as ids of
/// the fiber over `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub sigma: Chain,
    pub tau: Chain,
    pub columns: Vec<Vec<usize>>,
}

impl Grid {
    pub fn new(bundle: &Bundle, sigma: &Chain, tau: &Chain) -> Result<Self, TraversalError> {
        let base = bundle.base();
        if sigma.is_empty() || sigma.windows(2).any(|w| !base.lt(w[0], w[1])) || sigma.iter().any(|&x| x >= base.len())
        {
            return Err(TraversalError::NotInBase);
        }
        let fiber = bundle.fiber(sigma[0]).poset();
        if tau.is_empty() || tau.iter().any(|&y| y >= fiber.len()) || tau.windows(2).any(|w| !fiber.lt(w[0], w[1])) {
            return Err(TraversalError::NotInFiber);
        }
        let mut columns = vec![tau.clone()];
        for w in sigma.windows(2) {
            let f = bundle.transport_unchecked(w[0], w[1]).vertex_map();
            let next = columns.last().unwrap().iter().map(|&y| f[y]).collect();
            columns.push(next);
        }
        Ok(Self { sigma: sigma.clone(), tau: tau.clone(), columns })
    }

    pub fn p(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn q(&self) -> usize {
        self.tau.len() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    /// Along the base (type b).
    Right,
    /// Inside a fiber (type a).
    Up,
}

/// Lattice path from `(0, 0)` to `(p, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traversal {
    pub steps: Vec<Step>,
}

impl Traversal {
    /// Grid positions `(i, j)` visited, starting at `(0, 0)`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut at = (0, 0);
        let mut out = vec![at];
        for s in &self.steps {
            match s {
                Step::Right => at.0 += 1,
                Step::Up => at.1 += 1,
            }
            out.push(at);
        }
        out
    }

    /// `Σ (p − i)` over up-steps taken in column `i`.
    pub fn m(&self) -> usize {
        let p = self.steps.iter().filter(|s| **s == Step::Right).count();
        let mut i = 0;
        let mut m = 0;
        for s in &self.steps {
            match s {
                Step::Right => i += 1,
                Step::Up => m += p - i,
            }
        }
        m
    }
}

/// All `C(p+q, p)` traversals, lexicographic in the step word with
/// `Right < Up`.
pub fn enumerate_traversals(p: usize, q: usize) -> Vec<Traversal> {
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(p + q);
    fn rec(p: usize, q: usize, steps: &mut Vec<Step>, out: &mut Vec<Traversal>) {
        if p == 0 && q == 0 {
            out.push(Traversal { steps: steps.clone() });
            return;
        }
        if p > 0 {
            steps.push(Step::Right);
            rec(p - 1, q, steps, out);
            steps.pop();
        }
        if q > 0 {
            steps.push(Step::Up);
            rec(p, q - 1, steps, out);
            steps.pop();
        }
    }
    rec(p, q, &mut steps, &mut out);
    out
}

/// `⌈q/2⌉`.
pub fn iota(q: usize) -> usize {
    q.div_ceil(2)
}

/// `φ` in degree `n` as a `dim T^n × dim S^n(E)` matrix.
pub fn phi_matrix(bi: &Bicomplex, total: &TotalComplex, e: &TotalSheaf, s: &SheafComplex, n: usize) -> Matrix {
    let bundle = bi.bundle();
    let rows = total.complex().dim(n);
    let cols = s.dim(n);
    let Some(s_layout) = s.layout(n) else {
        return Matrix::zeros(rows, cols);
    };
    let blocks: Vec<Vec<(usize, usize, Scalar)>> = total
        .blocks(n)
        .par_iter()
        .flat_map_iter(|&(p, offset, _)| {
            let q = n - p;
            let layout = bi.sigma_layout(p, q).expect("block of the total complex");
            let traversals = enumerate_traversals(p, q);
            let base_sign = iota(q);
            layout
                .keys()
                .iter()
                .map(|sigma| {
                    let fc = &bundle.fiber_complexes()[sigma[0]];
                    let sigma_offset = offset + layout.offset_of(sigma).unwrap();
                    let mut out = Vec::new();
                    let Some(fiber_layout) = fc.layout(q) else {
                        return out;
                    };
                    for (tau, tau_offset, width) in fiber_layout.iter() {
                        let grid = Grid::new(bundle, sigma, tau).expect("cells are grids");
                        for z in &traversals {
                            let chain: Chain =
                                z.positions().iter().map(|&(i, j)| e.id(sigma[i], grid.columns[i][j])).collect();
                            if chain.windows(2).any(|w| w[0] == w[1]) {
                                continue;
                            }
                            let col = s_layout.offset_of(&chain).expect("traversal is a chain of E");
                            let sign = scalar::sign(base_sign + z.m());
                            let row = sigma_offset + tau_offset;
                            for a in 0..width {
                                out.push((row + a, col + a, sign.clone()));
                            }
                        }
                    }
                    out
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Matrix::from_triplets(rows, cols, blocks.into_iter().flatten())
}

/// `φ` in every degree of `T`.
pub fn phi(bi: &Bicomplex, total: &TotalComplex, e: &TotalSheaf, s: &SheafComplex) -> Vec<Matrix> {
    let degrees = total.complex().len().max(s.complex().len());
    (0..degrees).into_par_iter().map(|n| phi_matrix(bi, total, e, s, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traversal_counts_and_order() {
        assert_eq!(enumerate_traversals(2, 1).len(), 3);
        assert_eq!(enumerate_traversals(0, 4).len(), 1);
        assert_eq!(enumerate_traversals(3, 0).len(), 1);
        assert_eq!(enumerate_traversals(3, 2).len(), 10);
        let t = enumerate_traversals(2, 2);
        assert_eq!(t[0].steps, vec![Step::Right, Step::Right, Step::Up, Step::Up]);
        assert_eq!(t.last().unwrap().steps, vec![Step::Up, Step::Up, Step::Right, Step::Right]);
    }

    #[test]
    fn m_extremes() {
        let t = enumerate_traversals(3, 2);
        assert_eq!(t[0].m(), 0);
        assert_eq!(t.last().unwrap().m(), 6);
        assert!(t.iter().all(|z| z.m() <= 6));
    }

    #[test]
    fn iota_values() {
        assert_eq!((iota(0), iota(1), iota(2), iota(3)), (0, 1, 1, 2));
    }
}
