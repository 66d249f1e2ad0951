//! Recursive certificate that `φ: S(E) → T(E)` is a quasi-isomorphism and
//! that the spectral sequence computes `H(E)` from `H^p(B, H^q_fib)`.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::bundle::Bundle;
use crate::linalg::{scalar, Matrix};
use crate::pipeline::BundleComplexes;
use crate::poset::DecompositionTree;
use crate::spectral::{convergence_check, e2_check, ConvergenceReport, E2Report, SpectralPages};
use crate::traversal::iota;
use crate::verify::chain_map::{ChainMap, ConeCertificate};
use crate::verify::les::{les_exactness, LesReport};
use crate::verify::split::{
    alpha1, alpha2, alpha_const, glued_minimum_failures, split_cochain, split_total, Halves, Split, SplitReport,
};
use crate::verify::VerifyError;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Record wall-clock time per node (makes reports non-reproducible).
    pub timings: bool,
}

/// A map checked to commute with differentials, with its cone verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapCertificate {
    pub chain_map: bool,
    pub cone: ConeCertificate,
    pub passed: bool,
}

impl MapCertificate {
    pub fn of(f: &ChainMap) -> Self {
        let chain_map = f.commutation_failure().is_none();
        let cone = f.certificate();
        let passed = chain_map && cone.quasi_isomorphism;
        Self { chain_map, cone, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LadderReport {
    /// `ρ_T φ = (φ_B ⊕ φ_B̄) ρ_S`.
    pub quotient_square: bool,
    /// `φ ε_S = ε_T φ'`.
    pub kernel_square: bool,
    /// `α₁ φ_B̄ = φ' α₂`.
    pub claim_square: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitChecks {
    pub split_total: SplitReport,
    pub split_cochain: SplitReport,
    pub glued_minimum_failures: Vec<String>,
    pub alpha1: MapCertificate,
    pub alpha2: Option<MapCertificate>,
    pub ladder: Option<LadderReport>,
    pub les_total: Option<LesReport>,
    pub les_cochain: Option<LesReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeReport {
    pub base: Vec<String>,
    pub witness: Option<String>,
    pub total_dims: Vec<usize>,
    pub cochain_dims: Vec<usize>,
    pub phi: MapCertificate,
    pub bicomplex_identities: bool,
    pub e2: E2Report,
    pub convergence: ConvergenceReport,
    /// Leaves only: `φ = (−1)^{ι(n)} id`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_identity: Option<bool>,
    /// Constant bundles over a base with a minimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_const: Option<MapCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitChecks>,
    pub children: Vec<NodeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
    pub passed: bool,
}

impl NodeReport {
    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(NodeReport::size).sum::<usize>()
    }

    /// Every node and its descendants, depth first.
    pub fn iter(&self) -> Box<dyn Iterator<Item = &NodeReport> + '_> {
        Box::new(std::iter::once(self).chain(self.children.iter().flat_map(|c| c.iter())))
    }
}

fn map_at(f: &ChainMap, n: usize) -> Matrix {
    f.maps().get(n).cloned().unwrap_or_else(|| Matrix::zeros(f.target().dim(n), f.source().dim(n)))
}

pub fn ladder(
    whole: &BundleComplexes,
    halves: &Halves<'_>,
    t: &Split,
    s: &Split,
    a1: &ChainMap,
    a2: &ChainMap,
) -> LadderReport {
    let len = whole.phi.len().max(t.rho.len()).max(s.rho.len()) + 1;
    let phi = |n| map_at(&whole.phi, n);
    let quotient_square = (0..len).all(|n| {
        let halves_phi = map_at(&halves.upper.phi, n).direct_sum(&map_at(&halves.lower.phi, n));
        map_at(&t.rho, n).compose(&phi(n)) == halves_phi.compose(&map_at(&s.rho, n))
    });
    let phi_prime = |n: usize| {
        let rows = t.mixed.get(n).cloned().unwrap_or_default();
        let cols = s.mixed.get(n).cloned().unwrap_or_default();
        phi(n).select_cols(&cols).select_rows(&rows)
    };
    let kernel_square =
        (0..len).all(|n| phi(n).compose(&map_at(&s.epsilon, n)) == map_at(&t.epsilon, n).compose(&phi_prime(n)));
    let claim_square = (1..len)
        .all(|n| map_at(a1, n).compose(&map_at(&halves.lower.phi, n - 1)) == phi_prime(n).compose(&map_at(a2, n)));
    LadderReport {
        quotient_square,
        kernel_square,
        claim_square,
        passed: quotient_square && kernel_square && claim_square,
    }
}

fn split_checks(whole: &BundleComplexes, halves: &Halves<'_>) -> Result<SplitChecks, VerifyError> {
    let t = split_total(whole, halves);
    let s = split_cochain(whole, halves);
    let a1 = alpha1(whole, halves, &t);
    let alpha1_cert = MapCertificate::of(&a1);
    let glued = glued_minimum_failures(whole, halves);
    let a2 = if glued.is_empty() { Some(alpha2(whole, halves, &s)?) } else { None };
    let alpha2_cert = a2.as_ref().map(MapCertificate::of);
    let ladder = a2.as_ref().map(|a2| ladder(whole, halves, &t, &s, &a1, a2));
    let les_total = if alpha1_cert.passed && t.report.passed { Some(les_exactness(&t, &a1)?) } else { None };
    let les_cochain = match (&a2, &alpha2_cert) {
        (Some(a2), Some(c)) if c.passed && s.report.passed => Some(les_exactness(&s, a2)?),
        _ => None,
    };
    let passed = t.report.passed
        && s.report.passed
        && alpha1_cert.passed
        && alpha2_cert.as_ref().is_some_and(|c| c.passed)
        && ladder.as_ref().is_some_and(|l| l.passed)
        && les_total.as_ref().is_some_and(|l| l.passed)
        && les_cochain.as_ref().is_some_and(|l| l.passed);
    Ok(SplitChecks {
        split_total: t.report,
        split_cochain: s.report,
        glued_minimum_failures: glued,
        alpha1: alpha1_cert,
        alpha2: alpha2_cert,
        ladder,
        les_total,
        les_cochain,
        passed,
    })
}

fn sign_identity(whole: &BundleComplexes) -> bool {
    (0..whole.phi.len()).all(|n| {
        let f = whole.phi.map(n);
        f.rows() == f.cols() && *f == Matrix::scalar(f.rows(), &scalar::sign(iota(n)))
    })
}

fn verify_node(
    whole: &BundleComplexes,
    tree: &DecompositionTree,
    options: VerifyOptions,
) -> Result<NodeReport, VerifyError> {
    let start = Instant::now();
    let bundle = whole.bundle.clone();
    let base = bundle.base().clone();
    let pages = SpectralPages::compute(&whole.total, whole.bicomplex.p_count(), whole.bicomplex.q_count(), 2)?;
    let e2 = e2_check(&bundle, &pages)?;
    let convergence = convergence_check(&whole.total, &pages);
    let phi = MapCertificate::of(&whole.phi);
    let bicomplex_identities = whole.bicomplex.identity_failures().is_empty();
    let alpha_const = (bundle.is_constant() && base.global_minimum().is_some())
        .then(|| alpha_const(whole).map(|a| MapCertificate::of(&a)))
        .transpose()?;

    let (witness, sign_identity, split, children) = match tree {
        DecompositionTree::Leaf { .. } => (None, Some(sign_identity(whole)), None, Vec::new()),
        DecompositionTree::Split { witness, upper, lower } => {
            let x = base.index_of(witness).ok_or(VerifyError::NotRecursivelyAdmissible)?;
            let up: Vec<usize> = (0..base.len()).filter(|&z| base.leq(x, z)).collect();
            let down: Vec<usize> = (0..base.len()).filter(|&z| !base.leq(x, z)).collect();
            let (up_bundle, upper_map) = bundle.restrict(&up);
            let (down_bundle, lower_map) = bundle.restrict(&down);
            let (up_bundle, down_bundle) = (Arc::new(up_bundle), Arc::new(down_bundle));
            let (upper_c, lower_c) =
                rayon::join(|| BundleComplexes::new(up_bundle), || BundleComplexes::new(down_bundle));
            let (upper_c, lower_c) = (upper_c?, lower_c?);
            let halves = Halves { x, upper: &upper_c, upper_map: &upper_map, lower: &lower_c, lower_map: &lower_map };
            let (checks, (upper_node, lower_node)) = rayon::join(
                || split_checks(whole, &halves),
                || rayon::join(|| verify_node(&upper_c, upper, options), || verify_node(&lower_c, lower, options)),
            );
            let (checks, upper_node, lower_node) = (checks?, upper_node?, lower_node?);
            (Some(witness.clone()), None, Some(checks), vec![upper_node, lower_node])
        }
    };

    let passed = phi.passed
        && bicomplex_identities
        && e2.passed
        && convergence.passed
        && sign_identity.unwrap_or(true)
        && alpha_const.as_ref().is_none_or(|a| a.passed)
        && split.as_ref().is_none_or(|s| s.passed)
        && children.iter().all(|c| c.passed);
    Ok(NodeReport {
        base: base.names().to_vec(),
        witness,
        total_dims: whole.total.complex().dims().to_vec(),
        cochain_dims: whole.source().dims().to_vec(),
        phi,
        bicomplex_identities,
        e2,
        convergence,
        sign_identity,
        alpha_const,
        split,
        children,
        elapsed_us: options.timings.then(|| start.elapsed().as_micros() as u64),
        passed,
    })
}

/// Certificate tree over the recursive decomposition of the base.
pub fn verify_main_theorem(bundle: Arc<Bundle>, options: VerifyOptions) -> Result<NodeReport, VerifyError> {
    let tree = bundle.base().recursive_decomposition().ok_or(VerifyError::NotRecursivelyAdmissible)?;
    let whole = BundleComplexes::new(bundle)?;
    verify_node(&whole, &tree, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{constant_bundle, cube_fixture, i1};
    use crate::poset::{boolean_lattice, chain_poset};

    fn certify(b: Bundle) -> NodeReport {
        verify_main_theorem(Arc::new(b), VerifyOptions::default()).unwrap()
    }

    #[test]
    fn i1_certificate() {
        let r = certify(i1(2, 1));
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.witness.as_deref(), Some("1"));
        assert_eq!(r.size(), 3);
        let split = r.split.as_ref().unwrap();
        assert!(split.glued_minimum_failures.is_empty());
    }

    #[test]
    fn constant_bundles_over_b1_b2() {
        for n in 1..=2 {
            for len in 1..=2 {
                let r = certify(constant_bundle(boolean_lattice(n), chain_poset(len), 1));
                assert!(r.passed, "B{n} x C{len}: {r:#?}");
                assert!(r.iter().all(|node| node.alpha_const.as_ref().is_none_or(|a| a.passed)));
            }
        }
    }

    #[test]
    fn cube() {
        assert!(certify(cube_fixture()).passed);
    }

    #[test]
    fn leaf_is_signed_identity() {
        let r = certify(constant_bundle(chain_poset(1), chain_poset(3), 2));
        assert_eq!(r.sign_identity, Some(true));
        assert!(r.children.is_empty());
    }

    #[test]
    fn reports_are_reproducible() {
        let a = serde_json::to_string(&certify(i1(3, 2))).unwrap();
        let b = serde_json::to_string(&certify(i1(3, 2))).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("elapsed"));
    }
}
