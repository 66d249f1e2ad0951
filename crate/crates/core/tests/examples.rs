//! Small worked examples with hand-computed expectations.

use std::sync::Arc;

use posheaf::bicomplex::Bicomplex;
use posheaf::bundle::Bundle;
use posheaf::gen;
use posheaf::linalg::{scalar, Matrix};
use posheaf::pipeline::BundleComplexes;
use posheaf::poset::{antichain, boolean_lattice, chain_poset, Poset};
use posheaf::sheaf::{Sheaf, SheafComplex};
use posheaf::spectral::{e2_check, SpectralPages};
use posheaf::traversal::Grid;
use posheaf::verify::main_theorem::{verify_main_theorem, NodeReport, VerifyOptions};

fn certify(b: Bundle) -> NodeReport {
    verify_main_theorem(Arc::new(b), VerifyOptions::default()).expect("recursively admissible")
}

fn point() -> Poset {
    chain_poset(1)
}

#[test]
fn b2_constant_sheaf_cochain_dims() {
    // 4 elements, 5 comparable pairs, 2 maximal chains
    let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(boolean_lattice(2)), 1)));
    assert_eq!(s.complex().dims(), &[4, 5, 2]);
    assert_eq!(s.complex().betti(), vec![1, 0, 0]);
}

#[test]
fn two_chain_differential() {
    let s = SheafComplex::new(Arc::new(Sheaf::constant(Arc::new(chain_poset(2)), 1)));
    assert_eq!(s.complex().dims(), &[2, 1]);
    let d = s.complex().d(0).into_owned();
    // faces of (a, b): dropping a gives b with +, dropping b gives a with −
    assert_eq!(d, Matrix::from_i64(&[&[-1, 1]]));
}

#[test]
fn i1_bicomplex_cells_and_total_dims() {
    let b = Arc::new(gen::i1(2, 1));
    let bi = Bicomplex::new(b.clone());
    assert_eq!((bi.dim(0, 0), bi.dim(0, 1), bi.dim(1, 0), bi.dim(1, 1)), (3, 1, 2, 1));
    let t = bi.total();
    assert_eq!(t.complex().dims(), &[3, 3, 1]);
    assert!(bi.identity_failures().is_empty());
}

#[test]
fn i1_total_poset_is_a_three_chain() {
    let b = gen::i1(2, 1);
    let e = b.total_sheaf().unwrap();
    let p = e.poset();
    assert_eq!(p.len(), 3);
    assert_eq!(p.height(), 2);
    let s = SheafComplex::new(e.sheaf().clone());
    assert_eq!(s.complex().dims(), &[3, 3, 1]);
}

#[test]
fn i1_fiberwise_sheaves() {
    let b = gen::i1(2, 1);
    let q0 = b.q_cochain_sheaf(0).unwrap();
    assert_eq!(q0.dims(), &[2, 1]);
    let h0 = b.fib_cohomology_sheaf(0).unwrap();
    assert_eq!(h0.dims(), &[1, 1]);
    assert_eq!(h0.along(0, 1), &Matrix::identity(1));
    assert_eq!(b.fib_cohomology_sheaf(1).unwrap().dims(), &[0, 0]);
}

#[test]
fn i1_grid_collapses_onto_the_point() {
    let b = gen::i1(2, 1);
    let g = Grid::new(&b, &vec![0, 1], &vec![0, 1]).unwrap();
    assert_eq!(g.columns, vec![vec![0, 1], vec![0, 0]]);
    assert!(Grid::new(&b, &vec![1, 0], &vec![0]).is_err());
    assert!(Grid::new(&b, &vec![0], &vec![1, 0]).is_err());
}

#[test]
fn i1_phi_in_degree_one() {
    // total poset (0,a) < (0,b) < (1,c); 1-chains ab, ac, bc.
    // K^{0,1}: one cell with sign (−1)^{ι(1)} on u(ab);
    // K^{1,0}: τ = a gives u(ac), τ = b gives u(bc).
    let c = BundleComplexes::new(Arc::new(gen::i1(2, 1))).unwrap();
    let m = c.phi.map(1);
    assert_eq!(m.shape(), (3, 3));
    let mut entries: Vec<(usize, i64)> =
        m.triplets().into_iter().map(|(_, col, v)| (col, if v == scalar::one() { 1 } else { -1 })).collect();
    entries.sort();
    assert_eq!(entries, vec![(0, -1), (1, 1), (2, 1)]);
    let rows: std::collections::BTreeSet<usize> = m.triplets().iter().map(|t| t.0).collect();
    assert_eq!(rows.len(), 3);
}

#[test]
fn singleton_base_phi_is_signed_identity() {
    let c = BundleComplexes::new(Arc::new(gen::constant_bundle(point(), chain_poset(3), 2))).unwrap();
    for n in 0..c.total.complex().len() {
        let sign = if n.div_ceil(2) % 2 == 0 { 1 } else { -1 };
        let dim = c.total.complex().dim(n);
        assert_eq!(c.phi.map(n), &Matrix::identity(dim).scaled(&scalar::int(sign)), "degree {n}");
    }
}

#[test]
fn constant_point_bundle_over_b2_e2() {
    let c = BundleComplexes::new(Arc::new(gen::constant_bundle(boolean_lattice(2), point(), 1))).unwrap();
    let pages = SpectralPages::of_bicomplex(&c.bicomplex, 2).unwrap();
    let e2 = pages.page(2);
    assert_eq!((0..3).map(|p| e2.dim(p, 0)).collect::<Vec<_>>(), vec![1, 0, 0]);
    assert!(e2_check(&c.bundle, &pages).unwrap().passed);
}

#[test]
fn constant_point_bundle_over_b1_has_connected_total() {
    let b = gen::constant_bundle(chain_poset(2), point(), 1);
    let e = b.total_sheaf().unwrap();
    assert_eq!(e.poset().covers().len(), 1);
    let r = certify(b);
    assert!(r.passed);
    assert_eq!(r.convergence.total, vec![1, 0]);
}

/// `n`-chains of `base` starting outside the up-set of `x` and ending inside it.
fn mixed_chains(base: &Poset, x: usize, n: usize) -> usize {
    base.chains(n).iter().filter(|c| !base.leq(x, c[0]) && base.leq(x, *c.last().unwrap())).count()
}

#[test]
fn split_dimensions_partition_the_total_complex() {
    let base = boolean_lattice(2);
    let r = certify(gen::constant_bundle(base.clone(), point(), 1));
    let split = r.split.as_ref().expect("B_2 splits");
    let x = base.index_of(r.witness.as_deref().unwrap()).unwrap();
    let census: Vec<usize> = (0..3).map(|n| mixed_chains(&base, x, n)).collect();
    assert_eq!(census, vec![0, 3, 2]);
    assert_eq!(split.split_total.kernel_dims, census);
    let (upper, lower) = (&r.children[0], &r.children[1]);
    for n in 0..r.total_dims.len() {
        let part = |d: &[usize]| d.get(n).copied().unwrap_or(0);
        assert_eq!(
            r.total_dims[n],
            part(&split.split_total.kernel_dims) + part(&upper.total_dims) + part(&lower.total_dims)
        );
        assert_eq!(
            r.cochain_dims[n],
            part(&split.split_cochain.kernel_dims) + part(&upper.cochain_dims) + part(&lower.cochain_dims)
        );
    }
}

#[test]
fn i1_cochain_split_counts_cross_fiber_chains() {
    // E = (0,a) < (0,b) < (1,c) split at x = 1: chains from E_0 into E_1
    let r = certify(gen::i1(2, 1));
    let split = r.split.as_ref().unwrap();
    assert_eq!(split.split_cochain.kernel_dims, vec![0, 2, 1]);
    assert!(split.glued_minimum_failures.is_empty());
    let les = split.les_cochain.as_ref().unwrap();
    assert!(les.passed && les.slots.iter().all(|s| s.exact));
}

#[test]
fn main_theorem_examples() {
    let mut bundles = vec![
        gen::constant_bundle(boolean_lattice(2), chain_poset(2), 1),
        gen::constant_bundle(boolean_lattice(3), chain_poset(2), 1),
        gen::constant_bundle(chain_poset(3), chain_poset(2), 1),
        gen::cube_fixture(),
    ];
    let mut rng = gen::rng(5);
    for _ in 0..3 {
        let b = gen::random_bundle(Arc::new(chain_poset(2)), Default::default(), &mut rng).unwrap();
        bundles.push(b);
    }
    for b in bundles {
        let r = certify(b);
        assert!(r.passed, "{}", serde_json::to_string_pretty(&r).unwrap());
        assert!(r.iter().all(|n| n.e2.passed && n.convergence.passed && n.phi.passed));
        assert!(r.iter().filter_map(|n| n.split.as_ref()).all(|s| s.ladder.as_ref().is_some_and(|l| l.passed)));
    }
}

#[test]
fn non_admissible_base_is_rejected() {
    let mut covers = vec![(0, 1), (0, 2)];
    covers.extend([(1, 3), (2, 3), (1, 4), (2, 4)]);
    let names = ["0", "a", "b", "c", "d"].map(String::from).to_vec();
    let p = Poset::new(names, covers).unwrap();
    assert!(!p.is_recursively_admissible());
    let b = gen::constant_bundle(p, point(), 1);
    assert!(verify_main_theorem(Arc::new(b), VerifyOptions::default()).is_err());
    assert!(!antichain(2).is_recursively_admissible());
}
