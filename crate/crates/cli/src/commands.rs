//! One function per subcommand.

use std::io::Read;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use posheaf::bundle::Bundle;
use posheaf::gen::{self, BundleParams};
use posheaf::io::Document;
use posheaf::linalg::{Ring, Scalar};
use posheaf::pipeline::BundleComplexes;
use posheaf::poset::{antichain, boolean_lattice, chain_poset, Poset};
use posheaf::sheaf::{Sheaf, SheafComplex};
use posheaf::spectral::{convergence_check, e2_check, SpectralPages};
use posheaf::verify::main_theorem::{verify_main_theorem, VerifyOptions};
use posheaf::verify::VerifyError;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::report::{Report, EXIT_IO, EXIT_VALIDATION};
use crate::{Cli, Command, Fixture, Global, Input, Shape};

pub enum Output {
    Document(String),
    Report(Report),
}

type Failure = Box<Report>;

struct Loaded {
    command: &'static str,
    digest: String,
    doc: Document,
}

impl Loaded {
    fn fail(&self, error: impl ToString, code: i32) -> Failure {
        Box::new(Report::failure(self.command, Some(self.digest.clone()), error.to_string(), code))
    }

    fn report(&self) -> Report {
        Report::new(self.command, Some(self.digest.clone()))
    }

    fn bundle(&self) -> Result<Bundle, Failure> {
        self.doc.to_bundle().map_err(|e| self.fail(e, EXIT_VALIDATION))
    }
}

fn read_input(path: Option<&Path>) -> std::io::Result<Vec<u8>> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read(p),
        _ => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn load(command: &'static str, input: &Input, global: &Global) -> Result<Loaded, Failure> {
    let bytes = read_input(input.path.as_deref()).map_err(|e| {
        let name = input.path.as_ref().map_or("<stdin>".to_string(), |p| p.display().to_string());
        Box::new(Report::failure(command, None, format!("cannot read {name}: {e}"), EXIT_IO))
    })?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let fail = |e: String| Box::new(Report::failure(command, Some(digest.clone()), e, EXIT_VALIDATION));
    let text = std::str::from_utf8(&bytes).map_err(|e| fail(format!("input is not UTF-8: {e}")))?;
    let doc = Document::from_json(text, !global.lenient).map_err(|e| fail(e.to_string()))?;
    Ok(Loaded { command, digest, doc })
}

pub fn run(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Validate(i) => validate(load("validate", i, g)?)?,
        Command::Cohomology(i) => cohomology(load("cohomology", i, g)?, g)?,
        Command::TotalSheaf(i) => return total_sheaf(load("total-sheaf", i, g)?, g),
        Command::Pages(i) => pages(load("pages", i, g)?, g)?,
        Command::PhiCheck(i) => phi_check(load("phi-check", i, g)?)?,
        Command::Admissible(i) => admissible(load("admissible", i, g)?)?,
        Command::VerifyMain(i) => verify_main(load("verify-main", i, g)?, g)?,
        Command::Gen { fixture } => return generate(fixture, g).map(Output::Document),
    };
    if g.timings {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(Output::Report(report))
}

fn validate(l: Loaded) -> Result<Report, Failure> {
    let mut r = l.report();
    r.check("schema", true);
    let summary = match &l.doc {
        Document::Poset(_) => {
            let p = l.doc.to_poset().map_err(|e| l.fail(e, EXIT_VALIDATION))?;
            r.check("poset", true);
            json!({ "kind": "poset", "elements": p.len(), "covers": p.covers().len(), "height": p.height() })
        }
        Document::Sheaf(_) => {
            let s = l.doc.to_sheaf().map_err(|e| l.fail(e, EXIT_VALIDATION))?;
            r.check("poset", true).check("path_independence", true);
            json!({ "kind": "sheaf", "elements": s.poset().len(), "dims": s.dims() })
        }
        Document::Bundle(_) => {
            let b = l.bundle()?;
            r.check("poset", true).check("fibers", true).check("naturality", true).check("diamonds", true);
            json!({
                "kind": "bundle",
                "base_elements": b.base().len(),
                "fiber_sizes": b.fibers().iter().map(|f| f.poset().len()).collect::<Vec<_>>(),
                "total_elements": b.total_elements(),
                "constant": b.is_constant(),
            })
        }
    };
    r.text.push(format!("valid {} document", l.doc.kind()));
    r.data = summary;
    Ok(r.finish())
}

fn sheaf_of(l: &Loaded) -> Result<Sheaf, Failure> {
    match &l.doc {
        Document::Poset(_) => {
            let p = l.doc.to_poset().map_err(|e| l.fail(e, EXIT_VALIDATION))?;
            Ok(Sheaf::constant(Arc::new(p), 1))
        }
        Document::Sheaf(_) => l.doc.to_sheaf().map_err(|e| l.fail(e, EXIT_VALIDATION)),
        Document::Bundle(_) => {
            let b = l.bundle()?;
            let t = b.total_sheaf().map_err(|e| l.fail(e, EXIT_VALIDATION))?;
            Ok((**t.sheaf()).clone())
        }
    }
}

fn integral(s: &Sheaf) -> bool {
    s.restrictions().values().all(|m| m.triplets().iter().all(|(_, _, v): &(usize, usize, Scalar)| v.is_integer()))
}

fn cohomology(l: Loaded, g: &Global) -> Result<Report, Failure> {
    let sheaf = sheaf_of(&l)?;
    let ring = g.ring.map_or(l.doc.ring(), Ring::from);
    if ring == Ring::Integer && !integral(&sheaf) {
        return Err(l.fail("integer ring requested for a sheaf with non-integer restrictions", EXIT_VALIDATION));
    }
    let sc = SheafComplex::new(Arc::new(sheaf));
    let steps = sc.complex().cohomology(ring).map_err(|e| l.fail(e, EXIT_VALIDATION))?;
    let top = g.max_degree.map_or(steps.len(), |m| (m + 1).min(steps.len()));
    let mut r = l.report();
    let rows: Vec<_> = steps[..top]
        .iter()
        .enumerate()
        .map(|(n, s)| {
            json!({
                "degree": n,
                "cochains": sc.dim(n),
                "betti": s.betti,
                "torsion": s.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    for (n, s) in steps[..top].iter().enumerate() {
        let torsion: Vec<String> = s.torsion.iter().map(|t| format!("Z/{t}")).collect();
        let torsion = if torsion.is_empty() { String::new() } else { format!(" + {}", torsion.join(" + ")) };
        r.text.push(format!("H^{n}: rank {}{torsion}  (dim C^{n} = {})", s.betti, sc.dim(n)));
    }
    r.check("d_squared_zero", sc.complex().d_squared_failure().is_none());
    r.data = json!({
        "ring": ring.to_string(),
        "degrees": rows,
        "euler_characteristic": sc.complex().euler_characteristic(),
    });
    Ok(r.finish())
}

fn total_sheaf(l: Loaded, g: &Global) -> Result<Output, Failure> {
    let b = l.bundle()?;
    let t = b.total_sheaf().map_err(|e| l.fail(e, EXIT_VALIDATION))?;
    let ring = g.ring.map_or(l.doc.ring(), Ring::from);
    Ok(Output::Document(Document::from_sheaf(t.sheaf(), ring).to_json()))
}

fn complexes(l: &Loaded) -> Result<BundleComplexes, Failure> {
    let b = l.bundle()?;
    BundleComplexes::new(Arc::new(b)).map_err(|e| l.fail(e, EXIT_VALIDATION))
}

fn pages(l: Loaded, g: &Global) -> Result<Report, Failure> {
    let c = complexes(&l)?;
    let (p_count, q_count) = (c.bicomplex.p_count(), c.bicomplex.q_count());
    let pages = SpectralPages::compute(&c.total, p_count, q_count, 2).map_err(|e| l.fail(e, EXIT_VALIDATION))?;
    let e2 = e2_check(&c.bundle, &pages).map_err(|e| l.fail(e, EXIT_VALIDATION))?;
    let conv = convergence_check(&c.total, &pages);
    let keep = |p: usize, q: usize| g.max_degree.is_none_or(|m| p + q <= m);
    let mut r = l.report();
    for page in &pages.pages {
        r.text.push(format!("E_{}:", page.r));
        for q in (0..q_count).rev() {
            let cells: Vec<String> = (0..p_count).map(|p| format!("{:>4}", page.dim(p, q))).collect();
            r.text.push(format!("  q={q:<2}{}", cells.join("")));
        }
    }
    r.text.push(format!("H^n(T): {:?}", conv.total));
    r.check("e2_identification", e2.passed)
        .check("convergence", conv.passed)
        .check("page_consistency", pages.consistency_failures().is_empty());
    let table: Vec<_> = pages.table().into_iter().filter(|e| keep(e.p, e.q)).collect();
    let cells: Vec<_> = e2.cells.iter().filter(|c| keep(c.p, c.q)).collect();
    r.data = json!({
        "columns": p_count,
        "rows": q_count,
        "r_stab": pages.r_stab,
        "pages": table,
        "e2": cells,
        "convergence": conv,
    });
    Ok(r.finish())
}

fn phi_check(l: Loaded) -> Result<Report, Failure> {
    let c = complexes(&l)?;
    let cert = c.phi.certificate();
    let mut r = l.report();
    r.check("chain_map", c.phi.commutation_failure().is_none()).check("quasi_isomorphism", cert.quasi_isomorphism);
    r.text.push(format!("dim S^n(E): {:?}", c.source().dims()));
    r.text.push(format!("dim T^n:    {:?}", c.total.complex().dims()));
    r.text.push(format!("cone betti: {:?}", cert.cone_betti));
    r.data = json!({
        "cochain_dims": c.source().dims(),
        "total_dims": c.total.complex().dims(),
        "cone": cert,
    });
    Ok(r.finish())
}

fn admissible(l: Loaded) -> Result<Report, Failure> {
    let p: Poset = match &l.doc {
        Document::Sheaf(_) => (**sheaf_of(&l)?.poset()).clone(),
        _ => l.doc.to_poset().map_err(|e| l.fail(e, EXIT_VALIDATION))?,
    };
    let witness = p.find_admissible_witness().ok().flatten();
    let tree = p.recursive_decomposition();
    let mut r = l.report();
    r.check("admissible", witness.is_some() || p.len() == 1).check("recursively_admissible", tree.is_some());
    let witness_name = witness.map(|w| p.name(w).to_string());
    r.text.push(format!("witness: {}", witness_name.as_deref().unwrap_or("none")));
    if let Some(t) = &tree {
        r.text.push(format!("decomposition depth: {}", t.depth()));
    }
    r.data = json!({ "elements": p.len(), "witness": witness_name, "decomposition": tree });
    Ok(r.finish())
}

fn verify_main(l: Loaded, g: &Global) -> Result<Report, Failure> {
    let b = l.bundle()?;
    let tree = verify_main_theorem(Arc::new(b), VerifyOptions { timings: g.timings }).map_err(|e| match e {
        VerifyError::NotRecursivelyAdmissible => l.fail(e, EXIT_VALIDATION),
        other => l.fail(other, EXIT_VALIDATION),
    })?;
    let mut r = l.report();
    let nodes: Vec<_> = tree.iter().collect();
    r.check("phi_quasi_isomorphism", nodes.iter().all(|n| n.phi.passed))
        .check("bicomplex_identities", nodes.iter().all(|n| n.bicomplex_identities))
        .check("e2_identification", nodes.iter().all(|n| n.e2.passed))
        .check("convergence", nodes.iter().all(|n| n.convergence.passed))
        .check("leaf_sign_identity", nodes.iter().all(|n| n.sign_identity.unwrap_or(true)))
        .check("alpha_const", nodes.iter().all(|n| n.alpha_const.as_ref().is_none_or(|a| a.passed)))
        .check("splits", nodes.iter().all(|n| n.split.as_ref().is_none_or(|s| s.passed)))
        .check("certificate", tree.passed);
    for n in &nodes {
        r.text.push(format!(
            "node {:?} witness {}: {}",
            n.base,
            n.witness.as_deref().unwrap_or("-"),
            if n.passed { "pass" } else { "FAIL" }
        ));
    }
    r.data = serde_json::to_value(&tree).expect("certificate serializes");
    Ok(r.finish())
}

fn shape(s: Shape, n: usize) -> Poset {
    match s {
        Shape::Boolean => boolean_lattice(n),
        Shape::Chain => chain_poset(n),
        Shape::Antichain => antichain(n),
    }
}

fn generate(f: &Fixture, g: &Global) -> Result<String, Failure> {
    let ring = g.ring.map_or(Ring::Rational, Ring::from);
    let fail = |e: String| Box::new(Report::failure("gen", None, e, EXIT_VALIDATION));
    let doc = match *f {
        Fixture::Boolean { n } if n > 12 => return Err(fail(format!("B_{n} is too large"))),
        Fixture::Boolean { n } => Document::from_poset(&boolean_lattice(n)),
        Fixture::Chain { n } => Document::from_poset(&chain_poset(n)),
        Fixture::Antichain { n } => Document::from_poset(&antichain(n)),
        Fixture::ConstantBundle { base, base_size, fiber, dim } => {
            if fiber == 0 {
                return Err(fail("fiber needs at least one element".into()));
            }
            Document::from_bundle(&gen::constant_bundle(shape(base, base_size), chain_poset(fiber), dim), ring)
        }
        Fixture::Random { max_base, max_fiber, max_dim, boolean_base } => {
            let mut rng = gen::rng(g.seed);
            let base = match boolean_base {
                Some(n) => boolean_lattice(n),
                None => gen::random_admissible_base(max_base.max(1), &mut rng).map_err(|e| fail(e.to_string()))?,
            };
            let params = BundleParams { max_fiber: max_fiber.max(1), max_dim: max_dim.max(1) };
            let b = gen::random_bundle(Arc::new(base), params, &mut rng).map_err(|e| fail(e.to_string()))?;
            Document::from_bundle(&b, ring)
        }
        Fixture::RandomSheaf { elements, max_dim } => {
            let mut rng = gen::rng(g.seed);
            let p = posheaf::poset::random_poset_with(elements, 0.4, &mut rng);
            Document::from_sheaf(&gen::random_sheaf_dims(Arc::new(p), max_dim, &mut rng), ring)
        }
        Fixture::I1 { len, dim } => {
            if len == 0 {
                return Err(fail("the fiber over 0 needs at least one element".into()));
            }
            Document::from_bundle(&gen::i1(len, dim), ring)
        }
        Fixture::Cube => Document::from_bundle(&gen::cube_fixture(), ring),
    };
    let metadata = [("generator".to_string(), serde_json::Value::String(format!("{f:?}")))];
    let doc = match f {
        Fixture::Random { .. } | Fixture::RandomSheaf { .. } => {
            let mut m: std::collections::BTreeMap<_, _> = metadata.into_iter().collect();
            m.insert("seed".into(), json!(g.seed));
            doc.with_metadata(m)
        }
        _ => doc.with_metadata(metadata.into_iter().collect()),
    };
    Ok(doc.to_json())
}
