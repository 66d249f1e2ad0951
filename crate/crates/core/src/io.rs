//! Versioned JSON documents for posets, sheaves and bundles.
//!
//! Matrices are arrays of rows of canonical rational strings. Documents
//! written by [`Document::to_json`] read back byte-identically.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bundle::{ArrowData, Bundle, BundleError};
use crate::linalg::{parse_scalar, LinalgError, Matrix, Ring, Scalar};
use crate::poset::{Poset, PosetError};
use crate::sheaf::{Sheaf, SheafError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Scalar { path: String, source: LinalgError },
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

impl DocumentError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema { path: path.into(), message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetBlock {
    pub elements: Vec<String>,
    /// `[lower, upper]` name pairs.
    pub covers: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restriction {
    pub cover: [String; 2],
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafBlock {
    pub elements: Vec<String>,
    pub covers: Vec<[String; 2]>,
    pub dims: Vec<usize>,
    pub restrictions: Vec<Restriction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowBlock {
    /// Base cover `[x, y]`.
    pub cover: [String; 2],
    /// Image in `E_y` of each element of `E_x`, in `E_x` order.
    pub vertex_map: Vec<String>,
    /// `F_y(f(u)) → F_x(u)` for each `u ∈ E_x`, in `E_x` order.
    pub matrices: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDocument {
    pub format_version: u32,
    pub poset: PosetBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafDocument {
    pub format_version: u32,
    pub ring: Ring,
    pub sheaf: SheafBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDocument {
    pub format_version: u32,
    pub ring: Ring,
    pub base: PosetBlock,
    /// One fiber per base element, in base order.
    pub fibers: Vec<SheafBlock>,
    pub arrows: Vec<ArrowBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Poset(PosetDocument),
    Sheaf(SheafDocument),
    Bundle(BundleDocument),
}

impl Document {
    /// Parses and checks the schema; `strict` rejects non-canonical
    /// rationals such as `"2/4"`.
    pub fn from_json(text: &str, strict: bool) -> Result<Self, DocumentError> {
        let value: Value = serde_json::from_str(text).map_err(|e| DocumentError::schema("$", e.to_string()))?;
        let Value::Object(mut fields) = value else {
            return Err(DocumentError::schema("$", "expected an object"));
        };
        let kind = match fields.remove("kind") {
            Some(Value::String(k)) => k,
            Some(_) => return Err(DocumentError::schema("$.kind", "expected a string")),
            None => return Err(DocumentError::schema("$", "missing field `kind`")),
        };
        let body = Value::Object(fields);
        let doc = match kind.as_str() {
            "poset" => Document::Poset(typed(body)?),
            "sheaf" => Document::Sheaf(typed(body)?),
            "bundle" => Document::Bundle(typed(body)?),
            other => return Err(DocumentError::schema("$.kind", format!("unknown kind {other:?}"))),
        };
        let version = match &doc {
            Document::Poset(d) => d.format_version,
            Document::Sheaf(d) => d.format_version,
            Document::Bundle(d) => d.format_version,
        };
        if version != FORMAT_VERSION {
            return Err(DocumentError::Version(version));
        }
        if strict {
            doc.check_scalars()?;
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Poset(_) => "poset",
            Document::Sheaf(_) => "sheaf",
            Document::Bundle(_) => "bundle",
        }
    }

    pub fn ring(&self) -> Ring {
        match self {
            Document::Poset(_) => Ring::Rational,
            Document::Sheaf(d) => d.ring,
            Document::Bundle(d) => d.ring,
        }
    }

    fn check_scalars(&self) -> Result<(), DocumentError> {
        let check = |path: String, m: &[Vec<String>]| -> Result<(), DocumentError> {
            for (i, row) in m.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    parse_scalar(x, true)
                        .map_err(|source| DocumentError::Scalar { path: format!("{path}[{i}][{j}]"), source })?;
                }
            }
            Ok(())
        };
        let sheaf = |prefix: &str, s: &SheafBlock| -> Result<(), DocumentError> {
            for (k, r) in s.restrictions.iter().enumerate() {
                check(format!("{prefix}.restrictions[{k}].matrix"), &r.matrix)?;
            }
            Ok(())
        };
        match self {
            Document::Poset(_) => Ok(()),
            Document::Sheaf(d) => sheaf("$.sheaf", &d.sheaf),
            Document::Bundle(d) => {
                for (i, f) in d.fibers.iter().enumerate() {
                    sheaf(&format!("$.fibers[{i}]"), f)?;
                }
                for (i, a) in d.arrows.iter().enumerate() {
                    for (k, m) in a.matrices.iter().enumerate() {
                        check(format!("$.arrows[{i}].matrices[{k}]"), m)?;
                    }
                }
                Ok(())
            }
        }
    }

    pub fn to_poset(&self) -> Result<Poset, DocumentError> {
        match self {
            Document::Poset(d) => poset_from_block(&d.poset, "$.poset"),
            Document::Sheaf(d) => poset_from_block(&PosetBlock::of_sheaf(&d.sheaf), "$.sheaf"),
            Document::Bundle(d) => poset_from_block(&d.base, "$.base"),
        }
    }

    pub fn to_sheaf(&self) -> Result<Sheaf, DocumentError> {
        match self {
            Document::Sheaf(d) => sheaf_from_block(&d.sheaf, d.ring, "$.sheaf"),
            other => Err(DocumentError::Kind { expected: "sheaf", found: other.kind() }),
        }
    }

    pub fn to_bundle(&self) -> Result<Bundle, DocumentError> {
        match self {
            Document::Bundle(d) => bundle_from_document(d),
            other => Err(DocumentError::Kind { expected: "bundle", found: other.kind() }),
        }
    }

    pub fn from_poset(p: &Poset) -> Self {
        Document::Poset(PosetDocument { format_version: FORMAT_VERSION, poset: PosetBlock::of(p), metadata: None })
    }

    pub fn from_sheaf(s: &Sheaf, ring: Ring) -> Self {
        Document::Sheaf(SheafDocument { format_version: FORMAT_VERSION, ring, sheaf: sheaf_block(s), metadata: None })
    }

    pub fn from_bundle(b: &Bundle, ring: Ring) -> Self {
        let base = b.base();
        let arrows = b
            .arrow_data()
            .into_iter()
            .map(|((x, y), data)| {
                let target = b.fiber(y).poset();
                ArrowBlock {
                    cover: [base.name(x).to_string(), base.name(y).to_string()],
                    vertex_map: data.vertex_map.iter().map(|&v| target.name(v).to_string()).collect(),
                    matrices: data.matrices.iter().map(|m| m.to_strings()).collect(),
                }
            })
            .collect();
        Document::Bundle(BundleDocument {
            format_version: FORMAT_VERSION,
            ring,
            base: PosetBlock::of(base),
            fibers: b.fibers().iter().map(|f| sheaf_block(f)).collect(),
            arrows,
            metadata: None,
        })
    }

    pub fn with_metadata(mut self, metadata: BTreeMap<String, Value>) -> Self {
        let slot = match &mut self {
            Document::Poset(d) => &mut d.metadata,
            Document::Sheaf(d) => &mut d.metadata,
            Document::Bundle(d) => &mut d.metadata,
        };
        *slot = Some(metadata);
        self
    }
}

fn typed<T: serde::de::DeserializeOwned>(body: Value) -> Result<T, DocumentError> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        DocumentError::schema(path, e.inner().to_string())
    })
}

impl PosetBlock {
    pub fn of(p: &Poset) -> Self {
        Self {
            elements: p.names().to_vec(),
            covers: p.covers().iter().map(|&(a, b)| [p.name(a).to_string(), p.name(b).to_string()]).collect(),
        }
    }

    fn of_sheaf(s: &SheafBlock) -> Self {
        Self { elements: s.elements.clone(), covers: s.covers.clone() }
    }
}

fn sheaf_block(s: &Sheaf) -> SheafBlock {
    let p = s.poset();
    let block = PosetBlock::of(p);
    let restrictions = s
        .restrictions()
        .iter()
        .map(|(&(u, v), m)| Restriction {
            cover: [p.name(u).to_string(), p.name(v).to_string()],
            matrix: m.to_strings(),
        })
        .collect();
    SheafBlock { elements: block.elements, covers: block.covers, dims: s.dims().to_vec(), restrictions }
}

fn index(names: &[String], name: &str, path: &str) -> Result<usize, DocumentError> {
    names.iter().position(|n| n == name).ok_or_else(|| DocumentError::schema(path, format!("unknown element {name:?}")))
}

fn poset_from_block(b: &PosetBlock, path: &str) -> Result<Poset, DocumentError> {
    let covers = b
        .covers
        .iter()
        .enumerate()
        .map(|(i, [u, v])| {
            let p = format!("{path}.covers[{i}]");
            Ok((index(&b.elements, u, &p)?, index(&b.elements, v, &p)?))
        })
        .collect::<Result<Vec<_>, DocumentError>>()?;
    Ok(Poset::new(b.elements.clone(), covers)?)
}

fn parse_matrix(rows: &[Vec<String>], shape: (usize, usize), ring: Ring, path: &str) -> Result<Matrix, DocumentError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        let found = format!("{}x{}", rows.len(), rows.first().map_or(0, Vec::len));
        return Err(DocumentError::schema(path, format!("matrix is {found}, expected {}x{}", shape.0, shape.1)));
    }
    let mut data: Vec<Vec<Scalar>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, x) in row.iter().enumerate() {
            let p = format!("{path}[{i}][{j}]");
            let v = parse_scalar(x, false).map_err(|source| DocumentError::Scalar { path: p.clone(), source })?;
            if ring == Ring::Integer && !v.is_integer() {
                return Err(DocumentError::schema(p, format!("{x} is not an integer")));
            }
            out.push(v);
        }
        data.push(out);
    }
    Matrix::from_rows(shape.0, shape.1, &data).map_err(|source| DocumentError::Scalar { path: path.into(), source })
}

fn sheaf_from_block(b: &SheafBlock, ring: Ring, path: &str) -> Result<Sheaf, DocumentError> {
    let poset = poset_from_block(&PosetBlock::of_sheaf(b), path)?;
    if b.dims.len() != poset.len() {
        return Err(DocumentError::schema(
            format!("{path}.dims"),
            format!("{} dims for {} elements", b.dims.len(), poset.len()),
        ));
    }
    let mut restrictions = BTreeMap::new();
    for (i, r) in b.restrictions.iter().enumerate() {
        let p = format!("{path}.restrictions[{i}]");
        let (u, v) = (index(&b.elements, &r.cover[0], &p)?, index(&b.elements, &r.cover[1], &p)?);
        if !poset.is_cover(u, v) {
            return Err(SheafError::NotACover(r.cover[0].clone(), r.cover[1].clone()).into());
        }
        let m = parse_matrix(&r.matrix, (b.dims[u], b.dims[v]), ring, &format!("{p}.matrix"))?;
        if restrictions.insert((u, v), m).is_some() {
            return Err(DocumentError::schema(p, "cover listed twice"));
        }
    }
    Ok(Sheaf::new(Arc::new(poset), b.dims.clone(), restrictions)?)
}

fn bundle_from_document(d: &BundleDocument) -> Result<Bundle, DocumentError> {
    let base = poset_from_block(&d.base, "$.base")?;
    if d.fibers.len() != base.len() {
        return Err(BundleError::FiberCount { expected: base.len(), found: d.fibers.len() }.into());
    }
    let fibers = d
        .fibers
        .iter()
        .enumerate()
        .map(|(i, f)| sheaf_from_block(f, d.ring, &format!("$.fibers[{i}]")).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    let mut arrows = BTreeMap::new();
    for (i, a) in d.arrows.iter().enumerate() {
        let p = format!("$.arrows[{i}]");
        let (x, y) = (index(&d.base.elements, &a.cover[0], &p)?, index(&d.base.elements, &a.cover[1], &p)?);
        if !base.is_cover(x, y) {
            return Err(BundleError::NotACover(a.cover[0].clone(), a.cover[1].clone()).into());
        }
        let (ex, ey) = (&fibers[x], &fibers[y]);
        if a.vertex_map.len() != ex.poset().len() || a.matrices.len() != ex.poset().len() {
            return Err(DocumentError::schema(
                p,
                format!("vertex_map and matrices need one entry per element of the fiber over {}", a.cover[0]),
            ));
        }
        let vertex_map = a
            .vertex_map
            .iter()
            .enumerate()
            .map(|(k, n)| index(ey.poset().names(), n, &format!("{p}.vertex_map[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let matrices = a
            .matrices
            .iter()
            .enumerate()
            .map(|(u, m)| parse_matrix(m, (ex.dim(u), ey.dim(vertex_map[u])), d.ring, &format!("{p}.matrices[{u}]")))
            .collect::<Result<Vec<_>, _>>()?;
        if arrows.insert((x, y), ArrowData { vertex_map, matrices }).is_some() {
            return Err(DocumentError::schema(p, "cover listed twice"));
        }
    }
    Ok(Bundle::new(Arc::new(base), fibers, arrows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{cube_fixture, i1};
    use crate::poset::boolean_lattice;

    #[test]
    fn bundle_round_trip_is_byte_identical() {
        for b in [i1(2, 1), cube_fixture()] {
            let text = Document::from_bundle(&b, Ring::Rational).to_json();
            let doc = Document::from_json(&text, true).unwrap();
            assert_eq!(doc.to_json(), text);
            let back = doc.to_bundle().unwrap();
            assert_eq!(back.arrow_data(), b.arrow_data());
        }
    }

    #[test]
    fn poset_round_trip() {
        let text = Document::from_poset(&boolean_lattice(2)).to_json();
        let doc = Document::from_json(&text, true).unwrap();
        assert_eq!(doc.to_json(), text);
        assert_eq!(doc.to_poset().unwrap().len(), 4);
    }

    #[test]
    fn missing_arrow_names_the_cover() {
        let mut doc = match Document::from_bundle(&cube_fixture(), Ring::Rational) {
            Document::Bundle(d) => d,
            _ => unreachable!(),
        };
        doc.arrows.retain(|a| a.cover != ["{1}".to_string(), "{1,2}".to_string()]);
        let err = Document::Bundle(doc).to_bundle().unwrap_err();
        assert_eq!(err.to_string(), "missing arrow for base cover ({1}, {1,2})");
    }

    #[test]
    fn strict_scalars() {
        let Document::Bundle(mut doc) = Document::from_bundle(&i1(2, 1), Ring::Rational) else { unreachable!() };
        doc.arrows[0].matrices[1][0][0] = "2/2".into();
        let text = Document::Bundle(doc).to_json();
        let err = Document::from_json(&text, true).unwrap_err();
        assert!(matches!(err, DocumentError::Scalar { .. }), "{err}");
        let doc = Document::from_json(&text, false).unwrap();
        assert!(doc.to_bundle().is_ok());
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let err =
            Document::from_json(r#"{"kind":"poset","format_version":1,"poset":{"elements":[1],"covers":[]}}"#, true)
                .unwrap_err();
        assert!(err.to_string().starts_with("$.poset.elements[0]"), "{err}");
        let err =
            Document::from_json(r#"{"kind":"poset","format_version":2,"poset":{"elements":[],"covers":[]}}"#, true)
                .unwrap_err();
        assert!(matches!(err, DocumentError::Version(2)));
    }
}
