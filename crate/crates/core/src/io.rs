//! JSON instance documents: parsing with located diagnostics, canonical
//! serialization, conversion to the typed objects, and seeded generators.
//!
//! A document has a required `groupoid` block (the tables of
//! [`GroupoidTables`]), an optional `haar` block (`"counting"` or
//! `{"weights": {arrow: w}}`), and optional named `functions`, `bundles`,
//! `cocycles` and `sections`. Complex numbers are `[re, im]` pairs and
//! matrices are row-major nested arrays. The schema is in
//! `schema/instance.schema.json`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bundles::{coboundary, BundleError, Cocycle, GHilbertBundle, Section, UnitSection};
use crate::functions::{function_from_cocycle, function_from_section, GroupoidFunction};
use crate::groupoid::{make_standard, FiniteGroupoid, GroupAction, GroupTable, GroupoidTables, HaarSystem, StandardKind, TableError};
use crate::linalg::{CMat, CVec};
use crate::random;

pub const SCHEMA: &str = include_str!("../schema/instance.schema.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("reference error: {0}")]
    Reference(String),
    #[error("shape error in {context}: expected {expected}, got {actual}")]
    Shape { context: String, expected: String, actual: String },
    #[error("usage error: {0}")]
    Usage(String),
}

impl InputError {
    pub fn category(&self) -> &'static str {
        match self {
            InputError::Syntax { .. } => "syntax",
            InputError::Reference(_) => "reference",
            InputError::Shape { .. } => "shape",
            InputError::Usage(_) => "usage",
        }
    }
}

impl From<TableError> for InputError {
    fn from(e: TableError) -> Self {
        InputError::Reference(e.to_string())
    }
}

fn shape(context: impl Into<String>, expected: impl ToString, actual: impl ToString) -> InputError {
    InputError::Shape { context: context.into(), expected: expected.to_string(), actual: actual.to_string() }
}

impl From<BundleError> for InputError {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::ArrowShape { what, arrow, expected, actual } => shape(
                format!("{what} for arrow `{arrow}`"),
                format!("{}x{}", expected.0, expected.1),
                format!("{}x{}", actual.0, actual.1),
            ),
            BundleError::UnitShape { what, unit, expected, actual } => shape(format!("{what} at unit `{unit}`"), expected, actual),
            BundleError::Count { what, expected, actual } => shape(what, expected, actual),
            BundleError::GroupoidMismatch => InputError::Reference(e.to_string()),
        }
    }
}

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum HaarBlock {
    #[default]
    Counting,
    Weights(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex(Pair),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionBlock {
    pub kind: FunctionKind,
    pub values: BTreeMap<String, Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleBlock {
    pub dims: BTreeMap<String, usize>,
    pub matrices: BTreeMap<String, Vec<Vec<Pair>>>,
}

/// Vectors keyed by arrow (cocycles) or by unit (sections), living in the
/// named bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorBlock {
    pub bundle: String,
    pub values: BTreeMap<String, Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub groupoid: GroupoidTables,
    #[serde(default)]
    pub haar: HaarBlock,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, FunctionBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundles: BTreeMap<String, BundleBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cocycles: BTreeMap<String, VectorBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sections: BTreeMap<String, VectorBlock>,
}

pub fn parse(text: &str) -> Result<InstanceDocument, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Pretty JSON with a trailing newline. Stable for a given document.
pub fn serialize(doc: &InstanceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain only finite numbers and string keys");
    s.push('\n');
    s
}

/// SHA-256 of the serialized canonical form, as lowercase hex.
pub fn instance_hash(doc: &InstanceDocument) -> String {
    let digest = Sha256::digest(serialize(doc).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Typed view of a document.
#[derive(Debug, Clone)]
pub struct Instance {
    pub document: InstanceDocument,
    pub groupoid: FiniteGroupoid,
    pub haar: HaarSystem,
    pub functions: BTreeMap<String, GroupoidFunction>,
    pub bundles: BTreeMap<String, GHilbertBundle>,
    /// Cocycle name to (bundle name, cocycle).
    pub cocycles: BTreeMap<String, (String, Cocycle)>,
    pub sections: BTreeMap<String, (String, UnitSection)>,
}

fn lookup(g: &FiniteGroupoid, id: &str, context: &str) -> Result<usize, InputError> {
    g.arrow_index(id).ok_or_else(|| InputError::Reference(format!("unknown arrow `{id}` in {context}")))
}

fn lookup_unit(g: &FiniteGroupoid, id: &str, context: &str) -> Result<usize, InputError> {
    g.unit_index(id).ok_or_else(|| InputError::Reference(format!("unknown unit `{id}` in {context}")))
}

/// Keyed map to a dense vector in index order, requiring every key once.
fn dense<T: Clone>(
    keys: impl Iterator<Item = (String, T)>,
    n: usize,
    index: impl Fn(&str) -> Result<usize, InputError>,
    name: impl Fn(usize) -> String,
    context: &str,
) -> Result<Vec<T>, InputError> {
    let mut out: Vec<Option<T>> = vec![None; n];
    for (k, v) in keys {
        out[index(&k)?] = Some(v);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| InputError::Reference(format!("{context} has no entry for `{}`", name(i)))))
        .collect()
}

fn vector(values: &[Pair], expected: usize, context: String) -> Result<CVec, InputError> {
    if values.len() != expected {
        return Err(shape(context, expected, values.len()));
    }
    Ok(CVec::from_iterator(expected, values.iter().map(complex)))
}

impl Instance {
    pub fn from_document(document: InstanceDocument) -> Result<Self, InputError> {
        let g = FiniteGroupoid::from_tables(&document.groupoid)?;
        let haar = match &document.haar {
            HaarBlock::Counting => HaarSystem::counting(&g),
            HaarBlock::Weights(w) => HaarSystem::from_weights(dense(
                w.iter().map(|(k, v)| (k.clone(), *v)),
                g.n_arrows(),
                |id| lookup(&g, id, "haar weights"),
                |a| g.arrow_id(a).to_string(),
                "haar weights",
            )?),
        };

        let mut functions = BTreeMap::new();
        for (name, block) in &document.functions {
            let context = format!("function `{name}`");
            let values = dense(
                block.values.iter().map(|(k, v)| (k.clone(), *v)),
                g.n_arrows(),
                |id| lookup(&g, id, &context),
                |a| g.arrow_id(a).to_string(),
                &context,
            )?;
            let values = values
                .iter()
                .enumerate()
                .map(|(a, v)| match (block.kind, v) {
                    (_, Scalar::Real(x)) => Ok(Complex64::new(*x, 0.0)),
                    (FunctionKind::Complex, Scalar::Complex(p)) => Ok(complex(p)),
                    (FunctionKind::Real, Scalar::Complex(_)) => {
                        Err(shape(format!("{context} at `{}`", g.arrow_id(a)), "a real number", "an [re, im] pair"))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            functions.insert(name.clone(), GroupoidFunction::new(&g, values).expect("dense over arrows"));
        }

        let mut bundles = BTreeMap::new();
        for (name, block) in &document.bundles {
            let context = format!("bundle `{name}`");
            let dims = dense(
                block.dims.iter().map(|(k, v)| (k.clone(), *v)),
                g.n_units(),
                |id| lookup_unit(&g, id, &context),
                |x| g.unit_id(x).to_string(),
                &format!("{context} dims"),
            )?;
            let rows = dense(
                block.matrices.iter().map(|(k, v)| (k.clone(), v.clone())),
                g.n_arrows(),
                |id| lookup(&g, id, &context),
                |a| g.arrow_id(a).to_string(),
                &format!("{context} matrices"),
            )?;
            let mut maps = Vec::with_capacity(g.n_arrows());
            for (a, m) in rows.iter().enumerate() {
                let (r, c) = (dims[g.dst(a)], dims[g.src(a)]);
                let where_ = format!("{context} matrix for arrow `{}`", g.arrow_id(a));
                if m.len() != r {
                    return Err(shape(where_, format!("{r} rows"), format!("{} rows", m.len())));
                }
                if let Some(bad) = m.iter().find(|row| row.len() != c) {
                    return Err(shape(where_, format!("{c} columns"), format!("{} columns", bad.len())));
                }
                maps.push(CMat::from_fn(r, c, |i, j| complex(&m[i][j])));
            }
            bundles.insert(name.clone(), GHilbertBundle::new(&g, dims, maps)?);
        }

        let bundle_of = |kind: &str, name: &str, bundle: &str| {
            bundles
                .get(bundle)
                .ok_or_else(|| InputError::Reference(format!("{kind} `{name}` refers to unknown bundle `{bundle}`")))
        };

        let mut cocycles = BTreeMap::new();
        for (name, block) in &document.cocycles {
            let b = bundle_of("cocycle", name, &block.bundle)?;
            let context = format!("cocycle `{name}`");
            let raw = dense(
                block.values.iter().map(|(k, v)| (k.clone(), v.clone())),
                g.n_arrows(),
                |id| lookup(&g, id, &context),
                |a| g.arrow_id(a).to_string(),
                &context,
            )?;
            let values = raw
                .iter()
                .enumerate()
                .map(|(a, v)| vector(v, b.dim(g.dst(a)), format!("{context} at arrow `{}`", g.arrow_id(a))))
                .collect::<Result<Vec<_>, _>>()?;
            cocycles.insert(name.clone(), (block.bundle.clone(), Section { values }));
        }

        let mut sections = BTreeMap::new();
        for (name, block) in &document.sections {
            let b = bundle_of("section", name, &block.bundle)?;
            let context = format!("section `{name}`");
            let raw = dense(
                block.values.iter().map(|(k, v)| (k.clone(), v.clone())),
                g.n_units(),
                |id| lookup_unit(&g, id, &context),
                |x| g.unit_id(x).to_string(),
                &context,
            )?;
            let values = raw
                .iter()
                .enumerate()
                .map(|(x, v)| vector(v, b.dim(x), format!("{context} at unit `{}`", g.unit_id(x))))
                .collect::<Result<Vec<_>, _>>()?;
            sections.insert(name.clone(), (block.bundle.clone(), UnitSection { values }));
        }

        Ok(Self { document, groupoid: g, haar, functions, bundles, cocycles, sections })
    }

    pub fn parse(text: &str) -> Result<Self, InputError> {
        Self::from_document(parse(text)?)
    }

    pub fn function(&self, name: &str) -> Result<&GroupoidFunction, InputError> {
        self.functions.get(name).ok_or_else(|| InputError::Usage(format!("document has no function `{name}`")))
    }

    pub fn bundle(&self, name: &str) -> Result<&GHilbertBundle, InputError> {
        self.bundles.get(name).ok_or_else(|| InputError::Usage(format!("document has no bundle `{name}`")))
    }
}

/// Builder for documents from typed objects.
#[derive(Debug, Clone)]
pub struct DocumentBuilder<'a> {
    g: &'a FiniteGroupoid,
    doc: InstanceDocument,
}

impl<'a> DocumentBuilder<'a> {
    pub fn new(g: &'a FiniteGroupoid) -> Self {
        let doc = InstanceDocument {
            groupoid: g.to_tables(),
            haar: HaarBlock::Counting,
            functions: BTreeMap::new(),
            bundles: BTreeMap::new(),
            cocycles: BTreeMap::new(),
            sections: BTreeMap::new(),
        };
        Self { g, doc }
    }

    pub fn haar(mut self, h: &HaarSystem) -> Self {
        self.doc.haar = if h.is_counting() {
            HaarBlock::Counting
        } else {
            HaarBlock::Weights((0..self.g.n_arrows()).map(|a| (self.g.arrow_id(a).to_string(), h.weight(a))).collect())
        };
        self
    }

    pub fn function(mut self, name: &str, f: &GroupoidFunction) -> Self {
        let real = f.values().iter().all(|z| z.im == 0.0);
        let values = (0..self.g.n_arrows())
            .map(|a| {
                let z = f.get(a);
                (self.g.arrow_id(a).to_string(), if real { Scalar::Real(z.re) } else { Scalar::Complex(pair(z)) })
            })
            .collect();
        let kind = if real { FunctionKind::Real } else { FunctionKind::Complex };
        self.doc.functions.insert(name.to_string(), FunctionBlock { kind, values });
        self
    }

    pub fn bundle(mut self, name: &str, b: &GHilbertBundle) -> Self {
        let g = self.g;
        let dims = (0..g.n_units()).map(|x| (g.unit_id(x).to_string(), b.dim(x))).collect();
        let matrices = (0..g.n_arrows())
            .map(|a| {
                let m = b.action(a);
                let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect();
                (g.arrow_id(a).to_string(), rows)
            })
            .collect();
        self.doc.bundles.insert(name.to_string(), BundleBlock { dims, matrices });
        self
    }

    pub fn cocycle(mut self, name: &str, bundle: &str, c: &Cocycle) -> Self {
        let values =
            c.values.iter().enumerate().map(|(a, v)| (self.g.arrow_id(a).to_string(), v.iter().copied().map(pair).collect())).collect();
        self.doc.cocycles.insert(name.to_string(), VectorBlock { bundle: bundle.to_string(), values });
        self
    }

    pub fn section(mut self, name: &str, bundle: &str, s: &UnitSection) -> Self {
        let values =
            s.values.iter().enumerate().map(|(x, v)| (self.g.unit_id(x).to_string(), v.iter().copied().map(pair).collect())).collect();
        self.doc.sections.insert(name.to_string(), VectorBlock { bundle: bundle.to_string(), values });
        self
    }

    pub fn build(self) -> InstanceDocument {
        self.doc
    }
}

/// Groupoid families accepted by [`generate_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Pair groupoid on `size` points.
    Pair,
    /// Cyclic group of order `size`.
    Group,
    /// `Z/size` acting on `size` points through a random permutation.
    Transformation,
    /// Any standard groupoid with at most `size` arrows.
    Random,
}

impl std::str::FromStr for GeneratorKind {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pair" => Ok(Self::Pair),
            "group" => Ok(Self::Group),
            "transformation" => Ok(Self::Transformation),
            "random" => Ok(Self::Random),
            other => Err(InputError::Usage(format!("unsupported generator kind `{other}` (pair, group, transformation, random)"))),
        }
    }
}

/// `gen:KIND:SIZE`.
pub fn parse_generator_spec(spec: &str) -> Result<Option<(GeneratorKind, usize)>, InputError> {
    let Some(rest) = spec.strip_prefix("gen:") else {
        return Ok(None);
    };
    let (kind, size) = rest.split_once(':').ok_or_else(|| InputError::Usage(format!("generator spec `{spec}` is not gen:KIND:SIZE")))?;
    let size: usize = size.parse().map_err(|_| InputError::Usage(format!("generator size `{size}` is not a positive integer")))?;
    if size == 0 {
        return Err(InputError::Usage("generator size must be positive".into()));
    }
    Ok(Some((kind.parse()?, size)))
}

/// Deterministic random instance: a groupoid of the requested kind with a
/// random invariant Haar system, a complex bundle `E` with section `e`, a
/// real bundle `F` with real section `xi` and its coboundary `c`, and the
/// functions `phi` (from `E`, `e`), `psi = ‖c‖²` and a random element `f`.
pub fn generate_random(kind: GeneratorKind, size: usize, seed: u64) -> Result<InstanceDocument, InputError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let standard = match kind {
        GeneratorKind::Pair => StandardKind::Pair(size),
        GeneratorKind::Group => StandardKind::Group(GroupTable::cyclic(size)),
        GeneratorKind::Transformation => StandardKind::Transformation(random::random_cyclic_action(&mut rng, size, size)),
        GeneratorKind::Random => random::random_kind(&mut rng, size),
    };
    let (g, _) = make_standard(&standard).map_err(|e| InputError::Usage(e.to_string()))?;
    let haar = random::random_haar(&g, &mut rng);
    let e = random::random_bundle(&g, &mut rng, 3, false);
    let e_sec = random::random_unit_section(&e, &mut rng, false);
    let f_bundle = random::random_bundle(&g, &mut rng, 3, true);
    let xi = random::random_unit_section(&f_bundle, &mut rng, true);
    let c = coboundary(&g, &f_bundle, &xi);
    let f = GroupoidFunction::new(&g, random::random_element(&g, &mut rng).values().to_vec()).expect("one value per arrow");
    Ok(DocumentBuilder::new(&g)
        .haar(&haar)
        .bundle("E", &e)
        .bundle("F", &f_bundle)
        .section("e", "E", &e_sec)
        .section("xi", "F", &xi)
        .cocycle("c", "F", &c)
        .function("phi", &function_from_section(&g, &e, &e_sec))
        .function("psi", &function_from_cocycle(&c))
        .function("f", &f)
        .build())
}

/// Document for one of the named standard groupoids, no extra blocks.
pub fn standard_document(kind: &StandardKind) -> InstanceDocument {
    let (g, _) = make_standard(kind).expect("standard constructors are valid");
    DocumentBuilder::new(&g).build()
}

/// Convenience for tests and examples: `Z/n` acting on `points` points by
/// rotation of a single orbit.
pub fn rotation_action(n: usize) -> GroupAction {
    let action = (0..n).map(|k| (0..n).map(|x| (x + k) % n).collect()).collect();
    GroupAction::new(GroupTable::cyclic(n), action).expect("rotation is an action")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{is_cnt_function, is_pt_function};
    use crate::groupoid::check_haar;

    #[test]
    fn pair_round_trip_is_byte_identical() {
        let doc = standard_document(&StandardKind::Pair(2));
        let text = serialize(&doc);
        let back = parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(serialize(&back), text);
        assert_eq!(instance_hash(&back), instance_hash(&doc));
    }

    #[test]
    fn generated_round_trip() {
        let doc = generate_random(GeneratorKind::Random, 20, 3).unwrap();
        let text = serialize(&doc);
        let inst = Instance::parse(&text).unwrap();
        assert_eq!(serialize(&inst.document), text);
        // rebuilding from the typed objects reproduces the document
        let mut b = DocumentBuilder::new(&inst.groupoid).haar(&inst.haar);
        for (k, v) in &inst.bundles {
            b = b.bundle(k, v);
        }
        for (k, v) in &inst.functions {
            b = b.function(k, v);
        }
        for (k, (bn, v)) in &inst.cocycles {
            b = b.cocycle(k, bn, v);
        }
        for (k, (bn, v)) in &inst.sections {
            b = b.section(k, bn, v);
        }
        assert_eq!(serialize(&b.build()), text);
    }

    #[test]
    fn missing_inverse_is_a_reference_error() {
        let mut doc = standard_document(&StandardKind::Pair(2));
        let dropped = doc.groupoid.inverse.remove(1);
        let err = Instance::from_document(doc).unwrap_err();
        assert_eq!(err.category(), "reference");
        assert!(err.to_string().contains(&dropped[0]), "{err}");
    }

    #[test]
    fn wrong_matrix_shape_is_a_shape_error() {
        let mut doc = generate_random(GeneratorKind::Pair, 2, 1).unwrap();
        let block = doc.bundles.get_mut("E").unwrap();
        let (arrow, m) = block.matrices.iter_mut().next().unwrap();
        let arrow = arrow.clone();
        let expected = m.len();
        m.push(m[0].clone());
        let err = Instance::from_document(doc).unwrap_err();
        match &err {
            InputError::Shape { context, expected: e, actual } => {
                assert!(context.contains(&arrow));
                assert_eq!(e, &format!("{expected} rows"));
                assert_eq!(actual, &format!("{} rows", expected + 1));
            }
            other => panic!("expected a shape error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("{\n  \"groupoid\": {\n    \"units\": [,]\n").unwrap_err();
        match err {
            InputError::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert_eq!(parse("{\"groupoid\": 3}").unwrap_err().category(), "syntax");
    }

    #[test]
    fn real_function_rejects_pairs() {
        let mut doc = generate_random(GeneratorKind::Group, 2, 0).unwrap();
        let psi = doc.functions.get_mut("psi").unwrap();
        *psi.values.values_mut().next().unwrap() = Scalar::Complex([1.0, 1.0]);
        assert_eq!(Instance::from_document(doc).unwrap_err().category(), "shape");
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        assert_eq!(generate_random(GeneratorKind::Pair, 4, 7).unwrap(), generate_random(GeneratorKind::Pair, 4, 7).unwrap());
        assert_ne!(generate_random(GeneratorKind::Pair, 4, 7).unwrap(), generate_random(GeneratorKind::Pair, 4, 8).unwrap());
        let inst = Instance::from_document(generate_random(GeneratorKind::Transformation, 3, 1).unwrap()).unwrap();
        assert_eq!(inst.groupoid.n_arrows(), 9);
        for seed in 0..20 {
            for kind in [GeneratorKind::Pair, GeneratorKind::Group, GeneratorKind::Transformation, GeneratorKind::Random] {
                let inst = Instance::from_document(generate_random(kind, 4, seed).unwrap()).unwrap();
                let g = &inst.groupoid;
                assert!(g.validate().is_empty());
                assert!(check_haar(g, &inst.haar).is_empty());
                assert!(is_cnt_function(g, &inst.functions["psi"], 1e-9));
                assert!(is_pt_function(g, &inst.functions["phi"], 1e-9));
            }
        }
    }

    #[test]
    fn generator_specs() {
        assert_eq!(parse_generator_spec("gen:pair:3").unwrap(), Some((GeneratorKind::Pair, 3)));
        assert_eq!(parse_generator_spec("file.json").unwrap(), None);
        assert_eq!(parse_generator_spec("gen:torus:3").unwrap_err().category(), "usage");
        assert_eq!(parse_generator_spec("gen:pair:x").unwrap_err().category(), "usage");
    }

    #[test]
    fn schema_is_json_and_names_the_blocks() {
        let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        let props = schema["properties"].as_object().unwrap();
        for key in ["groupoid", "haar", "functions", "bundles", "cocycles", "sections"] {
            assert!(props.contains_key(key), "{key}");
        }
    }

    #[test]
    fn rotation_is_transitive() {
        let (g, _) = make_standard(&StandardKind::Transformation(rotation_action(4))).unwrap();
        assert_eq!(g.orbits().len(), 1);
    }
}
