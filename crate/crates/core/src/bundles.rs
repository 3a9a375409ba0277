//! G-Hilbert bundles over a finite groupoid, cocycles, sections, tensor
//! products, coboundaries and the affine action attached to a cocycle.
//!
//! A bundle stores a fiber dimension per unit and a matrix `L(γ)` of shape
//! `d(dst γ) × d(src γ)` for every arrow. Nothing is derived from a
//! generating set; functoriality and unitarity are validated, not assumed.

use thiserror::Error;

use crate::groupoid::{Axiom, FiniteGroupoid, ValidationReport};
use crate::linalg::{self, CMat, CVec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BundleError {
    #[error("{what} for arrow `{arrow}` has shape {actual:?}, expected {expected:?}")]
    ArrowShape { what: &'static str, arrow: String, expected: (usize, usize), actual: (usize, usize) },
    #[error("{what} at unit `{unit}` has length {actual}, expected {expected}")]
    UnitShape { what: &'static str, unit: String, expected: usize, actual: usize },
    #[error("{what}: expected {expected} entries, got {actual}")]
    Count { what: &'static str, expected: usize, actual: usize },
    #[error("bundles live over different groupoids")]
    GroupoidMismatch,
}

/// A G-Hilbert bundle: fiber dimensions and the linear action `L(γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GHilbertBundle {
    dims: Vec<usize>,
    maps: Vec<CMat>,
}

impl GHilbertBundle {
    pub fn new(g: &FiniteGroupoid, dims: Vec<usize>, maps: Vec<CMat>) -> Result<Self, BundleError> {
        if dims.len() != g.n_units() {
            return Err(BundleError::Count { what: "fiber dimensions", expected: g.n_units(), actual: dims.len() });
        }
        if maps.len() != g.n_arrows() {
            return Err(BundleError::Count { what: "arrow matrices", expected: g.n_arrows(), actual: maps.len() });
        }
        for (a, m) in maps.iter().enumerate() {
            let expected = (dims[g.dst(a)], dims[g.src(a)]);
            if m.shape() != expected {
                return Err(BundleError::ArrowShape {
                    what: "matrix",
                    arrow: g.arrow_id(a).into(),
                    expected,
                    actual: m.shape(),
                });
            }
        }
        Ok(Self { dims, maps })
    }

    /// Trivial bundle `C^d` with `L ≡ 1`.
    pub fn trivial(g: &FiniteGroupoid, d: usize) -> Self {
        Self { dims: vec![d; g.n_units()], maps: vec![CMat::identity(d, d); g.n_arrows()] }
    }

    pub fn dim(&self, unit: usize) -> usize {
        self.dims[unit]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `L(γ)`.
    pub fn action(&self, arrow: usize) -> &CMat {
        &self.maps[arrow]
    }

    pub fn maps(&self) -> &[CMat] {
        &self.maps
    }

    pub fn n_arrows(&self) -> usize {
        self.maps.len()
    }

    /// Fiber dimension at the range of each arrow, i.e. the shape of a
    /// section of the pulled-back bundle `r*E`.
    pub fn range_dims(&self, g: &FiniteGroupoid) -> Vec<usize> {
        (0..g.n_arrows()).map(|a| self.dims[g.dst(a)]).collect()
    }

    fn same_base(&self, g: &FiniteGroupoid) -> bool {
        self.dims.len() == g.n_units() && self.maps.len() == g.n_arrows()
    }
}

/// Largest residual of each bundle axiom.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BundleResiduals {
    pub unit: f64,
    pub functoriality: f64,
    pub unitarity: f64,
    pub inverse: f64,
}

impl BundleResiduals {
    pub fn max(&self) -> f64 {
        self.unit.max(self.functoriality).max(self.unitarity).max(self.inverse)
    }
}

pub fn bundle_residuals(g: &FiniteGroupoid, b: &GHilbertBundle) -> BundleResiduals {
    let mut r = BundleResiduals::default();
    for x in 0..g.n_units() {
        let d = b.dim(x);
        r.unit = r.unit.max(linalg::max_abs_diff(b.action(g.unit_arrow(x)), &CMat::identity(d, d)));
    }
    for (a, c) in g.composable_pairs() {
        r.functoriality = r.functoriality.max(linalg::max_abs_diff(b.action(g.mul(a, c)), &(b.action(a) * b.action(c))));
    }
    for a in 0..g.n_arrows() {
        let l = b.action(a);
        if l.is_square() {
            r.unitarity = r.unitarity.max(linalg::isometry_defect(l));
        } else {
            r.unitarity = f64::INFINITY;
        }
        let inv = b.action(g.inverse(a));
        if inv.shape() == (l.ncols(), l.nrows()) {
            r.inverse = r.inverse.max(linalg::max_abs_diff(inv, &l.adjoint()));
        } else {
            r.inverse = f64::INFINITY;
        }
    }
    r
}

/// Unit, functoriality, unitarity and inverse law of `L`, each within `tol`.
pub fn validate_bundle(g: &FiniteGroupoid, b: &GHilbertBundle, tol: f64) -> Result<ValidationReport, BundleError> {
    if !b.same_base(g) {
        return Err(BundleError::GroupoidMismatch);
    }
    let mut report = ValidationReport::default();
    let id = |a: usize| g.arrow_id(a).to_string();
    for x in 0..g.n_units() {
        let u = g.unit_arrow(x);
        let d = b.dim(x);
        let res = linalg::max_abs_diff(b.action(u), &CMat::identity(d, d));
        if res > tol {
            report.push(Axiom::BundleUnit, vec![id(u)], format!("|L(unit) - 1| = {res:e}"));
        }
    }
    for (a, c) in g.composable_pairs() {
        let res = linalg::max_abs_diff(b.action(g.mul(a, c)), &(b.action(a) * b.action(c)));
        if res > tol {
            report.push(Axiom::BundleFunctoriality, vec![id(a), id(c)], format!("|L(γγ') - L(γ)L(γ')| = {res:e}"));
        }
    }
    for a in 0..g.n_arrows() {
        let l = b.action(a);
        if !l.is_square() {
            report.push(Axiom::BundleUnitarity, vec![id(a)], format!("non-square {}×{} action", l.nrows(), l.ncols()));
            continue;
        }
        let res = linalg::isometry_defect(l);
        if res > tol {
            report.push(Axiom::BundleUnitarity, vec![id(a)], format!("|L*L - 1| = {res:e}"));
        }
        let res = linalg::max_abs_diff(b.action(g.inverse(a)), &l.adjoint());
        if res > tol {
            report.push(Axiom::BundleInverse, vec![id(a)], format!("|L(γ⁻¹) - L(γ)*| = {res:e}"));
        }
    }
    Ok(report)
}

/// Tensor product `E ⊗ F` with `L(γ) = L_E(γ) ⊗ L_F(γ)` (Kronecker product,
/// `e ⊗ f` stored at index `i·dim F + j`).
pub fn tensor_bundle(g: &FiniteGroupoid, e: &GHilbertBundle, f: &GHilbertBundle) -> Result<GHilbertBundle, BundleError> {
    if !e.same_base(g) || !f.same_base(g) {
        return Err(BundleError::GroupoidMismatch);
    }
    Ok(GHilbertBundle {
        dims: e.dims.iter().zip(&f.dims).map(|(a, b)| a * b).collect(),
        maps: e.maps.iter().zip(&f.maps).map(|(a, b)| linalg::kron(a, b)).collect(),
    })
}

/// A vector in the fiber over each unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitSection {
    pub values: Vec<CVec>,
}

impl UnitSection {
    pub fn new(g: &FiniteGroupoid, b: &GHilbertBundle, values: Vec<CVec>) -> Result<Self, BundleError> {
        if values.len() != g.n_units() {
            return Err(BundleError::Count { what: "unit section", expected: g.n_units(), actual: values.len() });
        }
        for (x, v) in values.iter().enumerate() {
            if v.len() != b.dim(x) {
                return Err(BundleError::UnitShape {
                    what: "unit section",
                    unit: g.unit_id(x).into(),
                    expected: b.dim(x),
                    actual: v.len(),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(b: &GHilbertBundle) -> Self {
        Self { values: b.dims.iter().map(|&d| CVec::zeros(d)).collect() }
    }
}

/// A section of `r*E`: a vector in `E_{dst γ}` for every arrow. Elements of
/// the correspondence space, and the shape of a cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub values: Vec<CVec>,
}

impl Section {
    pub fn new(g: &FiniteGroupoid, b: &GHilbertBundle, values: Vec<CVec>) -> Result<Self, BundleError> {
        if values.len() != g.n_arrows() {
            return Err(BundleError::Count { what: "section", expected: g.n_arrows(), actual: values.len() });
        }
        for (a, v) in values.iter().enumerate() {
            let d = b.dim(g.dst(a));
            if v.len() != d {
                return Err(BundleError::ArrowShape {
                    what: "section value",
                    arrow: g.arrow_id(a).into(),
                    expected: (d, 1),
                    actual: (v.len(), 1),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(g: &FiniteGroupoid, b: &GHilbertBundle) -> Self {
        Self { values: (0..g.n_arrows()).map(|a| CVec::zeros(b.dim(g.dst(a)))).collect() }
    }

    pub fn max_abs_diff(&self, other: &Section) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| linalg::vec_max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flat_map(|v| v.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Section) -> Section {
        Section { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: num_complex::Complex64) -> Section {
        Section { values: self.values.iter().map(|v| v * s).collect() }
    }
}

/// A one-cocycle: `c(γ) ∈ E_{dst γ}` with `c(γγ') = c(γ) + L(γ)c(γ')`.
pub type Cocycle = Section;

/// Largest residual of each cocycle law.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CocycleResiduals {
    pub identity: f64,
    pub unit: f64,
    pub inverse: f64,
}

impl CocycleResiduals {
    pub fn max(&self) -> f64 {
        self.identity.max(self.unit).max(self.inverse)
    }
}

pub fn cocycle_residuals(g: &FiniteGroupoid, b: &GHilbertBundle, c: &Cocycle) -> CocycleResiduals {
    let mut r = CocycleResiduals::default();
    for (a, d) in g.composable_pairs() {
        let rhs = &c.values[a] + b.action(a) * &c.values[d];
        r.identity = r.identity.max(linalg::vec_max_abs_diff(&c.values[g.mul(a, d)], &rhs));
    }
    for x in 0..g.n_units() {
        r.unit = r.unit.max(c.values[g.unit_arrow(x)].camax());
    }
    for a in 0..g.n_arrows() {
        let inv = g.inverse(a);
        let expected = -(b.action(inv) * &c.values[a]);
        r.inverse = r.inverse.max(linalg::vec_max_abs_diff(&c.values[inv], &expected));
    }
    r
}

/// Cocycle identity, vanishing on units and `c(γ⁻¹) = -L(γ⁻¹)c(γ)`, each
/// checked on its own within `tol`.
pub fn validate_cocycle(g: &FiniteGroupoid, b: &GHilbertBundle, c: &Cocycle, tol: f64) -> Result<ValidationReport, BundleError> {
    if !b.same_base(g) {
        return Err(BundleError::GroupoidMismatch);
    }
    Section::new(g, b, c.values.clone())?;
    let mut report = ValidationReport::default();
    let id = |a: usize| g.arrow_id(a).to_string();
    for (a, d) in g.composable_pairs() {
        let rhs = &c.values[a] + b.action(a) * &c.values[d];
        let res = linalg::vec_max_abs_diff(&c.values[g.mul(a, d)], &rhs);
        if res > tol {
            report.push(Axiom::CocycleIdentity, vec![id(a), id(d)], format!("|c(γγ') - c(γ) - L(γ)c(γ')| = {res:e}"));
        }
    }
    for x in 0..g.n_units() {
        let u = g.unit_arrow(x);
        let res = c.values[u].camax();
        if res > tol {
            report.push(Axiom::CocycleUnit, vec![id(u)], format!("|c(unit)| = {res:e}"));
        }
    }
    for a in 0..g.n_arrows() {
        let inv = g.inverse(a);
        let res = linalg::vec_max_abs_diff(&c.values[inv], &-(b.action(inv) * &c.values[a]));
        if res > tol {
            report.push(Axiom::CocycleInverse, vec![id(a)], format!("|c(γ⁻¹) + L(γ⁻¹)c(γ)| = {res:e}"));
        }
    }
    Ok(report)
}

/// `c(γ) = ξ(dst γ) - L(γ)ξ(src γ)`.
///
/// Of the two sign conventions for the cocycle of a section this one puts
/// `ξ∘r` first; the other is its negative and equally a cocycle.
pub fn coboundary(g: &FiniteGroupoid, b: &GHilbertBundle, xi: &UnitSection) -> Cocycle {
    Section {
        values: (0..g.n_arrows())
            .map(|a| &xi.values[g.dst(a)] - b.action(a) * &xi.values[g.src(a)])
            .collect(),
    }
}

/// `A(γ)u = c(γ) + L(γ)u` for `u ∈ E_{src γ}`.
pub fn affine_action(
    g: &FiniteGroupoid,
    b: &GHilbertBundle,
    c: &Cocycle,
    arrow: usize,
    u: &CVec,
) -> Result<CVec, BundleError> {
    let expected = b.dim(g.src(arrow));
    if u.len() != expected {
        return Err(BundleError::UnitShape {
            what: "affine action argument",
            unit: g.unit_id(g.src(arrow)).into(),
            expected,
            actual: u.len(),
        });
    }
    Ok(&c.values[arrow] + b.action(arrow) * u)
}
