//! Sections of `r*E` as a correspondence over the convolution algebra:
//! left and right actions, the algebra-valued inner product, the map
//! `E_unit ⊗ C_c(G) → sections`, interior tensor products and pushforward
//! along equivariant bundle maps.
//!
//! ```text
//! (fξ)(γ)  = Σ_{γ' ∈ G^{rγ}} w(γ') f(γ') L(γ') ξ(γ'⁻¹γ)
//! (ξg)(γ)  = Σ_{γ' ∈ G^{sγ}} w(γ') ξ(γγ') g(γ'⁻¹)
//! <ξ,η>(γ) = Σ_{γ' ∈ G^{rγ}} w(γ') (ξ(γ'⁻¹) | η(γ'⁻¹γ))
//! ```

use num_complex::Complex64;
use thiserror::Error;

use crate::bundles::{tensor_bundle, BundleError, GHilbertBundle, Section, UnitSection};
use crate::convolution::{Algebra, AlgebraElement};
use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::linalg::{self, c, CMat, CVec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrespondenceError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("morphism has {actual} blocks, groupoid has {expected} units")]
    MorphismCount { expected: usize, actual: usize },
    #[error("morphism block at unit {unit} is {rows}×{cols}, expected {expected_rows}×{expected_cols}")]
    MorphismShape { unit: String, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("morphism is not equivariant at arrow {arrow}: residual {residual:e}")]
    NotEquivariant { arrow: String, residual: f64 },
    #[error("morphisms do not compose: target of the first has dimension {left} at unit {unit}, source of the second {right}")]
    Incomposable { unit: String, left: usize, right: usize },
}

/// Sections of one bundle, with the algebra acting on both sides.
#[derive(Debug, Clone, Copy)]
pub struct Module<'a> {
    pub groupoid: &'a FiniteGroupoid,
    pub haar: &'a HaarSystem,
    pub bundle: &'a GHilbertBundle,
}

impl<'a> Module<'a> {
    pub fn new(groupoid: &'a FiniteGroupoid, haar: &'a HaarSystem, bundle: &'a GHilbertBundle) -> Self {
        Self { groupoid, haar, bundle }
    }

    pub fn algebra(&self) -> Algebra<'a> {
        Algebra::new(self.groupoid, self.haar)
    }

    pub fn zero_section(&self) -> Section {
        Section::zeros(self.groupoid, self.bundle)
    }

    pub fn left_action(&self, f: &AlgebraElement, xi: &Section) -> Section {
        let g = self.groupoid;
        let values = (0..g.n_arrows())
            .map(|gamma| {
                let mut acc = CVec::zeros(self.bundle.dim(g.dst(gamma)));
                for &eta in g.range_fiber(g.dst(gamma)) {
                    let coeff = f.get(eta) * self.haar.weight(eta);
                    if coeff != c(0.0) {
                        acc += self.bundle.action(eta) * &xi.values[g.mul(g.inverse(eta), gamma)] * coeff;
                    }
                }
                acc
            })
            .collect();
        Section { values }
    }

    pub fn right_action(&self, xi: &Section, h: &AlgebraElement) -> Section {
        let g = self.groupoid;
        let values = (0..g.n_arrows())
            .map(|gamma| {
                let mut acc = CVec::zeros(self.bundle.dim(g.dst(gamma)));
                for &eta in g.range_fiber(g.src(gamma)) {
                    acc += &xi.values[g.mul(gamma, eta)] * (h.get(g.inverse(eta)) * self.haar.weight(eta));
                }
                acc
            })
            .collect();
        Section { values }
    }

    pub fn inner_product(&self, xi: &Section, eta: &Section) -> AlgebraElement {
        let g = self.groupoid;
        AlgebraElement::new(
            (0..g.n_arrows())
                .map(|gamma| {
                    g.range_fiber(g.dst(gamma))
                        .iter()
                        .map(|&a| {
                            let inv = g.inverse(a);
                            linalg::inner(&xi.values[inv], &eta.values[g.mul(inv, gamma)]) * self.haar.weight(a)
                        })
                        .sum()
                })
                .collect(),
        )
    }

    /// `cstar_norm(<ξ,ξ>)^{1/2}`.
    pub fn section_norm(&self, xi: &Section) -> f64 {
        self.algebra().cstar_norm(&self.inner_product(xi, xi)).sqrt()
    }

    /// Smallest eigenvalue over units of `‖f‖² π_x(<ξ,ξ>) − π_x(<fξ,fξ>)`.
    pub fn bounded_action_margin(&self, f: &AlgebraElement, xi: &Section) -> f64 {
        let alg = self.algebra();
        let norm2 = alg.cstar_norm(f).powi(2);
        let before = self.inner_product(xi, xi);
        let fxi = self.left_action(f, xi);
        let after = self.inner_product(&fxi, &fxi);
        (0..self.groupoid.n_units())
            .map(|x| {
                let m = alg.representation_at(&before, x) * c(norm2) - alg.representation_at(&after, x);
                linalg::min_eigenvalue(&((&m + m.adjoint()) * c(0.5)))
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounded_action_check(&self, f: &AlgebraElement, xi: &Section, tol: f64) -> bool {
        let margin = self.bounded_action_margin(f, xi);
        !margin.is_finite() || margin >= -tol
    }

    /// `j(ξ⊗f)(γ) = ξ(rγ) f(γ)`.
    pub fn le_gall_map(&self, xi: &UnitSection, f: &AlgebraElement) -> Section {
        let g = self.groupoid;
        Section { values: (0..g.n_arrows()).map(|a| &xi.values[g.dst(a)] * f.get(a)).collect() }
    }
}

/// Fiberwise inner products `x ↦ (ξ(x)|η(x))` of two unit sections.
pub fn unit_inner(xi: &UnitSection, eta: &UnitSection) -> Vec<Complex64> {
    xi.values.iter().zip(&eta.values).map(|(a, b)| linalg::inner(a, b)).collect()
}

/// `(h·f)(γ) = h(rγ) f(γ)` for a function `h` on units.
pub fn unit_multiply(g: &FiniteGroupoid, h: &[Complex64], f: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::new((0..g.n_arrows()).map(|a| h[g.dst(a)] * f.get(a)).collect())
}

/// `E ⊗ F` together with the map `j_c` on elementary tensors of sections.
#[derive(Debug, Clone)]
pub struct Composition {
    pub bundle: GHilbertBundle,
}

impl Composition {
    pub fn new(g: &FiniteGroupoid, e: &GHilbertBundle, f: &GHilbertBundle) -> Result<Self, CorrespondenceError> {
        Ok(Self { bundle: tensor_bundle(g, e, f)? })
    }
}

/// `j_c(ξ⊗η)(γ) = Σ_{γ' ∈ G^{rγ}} w(γ') ξ(γ') ⊗ L_F(γ') η(γ'⁻¹γ)`, with
/// the tensor flattened as `i·dim F + j`.
pub fn compose_sections(
    g: &FiniteGroupoid,
    haar: &HaarSystem,
    f_bundle: &GHilbertBundle,
    xi: &Section,
    eta: &Section,
) -> Section {
    let values = (0..g.n_arrows())
        .map(|gamma| {
            let y = g.dst(gamma);
            let mut acc = CVec::zeros(xi.values[gamma].len() * f_bundle.dim(y));
            for &a in g.range_fiber(y) {
                let moved = f_bundle.action(a) * &eta.values[g.mul(g.inverse(a), gamma)];
                acc += linalg::kron_vec(&xi.values[a], &moved) * c(haar.weight(a));
            }
            acc
        })
        .collect();
    Section { values }
}

/// Per-unit linear maps `φ_x : E_x → F_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMorphism {
    pub blocks: Vec<CMat>,
}

impl BundleMorphism {
    /// Checks shapes and `φ_{rγ} L_E(γ) = L_F(γ) φ_{sγ}` within `tol`.
    pub fn new(
        g: &FiniteGroupoid,
        source: &GHilbertBundle,
        target: &GHilbertBundle,
        blocks: Vec<CMat>,
        tol: f64,
    ) -> Result<Self, CorrespondenceError> {
        let m = Self::unchecked(g, source, target, blocks)?;
        for a in 0..g.n_arrows() {
            let residual = m.equivariance_residual(g, source, target, a);
            if residual > tol {
                return Err(CorrespondenceError::NotEquivariant { arrow: g.arrow_id(a).to_string(), residual });
            }
        }
        Ok(m)
    }

    /// Shape check only.
    pub fn unchecked(
        g: &FiniteGroupoid,
        source: &GHilbertBundle,
        target: &GHilbertBundle,
        blocks: Vec<CMat>,
    ) -> Result<Self, CorrespondenceError> {
        if blocks.len() != g.n_units() {
            return Err(CorrespondenceError::MorphismCount { expected: g.n_units(), actual: blocks.len() });
        }
        for (x, m) in blocks.iter().enumerate() {
            if m.shape() != (target.dim(x), source.dim(x)) {
                return Err(CorrespondenceError::MorphismShape {
                    unit: g.unit_id(x).to_string(),
                    rows: m.nrows(),
                    cols: m.ncols(),
                    expected_rows: target.dim(x),
                    expected_cols: source.dim(x),
                });
            }
        }
        Ok(Self { blocks })
    }

    pub fn identity(b: &GHilbertBundle) -> Self {
        Self { blocks: b.dims().iter().map(|&d| CMat::identity(d, d)).collect() }
    }

    pub fn equivariance_residual(&self, g: &FiniteGroupoid, source: &GHilbertBundle, target: &GHilbertBundle, arrow: usize) -> f64 {
        let lhs = &self.blocks[g.dst(arrow)] * source.action(arrow);
        let rhs = target.action(arrow) * &self.blocks[g.src(arrow)];
        linalg::max_abs_diff(&lhs, &rhs)
    }

    /// `(φ_*ξ)(γ) = φ_{rγ} ξ(γ)`.
    pub fn pushforward(&self, g: &FiniteGroupoid, xi: &Section) -> Section {
        Section { values: (0..g.n_arrows()).map(|a| &self.blocks[g.dst(a)] * &xi.values[a]).collect() }
    }

    /// `other ∘ self`.
    pub fn then(&self, g: &FiniteGroupoid, other: &BundleMorphism) -> Result<BundleMorphism, CorrespondenceError> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (x, (a, b)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            if a.nrows() != b.ncols() {
                return Err(CorrespondenceError::Incomposable { unit: g.unit_id(x).to_string(), left: a.nrows(), right: b.ncols() });
            }
            blocks.push(b * a);
        }
        Ok(BundleMorphism { blocks })
    }
}
