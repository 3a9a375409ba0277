//! The convolution *-algebra of a finite groupoid with Haar system, its
//! regular representation and the C*-norm that representation induces.
//!
//! Conventions, used by every downstream module:
//!
//! ```text
//! (f * g)(γ) = Σ_{γ' ∈ G^{r(γ)}} w(γ') f(γ') g(γ'⁻¹γ)
//! f*(γ)      = conj f(γ⁻¹)
//! ```
//!
//! `π_x(f)` acts on functions on the source fiber `G_x` by
//! `(π_x(f)ξ)(γ) = Σ_{γ'} w(γ') f(γ') ξ(γ'⁻¹γ)`. That operator is self-adjoint
//! for the measure `β ↦ w(β⁻¹)` on `G_x`, which is the counting measure for
//! counting weights; the matrices returned here are expressed in an
//! orthonormal basis for that measure, so `π_x(f*) = π_x(f)ᴴ` exactly.

use num_complex::Complex64;

use crate::groupoid::{FiniteGroupoid, HaarSystem};
use crate::linalg::{self, c, CMat};

/// A complex function on the arrows.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    values: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { values: values.iter().map(|&v| c(v)).collect() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![c(0.0); n] }
    }

    pub fn delta(n: usize, arrow: usize) -> Self {
        let mut f = Self::zeros(n);
        f.values[arrow] = c(1.0);
        f
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, arrow: usize) -> Complex64 {
        self.values[arrow]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect() }
    }

    /// Pointwise product with a function on arrows.
    pub fn pointwise(&self, phi: &[Complex64]) -> Self {
        Self { values: self.values.iter().zip(phi).map(|(a, b)| a * b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
}

/// `C_c(G)` for a fixed groupoid and Haar system.
#[derive(Debug, Clone, Copy)]
pub struct Algebra<'a> {
    pub groupoid: &'a FiniteGroupoid,
    pub haar: &'a HaarSystem,
}

impl<'a> Algebra<'a> {
    pub fn new(groupoid: &'a FiniteGroupoid, haar: &'a HaarSystem) -> Self {
        Self { groupoid, haar }
    }

    fn g(&self) -> &FiniteGroupoid {
        self.groupoid
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement::zeros(self.g().n_arrows())
    }

    pub fn delta(&self, arrow: usize) -> AlgebraElement {
        AlgebraElement::delta(self.g().n_arrows(), arrow)
    }

    /// The unit `Σ_x δ_x / w(x)`.
    pub fn unit(&self) -> AlgebraElement {
        let mut f = self.zero();
        for x in 0..self.g().n_units() {
            let u = self.g().unit_arrow(x);
            f.values[u] = c(1.0 / self.haar.weight(u));
        }
        f
    }

    pub fn convolve(&self, f: &AlgebraElement, h: &AlgebraElement) -> AlgebraElement {
        let g = self.g();
        let values = (0..g.n_arrows())
            .map(|gamma| {
                g.range_fiber(g.dst(gamma))
                    .iter()
                    .map(|&eta| {
                        let rest = g.mul(g.inverse(eta), gamma);
                        f.values[eta] * h.values[rest] * self.haar.weight(eta)
                    })
                    .sum()
            })
            .collect();
        AlgebraElement { values }
    }

    pub fn involution(&self, f: &AlgebraElement) -> AlgebraElement {
        let g = self.g();
        AlgebraElement { values: (0..g.n_arrows()).map(|a| f.values[g.inverse(a)].conj()).collect() }
    }

    /// `π_x(f)` on `ℓ²(G_x)`, rows and columns in source-fiber order.
    pub fn representation_at(&self, f: &AlgebraElement, x: usize) -> CMat {
        let g = self.g();
        let fiber = g.source_fiber(x);
        let mass = |beta: usize| self.haar.weight(g.inverse(beta));
        CMat::from_fn(fiber.len(), fiber.len(), |i, j| {
            let (gamma, beta) = (fiber[i], fiber[j]);
            let eta = g.mul(gamma, g.inverse(beta));
            f.values[eta] * self.haar.weight(eta) * (mass(gamma) / mass(beta)).sqrt()
        })
    }

    pub fn regular_representation(&self, f: &AlgebraElement) -> Vec<CMat> {
        (0..self.g().n_units()).map(|x| self.representation_at(f, x)).collect()
    }

    /// `max_x ‖π_x(f)‖`.
    pub fn cstar_norm(&self, f: &AlgebraElement) -> f64 {
        self.regular_representation(f).iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part of `π_x(f)` over all units,
    /// together with the largest Hermitian defect.
    pub fn positivity_margin(&self, f: &AlgebraElement) -> (f64, f64) {
        let mut min_eig = f64::INFINITY;
        let mut defect = 0.0f64;
        for m in self.regular_representation(f) {
            defect = defect.max(linalg::hermitian_defect(&m));
            min_eig = min_eig.min(linalg::min_eigenvalue(&m));
        }
        (if min_eig.is_finite() { min_eig } else { 0.0 }, defect)
    }

    /// Every `π_x(f)` Hermitian and positive semidefinite, up to
    /// `tol·(1 + ‖f‖)`.
    pub fn is_positive_element(&self, f: &AlgebraElement, tol: f64) -> bool {
        let scale = 1.0 + self.cstar_norm(f);
        let (min_eig, defect) = self.positivity_margin(f);
        defect <= tol * scale && min_eig >= -tol * scale
    }
}
