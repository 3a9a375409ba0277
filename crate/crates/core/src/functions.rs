//! Positive-type and conditionally-negative-type functions on a finite
//! groupoid, their GNS bundles, and the exponential map between them.
//!
//! A function `φ` on arrows defines one kernel per unit `x`, on the range
//! fiber `G^x`: `φ_x(γ, γ') = φ(γ⁻¹γ')`. Rows and columns follow the order
//! of [`FiniteGroupoid::range_fiber`].

use num_complex::Complex64;
use thiserror::Error;

use crate::bundles::{cocycle_residuals, BundleError, Cocycle, GHilbertBundle, Section, UnitSection};
use crate::convolution::AlgebraElement;
use crate::groupoid::FiniteGroupoid;
use crate::kernels::{self, Kernel, KernelError};
use crate::linalg::{self, c, CMat, CVec, RMat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionError {
    #[error("function has {actual} values, groupoid has {expected} arrows")]
    Length { expected: usize, actual: usize },
    #[error("value at arrow {arrow} is not real (imaginary part {imag})")]
    NotReal { arrow: String, imag: f64 },
    #[error("not of positive type: kernel at unit {unit} has minimum eigenvalue {min_eigenvalue}")]
    NotPositiveType { unit: String, min_eigenvalue: f64 },
    #[error("not conditionally of negative type: {0}")]
    NotConditionallyNegative(CntWitness),
    #[error("{what} residual {residual:e} exceeds {tol:e} at arrow {arrow}")]
    Residual { what: &'static str, arrow: String, residual: f64, tol: f64 },
    #[error("fiber dimensions differ inside an orbit: {unit_a} has {dim_a}, {unit_b} has {dim_b}")]
    OrbitRank { unit_a: String, dim_a: usize, unit_b: String, dim_b: usize },
    #[error("time must be a finite non-negative number, got {0}")]
    BadTime(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// A complex function on arrows.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidFunction {
    values: Vec<Complex64>,
}

impl GroupoidFunction {
    pub fn new(g: &FiniteGroupoid, values: Vec<Complex64>) -> Result<Self, FunctionError> {
        if values.len() != g.n_arrows() {
            return Err(FunctionError::Length { expected: g.n_arrows(), actual: values.len() });
        }
        Ok(Self { values })
    }

    pub fn from_real(g: &FiniteGroupoid, values: &[f64]) -> Result<Self, FunctionError> {
        Self::new(g, values.iter().map(|&v| c(v)).collect())
    }

    pub fn from_fn(g: &FiniteGroupoid, f: impl Fn(usize) -> f64) -> Self {
        Self { values: (0..g.n_arrows()).map(|a| c(f(a))).collect() }
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

    pub fn scale(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Real parts, failing on the first imaginary part above `tol`.
    pub fn real_values(&self, g: &FiniteGroupoid, tol: f64) -> Result<Vec<f64>, FunctionError> {
        self.values
            .iter()
            .enumerate()
            .map(|(a, z)| {
                if z.im.abs() > tol {
                    Err(FunctionError::NotReal { arrow: g.arrow_id(a).to_string(), imag: z.im })
                } else {
                    Ok(z.re)
                }
            })
            .collect()
    }

    pub fn to_element(&self) -> AlgebraElement {
        AlgebraElement::new(self.values.clone())
    }
}

/// `φ_x` as a kernel on `G^x`.
pub fn unit_kernel(g: &FiniteGroupoid, phi: &GroupoidFunction, x: usize) -> Kernel {
    let fiber = g.range_fiber(x);
    let m = CMat::from_fn(fiber.len(), fiber.len(), |i, j| phi.values[g.mul(g.inverse(fiber[i]), fiber[j])]);
    Kernel::new(m).expect("square by construction")
}

fn unit_real_kernel(g: &FiniteGroupoid, psi: &[f64], x: usize) -> RMat {
    let fiber = g.range_fiber(x);
    RMat::from_fn(fiber.len(), fiber.len(), |i, j| psi[g.mul(g.inverse(fiber[i]), fiber[j])])
}

/// Worst per-unit spectral data of `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtMargin {
    pub unit: usize,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
    pub scale: f64,
}

/// The unit whose kernel has the smallest eigenvalue, with that eigenvalue
/// and the largest Hermitian defect over all units.
pub fn pt_margin(g: &FiniteGroupoid, phi: &GroupoidFunction) -> PtMargin {
    let mut out = PtMargin { unit: 0, min_eigenvalue: f64::INFINITY, hermitian_defect: 0.0, scale: 1.0 };
    for x in 0..g.n_units() {
        let d = kernels::pt_diagnostics(&unit_kernel(g, phi, x));
        out.hermitian_defect = out.hermitian_defect.max(d.hermitian_defect);
        out.scale = out.scale.max(d.scale);
        if d.min_eigenvalue < out.min_eigenvalue {
            out.unit = x;
            out.min_eigenvalue = d.min_eigenvalue;
        }
    }
    out
}

pub fn is_pt_function(g: &FiniteGroupoid, phi: &GroupoidFunction, tol: f64) -> bool {
    (0..g.n_units()).all(|x| kernels::is_pt_kernel(&unit_kernel(g, phi, x), tol))
}

/// Why a function fails to be CNT.
#[derive(Debug, Clone, PartialEq)]
pub enum CntWitness {
    NotReal { arrow: String, imag: f64 },
    NonzeroOnUnit { arrow: String, value: f64 },
    NotSymmetric { arrow: String, value: f64, inverse_value: f64 },
    /// Sum-zero coefficients `ζ` on `G^unit` with `Σ ζ_i ζ_j ψ(γ_i⁻¹γ_j) > 0`.
    Positive { unit: String, zeta: Vec<f64>, value: f64 },
}

impl std::fmt::Display for CntWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CntWitness::NotReal { arrow, imag } => write!(f, "imaginary part {imag} at {arrow}"),
            CntWitness::NonzeroOnUnit { arrow, value } => write!(f, "value {value} on unit arrow {arrow}"),
            CntWitness::NotSymmetric { arrow, value, inverse_value } => {
                write!(f, "value {value} at {arrow} but {inverse_value} at its inverse")
            }
            CntWitness::Positive { unit, zeta, value } => {
                write!(f, "sum-zero coefficients {zeta:?} on the fiber over {unit} give {value}")
            }
        }
    }
}

/// First CNT violation found, or `None`.
pub fn cnt_witness(g: &FiniteGroupoid, psi: &GroupoidFunction, tol: f64) -> Option<CntWitness> {
    let id = |a: usize| g.arrow_id(a).to_string();
    for (a, z) in psi.values.iter().enumerate() {
        if z.im.abs() > tol {
            return Some(CntWitness::NotReal { arrow: id(a), imag: z.im });
        }
    }
    let re: Vec<f64> = psi.values.iter().map(|z| z.re).collect();
    for x in 0..g.n_units() {
        let u = g.unit_arrow(x);
        if re[u].abs() > tol {
            return Some(CntWitness::NonzeroOnUnit { arrow: id(u), value: re[u] });
        }
    }
    for a in 0..g.n_arrows() {
        let inv = g.inverse(a);
        if (re[a] - re[inv]).abs() > tol {
            return Some(CntWitness::NotSymmetric { arrow: id(a), value: re[a], inverse_value: re[inv] });
        }
    }
    for x in 0..g.n_units() {
        let psi_x = unit_real_kernel(g, &re, x);
        let n = psi_x.nrows();
        let p = RMat::identity(n, n) - RMat::from_element(n, n, 1.0 / n as f64);
        let conditioned = linalg::complexify(&(&p * &psi_x * &p));
        let (values, vectors) = linalg::hermitian_eigen(&conditioned);
        if values[0] > tol {
            let zeta = vectors.column(0).iter().map(|z| z.re).collect();
            return Some(CntWitness::Positive { unit: g.unit_id(x).to_string(), zeta, value: values[0] });
        }
    }
    None
}

pub fn is_cnt_function(g: &FiniteGroupoid, psi: &GroupoidFunction, tol: f64) -> bool {
    cnt_witness(g, psi, tol).is_none()
}

/// `φ(γ) = (e(rγ) | L(γ) e(sγ))`.
pub fn function_from_section(g: &FiniteGroupoid, b: &GHilbertBundle, e: &UnitSection) -> GroupoidFunction {
    GroupoidFunction {
        values: (0..g.n_arrows())
            .map(|a| linalg::inner(&e.values[g.dst(a)], &(b.action(a) * &e.values[g.src(a)])))
            .collect(),
    }
}

/// `ψ(γ) = ‖c(γ)‖²`.
pub fn function_from_cocycle(c_: &Cocycle) -> GroupoidFunction {
    GroupoidFunction { values: c_.values.iter().map(|v| c(v.norm_squared())).collect() }
}

fn check_orbit_dims(g: &FiniteGroupoid, dims: &[usize]) -> Result<(), FunctionError> {
    for orbit in g.orbits() {
        let first = orbit[0];
        if let Some(&other) = orbit.iter().find(|&&y| dims[y] != dims[first]) {
            return Err(FunctionError::OrbitRank {
                unit_a: g.unit_id(first).to_string(),
                dim_a: dims[first],
                unit_b: g.unit_id(other).to_string(),
                dim_b: dims[other],
            });
        }
    }
    Ok(())
}

/// Solve `L·from = to` in least squares and project onto the unitaries.
/// Returns the projected map and the residual before projection.
fn fit_unitary(from: &CMat, to: &CMat) -> (CMat, f64) {
    let l = linalg::solve_right(from, to);
    let residual = linalg::max_abs_diff(&(&l * from), to);
    let l = if l.is_square() { linalg::polar_unitary(&l) } else { l };
    (l, residual)
}

/// GNS data of a positive-type function.
#[derive(Debug, Clone)]
pub struct PtGns {
    pub bundle: GHilbertBundle,
    pub section: UnitSection,
    /// Largest least-squares residual of the `L(γ)` fits before polar
    /// correction.
    pub fit_residual: f64,
    /// `max |φ(γ) - (e(rγ) | L(γ)e(sγ))|`.
    pub reconstruction: f64,
}

impl PtGns {
    /// `[L(γ)e(sγ) : γ ∈ G^x]` for every unit, a spanning family of `E_x`.
    pub fn spanning_families(&self, g: &FiniteGroupoid) -> Vec<Vec<CVec>> {
        (0..g.n_units())
            .map(|x| g.range_fiber(x).iter().map(|&a| self.bundle.action(a) * &self.section.values[g.src(a)]).collect())
            .collect()
    }
}

pub fn gns_pt_function(g: &FiniteGroupoid, phi: &GroupoidFunction, tol: f64) -> Result<PtGns, FunctionError> {
    if phi.len() != g.n_arrows() {
        return Err(FunctionError::Length { expected: g.n_arrows(), actual: phi.len() });
    }
    let margin = pt_margin(g, phi);
    if margin.hermitian_defect > tol || margin.min_eigenvalue < -tol * margin.scale {
        return Err(FunctionError::NotPositiveType {
            unit: g.unit_id(margin.unit).to_string(),
            min_eigenvalue: margin.min_eigenvalue,
        });
    }
    let factors: Vec<CMat> = (0..g.n_units()).map(|x| linalg::psd_factor(unit_kernel(g, phi, x).values(), tol)).collect();
    let dims: Vec<usize> = factors.iter().map(|f| f.nrows()).collect();
    check_orbit_dims(g, &dims)?;

    let position = |x: usize, a: usize| g.range_fiber(x).iter().position(|&b| b == a).expect("arrow lies in its range fiber");
    let bound = tol * margin.scale;
    let mut fit_residual = 0.0f64;
    let mut maps = Vec::with_capacity(g.n_arrows());
    for a in 0..g.n_arrows() {
        let (x, y) = (g.src(a), g.dst(a));
        let target = CMat::from_fn(dims[y], g.range_fiber(x).len(), |r, j| {
            factors[y][(r, position(y, g.mul(a, g.range_fiber(x)[j])))]
        });
        let (l, res) = fit_unitary(&factors[x], &target);
        if res > bound {
            return Err(FunctionError::Residual { what: "unitary fit", arrow: g.arrow_id(a).to_string(), residual: res, tol: bound });
        }
        fit_residual = fit_residual.max(res);
        maps.push(l);
    }
    let bundle = GHilbertBundle::new(g, dims, maps)?;
    let section = UnitSection {
        values: (0..g.n_units()).map(|x| factors[x].column(position(x, g.unit_arrow(x))).into_owned()).collect(),
    };
    let reconstruction = function_from_section(g, &bundle, &section).max_abs_diff(phi);
    Ok(PtGns { bundle, section, fit_residual, reconstruction })
}

/// Where the per-unit affine embedding is anchored before shifting the unit
/// arrow to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basepoint {
    #[default]
    UnitArrow,
    FirstArrow,
}

/// GNS data of a CNT function.
#[derive(Debug, Clone)]
pub struct CntGns {
    pub bundle: GHilbertBundle,
    pub cocycle: Cocycle,
    pub fit_residual: f64,
    /// `max |ψ(γ) - ‖c(γ)‖²|`.
    pub reconstruction: f64,
    /// Largest cocycle-identity residual.
    pub cocycle_residual: f64,
    /// `{c(γ) : γ ∈ G^x}` spans `E_x` for every unit.
    pub total: bool,
}

impl CntGns {
    pub fn spanning_families(&self, g: &FiniteGroupoid) -> Vec<Vec<CVec>> {
        (0..g.n_units()).map(|x| g.range_fiber(x).iter().map(|&a| self.cocycle.values[a].clone()).collect()).collect()
    }
}

pub fn gns_cnt_function(g: &FiniteGroupoid, psi: &GroupoidFunction, tol: f64) -> Result<CntGns, FunctionError> {
    gns_cnt_function_with(g, psi, Basepoint::UnitArrow, tol)
}

pub fn gns_cnt_function_with(g: &FiniteGroupoid, psi: &GroupoidFunction, basepoint: Basepoint, tol: f64) -> Result<CntGns, FunctionError> {
    if psi.len() != g.n_arrows() {
        return Err(FunctionError::Length { expected: g.n_arrows(), actual: psi.len() });
    }
    if let Some(w) = cnt_witness(g, psi, tol) {
        return Err(FunctionError::NotConditionallyNegative(w));
    }
    let re = psi.real_values(g, tol)?;
    let scale = 1.0 + re.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let position = |x: usize, a: usize| g.range_fiber(x).iter().position(|&b| b == a).expect("arrow lies in its range fiber");
    let mut embeddings: Vec<CMat> = Vec::with_capacity(g.n_units());
    for x in 0..g.n_units() {
        let k = Kernel::from_real(&unit_real_kernel(g, &re, x))?;
        let unit_at = position(x, g.unit_arrow(x));
        let anchor = match basepoint {
            Basepoint::UnitArrow => unit_at,
            Basepoint::FirstArrow => 0,
        };
        let v = kernels::gns_cnt_kernel(&k, anchor, tol)?.vectors;
        let origin = v.column(unit_at).into_owned();
        let mut shifted = RMat::from_fn(v.nrows(), v.ncols(), |r, j| v[(r, j)] - origin[r]);
        // orient each row so its largest increment from the first fiber
        // arrow is positive; increments do not depend on the anchor
        for r in 0..shifted.nrows() {
            let row = shifted.row(r);
            let steep = (0..row.len()).map(|j| row[j] - row[0]).fold(0.0f64, |m, d| if d.abs() > m.abs() { d } else { m });
            if steep < 0.0 {
                shifted.row_mut(r).neg_mut();
            }
        }
        embeddings.push(linalg::complexify(&shifted));
    }
    let dims: Vec<usize> = embeddings.iter().map(|v| v.nrows()).collect();
    check_orbit_dims(g, &dims)?;

    let cocycle = Section { values: (0..g.n_arrows()).map(|a| embeddings[g.dst(a)].column(position(g.dst(a), a)).into_owned()).collect() };

    let bound = tol * scale;
    let mut fit_residual = 0.0f64;
    let mut maps = Vec::with_capacity(g.n_arrows());
    for a in 0..g.n_arrows() {
        let (x, y) = (g.src(a), g.dst(a));
        let target = CMat::from_fn(dims[y], g.range_fiber(x).len(), |r, j| {
            embeddings[y][(r, position(y, g.mul(a, g.range_fiber(x)[j])))] - cocycle.values[a][r]
        });
        let (l, res) = fit_unitary(&embeddings[x], &target);
        if res > bound {
            return Err(FunctionError::Residual { what: "orthogonal fit", arrow: g.arrow_id(a).to_string(), residual: res, tol: bound });
        }
        fit_residual = fit_residual.max(res);
        // real input, real answer; drop rounding noise in the imaginary part
        maps.push(l.map(|z| c(z.re)));
    }
    let bundle = GHilbertBundle::new(g, dims.clone(), maps)?;
    let reconstruction = function_from_cocycle(&cocycle).max_abs_diff(psi);
    let cocycle_residual = cocycle_residuals(g, &bundle, &cocycle).max();
    let total = (0..g.n_units()).all(|x| linalg::rank(&embeddings[x], 1e-9) == dims[x]);
    Ok(CntGns { bundle, cocycle, fit_residual, reconstruction, cocycle_residual, total })
}

/// Per-unit isometries between two GNS constructions.
#[derive(Debug, Clone)]
pub struct EquivariantIsometry {
    pub maps: Vec<CMat>,
    /// `max |u_x v - v'|` over the spanning families.
    pub fit_residual: f64,
    /// `max |u_{rγ} L(γ) - L'(γ) u_{sγ}|`.
    pub equivariance_residual: f64,
    /// `max |u_xᴴ u_x - 1|`.
    pub isometry_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UniquenessFailure {
    #[error("inner products differ over {unit} at ({left_arrow}, {right_arrow}): {left} vs {right}")]
    InnerProduct { unit: String, left_arrow: String, right_arrow: String, left: Complex64, right: Complex64 },
    #[error("spanning families over {unit} have different lengths")]
    Shape { unit: String },
}

/// Match two bundles carrying spanning families indexed by `G^x`: checks the
/// Gram matrices agree, then solves `u_x` per unit and measures
/// equivariance.
pub fn equivariant_isometry(
    g: &FiniteGroupoid,
    (b1, fam1): (&GHilbertBundle, &[Vec<CVec>]),
    (b2, fam2): (&GHilbertBundle, &[Vec<CVec>]),
    tol: f64,
) -> Result<EquivariantIsometry, UniquenessFailure> {
    let mut maps = Vec::with_capacity(g.n_units());
    let mut fit_residual = 0.0f64;
    let mut isometry_defect = 0.0f64;
    for x in 0..g.n_units() {
        let fiber = g.range_fiber(x);
        if fam1[x].len() != fiber.len() || fam2[x].len() != fiber.len() {
            return Err(UniquenessFailure::Shape { unit: g.unit_id(x).to_string() });
        }
        let v1 = linalg::columns(b1.dim(x), &fam1[x].iter().collect::<Vec<_>>());
        let v2 = linalg::columns(b2.dim(x), &fam2[x].iter().collect::<Vec<_>>());
        let (g1, g2) = (v1.adjoint() * &v1, v2.adjoint() * &v2);
        let bound = tol * (1.0 + linalg::max_abs(&g1).max(linalg::max_abs(&g2)));
        for i in 0..fiber.len() {
            for j in 0..fiber.len() {
                if (g1[(i, j)] - g2[(i, j)]).norm() > bound {
                    return Err(UniquenessFailure::InnerProduct {
                        unit: g.unit_id(x).to_string(),
                        left_arrow: g.arrow_id(fiber[i]).to_string(),
                        right_arrow: g.arrow_id(fiber[j]).to_string(),
                        left: g1[(i, j)],
                        right: g2[(i, j)],
                    });
                }
            }
        }
        let (u, _) = fit_unitary(&v1, &v2);
        fit_residual = fit_residual.max(linalg::max_abs_diff(&(&u * &v1), &v2));
        isometry_defect = isometry_defect.max(linalg::isometry_defect(&u));
        maps.push(u);
    }
    let equivariance_residual = (0..g.n_arrows())
        .map(|a| linalg::max_abs_diff(&(&maps[g.dst(a)] * b1.action(a)), &(b2.action(a) * &maps[g.src(a)])))
        .fold(0.0, f64::max);
    Ok(EquivariantIsometry { maps, fit_residual, equivariance_residual, isometry_defect })
}

pub fn cnt_uniqueness_check(g: &FiniteGroupoid, a: &CntGns, b: &CntGns, tol: f64) -> Result<EquivariantIsometry, UniquenessFailure> {
    equivariant_isometry(g, (&a.bundle, &a.spanning_families(g)), (&b.bundle, &b.spanning_families(g)), tol)
}

pub fn pt_uniqueness_check(g: &FiniteGroupoid, a: &PtGns, b: &PtGns, tol: f64) -> Result<EquivariantIsometry, UniquenessFailure> {
    equivariant_isometry(g, (&a.bundle, &a.spanning_families(g)), (&b.bundle, &b.spanning_families(g)), tol)
}

/// `φ_t = exp(-tψ)` pointwise.
pub fn schoenberg(g: &FiniteGroupoid, psi: &GroupoidFunction, t: f64) -> Result<GroupoidFunction, FunctionError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(FunctionError::BadTime(t));
    }
    let re = psi.real_values(g, 1e-12)?;
    Ok(GroupoidFunction { values: re.iter().map(|v| c((-t * v).exp())).collect() })
}

/// Logarithmic grid of `n ≥ 2` times from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Outcome of the small-time check: if every `exp(-tψ)` on the grid is PT,
/// the difference quotient `(1 - φ_t)/t` at the smallest `t` is tested for
/// the CNT property.
#[derive(Debug, Clone)]
pub struct ConverseOracle {
    pub all_pt: bool,
    /// Smallest grid time at which PT fails.
    pub first_failure: Option<f64>,
    pub t_min: f64,
    pub quotient: GroupoidFunction,
    /// `None` when the quotient is CNT within the tolerance.
    pub witness: Option<CntWitness>,
}

impl ConverseOracle {
    pub fn holds(&self) -> bool {
        !self.all_pt || self.witness.is_none()
    }
}

pub fn schoenberg_converse(
    g: &FiniteGroupoid,
    psi: &GroupoidFunction,
    grid: &[f64],
    pt_tol: f64,
    cnt_tol: f64,
) -> Result<ConverseOracle, FunctionError> {
    let mut first_failure = None;
    for &t in grid {
        if !is_pt_function(g, &schoenberg(g, psi, t)?, pt_tol) {
            first_failure = Some(t);
            break;
        }
    }
    let t_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let phi = schoenberg(g, psi, t_min)?;
    let quotient = GroupoidFunction { values: phi.values.iter().map(|v| (c(1.0) - v) / t_min).collect() };
    let witness = cnt_witness(g, &quotient, cnt_tol);
    Ok(ConverseOracle { all_pt: first_failure.is_none(), first_failure, t_min, quotient, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::{coboundary, validate_cocycle};
    use crate::groupoid::{make_standard, GroupTable, StandardKind};
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn standard(kind: StandardKind) -> FiniteGroupoid {
        make_standard(&kind).unwrap().0
    }

    fn z2() -> FiniteGroupoid {
        standard(StandardKind::Group(GroupTable::cyclic(2)))
    }

    #[test]
    fn pt_examples() {
        let g = standard(StandardKind::Pair(3));
        assert!(is_pt_function(&g, &GroupoidFunction::from_fn(&g, |_| 1.0), 1e-9));
        assert!(is_pt_function(&g, &GroupoidFunction::from_fn(&g, |a| g.is_unit_arrow(a) as u8 as f64), 1e-9));
        let g = z2();
        let phi = GroupoidFunction::from_real(&g, &[1.0, 2.0]).unwrap();
        assert!(!is_pt_function(&g, &phi, 1e-9));
        assert!((pt_margin(&g, &phi).min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cnt_examples() {
        let g = standard(StandardKind::Pair(4));
        assert!(is_cnt_function(&g, &GroupoidFunction::from_fn(&g, |_| 0.0), 1e-9));
        let p: [f64; 4] = [0.3, -1.2, 2.0, 0.7];
        let psi = GroupoidFunction::from_fn(&g, |a| (p[g.dst(a)] - p[g.src(a)]).powi(2));
        assert!(is_cnt_function(&g, &psi, 1e-9));

        let g = z2();
        let psi = GroupoidFunction::from_real(&g, &[0.0, -1.0]).unwrap();
        match cnt_witness(&g, &psi, 1e-9) {
            Some(CntWitness::Positive { zeta, value, .. }) => {
                assert!((zeta[0] + zeta[1]).abs() < 1e-12);
                assert!((value - 1.0).abs() < 1e-12);
            }
            other => panic!("expected a positive witness, got {other:?}"),
        }
        let off_unit = GroupoidFunction::from_real(&g, &[0.5, 1.0]).unwrap();
        assert!(matches!(cnt_witness(&g, &off_unit, 1e-9), Some(CntWitness::NonzeroOnUnit { .. })));
    }

    #[test]
    fn asymmetric_function_is_not_cnt() {
        let g = standard(StandardKind::Pair(2));
        let psi = GroupoidFunction::from_fn(&g, |a| if g.dst(a) == 0 && g.src(a) == 1 { 1.0 } else if g.is_unit_arrow(a) { 0.0 } else { 2.0 });
        assert!(matches!(cnt_witness(&g, &psi, 1e-9), Some(CntWitness::NotSymmetric { .. })));
    }

    #[test]
    fn gns_of_constant_one() {
        let g = standard(StandardKind::Pair(3));
        let gns = gns_pt_function(&g, &GroupoidFunction::from_fn(&g, |_| 1.0), 1e-9).unwrap();
        assert!(gns.bundle.dims().iter().all(|&d| d == 1));
        for m in gns.bundle.maps() {
            assert!((m[(0, 0)] - c(1.0)).norm() < 1e-12);
        }
        // e is determined up to a phase per unit; the phase is shared by L
        for (x, e) in gns.section.values.iter().enumerate() {
            assert!((e[0].norm() - 1.0).abs() < 1e-12, "unit {x}");
        }
        assert!(gns.reconstruction < 1e-12);
    }

    #[test]
    fn gns_of_unit_indicator_on_z2() {
        let g = z2();
        let gns = gns_pt_function(&g, &GroupoidFunction::from_real(&g, &[1.0, 0.0]).unwrap(), 1e-9).unwrap();
        assert_eq!(gns.bundle.dims(), &[2]);
        let l = gns.bundle.action(1);
        assert!(linalg::isometry_defect(l) < 1e-12);
        // an involution with trace 0: the swap up to a change of basis
        assert!(linalg::max_abs_diff(&(l * l), &CMat::identity(2, 2)) < 1e-12);
        assert!((l.trace()).norm() < 1e-12);
        assert!(gns.reconstruction < 1e-12);
    }

    #[test]
    fn cnt_gns_examples() {
        let g = standard(StandardKind::Pair(3));
        let gns = gns_cnt_function(&g, &GroupoidFunction::from_fn(&g, |_| 0.0), 1e-9).unwrap();
        assert!(gns.bundle.dims().iter().all(|&d| d == 0));

        let g = z2();
        let a = 2.5;
        let gns = gns_cnt_function(&g, &GroupoidFunction::from_real(&g, &[0.0, a]).unwrap(), 1e-9).unwrap();
        assert_eq!(gns.bundle.dims(), &[1]);
        assert!((gns.cocycle.values[1][0].norm() - a.sqrt()).abs() < 1e-12);
        assert!((gns.bundle.action(1)[(0, 0)] + c(1.0)).norm() < 1e-12);

        let g = standard(StandardKind::Pair(4));
        let p: [f64; 4] = [0.3, -1.2, 2.0, 0.7];
        let psi = GroupoidFunction::from_fn(&g, |a| (p[g.dst(a)] - p[g.src(a)]).powi(2));
        let gns = gns_cnt_function(&g, &psi, 1e-9).unwrap();
        assert!(gns.bundle.dims().iter().all(|&d| d == 1));
        for m in gns.bundle.maps() {
            assert!((m[(0, 0)] - c(1.0)).norm() < 1e-12);
        }
        let sign = gns.cocycle.values[g.arrow_index("(0,1)").unwrap()][0].re / (p[0] - p[1]);
        assert!((sign.abs() - 1.0).abs() < 1e-12);
        for a in 0..g.n_arrows() {
            let expected = sign * (p[g.dst(a)] - p[g.src(a)]);
            assert!((gns.cocycle.values[a][0].re - expected).abs() < 1e-12);
        }
        assert!(validate_cocycle(&g, &gns.bundle, &gns.cocycle, 1e-12).unwrap().is_empty());
    }

    #[test]
    fn gns_rejects_non_pt_and_non_cnt() {
        let g = z2();
        assert!(matches!(
            gns_pt_function(&g, &GroupoidFunction::from_real(&g, &[1.0, 2.0]).unwrap(), 1e-9),
            Err(FunctionError::NotPositiveType { .. })
        ));
        assert!(matches!(
            gns_cnt_function(&g, &GroupoidFunction::from_real(&g, &[0.0, -1.0]).unwrap(), 1e-9),
            Err(FunctionError::NotConditionallyNegative(_))
        ));
    }

    #[test]
    fn uniqueness_examples() {
        let g = standard(StandardKind::Pair(3));
        let p: [f64; 3] = [0.0, 1.0, 3.0];
        let psi = GroupoidFunction::from_fn(&g, |a| (p[g.dst(a)] - p[g.src(a)]).powi(2));
        let a = gns_cnt_function(&g, &psi, 1e-9).unwrap();
        let same = cnt_uniqueness_check(&g, &a, &a, 1e-9).unwrap();
        for m in &same.maps {
            assert!(linalg::max_abs_diff(m, &CMat::identity(m.nrows(), m.ncols())) < 1e-12);
        }
        let b = gns_cnt_function_with(&g, &psi, Basepoint::FirstArrow, 1e-9).unwrap();
        let u = cnt_uniqueness_check(&g, &a, &b, 1e-9).unwrap();
        assert!(u.equivariance_residual < 1e-10);
        let doubled = gns_cnt_function(&g, &psi.scale(2.0), 1e-9).unwrap();
        assert!(matches!(cnt_uniqueness_check(&g, &a, &doubled, 1e-9), Err(UniquenessFailure::InnerProduct { .. })));
    }

    #[test]
    fn schoenberg_examples() {
        let g = z2();
        let psi = GroupoidFunction::from_real(&g, &[0.0, 1.5]).unwrap();
        assert_eq!(schoenberg(&g, &psi, 0.0).unwrap().values(), &[c(1.0), c(1.0)]);
        let phi = schoenberg(&g, &psi, 0.7).unwrap();
        let k = unit_kernel(&g, &phi, 0);
        let off = (-0.7f64 * 1.5).exp();
        assert!(linalg::max_abs_diff(k.values(), &CMat::from_row_slice(2, 2, &[c(1.0), c(off), c(off), c(1.0)])) < 1e-15);
        assert!(is_pt_function(&g, &phi, 1e-12));
        assert!(matches!(schoenberg(&g, &psi, -1.0), Err(FunctionError::BadTime(_))));
    }

    #[test]
    fn converse_oracle_on_cnt_and_non_cnt() {
        let g = standard(StandardKind::Pair(3));
        let p: [f64; 3] = [0.0, 1.0, 3.0];
        let grid = log_grid(1e-3, 10.0, 9);
        let psi = GroupoidFunction::from_fn(&g, |a| (p[g.dst(a)] - p[g.src(a)]).powi(2));
        let oracle = schoenberg_converse(&g, &psi, &grid, 1e-9, 1e-4).unwrap();
        assert!(oracle.all_pt && oracle.witness.is_none());
        let bad = psi.scale(-1.0);
        let oracle = schoenberg_converse(&g, &bad, &grid, 1e-9, 1e-4).unwrap();
        assert!(!oracle.all_pt);
        assert!(oracle.holds());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pt_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, _) = random::random_groupoid(&mut rng, 30);
            let b = random::random_bundle(&g, &mut rng, 3, false);
            let e = random::random_unit_section(&b, &mut rng, false);
            let phi = function_from_section(&g, &b, &e);
            prop_assert!(is_pt_function(&g, &phi, 1e-9));
            let gns = gns_pt_function(&g, &phi, 1e-9).unwrap();
            prop_assert!(gns.reconstruction <= 1e-9);
            prop_assert!(crate::bundles::bundle_residuals(&g, &gns.bundle).max() <= 1e-9);
            // the source bundle restricted to the span of its own family is
            // another GNS pair for φ
            let gram_source: Vec<Vec<CVec>> = (0..g.n_units())
                .map(|x| g.range_fiber(x).iter().map(|&a| b.action(a) * &e.values[g.src(a)]).collect())
                .collect();
            for x in 0..g.n_units() {
                let v1 = linalg::columns(b.dim(x), &gram_source[x].iter().collect::<Vec<_>>());
                let fam = gns.spanning_families(&g);
                let v2 = linalg::columns(gns.bundle.dim(x), &fam[x].iter().collect::<Vec<_>>());
                prop_assert!(linalg::max_abs_diff(&(v1.adjoint() * &v1), &(v2.adjoint() * &v2)) <= 1e-9);
            }
        }

        #[test]
        fn cnt_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, _) = random::random_groupoid(&mut rng, 30);
            let b = random::random_bundle(&g, &mut rng, 3, true);
            let xi = random::random_unit_section(&b, &mut rng, true);
            let psi = function_from_cocycle(&coboundary(&g, &b, &xi));
            prop_assert!(is_cnt_function(&g, &psi, 1e-9));
            let gns = gns_cnt_function(&g, &psi, 1e-9).unwrap();
            prop_assert!(gns.reconstruction <= 1e-9);
            prop_assert!(gns.cocycle_residual <= 1e-9);
            prop_assert!(gns.total);
            let other = gns_cnt_function_with(&g, &psi, Basepoint::FirstArrow, 1e-9).unwrap();
            let u = cnt_uniqueness_check(&g, &gns, &other, 1e-9).unwrap();
            prop_assert!(u.equivariance_residual <= 1e-8);
            for t in [0.1, 1.0, 10.0] {
                let phi = schoenberg(&g, &psi, t).unwrap();
                prop_assert!(pt_margin(&g, &phi).min_eigenvalue >= -1e-9);
            }
        }
    }
}
