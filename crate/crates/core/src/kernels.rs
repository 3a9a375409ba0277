//! Positive-type and conditionally-negative-type kernels on finite sets,
//! their Gram factorizations, and the isometries that make those
//! factorizations unique.

use nalgebra::DVector;
use thiserror::Error;

use crate::linalg::{self, CMat, RMat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel matrix must be square, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("kernel has non-real entry at ({row}, {col}) with imaginary part {imag}")]
    NotReal { row: usize, col: usize, imag: f64 },
    #[error("kernel is not of positive type: minimum eigenvalue {min_eigenvalue}")]
    NotPositiveType { min_eigenvalue: f64 },
    #[error("kernel is not conditionally of negative type: {0}")]
    NotConditionallyNegative(String),
    #[error("basepoint {basepoint} outside a kernel on {points} points")]
    BadBasepoint { basepoint: usize, points: usize },
}

/// A kernel `φ(x,y)` on the points `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    values: CMat,
}

impl Kernel {
    pub fn new(values: CMat) -> Result<Self, KernelError> {
        if values.nrows() != values.ncols() {
            return Err(KernelError::NotSquare { rows: values.nrows(), cols: values.ncols() });
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &RMat) -> Result<Self, KernelError> {
        Self::new(linalg::complexify(values))
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self { values: CMat::from_fn(n, n, |i, j| linalg::c(f(i, j))) }
    }

    pub fn points(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }

    /// Real part, failing if any imaginary part exceeds `tol`.
    pub fn real_values(&self, tol: f64) -> Result<RMat, KernelError> {
        for ((row, col), z) in self.values.iter().enumerate().map(|(k, z)| ((k % self.points(), k / self.points()), z)) {
            if z.im.abs() > tol {
                return Err(KernelError::NotReal { row, col, imag: z.im });
            }
        }
        Ok(self.values.map(|z| z.re))
    }
}

/// Spectral data behind the positive-type test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtDiagnostics {
    pub hermitian_defect: f64,
    pub min_eigenvalue: f64,
    /// `1 + max |entry|`, the scale the eigenvalue tolerance is relative to.
    pub scale: f64,
}

impl PtDiagnostics {
    pub fn passes(&self, tol: f64) -> bool {
        self.hermitian_defect <= tol && self.min_eigenvalue >= -tol * self.scale
    }
}

pub fn pt_diagnostics(k: &Kernel) -> PtDiagnostics {
    PtDiagnostics {
        hermitian_defect: linalg::hermitian_defect(&k.values),
        min_eigenvalue: linalg::min_eigenvalue(&k.values),
        scale: 1.0 + linalg::max_abs(&k.values),
    }
}

/// Hermitian within `tol` and minimum eigenvalue `≥ -tol·(1 + max|entry|)`.
pub fn is_pt_kernel(k: &Kernel, tol: f64) -> bool {
    pt_diagnostics(k).passes(tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CntDiagnostics {
    pub max_diagonal: f64,
    pub symmetry_defect: f64,
    /// Largest eigenvalue of `PψP`, `P` the projector onto sum-zero vectors.
    pub max_eigenvalue: f64,
}

impl CntDiagnostics {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_diagonal <= tol && self.symmetry_defect <= tol && self.max_eigenvalue <= tol
    }
}

pub fn cnt_diagnostics(k: &Kernel, tol: f64) -> Result<CntDiagnostics, KernelError> {
    let psi = k.real_values(tol)?;
    let n = psi.nrows();
    let max_diagonal = (0..n).map(|i| psi[(i, i)].abs()).fold(0.0, f64::max);
    let symmetry_defect = (psi.clone() - psi.transpose()).amax();
    let max_eigenvalue = if n == 0 {
        0.0
    } else {
        let p = RMat::identity(n, n) - RMat::from_element(n, n, 1.0 / n as f64);
        let sym = (psi.clone() + psi.transpose()) * 0.5;
        linalg::max_eigenvalue(&linalg::complexify(&(&p * sym * &p)))
    };
    Ok(CntDiagnostics { max_diagonal, symmetry_defect, max_eigenvalue })
}

/// Zero diagonal, symmetric, and `Σ ψ(x_i,x_j) ζ_i ζ_j ≤ 0` on sum-zero `ζ`,
/// each within `tol`.
pub fn is_cnt_kernel(k: &Kernel, tol: f64) -> Result<bool, KernelError> {
    Ok(cnt_diagnostics(k, tol)?.passes(tol))
}

/// Vectors `e(x)` in `C^d`, stored as the columns of a `d × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vectors: CMat,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn points(&self) -> usize {
        self.vectors.ncols()
    }

    /// `[(e(x)|e(y))]`.
    pub fn gram(&self) -> CMat {
        self.vectors.adjoint() * &self.vectors
    }
}

/// Real affine embedding with `e(basepoint) = 0`, columns of a `d × n`
/// real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineEmbedding {
    pub vectors: RMat,
    pub basepoint: usize,
}

impl AffineEmbedding {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn points(&self) -> usize {
        self.vectors.ncols()
    }

    /// `[‖e(x) - e(y)‖²]`.
    pub fn squared_distances(&self) -> RMat {
        let n = self.points();
        RMat::from_fn(n, n, |i, j| (self.vectors.column(i) - self.vectors.column(j)).norm_squared())
    }
}

/// GNS factorization `φ(x,y) = (e(x)|e(y))` of a positive-type kernel.
///
/// The dimension is the number of eigenvalues above `tol · max(λ_max, 1)`; the
/// rows of the embedding follow the eigenvalues in descending order.
pub fn gns_kernel(k: &Kernel, tol: f64) -> Result<Embedding, KernelError> {
    let diag = pt_diagnostics(k);
    if !diag.passes(tol) {
        return Err(KernelError::NotPositiveType { min_eigenvalue: diag.min_eigenvalue });
    }
    Ok(Embedding { vectors: linalg::psd_factor(&k.values, tol) })
}

/// Basepoint kernel `½[ψ(x,x0) + ψ(x0,y) - ψ(x,y)]` of a real kernel.
pub fn basepoint_kernel(psi: &RMat, basepoint: usize) -> RMat {
    let n = psi.nrows();
    RMat::from_fn(n, n, |x, y| 0.5 * (psi[(x, basepoint)] + psi[(basepoint, y)] - psi[(x, y)]))
}

/// Affine GNS `ψ(x,y) = ‖e(x) - e(y)‖²` of a CNT kernel, with the
/// basepoint sent to the origin.
pub fn gns_cnt_kernel(k: &Kernel, basepoint: usize, tol: f64) -> Result<AffineEmbedding, KernelError> {
    let n = k.points();
    if basepoint >= n {
        return Err(KernelError::BadBasepoint { basepoint, points: n });
    }
    let diag = cnt_diagnostics(k, tol)?;
    if !diag.passes(tol) {
        return Err(KernelError::NotConditionallyNegative(format!(
            "max |diagonal| {}, symmetry defect {}, max conditioned eigenvalue {}",
            diag.max_diagonal, diag.symmetry_defect, diag.max_eigenvalue
        )));
    }
    let psi = k.real_values(tol)?;
    let phi = basepoint_kernel(&psi, basepoint);
    // basepoint kernel is real symmetric, so its eigenvectors may be chosen real
    let mut vectors = real_psd_factor(&phi, tol);
    vectors.column_mut(basepoint).fill(0.0);
    Ok(AffineEmbedding { vectors, basepoint })
}

/// Real factor `φ = EᵀE` of a real positive semidefinite matrix.
pub(crate) fn real_psd_factor(phi: &RMat, tol: f64) -> RMat {
    let n = phi.nrows();
    if n == 0 {
        return RMat::zeros(0, 0);
    }
    let sym = (phi + phi.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    if top <= 0.0 {
        return RMat::zeros(0, n);
    }
    let kept: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > tol * top.max(1.0)).collect();
    RMat::from_fn(kept.len(), n, |r, j| eig.eigenvectors[(j, kept[r])] * eig.eigenvalues[kept[r]].sqrt())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsometryError {
    #[error("embeddings index {left} and {right} points")]
    MismatchedIndexSets { left: usize, right: usize },
    #[error("kernels differ at ({i}, {j}): {left} vs {right}")]
    KernelMismatch { i: usize, j: usize, left: f64, right: f64 },
}

/// Linear isometry `u` with `u·a(x) = b(x)` for all `x`, or the first pair
/// whose inner products differ by more than `tol·(1 + scale)`.
pub fn kernel_isometry(a: &Embedding, b: &Embedding, tol: f64) -> Result<CMat, IsometryError> {
    if a.points() != b.points() {
        return Err(IsometryError::MismatchedIndexSets { left: a.points(), right: b.points() });
    }
    let (ga, gb) = (a.gram(), b.gram());
    let bound = tol * (1.0 + linalg::max_abs(&ga).max(linalg::max_abs(&gb)));
    for i in 0..a.points() {
        for j in 0..a.points() {
            let delta = (ga[(i, j)] - gb[(i, j)]).norm();
            if delta > bound {
                return Err(IsometryError::KernelMismatch { i, j, left: ga[(i, j)].norm(), right: gb[(i, j)].norm() });
            }
        }
    }
    let u = linalg::solve_right(&a.vectors, &b.vectors);
    Ok(if u.is_square() { linalg::polar_unitary(&u) } else { u })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineIsometry {
    pub linear: RMat,
    pub translation: DVector<f64>,
}

impl AffineIsometry {
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.linear * v + &self.translation
    }
}

/// Affine isometry `u` with `u(a(x)) = b(x)`, or the first pair whose
/// squared distances differ by more than `tol·(1 + scale)`.
pub fn affine_isometry(a: &AffineEmbedding, b: &AffineEmbedding, tol: f64) -> Result<AffineIsometry, IsometryError> {
    if a.points() != b.points() {
        return Err(IsometryError::MismatchedIndexSets { left: a.points(), right: b.points() });
    }
    let (da, db) = (a.squared_distances(), b.squared_distances());
    let bound = tol * (1.0 + da.amax().max(db.amax()));
    for i in 0..a.points() {
        for j in 0..a.points() {
            if (da[(i, j)] - db[(i, j)]).abs() > bound {
                return Err(IsometryError::KernelMismatch { i, j, left: da[(i, j)], right: db[(i, j)] });
            }
        }
    }
    let origin = a.basepoint;
    let shift = |m: &RMat| {
        let o = m.column(origin).into_owned();
        RMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] - o[r])
    };
    let (sa, sb) = (shift(&a.vectors), shift(&b.vectors));
    let lin = linalg::solve_right(&linalg::complexify(&sa), &linalg::complexify(&sb));
    let lin = if lin.is_square() { linalg::polar_unitary(&lin) } else { lin };
    let linear = lin.map(|z| z.re);
    let translation = b.vectors.column(origin) - &linear * a.vectors.column(origin);
    Ok(AffineIsometry { linear, translation })
}
