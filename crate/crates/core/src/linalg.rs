//! Dense complex linear algebra helpers shared by every construction.
//!
//! Everything here works on `nalgebra` dynamic matrices over `Complex64`.
//! Zero-sized matrices are legal throughout (a fiber of dimension zero is a
//! perfectly good Hilbert space), so each routine guards the empty case
//! before handing off to a decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(c)
}

/// Inner product `(u|v) = Σ conj(u_i) v_i`, conjugate-linear in the first slot.
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in residual");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &CVec, b: &CVec) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch in residual");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest deviation from Hermitian symmetry, `max |m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues sorted in
/// descending order with eigenvectors as the matching columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Singular triples `(σ, u, v)` with `σ > floor`, largest first, read off
/// the Hermitian dilation `[[0, m], [mᴴ, 0]]`. nalgebra's SVD loses
/// accuracy on repeated singular values; its Hermitian eigensolver does not.
fn singular_triples(m: &CMat, floor: f64) -> Vec<(f64, CVec, CVec)> {
    let (r, k) = m.shape();
    let mut dilation = CMat::zeros(r + k, r + k);
    dilation.view_mut((0, r), (r, k)).copy_from(m);
    dilation.view_mut((r, 0), (k, r)).copy_from(&m.adjoint());
    let (values, vectors) = hermitian_eigen(&dilation);
    let root2 = c(std::f64::consts::SQRT_2);
    values
        .iter()
        .take(r.min(k))
        .enumerate()
        .filter(|(_, &s)| s > floor)
        .map(|(i, &s)| {
            let col = vectors.column(i);
            (s, col.rows(0, r).into_owned() * root2, col.rows(r, k).into_owned() * root2)
        })
        .collect()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    singular_triples(m, f64::NEG_INFINITY).into_iter().map(|(s, _, _)| s.max(0.0)).collect()
}

pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `rel_tol * σ_max`.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > rel_tol * top).count(),
        _ => 0,
    }
}

/// Factor a positive semidefinite matrix as `k = Eᴴ E` with `E` of shape
/// `r × n`, `r` the rank at relative tolerance `rel_tol`.
///
/// Rows of `E` follow the eigenvalues in descending order. Eigenvalues at
/// or below `rel_tol * max(λ_max, 1)` are dropped, so rounding noise in a
/// kernel that should vanish does not create a direction.
pub fn psd_factor(k: &CMat, rel_tol: f64) -> CMat {
    let n = k.nrows();
    let (values, vectors) = hermitian_eigen(k);
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return CMat::zeros(0, n);
    }
    let kept: Vec<usize> = (0..n).filter(|&i| values[i] > rel_tol * top.max(1.0)).collect();
    CMat::from_fn(kept.len(), n, |r, j| {
        let idx = kept[r];
        vectors[(j, idx)].conj() * values[idx].max(0.0).sqrt()
    })
}

/// Least-squares solution `X` of `X · a = b` through the pseudo-inverse of
/// `a`. Returns `X` with shape `b.nrows() × a.nrows()`.
pub fn solve_right(a: &CMat, b: &CMat) -> CMat {
    if a.nrows() == 0 || b.nrows() == 0 || a.ncols() == 0 {
        return CMat::zeros(b.nrows(), a.nrows());
    }
    let top = op_norm(a);
    let mut pinv = CMat::zeros(a.ncols(), a.nrows());
    for (sigma, u, v) in singular_triples(a, 1e-13 * top) {
        pinv += v * u.adjoint() * c(1.0 / sigma);
    }
    b * pinv
}

/// Unitary factor of the polar decomposition `m = U P`.
pub fn polar_unitary(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 || m.ncols() == 0 {
        return m.clone();
    }
    let top = op_norm(m);
    let triples = singular_triples(m, 1e-13 * top);
    let mut u = CMat::zeros(n, m.ncols());
    for (_, left, right) in &triples {
        u += left * right.adjoint();
    }
    if m.is_square() && triples.len() < n {
        // carry the kernel onto the cokernel to finish a unitary
        let missing = n - triples.len();
        let (_, coker) = hermitian_eigen(&(m * m.adjoint()));
        let (_, ker) = hermitian_eigen(&(m.adjoint() * m));
        for j in n - missing..n {
            u += coker.column(j) * ker.column(j).adjoint();
        }
    }
    u
}

/// `max |mᴴ m - 1|`, zero exactly when `m` is an isometry.
pub fn isometry_defect(m: &CMat) -> f64 {
    let n = m.ncols();
    max_abs_diff(&(m.adjoint() * m), &CMat::identity(n, n))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Matrix whose columns are the given vectors (all of length `rows`).
pub fn columns(rows: usize, vs: &[&CVec]) -> CMat {
    CMat::from_fn(rows, vs.len(), |i, j| vs[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_gram() {
        let v = CMat::from_row_slice(2, 3, &[c(1.0), c(0.0), c(1.0), c(0.0), c(1.0), c(1.0)]);
        let gram = v.adjoint() * &v;
        let e = psd_factor(&gram, 1e-12);
        assert_eq!(e.nrows(), 2);
        assert!(max_abs_diff(&(e.adjoint() * &e), &gram) < 1e-12);
    }

    #[test]
    fn empty_matrices_are_fine() {
        let z = CMat::zeros(0, 0);
        assert_eq!(op_norm(&z), 0.0);
        assert_eq!(min_eigenvalue(&z), 0.0);
        assert_eq!(psd_factor(&z, 1e-9).shape(), (0, 0));
        assert_eq!(solve_right(&CMat::zeros(0, 3), &CMat::zeros(0, 3)).shape(), (0, 0));
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let u = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), I, c(0.0)]);
        let p = polar_unitary(&(u.clone() * c(3.0)));
        assert!(max_abs_diff(&p, &u) < 1e-12);
    }

    #[test]
    fn nearly_repeated_singular_values() {
        // Gram factor of a circulant kernel: two equal singular values
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let k = CMat::from_fn(3, 3, |i, j| {
            let d = (3 + j - i) % 3;
            [c(2.0), w * 0.7, w.conj() * 0.7][d]
        });
        let e = psd_factor(&k, 1e-12);
        let d = e.nrows();
        assert_eq!(d, 3);
        let x = solve_right(&e, &e);
        assert!(max_abs_diff(&x, &CMat::identity(d, d)) < 1e-12);
        let s = singular_values(&e);
        let (vals, _) = hermitian_eigen(&k);
        for (sv, ev) in s.iter().zip(&vals) {
            assert!((sv * sv - ev).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_singular_values_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let n = rng.gen_range(1..6);
            let u = crate::random::random_unitary(n, &mut rng, false);
            let real = rng.gen_bool(0.5);
            let v = crate::random::random_unitary(n, &mut rng, real);
            let diag: Vec<Complex64> = (0..n).map(|_| c([1.0, 1.0, 2.0][rng.gen_range(0..3)])).collect();
            let d = CMat::from_diagonal(&CVec::from_vec(diag));
            let m = &u * d * v.adjoint();
            let x = solve_right(&m, &CMat::identity(n, n));
            assert!(max_abs_diff(&(x * &m), &CMat::identity(n, n)) < 1e-12);
            assert!(max_abs_diff(&polar_unitary(&m), &(&u * v.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn polar_of_singular_is_unitary() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), I, c(2.0), I * 2.0]);
        let u = polar_unitary(&m);
        assert!(isometry_defect(&u) < 1e-12);
        assert!(hermitian_defect(&(u.adjoint() * &m)) < 1e-12);
    }

    #[test]
    fn polar_of_complex_invertible() {
        let m = CMat::from_row_slice(2, 2, &[Complex64::new(1.0, 2.0), c(0.5), Complex64::new(0.0, -1.0), Complex64::new(2.0, 1.0)]);
        let u = polar_unitary(&m);
        assert!(isometry_defect(&u) < 1e-12);
        // m = u p with p Hermitian positive
        let p = u.adjoint() * &m;
        assert!(hermitian_defect(&p) < 1e-12);
        assert!(min_eigenvalue(&p) > 0.0);
    }

    #[test]
    fn kron_vec_matches_matrix_kronecker() {
        let a = CVec::from_vec(vec![c(1.0), I]);
        let b = CVec::from_vec(vec![c(2.0), c(3.0), c(-1.0)]);
        let m = kron(&CMat::from_column_slice(2, 1, a.as_slice()), &CMat::from_column_slice(3, 1, b.as_slice()));
        assert!(vec_max_abs_diff(&kron_vec(&a, &b), &m.column(0).into_owned()) < 1e-15);
    }
}
