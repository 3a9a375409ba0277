//! Seeded random instances: groupoids, Haar systems, bundles, sections,
//! algebra elements.
//!
//! Every function takes the generator explicitly; callers seed a
//! `ChaCha8Rng` so runs are reproducible from a single `u64`.
//!
//! Random bundles are assembled per orbit from three kinds of blocks, then
//! conjugated by an independent random unitary on every fiber:
//! a trivial block `C^k`, the sign line `γ ↦ sgn(P_γ)`, and the left
//! regular block `P_γ` permuting `G^{src γ} → G^{dst γ}` by `β ↦ γβ`.
//! All three are functors on any finite groupoid, so no group structure
//! has to be known.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::bundles::{GHilbertBundle, Section, UnitSection};
use crate::convolution::AlgebraElement;
use crate::groupoid::{make_standard, FiniteGroupoid, GroupAction, GroupTable, HaarSystem, StandardKind};
use crate::linalg::{self, c, CMat, CVec};

pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R, real: bool) -> Complex64 {
    let re = rng.gen_range(-1.0..1.0);
    if real {
        c(re)
    } else {
        Complex64::new(re, rng.gen_range(-1.0..1.0))
    }
}

pub fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R, real: bool) -> CVec {
    CVec::from_fn(d, |_, _| random_scalar(rng, real))
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R, real: bool) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_scalar(rng, real))
}

/// Unitary (orthogonal when `real`) factor of a random square matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R, real: bool) -> CMat {
    let mut m = random_matrix(d, d, rng, real);
    // keep away from singular draws
    for i in 0..d {
        m[(i, i)] += c(2.0);
    }
    linalg::polar_unitary(&m)
}

/// Z/n acting on `points` points through a random permutation whose cycle
/// lengths divide `n`.
pub fn random_cyclic_action<R: Rng + ?Sized>(rng: &mut R, n: usize, points: usize) -> GroupAction {
    let mut order: Vec<usize> = (0..points).collect();
    order.shuffle(rng);
    let mut sigma: Vec<usize> = (0..points).collect();
    let mut start = 0;
    while start < points {
        let divisors: Vec<usize> = (1..=n).filter(|k| n.is_multiple_of(*k) && *k <= points - start).collect();
        let len = *divisors.choose(rng).expect("1 always divides");
        for i in 0..len {
            sigma[order[start + i]] = order[start + (i + 1) % len];
        }
        start += len;
    }
    let mut action = vec![(0..points).collect::<Vec<_>>()];
    for k in 1..n {
        let prev: &Vec<usize> = &action[k - 1];
        action.push(prev.iter().map(|&x| sigma[x]).collect());
    }
    GroupAction::new(GroupTable::cyclic(n), action).expect("powers of a permutation with σ^n = id")
}

/// A random standard groupoid with at most `max_arrows` arrows.
pub fn random_kind<R: Rng + ?Sized>(rng: &mut R, max_arrows: usize) -> StandardKind {
    let max_arrows = max_arrows.max(1);
    loop {
        let kind = match rng.gen_range(0..6) {
            0 => StandardKind::Pair(rng.gen_range(1..=5)),
            1 => StandardKind::Group(GroupTable::cyclic(rng.gen_range(1..=6))),
            2 => StandardKind::Group(if rng.gen_bool(0.5) { GroupTable::klein() } else { GroupTable::symmetric3() }),
            3 => {
                let n = rng.gen_range(2..=4);
                let points = rng.gen_range(1..=5);
                StandardKind::Transformation(random_cyclic_action(rng, n, points))
            }
            4 => {
                let s3 = GroupTable::symmetric3();
                let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                let action = perms.iter().map(|p| p.to_vec()).collect();
                StandardKind::Transformation(GroupAction::new(s3, action).expect("natural S3 action"))
            }
            _ if max_arrows >= 2 => {
                let left = random_kind(rng, max_arrows / 2);
                let right = random_kind(rng, max_arrows - arrow_count(&left));
                StandardKind::DisjointUnion(Box::new(left), Box::new(right))
            }
            _ => StandardKind::Pair(1),
        };
        if arrow_count(&kind) <= max_arrows {
            return kind;
        }
    }
}

pub fn arrow_count(kind: &StandardKind) -> usize {
    match kind {
        StandardKind::Pair(n) => n * n,
        StandardKind::Group(t) => t.order(),
        StandardKind::Transformation(a) => a.points() * a.group.order(),
        StandardKind::DisjointUnion(l, r) => arrow_count(l) + arrow_count(r),
    }
}

pub fn random_groupoid<R: Rng + ?Sized>(rng: &mut R, max_arrows: usize) -> (FiniteGroupoid, StandardKind) {
    let kind = random_kind(rng, max_arrows);
    let (g, _) = make_standard(&kind).expect("standard constructors are valid");
    (g, kind)
}

/// Left-invariant Haar system with a random density in `[0.5, 2]` per unit.
pub fn random_haar<R: Rng + ?Sized>(g: &FiniteGroupoid, rng: &mut R) -> HaarSystem {
    let density: Vec<f64> = (0..g.n_units()).map(|_| rng.gen_range(0.5..2.0)).collect();
    HaarSystem::from_unit_density(g, &density)
}

/// Permutation matrix of `β ↦ γβ` from `G^{src γ}` to `G^{dst γ}`, in the
/// order the range fibers are stored.
pub fn translation_matrix(g: &FiniteGroupoid, arrow: usize) -> CMat {
    let (from, to) = (g.range_fiber(g.src(arrow)), g.range_fiber(g.dst(arrow)));
    let mut m = CMat::zeros(to.len(), from.len());
    for (j, &beta) in from.iter().enumerate() {
        let i = to.iter().position(|&t| t == g.mul(arrow, beta)).expect("γβ lies in G^{dst γ}");
        m[(i, j)] = c(1.0);
    }
    m
}

fn permutation_sign(m: &CMat) -> f64 {
    let n = m.nrows();
    let image: Vec<usize> = (0..n).map(|j| (0..n).find(|&i| m[(i, j)].re == 1.0).expect("permutation")).collect();
    let mut seen = vec![false; n];
    let mut sign = 1.0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = image[k];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

#[derive(Debug, Clone, Copy)]
struct OrbitBlocks {
    trivial: usize,
    sign: bool,
    regular: bool,
}

/// Random unitary G-Hilbert bundle with every fiber of dimension between 1
/// and `max_dim`. With `real`, all matrices are real orthogonal.
pub fn random_bundle<R: Rng + ?Sized>(g: &FiniteGroupoid, rng: &mut R, max_dim: usize, real: bool) -> GHilbertBundle {
    let max_dim = max_dim.max(1);
    let orbits = g.orbits();
    let mut orbit_of = vec![0; g.n_units()];
    let mut blocks = Vec::with_capacity(orbits.len());
    for (k, orbit) in orbits.iter().enumerate() {
        for &x in orbit {
            orbit_of[x] = k;
        }
        let fiber = g.range_fiber(orbit[0]).len();
        let mut budget = rng.gen_range(1..=max_dim);
        let regular = fiber <= budget && fiber > 1 && rng.gen_bool(0.5);
        if regular {
            budget -= fiber;
        }
        let sign = budget > 0 && rng.gen_bool(0.5);
        if sign {
            budget -= 1;
        }
        let mut trivial = rng.gen_range(0..=budget);
        if trivial == 0 && !sign && !regular {
            trivial = 1;
        }
        blocks.push(OrbitBlocks { trivial, sign, regular });
    }
    let dims: Vec<usize> = (0..g.n_units())
        .map(|x| {
            let b = blocks[orbit_of[x]];
            b.trivial + b.sign as usize + if b.regular { g.range_fiber(x).len() } else { 0 }
        })
        .collect();
    let gauges: Vec<CMat> = dims.iter().map(|&d| random_unitary(d, rng, real)).collect();
    let maps = (0..g.n_arrows())
        .map(|a| {
            let b = blocks[orbit_of[g.dst(a)]];
            let d = dims[g.dst(a)];
            let mut m = CMat::zeros(d, d);
            let mut at = 0;
            for i in 0..b.trivial {
                m[(at + i, at + i)] = c(1.0);
            }
            at += b.trivial;
            let perm = translation_matrix(g, a);
            if b.sign {
                m[(at, at)] = c(permutation_sign(&perm));
                at += 1;
            }
            if b.regular {
                m.view_mut((at, at), perm.shape()).copy_from(&perm);
            }
            &gauges[g.dst(a)] * m * gauges[g.src(a)].adjoint()
        })
        .collect();
    GHilbertBundle::new(g, dims, maps).expect("shapes follow the fiber dimensions")
}

pub fn random_unit_section<R: Rng + ?Sized>(b: &GHilbertBundle, rng: &mut R, real: bool) -> UnitSection {
    UnitSection { values: b.dims().iter().map(|&d| random_vector(d, rng, real)).collect() }
}

pub fn random_section<R: Rng + ?Sized>(g: &FiniteGroupoid, b: &GHilbertBundle, rng: &mut R) -> Section {
    Section { values: (0..g.n_arrows()).map(|a| random_vector(b.dim(g.dst(a)), rng, false)).collect() }
}

pub fn random_element<R: Rng + ?Sized>(g: &FiniteGroupoid, rng: &mut R) -> AlgebraElement {
    AlgebraElement::new((0..g.n_arrows()).map(|_| random_scalar(rng, false)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::validate_bundle;
    use crate::groupoid::check_haar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_groupoids_bundles_and_haar_are_valid() {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, kind) = random_groupoid(&mut rng, 30);
            assert!(g.n_arrows() <= 30 && g.n_arrows() == arrow_count(&kind));
            assert!(g.validate().is_empty(), "seed {seed}");
            assert!(check_haar(&g, &random_haar(&g, &mut rng)).is_empty());
            let real = seed % 2 == 0;
            let b = random_bundle(&g, &mut rng, 3, real);
            assert!(b.dims().iter().all(|&d| (1..=3).contains(&d)));
            assert!(validate_bundle(&g, &b, 1e-10).unwrap().is_empty(), "seed {seed}");
            if real {
                assert!(b.maps().iter().all(|m| m.iter().all(|z| z.im == 0.0)));
            }
        }
    }

    #[test]
    fn sign_line_is_nontrivial_somewhere() {
        // Z/2 acting on itself: the translation by 1 is a transposition
        let g = make_standard(&StandardKind::Group(GroupTable::cyclic(2))).unwrap().0;
        assert_eq!(permutation_sign(&translation_matrix(&g, 1)), -1.0);
    }

    #[test]
    fn cyclic_actions_are_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let points = rng.gen_range(1..7);
            let a = random_cyclic_action(&mut rng, n, points);
            assert_eq!(a.points(), points);
        }
    }
}
