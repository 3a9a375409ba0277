use gpd_core::bundles::coboundary;
use gpd_core::convolution::Algebra;
use gpd_core::functions::{function_from_cocycle, function_from_section, is_cnt_function, is_pt_function, schoenberg};
use gpd_core::groupoid::{make_standard, GroupTable, HaarSystem, StandardKind};
use gpd_core::linalg::c;
use gpd_core::random::{random_bundle, random_element, random_groupoid, random_haar, random_unit_section};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // pointwise product of a positive-type function with a positive element stays positive
    #[test]
    fn schur_product_preserves_positivity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _) = random_groupoid(&mut rng, 24);
        let haar = random_haar(&g, &mut rng);
        let b = random_bundle(&g, &mut rng, 3, false);
        let phi = function_from_section(&g, &b, &random_unit_section(&b, &mut rng, false));
        prop_assert!(is_pt_function(&g, &phi, 1e-9));
        let alg = Algebra::new(&g, &haar);
        let f = random_element(&g, &mut rng);
        let positive = alg.convolve(&alg.involution(&f), &f);
        let product = positive.pointwise(phi.values());
        let scale = 1.0 + positive.max_abs() * (1.0 + phi.max_abs());
        prop_assert!(alg.positivity_margin(&product).0 >= -1e-9 * scale);
    }

    #[test]
    fn sums_and_scalings_of_cnt_functions(seed in any::<u64>(), s in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, _) = random_groupoid(&mut rng, 24);
        let psi = |rng: &mut ChaCha8Rng| {
            let b = random_bundle(&g, rng, 3, true);
            function_from_cocycle(&coboundary(&g, &b, &random_unit_section(&b, rng, true)))
        };
        let (a, b) = (psi(&mut rng), psi(&mut rng));
        let sum = gpd_core::functions::GroupoidFunction::new(
            &g,
            a.values().iter().zip(b.values()).map(|(x, y)| x * c(s) + y).collect(),
        ).unwrap();
        prop_assert!(is_cnt_function(&g, &sum, 1e-9));
        prop_assert!(is_pt_function(&g, &schoenberg(&g, &sum, 0.7).unwrap(), 1e-9));
    }
}

#[test]
fn counting_measure_unit_is_sum_of_deltas() {
    let (g, _) = make_standard(&StandardKind::Pair(3)).unwrap();
    let haar = HaarSystem::counting(&g);
    let alg = Algebra::new(&g, &haar);
    let unit = alg.unit();
    for a in 0..g.n_arrows() {
        let expected = if g.is_unit_arrow(a) { 1.0 } else { 0.0 };
        assert_eq!(unit.get(a), c(expected));
    }
    // the pair groupoid algebra is the 3x3 matrices; δ_(i,j) has norm one
    for a in 0..g.n_arrows() {
        assert!((alg.cstar_norm(&alg.delta(a)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn group_algebra_norm_is_largest_character_value() {
    let (g, _) = make_standard(&StandardKind::Group(GroupTable::cyclic(4))).unwrap();
    let haar = HaarSystem::counting(&g);
    let alg = Algebra::new(&g, &haar);
    let f = gpd_core::convolution::AlgebraElement::from_real(&[1.0, 2.0, 0.0, -1.0]);
    // characters of Z/4 evaluated at f
    let expected = (0..4)
        .map(|k| {
            (0..4)
                .map(|j| num_complex::Complex64::from_polar(f.get(j).re, std::f64::consts::FRAC_PI_2 * (j * k) as f64))
                .sum::<num_complex::Complex64>()
                .norm()
        })
        .fold(0.0, f64::max);
    assert!((alg.cstar_norm(&f) - expected).abs() < 1e-12);
}
