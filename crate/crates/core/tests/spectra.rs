use schottky_core::spectra::{
    artin_takagi_check, count_zeros, euler_product_truncated, hausdorff_dimension, locate_zeros, nearest_zero, LFunction,
};
use schottky_core::{build_funnel_group, Character, Complex64, Discretization, OrbitCatalog, Rect, TransferOperator};

fn operator(lengths: &[f64], degree: usize) -> TransferOperator {
    let g = build_funnel_group(lengths.len(), lengths).unwrap();
    TransferOperator::new(&g, Discretization::new(degree, 0.75).unwrap()).unwrap()
}

#[test]
fn eigenvalue_and_determinant_agree_on_delta() {
    for lengths in [[7.0, 8.0], [8.0, 8.0], [4.0, 4.0]] {
        let est = hausdorff_dimension(&operator(&lengths, 20), 1e-13).unwrap();
        assert!(est.discrepancy() < 1e-10, "{lengths:?}: {est:?}");
        assert!((est.eigenvalue - 1.0).abs() < 1e-10);
        assert!(est.delta > 0.0 && est.delta < 1.0);
    }
}

#[test]
fn reference_dimensions() {
    let a = hausdorff_dimension(&operator(&[7.0, 8.0], 24), 1e-13).unwrap().delta;
    let b = hausdorff_dimension(&operator(&[8.0, 8.0], 24), 1e-13).unwrap().delta;
    assert!((a - 0.15983398339824523).abs() < 1e-11, "{a}");
    assert!((b - 0.14928804090886166).abs() < 1e-11, "{b}");
}

#[test]
fn delta_decreases_with_lengths() {
    let mut prev = 1.0;
    for l in [3.0, 4.0, 5.0, 6.0, 8.0, 10.0] {
        let d = hausdorff_dimension(&operator(&[l, l], 16), 1e-12).unwrap().delta;
        assert!(d < prev, "ℓ = {l}: {d} >= {prev}");
        prev = d;
    }
}

#[test]
fn delta_is_the_largest_real_zero_over_all_characters() {
    // the cover Γ_N has the same δ: only the trivial character vanishes at δ,
    // and no character vanishes on the real axis to the right of it
    let op = operator(&[7.0, 8.0], 16);
    let delta = hausdorff_dimension(&op, 1e-13).unwrap().delta;
    for a in [[0, 0], [0, 1], [1, 0], [1, 1], [1, 2], [2, 3]] {
        let theta = Character::from_fraction(&a, 4);
        let at_delta = op.fredholm_determinant(Complex64::new(delta, 0.0), &theta).unwrap();
        if a == [0, 0] {
            assert!(at_delta.norm() < 1e-10);
        } else {
            assert!(at_delta.norm() > 1e-3, "a = {a:?}: {at_delta}");
        }
        for k in 1..40 {
            let x = delta + 0.025 * k as f64;
            let d = op.fredholm_determinant(Complex64::new(x, 0.0), &theta).unwrap();
            assert!(d.re > 0.0, "a = {a:?}, s = {x}: {d}");
        }
    }
}

#[test]
fn euler_product_tends_to_one() {
    let g = build_funnel_group(2, &[4.0, 5.0]).unwrap();
    let catalog = OrbitCatalog::build(&g, 8, 1_000_000, None).unwrap();
    let theta = Character::new(vec![0.3, 0.6]);
    let mut prev = f64::INFINITY;
    for x in [1.0, 2.0, 4.0, 8.0] {
        let e = euler_product_truncated(&catalog, Complex64::new(x, 1.0), &theta, 8).unwrap();
        let d = (e.value - 1.0).norm();
        assert!(d < prev);
        assert!(!e.divergence_warning);
        prev = d;
    }
    assert!(prev < 1e-12);
}

#[test]
fn euler_product_matches_determinant() {
    let g = build_funnel_group(2, &[6.0, 7.0]).unwrap();
    let op = TransferOperator::new(&g, Discretization::new(24, 0.75).unwrap()).unwrap();
    let catalog = OrbitCatalog::build(&g, 10, 10_000_000, None).unwrap();
    let theta = Character::new(vec![0.125, 0.5]);
    let s = Complex64::new(0.9, -2.0);
    let e = euler_product_truncated(&catalog, s, &theta, 10).unwrap();
    let d = op.fredholm_determinant(s, &theta).unwrap();
    assert!((e.value - d).norm() <= e.error_bound + 1e-12, "{} vs {d}, bound {:e}", e.value, e.error_bound);
}

#[test]
fn counts_simple_zero_and_empty_boxes() {
    let op = operator(&[7.0, 8.0], 16);
    let delta = hausdorff_dimension(&op, 1e-13).unwrap().delta;
    let f = LFunction::new(&op, Character::trivial(2));
    assert_eq!(count_zeros(&f, Rect::centered(Complex64::new(delta, 0.0), 0.05)).unwrap().count, 1);
    assert_eq!(count_zeros(&f, Rect::new(delta + 0.02, 2.0, -3.0, 3.0)).unwrap().count, 0);
    // double zero at s = 0
    assert_eq!(count_zeros(&f, Rect::centered(Complex64::new(0.0, 0.0), 0.05)).unwrap().count, 2);
}

#[test]
fn counts_are_additive() {
    let op = operator(&[7.0, 8.0], 16);
    let f = LFunction::new(&op, Character::from_fraction(&[1, 0], 2));
    let big = Rect::new(-0.3, 0.5, -0.6, 0.6);
    let total = count_zeros(&f, big).unwrap().count;
    let parts: usize = big
        .split_at(0.4871, 0.5123)
        .iter()
        .map(|r| count_zeros(&f, *r).unwrap().count)
        .sum();
    assert_eq!(total, parts);
    assert!(total >= 3);
}

#[test]
fn located_zeros_are_stable_under_refinement() {
    let theta = Character::from_fraction(&[1, 0], 4);
    let rect = Rect::new(-0.2, 0.5, -0.4, 0.4);
    let a = locate_zeros(&LFunction::new(&operator(&[7.0, 8.0], 16), theta.clone()), rect, 1e-8).unwrap();
    let b = locate_zeros(&LFunction::new(&operator(&[7.0, 8.0], 24), theta), rect, 1e-8).unwrap();
    assert_eq!(a.zeros.len(), b.zeros.len());
    for (x, y) in a.zeros.iter().zip(&b.zeros) {
        assert_eq!(x.multiplicity, y.multiplicity);
        assert!((x.s - y.s).norm() < 1e-8, "{} vs {}", x.s, y.s);
        assert!(x.certificate.contains(x.s));
    }
    assert_eq!(a.total_multiplicity(), a.total.count);
}

#[test]
fn nearest_zero_of_trivial_character() {
    let op = operator(&[7.0, 8.0], 16);
    let delta = hausdorff_dimension(&op, 1e-13).unwrap().delta;
    let f = LFunction::new(&op, Character::trivial(2));
    let center = Complex64::new(delta, 0.0);
    let skip = |z: &schottky_core::Zero| z.is_topological() || (z.s - center).norm() < 1e-6;
    let (set, z) = nearest_zero(&f, center, 0.1, 0.8, 1e-8, skip).unwrap();
    let z = z.unwrap();
    assert!(((z.s - center).norm() - 0.5685).abs() < 1e-3, "{}", z.s);
    assert!(set.zeros.iter().any(|w| w.is_topological() && w.multiplicity == 2));
}

#[test]
fn factorisation_holds_for_small_moduli() {
    let g = build_funnel_group(2, &[5.0, 6.0]).unwrap();
    let catalog = OrbitCatalog::build(&g, 6, 1_000_000, None).unwrap();
    for n in [1, 2, 5] {
        let r = artin_takagi_check(&catalog, n, Complex64::new(0.8, 0.7), 6, 1e-10).unwrap();
        assert!(r.passed(), "N = {n}: {:e}", r.max_residual());
    }
}

#[test]
fn factorisation_rejects_bad_arguments() {
    let g = build_funnel_group(2, &[5.0, 6.0]).unwrap();
    let catalog = OrbitCatalog::build(&g, 3, 1_000_000, None).unwrap();
    assert!(artin_takagi_check(&catalog, 0, Complex64::new(1.0, 0.0), 3, 1e-9).is_err());
    assert!(artin_takagi_check(&catalog, 2, Complex64::new(1.0, 0.0), 4, 1e-9).is_err());
}
