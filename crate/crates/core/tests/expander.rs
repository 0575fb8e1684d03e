use nalgebra::DMatrix;
use schottky_core::expander::{cheeger_bounds_report, cheeger_bruteforce, eigenvalue_closed_form, lambda1, spectrum};
use schottky_core::CayleyGraphSpec;

fn dense(spec: &CayleyGraphSpec) -> Vec<f64> {
    let l = spec.laplacian().unwrap();
    let n = l.len();
    let mut ev: Vec<f64> = DMatrix::from_fn(n, n, |i, j| l[i][j])
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn sorted(spec: &CayleyGraphSpec) -> Vec<f64> {
    let mut v: Vec<f64> = spectrum(spec).unwrap().into_iter().map(|(_, l)| l).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn closed_form_matches_dense_eigensolver() {
    let specs = [
        CayleyGraphSpec::standard(7, 1).unwrap(),
        CayleyGraphSpec::standard(6, 2).unwrap(),
        CayleyGraphSpec::new(5, 2, vec![vec![1, 1], vec![4, 4], vec![1, 0], vec![4, 0]]).unwrap(),
        CayleyGraphSpec::new(4, 3, vec![vec![1, 0, 0], vec![3, 0, 0], vec![0, 1, 1], vec![0, 3, 3], vec![0, 0, 1], vec![0, 0, 3]]).unwrap(),
    ];
    for spec in &specs {
        for (a, b) in sorted(spec).iter().zip(dense(spec)) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn scaled_gap_is_bounded() {
    // λ₁ ~ π² / N² for the ±e_j generators of (Z/N)²
    for n in [8, 16, 32, 64, 128] {
        let (l, _) = lambda1(&CayleyGraphSpec::standard(n, 2).unwrap()).unwrap();
        let scaled = (n * n) as f64 * l;
        assert!(scaled > 9.0 && scaled <= std::f64::consts::PI.powi(2), "N = {n}: {scaled}");
    }
}

#[test]
fn lower_cheeger_bound_on_small_graphs() {
    for (n, r) in [(2, 1), (5, 1), (12, 1), (24, 1), (2, 2), (3, 2), (4, 2), (2, 3), (2, 4)] {
        let rep = cheeger_bounds_report(&CayleyGraphSpec::standard(n, r).unwrap()).unwrap();
        assert!(rep.lower_holds, "N = {n}, r = {r}: {rep:?}");
    }
}

#[test]
fn complete_graph_on_four_vertices() {
    let spec = CayleyGraphSpec::new(4, 1, vec![vec![1], vec![2], vec![3]]).unwrap();
    let ev = sorted(&spec);
    assert!(ev[0].abs() < 1e-15);
    for l in &ev[1..] {
        assert!((l - 4.0 / 3.0).abs() < 1e-12, "{l}");
    }
    // every 2-subset of K_4 has 4 boundary edges
    assert_eq!(cheeger_bruteforce(&spec).unwrap(), 2.0);
    assert!(cheeger_bounds_report(&spec).unwrap().lower_holds);
}

#[test]
fn cycle_cheeger_constant() {
    for n in [4, 6, 9, 16] {
        let h = cheeger_bruteforce(&CayleyGraphSpec::standard(n, 1).unwrap()).unwrap();
        assert_eq!(h, 2.0 / (n / 2) as f64, "N = {n}");
    }
}

#[test]
fn closed_form_is_symmetric_in_a() {
    let spec = CayleyGraphSpec::standard(9, 2).unwrap();
    for a in [[1, 2], [3, 7], [4, 4]] {
        let neg = [(9 - a[0]) % 9, (9 - a[1]) % 9];
        assert_eq!(eigenvalue_closed_form(&spec, &a), eigenvalue_closed_form(&spec, &neg));
    }
}
