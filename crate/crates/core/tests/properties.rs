use proptest::prelude::*;
use schottky_core::symbolic::character_sum_identity_check;
use schottky_core::{build_funnel_group, validate_schottky, Character, Complex64, MoebiusMap, Rect, Word};

fn reduced_letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    let n = 2 * rank;
    prop::collection::vec(0..n, 1..=max_len).prop_map(move |raw| {
        let mut out: Vec<usize> = Vec::with_capacity(raw.len());
        for x in raw {
            match out.last() {
                // replace a cancelling letter by its successor
                Some(&p) if (p + rank) % n == x => out.push((x + 1) % n),
                _ => out.push(x),
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_inverse_composes_to_identity(a in 0.5f64..3.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let d = (1.0 + b * c) / a;
        let m = MoebiusMap::new(a, b, c, d).unwrap();
        let id = m.compose(&m.inverse());
        prop_assert!(id.approx_eq(&MoebiusMap::IDENTITY, 1e-10));
        prop_assert!((m.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abelianization_is_additive(u in reduced_letters(3, 12), v in reduced_letters(3, 12)) {
        let (u, v) = (Word::new(3, u).unwrap(), Word::new(3, v).unwrap());
        if let Some(w) = u.concat(&v) {
            let sum: Vec<i64> = u.abelianization().iter().zip(v.abelianization()).map(|(x, y)| x + y).collect();
            prop_assert_eq!(w.abelianization(), sum);
        }
        let neg: Vec<i64> = u.abelianization().iter().map(|x| -x).collect();
        prop_assert_eq!(u.inverse().abelianization(), neg);
    }

    #[test]
    fn characters_are_multiplicative(
        theta in prop::collection::vec(0.0f64..1.0, 2),
        x in prop::collection::vec(-20i64..20, 2),
        y in prop::collection::vec(-20i64..20, 2),
    ) {
        let c = Character::new(theta);
        let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = c.eval(&sum);
        let rhs = c.eval(&x) * c.eval(&y);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
        prop_assert!((c.conjugate().eval(&x) - c.eval(&x).conj()).norm() < 1e-12);
    }

    #[test]
    fn character_sum_identity(letters in reduced_letters(2, 30), n in 1i64..9) {
        let w = Word::new(2, letters).unwrap();
        prop_assert!(character_sum_identity_check(n, &w) < 1e-10);
    }

    #[test]
    fn rect_split_tiles_parent(
        x in -2.0f64..2.0, y in -2.0f64..2.0, w in 0.01f64..3.0, h in 0.01f64..3.0,
        fx in 0.1f64..0.9, fy in 0.1f64..0.9,
    ) {
        let r = Rect::new(x, x + w, y, y + h);
        let kids = r.split_at(fx, fy);
        let area: f64 = kids.iter().map(|k| k.width() * k.height()).sum();
        prop_assert!((area - w * h).abs() < 1e-12 * (1.0 + w * h));
        for k in &kids {
            prop_assert!(r.contains(k.center()));
        }
    }

    #[test]
    fn funnel_groups_have_prescribed_lengths(l1 in 3.0f64..12.0, l2 in 3.0f64..12.0) {
        let g = build_funnel_group(2, &[l1, l2]).unwrap();
        prop_assert!(validate_schottky(&g).passed());
        let lengths = g.generator_lengths().unwrap();
        prop_assert!((lengths[0] - l1).abs() < 1e-9 && (lengths[1] - l2).abs() < 1e-9);
    }

    #[test]
    fn displacement_length_is_conjugation_invariant(letters in reduced_letters(2, 8), k in 0usize..8) {
        let g = build_funnel_group(2, &[4.0, 5.0]).unwrap();
        let w = Word::new(2, letters).unwrap();
        prop_assume!(w.is_cyclically_reduced());
        let k = k % w.len();
        let rotated = Word::new(2, [&w.letters()[k..], &w.letters()[..k]].concat()).unwrap();
        let (a, b) = (w.displacement_length(&g).unwrap(), rotated.displacement_length(&g).unwrap());
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
        let inv = w.inverse().displacement_length(&g).unwrap();
        prop_assert!((a - inv).abs() < 1e-9 * a.max(1.0));
    }
}

#[test]
fn rect_center_is_inside() {
    let r = Rect::centered(Complex64::new(0.3, -0.2), 0.1);
    assert!(r.contains(Complex64::new(0.3, -0.2)));
    assert!(!r.contains(Complex64::new(0.5, -0.2)));
}
