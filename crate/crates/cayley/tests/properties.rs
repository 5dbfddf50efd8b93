//! Property-based invariants of the exterior algebra layer: bilinearity,
//! graded anticommutativity, Hodge identities, backend agreement.

use cayley::scalar::{rat, Rat, Scalar};
use cayley::{musical_flat, musical_sharp, KForm, MultiIndex, VecN};
use proptest::prelude::*;

/// Random sparse rational form: up to 6 terms with small coefficients.
fn sparse_form(dim: u8, degree: usize) -> impl Strategy<Value = KForm<Rat>> {
    let all = MultiIndex::all(dim, degree);
    let n = all.len();
    proptest::collection::vec((0..n, -9i64..=9, 1i64..=9), 0..6).prop_map(move |terms| {
        let mut f = KForm::zero(dim, degree);
        for (i, num, den) in terms {
            let idx = all[i].labels().to_vec();
            f.add_term(&idx, rat(num, den)).unwrap();
        }
        f
    })
}

fn small_vec(dim: usize) -> impl Strategy<Value = VecN<Rat>> {
    proptest::collection::vec((-9i64..=9, 1i64..=9), dim)
        .prop_map(|cs| VecN::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()))
}

fn to_f64(f: &KForm<Rat>) -> KForm<f64> {
    f.to_f64()
}

fn max_coeff(f: &KForm<f64>) -> f64 {
    f.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_graded_anticommutative(
        a in sparse_form(8, 2),
        b in sparse_form(8, 3),
    ) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        // (-1)^{2*3} = 1
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn wedge_odd_degrees_anticommute(
        a in sparse_form(8, 1),
        b in sparse_form(8, 3),
    ) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert_eq!(ab.neg(), ba);
    }

    #[test]
    fn wedge_bilinear(
        a in sparse_form(8, 2),
        a2 in sparse_form(8, 2),
        b in sparse_form(8, 2),
        num in -5i64..=5,
        den in 1i64..=5,
    ) {
        let c = rat(num, den);
        let lhs = a.add(&a2.scale(&c)).unwrap().wedge(&b).unwrap();
        let rhs = a.wedge(&b).unwrap().add(&a2.wedge(&b).unwrap().scale(&c)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_star_is_inner_times_volume(
        a in sparse_form(8, 3),
        b in sparse_form(8, 3),
    ) {
        let dvol_coeff_ab = a.wedge(&b.hodge_star().unwrap()).unwrap()
            .coeff(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let dvol_coeff_ba = b.wedge(&a.hodge_star().unwrap()).unwrap()
            .coeff(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let inner = a.inner(&b).unwrap();
        prop_assert_eq!(dvol_coeff_ab, inner.clone());
        prop_assert_eq!(dvol_coeff_ba, inner);
    }

    #[test]
    fn star_is_an_isometry(
        a in sparse_form(8, 2),
        b in sparse_form(8, 2),
    ) {
        let sa = a.hodge_star().unwrap();
        let sb = b.hodge_star().unwrap();
        prop_assert_eq!(sa.inner(&sb).unwrap(), a.inner(&b).unwrap());
    }

    #[test]
    fn star_squares_with_sign(
        a in sparse_form(8, 3),
    ) {
        // k(n-k) = 15 odd on degree 3
        let ss = a.hodge_star().unwrap().hodge_star().unwrap();
        prop_assert_eq!(ss, a.neg());
    }

    #[test]
    fn interior_is_an_antiderivation(
        v in small_vec(8),
        a in sparse_form(8, 2),
        b in sparse_form(8, 2),
    ) {
        let ab = a.wedge(&b).unwrap();
        let lhs = KForm::interior(&v, &ab).unwrap();
        let left = KForm::interior(&v, &a).unwrap().wedge(&b).unwrap();
        let right = a.wedge(&KForm::interior(&v, &b).unwrap()).unwrap();
        // degree of a is even, so no sign on the second term
        let rhs = left.add(&right).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn sharp_inverts_flat(v in small_vec(8)) {
        prop_assert_eq!(musical_sharp(&musical_flat(&v)).unwrap(), v);
    }

    #[test]
    fn backends_agree(
        a in sparse_form(8, 2),
        b in sparse_form(8, 2),
        v in small_vec(8),
    ) {
        // rational pipeline
        let exact = {
            let w = a.wedge(&b).unwrap();
            let s = w.hodge_star().unwrap();
            KForm::interior(&v, &s).unwrap()
        };
        // float pipeline
        let fa = to_f64(&a);
        let fb = to_f64(&b);
        let fv = VecN::from_f64(&v.components().iter().map(|x| x.to_f64()).collect::<Vec<_>>());
        let float = {
            let w = fa.wedge(&fb).unwrap();
            let s = w.hodge_star().unwrap();
            KForm::interior(&fv, &s).unwrap()
        };
        let diff = float.sub(&to_f64(&exact)).unwrap();
        prop_assert!(max_coeff(&diff) < 1e-12);
        // inner products agree too
        let ir = a.inner(&b).unwrap().to_f64();
        let ifl = fa.inner(&fb).unwrap();
        prop_assert!((ir - ifl).abs() < 1e-12);
    }

    #[test]
    fn pullback_respects_wedge(
        a in sparse_form(4, 1),
        b in sparse_form(4, 2),
    ) {
        // m = small integer matrix
        let m: Vec<Vec<Rat>> = vec![
            vec![rat(1,1), rat(2,1), rat(0,1), rat(-1,1)],
            vec![rat(0,1), rat(1,1), rat(1,1), rat(0,1)],
            vec![rat(3,1), rat(0,1), rat(1,1), rat(1,1)],
            vec![rat(0,1), rat(0,1), rat(-2,1), rat(1,1)],
        ];
        let lhs = a.wedge(&b).unwrap().pullback(&m).unwrap();
        let rhs = a.pullback(&m).unwrap().wedge(&b.pullback(&m).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_roundtrips(a in sparse_form(8, 4)) {
        let back = KForm::<Rat>::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(&back, &a);
        let f = a.to_f64();
        let fback = KForm::<f64>::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(fback, f);
    }
}
