use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zs_spectral::characteristic::evaluate_char;
use zs_spectral::discriminant::sylvester_discriminant;
use zs_spectral::gradients::{breve, hat, star, GradientField};
use zs_spectral::linalg::{newton_identities, poly_from_roots, power_sums_of};
use zs_spectral::transfer::{det, fundamental_matrix};
use zs_spectral::{CharKind, Potential, Tolerances};

fn complex(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

fn field() -> impl Strategy<Value = GradientField> {
    proptest::collection::vec((complex(2.0), complex(2.0)), 9).prop_map(|v| {
        let (comp1, comp2) = v.into_iter().unzip();
        GradientField { grid_n: 8, comp1, comp2 }
    })
}

fn focusing(band: usize) -> impl Strategy<Value = Potential> {
    proptest::collection::vec(complex(0.3), 2 * band + 1)
        .prop_map(|c| Potential::make_focusing(c).expect("odd length"))
}

fn close(a: &GradientField, b: &GradientField) -> bool {
    a.comp1.iter().chain(&a.comp2).zip(b.comp1.iter().chain(&b.comp2)).all(|(x, y)| (x - y).norm() < 1e-14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hat_is_an_involution(f in field()) {
        prop_assert!(close(&hat(&hat(&f)), &f));
    }

    #[test]
    fn breve_squares_to_minus(f in field()) {
        prop_assert!(close(&breve(&breve(&f)), &f.scale(Complex64::new(-1.0, 0.0))));
    }

    #[test]
    fn star_is_symmetric(f in field(), g in field()) {
        prop_assert!(close(&star(&f, &g).unwrap(), &star(&g, &f).unwrap()));
    }

    #[test]
    fn focusing_fields_are_hat_fixed(p in focusing(2)) {
        let f = GradientField::from_potential(&p, 16);
        prop_assert!(close(&hat(&f), &f));
    }

    #[test]
    fn sylvester_matches_pairwise(roots in proptest::collection::vec(complex(1.0), 2..7)) {
        let mut brute = Complex64::new(1.0, 0.0);
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                brute *= (roots[i] - roots[j]).powu(2);
            }
        }
        let d = sylvester_discriminant(&poly_from_roots(&roots)).unwrap();
        prop_assert!((d - brute).norm() <= 1e-9 * brute.norm().max(1e-30));
    }

    #[test]
    fn newton_identities_invert_power_sums(roots in proptest::collection::vec(complex(1.0), 1..8)) {
        let m = roots.len();
        let rebuilt = newton_identities(&power_sums_of(&roots, m), m);
        let direct = poly_from_roots(&roots);
        for (a, b) in rebuilt.iter().zip(&direct) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn potential_json_round_trips(p in focusing(3), k in -3i64..=3) {
        let shifted = p.gauge_shift(k);
        let back = Potential::from_json(&shifted.to_json()).unwrap();
        prop_assert!(back.same_coefficients(&shifted));
    }

    #[test]
    fn gauge_shifts_compose(p in focusing(2), j in -3i64..=3, k in -3i64..=3) {
        prop_assert!(p.gauge_shift(j).gauge_shift(k).same_coefficients(&p.gauge_shift(j + k)));
    }

    #[test]
    fn random_focusing_is_seeded(seed in any::<u64>(), band in 0usize..4) {
        let a = Potential::random_focusing(&mut ChaCha8Rng::seed_from_u64(seed), band, 0.5);
        let b = Potential::random_focusing(&mut ChaCha8Rng::seed_from_u64(seed), band, 0.5);
        prop_assert!(a.same_coefficients(&b));
        prop_assert!(a.is_focusing());
    }

    #[test]
    fn tolerances_reject_nonpositive(key in proptest::sample::select(Tolerances::KEYS.to_vec()), v in -1.0f64..=0.0) {
        let mut tol = Tolerances::default();
        prop_assert!(tol.set(key, v).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn wronskian_stays_one(p in focusing(2), lambda in complex(4.0)) {
        let r = fundamental_matrix(&p, lambda, false, false).unwrap();
        prop_assert!((det(&r.endpoint) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn discriminant_is_conjugate_symmetric(p in focusing(2), lambda in complex(4.0)) {
        let (d, _) = evaluate_char(&p, lambda, CharKind::Delta).unwrap();
        let (dc, _) = evaluate_char(&p, lambda.conj(), CharKind::Delta).unwrap();
        prop_assert!((dc - d.conj()).norm() < 1e-10 * (1.0 + d.norm()));
    }
}
