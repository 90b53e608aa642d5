use proptest::prelude::*;
use quasifold_core::{Field, Scalar, Sign};

fn exact() -> impl Strategy<Value = Scalar> {
    (-40i64..40, 1i64..12, -40i64..40, 1i64..12)
        .prop_map(|(a, b, c, d)| Scalar::ratio(a, b) + Scalar::ratio(c, d) * Scalar::sqrt(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms_hold_exactly(x in exact(), y in exact(), z in exact()) {
        prop_assert_eq!(x.clone() + y.clone(), y.clone() + x.clone());
        prop_assert_eq!(x.clone() * y.clone(), y.clone() * x.clone());
        prop_assert_eq!((x.clone() + y.clone()) + z.clone(), x.clone() + (y.clone() + z.clone()));
        prop_assert_eq!((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone()));
        prop_assert_eq!(x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z);
        if x.sign() != Sign::Zero {
            prop_assert_eq!(x.try_mul(&x.try_inv().unwrap()).unwrap(), Scalar::int(1));
        }
    }

    #[test]
    fn sign_is_multiplicative(x in exact(), y in exact()) {
        prop_assert_eq!((x.clone() * y.clone()).sign(), x.sign() * y.sign());
    }

    #[test]
    fn sign_matches_float_evaluation(x in exact()) {
        let f = x.to_f64();
        match x.sign() {
            Sign::Zero => prop_assert_eq!(f, 0.0),
            Sign::Positive => prop_assert!(f > 0.0),
            Sign::Negative => prop_assert!(f < 0.0),
        }
    }

    #[test]
    fn approx_round_trip(x in exact()) {
        let a = x.to_approx();
        prop_assert!(!a.is_exact());
        let scale = x.to_f64().abs().max(1.0);
        prop_assert!((a.to_f64() - x.to_f64()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn display_parses_back(x in exact()) {
        let back: Scalar = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }
}

#[test]
fn mixing_fields_is_rejected() {
    assert!(Scalar::sqrt(2).try_add(&Scalar::sqrt(3)).is_err());
    assert!(Scalar::sqrt(2).try_mul(&Scalar::sqrt(5)).is_err());
}
