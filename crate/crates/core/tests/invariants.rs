use proptest::prelude::*;
use regenrad::classes::admissible_c;
use regenrad::rademacher::{
    bound_theorem1, bound_theorem2, bound_theorem3, optimize_l, rademacher_from_values, signed_sup, BoundInputs, Regime,
};

fn inputs(u: f64, sigma: f64, v: f64, n: f64) -> BoundInputs {
    BoundInputs {
        u,
        sigma,
        c: admissible_c(v),
        v,
        n,
        l: 4.0,
        p: 2.0,
        e_tau_p: 5.0,
        lambda: 0.5,
        c_lambda: 3.0,
        m_const: 1.0,
        e_tau_1: 2.0,
        e_tau_2: 5.0,
        e_nu_tau: 1.0,
        sup_pi_f: 0.3,
        ..Default::default()
    }
}

proptest! {
    #[test]
    fn bounds_grow_with_n(u in 0.1f64..10.0, frac in 0.1f64..1.0, v in 1.0f64..5.0, n in 1.0f64..1e6, k in 1.01f64..4.0) {
        let x = inputs(u, frac * u, v, n);
        let y = BoundInputs { n: n * k, ..x };
        for regime in [Regime::Polynomial, Regime::Exponential] {
            let a = bound_theorem2(&x, regime).unwrap();
            prop_assert!(a >= 0.0 && bound_theorem2(&y, regime).unwrap() >= a);
            prop_assert!(optimize_l(&y, regime).unwrap().bound >= optimize_l(&x, regime).unwrap().bound * (1.0 - 1e-12));
        }
        let a = bound_theorem1(&x).unwrap();
        prop_assert!(a >= 0.0 && bound_theorem1(&y).unwrap() >= a);
        prop_assert!(bound_theorem3(&y, 1.0).unwrap() >= bound_theorem3(&x, 1.0).unwrap());
    }

    #[test]
    fn bounds_grow_with_u(u in 0.1f64..10.0, sigma in 0.01f64..0.1, v in 1.0f64..5.0, n in 1.0f64..1e6, k in 1.01f64..4.0) {
        let x = inputs(u, sigma, v, n);
        let y = BoundInputs { u: u * k, ..x };
        prop_assert!(bound_theorem1(&y).unwrap() >= bound_theorem1(&x).unwrap());
        for regime in [Regime::Polynomial, Regime::Exponential] {
            prop_assert!(bound_theorem2(&y, regime).unwrap() >= bound_theorem2(&x, regime).unwrap());
        }
    }

    #[test]
    fn bounds_grow_with_sigma_in_the_bulk(u in 0.1f64..10.0, f1 in 0.1f64..1.0, f2 in 0.1f64..1.0, v in 1.0f64..5.0, n in 100.0f64..1e6) {
        let (lo, hi) = (f1.min(f2), f1.max(f2));
        let x = inputs(u, lo * u, v, n);
        let y = BoundInputs { sigma: hi * u, ..x };
        prop_assert!(bound_theorem1(&y).unwrap() >= bound_theorem1(&x).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn adding_a_member_never_decreases_the_estimate(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 1..5),
        extra in prop::collection::vec(-1.0f64..1.0, 6),
        seed in any::<u64>(),
    ) {
        let small = rademacher_from_values(&rows, 400, seed).unwrap().mean;
        let mut bigger = rows.clone();
        bigger.push(extra);
        prop_assert!(rademacher_from_values(&bigger, 400, seed).unwrap().mean >= small);
    }

    #[test]
    fn flipping_all_signs_preserves_the_sup(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 8), 1..5),
        signs in prop::collection::vec(prop::bool::ANY, 8),
    ) {
        let s: Vec<f64> = signs.iter().map(|b| if *b { 1.0 } else { -1.0 }).collect();
        let flipped: Vec<f64> = s.iter().map(|x| -x).collect();
        prop_assert_eq!(signed_sup(&rows, &s), signed_sup(&rows, &flipped));
    }
}
