use bdeform::constraints::Model;
use bdeform::tau::{check_constraints, check_rooted_fixed_point, h_series, tau_evolve, tau_from_h};
use bdeform::{Coeff, PPoly};
use proptest::prelude::*;

fn c(s: &str) -> Coeff {
    s.parse().unwrap()
}

fn p(i: i64) -> PPoly {
    PPoly::p(i)
}

fn all_models() -> [Model; 4] {
    [Model::bip(), Model::three_const(), Model::bip_le3(), Model::general_maps()]
}

#[test]
fn constant_term_is_one() {
    for model in all_models() {
        assert_eq!(tau_evolve(&model, 0).unwrap().coeff(0), &PPoly::one());
    }
}

#[test]
fn bip_first_orders() {
    let tau = tau_evolve(&Model::bip(), 2).unwrap();
    assert_eq!(tau.coeff(1), &p(1).scale(&c("u1*u2/(1+b)")));
    let inner = &(&p(1) * &p(1)).scale(&c("1 + u1*u2/(1+b)")) + &p(2).scale(&c("b + u1 + u2"));
    assert_eq!(tau.coeff(2), &inner.scale(&c("1/2*u1*u2/(1+b)")));
}

#[test]
fn biple3_first_order() {
    let tau = tau_evolve(&Model::bip_le3(), 1).unwrap();
    assert_eq!(tau.coeff(1), &p(1).scale(&c("q1*u1/(1+b)")));
}

#[test]
fn coefficients_are_homogeneous() {
    for model in all_models() {
        let tau = tau_evolve(&model, 5).unwrap();
        for n in 0..=5 {
            assert!(tau.coeff(n).is_homogeneous(n), "{model} n={n}");
        }
    }
}

#[test]
fn extending_keeps_lower_orders() {
    for model in all_models() {
        let short = tau_evolve(&model, 4).unwrap();
        let long = tau_evolve(&model, 5).unwrap();
        assert_eq!(short.coeffs(), &long.coeffs()[..5], "{model}");
    }
}

#[test]
fn denominators_stay_within_order() {
    for model in all_models() {
        let tau = tau_evolve(&model, 5).unwrap();
        for (n, d) in tau.denom_pows().into_iter().enumerate() {
            assert!(d as usize <= n, "{model} n={n} denom_pow={d}");
        }
    }
}

#[test]
fn bip_constraints() {
    let tau = tau_evolve(&Model::bip(), 5).unwrap();
    let report = check_constraints(&tau, 5).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.checked, 30);
}

#[test]
fn constraints_for_every_model() {
    for model in [Model::three_const(), Model::bip_le3()] {
        let tau = tau_evolve(&model, 4).unwrap();
        let report = check_constraints(&tau, 4).unwrap();
        assert!(report.passed(), "{model}: {:?}", report.failures);
    }
}

#[test]
fn general_maps_constraints() {
    let tau = tau_evolve(&Model::general_maps(), 6).unwrap();
    assert!(check_constraints(&tau, 4).unwrap().passed());
}

#[test]
fn perturbed_series_is_caught() {
    let tau = tau_evolve(&Model::bip(), 3).unwrap();
    let mut coeffs = tau.coeffs().to_vec();
    coeffs[2] = &coeffs[2] + &p(2);
    let broken = bdeform::tau::TauSeries::from_coeffs(&Model::bip(), coeffs);
    let report = check_constraints(&broken, 3).unwrap();
    assert!(!report.passed());
    assert!(report.failures.iter().any(|f| f.i == 2 && f.order == 2));
}

#[test]
fn imax_zero_is_rejected() {
    let tau = tau_evolve(&Model::bip(), 2).unwrap();
    assert!(check_constraints(&tau, 0).is_err());
    assert!(check_rooted_fixed_point(&tau, 0).is_err());
}

#[test]
fn h_series_first_orders() {
    let tau = tau_evolve(&Model::bip(), 3).unwrap();
    let h = h_series(&tau).unwrap();
    assert!(h.coeff(0).is_zero());
    assert_eq!(h.coeff(1), &p(1).scale(&c("u1*u2")));
}

#[test]
fn exp_log_round_trip() {
    for model in all_models() {
        let tau = tau_evolve(&model, 5).unwrap();
        assert_eq!(tau_from_h(&model, &h_series(&tau).unwrap()), tau);
    }
}

#[test]
fn rooted_fixed_point_bip() {
    let tau = tau_evolve(&Model::bip(), 4).unwrap();
    let report = check_rooted_fixed_point(&tau, 4).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    let h = h_series(&tau).unwrap();
    assert_eq!(h.coeff(1).pstar(1), PPoly::constant(c("u1*u2")));
}

#[test]
fn rooted_fixed_point_other_models() {
    for model in [Model::three_const(), Model::bip_le3(), Model::general_maps()] {
        let tau = tau_evolve(&model, 3).unwrap();
        let report = check_rooted_fixed_point(&tau, 3).unwrap();
        assert!(report.passed(), "{model}: {:?}", report.failures);
    }
}

#[test]
fn rooted_fixed_point_catches_perturbation() {
    let tau = tau_evolve(&Model::bip(), 3).unwrap();
    let mut coeffs = tau.coeffs().to_vec();
    coeffs[3] = &coeffs[3] + &(&p(1) * &p(2));
    let broken = bdeform::tau::TauSeries::from_coeffs(&Model::bip(), coeffs);
    assert!(!check_rooted_fixed_point(&broken, 3).unwrap().passed());
}

#[test]
fn text_rendering_lists_orders() {
    let tau = tau_evolve(&Model::bip(), 1).unwrap();
    assert_eq!(tau.to_string(), "t^0: 1\nt^1: (u1*u2/(1+b)^1)*p1\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constraints_hold_for_numeric_weights(q1 in -3i64..=3, q2 in -3i64..=3, q3 in -3i64..=3) {
        let model = Model::bip_le3().with_q([Coeff::from_int(q1), Coeff::from_int(q2), Coeff::from_int(q3)]);
        let tau = tau_evolve(&model, 4).unwrap();
        prop_assert!(check_constraints(&tau, 4).unwrap().passed());
        prop_assert_eq!(tau_from_h(&model, &h_series(&tau).unwrap()), tau);
    }
}
