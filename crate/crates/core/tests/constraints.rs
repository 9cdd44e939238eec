use std::collections::BTreeMap;

use bdeform::constraints::{
    build_d, build_dtilde, build_l, explicit_expansion, structure_expansion, theorem_lhs, theorem_rhs,
    verify_a3_closed_form, verify_m13_closed_form, verify_simplified, verify_theorem, Family, JLinear, LFamily,
    Model, Prop, RhsForm, TGradedOp,
};
use bdeform::{Coeff, PMonomial, Var, WeylOp};
use num_rational::BigRational;

fn c(s: &str) -> Coeff {
    s.parse().unwrap()
}

fn pp(i: u32) -> PMonomial {
    PMonomial::power(i, 1)
}

fn number_operator(wd: u32) -> WeylOp {
    WeylOp::from_terms((1..=wd).map(|l| (pp(l), pp(l), Coeff::one())), wd)
}

fn mode(n: i64, v: i64) -> JLinear {
    JLinear { scalar: Coeff::zero(), modes: BTreeMap::from([(n, Coeff::from_int(v))]) }
}

#[test]
fn bip_l1_has_constant_and_number_operator() {
    let wd = 5;
    let l1 = build_l(&Model::bip(), 1, wd).unwrap();
    assert_eq!(l1.piece(0), WeylOp::annihilation(1, wd).neg());
    let mut expect = number_operator(wd);
    expect.add_assign(&WeylOp::scalar(c("u1*u2/(1+b)"), wd));
    assert_eq!(l1.piece(1), expect);
    assert!(l1.piece(2).is_zero());
}

#[test]
fn three_const_l1_constant_term() {
    let l1 = build_l(&Model::three_const(), 1, 4).unwrap();
    assert_eq!(l1.piece(1).coeff(&PMonomial::one(), &PMonomial::one()), c("u1*u2*u3/(1+b)"));
}

#[test]
fn biple3_l2_second_piece() {
    let wd = 5;
    let l2 = build_l(&Model::bip_le3(), 2, wd).unwrap();
    let mut expect = number_operator(wd);
    expect.add_assign(&WeylOp::scalar(c("(b*u1 + u1^2)/(1+b)"), wd));
    assert_eq!(l2.piece(2), expect.scale(&Coeff::var(Var::q(2))));
}

#[test]
fn l_pieces_are_homogeneous() {
    for model in [Model::bip(), Model::three_const(), Model::bip_le3()] {
        let fam = LFamily::new(&model, 6).unwrap();
        for i in 1..=6i64 {
            for (m, piece) in fam.l(i).pieces() {
                assert_eq!(piece.homogeneous_degree(), Some(m as i64 - i), "{model} i={i} t^{m}");
            }
        }
    }
}

#[test]
fn l_vanishes_beyond_its_bound() {
    let fam = LFamily::new(&Model::bip_le3(), 7).unwrap();
    let d = 4;
    for l in fam.l_bound(d) + 1..=fam.l_bound(d) + 3 {
        assert!(fam.l(l).truncate(d).unwrap().is_zero(), "l={l}");
    }
}

#[test]
fn d_examples() {
    assert_eq!(build_d(2, 2, 1, 2).unwrap(), JLinear::scalar(Coeff::one()));
    assert_eq!(build_d(3, 2, 1, 3).unwrap(), mode(-1, 2));
    for i in 1..=5 {
        for l in 1..=10 {
            for s in 0..=3 {
                assert!(build_d(s, i, i, l).unwrap().is_zero());
            }
        }
    }
    assert!(build_d(4, 1, 2, 1).is_err());
}

#[test]
fn dtilde_examples() {
    assert_eq!(build_dtilde(2, 3, 1, 2).unwrap(), JLinear::scalar(Coeff::from_int(2)));
    assert_eq!(build_dtilde(3, 2, 1, 1).unwrap(), mode(-1, 2));
    for i in 1..=5 {
        for l in 1..=10 {
            for m in 1..=3 {
                assert!(build_dtilde(m, i, i, l).unwrap().is_zero());
            }
        }
    }
    assert!(build_dtilde(0, 1, 2, 1).is_err());
}

#[test]
fn bip_l1_l2() {
    let d = 6;
    let fam = LFamily::new(&Model::bip(), d + 1).unwrap();
    let lhs = theorem_lhs(&fam, 1, 2, d).unwrap();
    let mut expect = TGradedOp::zero(d);
    for (n, piece) in fam.l(2).truncate(d).unwrap().pieces() {
        expect.add_piece(n + 1, &piece.neg());
    }
    assert_eq!(lhs, expect);
}

#[test]
fn equal_indices_commute() {
    for model in [Model::bip(), Model::three_const(), Model::bip_le3()] {
        let fam = LFamily::new(&model, 7).unwrap();
        for i in 1..=4 {
            assert!(theorem_lhs(&fam, i, i, 5).unwrap().is_zero());
            assert!(theorem_rhs(&fam, RhsForm::Structure, i, i, 5).unwrap().is_zero());
        }
    }
}

#[test]
fn structure_and_explicit_expansions_agree_for_bip() {
    for i in 1..=4 {
        for j in 1..=4 {
            let s = structure_expansion(&Model::bip(), i, j, 8).unwrap();
            let e = explicit_expansion(&Model::bip(), i, j, 8, false);
            assert_eq!(s, e);
        }
    }
}

#[test]
fn theorems_hold_on_small_sweeps() {
    for model in [Model::bip(), Model::three_const(), Model::bip_le3(), Model::general_maps()] {
        let report = verify_theorem(&model, 4, 6, None).unwrap();
        assert!(report.passed(), "{model}: {:?}", report.failures().next());
    }
}

#[test]
fn biple3_explicit_form_needs_corner_adjustment() {
    let report = verify_theorem(&Model::bip_le3(), 4, 6, None).unwrap();
    let remarked: Vec<(i64, i64)> = report.remarks().map(|it| (it.i, it.j)).collect();
    assert_eq!(remarked, vec![(1, 3), (1, 4), (3, 1), (4, 1)]);
}

#[test]
fn theorems_hold_after_evaluating_b() {
    for b in ["0", "1"] {
        let b: BigRational = b.parse().unwrap();
        for model in [Model::bip(), Model::three_const()] {
            assert!(verify_theorem(&model, 3, 5, Some(&b)).unwrap().passed(), "{model} b={b}");
        }
    }
}

#[test]
fn three_const_at_b_and_u_zero() {
    let d = 5;
    let fam = LFamily::new(&Model::three_const(), d + 2).unwrap();
    let zero = BigRational::from_integer(0.into());
    let special = |op: TGradedOp| {
        op.map_coeffs(|x| {
            let mut y = x.substitute(Var::B, &zero)?;
            for v in [Var::U1, Var::U2, Var::U3] {
                y = y.substitute(v, &zero)?;
            }
            Ok(y)
        })
        .unwrap()
    };
    let lhs = special(theorem_lhs(&fam, 2, 1, d).unwrap());
    let rhs = special(theorem_rhs(&fam, RhsForm::Explicit, 2, 1, d).unwrap());
    assert!(!lhs.is_zero());
    assert_eq!(lhs, rhs);
}

#[test]
fn simplified_commutators_on_small_sweeps() {
    for family in [Family::A, Family::M1] {
        for prop in [Prop::DStruct, Prop::Mixed, Prop::PStar] {
            let report = verify_simplified(family, prop, 4, 6).unwrap();
            assert!(report.passed(), "{family:?} {prop:?}: {:?}", report.failures().next());
        }
    }
}

#[test]
fn closed_forms_on_small_sweeps() {
    assert!(verify_a3_closed_form(4, 6).unwrap().passed());
    assert!(verify_m13_closed_form(4, 6).unwrap().passed());
}

#[test]
fn report_json_lists_pairs() {
    let report = verify_theorem(&Model::bip(), 2, 4, None).unwrap();
    let v = report.to_json();
    assert_eq!(v["pairs"].as_array().unwrap().len(), 4);
    assert!(v["pairs"].as_array().unwrap().iter().all(|p| p["status"] == "pass"));
}
