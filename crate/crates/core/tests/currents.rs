use bdeform::coeff::Var;
use bdeform::currents::{
    a_family_recursive, a_vector, build_a, build_m, current, m1_family_recursive, m_from_elementary, m_vector,
    Charge, YVector,
};
use bdeform::{Coeff, PMonomial, WeylOp};

fn c(s: &str) -> Coeff {
    s.parse().unwrap()
}

fn pp(i: u32) -> PMonomial {
    PMonomial::power(i, 1)
}

fn one() -> PMonomial {
    PMonomial::one()
}

#[test]
fn currents_are_creations_and_scaled_annihilations() {
    let wd = 6;
    assert_eq!(current(-2, &Charge::zero(), wd), WeylOp::creation(2, wd));
    assert_eq!(
        current(2, &Charge::zero(), wd),
        WeylOp::annihilation(2, wd).scale(&c("1+b"))
    );
    assert_eq!(current(0, &Charge::u(), wd), WeylOp::scalar(c("u1"), wd));
    assert!(current(0, &Charge::zero(), wd).is_zero());
}

#[test]
fn current_relation() {
    let wd = 12;
    for i in -5i64..=5 {
        for j in -5i64..=5 {
            let lhs = current(i, &Charge::u(), wd).commutator_at(&current(j, &Charge::u(), wd), 5).unwrap();
            let expect = if i == -j && i != 0 {
                WeylOp::scalar(c("1+b").scale_int(i), 5)
            } else {
                WeylOp::zero(5)
            };
            assert_eq!(lhs, expect, "[J_{i}, J_{j}]");
        }
    }
}

#[test]
fn y_plus_shifts_the_seed() {
    let v = YVector::seed(4).y_plus();
    assert_eq!(v.entry(1), WeylOp::scalar(c("1/(1+b)"), 4));
    assert!(v.entry(0).is_zero());
    let v2 = v.y_plus();
    assert_eq!(v2.entries().map(|(j, _)| j).collect::<Vec<_>>(), vec![2]);
    assert!(YVector::zero(4).y_plus().is_zero());
}

#[test]
fn lambda_on_shifted_seed() {
    let v = YVector::seed(6).y_plus().lambda_y(&Charge::zero(), &Coeff::zero());
    assert_eq!(v.entry(1), WeylOp::scalar(c("b/(1+b)"), 6));
    assert_eq!(v.entry(0), WeylOp::term(pp(1), one(), c("1/(1+b)"), 6));
    for k in 1..=6u32 {
        assert_eq!(v.entry(1 + k), WeylOp::annihilation(k as i64, 6));
    }
}

#[test]
fn a_zero_and_one() {
    let wd = 8;
    for i in 1..6 {
        let expect = if i == 1 { WeylOp::scalar(c("1/(1+b)"), wd) } else { WeylOp::zero(wd) };
        assert_eq!(build_a(i, 0, wd), expect);
        let a1 = build_a(i, 1, wd);
        let j = current(i as i64 - 1, &Charge::zero(), wd).scale(&c("1/(1+b)"));
        assert_eq!(a1, j);
    }
    assert_eq!(build_a(2, 1, wd), WeylOp::annihilation(1, wd));
    assert!(build_a(1, 1, wd).is_zero());
}

#[test]
fn a_one_two_is_the_euler_operator() {
    let wd = 7;
    let mut expect = WeylOp::zero(wd);
    for m in 1..=wd {
        expect.add_term(pp(m), pp(m), &Coeff::one());
    }
    assert_eq!(build_a(1, 2, wd), expect);
}

#[test]
fn m11_is_current_over_one_plus_b() {
    let wd = 6;
    assert_eq!(build_m(1, 1, 1, wd).unwrap(), WeylOp::scalar(c("u1/(1+b)"), wd));
    for i in 2..6 {
        assert_eq!(build_m(1, 1, i, wd).unwrap(), WeylOp::annihilation(i as i64 - 1, wd));
    }
}

#[test]
fn m12_low_modes() {
    let wd = 6;
    let mut m121 = WeylOp::term(pp(1), one(), c("u1/(1+b)"), wd);
    for n in 2..=wd + 1 {
        m121.add_term(pp(n), pp(n - 1), &Coeff::one());
    }
    assert_eq!(build_m(1, 2, 1, wd).unwrap(), m121);

    let mut m122 = WeylOp::scalar(c("(u1*b + u1^2)/(1+b)"), wd);
    for n in 1..=wd {
        m122.add_term(pp(n), pp(n), &Coeff::one());
    }
    assert_eq!(build_m(1, 2, 2, wd).unwrap(), m122);
}

#[test]
fn route_agreement_for_a() {
    let wd = 10;
    for s in 0..=3 {
        let rec = a_family_recursive(s, wd).unwrap();
        let y = a_vector(s, wd);
        for i in 1..=6 {
            let r = rec.get(&i).cloned().unwrap_or_else(|| WeylOp::zero(wd));
            assert!(r.equal_at(&y.entry(i), wd), "A_{i}({s})");
        }
    }
}

#[test]
fn route_agreement_for_m1() {
    let wd = 10;
    for m in 1..=3 {
        let rec = m1_family_recursive(m, wd).unwrap();
        let y = m_vector(1, m, wd).unwrap();
        for i in 1..=6 {
            let r = rec.get(&i).cloned().unwrap_or_else(|| WeylOp::zero(wd));
            assert!(r.equal_at(&y.entry(i), wd), "M^(1,{m})_{i}");
        }
    }
}

#[test]
fn elementary_symmetric_expansion() {
    let wd = 8;
    for k in 1..=3 {
        let mv = m_vector(k, 1, wd).unwrap();
        for i in 1..=6 {
            let lhs = mv.entry(i);
            let rhs = m_from_elementary(k, i, wd);
            assert!(lhs.equal_at(&rhs, wd), "k={k}, i={i}");
        }
    }
}

#[test]
fn homogeneity() {
    let wd = 9;
    for s in 0..=3 {
        let v = a_vector(s, wd);
        for i in 1..=6u32 {
            let a = v.entry(i);
            if !a.is_zero() {
                assert_eq!(a.homogeneous_degree(), Some(1 - i as i64), "A_{i}({s})");
            }
        }
    }
    for k in 1..=3 {
        for m in 1..=if k == 1 { 3 } else { 1 } {
            let v = m_vector(k, m, wd).unwrap();
            for i in 1..=6u32 {
                let op = v.entry(i);
                if !op.is_zero() {
                    assert_eq!(op.homogeneous_degree(), Some(m as i64 - i as i64), "M^({k},{m})_{i}");
                }
            }
        }
    }
}

#[test]
fn bip_constant_term() {
    let m = build_m(2, 1, 1, 6).unwrap();
    assert_eq!(m.coeff(&one(), &one()), c("u1*u2/(1+b)"));
    let m3 = build_m(3, 1, 1, 6).unwrap();
    assert_eq!(m3.coeff(&one(), &one()), c("u1*u2*u3/(1+b)"));
    let _ = Var::B;
}
