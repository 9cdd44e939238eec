//! Normal-ordered differential operators in the Weyl algebra generated by
//! `p_i` and `p_i^* = i ∂/∂p_i`, truncated to a working degree.
//!
//! A [`WeylOp`] is a sum of terms `c · p^α (p^*)^β` with every annihilator to
//! the right. It is only meaningful on polynomials of degree at most its
//! working degree `D`, so terms whose annihilation degree `|β|` exceeds `D`
//! are dropped: they act as zero there.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::ppoly::{binomial, factorial, write_scaled, PMonomial, PPoly};

type Key = (PMonomial, PMonomial);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylOp {
    terms: BTreeMap<Key, Coeff>,
    wd: u32,
}

impl WeylOp {
    pub fn zero(wd: u32) -> WeylOp {
        WeylOp { terms: BTreeMap::new(), wd }
    }

    pub fn identity(wd: u32) -> WeylOp {
        WeylOp::scalar(Coeff::one(), wd)
    }

    pub fn scalar(c: Coeff, wd: u32) -> WeylOp {
        WeylOp::term(PMonomial::one(), PMonomial::one(), c, wd)
    }

    /// Multiplication by `p_i`; zero for `i <= 0`.
    pub fn creation(i: i64, wd: u32) -> WeylOp {
        if i <= 0 {
            return WeylOp::zero(wd);
        }
        WeylOp::term(PMonomial::power(i as u32, 1), PMonomial::one(), Coeff::one(), wd)
    }

    /// `p_i^*`; zero for `i <= 0`.
    pub fn annihilation(i: i64, wd: u32) -> WeylOp {
        if i <= 0 {
            return WeylOp::zero(wd);
        }
        WeylOp::term(PMonomial::one(), PMonomial::power(i as u32, 1), Coeff::one(), wd)
    }

    /// The single term `c · create · annihilate` (normal ordered).
    pub fn term(create: PMonomial, annihilate: PMonomial, c: Coeff, wd: u32) -> WeylOp {
        let mut op = WeylOp::zero(wd);
        op.add_term(create, annihilate, &c);
        op
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PMonomial, PMonomial, Coeff)>, wd: u32) -> WeylOp {
        let mut op = WeylOp::zero(wd);
        for (a, b, c) in terms {
            op.add_term(a, b, &c);
        }
        op
    }

    pub fn add_term(&mut self, create: PMonomial, annihilate: PMonomial, c: &Coeff) {
        if c.is_zero() || annihilate.degree() > self.wd {
            return;
        }
        match self.terms.entry((create, annihilate)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn working_degree(&self) -> u32 {
        self.wd
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMonomial, &PMonomial, &Coeff)> {
        self.terms.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn coeff(&self, create: &PMonomial, annihilate: &PMonomial) -> Coeff {
        self.terms.get(&(create.clone(), annihilate.clone())).cloned().unwrap_or_default()
    }

    /// Restriction to polynomials of degree at most `d`.
    pub fn truncate(&self, d: u32) -> Result<WeylOp> {
        if d > self.wd {
            return Err(Error::DegreeBudget { needed: d, available: self.wd });
        }
        Ok(self.truncate_unchecked(d))
    }

    fn truncate_unchecked(&self, d: u32) -> WeylOp {
        WeylOp {
            terms: self
                .terms
                .iter()
                .filter(|((_, b), _)| b.degree() <= d)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
            wd: d,
        }
    }

    /// Common degree shift `|α| - |β|` of all terms, if there is one.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|(a, b)| a.degree() as i64 - b.degree() as i64);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Highest output degree on inputs of degree at most `d`.
    pub fn reach_at(&self, d: u32) -> u32 {
        self.terms
            .keys()
            .filter(|(_, b)| b.degree() <= d)
            .map(|(a, b)| d - b.degree() + a.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn reach(&self) -> u32 {
        self.reach_at(self.wd)
    }

    /// Largest `(1+b)` denominator exponent among the coefficients.
    pub fn max_denom_pow(&self) -> u32 {
        self.terms.values().map(Coeff::denom_pow).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &Coeff) -> WeylOp {
        let mut out = WeylOp::zero(self.wd);
        if s.is_zero() {
            return out;
        }
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), &(c * s));
        }
        out
    }

    pub fn scale_rational(&self, s: &BigRational) -> WeylOp {
        let mut out = WeylOp::zero(self.wd);
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), &c.scale(s));
        }
        out
    }

    pub fn neg(&self) -> WeylOp {
        WeylOp { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(), wd: self.wd }
    }

    /// Sum; the result lives at the smaller working degree.
    pub fn add(&self, other: &WeylOp) -> WeylOp {
        let wd = self.wd.min(other.wd);
        let mut out = self.truncate_unchecked(wd);
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &WeylOp) -> WeylOp {
        self.add(&other.neg())
    }

    pub fn add_assign(&mut self, other: &WeylOp) {
        if other.wd < self.wd {
            *self = self.truncate_unchecked(other.wd);
        }
        for ((a, b), c) in &other.terms {
            self.add_term(a.clone(), b.clone(), c);
        }
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Coeff) -> Result<Coeff>) -> Result<WeylOp> {
        let mut out = WeylOp::zero(self.wd);
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.clone(), &f(c)?);
        }
        Ok(out)
    }

    /// `p_k ∘ self`; zero for `k <= 0`.
    pub fn left_mul_p(&self, k: i64) -> WeylOp {
        if k <= 0 {
            return WeylOp::zero(self.wd);
        }
        let pk = PMonomial::power(k as u32, 1);
        WeylOp {
            terms: self.terms.iter().map(|((a, b), c)| ((a.mul(&pk), b.clone()), c.clone())).collect(),
            wd: self.wd,
        }
    }

    /// `p_k^* ∘ self`, exact; zero for `k <= 0`.
    pub fn left_mul_pstar(&self, k: i64) -> WeylOp {
        let mut out = WeylOp::zero(self.wd);
        if k <= 0 {
            return out;
        }
        let k = k as u32;
        let pk = PMonomial::power(k, 1);
        for ((a, b), c) in &self.terms {
            out.add_term(a.clone(), b.mul(&pk), c);
            let e = a.exponent(k);
            if e > 0 {
                out.add_term(a.div(&pk).unwrap(), b.clone(), &c.scale_int((k * e) as i64));
            }
        }
        out
    }

    /// Applies the operator to a polynomial of degree at most the working
    /// degree.
    pub fn apply(&self, f: &PPoly) -> Result<PPoly> {
        if let Some(d) = f.max_degree() {
            if d > self.wd {
                return Err(Error::DegreeBudget { needed: d, available: self.wd });
            }
        }
        let mut out = PPoly::zero();
        for ((a, b), c) in &self.terms {
            for (m, fc) in f.terms() {
                if b.degree() > m.degree() {
                    continue;
                }
                if let Some(factor) = falling_factor(m, b) {
                    let rest = m.div(b).unwrap().mul(a);
                    out.add_term(rest, &(c * fc).scale(&BigRational::from_integer(factor)));
                }
            }
        }
        Ok(out)
    }

    /// `self ∘ other` on inputs of degree at most `other`'s working degree.
    ///
    /// `self` must be valid on everything `other` can produce there.
    pub fn compose(&self, other: &WeylOp) -> Result<WeylOp> {
        let needed = other.reach();
        if self.wd < needed {
            return Err(Error::DegreeBudget { needed, available: self.wd });
        }
        Ok(compose_raw(self, other, other.wd))
    }

    /// `self ∘ other` restricted to inputs of degree at most `d`.
    pub fn compose_at(&self, other: &WeylOp, d: u32) -> Result<WeylOp> {
        if d > other.wd {
            return Err(Error::DegreeBudget { needed: d, available: other.wd });
        }
        let other = other.truncate_unchecked(d);
        let needed = other.reach_at(d);
        if self.wd < needed {
            return Err(Error::DegreeBudget { needed, available: self.wd });
        }
        Ok(compose_raw(self, &other, d))
    }

    /// `[self, other]` restricted to inputs of degree at most `d`.
    pub fn commutator_at(&self, other: &WeylOp, d: u32) -> Result<WeylOp> {
        let a = self.truncate(d)?;
        let b = other.truncate(d)?;
        let ab = self.compose_at(&b, d)?;
        let ba = other.compose_at(&a, d)?;
        Ok(ab.sub(&ba))
    }

    /// `[self, other]` at the largest degree both factors support.
    pub fn commutator(&self, other: &WeylOp) -> Result<WeylOp> {
        let mut d = self.wd.min(other.wd);
        loop {
            let ok = self.wd >= other.truncate_unchecked(d).reach_at(d)
                && other.wd >= self.truncate_unchecked(d).reach_at(d);
            if ok {
                return self.commutator_at(other, d);
            }
            if d == 0 {
                return Err(Error::DegreeBudget { needed: 0, available: 0 });
            }
            d -= 1;
        }
    }

    /// Equality as operators on polynomials of degree at most `d`.
    pub fn equal_at(&self, other: &WeylOp, d: u32) -> bool {
        self.first_difference(other, d).is_none()
    }

    /// Some term where the two operators differ on degree at most `d`.
    pub fn first_difference(&self, other: &WeylOp, d: u32) -> Option<(PMonomial, PMonomial, Coeff)> {
        let diff = self.truncate_unchecked(d).sub(&other.truncate_unchecked(d));
        diff.terms.into_iter().next().map(|((a, b), c)| (a, b, c))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "working_degree": self.wd,
            "homogeneous_degree": self.homogeneous_degree(),
            "terms": self
                .terms
                .iter()
                .map(|((a, b), c)| json!({
                    "create": a.to_json(),
                    "annihilate": b.to_json(),
                    "coeff": c.to_string(),
                }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<WeylOp> {
        let wd = v["working_degree"]
            .as_u64()
            .ok_or_else(|| Error::Parse("missing working_degree".into()))? as u32;
        let terms = v["terms"].as_array().ok_or_else(|| Error::Parse("missing terms".into()))?;
        let mut op = WeylOp::zero(wd);
        for t in terms {
            let a = PMonomial::from_json(&t["create"])?;
            let b = PMonomial::from_json(&t["annihilate"])?;
            let c: Coeff =
                t["coeff"].as_str().ok_or_else(|| Error::Parse("missing coeff".into()))?.parse()?;
            op.add_term(a, b, &c);
        }
        Ok(op)
    }
}

/// `(p^*)^b p^m = factor · p^{m-b}` on a single monomial.
fn falling_factor(m: &PMonomial, b: &PMonomial) -> Option<BigInt> {
    let mut acc = BigInt::from(1);
    for &(i, e) in b.pairs() {
        let have = m.exponent(i);
        if have < e {
            return None;
        }
        for j in 0..e {
            acc *= BigInt::from(i) * BigInt::from(have - j);
        }
    }
    Some(acc)
}

/// Wick product: contract annihilators of `x` against creators of `y`.
fn compose_raw(x: &WeylOp, y: &WeylOp, wd: u32) -> WeylOp {
    let mut acc: FxHashMap<Key, Coeff> = FxHashMap::default();
    for ((a1, b1), c1) in &x.terms {
        for ((a2, b2), c2) in &y.terms {
            let common: Vec<(u32, u32)> = b1
                .pairs()
                .iter()
                .filter_map(|&(i, e)| {
                    let f = a2.exponent(i);
                    (f > 0).then_some((i, e.min(f)))
                })
                .collect();
            let base = b1.degree() + b2.degree();
            let max_contract: u32 = common.iter().map(|&(i, k)| i * k).sum();
            if base - max_contract > wd {
                continue;
            }
            let c12 = c1 * c2;
            let mut kappa = vec![0u32; common.len()];
            loop {
                let contracted: u32 = common.iter().zip(&kappa).map(|(&(i, _), &k)| i * k).sum();
                if base - contracted <= wd {
                    let mut factor = BigInt::from(1);
                    let mut km = Vec::new();
                    for (&(i, _), &k) in common.iter().zip(&kappa) {
                        if k > 0 {
                            factor *= binomial(b1.exponent(i), k)
                                * binomial(a2.exponent(i), k)
                                * factorial(k)
                                * BigInt::from(i).pow(k);
                            km.push((i, k));
                        }
                    }
                    let km = PMonomial::from_pairs(km);
                    let create = a1.mul(&a2.div(&km).unwrap());
                    let annihilate = b1.div(&km).unwrap().mul(b2);
                    let c = if factor == BigInt::from(1) {
                        c12.clone()
                    } else {
                        c12.scale(&BigRational::from_integer(factor))
                    };
                    match acc.entry((create, annihilate)) {
                        std::collections::hash_map::Entry::Vacant(v) => {
                            v.insert(c);
                        }
                        std::collections::hash_map::Entry::Occupied(mut o) => {
                            *o.get_mut() += &c;
                        }
                    }
                }
                // odometer over 0..=max per contracted index
                let mut pos = 0;
                loop {
                    if pos == kappa.len() {
                        break;
                    }
                    if kappa[pos] < common[pos].1 {
                        kappa[pos] += 1;
                        break;
                    }
                    kappa[pos] = 0;
                    pos += 1;
                }
                if pos == kappa.len() {
                    break;
                }
            }
        }
    }
    WeylOp { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(), wd }
}

impl fmt::Display for WeylOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, ((a, b), c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let body = match (a.is_one(), b.is_one()) {
                (true, true) => None,
                (false, true) => Some(a.to_string()),
                (true, false) => Some(b.display_as("d").to_string()),
                (false, false) => Some(format!("{}*{}", a, b.display_as("d"))),
            };
            match &body {
                None => write_scaled(f, c, None)?,
                Some(s) => write_scaled(f, c, Some(s))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Var;
    use proptest::prelude::*;

    fn p(i: i64, wd: u32) -> WeylOp {
        WeylOp::creation(i, wd)
    }

    fn ps(i: i64, wd: u32) -> WeylOp {
        WeylOp::annihilation(i, wd)
    }

    #[test]
    fn canonical_commutation() {
        for i in 1..5 {
            for j in 1..5 {
                let c = ps(i, 12).commutator_at(&p(j, 12), 6).unwrap();
                let expect = if i == j { WeylOp::scalar(Coeff::from_int(i), 6) } else { WeylOp::zero(6) };
                assert_eq!(c, expect, "[p*_{i}, p_{j}]");
            }
        }
    }

    #[test]
    fn p_zero_is_zero() {
        assert!(p(0, 4).is_zero());
        assert!(ps(0, 4).is_zero());
        assert!(ps(-1, 4).is_zero());
    }

    #[test]
    fn annihilators_beyond_budget_vanish() {
        assert!(ps(5, 4).is_zero());
        assert!(!ps(4, 4).is_zero());
    }

    #[test]
    fn apply_matches_derivative() {
        let f = &(&PPoly::p(2) * &PPoly::p(2)) * &PPoly::p(1);
        assert_eq!(ps(2, 6).apply(&f).unwrap(), f.pstar(2));
        assert_eq!(p(3, 6).apply(&PPoly::p(1)).unwrap(), &PPoly::p(3) * &PPoly::p(1));
        assert!(ps(1, 2).apply(&PPoly::p(3)).is_err());
    }

    #[test]
    fn compose_checks_budget() {
        let x = p(3, 4);
        let y = ps(1, 4);
        assert!(y.compose(&x).is_err());
        assert!(ps(1, 7).compose(&x).is_ok());
    }

    #[test]
    fn euler_operator_counts_degree() {
        let wd = 6;
        let mut e = WeylOp::zero(wd);
        for i in 1..=wd as i64 {
            e.add_assign(&p(i, wd).compose_at(&ps(i, wd), wd).unwrap());
        }
        let f = &(&PPoly::p(2) * &PPoly::p(1)) + &PPoly::p(3);
        assert_eq!(e.apply(&f).unwrap(), f.scale(&Coeff::from_int(3)));
        assert_eq!(e.homogeneous_degree(), Some(0));
    }

    #[test]
    fn json_round_trip() {
        let op = p(2, 5)
            .compose(&ps(1, 5))
            .unwrap()
            .scale(&Coeff::var(Var::B))
            .add(&WeylOp::scalar(Coeff::inv_one_plus_b_pow(1), 5));
        let v = op.to_json();
        assert_eq!(WeylOp::from_json(&v).unwrap(), op);
        assert_eq!(v["homogeneous_degree"], Value::Null);
    }

    #[test]
    fn display() {
        let op = p(2, 5).compose(&ps(1, 5)).unwrap().scale(&Coeff::var(Var::B));
        assert_eq!(op.to_string(), "b*p2*d1");
    }

    fn arb_op(wd: u32) -> impl Strategy<Value = WeylOp> {
        let mono = || prop::collection::vec((1u32..4, 1u32..3), 0..2).prop_map(PMonomial::from_pairs);
        prop::collection::vec((mono(), mono(), -3i64..4), 0..4).prop_map(move |ts| {
            WeylOp::from_terms(ts.into_iter().map(|(a, b, c)| (a, b, Coeff::from_int(c))), wd)
        })
    }

    fn arb_poly(maxdeg: u32) -> impl Strategy<Value = PPoly> {
        prop::collection::vec((prop::collection::vec(1u32..4, 0..3), -3i64..4), 0..4).prop_map(
            move |ts| {
                PPoly::from_terms(
                    ts.into_iter()
                        .map(|(parts, c)| (PMonomial::from_parts(&parts), Coeff::from_int(c)))
                        .filter(|(m, _)| m.degree() <= maxdeg),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn composition_is_operator_product(x in arb_op(30), y in arb_op(10), f in arb_poly(4)) {
            let y4 = y.truncate(4).unwrap();
            let xy = x.compose_at(&y4, 4).unwrap();
            prop_assert_eq!(xy.apply(&f).unwrap(), x.apply(&y4.apply(&f).unwrap()).unwrap());
        }

        #[test]
        fn composition_associative(x in arb_op(40), y in arb_op(40), z in arb_op(40)) {
            let d = 4;
            let yz = y.compose_at(&z, d).unwrap();
            let xy = x.compose_at(&y, 20).unwrap();
            prop_assert!(x.compose_at(&yz, d).unwrap().equal_at(&xy.compose_at(&z, d).unwrap(), d));
        }

        #[test]
        fn jacobi_identity(x in arb_op(40), y in arb_op(40), z in arb_op(40)) {
            let d = 3;
            let c = |a: &WeylOp, b: &WeylOp, d: u32| a.commutator_at(b, d).unwrap();
            let j = c(&x, &c(&y, &z, 20), d)
                .add(&c(&y, &c(&z, &x, 20), d))
                .add(&c(&z, &c(&x, &y, 20), d));
            prop_assert!(j.is_zero());
        }

        #[test]
        fn commutator_antisymmetric(x in arb_op(20), y in arb_op(20)) {
            let a = x.commutator_at(&y, 6).unwrap();
            let b = y.commutator_at(&x, 6).unwrap();
            prop_assert_eq!(a, b.neg());
        }

        #[test]
        fn homogeneous_degree_adds(i in 1i64..4, j in 1i64..4, k in 1i64..4) {
            let x = p(i, 20).compose_at(&ps(j, 20), 10).unwrap();
            let y = p(k, 20).compose_at(&ps(i, 20), 10).unwrap();
            let xy = x.compose_at(&y, 8).unwrap();
            if !xy.is_zero() {
                prop_assert_eq!(xy.homogeneous_degree(), Some(i - j + k - i));
            }
        }
    }
}
