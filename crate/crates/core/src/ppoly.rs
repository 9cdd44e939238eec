//! Sparse polynomials in the power-sum variables `p_1, p_2, ...` with
//! [`Coeff`] scalars, graded by `deg(p_i) = i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::coeff::Coeff;
use crate::error::{Error, Result};

/// Finitely supported exponent vector `i -> e_i` over `p_1, p_2, ...`.
///
/// Stored as `(index, exponent)` pairs sorted by index; zero exponents are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PMonomial {
    exps: Vec<(u32, u32)>,
}

impl PMonomial {
    pub fn one() -> PMonomial {
        PMonomial::default()
    }

    /// `p_i^e`; `i` must be positive.
    pub fn power(i: u32, e: u32) -> PMonomial {
        assert!(i >= 1, "p_0 does not exist");
        if e == 0 {
            PMonomial::one()
        } else {
            PMonomial { exps: vec![(i, e)] }
        }
    }

    /// Builds a monomial from `(index, exponent)` pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> PMonomial {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (i, e) in pairs {
            assert!(i >= 1, "p_0 does not exist");
            *map.entry(i).or_default() += e;
        }
        PMonomial { exps: map.into_iter().filter(|&(_, e)| e > 0).collect() }
    }

    /// The power-sum monomial `p_λ` of a partition given by its parts.
    pub fn from_parts(parts: &[u32]) -> PMonomial {
        PMonomial::from_pairs(parts.iter().map(|&i| (i, 1)))
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(i, e)| i * e).sum()
    }

    pub fn exponent(&self, i: u32) -> u32 {
        match self.exps.binary_search_by_key(&i, |&(k, _)| k) {
            Ok(pos) => self.exps[pos].1,
            Err(_) => 0,
        }
    }

    /// Parts of the partition this monomial encodes, largest first.
    pub fn parts(&self) -> Vec<u32> {
        let mut parts: Vec<u32> =
            self.exps.iter().flat_map(|&(i, e)| std::iter::repeat_n(i, e as usize)).collect();
        parts.reverse();
        parts
    }

    pub fn mul(&self, other: &PMonomial) -> PMonomial {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut a, mut b) = (0, 0);
        while a < self.exps.len() && b < other.exps.len() {
            let (ia, ea) = self.exps[a];
            let (ib, eb) = other.exps[b];
            match ia.cmp(&ib) {
                Ordering::Less => {
                    out.push((ia, ea));
                    a += 1;
                }
                Ordering::Greater => {
                    out.push((ib, eb));
                    b += 1;
                }
                Ordering::Equal => {
                    out.push((ia, ea + eb));
                    a += 1;
                    b += 1;
                }
            }
        }
        out.extend_from_slice(&self.exps[a..]);
        out.extend_from_slice(&other.exps[b..]);
        PMonomial { exps: out }
    }

    /// `self / other`, `None` unless `other` divides `self`.
    pub fn div(&self, other: &PMonomial) -> Option<PMonomial> {
        let mut out = Vec::with_capacity(self.exps.len());
        let mut b = 0;
        for &(i, e) in &self.exps {
            let mut e = e;
            if b < other.exps.len() && other.exps[b].0 == i {
                let d = other.exps[b].1;
                if d > e {
                    return None;
                }
                e -= d;
                b += 1;
            }
            if e > 0 {
                out.push((i, e));
            }
        }
        (b == other.exps.len()).then_some(PMonomial { exps: out })
    }

    pub(crate) fn to_json(&self) -> Value {
        Value::Array(self.exps.iter().map(|&(i, e)| json!([i, e])).collect())
    }

    pub(crate) fn from_json(v: &Value) -> Result<PMonomial> {
        let bad = || Error::Parse(format!("bad monomial {v}"));
        let arr = v.as_array().ok_or_else(bad)?;
        let mut pairs = Vec::with_capacity(arr.len());
        for pair in arr {
            let p = pair.as_array().ok_or_else(bad)?;
            if p.len() != 2 {
                return Err(bad());
            }
            let i = p[0].as_u64().ok_or_else(bad)? as u32;
            let e = p[1].as_u64().ok_or_else(bad)? as u32;
            if i == 0 {
                return Err(bad());
            }
            pairs.push((i, e));
        }
        Ok(PMonomial::from_pairs(pairs))
    }

    fn write_with(&self, f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
        let mut first = true;
        for &(i, e) in &self.exps {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}{i}")?;
            } else {
                write!(f, "{name}{i}^{e}")?;
            }
        }
        Ok(())
    }

    /// Writes the monomial with a custom variable stem, e.g. `d` for
    /// annihilators.
    pub(crate) fn display_as<'a>(&'a self, stem: &'a str) -> impl fmt::Display + 'a {
        struct D<'a>(&'a PMonomial, &'a str);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_with(f, self.1)
            }
        }
        D(self, stem)
    }
}

/// Graded-lex: total degree first, then the exponent list.
impl Ord for PMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for PMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        self.write_with(f, "p")
    }
}

/// A [`Coeff`]-linear combination of [`PMonomial`]s.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PPoly {
    terms: BTreeMap<PMonomial, Coeff>,
}

impl PPoly {
    pub fn zero() -> PPoly {
        PPoly::default()
    }

    pub fn one() -> PPoly {
        PPoly::constant(Coeff::one())
    }

    pub fn constant(c: Coeff) -> PPoly {
        PPoly::monomial(PMonomial::one(), c)
    }

    pub fn monomial(m: PMonomial, c: Coeff) -> PPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        PPoly { terms }
    }

    /// The variable `p_i`; zero for `i <= 0`.
    pub fn p(i: i64) -> PPoly {
        if i <= 0 {
            PPoly::zero()
        } else {
            PPoly::monomial(PMonomial::power(i as u32, 1), Coeff::one())
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (PMonomial, Coeff)>) -> PPoly {
        let mut out = PPoly::zero();
        for (m, c) in terms {
            out.add_term(m, &c);
        }
        out
    }

    pub fn add_term(&mut self, m: PMonomial, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMonomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &PMonomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Largest degree of a stored monomial; `None` for the zero polynomial.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(PMonomial::degree).max()
    }

    pub fn degree_slice(&self, d: u32) -> PPoly {
        PPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// True when every monomial has degree `d` (vacuously for zero).
    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.keys().all(|m| m.degree() == d)
    }

    pub fn scale(&self, s: &Coeff) -> PPoly {
        if s.is_zero() {
            return PPoly::zero();
        }
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn scale_rational(&self, s: &BigRational) -> PPoly {
        PPoly::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.scale(s))))
    }

    pub fn mul_monomial(&self, m: &PMonomial) -> PPoly {
        PPoly { terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect() }
    }

    /// `p_i^* f = i * df/dp_i`; zero for `i <= 0`.
    pub fn pstar(&self, i: i64) -> PPoly {
        if i <= 0 {
            return PPoly::zero();
        }
        let i = i as u32;
        let mut out = PPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e > 0 {
                let rest = m.div(&PMonomial::power(i, 1)).unwrap();
                out.add_term(rest, &c.scale_int((i * e) as i64));
            }
        }
        out
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Coeff) -> Result<Coeff>) -> Result<PPoly> {
        let mut out = PPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c)?);
        }
        Ok(out)
    }

    /// Largest `(1+b)` denominator exponent among the coefficients.
    pub fn max_denom_pow(&self) -> u32 {
        self.terms.values().map(Coeff::denom_pow).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| json!({"monomial": m.to_json(), "coeff": c.to_string()}))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<PPoly> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("expected a term list".into()))?;
        let mut out = PPoly::zero();
        for t in arr {
            let m = PMonomial::from_json(&t["monomial"])?;
            let c: Coeff = t["coeff"]
                .as_str()
                .ok_or_else(|| Error::Parse("missing coeff".into()))?
                .parse()?;
            out.add_term(m, &c);
        }
        Ok(out)
    }
}

pub(crate) fn write_scaled(
    f: &mut fmt::Formatter<'_>,
    c: &Coeff,
    body: Option<&dyn fmt::Display>,
) -> fmt::Result {
    let plain = c.denom_pow() == 0 && c.numerator_len() == 1;
    match body {
        None => {
            if plain {
                write!(f, "{c}")
            } else {
                write!(f, "({c})")
            }
        }
        Some(body) if c.is_one() => write!(f, "{body}"),
        Some(body) if (-c).is_one() => write!(f, "-{body}"),
        Some(body) if plain => write!(f, "{c}*{body}"),
        Some(body) => write!(f, "({c})*{body}"),
    }
}

impl fmt::Display for PPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write_scaled(f, c, None)?;
            } else {
                write_scaled(f, c, Some(m))?;
            }
        }
        Ok(())
    }
}

impl Add<&PPoly> for &PPoly {
    type Output = PPoly;

    fn add(self, rhs: &PPoly) -> PPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub<&PPoly> for &PPoly {
    type Output = PPoly;

    fn sub(self, rhs: &PPoly) -> PPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }
}

impl Neg for &PPoly {
    type Output = PPoly;

    fn neg(self) -> PPoly {
        PPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul<&PPoly> for &PPoly {
    type Output = PPoly;

    fn mul(self, rhs: &PPoly) -> PPoly {
        let mut out = PPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, j| acc * BigInt::from(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Var;
    use proptest::prelude::*;

    fn p(i: i64) -> PPoly {
        PPoly::p(i)
    }

    #[test]
    fn products_and_sums() {
        let p1sq = &p(1) * &p(1);
        assert_eq!(p1sq, PPoly::monomial(PMonomial::power(1, 2), Coeff::one()));
        let x = &(&p(2) + &p1sq) + &(-&p1sq);
        assert_eq!(x, p(2));
        let y = &p(2) * &p(3);
        assert_eq!(y.max_degree(), Some(5));
        assert!(y.is_homogeneous(5));
    }

    #[test]
    fn slices() {
        let f = &(&p(1) * &p(1)) + &p(3);
        assert_eq!(f.degree_slice(2), &p(1) * &p(1));
        assert_eq!(f.degree_slice(3), p(3));
        assert_eq!(PPoly::one().degree_slice(0), PPoly::one());
        assert!(!f.is_homogeneous(2));
    }

    #[test]
    fn p_zero_and_negative_vanish() {
        assert!(p(0).is_zero());
        assert!(p(-2).is_zero());
        assert!(p(3).pstar(0).is_zero());
    }

    #[test]
    fn pstar_is_scaled_derivative() {
        let f = &(&p(2) * &p(2)) * &p(1);
        // p_2^* (p_2^2 p_1) = 2 * 2 p_2 p_1
        let expect = (&p(2) * &p(1)).scale(&Coeff::from_int(4));
        assert_eq!(f.pstar(2), expect);
    }

    #[test]
    fn monomial_division() {
        let m = PMonomial::from_pairs([(1, 2), (3, 1)]);
        assert_eq!(m.div(&PMonomial::power(1, 1)), Some(PMonomial::from_pairs([(1, 1), (3, 1)])));
        assert_eq!(m.div(&PMonomial::power(2, 1)), None);
        assert_eq!(m.div(&PMonomial::power(1, 3)), None);
        assert_eq!(PMonomial::from_parts(&[3, 1, 1]), m);
        assert_eq!(m.parts(), vec![3, 1, 1]);
    }

    #[test]
    fn json_round_trip() {
        let f = &(&p(1) * &p(1)).scale(&"u1*u2/(1+b)^1".parse().unwrap()) + &p(2);
        let v = f.to_json();
        assert_eq!(
            v.to_string(),
            r#"[{"coeff":"u1*u2/(1+b)^1","monomial":[[1,2]]},{"coeff":"1","monomial":[[2,1]]}]"#
        );
        assert_eq!(PPoly::from_json(&v).unwrap(), f);
    }

    #[test]
    fn display() {
        let f = &(&p(1) * &p(1)).scale(&"u1*u2/(1+b)^1".parse().unwrap()) + &p(2).scale(&Coeff::var(Var::B));
        assert_eq!(f.to_string(), "(u1*u2/(1+b)^1)*p1^2 + b*p2");
    }

    fn arb_ppoly() -> impl Strategy<Value = PPoly> {
        let term = (prop::collection::vec((1u32..4, 1u32..3), 0..3), -3i64..4, 0u8..2);
        prop::collection::vec(term, 0..4).prop_map(|ts| {
            PPoly::from_terms(ts.into_iter().map(|(pairs, k, eb)| {
                (PMonomial::from_pairs(pairs), Coeff::from_int(k) * Coeff::var(Var::B).pow(eb as u32))
            }))
        })
    }

    proptest! {
        #[test]
        fn mul_commutative_associative(a in arb_ppoly(), b in arb_ppoly(), c in arb_ppoly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn partition_monomials_have_partition_degree(parts in prop::collection::vec(1u32..7, 0..6)) {
            let m = PMonomial::from_parts(&parts);
            prop_assert_eq!(m.degree(), parts.iter().sum::<u32>());
        }

        #[test]
        fn homogeneous_products(d1 in 0u32..5, d2 in 0u32..5, a in arb_ppoly(), b in arb_ppoly()) {
            let (a, b) = (a.degree_slice(d1), b.degree_slice(d2));
            prop_assert!((&a * &b).is_homogeneous(d1 + d2));
        }
    }
}
