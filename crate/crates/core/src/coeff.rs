//! Exact scalars of the engine.
//!
//! A [`Coeff`] is a polynomial with rational coefficients in the seven
//! parameters `b, u1, u2, u3, q1, q2, q3`, divided by a power of `(1+b)`.
//! Values are kept canonical: the numerator is never divisible by `(1+b)`
//! while the stored exponent is positive, so structural equality is equality
//! of rational functions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// The symbolic parameters a [`Coeff`] may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    B,
    U1,
    U2,
    U3,
    Q1,
    Q2,
    Q3,
}

impl Var {
    pub const ALL: [Var; 7] = [Var::B, Var::U1, Var::U2, Var::U3, Var::Q1, Var::Q2, Var::Q3];

    pub fn name(self) -> &'static str {
        match self {
            Var::B => "b",
            Var::U1 => "u1",
            Var::U2 => "u2",
            Var::U3 => "u3",
            Var::Q1 => "q1",
            Var::Q2 => "q2",
            Var::Q3 => "q3",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }

    /// `u1`, `u2`, `u3` for `index` 1..=3.
    pub fn u(index: usize) -> Var {
        [Var::U1, Var::U2, Var::U3][index - 1]
    }

    /// `q1`, `q2`, `q3` for `index` 1..=3.
    pub fn q(index: usize) -> Var {
        [Var::Q1, Var::Q2, Var::Q3][index - 1]
    }

    fn shift(self) -> u32 {
        8 * (6 - self as u32)
    }
}

/// Packed exponent vector, one byte per variable with `b` most significant,
/// so that integer order is lexicographic order on `(b, u1, .., q3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Exponent(u64);

const CARRY_BITS: u64 = 0x0101_0101_0101_0100;
const B_MASK: u64 = 0xff << 48;

impl Exponent {
    pub(crate) const ONE: Exponent = Exponent(0);

    pub(crate) fn of(var: Var, e: u8) -> Exponent {
        Exponent((e as u64) << var.shift())
    }

    pub(crate) fn get(self, var: Var) -> u8 {
        ((self.0 >> var.shift()) & 0xff) as u8
    }

    pub(crate) fn b_degree(self) -> u32 {
        self.get(Var::B) as u32
    }

    pub(crate) fn without_b(self) -> Exponent {
        Exponent(self.0 & !B_MASK)
    }

    pub(crate) fn without(self, var: Var) -> Exponent {
        Exponent(self.0 & !(0xff << var.shift()))
    }

    pub(crate) fn checked_mul(self, other: Exponent) -> Result<Exponent> {
        let sum = self.0.checked_add(other.0).ok_or(Error::ExponentOverflow)?;
        if (self.0 ^ other.0 ^ sum) & CARRY_BITS != 0 {
            return Err(Error::ExponentOverflow);
        }
        Ok(Exponent(sum))
    }

    fn mul(self, other: Exponent) -> Exponent {
        self.checked_mul(other).expect("parameter exponent exceeds 255")
    }
}

/// Sparse polynomial in the seven parameters; terms sorted by exponent, no
/// zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub(crate) struct Poly {
    terms: Vec<(Exponent, BigRational)>,
}

impl Poly {
    fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    fn constant(c: BigRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Exponent::ONE, c)] }
        }
    }

    fn from_map(map: impl IntoIterator<Item = (Exponent, BigRational)>) -> Poly {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by_key(|(e, _)| *e);
        Poly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut a, mut b) = (self.terms.iter().peekable(), other.terms.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((ea, ca)), Some((eb, cb))) => {
                    if ea < eb {
                        out.push((*ea, ca.clone()));
                        a.next();
                    } else if eb < ea {
                        out.push((*eb, cb.clone()));
                        b.next();
                    } else {
                        let s = ca + cb;
                        if !s.is_zero() {
                            out.push((*ea, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(_), None) => {
                    out.extend(a.cloned());
                    break;
                }
                (None, Some(_)) => {
                    out.extend(b.cloned());
                    break;
                }
                (None, None) => break,
            }
        }
        Poly { terms: out }
    }

    fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    fn scale(&self, s: &BigRational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            let (e0, c0) = &self.terms[0];
            return Poly {
                terms: other.terms.iter().map(|(e, c)| (e0.mul(*e), c0 * c)).collect(),
            };
        }
        if other.terms.len() == 1 {
            return other.mul(self);
        }
        let mut acc: FxHashMap<Exponent, BigRational> = FxHashMap::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let prod = ca * cb;
                acc.entry(ea.mul(*eb))
                    .and_modify(|c| *c += &prod)
                    .or_insert(prod);
            }
        }
        Poly::from_map(acc)
    }

    /// Multiplication by `(1+b)`.
    fn mul_one_plus_b(&self) -> Poly {
        let shifted = Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.mul(Exponent::of(Var::B, 1)), c.clone()))
                .collect(),
        };
        self.add(&shifted)
    }

    /// Exact division by `(1+b)`, `None` when it does not divide.
    fn div_one_plus_b(&self) -> Option<Poly> {
        let mut groups: BTreeMap<Exponent, Vec<BigRational>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e.b_degree() as usize;
            let dense = groups.entry(e.without_b()).or_default();
            if dense.len() <= d {
                dense.resize(d + 1, BigRational::zero());
            }
            dense[d] = c.clone();
        }
        let mut out = Vec::new();
        for (rest, dense) in groups {
            let d = dense.len() - 1;
            if d == 0 {
                return None;
            }
            // synthetic division by (b - (-1))
            let mut quot = vec![BigRational::zero(); d];
            quot[d - 1] = dense[d].clone();
            for k in (1..d).rev() {
                quot[k - 1] = &dense[k] - &quot[k];
            }
            if dense[0] != quot[0] {
                return None;
            }
            for (k, c) in quot.into_iter().enumerate() {
                if !c.is_zero() {
                    out.push((rest.mul(Exponent::of(Var::B, k as u8)), c));
                }
            }
        }
        out.sort_by_key(|(e, _)| *e);
        Some(Poly { terms: out })
    }

    /// Exact division by the polynomial `Σ_k r[k] b^k`, `None` when it does not divide.
    fn div_b_polynomial(&self, r: &[BigRational]) -> Option<Poly> {
        let dr = r.iter().rposition(|c| !c.is_zero())?;
        let lead = &r[dr];
        let mut groups: BTreeMap<Exponent, Vec<BigRational>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e.b_degree() as usize;
            let dense = groups.entry(e.without_b()).or_default();
            if dense.len() <= d {
                dense.resize(d + 1, BigRational::zero());
            }
            dense[d] = c.clone();
        }
        let mut out = Vec::new();
        for (rest, mut dense) in groups {
            if dense.len() <= dr {
                return None;
            }
            let dq = dense.len() - 1 - dr;
            let mut quot = vec![BigRational::zero(); dq + 1];
            for k in (0..=dq).rev() {
                let c = &dense[k + dr] / lead;
                for (j, rj) in r.iter().enumerate().take(dr + 1) {
                    dense[k + j] -= &c * rj;
                }
                quot[k] = c;
            }
            if dense.iter().any(|c| !c.is_zero()) {
                return None;
            }
            for (k, c) in quot.into_iter().enumerate() {
                if !c.is_zero() {
                    out.push((rest.mul(Exponent::of(Var::B, k as u8)), c));
                }
            }
        }
        out.sort_by_key(|(e, _)| *e);
        Some(Poly { terms: out })
    }

    fn mul_one_plus_b_pow(&self, k: u32) -> Poly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.mul_one_plus_b();
        }
        p
    }
}

/// Exact scalar `numerator / (1+b)^denom_pow` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    num: Poly,
    den: u32,
}

impl Coeff {
    pub fn zero() -> Coeff {
        Coeff::default()
    }

    pub fn one() -> Coeff {
        Coeff::from_int(1)
    }

    pub fn from_int(n: i64) -> Coeff {
        Coeff { num: Poly::constant(BigRational::from_integer(BigInt::from(n))), den: 0 }
    }

    pub fn from_rational(r: BigRational) -> Coeff {
        Coeff { num: Poly::constant(r), den: 0 }
    }

    pub fn var(v: Var) -> Coeff {
        Coeff {
            num: Poly { terms: vec![(Exponent::of(v, 1), BigRational::one())] },
            den: 0,
        }
    }

    /// `1 + b`.
    pub fn one_plus_b() -> Coeff {
        Coeff::one() + Coeff::var(Var::B)
    }

    /// `1 / (1+b)^k`.
    pub fn inv_one_plus_b_pow(k: u32) -> Coeff {
        Coeff { num: Poly::constant(BigRational::one()), den: k }
    }

    pub(crate) fn from_parts(num: Poly, den: u32) -> Coeff {
        let mut c = Coeff { num, den };
        c.canonicalize();
        c
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den == 0
            && self.num.terms.len() == 1
            && self.num.terms[0].0 == Exponent::ONE
            && self.num.terms[0].1.is_one()
    }

    /// Exponent `e` of the denominator `(1+b)^e`.
    pub fn denom_pow(&self) -> u32 {
        self.den
    }

    /// Number of monomials in the numerator.
    pub fn numerator_len(&self) -> usize {
        self.num.terms.len()
    }

    /// The value as a rational constant, if it does not depend on any
    /// parameter.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.num.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(e, c)] if *e == Exponent::ONE && self.den == 0 => Some(c.clone()),
            _ => None,
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        (var == Var::B && self.den > 0) || self.num.terms.iter().any(|(e, _)| e.get(var) > 0)
    }

    /// Checks the canonical-form invariant. Always true for values built
    /// through the public API.
    pub fn is_canonical(&self) -> bool {
        let sorted = self.num.terms.windows(2).all(|w| w[0].0 < w[1].0);
        let no_zero = self.num.terms.iter().all(|(_, c)| !c.is_zero());
        let reduced = self.den == 0 || self.num.div_one_plus_b().is_none();
        let zero_ok = !self.num.is_zero() || self.den == 0;
        sorted && no_zero && reduced && zero_ok
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.den = 0;
            return;
        }
        while self.den > 0 {
            match self.num.div_one_plus_b() {
                Some(q) => {
                    self.num = q;
                    self.den -= 1;
                }
                None => break,
            }
        }
    }

    /// Returns the canonical representative; idempotent.
    pub fn canonicalized(&self) -> Coeff {
        let mut c = self.clone();
        c.canonicalize();
        c
    }

    pub fn scale(&self, s: &BigRational) -> Coeff {
        Coeff { num: self.num.scale(s), den: if s.is_zero() { 0 } else { self.den } }
    }

    pub fn scale_int(&self, n: i64) -> Coeff {
        self.scale(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact division by the polynomial `Σ_k r[k] b^k`.
    ///
    /// Fails with [`Error::ForeignDenominator`] unless the numerator is divisible.
    pub fn div_b_polynomial(&self, r: &[BigRational]) -> Result<Coeff> {
        if r.iter().all(Zero::is_zero) {
            return Err(Error::InvalidArgument("division by the zero polynomial".into()));
        }
        let num = self
            .num
            .div_b_polynomial(r)
            .ok_or_else(|| Error::ForeignDenominator(format!("{self} is not divisible by {}", b_poly_string(r))))?;
        Ok(Coeff::from_parts(num, self.den))
    }

    /// Division by `(1+b)^k`.
    pub fn div_one_plus_b_pow(&self, k: u32) -> Coeff {
        Coeff::from_parts(self.num.clone(), self.den + k)
    }

    pub fn pow(&self, k: u32) -> Coeff {
        let mut acc = Coeff::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Full evaluation to a rational number. Every variable the value depends
    /// on must be assigned.
    pub fn eval(&self, assignment: &BTreeMap<Var, BigRational>) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (e, c) in &self.num.terms {
            let mut term = c.clone();
            for v in Var::ALL {
                let k = e.get(v);
                if k > 0 {
                    let x = assignment.get(&v).ok_or(Error::UnassignedVariable(v.name()))?;
                    term *= rational_pow(x, k as u32);
                }
            }
            total += term;
        }
        if self.den > 0 {
            let b = assignment.get(&Var::B).ok_or(Error::UnassignedVariable("b"))?;
            let base = BigRational::one() + b;
            if base.is_zero() {
                return Err(Error::DivisionByZero);
            }
            total /= rational_pow(&base, self.den);
        }
        Ok(total)
    }

    /// Partial evaluation: replaces one variable by a rational value.
    pub fn substitute(&self, var: Var, value: &BigRational) -> Result<Coeff> {
        let mut acc: FxHashMap<Exponent, BigRational> = FxHashMap::default();
        for (e, c) in &self.num.terms {
            let k = e.get(var) as u32;
            let term = c * rational_pow(value, k);
            *acc.entry(e.without(var)).or_insert_with(BigRational::zero) += term;
        }
        let num = Poly::from_map(acc);
        if var == Var::B {
            let base = BigRational::one() + value;
            if self.den > 0 && base.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let scale = BigRational::one() / rational_pow(&base, self.den);
            Ok(Coeff { num: num.scale(&scale), den: 0 })
        } else {
            Ok(Coeff::from_parts(num, self.den))
        }
    }

    fn write_numerator(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.num.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || *e == Exponent::ONE {
                factors.push(abs.to_string());
            }
            for v in Var::ALL {
                match e.get(v) {
                    0 => {}
                    1 => factors.push(v.name().to_string()),
                    k => factors.push(format!("{}^{}", v.name(), k)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

fn rational_pow(x: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

impl fmt::Display for Coeff {
    /// Expanded numerator, highest monomial first, with an explicit
    /// `/(1+b)^e` suffix when the denominator is non-trivial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 0 {
            return self.write_numerator(f);
        }
        if self.num.terms.len() > 1 {
            write!(f, "(")?;
            self.write_numerator(f)?;
            write!(f, ")")?;
        } else {
            self.write_numerator(f)?;
        }
        write!(f, "/(1+b)^{}", self.den)
    }
}

impl FromStr for Coeff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Coeff> {
        CoeffParser::new(s).parse()
    }
}

struct CoeffParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> CoeffParser<'a> {
    fn new(src: &'a str) -> Self {
        CoeffParser { src, pos: 0 }
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at byte {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let save = self.pos;
        for ch in s.chars().filter(|c| !c.is_whitespace()) {
            if !self.eat(ch) {
                self.pos = save;
                return false;
            }
        }
        true
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            self.src[start..self.pos].parse().ok()
        }
    }

    fn identifier(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        (start != self.pos).then(|| &self.src[start..self.pos])
    }

    fn parse(mut self) -> Result<Coeff> {
        let value = self.sum()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("trailing input"));
        }
        Ok(value)
    }

    fn exponent(&mut self) -> Result<u32> {
        if !self.eat('^') {
            return Ok(1);
        }
        let e = self.integer().ok_or_else(|| self.err("expected exponent"))?;
        u32::try_from(e).map_err(|_| self.err("exponent out of range"))
    }

    fn sum(&mut self) -> Result<Coeff> {
        let mut acc = Coeff::zero();
        let mut first = true;
        loop {
            let negative = if self.eat('-') {
                true
            } else if self.eat('+') || first {
                false
            } else {
                break;
            };
            let t = self.term()?;
            acc = if negative { &acc - &t } else { &acc + &t };
            first = false;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Coeff> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.factor()?;
            } else if self.eat_str("/(1+b)") {
                let k = self.exponent()?;
                acc = acc.div_one_plus_b_pow(k);
            } else if self.eat('/') {
                let d = self.integer().ok_or_else(|| self.err("expected an integer or (1+b) divisor"))?;
                if d.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                acc = acc.scale(&BigRational::new(BigInt::one(), d));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Coeff> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Coeff::from_rational(BigRational::from_integer(self.integer().unwrap()))),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.identifier().unwrap();
                let var = Var::from_name(name).ok_or_else(|| self.err(&format!("unknown variable {name:?}")))?;
                let k = self.exponent()?;
                let k = u8::try_from(k).map_err(|_| Error::ExponentOverflow)?;
                Ok(Coeff { num: Poly { terms: vec![(Exponent::of(var, k), BigRational::one())] }, den: 0 })
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                let k = self.exponent()?;
                Ok(inner.pow(k))
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}

impl Add<&Coeff> for &Coeff {
    type Output = Coeff;

    fn add(self, rhs: &Coeff) -> Coeff {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let den = self.den.max(rhs.den);
        let a = self.num.mul_one_plus_b_pow(den - self.den);
        let b = rhs.num.mul_one_plus_b_pow(den - rhs.den);
        Coeff::from_parts(a.add(&b), den)
    }
}

impl Add for Coeff {
    type Output = Coeff;

    fn add(self, rhs: Coeff) -> Coeff {
        &self + &rhs
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        *self = &*self + rhs;
    }
}

impl Neg for &Coeff {
    type Output = Coeff;

    fn neg(self) -> Coeff {
        Coeff { num: self.num.neg(), den: self.den }
    }
}

impl Neg for Coeff {
    type Output = Coeff;

    fn neg(self) -> Coeff {
        -&self
    }
}

impl Sub<&Coeff> for &Coeff {
    type Output = Coeff;

    fn sub(self, rhs: &Coeff) -> Coeff {
        self + &(-rhs)
    }
}

impl Sub for Coeff {
    type Output = Coeff;

    fn sub(self, rhs: Coeff) -> Coeff {
        &self - &rhs
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, rhs: &Coeff) {
        *self = &*self - rhs;
    }
}

impl Mul<&Coeff> for &Coeff {
    type Output = Coeff;

    fn mul(self, rhs: &Coeff) -> Coeff {
        if self.is_zero() || rhs.is_zero() {
            return Coeff::zero();
        }
        let num = self.num.mul(&rhs.num);
        let den = self.den + rhs.den;
        // (1+b) is prime, so a product of two reduced numerators stays reduced.
        if den > 0 && (self.den == 0 || rhs.den == 0) {
            Coeff::from_parts(num, den)
        } else {
            Coeff { num, den }
        }
    }
}

impl Mul for Coeff {
    type Output = Coeff;

    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Coeff {
        Coeff::from_int(n)
    }
}

fn b_poly_string(r: &[BigRational]) -> String {
    let terms: Vec<String> = r
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| match k {
            0 => format!("{c}"),
            1 => format!("{c}*b"),
            _ => format!("{c}*b^{k}"),
        })
        .collect();
    format!("({})", terms.join(" + "))
}

/// Elementary symmetric polynomial `e_k(vars)` as a [`Coeff`].
pub fn elementary_symmetric(k: usize, vars: &[Var]) -> Coeff {
    // e_k via the generating product prod (1 + x_i z)
    let mut e = vec![Coeff::one()];
    for &v in vars {
        let x = Coeff::var(v);
        let mut next = e.clone();
        next.push(Coeff::zero());
        for j in 0..e.len() {
            next[j + 1] = &next[j + 1] + &(&e[j] * &x);
        }
        e = next;
    }
    e.get(k).cloned().unwrap_or_default()
}

/// Parses a rational literal such as `3`, `-1/2`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> Coeff {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sum_cancels_denominator() {
        let x = Coeff::inv_one_plus_b_pow(1);
        let y = &Coeff::var(Var::B) * &Coeff::inv_one_plus_b_pow(1);
        assert_eq!(&x + &y, Coeff::one());
    }

    #[test]
    fn additive_identity() {
        let x = &(&Coeff::var(Var::U1) * &Coeff::var(Var::U2)) * &Coeff::inv_one_plus_b_pow(1);
        assert_eq!(&x + &Coeff::zero(), x);
        assert_eq!(x.to_string(), "u1*u2/(1+b)^1");
    }

    #[test]
    fn b_plus_one() {
        assert_eq!(Coeff::var(Var::B) + Coeff::one(), Coeff::one_plus_b());
        assert_eq!(Coeff::one_plus_b().to_string(), "b + 1");
    }

    #[test]
    fn products_cancel() {
        assert_eq!(&Coeff::one_plus_b() * &Coeff::inv_one_plus_b_pow(1), Coeff::one());
        assert_eq!(&Coeff::var(Var::B) * &Coeff::var(Var::B), c("b^2"));
        let x = c("(b + u1)/(1+b)^1");
        assert_eq!(&x * &Coeff::one_plus_b(), c("b + u1"));
    }

    #[test]
    fn eval_points() {
        let mut at = BTreeMap::new();
        at.insert(Var::B, rat(1, 1));
        assert_eq!(Coeff::inv_one_plus_b_pow(1).eval(&at).unwrap(), rat(1, 2));

        // b(i-1) at i = 3 is 2b, which vanishes at b = 0
        let mut at0 = BTreeMap::new();
        at0.insert(Var::B, rat(0, 1));
        assert_eq!(c("2*b").eval(&at0).unwrap(), rat(0, 1));

        let mut at2 = at0.clone();
        at2.insert(Var::U1, rat(2, 1));
        assert_eq!(c("(u1*b + u1^2)/(1+b)^1").eval(&at2).unwrap(), rat(4, 1));
    }

    #[test]
    fn eval_at_pole_fails() {
        let mut at = BTreeMap::new();
        at.insert(Var::B, rat(-1, 1));
        assert_eq!(Coeff::inv_one_plus_b_pow(2).eval(&at), Err(Error::DivisionByZero));
        // no denominator: fine
        assert_eq!(c("b").eval(&at).unwrap(), rat(-1, 1));
    }

    #[test]
    fn eval_needs_all_variables() {
        let at = BTreeMap::new();
        assert_eq!(c("u2").eval(&at), Err(Error::UnassignedVariable("u2")));
    }

    #[test]
    fn substitution_clears_denominator() {
        let x = c("(u1 + 2*b)/(1+b)^2");
        let y = x.substitute(Var::B, &rat(1, 1)).unwrap();
        assert_eq!(y, c("1/4*u1 + 1/2"));
        assert!(x.substitute(Var::B, &rat(-1, 1)).is_err());
        // substituting u1 = -b - 1 leaves a reducible numerator
        let z = c("(u1 + 1)/(1+b)^1").substitute(Var::U1, &rat(0, 1)).unwrap();
        assert_eq!(z, Coeff::inv_one_plus_b_pow(1));
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "0",
            "1",
            "-3/7",
            "u1*u2/(1+b)^1",
            "(b^2*u1 - 1/2*q3 + 4)/(1+b)^3",
            "-b*q1^2*q2",
        ] {
            assert_eq!(c(s).to_string(), s);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("u4".parse::<Coeff>().is_err());
        assert!("1/0".parse::<Coeff>().is_err());
        assert!("(b + 1".parse::<Coeff>().is_err());
        assert!("b +".parse::<Coeff>().is_err());
    }

    #[test]
    fn parse_canonicalizes() {
        assert_eq!(c("(b + 1)/(1+b)^2"), Coeff::inv_one_plus_b_pow(1));
        assert_eq!(c("(b^2 + 2*b + 1)/(1+b)^2"), Coeff::one());
        assert_eq!(c("1/(1+b)"), Coeff::inv_one_plus_b_pow(1));
    }

    #[test]
    fn divides_by_polynomials_in_b() {
        let r = [rat(2, 1), rat(1, 1)];
        let x = c("u1*(2 + b)*(b - 3)/(1+b)");
        assert_eq!(x.div_b_polynomial(&r).unwrap(), c("u1*(b - 3)/(1+b)"));
        assert!(c("u1*b").div_b_polynomial(&r).is_err());
        assert!(c("b").div_b_polynomial(&[rat(0, 1)]).is_err());
    }

    #[test]
    fn parse_binds_divisors_per_term() {
        let x = c("1 + u1*u2/(1+b)");
        assert_eq!(x, &Coeff::one() + &c("u1*u2/(1+b)"));
        assert_eq!(c("(1 + u1*u2)/(1+b)"), c("1/(1+b) + u1*u2/(1+b)"));
        assert_eq!(c("(u1 + u2)^2"), c("u1^2 + 2*u1*u2 + u2^2"));
        assert_eq!(c("1/2*u1/(1+b)^2"), c("u1/2/(1+b)^2"));
    }

    #[test]
    fn elementary_symmetric_polys() {
        let vars = [Var::U1, Var::U2, Var::U3];
        assert_eq!(elementary_symmetric(0, &vars), Coeff::one());
        assert_eq!(elementary_symmetric(1, &vars), c("u1 + u2 + u3"));
        assert_eq!(elementary_symmetric(2, &vars), c("u1*u2 + u1*u3 + u2*u3"));
        assert_eq!(elementary_symmetric(3, &vars), c("u1*u2*u3"));
        assert_eq!(elementary_symmetric(4, &vars), Coeff::zero());
    }

    fn arb_coeff() -> impl Strategy<Value = Coeff> {
        let term = (-4i64..=4, 0u8..3, 0u8..2, 0u8..2, 0u8..2);
        (prop::collection::vec(term, 0..4), 0u32..3).prop_map(|(terms, den)| {
            let mut acc = Coeff::zero();
            for (k, eb, eu, ev, eq) in terms {
                let mono = Coeff::from_int(k)
                    * Coeff::var(Var::B).pow(eb as u32)
                    * Coeff::var(Var::U1).pow(eu as u32)
                    * Coeff::var(Var::U2).pow(ev as u32)
                    * Coeff::var(Var::Q3).pow(eq as u32);
                acc = acc + mono;
            }
            acc.div_one_plus_b_pow(den)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn canonical_everywhere(a in arb_coeff(), b in arb_coeff()) {
            for x in [&a + &b, &a * &b, &a - &b] {
                prop_assert!(x.is_canonical());
                prop_assert_eq!(x.canonicalized(), x.clone());
                prop_assert_eq!(x.canonicalized().canonicalized(), x.canonicalized());
            }
        }

        #[test]
        fn text_round_trip(a in arb_coeff()) {
            let back: Coeff = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn eval_is_a_ring_map(a in arb_coeff(), b in arb_coeff(), x in -5i64..5, y in -3i64..3) {
            let mut at = BTreeMap::new();
            at.insert(Var::B, rat(x, 3) + rat(5, 1));
            for v in [Var::U1, Var::U2, Var::Q3] {
                at.insert(v, rat(y, 2));
            }
            let ev = |c: &Coeff| c.eval(&at).unwrap();
            prop_assert_eq!(ev(&(&a * &b)), ev(&a) * ev(&b));
            prop_assert_eq!(ev(&(&a + &b)), ev(&a) + ev(&b));
        }
    }
}
