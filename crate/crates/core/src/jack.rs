//! Jack symmetric functions over `Q(α)` and the Jack expansion of the tau
//! series, used as an independent oracle for the evolution equation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::{Coeff, Var};
use crate::constraints::Model;
use crate::error::{Error, Result};
use crate::ppoly::{binomial, PMonomial, PPoly};
use crate::tau::{tau_evolve, TauSeries};

/// Largest partition size handled by default.
pub const DEFAULT_BOUND: u32 = 6;

/// A partition, parts weakly decreasing and positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Partition> {
        if parts.contains(&0) {
            return Err(Error::InvalidArgument("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `z_λ = Π_i i^{m_i} m_i!`.
    pub fn z(&self) -> BigInt {
        let mut z = BigInt::one();
        let mut run = 0u32;
        for (k, &part) in self.0.iter().enumerate() {
            run = if k > 0 && self.0[k - 1] == part { run + 1 } else { 1 };
            z *= BigInt::from(part) * BigInt::from(run);
        }
        z
    }

    /// `λ ≥ μ` in dominance order.
    pub fn dominates(&self, other: &Partition) -> bool {
        if self.size() != other.size() {
            return false;
        }
        let (mut a, mut b) = (0u32, 0u32);
        for k in 0..self.len().max(other.len()) {
            a += self.0.get(k).copied().unwrap_or(0);
            b += other.0.get(k).copied().unwrap_or(0);
            if a < b {
                return false;
            }
        }
        true
    }

    /// Boxes `(row, column)`, both 1-based.
    pub fn boxes(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0.iter().enumerate().flat_map(|(r, &len)| (1..=len).map(move |c| (r as u32 + 1, c)))
    }

    /// `p_λ` as a monomial.
    pub fn monomial(&self) -> PMonomial {
        PMonomial::from_parts(&self.0)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Partition> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        if s.trim().is_empty() {
            return Ok(Partition::default());
        }
        let parts = s
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad partition part {x:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `n` in decreasing lexicographic order.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        for part in (1..=max.min(rest)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// A polynomial in `α` with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly(Vec<BigRational>);

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> UniPoly {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly(coeffs)
    }

    pub fn zero() -> UniPoly {
        UniPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> UniPoly {
        UniPoly::new(vec![c])
    }

    pub fn from_int(n: i64) -> UniPoly {
        UniPoly::constant(BigRational::from_integer(n.into()))
    }

    /// `c α^k`.
    pub fn monomial(c: BigRational, k: usize) -> UniPoly {
        let mut v = vec![BigRational::zero(); k];
        v.push(c);
        UniPoly::new(v)
    }

    pub fn alpha() -> UniPoly {
        UniPoly::monomial(BigRational::one(), 1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.0.len().max(other.0.len());
        let z = BigRational::zero();
        UniPoly::new((0..n).map(|k| self.0.get(k).unwrap_or(&z) + other.0.get(k).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &BigRational) -> UniPoly {
        UniPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (a, x) in self.0.iter().enumerate() {
            for (b, y) in other.0.iter().enumerate() {
                out[a + b] += x * y;
            }
        }
        UniPoly::new(out)
    }

    /// Quotient and remainder; `other` must be nonzero.
    pub fn div_rem(&self, other: &UniPoly) -> (UniPoly, UniPoly) {
        let d = other.degree().expect("division by the zero polynomial");
        let mut rem = self.0.clone();
        if rem.len() <= d {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + d] / other.lead();
            for (j, oj) in other.0.iter().enumerate() {
                rem[k + j] -= &c * oj;
            }
            quot[k] = c;
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn lcm(&self, other: &UniPoly) -> UniPoly {
        self.mul(other).div_rem(&self.gcd(other)).0.monic()
    }

    fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        self.scale(&self.lead().recip())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Coefficients in `b` of `self(1 + b)`.
    pub fn shifted_by_one(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.0.len()];
        for (k, c) in self.0.iter().enumerate() {
            for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                *slot += c * BigRational::from_integer(binomial(k as u32, j as u32));
            }
        }
        out
    }

    /// `self` with `α = 1 + b`.
    pub fn to_coeff(&self) -> Coeff {
        let b = Coeff::var(Var::B);
        self.shifted_by_one()
            .iter()
            .enumerate()
            .fold(Coeff::zero(), |acc, (k, c)| &acc + &b.pow(k as u32).scale(c))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let abs = c.abs();
            match k {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if k == 1 {
                        f.write_str("a")?;
                    } else {
                        write!(f, "a^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `⟨p_λ, p_μ⟩_α = δ_{λμ} α^{ℓ(λ)} z_λ`.
pub fn alpha_inner(lambda: &Partition, mu: &Partition) -> UniPoly {
    if lambda != mu {
        return UniPoly::zero();
    }
    UniPoly::monomial(BigRational::from_integer(lambda.z()), lambda.len())
}

/// Number of ways to distribute the parts of `mu` into boxes with sums `target`.
fn fillings(mu: &[u32], target: &mut [u32]) -> u64 {
    let Some((&first, rest)) = mu.split_first() else {
        return target.iter().all(|&t| t == 0) as u64;
    };
    let mut total = 0;
    for k in 0..target.len() {
        if target[k] >= first {
            target[k] -= first;
            total += fillings(rest, target);
            target[k] += first;
        }
    }
    total
}

/// `p_μ = Σ_λ c_λ m_λ`.
pub fn power_sum_in_monomials(mu: &Partition) -> BTreeMap<Partition, BigInt> {
    partitions(mu.size())
        .into_iter()
        .filter_map(|lambda| {
            let mut target = lambda.0.clone();
            let c = fillings(&mu.0, &mut target);
            (c > 0).then(|| (lambda, BigInt::from(c)))
        })
        .collect()
}

/// Row `λ` holds `m_λ` in the power-sum basis; rows follow `parts`.
fn monomials_in_power_sums(parts: &[Partition]) -> Vec<Vec<BigRational>> {
    let n = parts.len();
    let index: BTreeMap<&Partition, usize> = parts.iter().enumerate().map(|(k, p)| (p, k)).collect();
    // a[μ][λ] = [m_λ] p_μ, augmented with the identity, reduced to [I | A^{-1}]
    let mut a = vec![vec![BigRational::zero(); 2 * n]; n];
    for (row, mu) in parts.iter().enumerate() {
        for (lambda, c) in power_sum_in_monomials(mu) {
            a[row][index[&lambda]] = BigRational::from_integer(c);
        }
        a[row][n + row] = BigRational::one();
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).expect("transition matrix is invertible");
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    // p = A m, so m = A^{-1} p
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

/// `J_λ^(α) = Σ_μ θ_μ p_μ`, normalized by `θ_{1^n} = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JackPoly {
    pub lambda: Partition,
    pub expansion: BTreeMap<Partition, UniPoly>,
}

impl JackPoly {
    pub fn coeff(&self, mu: &Partition) -> UniPoly {
        self.expansion.get(mu).cloned().unwrap_or_default()
    }

    /// `⟨self, other⟩_α`.
    pub fn inner(&self, other: &JackPoly) -> UniPoly {
        self.expansion.iter().fold(UniPoly::zero(), |acc, (mu, c)| {
            acc.add(&c.mul(&other.coeff(mu)).mul(&alpha_inner(mu, mu)))
        })
    }

    /// The expansion with `α = 1 + b`.
    pub fn to_ppoly(&self) -> PPoly {
        PPoly::from_terms(self.expansion.iter().map(|(mu, c)| (mu.monomial(), c.to_coeff())))
    }

    /// `J_λ(q)` with `p_j := weights[j-1]` and `p_j := 0` beyond the weights.
    pub fn specialize(&self, weights: &[Coeff]) -> Coeff {
        let mut acc = Coeff::zero();
        for (mu, c) in &self.expansion {
            let mut term = c.to_coeff();
            for &part in mu.parts() {
                match weights.get(part as usize - 1) {
                    Some(w) => term = &term * w,
                    None => {
                        term = Coeff::zero();
                        break;
                    }
                }
            }
            acc += &term;
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.lambda.parts(),
            "expansion": self
                .expansion
                .iter()
                .map(|(mu, c)| json!({
                    "mu": mu.parts(),
                    "alpha_coeffs": c.coeffs().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                }))
                .collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for JackPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mu, c) in self.expansion.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})*p{mu}")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// J-normalized `J_λ` at a numeric `α > 0`, rows following `parts`.
fn jacks_at(parts: &[Partition], m_in_p: &[Vec<BigRational>], alpha: &BigRational) -> Vec<Vec<BigRational>> {
    let weight: Vec<BigRational> = parts.iter().map(|mu| alpha_inner(mu, mu).eval(alpha)).collect();
    let inner = |x: &[BigRational], y: &[BigRational]| {
        x.iter().zip(y).zip(&weight).fold(BigRational::zero(), |acc, ((a, b), w)| acc + a * b * w)
    };
    // Gram-Schmidt along increasing lexicographic order, which refines dominance
    let mut done: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
    let mut out = vec![Vec::new(); parts.len()];
    for row in (0..parts.len()).rev() {
        let start = &m_in_p[row];
        let mut v = start.clone();
        for (prev, norm) in &done {
            let f = inner(start, prev) / norm;
            if !f.is_zero() {
                for (x, y) in v.iter_mut().zip(prev) {
                    *x -= &f * y;
                }
            }
        }
        let norm = inner(&v, &v);
        let lead = v.last().cloned().expect("the partition 1^n is present");
        out[row] = v.iter().map(|x| x / &lead).collect();
        done.push((v, norm));
    }
    out
}

/// The polynomial of degree `< xs.len()` through `(xs[k], ys[k])`.
fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> UniPoly {
    let mut acc = UniPoly::zero();
    for (k, (xk, yk)) in xs.iter().zip(ys).enumerate() {
        if yk.is_zero() {
            continue;
        }
        let mut basis = UniPoly::constant(yk.clone());
        for (j, xj) in xs.iter().enumerate() {
            if j != k {
                let factor = UniPoly::new(vec![-xj.clone(), BigRational::one()]);
                basis = basis.mul(&factor).scale(&(xk - xj).recip());
            }
        }
        acc = acc.add(&basis);
    }
    acc
}

/// All `J_λ` with `|λ| = n`, in decreasing lexicographic order of `λ`.
///
/// Each coefficient has degree below `n` in `α`; it is interpolated from
/// numeric Gram-Schmidt runs and confirmed at one further point.
pub fn jacks_of_size(n: u32, bound: u32) -> Result<Vec<JackPoly>> {
    if n > bound {
        return Err(Error::BoundExceeded { size: n, bound });
    }
    let parts = partitions(n);
    let m_in_p = monomials_in_power_sums(&parts);
    let points: Vec<BigRational> = (1..=n as i64 + 2).map(|a| BigRational::from_integer(a.into())).collect();
    let samples: Vec<Vec<Vec<BigRational>>> =
        points.par_iter().map(|alpha| jacks_at(&parts, &m_in_p, alpha)).collect();
    let (fit, check) = points.split_at(points.len() - 1);
    let mut out = Vec::with_capacity(parts.len());
    for (row, lambda) in parts.iter().enumerate() {
        let mut expansion = BTreeMap::new();
        for (col, mu) in parts.iter().enumerate() {
            let ys: Vec<BigRational> = samples[..fit.len()].iter().map(|s| s[row][col].clone()).collect();
            let poly = interpolate(fit, &ys);
            assert_eq!(
                poly.eval(&check[0]),
                samples[fit.len()][row][col],
                "Jack coefficient of degree at least {n} in alpha"
            );
            if !poly.is_zero() {
                expansion.insert(mu.clone(), poly);
            }
        }
        out.push(JackPoly { lambda: lambda.clone(), expansion });
    }
    Ok(out)
}

/// `J_λ^(α)` for `|λ| <= bound`.
pub fn jack_with_bound(lambda: &Partition, bound: u32) -> Result<JackPoly> {
    jacks_of_size(lambda.size(), bound)?
        .into_iter()
        .find(|j| &j.lambda == lambda)
        .ok_or_else(|| Error::InvalidArgument(format!("{lambda} is not a partition")))
}

pub fn jack(lambda: &Partition) -> Result<JackPoly> {
    jack_with_bound(lambda, DEFAULT_BOUND)
}

/// Which α-content a box `(r, c)` receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContentConvention {
    /// `α(c-1) - (r-1)`.
    Standard,
    /// `α(r-1) - (c-1)`, the content of the transposed box.
    Transposed,
}

impl ContentConvention {
    pub fn name(self) -> &'static str {
        match self {
            ContentConvention::Standard => "standard",
            ContentConvention::Transposed => "transposed",
        }
    }

    /// The content of a box with `α = 1 + b`.
    pub fn content(self, row: u32, col: u32) -> Coeff {
        let alpha = Coeff::one_plus_b();
        let (a, l) = match self {
            ContentConvention::Standard => (col - 1, row - 1),
            ContentConvention::Transposed => (row - 1, col - 1),
        };
        &alpha.scale_int(a as i64) - &Coeff::from_int(l as i64)
    }
}

/// `Π_{□∈λ} Π_{l=1..k} (u_l + c_α(□))` with `α = 1 + b`.
pub fn content_product(lambda: &Partition, model: &Model, convention: ContentConvention) -> Coeff {
    let us: Vec<Coeff> = (1..=model.k()).map(|l| Coeff::var(Var::u(l))).collect();
    lambda.boxes().fold(Coeff::one(), |acc, (r, c)| {
        let content = convention.content(r, c);
        us.iter().fold(acc, |acc, u| &acc * &(u + &content))
    })
}

/// `[t^n]τ = Σ_{λ⊢n} J_λ(p) J_λ(q) Π(u + c_α) / j_λ` with `α = 1 + b`.
pub fn tau_jack(model: &Model, order: u32, convention: ContentConvention) -> Result<TauSeries> {
    tau_jack_with_bound(model, order, convention, DEFAULT_BOUND)
}

pub fn tau_jack_with_bound(model: &Model, order: u32, convention: ContentConvention, bound: u32) -> Result<TauSeries> {
    if order > bound {
        return Err(Error::BoundExceeded { size: order, bound });
    }
    let weights: Vec<Coeff> = (1..=3).map(|m| model.q(m)).collect();
    let coeffs = (0..=order)
        .into_par_iter()
        .map(|n| -> Result<PPoly> {
            let jacks = jacks_of_size(n, bound)?;
            let norms: Vec<UniPoly> = jacks.iter().map(|j| j.inner(j)).collect();
            let common = norms.iter().fold(UniPoly::from_int(1), |acc, x| acc.lcm(x));
            let mut numerator = PPoly::zero();
            for (j, norm) in jacks.iter().zip(&norms) {
                let scalar = &(&common.div_rem(norm).0.to_coeff() * &j.specialize(&weights))
                    * &content_product(&j.lambda, model, convention);
                if !scalar.is_zero() {
                    numerator = &numerator + &j.to_ppoly().scale(&scalar);
                }
            }
            // common(α) = α^e R(α) with R(0) != 0
            let e = common.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
            let rest = UniPoly::new(common.coeffs()[e..].to_vec()).shifted_by_one();
            numerator.map_coeffs(|c| c.div_one_plus_b_pow(e as u32).div_b_polynomial(&rest))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TauSeries::from_coeffs(model, coeffs))
}

/// First coefficient where two series differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMismatch {
    pub order: u32,
    pub monomial: PMonomial,
    pub left: Coeff,
    pub right: Coeff,
}

impl fmt::Display for SeriesMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t^{} coefficient of {}: {} vs {}", self.order, self.monomial, self.left, self.right)
    }
}

pub fn first_series_mismatch(a: &TauSeries, b: &TauSeries) -> Option<SeriesMismatch> {
    for n in 0..=a.order().min(b.order()) {
        let (x, y) = (a.coeff(n), b.coeff(n));
        let diff = x - y;
        let first = diff.terms().next().map(|(m, _)| m.clone());
        if let Some(m) = first {
            return Some(SeriesMismatch { order: n, left: x.coeff(&m), right: y.coeff(&m), monomial: m });
        }
    }
    None
}

/// Outcome of comparing the Jack expansion with the evolved series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub model: Model,
    pub order: u32,
    /// The first content convention under which the two series agree.
    pub convention: Option<ContentConvention>,
    /// Why each convention tried before it failed.
    pub mismatches: Vec<(ContentConvention, String)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.convention.is_some()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.name(),
            "order": self.order,
            "passed": self.passed(),
            "convention": self.convention.map(ContentConvention::name),
            "mismatches": self
                .mismatches
                .iter()
                .map(|(c, m)| json!({"convention": c.name(), "detail": m}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Compares `tau_jack` with `tau_evolve`, trying the standard content first.
pub fn oracle_check(model: &Model, order: u32) -> Result<OracleReport> {
    let evolved = tau_evolve(model, order)?;
    let mut mismatches = Vec::new();
    for convention in [ContentConvention::Standard, ContentConvention::Transposed] {
        let detail = match tau_jack(model, order, convention) {
            Ok(expected) => match first_series_mismatch(&expected, &evolved) {
                None => {
                    return Ok(OracleReport { model: model.clone(), order, convention: Some(convention), mismatches })
                }
                Some(m) => m.to_string(),
            },
            Err(e @ Error::ForeignDenominator(_)) => e.to_string(),
            Err(e) => return Err(e),
        };
        mismatches.push((convention, detail));
    }
    Ok(OracleReport { model: model.clone(), order, convention: None, mismatches })
}
