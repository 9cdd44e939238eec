//! The tau series of a model, integrated order by order from its evolution
//! equation, together with `H = (1+b) log τ` and the checks that `τ` is
//! annihilated by the constraints.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::{Coeff, Var};
use crate::constraints::{LFamily, Model};
use crate::error::{Error, Result};
use crate::ppoly::{PMonomial, PPoly};

/// `[t^n] τ` for `0 <= n <= order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauSeries {
    pub model: Model,
    coeffs: Vec<PPoly>,
}

impl TauSeries {
    pub fn from_coeffs(model: &Model, coeffs: Vec<PPoly>) -> TauSeries {
        TauSeries { model: model.clone(), coeffs }
    }

    pub fn order(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn coeff(&self, n: u32) -> &PPoly {
        &self.coeffs[n as usize]
    }

    pub fn coeffs(&self) -> &[PPoly] {
        &self.coeffs
    }

    /// Largest `(1+b)` denominator exponent at each order.
    pub fn denom_pows(&self) -> Vec<u32> {
        self.coeffs.iter().map(PPoly::max_denom_pow).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.name(),
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(PPoly::to_json).collect::<Vec<_>>(),
            "denom_pow": self.denom_pows(),
        })
    }
}

impl fmt::Display for TauSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.coeffs.iter().enumerate() {
            writeln!(f, "t^{n}: {c}")?;
        }
        Ok(())
    }
}

fn inv(n: u32) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(n))
}

/// Integrates `n [t^n]τ = Σ_{m<=min(n,r)} q_m Σ_i p_i M^(k,m)_i [t^{n-m}]τ`.
pub fn tau_evolve(model: &Model, order: u32) -> Result<TauSeries> {
    let fam = LFamily::new(model, order)?;
    tau_evolve_with(&fam, order)
}

/// As [`tau_evolve`] with operators already built at working degree `>= order`.
pub fn tau_evolve_with(fam: &LFamily, order: u32) -> Result<TauSeries> {
    if fam.working_degree() < order {
        return Err(Error::DegreeBudget { needed: order, available: fam.working_degree() });
    }
    let model = fam.model();
    let mut coeffs = vec![PPoly::one()];
    for n in 1..=order {
        let mut acc = PPoly::zero();
        for m in 1..=n.min(model.r()) {
            let q = model.q(m);
            if q.is_zero() {
                continue;
            }
            let prev = &coeffs[(n - m) as usize];
            // M^(k,m)_i lowers degree by i - m, so larger i vanish on prev
            let parts: Vec<PPoly> = (1..=n)
                .into_par_iter()
                .map(|i| -> Result<PPoly> {
                    let image = fam.m(m, i as i64).apply(prev)?;
                    Ok(image.mul_monomial(&PMonomial::power(i, 1)))
                })
                .collect::<Result<_>>()?;
            for part in parts {
                acc = &acc + &part.scale(&q);
            }
        }
        coeffs.push(acc.scale_rational(&inv(n)));
    }
    Ok(TauSeries { model: model.clone(), coeffs })
}

/// One failed order of a series check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFailure {
    pub i: u32,
    pub order: u32,
    pub detail: String,
}

impl fmt::Display for SeriesFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i={} t^{}: {}", self.i, self.order, self.detail)
    }
}

/// Outcome of a sweep over `i <= imax` and all orders of a series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesReport {
    pub check: String,
    pub imax: u32,
    pub order: u32,
    pub checked: usize,
    pub failures: Vec<SeriesFailure>,
}

impl SeriesReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "imax": self.imax,
            "order": self.order,
            "checked": self.checked,
            "passed": self.passed(),
            "failures": self
                .failures
                .iter()
                .map(|f| json!({"i": f.i, "order": f.order, "detail": f.detail}))
                .collect::<Vec<_>>(),
        })
    }
}

fn first_term(p: &PPoly) -> String {
    match p.terms().next() {
        Some((m, c)) => format!("coefficient of {m} is {c}"),
        None => "zero".into(),
    }
}

/// `[t^n](L_i τ)` for `n <= order`.
pub fn constraint_slices(fam: &LFamily, tau: &TauSeries, i: u32) -> Result<Vec<PPoly>> {
    let model = fam.model();
    (0..=tau.order())
        .map(|n| {
            let mut acc = -&tau.coeff(n).pstar(i as i64);
            for m in 1..=n.min(model.r()) {
                let q = model.q(m);
                if !q.is_zero() {
                    acc = &acc + &fam.m(m, i as i64).apply(tau.coeff(n - m))?.scale(&q);
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Checks `[t^n](L_i τ) = 0` for `i <= imax`, `n <= order`, after checking
/// that each slice is homogeneous of degree `n - i`.
pub fn check_constraints(tau: &TauSeries, imax: u32) -> Result<SeriesReport> {
    if imax == 0 {
        return Err(Error::InvalidArgument("imax must be at least 1".into()));
    }
    let fam = LFamily::new(&tau.model, tau.order())?;
    let per_i: Vec<Vec<SeriesFailure>> = (1..=imax)
        .into_par_iter()
        .map(|i| -> Result<Vec<SeriesFailure>> {
            let slices = constraint_slices(&fam, tau, i)?;
            let mut out = Vec::new();
            for (n, s) in slices.iter().enumerate() {
                let n = n as u32;
                let homogeneous = if n < i { s.is_zero() } else { s.is_homogeneous(n - i) };
                if !homogeneous {
                    out.push(SeriesFailure { i, order: n, detail: format!("not homogeneous: {}", first_term(s)) });
                } else if !s.is_zero() {
                    out.push(SeriesFailure { i, order: n, detail: first_term(s) });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(SeriesReport {
        check: format!("constraints on {} tau", tau.model.name()),
        imax,
        order: tau.order(),
        checked: (imax * (tau.order() + 1)) as usize,
        failures: per_i.into_iter().flatten().collect(),
    })
}

/// `[t^n] H` for `0 <= n <= order`, `H = (1+b) log τ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HSeries {
    coeffs: Vec<PPoly>,
}

impl HSeries {
    pub fn order(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn coeff(&self, n: u32) -> &PPoly {
        &self.coeffs[n as usize]
    }

    pub fn coeffs(&self) -> &[PPoly] {
        &self.coeffs
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "coeffs": self.coeffs.iter().map(PPoly::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `log` of a series with constant term 1.
fn log_series(f: &[PPoly]) -> Vec<PPoly> {
    let mut out = vec![PPoly::zero()];
    for n in 1..f.len() {
        let mut acc = f[n].clone();
        for k in 1..n {
            let term = &out[k] * &f[n - k];
            acc = &acc - &term.scale_rational(&BigRational::new(BigInt::from(k), BigInt::from(n)));
        }
        out.push(acc);
    }
    out
}

/// `exp` of a series with zero constant term.
fn exp_series(g: &[PPoly]) -> Vec<PPoly> {
    let mut out = vec![PPoly::one()];
    for n in 1..g.len() {
        let mut acc = PPoly::zero();
        for k in 1..=n {
            let term = &g[k] * &out[n - k];
            acc = &acc + &term.scale_rational(&BigRational::new(BigInt::from(k), BigInt::from(n)));
        }
        out.push(acc);
    }
    out
}

pub fn h_series(tau: &TauSeries) -> Result<HSeries> {
    if tau.coeff(0) != &PPoly::one() {
        return Err(Error::InvalidArgument("constant term of tau must be 1".into()));
    }
    let opb = Coeff::one_plus_b();
    Ok(HSeries { coeffs: log_series(&tau.coeffs).iter().map(|c| c.scale(&opb)).collect() })
}

/// `exp(H / (1+b))`.
pub fn tau_from_h(model: &Model, h: &HSeries) -> TauSeries {
    let inv = Coeff::inv_one_plus_b_pow(1);
    let g: Vec<PPoly> = h.coeffs.iter().map(|c| c.scale(&inv)).collect();
    TauSeries { model: model.clone(), coeffs: exp_series(&g) }
}

/// A power series in `t` with polynomial coefficients, truncated at `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Series(Vec<PPoly>);

impl Series {
    fn zero(order: u32) -> Series {
        Series(vec![PPoly::zero(); order as usize + 1])
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(PPoly::is_zero)
    }

    fn add_assign(&mut self, other: &Series) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = &*a + b;
        }
    }

    fn map(&self, f: impl Fn(&PPoly) -> PPoly) -> Series {
        Series(self.0.iter().map(f).collect())
    }

    fn mul(&self, other: &Series) -> Series {
        let n = self.0.len();
        let mut out = Series::zero(n as u32 - 1);
        for (a, x) in self.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in other.0.iter().enumerate().take(n - a) {
                if !y.is_zero() {
                    out.0[a + b] = &out.0[a + b] + &(x * y);
                }
            }
        }
        out
    }

    fn shift_t(&self, m: u32) -> Series {
        let n = self.0.len();
        let mut out = Series::zero(n as u32 - 1);
        for k in 0..n.saturating_sub(m as usize) {
            out.0[k + m as usize] = self.0[k].clone();
        }
        out
    }

    /// Highest p-degree present.
    fn max_degree(&self) -> u32 {
        self.0.iter().filter_map(PPoly::max_degree).max().unwrap_or(0)
    }
}

/// y-vector of series: entry `j` is the coefficient of `y_j`.
type YSeries = BTreeMap<u32, Series>;

/// `(Λ_Y + shift + W) F` acting on functions, `(W F)_m = Σ_a G_a F_{m-a}`.
fn lambda_functions(f: &YSeries, shift: &Coeff, g: &[Series], order: u32) -> YSeries {
    let opb = Coeff::one_plus_b();
    let b = Coeff::var(Var::B);
    let mut out: YSeries = BTreeMap::new();
    let mut add = |j: u32, s: Series| {
        if !s.is_zero() {
            out.entry(j).or_insert_with(|| Series::zero(order)).add_assign(&s);
        }
    };
    for (&j, v) in f {
        for k in 1..=j {
            add(j - k, v.map(|p| p.mul_monomial(&PMonomial::power(k, 1))));
        }
        for k in 1..=v.max_degree() {
            add(j + k, v.map(|p| p.pstar(k as i64).scale(&opb)));
        }
        let diag = shift + &(&b * &Coeff::from_int(j as i64));
        if !diag.is_zero() {
            add(j, v.map(|p| p.scale(&diag)));
        }
        for (a, ga) in g.iter().enumerate().skip(1) {
            if !ga.is_zero() {
                add(j + a as u32, ga.mul(v));
            }
        }
    }
    out
}

/// Right side of the rooted fixed point:
/// `Σ_m t^m q_m [y_i] (Y_+ Π_l (Λ_Y + u_l + W))^m y_0` for `i <= imax`.
pub fn rooted_rhs(model: &Model, h: &HSeries, imax: u32) -> Vec<Vec<PPoly>> {
    let order = h.order();
    let hs = Series(h.coeffs.clone());
    let g: Vec<Series> = (0..=order).map(|a| hs.map(|p| p.pstar(a as i64))).collect();
    let shifts: Vec<Coeff> = (1..=model.k()).map(|c| Coeff::var(Var::u(c))).collect();
    let mut totals = vec![Series::zero(order); imax as usize + 1];
    let mut v: YSeries = BTreeMap::new();
    let mut seed = Series::zero(order);
    seed.0[0] = PPoly::one();
    v.insert(0, seed);
    for m in 1..=model.r().min(order) {
        for shift in &shifts {
            v = lambda_functions(&v, shift, &g, order);
        }
        v = v.into_iter().map(|(j, s)| (j + 1, s)).collect();
        let q = model.q(m);
        if q.is_zero() {
            continue;
        }
        for i in 1..=imax {
            if let Some(s) = v.get(&i) {
                totals[i as usize].add_assign(&s.shift_t(m).map(|p| p.scale(&q)));
            }
        }
    }
    totals.into_iter().map(|s| s.0).collect()
}

/// Checks `i ∂H/∂p_i` against [`rooted_rhs`] at every order.
pub fn check_rooted_fixed_point(tau: &TauSeries, imax: u32) -> Result<SeriesReport> {
    if imax == 0 {
        return Err(Error::InvalidArgument("imax must be at least 1".into()));
    }
    let h = h_series(tau)?;
    let rhs = rooted_rhs(&tau.model, &h, imax);
    let mut failures = Vec::new();
    for i in 1..=imax {
        for n in 0..=tau.order() {
            let lhs = h.coeff(n).pstar(i as i64);
            let diff = &lhs - &rhs[i as usize][n as usize];
            if !diff.is_zero() {
                failures.push(SeriesFailure { i, order: n, detail: first_term(&diff) });
            }
        }
    }
    Ok(SeriesReport {
        check: format!("rooted fixed point for {} tau", tau.model.name()),
        imax,
        order: tau.order(),
        checked: (imax * (tau.order() + 1)) as usize,
        failures,
    })
}
