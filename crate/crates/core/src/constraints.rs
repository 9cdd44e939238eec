//! Constraint operators `L_i` for the three models, structure operators
//! `D_{ij,l}(s)` and `D̃_{ij,l}(m)`, and exact verification of the
//! commutation relations they satisfy.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::{elementary_symmetric, Coeff, Var};
use crate::currents::{a_vector, m_vector, Charge, YVector};
use crate::error::{Error, Result};
use crate::ppoly::PMonomial;
use crate::weyl::WeylOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Bipartite maps: `k = 2`, `r = 1`.
    Bip,
    /// 3-constellations: `k = 3`, `r = 1`.
    ThreeConst,
    /// Bipartite maps with black vertices of degree at most 3: `k = 1`, `r = 3`.
    BipLe3,
}

/// A model together with its vertex weights `q_1, q_2, q_3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub kind: ModelKind,
    pub q: [Coeff; 3],
}

impl Model {
    pub fn bip() -> Model {
        Model { kind: ModelKind::Bip, q: [Coeff::one(), Coeff::zero(), Coeff::zero()] }
    }

    pub fn three_const() -> Model {
        Model { kind: ModelKind::ThreeConst, q: [Coeff::one(), Coeff::zero(), Coeff::zero()] }
    }

    /// Symbolic `q_1, q_2, q_3`.
    pub fn bip_le3() -> Model {
        Model { kind: ModelKind::BipLe3, q: [1, 2, 3].map(|m| Coeff::var(Var::q(m))) }
    }

    /// `q_1 = q_3 = 0`, `q_2 = 1`: b-deformed general maps.
    pub fn general_maps() -> Model {
        Model::bip_le3().with_q([Coeff::zero(), Coeff::one(), Coeff::zero()])
    }

    pub fn with_q(mut self, q: [Coeff; 3]) -> Model {
        self.q = q;
        self
    }

    pub fn k(&self) -> usize {
        match self.kind {
            ModelKind::Bip => 2,
            ModelKind::ThreeConst => 3,
            ModelKind::BipLe3 => 1,
        }
    }

    pub fn r(&self) -> u32 {
        match self.kind {
            ModelKind::BipLe3 => 3,
            _ => 1,
        }
    }

    /// `q_m`, zero beyond `r`.
    pub fn q(&self, m: u32) -> Coeff {
        if m == 0 || m > self.r() {
            Coeff::zero()
        } else {
            self.q[m as usize - 1].clone()
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Bip => "bip",
            ModelKind::ThreeConst => "threeconst",
            ModelKind::BipLe3 if self.q == Model::general_maps().q => "generalmaps",
            ModelKind::BipLe3 => "biple3",
        }
    }

    /// Largest creation jump among the pieces of `L_i`.
    fn max_jump(&self) -> u32 {
        self.r() - 1
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Model> {
        match s {
            "bip" => Ok(Model::bip()),
            "threeconst" | "3const" => Ok(Model::three_const()),
            "biple3" => Ok(Model::bip_le3()),
            "generalmaps" => Ok(Model::general_maps()),
            _ => Err(Error::Parse(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A polynomial in `t` with [`WeylOp`] coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TGradedOp {
    pieces: BTreeMap<u32, WeylOp>,
    wd: u32,
}

impl TGradedOp {
    pub fn zero(wd: u32) -> TGradedOp {
        TGradedOp { pieces: BTreeMap::new(), wd }
    }

    pub fn working_degree(&self) -> u32 {
        self.wd
    }

    pub fn piece(&self, n: u32) -> WeylOp {
        self.pieces.get(&n).cloned().unwrap_or_else(|| WeylOp::zero(self.wd))
    }

    pub fn pieces(&self) -> impl Iterator<Item = (u32, &WeylOp)> {
        self.pieces.iter().map(|(&n, op)| (n, op))
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn add_piece(&mut self, n: u32, op: &WeylOp) {
        if op.is_zero() {
            return;
        }
        if op.working_degree() < self.wd {
            self.wd = op.working_degree();
            for p in self.pieces.values_mut() {
                *p = p.truncate(self.wd).unwrap();
            }
        }
        let op = op.truncate(self.wd).unwrap();
        let entry = self.pieces.entry(n).or_insert_with(|| WeylOp::zero(op.working_degree()));
        entry.add_assign(&op);
        if entry.is_zero() {
            self.pieces.remove(&n);
        }
    }

    pub fn add(&self, other: &TGradedOp) -> TGradedOp {
        let mut out = self.clone();
        for (&n, op) in &other.pieces {
            out.add_piece(n, op);
        }
        out
    }

    pub fn neg(&self) -> TGradedOp {
        TGradedOp { pieces: self.pieces.iter().map(|(&n, op)| (n, op.neg())).collect(), wd: self.wd }
    }

    pub fn sub(&self, other: &TGradedOp) -> TGradedOp {
        self.add(&other.neg())
    }

    pub fn truncate(&self, d: u32) -> Result<TGradedOp> {
        let mut out = TGradedOp::zero(d);
        for (&n, op) in &self.pieces {
            out.add_piece(n, &op.truncate(d)?);
        }
        Ok(out)
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Coeff) -> Result<Coeff>) -> Result<TGradedOp> {
        let mut out = TGradedOp::zero(self.wd);
        for (&n, op) in &self.pieces {
            out.add_piece(n, &op.map_coeffs(&mut f)?);
        }
        Ok(out)
    }

    /// `[self, other]` on inputs of degree at most `d`, piece by piece.
    pub fn commutator_at(&self, other: &TGradedOp, d: u32) -> Result<TGradedOp> {
        let mut out = TGradedOp::zero(d);
        for (&a, x) in &self.pieces {
            for (&b, y) in &other.pieces {
                out.add_piece(a + b, &x.commutator_at(y, d)?);
            }
        }
        Ok(out)
    }

    /// Some `(t-power, create, annihilate, difference)` where the two differ
    /// on degree at most `d`.
    pub fn first_difference(&self, other: &TGradedOp, d: u32) -> Option<Mismatch> {
        let ts: std::collections::BTreeSet<u32> =
            self.pieces.keys().chain(other.pieces.keys()).copied().collect();
        for n in ts {
            if let Some((create, annihilate, difference)) = self.piece(n).first_difference(&other.piece(n), d) {
                return Some(Mismatch { t_power: Some(n), create, annihilate, difference, note: String::new() });
            }
        }
        None
    }

    pub fn to_json(&self) -> Value {
        json!({
            "working_degree": self.wd,
            "pieces": self
                .pieces
                .iter()
                .map(|(n, op)| json!({"t_power": n, "op": op.to_json()}))
                .collect::<Vec<_>>(),
        })
    }
}

/// A linear combination `c·Id + Σ_n c_n J_n` of currents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JLinear {
    pub scalar: Coeff,
    pub modes: BTreeMap<i64, Coeff>,
}

impl JLinear {
    pub fn zero() -> JLinear {
        JLinear::default()
    }

    pub fn scalar(c: Coeff) -> JLinear {
        JLinear { scalar: c, modes: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_zero() && self.modes.is_empty()
    }

    /// Adds `c·J_n`, folding `J_0` into the scalar through the charge.
    pub fn add_mode(&mut self, n: i64, c: &Coeff, charge: &Charge) {
        if c.is_zero() {
            return;
        }
        if n == 0 {
            self.scalar += &(c * &charge.0);
            return;
        }
        let e = self.modes.entry(n).or_default();
        *e += c;
        if e.is_zero() {
            self.modes.remove(&n);
        }
    }

    pub fn add(&self, other: &JLinear) -> JLinear {
        let mut out = self.clone();
        out.scalar += &other.scalar;
        for (&n, c) in &other.modes {
            out.add_mode(n, c, &Charge::zero());
        }
        out
    }

    pub fn scale(&self, s: &Coeff) -> JLinear {
        let mut out = JLinear::scalar(&self.scalar * s);
        for (&n, c) in &self.modes {
            out.add_mode(n, &(c * s), &Charge::zero());
        }
        out
    }

    /// `self ∘ op`, exact.
    pub fn apply_left(&self, op: &WeylOp) -> WeylOp {
        let mut out = op.scale(&self.scalar);
        let one_plus_b = Coeff::one_plus_b();
        for (&n, c) in &self.modes {
            if n < 0 {
                out.add_assign(&op.left_mul_p(-n).scale(c));
            } else {
                out.add_assign(&op.left_mul_pstar(n).scale(&(c * &one_plus_b)));
            }
        }
        out
    }

    pub fn to_weyl(&self, wd: u32) -> WeylOp {
        self.apply_left(&WeylOp::identity(wd))
    }
}

fn sgn(x: i64) -> i64 {
    x.signum()
}

fn ind(c: bool) -> i64 {
    c as i64
}

/// `D_{ij,l}(s)` for `0 <= s <= 3` (charge 0).
pub fn build_d(s: u32, i: i64, j: i64, l: i64) -> Result<JLinear> {
    let (mu, big) = (i.min(j), i.max(j));
    let mut out = JLinear::zero();
    match s {
        0 | 1 => {}
        2 => out.scalar = Coeff::from_int((i - j) * ind(l == i + j - 1)),
        3 => {
            let c = (i - j) * (2 * ind(l >= big) + ind(big <= l && l < i + j))
                + sgn(i - j) * (2 * l - 3 * mu + 1) * ind(mu <= l && l < big);
            out.add_mode(i + j - 1 - l, &Coeff::from_int(c), &Charge::zero());
            if l == i + j - 1 {
                out.scalar += &(&Coeff::var(Var::B) * &Coeff::from_int((i - j) * (i + j - 2)));
            }
        }
        _ => return Err(Error::InvalidArgument(format!("s = {s} is outside 0..=3"))),
    }
    Ok(out)
}

/// `D̃_{ij,l}(m)` for `1 <= m <= 3` (charge `u`).
pub fn build_dtilde(m: u32, i: i64, j: i64, l: i64) -> Result<JLinear> {
    let (mu, big) = (i.min(j), i.max(j));
    let mut out = JLinear::zero();
    match m {
        1 => {}
        2 => out.scalar = Coeff::from_int((i - j) * ind(l == i + j - 2)),
        3 => {
            let c = (i - j) * (2 * ind(l >= big - 1) + ind(big - 1 <= l && l <= i + j - 3))
                + sgn(i - j) * (2 * l - 3 * mu + 3) * ind(mu - 1 <= l && l <= big - 2);
            out.add_mode(i + j - 3 - l, &Coeff::from_int(c), &Charge::u());
            if l == i + j - 3 {
                out.scalar += &(&Coeff::var(Var::B) * &Coeff::from_int((i - j) * (i + j - 3)));
            }
        }
        _ => return Err(Error::InvalidArgument(format!("m = {m} is outside 1..=3"))),
    }
    Ok(out)
}

/// The operators `M^(k,m)_i` and `L_i` of one model at one working degree.
pub struct LFamily {
    model: Model,
    wd: u32,
    ms: Vec<YVector>,
}

impl LFamily {
    pub fn new(model: &Model, wd: u32) -> Result<LFamily> {
        let ms = (1..=model.r())
            .map(|m| m_vector(model.k(), m, wd))
            .collect::<Result<Vec<_>>>()?;
        Ok(LFamily { model: model.clone(), wd, ms })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn working_degree(&self) -> u32 {
        self.wd
    }

    /// `M^(k,m)_i`; zero for `i <= 0`.
    pub fn m(&self, m: u32, i: i64) -> WeylOp {
        if i <= 0 || m == 0 || m > self.model.r() {
            return WeylOp::zero(self.wd);
        }
        self.ms[m as usize - 1].entry(i as u32)
    }

    /// `L_i = -p_i^* + Σ_m q_m t^m M^(k,m)_i`; zero for `i <= 0`.
    pub fn l(&self, i: i64) -> TGradedOp {
        let mut out = TGradedOp::zero(self.wd);
        if i <= 0 {
            return out;
        }
        out.add_piece(0, &WeylOp::annihilation(i, self.wd).neg());
        for m in 1..=self.model.r() {
            let q = self.model.q(m);
            if !q.is_zero() {
                out.add_piece(m, &self.m(m, i).scale(&q));
            }
        }
        out
    }

    /// `L_l` vanishes on degree `<= d` once `l > d + r`.
    pub fn l_bound(&self, d: u32) -> i64 {
        (d + self.model.r()) as i64
    }
}

/// `L_i` of `model` at working degree `wd`.
pub fn build_l(model: &Model, i: i64, wd: u32) -> Result<TGradedOp> {
    Ok(LFamily::new(model, wd)?.l(i))
}

/// The t-graded coefficients `X_l` of a right-hand side `Σ_l X_l L_l`.
pub type LExpansion = BTreeMap<i64, BTreeMap<u32, JLinear>>;

fn push(exp: &mut LExpansion, l: i64, tpow: u32, x: JLinear) {
    if l <= 0 || x.is_zero() {
        return;
    }
    let slot = exp.entry(l).or_default().entry(tpow).or_default();
    *slot = slot.add(&x);
}

/// Structure form: `t Σ_l D^(k)_{ij,l} L_l` or `t Σ_l D̃^(r)_{ij,l} L_l`.
pub fn structure_expansion(model: &Model, i: i64, j: i64, lmax: i64) -> Result<LExpansion> {
    let mut exp = LExpansion::new();
    for l in 1..=lmax {
        match model.kind {
            ModelKind::Bip | ModelKind::ThreeConst => {
                let k = model.k();
                let vars: Vec<Var> = (1..=k).map(Var::u).collect();
                for s in 0..=k {
                    let e = elementary_symmetric(k - s, &vars);
                    push(&mut exp, l, 1, build_d(s as u32, i, j, l)?.scale(&e));
                }
            }
            ModelKind::BipLe3 => {
                for m in 1..=3 {
                    push(&mut exp, l, m, build_dtilde(m, i, j, l)?.scale(&model.q(m)));
                }
            }
        }
    }
    Ok(exp)
}

/// The grouped right-hand sides stated for each model's commutator.
///
/// With `corner` set, the bipartite≤3 form is adjusted at `min(i,j) = 1`:
/// the `3u(i-j) L_{i+j-3}` term is dropped and the `n = 0` slot of the
/// `sgn` sum is kept as `J_0 = u`.
pub fn explicit_expansion(model: &Model, i: i64, j: i64, lmax: i64, corner: bool) -> LExpansion {
    let mut exp = LExpansion::new();
    let (mu, big) = (i.min(j), i.max(j));
    let int = Coeff::from_int;
    let b = Coeff::var(Var::B);
    let zero = Charge::zero();
    let creation = |n: i64, c: Coeff| {
        let mut x = JLinear::zero();
        x.add_mode(-n, &c, &zero);
        x
    };
    // (1+b) p_n^* = J_n
    let annihilation = |n: i64, c: Coeff| {
        let mut x = JLinear::zero();
        if n > 0 {
            x.add_mode(n, &c, &zero);
        }
        x
    };
    match model.kind {
        ModelKind::Bip => {
            push(&mut exp, i + j - 1, 1, JLinear::scalar(int(i - j)));
        }
        ModelKind::ThreeConst => {
            for n in 1..=lmax - (i + j - 1) {
                push(&mut exp, i + j + n - 1, 1, creation(n, int(2 * (i - j))));
            }
            push(&mut exp, i + j - 1, 1, JLinear::scalar(&b * &int((i - j) * (i + j - 2))));
            for n in 1..mu {
                push(&mut exp, i + j - 1 - n, 1, annihilation(n, int(3 * (i - j))));
            }
            for n in mu..big {
                push(&mut exp, i + j - 1 - n, 1, annihilation(n, int(sgn(i - j) * (2 * big - 2 * n - mu - 1))));
            }
            let e1 = elementary_symmetric(1, &[Var::U1, Var::U2, Var::U3]);
            push(&mut exp, i + j - 1, 1, JLinear::scalar(&e1 * &int(i - j)));
        }
        ModelKind::BipLe3 => {
            let (q2, q3) = (model.q(2), model.q(3));
            for n in 1..=lmax - (i + j - 3) {
                push(&mut exp, i + j + n - 3, 3, creation(n, &q3 * &int(2 * (i - j))));
            }
            push(&mut exp, i + j - 3, 3, JLinear::scalar(&(&q3 * &b) * &int((i - j) * (i + j - 3))));
            for n in 1..=mu - 2 {
                push(&mut exp, i + j - 3 - n, 3, annihilation(n, &q3 * &int(3 * (i - j))));
            }
            let u = Coeff::var(Var::U1);
            for n in (mu - 1)..=(big - 2) {
                let c = &q3 * &int(sgn(i - j) * (2 * big - 2 * n - mu - 3));
                if n == 0 && corner {
                    push(&mut exp, i + j - 3, 3, JLinear::scalar(&c * &u));
                } else {
                    push(&mut exp, i + j - 3 - n, 3, annihilation(n, c));
                }
            }
            if !(corner && mu < 2) {
                push(&mut exp, i + j - 3, 3, JLinear::scalar(&(&q3 * &u) * &int(3 * (i - j))));
            }
            push(&mut exp, i + j - 2, 2, JLinear::scalar(&q2 * &int(i - j)));
        }
    }
    exp
}

/// `Σ_l X_l L_l` on inputs of degree at most `d`.
pub fn assemble(fam: &LFamily, exp: &LExpansion, d: u32) -> Result<TGradedOp> {
    let mut out = TGradedOp::zero(d);
    for (&l, xs) in exp {
        if l > fam.l_bound(d) {
            continue;
        }
        let ll = fam.l(l).truncate(d)?;
        for (&a, x) in xs {
            for (b, piece) in ll.pieces() {
                out.add_piece(a + b, &x.apply_left(piece));
            }
        }
    }
    Ok(out)
}

/// Where two operators first differ, if anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub t_power: Option<u32>,
    pub create: PMonomial,
    pub annihilate: PMonomial,
    pub difference: Coeff,
    pub note: String,
}

impl Mismatch {
    pub fn to_json(&self) -> Value {
        json!({
            "t_power": self.t_power,
            "create": self.create.to_json(),
            "annihilate": self.annihilate.to_json(),
            "difference": self.difference.to_string(),
            "note": self.note,
        })
    }
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.note.is_empty() {
            write!(f, "[{}] ", self.note)?;
        }
        if let Some(t) = self.t_power {
            write!(f, "t^{t}: ")?;
        }
        write!(f, "coefficient of {}", self.create)?;
        if !self.annihilate.is_one() {
            write!(f, "*{}", self.annihilate.display_as("d"))?;
        }
        write!(f, " differs by {}", self.difference)
    }
}

/// Result of one identity instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckItem {
    pub i: i64,
    pub j: i64,
    pub s: Option<u32>,
    pub s2: Option<u32>,
    pub first_mismatch: Option<Mismatch>,
    /// Set on instances that hold only under a separately reported reading.
    pub remark: Option<String>,
}

impl CheckItem {
    pub fn pass(i: i64, j: i64) -> CheckItem {
        CheckItem { i, j, s: None, s2: None, first_mismatch: None, remark: None }
    }

    pub fn failed(i: i64, j: i64, m: Mismatch) -> CheckItem {
        CheckItem { first_mismatch: Some(m), ..CheckItem::pass(i, j) }
    }

    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "i": self.i,
            "j": self.j,
            "status": if self.passed() { "pass" } else { "fail" },
        });
        if let Some(s) = self.s {
            v["s"] = json!(s);
        }
        if let Some(s) = self.s2 {
            v["s2"] = json!(s);
        }
        if let Some(m) = &self.first_mismatch {
            v["first_mismatch"] = m.to_json();
        }
        if let Some(r) = &self.remark {
            v["remark"] = json!(r);
        }
        v
    }
}

impl fmt::Display for CheckItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i={} j={}", self.i, self.j)?;
        if let Some(s) = self.s {
            write!(f, " s={s}")?;
        }
        if let Some(s) = self.s2 {
            write!(f, " s'={s}")?;
        }
        match &self.first_mismatch {
            None => write!(f, ": pass")?,
            Some(m) => write!(f, ": FAIL {m}")?,
        }
        if let Some(r) = &self.remark {
            write!(f, " [{r}]")?;
        }
        Ok(())
    }
}

/// A named sweep of identity instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub check: String,
    pub params: Value,
    pub items: Vec<CheckItem>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.items.iter().all(CheckItem::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|c| !c.passed())
    }

    pub fn remarks(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|c| c.remark.is_some())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "params": self.params,
            "passed": self.passed(),
            "pairs": self.items.iter().map(CheckItem::to_json).collect::<Vec<_>>(),
        })
    }
}

fn specialize_b(op: &TGradedOp, b_eval: Option<&BigRational>) -> Result<TGradedOp> {
    match b_eval {
        None => Ok(op.clone()),
        Some(v) => op.map_coeffs(|c| c.substitute(Var::B, v)),
    }
}

fn compare(
    lhs: &TGradedOp,
    rhs: &TGradedOp,
    d: u32,
    b_eval: Option<&BigRational>,
    note: &str,
) -> Result<Option<Mismatch>> {
    let diff = specialize_b(&lhs.sub(rhs), b_eval)?;
    Ok(diff.first_difference(&TGradedOp::zero(d), d).map(|mut m| {
        m.note = note.to_string();
        m
    }))
}

/// Which right-hand side a model-level check compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsForm {
    /// `t Σ_l D_{ij,l} L_l` from the structure operators.
    Structure,
    /// The grouped form with explicit `p_n L` and `p_n^* L` sums.
    Explicit,
    /// The grouped form with the `min(i,j) = 1` adjustment.
    ExplicitCorner,
}

/// `[L_i, L_j]` on degree at most `d`.
pub fn theorem_lhs(fam: &LFamily, i: i64, j: i64, d: u32) -> Result<TGradedOp> {
    fam.l(i).commutator_at(&fam.l(j), d)
}

pub fn theorem_rhs(fam: &LFamily, form: RhsForm, i: i64, j: i64, d: u32) -> Result<TGradedOp> {
    let lmax = fam.l_bound(d);
    let exp = match form {
        RhsForm::Structure => structure_expansion(fam.model(), i, j, lmax)?,
        RhsForm::Explicit => explicit_expansion(fam.model(), i, j, lmax, false),
        RhsForm::ExplicitCorner => explicit_expansion(fam.model(), i, j, lmax, true),
    };
    assemble(fam, &exp, d)
}

/// Checks `[L_i, L_j]` against both right-hand sides for `1 <= i, j <= imax`.
pub fn verify_theorem(model: &Model, imax: u32, d: u32, b_eval: Option<&BigRational>) -> Result<Report> {
    if imax == 0 {
        return Err(Error::InvalidArgument("imax must be at least 1".into()));
    }
    let fam = LFamily::new(model, d + model.max_jump())?;
    let pairs: Vec<(i64, i64)> =
        (1..=imax as i64).flat_map(|i| (1..=imax as i64).map(move |j| (i, j))).collect();
    let items = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<CheckItem> {
            let lhs = theorem_lhs(&fam, i, j, d)?;
            let rhs = theorem_rhs(&fam, RhsForm::Structure, i, j, d)?;
            if let Some(m) = compare(&lhs, &rhs, d, b_eval, "structure form")? {
                return Ok(CheckItem::failed(i, j, m));
            }
            let rhs = theorem_rhs(&fam, RhsForm::Explicit, i, j, d)?;
            let Some(displayed) = compare(&lhs, &rhs, d, b_eval, "explicit form")? else {
                return Ok(CheckItem::pass(i, j));
            };
            let rhs = theorem_rhs(&fam, RhsForm::ExplicitCorner, i, j, d)?;
            if model.kind == ModelKind::BipLe3 && compare(&lhs, &rhs, d, b_eval, "")?.is_none() {
                let mut item = CheckItem::pass(i, j);
                item.remark = Some(format!("explicit form needs the min(i,j)=1 adjustment ({displayed})"));
                return Ok(item);
            }
            Ok(CheckItem::failed(i, j, displayed))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report {
        check: format!("commutator of {} constraints", model.name()),
        params: json!({
            "model": model.name(),
            "imax": imax,
            "deg": d,
            "b_eval": b_eval.map(|v| v.to_string()),
        }),
        items,
    })
}

/// The operator families of the propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `A_i(s)` with `D_{ij,l}(s)`, `0 <= s <= 3`.
    A,
    /// `M^(1,m)_i` with `D̃_{ij,l}(m)`, `1 <= m <= 3`.
    M1,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Family::A),
            "m1" | "m" => Ok(Family::M1),
            _ => Err(Error::Parse(format!("unknown family {s:?}"))),
        }
    }
}

/// The three relation shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop {
    /// `[X_i, X_j] = Σ_l D X_l`.
    DStruct,
    /// `[X_i(s), X_j(s')] - [X_j(s), X_i(s')] = Σ_l D(s') X_l(s) + D(s) X_l(s')`.
    Mixed,
    /// `[p_i^*, X_j] - [p_j^*, X_i] = Σ_l D p_l^*`.
    PStar,
}

impl FromStr for Prop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Prop> {
        match s {
            "dstruct" => Ok(Prop::DStruct),
            "mixed" => Ok(Prop::Mixed),
            "pstar" => Ok(Prop::PStar),
            _ => Err(Error::Parse(format!("unknown relation {s:?}"))),
        }
    }
}

struct FamilyOps {
    family: Family,
    wd: u32,
    vectors: BTreeMap<u32, YVector>,
}

impl FamilyOps {
    fn new(family: Family, wd: u32) -> Result<FamilyOps> {
        let vectors = match family {
            Family::A => (0..=3).map(|s| (s, a_vector(s, wd))).collect(),
            Family::M1 => (1..=3).map(|m| Ok((m, m_vector(1, m, wd)?))).collect::<Result<_>>()?,
        };
        Ok(FamilyOps { family, wd, vectors })
    }

    fn levels(&self) -> Vec<u32> {
        self.vectors.keys().copied().collect()
    }

    fn op(&self, s: u32, i: i64) -> WeylOp {
        if i <= 0 {
            return WeylOp::zero(self.wd);
        }
        self.vectors[&s].entry(i as u32)
    }

    fn d(&self, s: u32, i: i64, j: i64, l: i64) -> Result<JLinear> {
        match self.family {
            Family::A => build_d(s, i, j, l),
            Family::M1 => build_dtilde(s, i, j, l),
        }
    }

    /// `X_l(s)` vanishes on degree `<= d` once `l > d + 3`.
    fn l_bound(&self, d: u32) -> i64 {
        d as i64 + 3
    }

    fn sum_d(&self, s_d: u32, s_x: u32, i: i64, j: i64, d: u32, pstar: bool) -> Result<WeylOp> {
        let mut acc = WeylOp::zero(d);
        for l in 1..=self.l_bound(d) {
            let x = self.d(s_d, i, j, l)?;
            if x.is_zero() {
                continue;
            }
            let target =
                if pstar { WeylOp::annihilation(l, d) } else { self.op(s_x, l).truncate(d)? };
            acc.add_assign(&x.apply_left(&target));
        }
        Ok(acc)
    }
}

fn as_graded(op: WeylOp) -> TGradedOp {
    let mut t = TGradedOp::zero(op.working_degree());
    t.add_piece(0, &op);
    t
}

/// Checks one proposition family for `1 <= i, j <= imax` at degree `d`.
pub fn verify_simplified(family: Family, prop: Prop, imax: u32, d: u32) -> Result<Report> {
    if imax == 0 {
        return Err(Error::InvalidArgument("imax must be at least 1".into()));
    }
    let fam = FamilyOps::new(family, d + 2)?;
    let levels = fam.levels();
    let mut cases = Vec::new();
    for i in 1..=imax as i64 {
        for j in 1..=imax as i64 {
            match prop {
                Prop::DStruct | Prop::PStar => {
                    for &s in &levels {
                        cases.push((i, j, s, None));
                    }
                }
                Prop::Mixed => {
                    for &s in &levels {
                        for &s2 in &levels {
                            cases.push((i, j, s, Some(s2)));
                        }
                    }
                }
            }
        }
    }
    let items = cases
        .par_iter()
        .map(|&(i, j, s, s2)| -> Result<CheckItem> {
            let (lhs, rhs) = match prop {
                Prop::DStruct => {
                    let lhs = fam.op(s, i).commutator_at(&fam.op(s, j), d)?;
                    (lhs, fam.sum_d(s, s, i, j, d, false)?)
                }
                Prop::Mixed => {
                    let s2 = s2.unwrap();
                    let lhs = fam
                        .op(s, i)
                        .commutator_at(&fam.op(s2, j), d)?
                        .sub(&fam.op(s, j).commutator_at(&fam.op(s2, i), d)?);
                    let rhs = fam.sum_d(s2, s, i, j, d, false)?.add(&fam.sum_d(s, s2, i, j, d, false)?);
                    (lhs, rhs)
                }
                Prop::PStar => {
                    let ps = |k| WeylOp::annihilation(k, fam.wd);
                    let lhs = ps(i)
                        .commutator_at(&fam.op(s, j), d)?
                        .sub(&ps(j).commutator_at(&fam.op(s, i), d)?);
                    (lhs, fam.sum_d(s, s, i, j, d, true)?)
                }
            };
            let m = compare(&as_graded(lhs), &as_graded(rhs), d, None, "")?.map(|mut m| {
                m.t_power = None;
                m
            });
            Ok(CheckItem { s: Some(s), s2, first_mismatch: m, ..CheckItem::pass(i, j) })
        })
        .collect::<Result<Vec<_>>>()?;
    let fname = match family {
        Family::A => "A",
        Family::M1 => "M1",
    };
    let pname = match prop {
        Prop::DStruct => "dstruct",
        Prop::Mixed => "mixed",
        Prop::PStar => "pstar",
    };
    Ok(Report {
        check: format!("{pname} relation for {fname}"),
        params: json!({"family": fname, "prop": pname, "imax": imax, "deg": d}),
        items,
    })
}

/// `[A_i(3), A_j(3)]` against its expanded closed form.
pub fn verify_a3_closed_form(imax: u32, d: u32) -> Result<Report> {
    let wd = d + 2;
    let a3 = a_vector(3, wd);
    let a = |n: i64| if n <= 0 { WeylOp::zero(wd) } else { a3.entry(n as u32) };
    closed_form_report("closed form of [A_i(3), A_j(3)]", imax, d, |i, j| {
        let (mu, big) = (i.min(j), i.max(j));
        let mut rhs = WeylOp::zero(d);
        let zero = Charge::zero();
        let mut add = |n: i64, c: i64| {
            let mut x = JLinear::zero();
            x.add_mode(i + j - 1 - n, &Coeff::from_int(c), &zero);
            rhs.add_assign(&x.apply_left(&a(n).truncate(d).unwrap()));
        };
        for n in big..=d as i64 + 1 {
            add(n, 2 * (i - j));
        }
        for n in big..=i + j - 1 {
            add(n, i - j);
        }
        for n in mu..big {
            add(n, sgn(i - j) * (2 * n - 3 * mu + 1));
        }
        let b = Coeff::var(Var::B);
        rhs.add_assign(&a(i + j - 1).truncate(d)?.scale(&(&b * &Coeff::from_int((i - j) * (i + j - 2)))));
        Ok((a(i).commutator_at(&a(j), d)?, rhs))
    })
}

/// `[M^(1,3)_i, M^(1,3)_j]` against its expanded closed form.
pub fn verify_m13_closed_form(imax: u32, d: u32) -> Result<Report> {
    let wd = d + 2;
    let m3 = m_vector(1, 3, wd)?;
    let m = |n: i64| if n <= 0 { WeylOp::zero(wd) } else { m3.entry(n as u32) };
    closed_form_report("closed form of [M^(1,3)_i, M^(1,3)_j]", imax, d, |i, j| {
        let (mu, big) = (i.min(j), i.max(j));
        let mut rhs = WeylOp::zero(d);
        let charge = Charge::u();
        let mut add = |n: i64, c: i64| {
            let mut x = JLinear::zero();
            x.add_mode(i + j - 3 - n, &Coeff::from_int(c), &charge);
            rhs.add_assign(&x.apply_left(&m(n).truncate(d).unwrap()));
        };
        for n in (big - 1)..=d as i64 + 3 {
            add(n, 2 * (i - j));
        }
        for n in (big - 1)..=(i + j - 3) {
            add(n, i - j);
        }
        for n in (mu - 1)..=(big - 2) {
            add(n, sgn(j - i) * (3 * mu - 2 * n - 3));
        }
        let b = Coeff::var(Var::B);
        rhs.add_assign(&m(i + j - 3).truncate(d)?.scale(&(&b * &Coeff::from_int((i - j) * (i + j - 3)))));
        Ok((m(i).commutator_at(&m(j), d)?, rhs))
    })
}

fn closed_form_report(
    name: &str,
    imax: u32,
    d: u32,
    f: impl Fn(i64, i64) -> Result<(WeylOp, WeylOp)> + Sync,
) -> Result<Report> {
    let pairs: Vec<(i64, i64)> =
        (1..=imax as i64).flat_map(|i| (1..=imax as i64).map(move |j| (i, j))).collect();
    let items = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<CheckItem> {
            let (lhs, rhs) = f(i, j)?;
            let m = compare(&as_graded(lhs), &as_graded(rhs), d, None, "")?.map(|mut m| {
                m.t_power = None;
                m
            });
            Ok(CheckItem { first_mismatch: m, ..CheckItem::pass(i, j) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { check: name.to_string(), params: json!({"imax": imax, "deg": d}), items })
}
