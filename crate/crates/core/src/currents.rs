//! b-deformed currents, the catalytic operators `Y_+` and `Λ_Y`, and the
//! operator families `A_i(s)` and `M^(k,m)_i` built from them.
//!
//! Every family is available through the y-vector formalism and, where a
//! closed recursion exists, through that recursion as an independent route.

use std::collections::BTreeMap;

use crate::coeff::{elementary_symmetric, Coeff, Var};
use crate::error::{Error, Result};
use crate::weyl::WeylOp;

/// The zero mode `J_0 = α`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Charge(pub Coeff);

impl Charge {
    pub fn zero() -> Charge {
        Charge(Coeff::zero())
    }

    /// `α = u`, with `u` realized as the variable `u1`.
    pub fn u() -> Charge {
        Charge(Coeff::var(Var::U1))
    }
}

/// `J_i`: `p_{-i}` for `i < 0`, `(1+b) p_i^*` for `i > 0`, `α` for `i = 0`.
pub fn current(i: i64, charge: &Charge, wd: u32) -> WeylOp {
    match i {
        0 => WeylOp::scalar(charge.0.clone(), wd),
        i if i < 0 => WeylOp::creation(-i, wd),
        i => WeylOp::annihilation(i, wd).scale(&Coeff::one_plus_b()),
    }
}

/// A vector `Σ_j y_j V_j` with operator entries sharing one working degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YVector {
    entries: BTreeMap<u32, WeylOp>,
    wd: u32,
}

impl YVector {
    pub fn zero(wd: u32) -> YVector {
        YVector { entries: BTreeMap::new(), wd }
    }

    /// The seed `y_0 / (1+b)`.
    pub fn seed(wd: u32) -> YVector {
        let mut v = YVector::zero(wd);
        v.entries.insert(0, WeylOp::scalar(Coeff::inv_one_plus_b_pow(1), wd));
        v
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u32, WeylOp)>, wd: u32) -> YVector {
        let mut v = YVector::zero(wd);
        for (j, op) in entries {
            v.add_entry(j, &op);
        }
        v
    }

    pub fn working_degree(&self) -> u32 {
        self.wd
    }

    /// `[y_j] V`, zero when absent.
    pub fn entry(&self, j: u32) -> WeylOp {
        self.entries.get(&j).cloned().unwrap_or_else(|| WeylOp::zero(self.wd))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &WeylOp)> {
        self.entries.iter().map(|(&j, op)| (j, op))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index carrying a nonzero entry.
    pub fn max_index(&self) -> Option<u32> {
        self.entries.keys().next_back().copied()
    }

    fn add_entry(&mut self, j: u32, op: &WeylOp) {
        if op.is_zero() {
            return;
        }
        let op = op.truncate(self.wd).unwrap_or_else(|_| op.clone());
        match self.entries.entry(j) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(op);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&op);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &YVector) -> YVector {
        let mut out = self.clone();
        out.wd = self.wd.min(other.wd);
        for (&j, op) in &other.entries {
            out.add_entry(j, op);
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> YVector {
        YVector::from_entries(self.entries.iter().map(|(&j, op)| (j, op.scale(c))), self.wd)
    }

    /// `(Y_+ V)_m = V_{m-1}`.
    pub fn y_plus(&self) -> YVector {
        YVector { entries: self.entries.iter().map(|(&j, op)| (j + 1, op.clone())).collect(), wd: self.wd }
    }

    /// `(Λ_Y + shift) V` with `J_0 = charge`.
    pub fn lambda_y(&self, charge: &Charge, shift: &Coeff) -> YVector {
        let one_plus_b = Coeff::one_plus_b();
        let b = Coeff::var(Var::B);
        let mut out = YVector::zero(self.wd);
        for (&j, v) in &self.entries {
            // creations J_{-k} = p_k move y_j to y_{j-k}
            for k in 1..=j {
                out.add_entry(j - k, &v.left_mul_p(k as i64));
            }
            // annihilations J_k = (1+b) p_k^* move y_j to y_{j+k}
            for k in 1..=v.reach() {
                let term = v.left_mul_pstar(k as i64);
                if !term.is_zero() {
                    out.add_entry(j + k, &term.scale(&one_plus_b));
                }
            }
            let diag = &(&charge.0 + shift) + &(&b * &Coeff::from_int(j as i64));
            if !diag.is_zero() {
                out.add_entry(j, &v.scale(&diag));
            }
        }
        out
    }
}

/// The vector `Y_+ Λ_Y^s y_0/(1+b)` (charge 0); entry `i` is `A_i(s)`.
pub fn a_vector(s: u32, wd: u32) -> YVector {
    let mut v = YVector::seed(wd);
    for _ in 0..s {
        v = v.lambda_y(&Charge::zero(), &Coeff::zero());
    }
    v.y_plus()
}

/// `A_i(s)` through the y-vector formalism.
pub fn build_a(i: u32, s: u32, wd: u32) -> WeylOp {
    a_vector(s, wd).entry(i)
}

/// The vector `(Y_+ Π_c (Λ_Y + u_c))^m y_0/(1+b)`; entry `i` is `M^(k,m)_i`.
///
/// For `k = 1` the single shift is carried by the charge `J_0 = u`.
pub fn m_vector(k: usize, m: u32, wd: u32) -> Result<YVector> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} is outside 1..=3")));
    }
    let mut v = YVector::seed(wd);
    for _ in 0..m {
        if k == 1 {
            v = v.lambda_y(&Charge::u(), &Coeff::zero());
        } else {
            for c in 1..=k {
                v = v.lambda_y(&Charge::zero(), &Coeff::var(Var::u(c)));
            }
        }
        v = v.y_plus();
    }
    Ok(v)
}

/// `M^(k,m)_i` through the y-vector formalism.
pub fn build_m(k: usize, m: u32, i: u32, wd: u32) -> Result<WeylOp> {
    Ok(m_vector(k, m, wd)?.entry(i))
}

/// `J_{shift} ∘ op`, built with a generic composition at a sufficient budget.
fn j_compose(shift: i64, charge: &Charge, op: &WeylOp) -> Result<WeylOp> {
    let j = current(shift, charge, op.reach().max(op.working_degree()));
    j.compose(op)
}

/// All `A_i(s)`, `1 <= i <= wd + 1`, from the recursion
/// `A_i(s+1) = Σ_n J_{i-n} A_n(s) + b(i-1) A_i(s)`, `A_i(0) = δ_{i,1}/(1+b)`.
///
/// `A_n(s)` lowers degree by `n - 1`, so larger `n` vanish at this budget.
pub fn a_family_recursive(s: u32, wd: u32) -> Result<BTreeMap<u32, WeylOp>> {
    let top = wd + 1;
    let b = Coeff::var(Var::B);
    let mut cur: BTreeMap<u32, WeylOp> = BTreeMap::new();
    cur.insert(1, WeylOp::scalar(Coeff::inv_one_plus_b_pow(1), wd));
    for _ in 0..s {
        let mut next = BTreeMap::new();
        for i in 1..=top {
            let mut acc = WeylOp::zero(wd);
            for (&n, a) in &cur {
                acc.add_assign(&j_compose(i as i64 - n as i64, &Charge::zero(), a)?);
            }
            if let Some(a) = cur.get(&i) {
                acc.add_assign(&a.scale(&(&b * &Coeff::from_int(i as i64 - 1))));
            }
            if !acc.is_zero() {
                next.insert(i, acc);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// All `M^(1,m)_i`, `1 <= i <= wd + m`, from the recursion
/// `M^(1,m+1)_i = Σ_n J_{i-n-1} M^(1,m)_n + b(i-1) M^(1,m)_{i-1}` with
/// `M^(1,1)_i = J_{i-1}/(1+b)` and `J_0 = u`.
pub fn m1_family_recursive(m: u32, wd: u32) -> Result<BTreeMap<u32, WeylOp>> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let b = Coeff::var(Var::B);
    let charge = Charge::u();
    let inv = Coeff::inv_one_plus_b_pow(1);
    let mut cur: BTreeMap<u32, WeylOp> = BTreeMap::new();
    for i in 1..=wd + 2 {
        let op = current(i as i64 - 1, &charge, wd).scale(&inv);
        if !op.is_zero() {
            cur.insert(i, op);
        }
    }
    for step in 1..m {
        let mut next = BTreeMap::new();
        for i in 1..=wd + step + 2 {
            let mut acc = WeylOp::zero(wd);
            for (&n, op) in &cur {
                acc.add_assign(&j_compose(i as i64 - n as i64 - 1, &charge, op)?);
            }
            if i >= 2 {
                if let Some(op) = cur.get(&(i - 1)) {
                    acc.add_assign(&op.scale(&(&b * &Coeff::from_int(i as i64 - 1))));
                }
            }
            if !acc.is_zero() {
                next.insert(i, acc);
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// `Σ_{s=0}^k e_{k-s}(u_1..u_k) A_i(s)`.
pub fn m_from_elementary(k: usize, i: u32, wd: u32) -> WeylOp {
    let vars: Vec<Var> = (1..=k).map(Var::u).collect();
    let mut acc = WeylOp::zero(wd);
    for s in 0..=k {
        let e = elementary_symmetric(k - s, &vars);
        acc.add_assign(&build_a(i, s as u32, wd).scale(&e));
    }
    acc
}
