//! `O_L / t^N O_L` for the totally ramified extension `L = K(Λ_k)`, presented
//! as `(F_q[t]/t^N)[π] / g_k(π)` with `g_k` Eisenstein of degree `e`.
//!
//! An element is stored as `e` coefficient blocks of `N` digits each; digit
//! `(i, j)` is the coefficient of `t^j π^i`, which has `v_L = e·j + i`. These
//! positions are pairwise distinct, so `v_L` is the least occupied position.
//! Each element carries a horizon `H <= e·N`: it is known modulo `π^H`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{eisenstein_factor, newton_check, LubinTate};
use crate::error::{Error, Result};
use crate::galois::{Fq, FqElem};
use crate::laurent::{digit_char, parse_digit, RElem, TruncSeries};
use crate::poly::{Coeff, TElem, TPoly};
use crate::Rational;

const MAX_DIGITS: usize = 1 << 18;

pub struct ExtField {
    field: Fq,
    k: u32,
    n: usize,
    e: usize,
    g: TPoly,
    /// `a_0 .. a_{e-1}` of the monic `g_k`, reduced mod `t^N`.
    a: Vec<Vec<u16>>,
    /// `t/π`, a unit.
    tau: Vec<u16>,
    /// `π` itself (which is `-a_0` when `e = 1`).
    pi: Vec<u16>,
    root_valuation: Rational,
    lt: LubinTate,
}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L(q={}, k={}, N={}, e={})", self.field.q(), self.k, self.n, self.e)
    }
}

fn tmul_acc(f: Fq, out: &mut [u16], a: &[u16], b: &[u16], negate: bool) {
    let n = out.len();
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            if bj == 0 {
                continue;
            }
            let p = f.mul_codes(ai, bj);
            out[i + j] = if negate { f.sub_codes(out[i + j], p) } else { f.add_codes(out[i + j], p) };
        }
    }
}

impl ExtField {
    /// Builds `L_N` for `q`, `k`, working `t`-precision `n`.
    pub fn new(q: u32, k: u32, n: usize) -> Result<Arc<ExtField>> {
        let field = Fq::new(q)?;
        if k == 0 || n == 0 {
            return Err(Error::Domain("k and N must be positive".into()));
        }
        let e = (q as usize)
            .checked_pow(k - 1)
            .map(|x| x * (q as usize - 1))
            .filter(|&e| e.saturating_mul(n) <= MAX_DIGITS)
            .ok_or_else(|| Error::Budget(format!("e·N too large for q = {q}, k = {k}, N = {n}")))?;
        let g = eisenstein_factor(field, k)?;
        let root_valuation = newton_check(&g)?;
        if g.degree() != Some(e) {
            return Err(Error::Consistency(format!("deg g_k = {:?}, expected {e}", g.degree())));
        }
        let digits = |c: &TElem| -> Vec<u16> { (0..n).map(|j| c.coeff(j).code() as u16).collect() };
        let a: Vec<Vec<u16>> = (0..e).map(|i| digits(g.coeff(i))).collect();

        // a_0 = t·u_0 with u_0 a unit; t/π = -u_0^{-1}(π^{e-1} + a_{e-1} π^{e-2} + ... + a_1)
        let a0 = TruncSeries::from_telem(g.coeff(0), n as i64 + 1);
        let u0_inv = a0.shift_by(-1).inv_to(n as i64)?;
        let mut tau = vec![0u16; e * n];
        for i in 0..e {
            let coeff = TruncSeries::from_telem(g.coeff(i + 1), n as i64);
            let c = -(u0_inv.clone() * coeff);
            for j in 0..n {
                tau[i * n + j] = c.coeff(j as i64).code() as u16;
            }
        }
        let mut pi = vec![0u16; e * n];
        if e == 1 {
            for j in 0..n {
                pi[j] = field.neg_code(a[0][j]);
            }
        } else {
            pi[n] = 1;
        }
        Ok(Arc::new(ExtField { field, k, n, e, g, a, tau, pi, root_valuation, lt: LubinTate::new(field, k) }))
    }

    pub fn fq(&self) -> Fq {
        self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Working `t`-adic precision `N`.
    pub fn precision(&self) -> usize {
        self.n
    }

    /// Ramification index `e = q^{k-1}(q-1)`.
    pub fn e(&self) -> usize {
        self.e
    }

    /// The largest horizon, `e·N`.
    pub fn max_horizon(&self) -> i64 {
        (self.e * self.n) as i64
    }

    /// The Eisenstein polynomial `g_k`.
    pub fn g(&self) -> &TPoly {
        &self.g
    }

    /// `v_t` of every root of `g_k`, i.e. `1/e`.
    pub fn root_valuation(&self) -> Rational {
        self.root_valuation
    }

    pub fn lubin_tate(&self) -> &LubinTate {
        &self.lt
    }

    fn make(self: &Arc<Self>, digits: Vec<u16>, horizon: i64) -> ExtElem {
        let mut x = ExtElem { ext: Arc::clone(self), d: digits, horizon: horizon.min(self.max_horizon()) };
        x.truncate();
        x
    }

    pub fn zero(self: &Arc<Self>) -> ExtElem {
        self.make(vec![0; self.e * self.n], self.max_horizon())
    }

    pub fn one(self: &Arc<Self>) -> ExtElem {
        self.from_fq(self.field.one())
    }

    pub fn from_fq(self: &Arc<Self>, c: FqElem) -> ExtElem {
        let mut d = vec![0; self.e * self.n];
        d[0] = c.code() as u16;
        self.make(d, self.max_horizon())
    }

    /// Embeds an exact element of `F_q[t]`.
    pub fn from_telem(self: &Arc<Self>, c: &TElem) -> ExtElem {
        let mut d = vec![0; self.e * self.n];
        for (j, slot) in d.iter_mut().enumerate().take(self.n) {
            *slot = c.coeff(j).code() as u16;
        }
        self.make(d, self.max_horizon())
    }

    /// Embeds the canonical lift of `a` in `R`.
    pub fn from_relem(self: &Arc<Self>, a: RElem) -> ExtElem {
        self.from_telem(&a.to_telem())
    }

    pub fn t(self: &Arc<Self>) -> ExtElem {
        self.from_telem(&TElem::monomial(self.field.one(), 1))
    }

    /// The uniformizer `π`, a root of `g_k`; this is `ζ_1`.
    pub fn pi(self: &Arc<Self>) -> ExtElem {
        self.make(self.pi.clone(), self.max_horizon())
    }

    /// The distinguished generator `ζ_1` of `Λ_k` (the class of `π`).
    pub fn zeta1(self: &Arc<Self>) -> ExtElem {
        self.pi()
    }

    fn tau(self: &Arc<Self>) -> ExtElem {
        self.make(self.tau.clone(), self.max_horizon())
    }

    /// Evaluates a polynomial with exact `F_q[t]` coefficients.
    pub fn eval_tpoly(self: &Arc<Self>, p: &TPoly, x: &ExtElem) -> ExtElem {
        p.coeffs().iter().rev().fold(self.zero(), |acc, c| &(&acc * x) + &self.from_telem(c))
    }

    /// `[a]_f(λ) = sum_j c_j f^{∘j}(λ)`, for `λ` killed by `f^{∘k}`.
    pub fn module_action(self: &Arc<Self>, a: RElem, lambda: &ExtElem) -> Result<ExtElem> {
        let orbit = self.f_orbit(lambda);
        if !orbit[self.k as usize].is_zero() {
            return Err(Error::Domain("λ is not a t^k-torsion point of f".into()));
        }
        Ok(self.combine(a, &orbit))
    }

    /// `f^{∘0}(λ), ..., f^{∘k}(λ)`.
    pub fn f_orbit(self: &Arc<Self>, lambda: &ExtElem) -> Vec<ExtElem> {
        let t = self.t();
        let q = self.q() as u64;
        let mut out = vec![lambda.clone()];
        for _ in 0..self.k {
            let last = out.last().unwrap();
            out.push(&(&t * last) + &last.pow(q));
        }
        out
    }

    fn combine(self: &Arc<Self>, a: RElem, orbit: &[ExtElem]) -> ExtElem {
        a.coeffs()
            .into_iter()
            .zip(orbit)
            .filter(|(c, _)| !c.is_zero())
            .fold(self.zero(), |acc, (c, x)| &acc + &(&self.from_fq(c) * x))
    }

    /// `[a]_f(ζ_1)` for every `a` of `R`, in code order; `orbit[a.code()]`.
    pub fn torsion_table(self: &Arc<Self>, ring: crate::laurent::ResidueRing) -> Vec<ExtElem> {
        let orbit = self.f_orbit(&self.zeta1());
        ring.elements().map(|a| self.combine(a, &orbit)).collect()
    }

    /// Least `m` with `f^{∘m}(λ) = 0`.
    pub fn order_of(self: &Arc<Self>, lambda: &ExtElem) -> Result<u32> {
        self.f_orbit(lambda)
            .iter()
            .position(|x| x.is_zero())
            .map(|m| m as u32)
            .ok_or_else(|| Error::Domain("λ is not a t^k-torsion point of f".into()))
    }

    pub fn from_json(self: &Arc<Self>, j: &ExtElemJson) -> Result<ExtElem> {
        if j.digits.len() != self.e {
            return Err(Error::Parse(format!("expected {} digit blocks, found {}", self.e, j.digits.len())));
        }
        let mut d = Vec::with_capacity(self.e * self.n);
        for block in &j.digits {
            if block.chars().count() != self.n {
                return Err(Error::Parse(format!("digit block {block:?} should have {} digits", self.n)));
            }
            for c in block.chars() {
                d.push(parse_digit(c, self.q())? as u16);
            }
        }
        Ok(self.make(d, j.horizon))
    }
}

/// An element of `O_L` known modulo `π^horizon`.
#[derive(Clone)]
pub struct ExtElem {
    ext: Arc<ExtField>,
    d: Vec<u16>,
    horizon: i64,
}

/// Serialized form: horizon plus one `N`-digit string per power of `π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtElemJson {
    pub horizon: i64,
    pub digits: Vec<String>,
}

impl ExtElem {
    pub fn ext(&self) -> &Arc<ExtField> {
        &self.ext
    }

    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    fn pos(&self, idx: usize) -> i64 {
        let (i, j) = (idx / self.ext.n, idx % self.ext.n);
        (self.ext.e * j + i) as i64
    }

    fn truncate(&mut self) {
        let h = self.horizon;
        for idx in 0..self.d.len() {
            if self.pos(idx) >= h {
                self.d[idx] = 0;
            }
        }
    }

    /// Zero modulo `π^horizon`.
    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|&c| c == 0)
    }

    /// `v_L`, or `None` when the element is zero to working precision.
    pub fn val_opt(&self) -> Option<i64> {
        (0..self.d.len()).filter(|&i| self.d[i] != 0).map(|i| self.pos(i)).min()
    }

    /// `v_L`; a precision error when the element is zero to working precision.
    pub fn valuation(&self) -> Result<i64> {
        self.val_opt()
            .ok_or_else(|| Error::Precision(format!("v_L of an element that is zero modulo π^{}", self.horizon)))
    }

    /// Image in the residue field `O_L/m_L = F_q`.
    pub fn residue(&self) -> FqElem {
        self.ext.field.elem(self.d[0] as u32)
    }

    pub fn is_unit(&self) -> bool {
        self.d[0] != 0
    }

    pub fn with_horizon(&self, h: i64) -> ExtElem {
        self.ext.make(self.d.clone(), h.min(self.horizon))
    }

    /// Division by `π`; requires `v_L >= 1` and costs one unit of horizon.
    pub fn div_pi(&self) -> Result<ExtElem> {
        if self.d[0] != 0 {
            return Err(Error::Domain("element is not divisible by π".into()));
        }
        let (e, n) = (self.ext.e, self.ext.n);
        let mut upper = vec![0u16; e * n];
        for i in 1..e {
            upper[(i - 1) * n..i * n].copy_from_slice(&self.d[i * n..(i + 1) * n]);
        }
        let mut low = vec![0u16; e * n];
        low[..n - 1].copy_from_slice(&self.d[1..n]);
        let ext = &self.ext;
        let rest = &ext.make(low, ext.max_horizon()) * &ext.tau();
        let out = &ext.make(upper, ext.max_horizon()) + &rest;
        Ok(out.with_horizon(self.horizon - 1))
    }

    pub fn div_pi_pow(&self, m: i64) -> Result<ExtElem> {
        let mut x = self.clone();
        for _ in 0..m {
            x = x.div_pi()?;
        }
        Ok(x)
    }

    /// Inverse of a unit, by Newton iteration.
    pub fn inv_unit(&self) -> Result<ExtElem> {
        if !self.is_unit() {
            return Err(Error::Domain("element is not a unit of O_L".into()));
        }
        let ext = &self.ext;
        let one = ext.one();
        let c0 = ext.field.elem(self.d[0] as u32).inv()?;
        let mut y = ext.from_fq(c0);
        for _ in 0..64 {
            let r = &one - &(self * &y);
            if r.is_zero() {
                break;
            }
            y = &y + &(&y * &r);
        }
        Ok(y.with_horizon(self.horizon))
    }

    /// `x / y` when the quotient lies in `O_L`.
    pub fn checked_div(&self, y: &ExtElem) -> Result<ExtElem> {
        let m = y.valuation()?;
        match self.val_opt() {
            None => {
                return Ok(self.ext.zero().with_horizon(self.horizon - m));
            }
            Some(vx) if vx < m => {
                return Err(Error::Domain(format!("quotient has v_L = {} < 0", vx - m)));
            }
            _ => {}
        }
        let xs = self.div_pi_pow(m)?;
        let ys = y.div_pi_pow(m)?;
        Ok(&xs * &ys.inv_unit()?)
    }

    pub fn pow(&self, mut e: u64) -> ExtElem {
        let mut base = self.clone();
        let mut acc = self.ext.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_json(&self) -> ExtElemJson {
        let n = self.ext.n;
        let digits = (0..self.ext.e)
            .map(|i| self.d[i * n..(i + 1) * n].iter().map(|&c| digit_char(c as u32)).collect())
            .collect();
        ExtElemJson { horizon: self.horizon, digits }
    }

    fn same_field(&self, other: &ExtElem) {
        debug_assert!(Arc::ptr_eq(&self.ext, &other.ext), "operands from different extensions");
    }
}

impl PartialEq for ExtElem {
    /// Equality modulo `π^min(horizons)`.
    fn eq(&self, other: &Self) -> bool {
        if !Arc::ptr_eq(&self.ext, &other.ext) {
            return false;
        }
        let h = self.horizon.min(other.horizon);
        (0..self.d.len()).all(|i| self.pos(i) >= h || self.d[i] == other.d[i])
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = self.to_json();
        write!(f, "[{}] mod π^{}", j.digits.join("|"), j.horizon)
    }
}

impl<'a> Add<&'a ExtElem> for &'a ExtElem {
    type Output = ExtElem;
    fn add(self, rhs: &'a ExtElem) -> ExtElem {
        self.same_field(rhs);
        let f = self.ext.field;
        let d = self.d.iter().zip(&rhs.d).map(|(&a, &b)| f.add_codes(a, b)).collect();
        self.ext.make(d, self.horizon.min(rhs.horizon))
    }
}

impl<'a> Sub<&'a ExtElem> for &'a ExtElem {
    type Output = ExtElem;
    fn sub(self, rhs: &'a ExtElem) -> ExtElem {
        self.same_field(rhs);
        let f = self.ext.field;
        let d = self.d.iter().zip(&rhs.d).map(|(&a, &b)| f.sub_codes(a, b)).collect();
        self.ext.make(d, self.horizon.min(rhs.horizon))
    }
}

impl Neg for &ExtElem {
    type Output = ExtElem;
    fn neg(self) -> ExtElem {
        let f = self.ext.field;
        ExtElem {
            ext: Arc::clone(&self.ext),
            d: self.d.iter().map(|&a| f.neg_code(a)).collect(),
            horizon: self.horizon,
        }
    }
}

impl<'a> Mul<&'a ExtElem> for &'a ExtElem {
    type Output = ExtElem;
    fn mul(self, rhs: &'a ExtElem) -> ExtElem {
        self.same_field(rhs);
        let ext = &self.ext;
        let (e, n, f) = (ext.e, ext.n, ext.field);
        let mut prod = vec![0u16; (2 * e - 1) * n];
        for i1 in 0..e {
            let c1 = &self.d[i1 * n..(i1 + 1) * n];
            if c1.iter().all(|&c| c == 0) {
                continue;
            }
            for i2 in 0..e {
                let c2 = &rhs.d[i2 * n..(i2 + 1) * n];
                let s = (i1 + i2) * n;
                tmul_acc(f, &mut prod[s..s + n], c1, c2, false);
            }
        }
        // π^e = -(a_{e-1} π^{e-1} + ... + a_0)
        for deg in (e..2 * e - 1).rev() {
            let c: Vec<u16> = prod[deg * n..(deg + 1) * n].to_vec();
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            for i in 0..e {
                let s = (deg - e + i) * n;
                tmul_acc(f, &mut prod[s..s + n], &c, &ext.a[i], true);
            }
        }
        prod.truncate(e * n);
        let vx = self.val_opt().unwrap_or(self.horizon);
        let vy = rhs.val_opt().unwrap_or(rhs.horizon);
        let h = (self.horizon + vy).min(rhs.horizon + vx);
        ext.make(prod, h)
    }
}

impl Add for ExtElem {
    type Output = ExtElem;
    fn add(self, rhs: ExtElem) -> ExtElem {
        &self + &rhs
    }
}

impl Sub for ExtElem {
    type Output = ExtElem;
    fn sub(self, rhs: ExtElem) -> ExtElem {
        &self - &rhs
    }
}

impl Mul for ExtElem {
    type Output = ExtElem;
    fn mul(self, rhs: ExtElem) -> ExtElem {
        &self * &rhs
    }
}

impl Neg for ExtElem {
    type Output = ExtElem;
    fn neg(self) -> ExtElem {
        -&self
    }
}

impl Coeff for ExtElem {
    fn is_zero(&self) -> bool {
        ExtElem::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        self.ext.zero()
    }

    fn one_like(&self) -> Self {
        self.ext.one()
    }
}
