//! Truncated arithmetic in `A = F_q[[t]]` and `K = F_q((t))`, and the finite
//! quotient `R = A/t^k A` together with the free module `R^n`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::galois::{Fq, FqElem};
use crate::poly::{Coeff, TElem};
use crate::valuation::Valuation;

/// Absolute precision used for elements that are known exactly.
pub const EXACT: i64 = i64::MAX / 8;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

pub(crate) fn digit_char(code: u32) -> char {
    DIGITS[code as usize] as char
}

pub(crate) fn parse_digit(c: char, q: u32) -> Result<u32> {
    let d = c.to_digit(36).ok_or_else(|| Error::Parse(format!("invalid digit {c:?}")))?;
    if d >= q {
        return Err(Error::Parse(format!("digit {c:?} out of range for q = {q}")));
    }
    Ok(d)
}

/// An element of `F_q((t))` known modulo `t^prec`:
/// `t^shift * (c_0 + c_1 t + ...) + O(t^prec)`.
///
/// After normalization `c_0 != 0` (so `shift` is the valuation) unless the
/// element is zero to precision, in which case `coeffs` is empty.
#[derive(Clone)]
pub struct TruncSeries {
    field: Fq,
    shift: i64,
    coeffs: Vec<FqElem>,
    prec: i64,
}

impl TruncSeries {
    /// `t^shift * sum coeffs[i] t^i + O(t^prec)`.
    pub fn new(field: Fq, shift: i64, coeffs: Vec<FqElem>, prec: i64) -> Self {
        let mut s = TruncSeries { field, shift, coeffs, prec };
        s.normalize();
        s
    }

    pub fn zero(field: Fq, prec: i64) -> Self {
        TruncSeries { field, shift: prec, coeffs: Vec::new(), prec }
    }

    pub fn one(field: Fq) -> Self {
        TruncSeries::new(field, 0, vec![field.one()], EXACT)
    }

    /// `t^e`, exact.
    pub fn t_pow(field: Fq, e: i64) -> Self {
        TruncSeries::new(field, e, vec![field.one()], EXACT)
    }

    /// An exact polynomial in `t`, viewed modulo `t^prec`.
    pub fn from_telem(p: &TElem, prec: i64) -> Self {
        let field = p.zero_coeff().field();
        TruncSeries::new(field, 0, p.coeffs().to_vec(), prec)
    }

    /// Integer coefficients `c_0, c_1, ...` of a power series known mod `t^prec`.
    pub fn from_ints(field: Fq, coeffs: &[i64], prec: i64) -> Self {
        TruncSeries::new(field, 0, coeffs.iter().map(|&c| field.from_int(c)).collect(), prec)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.shift = self.prec;
            }
            Some(i) => {
                self.coeffs.drain(..i);
                self.shift += i as i64;
            }
        }
        let max_len = (self.prec - self.shift).max(0) as usize;
        self.coeffs.truncate(max_len);
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.shift = self.prec;
        }
    }

    pub fn field(&self) -> Fq {
        self.field
    }

    /// Absolute precision: the element is known modulo `t^precision()`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `v_t`, or `None` when the element is zero to working precision.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.shift)
    }

    /// `|a| = q^{-v_t(a)}`; zero to precision counts as `0`.
    pub fn abs_value(&self) -> f64 {
        match self.valuation() {
            Some(v) => Valuation::Finite(v).abs_value(self.field.q()),
            None => 0.0,
        }
    }

    /// Coefficient of `t^i`.
    pub fn coeff(&self, i: i64) -> FqElem {
        if i < self.shift {
            return self.field.zero();
        }
        self.coeffs.get((i - self.shift) as usize).copied().unwrap_or(self.field.zero())
    }

    pub fn with_precision(&self, prec: i64) -> Self {
        TruncSeries::new(self.field, self.shift, self.coeffs.clone(), prec.min(self.prec))
    }

    /// Division by `t^e`, exact on the representation.
    pub fn shift_by(&self, e: i64) -> Self {
        let prec = if self.is_exact() { EXACT } else { self.prec + e };
        TruncSeries::new(self.field, self.shift + e, self.coeffs.clone(), prec)
    }

    /// Multiplicative inverse at the element's own relative precision.
    ///
    /// Exact inputs that are not monomials have an infinite inverse; use
    /// [`TruncSeries::inv_to`] for those.
    pub fn inv(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::Precision(format!("inverse of an element that is zero modulo t^{}", self.prec)))?;
        if self.is_exact() {
            if self.coeffs.len() == 1 {
                return Ok(TruncSeries::new(self.field, -v, vec![self.coeffs[0].inv()?], EXACT));
            }
            return Err(Error::Precision("exact non-monomial needs an explicit precision".into()));
        }
        self.inv_to(self.prec - v - v)
    }

    /// Inverse known modulo `t^prec` (absolute), capped by what the input supports.
    pub fn inv_to(&self, prec: i64) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::Precision(format!("inverse of an element that is zero modulo t^{}", self.prec)))?;
        let rel_in = if self.is_exact() { EXACT } else { self.prec - v };
        let rel = (prec + v).min(rel_in);
        if rel <= 0 {
            return Err(Error::Precision("no digits left for the inverse".into()));
        }
        let n = rel as usize;
        let u = &self.coeffs;
        let c0_inv = u[0].inv()?;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // b_i = -c0^{-1} * sum_{j=1..i} u_j b_{i-j}, with b_0 = c0^{-1}
            if i == 0 {
                out.push(c0_inv);
                continue;
            }
            let mut acc = self.field.zero();
            for j in 1..=i.min(u.len().saturating_sub(1)) {
                acc = acc + u[j] * out[i - j];
            }
            out.push(-(acc * c0_inv));
        }
        Ok(TruncSeries::new(self.field, -v, out, -v + rel))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.inv()?)
    }

    /// Projection `A -> R = A/t^k A`.
    pub fn to_relem(&self, ring: ResidueRing) -> Result<RElem> {
        if ring.field() != self.field {
            return Err(Error::Domain("field mismatch".into()));
        }
        if self.valuation().is_some_and(|v| v < 0) {
            return Err(Error::Domain("element is not in F_q[[t]]".into()));
        }
        if self.prec < ring.k() as i64 {
            return Err(Error::Precision(format!("known modulo t^{} but R needs t^{}", self.prec, ring.k())));
        }
        let digits: Vec<FqElem> = (0..ring.k() as i64).map(|i| self.coeff(i)).collect();
        Ok(ring.from_coeffs(&digits))
    }

    /// Compact digit string `c0c1...c{N-1}` for elements of `A` with finite precision.
    pub fn digit_string(&self) -> Result<String> {
        if self.is_exact() || self.valuation().is_some_and(|v| v < 0) {
            return Err(Error::Domain("digit strings need a finite-precision element of A".into()));
        }
        Ok((0..self.prec).map(|i| digit_char(self.coeff(i).code())).collect())
    }

    pub fn parse_digit_string(field: Fq, s: &str) -> Result<Self> {
        let coeffs = s.chars().map(|c| parse_digit(c, field.q()).map(|d| field.elem(d))).collect::<Result<Vec<_>>>()?;
        let prec = coeffs.len() as i64;
        Ok(TruncSeries::new(field, 0, coeffs, prec))
    }
}

impl PartialEq for TruncSeries {
    /// Equality up to the common precision.
    fn eq(&self, other: &Self) -> bool {
        if self.field != other.field {
            return false;
        }
        let prec = self.prec.min(other.prec);
        let lo = self.shift.min(other.shift);
        if prec >= EXACT {
            return self.shift == other.shift && self.coeffs == other.coeffs;
        }
        (lo..prec).all(|i| self.coeff(i) == other.coeff(i))
    }
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.shift + i as i64;
            let mono = match e {
                0 => String::new(),
                1 => "t".into(),
                _ => format!("t^{e}"),
            };
            terms.push(match (e, c.code()) {
                (0, _) => c.to_string(),
                (_, 1) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.is_exact() {
            write!(f, "{body}")
        } else {
            write!(f, "{body} (mod t^{})", self.prec)
        }
    }
}

impl Add for TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: TruncSeries) -> TruncSeries {
        debug_assert!(self.field == rhs.field);
        let prec = self.prec.min(rhs.prec);
        if self.is_zero() {
            return rhs.with_precision(prec);
        }
        if rhs.is_zero() {
            return self.with_precision(prec);
        }
        let lo = self.shift.min(rhs.shift);
        let hi = (self.shift + self.coeffs.len() as i64).max(rhs.shift + rhs.coeffs.len() as i64).min(prec);
        let coeffs = (lo..hi).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        TruncSeries::new(self.field, lo, coeffs, prec)
    }
}

impl Neg for TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        let coeffs = self.coeffs.iter().map(|&c| -c).collect();
        TruncSeries { coeffs, ..self }
    }
}

impl Sub for TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: TruncSeries) -> TruncSeries {
        self + (-rhs)
    }
}

impl Mul for TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: TruncSeries) -> TruncSeries {
        debug_assert!(self.field == rhs.field);
        let va = self.shift;
        let vb = rhs.shift;
        let prec = (va.saturating_add(rhs.prec)).min(vb.saturating_add(self.prec)).min(EXACT);
        if self.is_zero() || rhs.is_zero() {
            return TruncSeries::zero(self.field, prec);
        }
        let shift = va + vb;
        let len = ((self.coeffs.len() + rhs.coeffs.len() - 1) as i64).min(prec - shift).max(0) as usize;
        let mut out = vec![self.field.zero(); len];
        for (i, &a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j] + a * b;
            }
        }
        TruncSeries::new(self.field, shift, out, prec)
    }
}

impl Coeff for TruncSeries {
    fn is_zero(&self) -> bool {
        TruncSeries::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        TruncSeries::zero(self.field, EXACT)
    }

    fn one_like(&self) -> Self {
        TruncSeries::one(self.field)
    }
}

/// Largest ring size for which addition and multiplication tables are built.
const TABLE_LIMIT: u32 = 1024;

pub struct ResidueRingData {
    field: Fq,
    k: u32,
    size: u32,
    add: Option<Vec<u32>>,
    mul: Option<Vec<u32>>,
}

/// Handle to the cached ring `R = F_q[t]/(t^k)`.
///
/// Elements are addressed by codes `sum_i c_i q^i` where `c_i` is the code of
/// the coefficient of `t^i`; the canonical representative is the unique
/// polynomial of degree `< k`.
#[derive(Clone, Copy)]
pub struct ResidueRing(&'static ResidueRingData);

impl PartialEq for ResidueRing {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for ResidueRing {}

impl fmt::Debug for ResidueRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[t]/(t^{})", self.0.field.q(), self.0.k)
    }
}

static RINGS: OnceLock<Mutex<HashMap<(u32, u32), &'static ResidueRingData>>> = OnceLock::new();

impl ResidueRing {
    pub fn new(q: u32, k: u32) -> Result<ResidueRing> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        let field = Fq::new(q)?;
        let size = (q as u64)
            .checked_pow(k)
            .filter(|&s| s <= u32::MAX as u64)
            .ok_or_else(|| Error::Budget(format!("|R| = {q}^{k} does not fit the element encoding")))?
            as u32;
        let cache = RINGS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().expect("ring cache poisoned");
        if let Some(r) = cache.get(&(q, k)) {
            return Ok(ResidueRing(r));
        }
        let mut data = ResidueRingData { field, k, size, add: None, mul: None };
        if size <= TABLE_LIMIT {
            let raw = ResidueRing(Box::leak(Box::new(ResidueRingData { field, k, size, add: None, mul: None })));
            let mut add = Vec::with_capacity((size * size) as usize);
            let mut mul = Vec::with_capacity((size * size) as usize);
            for a in 0..size {
                for b in 0..size {
                    add.push(raw.add_slow(a, b));
                    mul.push(raw.mul_slow(a, b));
                }
            }
            data.add = Some(add);
            data.mul = Some(mul);
        }
        let data: &'static ResidueRingData = Box::leak(Box::new(data));
        cache.insert((q, k), data);
        Ok(ResidueRing(data))
    }

    pub fn field(self) -> Fq {
        self.0.field
    }

    pub fn q(self) -> u32 {
        self.0.field.q()
    }

    pub fn k(self) -> u32 {
        self.0.k
    }

    /// `|R| = q^k`.
    pub fn size(self) -> u32 {
        self.0.size
    }

    pub fn elem(self, code: u32) -> RElem {
        assert!(code < self.0.size);
        RElem { ring: self, code }
    }

    pub fn zero(self) -> RElem {
        self.elem(0)
    }

    pub fn one(self) -> RElem {
        self.elem(1)
    }

    /// `t` (which is zero when `k = 1`).
    pub fn t(self) -> RElem {
        if self.0.k == 1 {
            self.zero()
        } else {
            self.elem(self.q())
        }
    }

    pub fn elements(self) -> impl Iterator<Item = RElem> {
        (0..self.0.size).map(move |c| self.elem(c))
    }

    pub fn units(self) -> impl Iterator<Item = RElem> {
        self.elements().filter(|a| a.is_unit())
    }

    pub fn from_coeffs(self, coeffs: &[FqElem]) -> RElem {
        let q = self.q();
        let code = coeffs.iter().take(self.0.k as usize).rev().fold(0u32, |acc, c| acc * q + c.code());
        self.elem(code)
    }

    pub fn from_ints(self, coeffs: &[i64]) -> RElem {
        let f = self.field();
        let cs: Vec<FqElem> = coeffs.iter().map(|&c| f.from_int(c)).collect();
        self.from_coeffs(&cs)
    }

    #[inline]
    pub(crate) fn digit(self, code: u32, i: u32) -> u16 {
        ((code / self.q().pow(i)) % self.q()) as u16
    }

    pub(crate) fn digits(self, code: u32) -> Vec<u16> {
        let q = self.q();
        let mut c = code;
        (0..self.0.k)
            .map(|_| {
                let d = (c % q) as u16;
                c /= q;
                d
            })
            .collect()
    }

    fn undigits(self, ds: &[u16]) -> u32 {
        let q = self.q();
        ds.iter().rev().fold(0u32, |acc, &d| acc * q + d as u32)
    }

    fn add_slow(self, a: u32, b: u32) -> u32 {
        let f = self.field();
        let s: Vec<u16> = self.digits(a).iter().zip(self.digits(b)).map(|(&x, y)| f.add_codes(x, y)).collect();
        self.undigits(&s)
    }

    fn mul_slow(self, a: u32, b: u32) -> u32 {
        let f = self.field();
        let (da, db) = (self.digits(a), self.digits(b));
        let k = self.0.k as usize;
        let mut out = vec![0u16; k];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k - i {
                out[i + j] = f.add_codes(out[i + j], f.mul_codes(da[i], db[j]));
            }
        }
        self.undigits(&out)
    }

    #[inline]
    pub(crate) fn add_codes(self, a: u32, b: u32) -> u32 {
        match &self.0.add {
            Some(t) => t[(a * self.0.size + b) as usize],
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub(crate) fn mul_codes(self, a: u32, b: u32) -> u32 {
        match &self.0.mul {
            Some(t) => t[(a * self.0.size + b) as usize],
            None => self.mul_slow(a, b),
        }
    }

    pub(crate) fn neg_code(self, a: u32) -> u32 {
        let f = self.field();
        let d: Vec<u16> = self.digits(a).iter().map(|&x| f.neg_code(x)).collect();
        self.undigits(&d)
    }

    pub(crate) fn sub_codes(self, a: u32, b: u32) -> u32 {
        self.add_codes(a, self.neg_code(b))
    }

    #[inline]
    pub(crate) fn is_unit_code(self, a: u32) -> bool {
        !a.is_multiple_of(self.q())
    }

    pub(crate) fn inv_code(self, a: u32) -> Option<u32> {
        if !self.is_unit_code(a) {
            return None;
        }
        let f = self.field();
        let u = self.digits(a);
        let c0_inv = f.inv_code(u[0]);
        let k = self.0.k as usize;
        let mut out = vec![0u16; k];
        out[0] = c0_inv;
        for i in 1..k {
            let mut acc = 0u16;
            for j in 1..=i {
                acc = f.add_codes(acc, f.mul_codes(u[j], out[i - j]));
            }
            out[i] = f.neg_code(f.mul_codes(acc, c0_inv));
        }
        Some(self.undigits(&out))
    }

    pub(crate) fn valuation_code(self, a: u32) -> Valuation {
        if a == 0 {
            return Valuation::Infinite;
        }
        let mut v = 0;
        let mut c = a;
        while c.is_multiple_of(self.q()) {
            c /= self.q();
            v += 1;
        }
        Valuation::Finite(v)
    }
}

/// An element of `R = A/t^k A`, i.e. a polynomial in `t` of degree `< k`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct RElem {
    ring: ResidueRing,
    code: u32,
}

impl std::hash::Hash for RElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl PartialOrd for RElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.code.cmp(&other.code)
    }
}

impl RElem {
    pub fn ring(self) -> ResidueRing {
        self.ring
    }

    pub fn code(self) -> u32 {
        self.code
    }

    /// Coefficients `a_0, ..., a_{k-1}`.
    pub fn coeffs(self) -> Vec<FqElem> {
        let f = self.ring.field();
        self.ring.digits(self.code).into_iter().map(|d| f.elem(d as u32)).collect()
    }

    pub fn coeff(self, i: u32) -> FqElem {
        self.ring.field().elem(self.ring.digit(self.code, i) as u32)
    }

    pub fn is_zero(self) -> bool {
        self.code == 0
    }

    pub fn is_unit(self) -> bool {
        self.ring.is_unit_code(self.code)
    }

    pub fn valuation(self) -> Valuation {
        self.ring.valuation_code(self.code)
    }

    pub fn inv(self) -> Result<RElem> {
        self.ring
            .inv_code(self.code)
            .map(|c| self.ring.elem(c))
            .ok_or_else(|| Error::Domain(format!("{self} is not a unit of R")))
    }

    /// The canonical representative as an exact polynomial in `t`.
    pub fn to_telem(self) -> TElem {
        TElem::new(self.ring.field().zero(), self.coeffs())
    }

    /// The canonical lift to `A`, as a series known modulo `t^prec`.
    pub fn to_series(self, prec: i64) -> TruncSeries {
        TruncSeries::new(self.ring.field(), 0, self.coeffs(), prec)
    }

    /// The `k`-character digit string `a_0 a_1 ... a_{k-1}`.
    pub fn digit_string(self) -> String {
        self.ring.digits(self.code).iter().map(|&d| digit_char(d as u32)).collect()
    }

    pub fn parse(ring: ResidueRing, s: &str) -> Result<RElem> {
        let s = s.trim();
        if s.chars().count() != ring.k() as usize {
            return Err(Error::Parse(format!("{s:?} should have {} digits", ring.k())));
        }
        let ds = s.chars().map(|c| parse_digit(c, ring.q()).map(|d| d as u16)).collect::<Result<Vec<_>>>()?;
        Ok(ring.elem(ring.undigits(&ds)))
    }
}

impl fmt::Debug for RElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit_string())
    }
}

impl fmt::Display for RElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit_string())
    }
}

impl Add for RElem {
    type Output = RElem;
    fn add(self, rhs: RElem) -> RElem {
        RElem { ring: self.ring, code: self.ring.add_codes(self.code, rhs.code) }
    }
}

impl Sub for RElem {
    type Output = RElem;
    fn sub(self, rhs: RElem) -> RElem {
        RElem { ring: self.ring, code: self.ring.sub_codes(self.code, rhs.code) }
    }
}

impl Mul for RElem {
    type Output = RElem;
    fn mul(self, rhs: RElem) -> RElem {
        RElem { ring: self.ring, code: self.ring.mul_codes(self.code, rhs.code) }
    }
}

impl Neg for RElem {
    type Output = RElem;
    fn neg(self) -> RElem {
        RElem { ring: self.ring, code: self.ring.neg_code(self.code) }
    }
}

/// A vector in `R^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RVector(Vec<RElem>);

impl RVector {
    pub fn new(coords: Vec<RElem>) -> Self {
        RVector(coords)
    }

    pub fn coords(&self) -> &[RElem] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Some coordinate is not a multiple of `t`.
    pub fn is_primitive(&self) -> bool {
        self.0.iter().any(|c| c.is_unit())
    }

    pub fn scale(&self, a: RElem) -> RVector {
        RVector(self.0.iter().map(|&c| a * c).collect())
    }

    pub fn digit_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.digit_string()).collect()
    }
}

impl fmt::Debug for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.digit_strings().join(","))
    }
}

impl Add for &RVector {
    type Output = RVector;
    fn add(self, rhs: &RVector) -> RVector {
        RVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a + b).collect())
    }
}

impl Sub for &RVector {
    type Output = RVector;
    fn sub(self, rhs: &RVector) -> RVector {
        RVector(self.0.iter().zip(&rhs.0).map(|(&a, &b)| a - b).collect())
    }
}

/// Default ceiling on `|R^n|` for enumerations.
pub const DEFAULT_POINT_BUDGET: u64 = 1 << 22;

/// The free module `R^n`, with points addressed by `u64` indices
/// `sum_i code(v_i) * |R|^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RSpace {
    ring: ResidueRing,
    n: usize,
    size: u64,
}

impl RSpace {
    pub fn new(q: u32, k: u32, n: usize) -> Result<RSpace> {
        RSpace::over(ResidueRing::new(q, k)?, n)
    }

    pub fn over(ring: ResidueRing, n: usize) -> Result<RSpace> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        let size =
            (ring.size() as u64).checked_pow(n as u32).ok_or_else(|| Error::Budget("|R^n| overflows u64".into()))?;
        Ok(RSpace { ring, n, size })
    }

    pub fn ring(self) -> ResidueRing {
        self.ring
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn q(self) -> u32 {
        self.ring.q()
    }

    pub fn k(self) -> u32 {
        self.ring.k()
    }

    /// `|R^n| = q^{kn}`.
    pub fn size(self) -> u64 {
        self.size
    }

    /// `|S^{n-1}(R)| = q^{kn} - q^{(k-1)n}`.
    pub fn primitive_count(self) -> u64 {
        let q = self.q() as u64;
        self.size - q.pow((self.k() - 1) * self.n as u32)
    }

    pub fn check_budget(self, budget: u64) -> Result<()> {
        if self.size > budget {
            return Err(Error::Budget(format!("|R^n| = {} exceeds the enumeration budget {budget}", self.size)));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn decode(self, idx: u64, out: &mut [u32]) {
        let r = self.ring.size() as u64;
        let mut i = idx;
        for c in out.iter_mut() {
            *c = (i % r) as u32;
            i /= r;
        }
    }

    #[inline]
    pub(crate) fn encode(self, codes: &[u32]) -> u64 {
        let r = self.ring.size() as u64;
        codes.iter().rev().fold(0u64, |acc, &c| acc * r + c as u64)
    }

    pub(crate) fn codes(self, idx: u64) -> Vec<u32> {
        let mut out = vec![0; self.n];
        self.decode(idx, &mut out);
        out
    }

    pub fn point(self, idx: u64) -> RVector {
        RVector(self.codes(idx).into_iter().map(|c| self.ring.elem(c)).collect())
    }

    pub fn index(self, v: &RVector) -> Result<u64> {
        if v.dim() != self.n || v.0.iter().any(|c| c.ring != self.ring) {
            return Err(Error::Domain(format!("{v:?} is not a point of this R^n")));
        }
        Ok(self.encode(&v.0.iter().map(|c| c.code).collect::<Vec<_>>()))
    }

    pub fn is_primitive_index(self, idx: u64) -> bool {
        let r = self.ring.size() as u64;
        let q = self.q() as u64;
        let mut i = idx;
        for _ in 0..self.n {
            if !(i % r).is_multiple_of(q) {
                return true;
            }
            i /= r;
        }
        false
    }

    /// All points (or only primitive ones) in index order.
    pub fn enumerate(self, primitive_only: bool, budget: u64) -> Result<EnumerateR> {
        self.check_budget(budget)?;
        Ok(EnumerateR { space: self, next: 0, end: self.size, primitive_only })
    }

    /// The index range `[start, end)` of the enumeration, for splitting across workers.
    pub fn enumerate_range(self, primitive_only: bool, start: u64, end: u64) -> EnumerateR {
        EnumerateR { space: self, next: start, end: end.min(self.size), primitive_only }
    }

    /// Indices of `S^{n-1}(R)` in increasing order.
    pub fn primitive_indices(self) -> Vec<u64> {
        (0..self.size).filter(|&i| self.is_primitive_index(i)).collect()
    }

    pub(crate) fn scale_idx(self, a: u32, v: u64) -> u64 {
        let cv = self.codes(v);
        let s: Vec<u32> = cv.iter().map(|&x| self.ring.mul_codes(a, x)).collect();
        self.encode(&s)
    }
}

/// Restartable stream over `R^n` or `S^{n-1}(R)`.
#[derive(Clone, Debug)]
pub struct EnumerateR {
    space: RSpace,
    next: u64,
    end: u64,
    primitive_only: bool,
}

impl Iterator for EnumerateR {
    type Item = RVector;

    fn next(&mut self) -> Option<RVector> {
        while self.next < self.end {
            let i = self.next;
            self.next += 1;
            if !self.primitive_only || self.space.is_primitive_index(i) {
                return Some(self.space.point(i));
            }
        }
        None
    }
}

/// `enumerate_R(k, n, primitive_only)` over `F_q`.
pub fn enumerate_r(q: u32, k: u32, n: usize, primitive_only: bool, budget: u64) -> Result<EnumerateR> {
    RSpace::new(q, k, n)?.enumerate(primitive_only, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> Fq {
        Fq::new(2).unwrap()
    }

    #[test]
    fn series_examples() {
        let f = f2();
        let a = TruncSeries::from_ints(f, &[1, 1], 4);
        assert_eq!(a.clone() * a.clone(), TruncSeries::from_ints(f, &[1, 0, 1], 4));
        assert_eq!(a.inv().unwrap(), TruncSeries::from_ints(f, &[1, 1, 1, 1], 4));
        assert_eq!(a.inv().unwrap().precision(), 4);
        let b = TruncSeries::from_ints(f, &[0, 0, 1, 0, 0, 1], 8);
        assert_eq!(b.valuation(), Some(2));
    }

    #[test]
    fn inverse_of_zero_is_precision_error() {
        let z = TruncSeries::zero(f2(), 5);
        assert!(matches!(z.inv(), Err(Error::Precision(_))));
        assert_eq!(z.valuation(), None);
        assert_eq!(z.abs_value(), 0.0);
    }

    #[test]
    fn laurent_inverse_and_text() {
        let f3 = Fq::new(3).unwrap();
        // t^2 (1 + 2t) known mod t^6
        let a = TruncSeries::new(f3, 2, vec![f3.one(), f3.elem(2)], 6);
        let inv = a.inv().unwrap();
        assert_eq!(inv.valuation(), Some(-2));
        let one = a * inv;
        assert_eq!(one.valuation(), Some(0));
        assert_eq!(one.coeff(0), f3.one());
        assert_eq!(TruncSeries::from_ints(f3, &[1, 0, 2, 1], 5).to_string(), "1 + 2*t^2 + t^3 (mod t^5)");
        assert_eq!(TruncSeries::from_ints(f3, &[1, 0, 2], 5).digit_string().unwrap(), "10200");
        let back = TruncSeries::parse_digit_string(f3, "10200").unwrap();
        assert_eq!(back, TruncSeries::from_ints(f3, &[1, 0, 2], 5));
    }

    #[test]
    fn enumeration_examples() {
        let prim: Vec<RVector> = enumerate_r(2, 1, 2, true, DEFAULT_POINT_BUDGET).unwrap().collect();
        let strs: Vec<Vec<String>> = prim.iter().map(|v| v.digit_strings()).collect();
        assert_eq!(strs, vec![vec!["1", "0"], vec!["0", "1"], vec!["1", "1"]]);
        assert_eq!(enumerate_r(2, 2, 2, true, DEFAULT_POINT_BUDGET).unwrap().count(), 12);
        assert_eq!(enumerate_r(2, 1, 1, false, DEFAULT_POINT_BUDGET).unwrap().count(), 2);
        assert!(matches!(enumerate_r(3, 3, 2, false, 100), Err(Error::Budget(_))));
    }

    #[test]
    fn primitive_counts_match_formula() {
        for (q, k, n) in [(2, 1, 2), (2, 2, 2), (3, 2, 2), (2, 3, 3), (3, 1, 3)] {
            let space = RSpace::new(q, k, n).unwrap();
            let count = space.enumerate(true, DEFAULT_POINT_BUDGET).unwrap().count() as u64;
            assert_eq!(count, space.primitive_count());
            let qq = q as u64;
            assert_eq!(count, qq.pow(k * n as u32) - qq.pow((k - 1) * n as u32));
        }
    }

    #[test]
    fn partitioned_enumeration_covers_everything_once() {
        let space = RSpace::new(3, 2, 2).unwrap();
        let mid = space.size() / 3;
        let mut all: Vec<RVector> = space.enumerate_range(false, 0, mid).collect();
        all.extend(space.enumerate_range(false, mid, space.size()));
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len() as u64, space.size());
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn unit_group_size() {
        for q in [2, 3] {
            for k in 1..=3 {
                let r = ResidueRing::new(q, k).unwrap();
                let units = r.units().count() as u32;
                assert_eq!(units, q.pow(k) - q.pow(k - 1));
                for u in r.units() {
                    assert_eq!(u * u.inv().unwrap(), r.one());
                }
            }
        }
    }

    #[test]
    fn projection_to_r() {
        let r = ResidueRing::new(2, 2).unwrap();
        let a = TruncSeries::from_ints(f2(), &[1, 1, 1], 4);
        assert_eq!(a.to_relem(r).unwrap(), r.from_ints(&[1, 1]));
        let short = TruncSeries::from_ints(f2(), &[1], 1);
        assert!(matches!(short.to_relem(r), Err(Error::Precision(_))));
    }

    fn arb_series(q: u32) -> impl Strategy<Value = TruncSeries> {
        (proptest::collection::vec(0..q, 0..6), 0i64..3, 4i64..8).prop_map(move |(cs, shift, prec)| {
            let f = Fq::new(q).unwrap();
            TruncSeries::new(f, shift, cs.into_iter().map(|c| f.elem(c)).collect(), prec)
        })
    }

    proptest! {
        #[test]
        fn ultrametric(a in arb_series(3), b in arb_series(3)) {
            let s = a.clone() + b.clone();
            let (va, vb) = (a.abs_value(), b.abs_value());
            let bound = va.max(vb);
            // only meaningful when the sum is determined at that scale
            prop_assume!(s.precision() > a.valuation().unwrap_or(i64::MAX).min(b.valuation().unwrap_or(i64::MAX)));
            prop_assert!(s.abs_value() <= bound);
            if va != vb {
                prop_assert_eq!(s.abs_value(), bound);
            }
        }

        #[test]
        fn projection_is_a_ring_map(a in arb_series(2), b in arb_series(2)) {
            let r = ResidueRing::new(2, 3).unwrap();
            let a = a.with_precision(6);
            let b = b.with_precision(6);
            let (pa, pb) = (a.to_relem(r).unwrap(), b.to_relem(r).unwrap());
            prop_assert_eq!((a.clone() + b.clone()).to_relem(r).unwrap(), pa + pb);
            let prod = a * b;
            if prod.precision() >= 3 {
                prop_assert_eq!(prod.to_relem(r).unwrap(), pa * pb);
            }
        }

        #[test]
        fn inverse_round_trip(cs in proptest::collection::vec(0u32..5, 1..6)) {
            let f = Fq::new(5).unwrap();
            prop_assume!(cs[0] != 0);
            let a = TruncSeries::new(f, 0, cs.into_iter().map(|c| f.elem(c)).collect(), 6);
            let prod = a.clone() * a.inv().unwrap();
            prop_assert_eq!(prod, TruncSeries::one(f).with_precision(6));
        }
    }
}
