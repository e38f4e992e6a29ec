//! Exact arithmetic in the finite field `F_q`, `q = p^m`.
//!
//! An element is stored as its code `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`,
//! where `c_0 + c_1 u + ... + c_{m-1} u^{m-1}` is its representative in
//! `F_p[u]/(mu(u))`. The modulus `mu` is the monic irreducible of degree `m`
//! with the smallest code (coefficients read as base-`p` digits, constant
//! term least significant):
//!
//! | q | modulus |
//! |---|---------|
//! | 4 | u^2 + u + 1 |
//! | 8 | u^3 + u + 1 |
//! | 9 | u^2 + 1 |
//! | 16 | u^4 + u + 1 |
//!
//! Fields are built once per `q`, cached for the lifetime of the process and
//! handed out as the cheap `Copy` handle [`Fq`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest supported field size. Keeps element codes printable as a single
/// base-36 digit in the compact text formats.
pub const MAX_Q: u32 = 32;

pub struct GaloisField {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// Handle to a cached finite field.
#[derive(Clone, Copy)]
pub struct Fq(&'static GaloisField);

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}

impl Eq for Fq {}

impl std::hash::Hash for Fq {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.q.hash(state);
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|&d| q.is_multiple_of(d))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

fn digits(mut code: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = code % p;
        code /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo the monic `b` over `F_p`, both low-first.
fn poly_rem_fp(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * bi) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible_fp(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        // every monic polynomial of degree d
        for low in 0..p.pow(d as u32) {
            let mut g = digits(low, p, d);
            g.push(1);
            if poly_rem_fp(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    if m == 1 {
        return vec![0, 1];
    }
    for low in 0..p.pow(m) {
        let mut f = digits(low, p, m as usize);
        f.push(1);
        if is_irreducible_fp(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl GaloisField {
    fn build(q: u32) -> Result<GaloisField> {
        let (p, m) = prime_power(q).ok_or_else(|| Error::Domain(format!("q = {q} is not a prime power")))?;
        if q > MAX_Q {
            return Err(Error::Budget(format!("q = {q} exceeds the supported maximum {MAX_Q}")));
        }
        let modulus = smallest_irreducible(p, m);
        let qs = q as usize;
        let mut add = vec![0u16; qs * qs];
        let mut mul = vec![0u16; qs * qs];
        for a in 0..q {
            let da = digits(a, p, m as usize);
            for b in 0..q {
                let db = digits(b, p, m as usize);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = undigits(&sum, p) as u16;
                let mut prod = vec![0u32; 2 * m as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let red = if m == 1 { prod } else { poly_rem_fp(&prod, &modulus, p) };
                mul[(a * q + b) as usize] = undigits(&red, p) as u16;
            }
        }
        let mut neg = vec![0u16; qs];
        let mut inv = vec![0u16; qs];
        for a in 0..q {
            neg[a as usize] = (0..q).find(|&b| add[(a * q + b) as usize] == 0).unwrap() as u16;
            if a != 0 {
                inv[a as usize] = (1..q).find(|&b| mul[(a * q + b) as usize] == 1).unwrap() as u16;
            }
        }
        Ok(GaloisField { p, m, q, modulus, add, mul, neg, inv })
    }
}

static FIELDS: OnceLock<Mutex<HashMap<u32, &'static GaloisField>>> = OnceLock::new();

impl Fq {
    /// The field with `q` elements, `q` a prime power `<= MAX_Q`.
    pub fn new(q: u32) -> Result<Fq> {
        let cache = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().expect("field cache poisoned");
        if let Some(f) = cache.get(&q) {
            return Ok(Fq(f));
        }
        let field: &'static GaloisField = Box::leak(Box::new(GaloisField::build(q)?));
        cache.insert(q, field);
        Ok(Fq(field))
    }

    pub fn q(self) -> u32 {
        self.0.q
    }

    pub fn characteristic(self) -> u32 {
        self.0.p
    }

    pub fn degree(self) -> u32 {
        self.0.m
    }

    /// The defining modulus over `F_p`, low-first (`[0, 1]` for prime fields).
    pub fn modulus(self) -> &'static [u32] {
        &self.0.modulus
    }

    pub fn zero(self) -> FqElem {
        FqElem { field: self, code: 0 }
    }

    pub fn one(self) -> FqElem {
        FqElem { field: self, code: 1 }
    }

    /// Element with the given code; codes run over `0..q`.
    pub fn elem(self, code: u32) -> FqElem {
        assert!(code < self.0.q, "code {code} out of range for F_{}", self.0.q);
        FqElem { field: self, code: code as u16 }
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(self, v: i64) -> FqElem {
        let p = self.0.p as i64;
        self.elem(v.rem_euclid(p) as u32)
    }

    pub fn elements(self) -> impl Iterator<Item = FqElem> {
        (0..self.0.q).map(move |c| self.elem(c))
    }

    #[inline]
    pub(crate) fn add_codes(self, a: u16, b: u16) -> u16 {
        self.0.add[a as usize * self.0.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn mul_codes(self, a: u16, b: u16) -> u16 {
        self.0.mul[a as usize * self.0.q as usize + b as usize]
    }

    #[inline]
    pub(crate) fn neg_code(self, a: u16) -> u16 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub(crate) fn sub_codes(self, a: u16, b: u16) -> u16 {
        self.add_codes(a, self.neg_code(b))
    }

    #[inline]
    pub(crate) fn inv_code(self, a: u16) -> u16 {
        debug_assert!(a != 0);
        self.0.inv[a as usize]
    }
}

/// An element of `F_q`.
#[derive(Clone, Copy)]
pub struct FqElem {
    field: Fq,
    code: u16,
}

impl FqElem {
    pub fn field(self) -> Fq {
        self.field
    }

    pub fn code(self) -> u32 {
        self.code as u32
    }

    pub fn is_zero(self) -> bool {
        self.code == 0
    }

    pub fn is_one(self) -> bool {
        self.code == 1
    }

    pub fn inv(self) -> Result<FqElem> {
        if self.code == 0 {
            return Err(Error::Domain(format!("inverse of zero in F_{}", self.field.q())));
        }
        Ok(FqElem { field: self.field, code: self.field.inv_code(self.code) })
    }

    pub fn pow(self, mut e: u64) -> FqElem {
        let mut base = self;
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// The absolute Frobenius `x -> x^p`.
    pub fn frobenius(self) -> FqElem {
        self.pow(self.field.characteristic() as u64)
    }
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && self.field == other.field
    }
}

impl Eq for FqElem {}

impl std::hash::Hash for FqElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

impl Add for FqElem {
    type Output = FqElem;
    #[inline]
    fn add(self, rhs: FqElem) -> FqElem {
        debug_assert!(self.field == rhs.field);
        FqElem { field: self.field, code: self.field.add_codes(self.code, rhs.code) }
    }
}

impl Sub for FqElem {
    type Output = FqElem;
    #[inline]
    fn sub(self, rhs: FqElem) -> FqElem {
        debug_assert!(self.field == rhs.field);
        FqElem { field: self.field, code: self.field.sub_codes(self.code, rhs.code) }
    }
}

impl Mul for FqElem {
    type Output = FqElem;
    #[inline]
    fn mul(self, rhs: FqElem) -> FqElem {
        debug_assert!(self.field == rhs.field);
        FqElem { field: self.field, code: self.field.mul_codes(self.code, rhs.code) }
    }
}

impl Neg for FqElem {
    type Output = FqElem;
    #[inline]
    fn neg(self) -> FqElem {
        FqElem { field: self.field, code: self.field.neg_code(self.code) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(f2.one() + f2.one(), f2.zero());
        let f3 = Fq::new(3).unwrap();
        assert_eq!(f3.elem(2) * f3.elem(2), f3.one());
        // F_4 = F_2[u]/(u^2+u+1): u has code 2, u+1 has code 3.
        let f4 = Fq::new(4).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert_eq!(f4.elem(2) * f4.elem(3), f4.one());
    }

    #[test]
    fn documented_moduli() {
        assert_eq!(Fq::new(8).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Fq::new(9).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Fq::new(16).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_bad_q() {
        assert!(matches!(Fq::new(6), Err(Error::Domain(_))));
        assert!(matches!(Fq::new(1), Err(Error::Domain(_))));
        assert!(matches!(Fq::new(37), Err(Error::Budget(_))));
    }

    #[test]
    fn inverse_of_zero_is_domain_error() {
        let f5 = Fq::new(5).unwrap();
        assert!(matches!(f5.zero().inv(), Err(Error::Domain(_))));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16] {
            let f = Fq::new(q).unwrap();
            for a in f.elements() {
                assert_eq!(a.pow(q as u64), a, "Frobenius fixes F_{q}");
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), f.one());
                }
                assert_eq!(a + (-a), f.zero());
                for b in f.elements() {
                    let p = f.characteristic() as u64;
                    assert_eq!((a + b).pow(p), a.pow(p) + b.pow(p));
                    assert_eq!(a * b, b * a);
                    for c in f.elements() {
                        assert_eq!(a * (b + c), a * b + a * c);
                        assert_eq!((a * b) * c, a * (b * c));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn frobenius_additive_iterated(q_idx in 0usize..6, a in 0u32..32, b in 0u32..32, j in 0u32..4) {
            let q = [2u32, 3, 4, 5, 8, 9][q_idx];
            let f = Fq::new(q).unwrap();
            let (a, b) = (f.elem(a % q), f.elem(b % q));
            let e = (f.characteristic() as u64).pow(j);
            prop_assert_eq!((a + b).pow(e), a.pow(e) + b.pow(e));
        }
    }
}
