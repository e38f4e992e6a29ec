//! Dense univariate polynomials over any coefficient ring implementing [`Coeff`].
//!
//! The same type serves as `B = F_q[X]` ([`XPoly`]), as exact elements of
//! `F_q[t]` ([`TElem`]), as polynomials in `X` with `F_q[t]` coefficients
//! ([`TPoly`]) and as polynomials over the ramified extension.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::galois::{Fq, FqElem};
use crate::valuation::Valuation;

/// A commutative ring element that knows its own ring.
///
/// `zero_like`/`one_like` exist because the rings used here are runtime
/// objects (the field size, the truncation precision, the extension), so the
/// additive and multiplicative identities cannot be conjured from the type.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
}

/// Coefficient rings in which every nonzero element is invertible.
pub trait FieldCoeff: Coeff {
    fn try_inv(&self) -> Result<Self>;
}

impl Coeff for FqElem {
    fn is_zero(&self) -> bool {
        FqElem::is_zero(*self)
    }

    fn zero_like(&self) -> Self {
        self.field().zero()
    }

    fn one_like(&self) -> Self {
        self.field().one()
    }
}

impl FieldCoeff for FqElem {
    fn try_inv(&self) -> Result<Self> {
        self.inv()
    }
}

#[derive(Clone)]
pub struct Poly<C> {
    coeffs: Vec<C>,
    zero: C,
}

/// `B = F_q[X]`.
pub type XPoly = Poly<FqElem>;
/// An exact element of `F_q[t]`.
pub type TElem = Poly<FqElem>;
/// A polynomial in `X` with exact `F_q[t]` coefficients.
pub type TPoly = Poly<TElem>;

impl<C: Coeff> Poly<C> {
    /// Builds a polynomial from low-first coefficients, trimming trailing zeros.
    pub fn new(zero: C, coeffs: Vec<C>) -> Self {
        let mut p = Poly { coeffs, zero };
        p.trim();
        p
    }

    pub fn zero(zero: C) -> Self {
        Poly { coeffs: Vec::new(), zero }
    }

    pub fn constant(c: C) -> Self {
        let zero = c.zero_like();
        Poly::new(zero, vec![c])
    }

    /// `c * X^deg`.
    pub fn monomial(c: C, deg: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero.clone(); deg];
        coeffs.push(c);
        Poly::new(zero, coeffs)
    }

    /// The variable `X` over the ring of `like`.
    pub fn x(like: &C) -> Self {
        Poly::monomial(like.one_like(), 1)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &C {
        self.coeffs.get(i).unwrap_or(&self.zero)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn zero_coeff(&self) -> &C {
        &self.zero
    }

    /// Order of vanishing at `X = 0`: the index of the first nonzero
    /// coefficient, `Infinite` for the zero polynomial.
    pub fn valuation(&self) -> Valuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(i) => Valuation::Finite(i as i64),
            None => Valuation::Infinite,
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        Poly::new(self.zero.clone(), self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![self.zero.clone(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs, zero: self.zero.clone() }
    }

    /// Product truncated to the coefficients of `X^0 .. X^{len-1}`.
    pub fn mul_trunc(&self, other: &Self, len: usize) -> Self {
        if self.is_zero() || other.is_zero() || len == 0 {
            return Poly::zero(self.zero.clone());
        }
        let out_len = (self.coeffs.len() + other.coeffs.len() - 1).min(len);
        let mut out = vec![self.zero.clone(); out_len];
        for (i, a) in self.coeffs.iter().enumerate().take(out_len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(out_len - i) {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(self.zero.clone(), out)
    }

    pub fn truncate(&self, len: usize) -> Self {
        Poly::new(self.zero.clone(), self.coeffs.iter().take(len).cloned().collect())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::constant(self.zero.one_like());
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

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs.iter().rev().fold(x.zero_like(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Evaluation at an element of another ring, through a coefficient map.
    pub fn eval_with<D: Coeff>(&self, x: &D, embed: impl Fn(&C) -> D) -> D {
        self.coeffs.iter().rev().fold(x.zero_like(), |acc, c| acc * x.clone() + embed(c))
    }

    /// Composition `self(other(X))`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut acc = Poly::zero(self.zero.clone());
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * other) + &Poly::constant(c.clone());
        }
        acc
    }

    pub fn map<D: Coeff>(&self, zero: D, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(zero, self.coeffs.iter().map(f).collect())
    }

    /// Division by a divisor with leading coefficient one; works over any ring.
    pub fn divrem_monic(&self, d: &Self) -> Result<(Self, Self)> {
        let lead = d.leading().ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?;
        if !lead.is_one() {
            return Err(Error::Domain("divisor is not monic".into()));
        }
        self.divrem_by(d, |c| Ok(c.clone()))
    }

    fn divrem_by(&self, d: &Self, div_lead: impl Fn(&C) -> Result<C>) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(self.zero.clone()), self.clone()));
        }
        let mut quot = vec![self.zero.clone(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = div_lead(&rem[i + dd])?;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - c.clone() * dj.clone();
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(self.zero.clone(), quot), Poly::new(self.zero.clone(), rem)))
    }
}

impl<C: FieldCoeff> Poly<C> {
    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let lead_inv = d.leading().ok_or_else(|| Error::Domain("division by the zero polynomial".into()))?.try_inv()?;
        self.divrem_by(d, |c| Ok(c.clone() * lead_inv.clone()))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.try_inv().expect("leading coefficient is nonzero")),
            None => self.clone(),
        }
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }
}

impl XPoly {
    /// Builds an element of `F_q[X]` (or `F_q[t]`) from integer coefficients, low-first.
    pub fn from_ints(field: Fq, coeffs: &[i64]) -> XPoly {
        Poly::new(field.zero(), coeffs.iter().map(|&c| field.from_int(c)).collect())
    }

    /// Coefficient codes, lowest degree first.
    pub fn codes(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.code()).collect()
    }

    pub fn from_codes(field: Fq, codes: &[u32]) -> XPoly {
        Poly::new(field.zero(), codes.iter().map(|&c| field.elem(c)).collect())
    }
}

impl<C: Coeff> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<C: Coeff + Eq> Eq for Poly<C> {}

impl<C: Coeff> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl<C: Coeff> Poly<C> {
    /// Renders `c0 + c1*X + c2*X^2 ...` using the given variable name and
    /// coefficient formatter; zero coefficients are skipped.
    pub fn render(&self, var: &str, coeff: impl Fn(&C) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = coeff(c);
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            terms.push(match (i, cs.as_str()) {
                (0, _) => cs,
                (_, "1") => mono,
                _ if cs.contains(" + ") => format!("({cs})*{mono}"),
                _ => format!("{cs}*{mono}"),
            });
        }
        terms.join(" + ")
    }
}

impl fmt::Display for XPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("X", |c| c.to_string()))
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("X", |c| c.render("t", |d| d.to_string())))
    }
}

impl<'a, C: Coeff> Add<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &'a Poly<C>) -> Poly<C> {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() { (self, rhs) } else { (rhs, self) };
        let mut coeffs = long.coeffs.clone();
        for (a, b) in coeffs.iter_mut().zip(&short.coeffs) {
            *a = a.clone() + b.clone();
        }
        Poly::new(self.zero.clone(), coeffs)
    }
}

impl<'a, C: Coeff> Sub<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &'a Poly<C>) -> Poly<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(), zero: self.zero.clone() }
    }
}

impl<'a, C: Coeff> Mul<&'a Poly<C>> for &'a Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &'a Poly<C>) -> Poly<C> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.zero.clone());
        }
        self.mul_trunc(rhs, self.coeffs.len() + rhs.coeffs.len() - 1)
    }
}

impl<C: Coeff> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Poly<C>) -> Poly<C> {
        &self + &rhs
    }
}

impl<C: Coeff> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Poly<C>) -> Poly<C> {
        &self - &rhs
    }
}

impl<C: Coeff> Mul for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Poly<C>) -> Poly<C> {
        &self * &rhs
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff> Coeff for Poly<C> {
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        Poly::zero(self.zero.clone())
    }

    fn one_like(&self) -> Self {
        Poly::constant(self.zero.one_like())
    }
}
