//! Lagrange interpolation over the fraction field `F_q(X)` of `B`.
//!
//! Used as an oracle for the identity behind the univariate counting step:
//! for `f` of degree `< |L|`, `sum_u f(s_u) prod_{w≠u} (z - s_w)/(s_u - s_w) = f(z)`,
//! and so the top coefficient is `sum_u f(s_u) prod_{w≠u} (s_u - s_w)^{-1}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::poly::{Coeff, FieldCoeff, Poly, XPoly};

/// `num / den` with `den` monic and coprime to `num`.
#[derive(Clone)]
pub struct RatFunc {
    num: XPoly,
    den: XPoly,
}

impl RatFunc {
    pub fn new(num: XPoly, den: XPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let (num, _) = num.divrem(&g)?;
        let (den, _) = den.divrem(&g)?;
        let lc = *den.leading().unwrap();
        let inv = XPoly::constant(lc.inv()?);
        Ok(RatFunc { num: &num * &inv, den: &den * &inv })
    }

    pub fn from_poly(p: XPoly) -> RatFunc {
        let one = XPoly::constant(p.zero_coeff().one_like());
        RatFunc { num: p, den: one }
    }

    pub fn num(&self) -> &XPoly {
        &self.num
    }

    pub fn den(&self) -> &XPoly {
        &self.den
    }

    /// The polynomial itself when the denominator is 1.
    pub fn as_poly(&self) -> Option<&XPoly> {
        (self.den.degree() == Some(0)).then_some(&self.num)
    }

    pub fn inv(&self) -> Result<RatFunc> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_poly() {
            Some(p) => write!(f, "{p}"),
            None => write!(f, "({}) / ({})", self.num, self.den),
        }
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        RatFunc::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
            .expect("nonzero denominators")
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: RatFunc) -> RatFunc {
        self + (-rhs)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den }
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl Coeff for RatFunc {
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn zero_like(&self) -> Self {
        RatFunc::from_poly(XPoly::zero(self.num.zero_coeff().zero_like()))
    }

    fn one_like(&self) -> Self {
        RatFunc::from_poly(XPoly::constant(self.num.zero_coeff().one_like()))
    }
}

impl FieldCoeff for RatFunc {
    fn try_inv(&self) -> Result<Self> {
        self.inv()
    }
}

fn check_distinct(nodes: &[&RatFunc]) -> Result<()> {
    for (i, a) in nodes.iter().enumerate() {
        if nodes[..i].contains(a) {
            return Err(Error::Domain(format!("repeated interpolation node {a}")));
        }
    }
    Ok(())
}

/// The interpolating polynomial `P(z)` with `P(node) = value`, of degree
/// `< points.len()`.
pub fn lagrange_check(points: &[(RatFunc, RatFunc)]) -> Result<Poly<RatFunc>> {
    let Some(first) = points.first() else {
        return Err(Error::Domain("no interpolation nodes".into()));
    };
    check_distinct(&points.iter().map(|p| &p.0).collect::<Vec<_>>())?;
    let zero = first.0.zero_like();
    let one = first.0.one_like();
    let z = Poly::x(&one);
    let mut acc = Poly::zero(zero);
    for (i, (u, fu)) in points.iter().enumerate() {
        let mut basis = Poly::constant(one.clone());
        let mut denom = one.clone();
        for (j, (w, _)) in points.iter().enumerate() {
            if i != j {
                basis = &basis * &(&z - &Poly::constant(w.clone()));
                denom = denom * (u.clone() - w.clone());
            }
        }
        let scale = fu.clone() * denom.inv()?;
        acc = &acc + &basis.scale(&scale);
    }
    Ok(acc)
}

/// `sum_u f(s_u) prod_{w≠u} (s_u - s_w)^{-1}`, the top coefficient of the interpolant.
pub fn leading_coefficient_identity(points: &[(RatFunc, RatFunc)]) -> Result<RatFunc> {
    let Some(first) = points.first() else {
        return Err(Error::Domain("no interpolation nodes".into()));
    };
    check_distinct(&points.iter().map(|p| &p.0).collect::<Vec<_>>())?;
    let mut acc = first.0.zero_like();
    for (i, (u, fu)) in points.iter().enumerate() {
        let mut denom = u.one_like();
        for (j, (w, _)) in points.iter().enumerate() {
            if i != j {
                denom = denom * (u.clone() - w.clone());
            }
        }
        acc = acc + fu.clone() * denom.inv()?;
    }
    Ok(acc)
}
