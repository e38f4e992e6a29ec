//! Sparse multivariate polynomials `sum_α c_α z^α` over a [`Coeff`] ring.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::poly::Coeff;

/// Terms are keyed by exponent tuples; `BTreeMap` order on `Vec<u32>` is the
/// lexicographic order, so the last key is the lex-leading exponent.
/// Only nonzero coefficients are stored.
#[derive(Clone)]
pub struct MultiPoly<C> {
    n: usize,
    zero: C,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(n: usize, zero: C) -> Self {
        MultiPoly { n, zero, terms: BTreeMap::new() }
    }

    /// Sums the given terms; repeated exponents are added together.
    pub fn from_terms(n: usize, zero: C, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Result<Self> {
        let mut p = MultiPoly::zero(n, zero);
        for (exp, c) in terms {
            if exp.len() != n {
                return Err(Error::Domain(format!("exponent {exp:?} has length {}, expected {n}", exp.len())));
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    pub fn constant(n: usize, c: C) -> Self {
        let zero = c.zero_like();
        let mut p = MultiPoly::zero(n, zero);
        p.add_term(vec![0; n], c);
        p
    }

    /// `c · z^exp`.
    pub fn monomial(exp: Vec<u32>, c: C) -> Self {
        let zero = c.zero_like();
        let mut p = MultiPoly::zero(exp.len(), zero);
        p.add_term(exp, c);
        p
    }

    /// The variable `z_{i+1}` (0-based `i`).
    pub fn var(n: usize, i: usize, like: &C) -> Self {
        let mut exp = vec![0; n];
        exp[i] = 1;
        MultiPoly::monomial(exp, like.one_like())
    }

    fn add_term(&mut self, exp: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exp) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(exp, s);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero_coeff(&self) -> &C {
        &self.zero
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C> {
        &self.terms
    }

    /// Number of nonzero terms; see [`MultiPoly::is_zero`].
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(|| self.zero.clone())
    }

    /// `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest exponent of `z_{i+1}` occurring.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// The lex-leading term `c_α z^α`.
    pub fn leading(&self) -> Option<(&[u32], &C)> {
        self.terms.iter().next_back().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = MultiPoly::zero(self.n, self.zero.clone());
        for (e, a) in &self.terms {
            out.add_term(e.clone(), a.clone() * c.clone());
        }
        out
    }

    /// Applies `f` to every coefficient, dropping terms that become zero.
    pub fn map<D: Coeff>(&self, zero: D, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut out = MultiPoly::zero(self.n, zero);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn try_map<D: Coeff>(&self, zero: D, f: impl Fn(&C) -> Result<D>) -> Result<MultiPoly<D>> {
        let mut out = MultiPoly::zero(self.n, zero);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Evaluates at `point`, computing each needed power once.
    pub fn eval(&self, point: &[C]) -> C {
        self.eval_with(point, |c| c.clone())
    }

    /// Evaluates at a point of another ring, embedding coefficients through `embed`.
    pub fn eval_with<D: Coeff>(&self, point: &[D], embed: impl Fn(&C) -> D) -> D {
        assert_eq!(point.len(), self.n, "point has the wrong dimension");
        let Some(first) = point.first() else {
            return self.terms.values().next().map(&embed).unwrap_or_else(|| embed(&self.zero));
        };
        let one = first.one_like();
        let powers: Vec<Vec<D>> = (0..self.n)
            .map(|i| {
                let mut row = vec![one.clone()];
                for _ in 0..self.degree_in(i) {
                    let next = row.last().unwrap().clone() * point[i].clone();
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = one.zero_like();
        for (e, c) in &self.terms {
            let mut m = embed(c);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    m = m * powers[i][ei as usize].clone();
                }
            }
            acc = acc + m;
        }
        acc
    }

    /// Renders `c*z1^2*z2 + ...` in increasing lex order of exponents.
    pub fn render(&self, coeff: impl Fn(&C) -> String) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = Vec::new();
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| if a == 1 { format!("z{}", i + 1) } else { format!("z{}^{a}", i + 1) })
                .collect();
            let cs = coeff(c);
            let cs = if cs.contains(" + ") { format!("({cs})") } else { cs };
            out.push(match (mono.is_empty(), cs.as_str()) {
                (true, _) => cs,
                (false, "1") => mono.join("*"),
                (false, _) => format!("{cs}*{}", mono.join("*")),
            });
        }
        out.join(" + ")
    }
}

impl<C: Coeff> PartialEq for MultiPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl<C: Coeff> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self.render(|c| format!("{c:?}")))
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|c| c.to_string()))
    }
}

impl<'a, C: Coeff> Add<&'a MultiPoly<C>> for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn add(self, rhs: &'a MultiPoly<C>) -> MultiPoly<C> {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Neg for &MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        self.map(self.zero.clone(), |c| -c.clone())
    }
}

impl<'a, C: Coeff> Sub<&'a MultiPoly<C>> for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn sub(self, rhs: &'a MultiPoly<C>) -> MultiPoly<C> {
        self + &(-rhs)
    }
}

impl<'a, C: Coeff> Mul<&'a MultiPoly<C>> for &'a MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn mul(self, rhs: &'a MultiPoly<C>) -> MultiPoly<C> {
        assert_eq!(self.n, rhs.n);
        let mut out = MultiPoly::zero(self.n, self.zero.clone());
        for (ea, a) in &self.terms {
            for (eb, b) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, a.clone() * b.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::Fq;
    use crate::poly::XPoly;

    #[test]
    fn leading_term_is_lex_maximal() {
        let f = Fq::new(3).unwrap();
        let p = MultiPoly::from_terms(
            2,
            f.zero(),
            [(vec![0, 5], f.one()), (vec![1, 0], f.from_int(2)), (vec![0, 0], f.one())],
        )
        .unwrap();
        let (e, c) = p.leading().unwrap();
        assert_eq!(e, &[1, 0]);
        assert_eq!(*c, f.from_int(2));
        assert_eq!(p.total_degree(), Some(5));
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let f = Fq::new(2).unwrap();
        let x = MultiPoly::var(2, 0, &f.one());
        let s = &x + &x;
        assert!(s.is_zero());
        assert_eq!(s.total_degree(), None);
    }

    #[test]
    fn product_and_evaluation_agree() {
        let f = Fq::new(3).unwrap();
        let z1 = MultiPoly::var(2, 0, &f.one());
        let z2 = MultiPoly::var(2, 1, &f.one());
        let p = &(&z1 + &z2) * &(&z1 - &z2);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(p.eval(&[a, b]), a * a - b * b);
            }
        }
        assert_eq!(p.render(|c| c.to_string()), "2*z2^2 + z1^2");
    }

    #[test]
    fn evaluation_in_an_extension_ring() {
        let f = Fq::new(2).unwrap();
        let p = MultiPoly::from_terms(1, f.zero(), [(vec![2], f.one()), (vec![1], f.one())]).unwrap();
        let x = XPoly::x(&f.one());
        let v = p.eval_with(&[x], |c| XPoly::constant(*c));
        assert_eq!(v, XPoly::from_ints(f, &[0, 1, 1]));
    }
}
