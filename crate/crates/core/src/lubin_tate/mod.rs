//! The Lubin–Tate polynomial `f(X) = tX + X^q`, the endomorphisms `[a]_f`,
//! the residue map `a -> s_a`, and the ramified extension generated by the
//! `t^k`-torsion of `f`.

mod ext;
mod selftest;

pub use ext::{ExtElem, ExtElemJson, ExtField};
pub use selftest::{lt_selftest, SelfTestReport};

use crate::error::{Error, Result};
use crate::galois::{Fq, FqElem};
use crate::laurent::{RElem, TruncSeries};
use crate::poly::{Poly, TElem, TPoly, XPoly};
use crate::Rational;

/// `a(t) -> a(t^q)`, which is `a^q` because coefficients lie in `F_q`.
fn frob_telem(a: &TElem, q: u32) -> TElem {
    let zero = *a.zero_coeff();
    let mut coeffs = vec![zero; a.coeffs().len().saturating_sub(1) * q as usize + 1];
    for (i, &c) in a.coeffs().iter().enumerate() {
        coeffs[i * q as usize] = c;
    }
    Poly::new(zero, coeffs)
}

fn t_elem(field: Fq) -> TElem {
    Poly::monomial(field.one(), 1)
}

/// Expands `sum_j b_j X^{q^j}` into a dense polynomial.
fn additive_to_dense(field: Fq, q: u32, b: &[TElem]) -> TPoly {
    let zero_t = TElem::zero(field.zero());
    if b.is_empty() {
        return Poly::zero(zero_t);
    }
    let deg = (q as usize).pow(b.len() as u32 - 1);
    let mut coeffs = vec![zero_t.clone(); deg + 1];
    for (j, c) in b.iter().enumerate() {
        coeffs[(q as usize).pow(j as u32)] = c.clone();
    }
    Poly::new(zero_t, coeffs)
}

/// Coefficients `b_0..b_m` of `f^{∘m} = sum_j b_j X^{q^j}`.
fn iterate_additive(field: Fq, m: u32) -> Vec<TElem> {
    let q = field.q();
    let t = t_elem(field);
    let mut b = vec![TElem::constant(field.one())];
    for _ in 0..m {
        // f(P) = tP + P^q, and P^q shifts the additive index by one
        let mut next: Vec<TElem> = b.iter().map(|c| &t * c).collect();
        next.push(TElem::zero(field.zero()));
        for (j, c) in b.iter().enumerate() {
            next[j + 1] = &next[j + 1] + &frob_telem(c, q);
        }
        b = next;
    }
    b
}

/// `f(X) = tX + X^q` over `F_q[t]`.
pub fn lt_poly(field: Fq) -> TPoly {
    iterate_f(field, 1)
}

/// `f^{∘m}` with exact coefficients in `F_q[t]`; `m = 0` gives `X`.
pub fn iterate_f(field: Fq, m: u32) -> TPoly {
    additive_to_dense(field, field.q(), &iterate_additive(field, m))
}

/// Reduces every coefficient of `p` modulo `t^n`.
pub fn truncate_t(p: &TPoly, n: usize) -> TPoly {
    p.map(p.zero_coeff().clone(), |c| c.truncate(n))
}

/// Reduction of a polynomial with `F_q[t]` coefficients modulo `t`.
pub fn reduce_mod_t(p: &TPoly) -> XPoly {
    let field_zero = *p.zero_coeff().zero_coeff();
    p.map(field_zero, |c| *c.coeff(0))
}

/// Coefficients `a_0, a_1, ...` of `[a]_f = sum_m a_m X^{q^m}` from the
/// recursion `a_m (t^{q^m} - t) = a_{m-1}^q - a_{m-1}`.
///
/// Each step divides by `t` and so costs one digit of `t`-adic precision.
pub fn bracket_series(a: &TruncSeries, terms: usize) -> Result<Vec<TruncSeries>> {
    if a.valuation().is_some_and(|v| v < 0) {
        return Err(Error::Domain("[a]_f needs a in F_q[[t]]".into()));
    }
    if a.is_exact() {
        return Err(Error::Precision("bracket_series needs a finite working precision".into()));
    }
    let field = a.field();
    let q = field.q() as i64;
    let mut out = Vec::with_capacity(terms);
    if terms == 0 {
        return Ok(out);
    }
    out.push(a.clone());
    for m in 1..terms {
        let prev = &out[m - 1];
        let frob = TruncSeries::new(
            field,
            0,
            (0..prev.precision()).map(|i| prev.coeff(i)).collect::<Vec<_>>(),
            prev.precision(),
        );
        let prev_q = frob_series(&frob, q);
        let num = prev_q - prev.clone();
        if num.precision() <= 1 {
            return Err(Error::Precision(format!("not enough t-adic precision for term {m} of [a]_f")));
        }
        if !num.coeff(0).is_zero() {
            return Err(Error::Consistency(format!("a_{}^q - a_{} is not divisible by t", m - 1, m - 1)));
        }
        let num_over_t = num.shift_by(-1);
        // (t^{q^m} - t)/t = t^{q^m - 1} - 1, a unit
        let qm = (q as u64).pow(m as u32) as i64;
        let unit = TruncSeries::t_pow(field, qm - 1) - TruncSeries::one(field);
        let unit_inv = unit.inv_to(num_over_t.precision())?;
        out.push(num_over_t * unit_inv);
    }
    Ok(out)
}

fn frob_series(a: &TruncSeries, q: i64) -> TruncSeries {
    let field = a.field();
    let prec = a.precision();
    let mut coeffs = vec![field.zero(); (prec * q) as usize];
    for i in 0..prec {
        coeffs[(i * q) as usize] = a.coeff(i);
    }
    TruncSeries::new(field, 0, coeffs, prec * q)
}

/// `s_a = sum_j a_j X^{q^j}` for `a = sum_j a_j t^j` in `R`.
pub fn s_map(a: RElem) -> XPoly {
    let field = a.ring().field();
    let q = field.q() as usize;
    let coeffs = a.coeffs();
    let deg = q.pow(coeffs.len() as u32 - 1);
    let mut out = vec![field.zero(); deg + 1];
    for (j, c) in coeffs.into_iter().enumerate() {
        out[q.pow(j as u32)] = c;
    }
    Poly::new(field.zero(), out)
}

/// `[a]_f = sum_{j<k} c_j f^{∘j}(X)` for `a = sum c_j t^j` in `R`.
pub fn bracket_poly(a: RElem) -> TPoly {
    LubinTate::new(a.ring().field(), a.ring().k()).bracket_poly(a)
}

/// `[a]_f = sum_j c_j f^{∘j}` for an exact `a = sum_j c_j t^j` in `F_q[t]`.
pub fn bracket_exact(field: Fq, a: &TElem) -> TPoly {
    let q = field.q();
    let mut acc: Vec<TElem> = Vec::new();
    for (j, &c) in a.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let scalar = TElem::constant(c);
        let b = iterate_additive(field, j as u32);
        acc.resize(acc.len().max(b.len()), TElem::zero(field.zero()));
        for (i, bi) in b.iter().enumerate() {
            acc[i] = &acc[i] + &(&scalar * bi);
        }
    }
    while acc.last().is_some_and(|c| c.is_zero()) {
        acc.pop();
    }
    additive_to_dense(field, q, &acc)
}

/// Iterates `f^{∘0}, ..., f^{∘k}` cached for repeated `[a]_f` evaluation.
#[derive(Clone, Debug)]
pub struct LubinTate {
    field: Fq,
    k: u32,
    additive: Vec<Vec<TElem>>,
}

impl LubinTate {
    pub fn new(field: Fq, k: u32) -> Self {
        let additive = (0..=k).map(|m| iterate_additive(field, m)).collect();
        LubinTate { field, k, additive }
    }

    pub fn field(&self) -> Fq {
        self.field
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn iterate(&self, m: u32) -> TPoly {
        match self.additive.get(m as usize) {
            Some(b) => additive_to_dense(self.field, self.field.q(), b),
            None => iterate_f(self.field, m),
        }
    }

    /// `[a]_f` as `sum_j b_j X^{q^j}`, coefficients exact.
    pub fn bracket_additive(&self, a: RElem) -> Vec<TElem> {
        let zero_t = TElem::zero(self.field.zero());
        let mut out = vec![zero_t; a.ring().k() as usize];
        for (j, c) in a.coeffs().into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scalar = TElem::constant(c);
            for (i, b) in self.additive[j].iter().enumerate() {
                out[i] = &out[i] + &(&scalar * b);
            }
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    pub fn bracket_poly(&self, a: RElem) -> TPoly {
        additive_to_dense(self.field, self.field.q(), &self.bracket_additive(a))
    }
}

/// Checks the Eisenstein shape of `h = sum a_j X^j` of degree `m`
/// (`v_t(a_0) = 1`, `v_t(a_j) >= 1` for `0 < j < m`, `a_m` a unit) and
/// returns the `t`-adic valuation `1/m` shared by all its roots.
pub fn newton_check(h: &TPoly) -> Result<Rational> {
    let m = h.degree().ok_or_else(|| Error::NotEisenstein { index: 0, reason: "zero polynomial".into() })?;
    if m == 0 {
        return Err(Error::NotEisenstein { index: 0, reason: "constant polynomial has no roots".into() });
    }
    let v = |j: usize| h.coeff(j).valuation().finite();
    if v(m) != Some(0) {
        return Err(Error::NotEisenstein { index: m, reason: "leading coefficient is not a unit".into() });
    }
    if v(0) != Some(1) {
        return Err(Error::NotEisenstein {
            index: 0,
            reason: format!("constant term has v_t = {}", h.coeff(0).valuation()),
        });
    }
    for j in 1..m {
        if v(j) == Some(0) {
            return Err(Error::NotEisenstein { index: j, reason: "interior coefficient is a unit".into() });
        }
    }
    Ok(Rational::new(1, m as i64))
}

/// `g_k = f^{∘k} / f^{∘(k-1)}`, by exact monic division.
pub fn eisenstein_factor(field: Fq, k: u32) -> Result<TPoly> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let num = iterate_f(field, k);
    let den = iterate_f(field, k - 1);
    let (quot, rem) = num.divrem_monic(&den)?;
    if !rem.is_zero() {
        return Err(Error::Consistency(format!("f^{k} is not divisible by f^{}", k - 1)));
    }
    Ok(quot)
}

/// Evaluates `p` at an `F_q` point after reducing coefficients mod `t`.
pub fn eval_residue(p: &TPoly, x: FqElem) -> FqElem {
    reduce_mod_t(p).eval(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::ResidueRing;
    use crate::poly::Coeff;
    use proptest::prelude::*;

    fn tp(field: Fq, rows: &[&[i64]]) -> TPoly {
        let zero_t = TElem::zero(field.zero());
        Poly::new(zero_t, rows.iter().map(|r| TElem::from_ints(field, r)).collect())
    }

    #[test]
    fn iterates_match_hand_expansion() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(iterate_f(f2, 1), tp(f2, &[&[], &[0, 1], &[1]]));
        // t^2 X + (t + t^2) X^2 + X^4
        assert_eq!(iterate_f(f2, 2), tp(f2, &[&[], &[0, 0, 1], &[0, 1, 1], &[], &[1]]));
        let f3 = Fq::new(3).unwrap();
        // t^2 X + (t + t^3) X^3 + X^9
        let f2_3 = iterate_f(f3, 2);
        assert_eq!(f2_3.degree(), Some(9));
        assert_eq!(*f2_3.coeff(1), TElem::from_ints(f3, &[0, 0, 1]));
        assert_eq!(*f2_3.coeff(3), TElem::from_ints(f3, &[0, 1, 0, 1]));
        // composing the generic way agrees
        let f = lt_poly(f3);
        assert_eq!(f.compose(&f), f2_3);
    }

    #[test]
    fn iterates_are_additive_and_monic() {
        for q in [2, 3, 4] {
            let field = Fq::new(q).unwrap();
            for m in 1..=3 {
                let p = iterate_f(field, m);
                assert_eq!(p.degree(), Some((q as usize).pow(m)));
                assert!(p.leading().unwrap().is_one());
                assert!(p.coeff(0).is_zero());
                for (i, c) in p.coeffs().iter().enumerate() {
                    let additive = (0..=m).any(|j| (q as usize).pow(j) == i);
                    assert!(additive || c.is_zero(), "X^{i} appears in f^{m}");
                }
            }
        }
    }

    #[test]
    fn bracket_series_examples() {
        let f2 = Fq::new(2).unwrap();
        let t = TruncSeries::from_ints(f2, &[0, 1], 6);
        let s = bracket_series(&t, 4).unwrap();
        assert_eq!(s[0], t);
        assert_eq!(s[1], TruncSeries::one(f2).with_precision(5));
        assert!(s[2].is_zero() && s[3].is_zero());
        let one_plus_t = TruncSeries::from_ints(f2, &[1, 1], 6);
        let s = bracket_series(&one_plus_t, 3).unwrap();
        assert_eq!(s[1], TruncSeries::one(f2).with_precision(5));
        let f3 = Fq::new(3).unwrap();
        let c = TruncSeries::from_ints(f3, &[2], 5);
        let s = bracket_series(&c, 3).unwrap();
        assert!(s[1].is_zero() && s[2].is_zero());
    }

    #[test]
    fn bracket_series_runs_out_of_precision() {
        let f2 = Fq::new(2).unwrap();
        let a = TruncSeries::from_ints(f2, &[1, 1], 2);
        assert!(matches!(bracket_series(&a, 5), Err(Error::Precision(_))));
    }

    #[test]
    fn bracket_poly_examples() {
        let r = ResidueRing::new(2, 2).unwrap();
        let f2 = r.field();
        assert_eq!(bracket_poly(r.one()), tp(f2, &[&[], &[1]]));
        assert_eq!(bracket_poly(r.t()), lt_poly(f2));
        assert_eq!(bracket_poly(r.from_ints(&[1, 1])), tp(f2, &[&[], &[1, 1], &[1]]));
        assert_eq!(s_map(r.from_ints(&[1, 1])), XPoly::from_ints(f2, &[0, 1, 1]));
        assert!(s_map(r.zero()).is_zero());
        assert_eq!(s_map(r.t()).valuation().finite(), Some(2));
    }

    #[test]
    fn eisenstein_factors() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(eisenstein_factor(f2, 1).unwrap(), tp(f2, &[&[0, 1], &[1]]));
        // (t^2 X + (t+t^2) X^2 + X^4) / (tX + X^2) = t + tX + X^2
        assert_eq!(eisenstein_factor(f2, 2).unwrap(), tp(f2, &[&[0, 1], &[0, 1], &[1]]));
        let f3 = Fq::new(3).unwrap();
        assert_eq!(eisenstein_factor(f3, 1).unwrap(), tp(f3, &[&[0, 1], &[], &[1]]));
        for q in [2, 3] {
            let field = Fq::new(q).unwrap();
            for k in 1..=3 {
                let g = eisenstein_factor(field, k).unwrap();
                let e = (q as i64).pow(k - 1) * (q as i64 - 1);
                assert_eq!(newton_check(&g).unwrap(), Rational::new(1, e));
            }
        }
    }

    #[test]
    fn newton_check_rejections() {
        let f2 = Fq::new(2).unwrap();
        assert_eq!(newton_check(&tp(f2, &[&[0, 1], &[1]])).unwrap(), Rational::new(1, 1));
        let bad_const = tp(f2, &[&[0, 0, 1], &[1]]);
        assert!(matches!(newton_check(&bad_const), Err(Error::NotEisenstein { index: 0, .. })));
        let bad_mid = tp(f2, &[&[0, 1], &[1], &[1]]);
        assert!(matches!(newton_check(&bad_mid), Err(Error::NotEisenstein { index: 1, .. })));
        let bad_lead = tp(f2, &[&[0, 1], &[0, 1]]);
        assert!(matches!(newton_check(&bad_lead), Err(Error::NotEisenstein { index: 1, .. })));
    }

    fn commutes(lt: &LubinTate, a: RElem, n: usize) -> bool {
        let f = lt_poly(lt.field());
        let p = lt.bracket_poly(a);
        truncate_t(&p.compose(&f), n) == truncate_t(&f.compose(&p), n)
    }

    #[test]
    fn exhaustive_commutation_and_residues() {
        for (q, k) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let r = ResidueRing::new(q, k).unwrap();
            let lt = LubinTate::new(r.field(), k);
            for a in r.elements() {
                assert!(commutes(&lt, a, k as usize + 2));
                assert_eq!(reduce_mod_t(&lt.bracket_poly(a)), s_map(a));
            }
        }
    }

    proptest! {
        #[test]
        fn bracket_is_a_ring_map(x in 0u32..27, y in 0u32..27) {
            let r = ResidueRing::new(3, 3).unwrap();
            let lt = LubinTate::new(r.field(), 3);
            let (a, b) = (r.elem(x), r.elem(y));
            let (pa, pb) = (lt.bracket_poly(a), lt.bracket_poly(b));
            prop_assert_eq!(lt.bracket_poly(a + b), &pa + &pb);
            // the product is taken in F_q[t], before reduction mod t^k
            let ab = a.to_telem() * b.to_telem();
            prop_assert_eq!(pa.compose(&pb), bracket_exact(r.field(), &ab));
            // after reduction the two agree modulo t on X^1 .. X^{q^{k-1}}
            let reduced = reduce_mod_t(&lt.bracket_poly(a * b));
            prop_assert_eq!(reduce_mod_t(&pa.compose(&pb)).truncate(10), reduced);
        }

        #[test]
        fn series_and_polynomial_forms_agree(x in 0u32..27) {
            let r = ResidueRing::new(3, 3).unwrap();
            let lt = LubinTate::new(r.field(), 3);
            let a = r.elem(x);
            let n = 5;
            let series = bracket_series(&a.to_series(n), 3).unwrap();
            let poly = lt.bracket_additive(a);
            for (m, s) in series.iter().enumerate() {
                let exact = poly.get(m).cloned().unwrap_or(TElem::zero(r.field().zero()));
                prop_assert_eq!(s.clone(), TruncSeries::from_telem(&exact, s.precision()));
            }
        }
    }
}
