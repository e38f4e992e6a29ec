//! Nonzero polynomials of bounded degree vanishing on a finite point set.

use super::multipoly::MultiPoly;
use crate::error::{Error, Result};
use crate::galois::FqElem;
use crate::kakeya::binomial;
use crate::lubin_tate::ExtElem;
use crate::poly::Coeff;

/// A coefficient ring with a discrete valuation, possibly known only to a
/// finite horizon (everything below the horizon is exact).
pub trait ValuedCoeff: Coeff {
    /// Valuation, or `None` if the element is zero to its horizon.
    fn val(&self) -> Option<i64>;
    /// Precision of the element; `i64::MAX` when exact.
    fn horizon(&self) -> i64;
    /// `self / d`, which must lie in the valuation ring.
    fn exact_div(&self, d: &Self) -> Result<Self>;
    /// `self / ϖ^m` for the uniformizer `ϖ`.
    fn div_uniformizer_pow(&self, m: i64) -> Result<Self>;
}

impl ValuedCoeff for FqElem {
    fn val(&self) -> Option<i64> {
        (!FqElem::is_zero(*self)).then_some(0)
    }

    fn horizon(&self) -> i64 {
        i64::MAX
    }

    fn exact_div(&self, d: &Self) -> Result<Self> {
        Ok(*self * d.inv()?)
    }

    fn div_uniformizer_pow(&self, m: i64) -> Result<Self> {
        if m == 0 {
            Ok(*self)
        } else {
            Err(Error::Domain("F_q carries the trivial valuation".into()))
        }
    }
}

impl ValuedCoeff for ExtElem {
    fn val(&self) -> Option<i64> {
        self.val_opt()
    }

    fn horizon(&self) -> i64 {
        ExtElem::horizon(self)
    }

    fn exact_div(&self, d: &Self) -> Result<Self> {
        self.checked_div(d)
    }

    fn div_uniformizer_pow(&self, m: i64) -> Result<Self> {
        self.div_pi_pow(m)
    }
}

/// Exponent tuples of total degree `<= d` in `n` variables, graded-lex:
/// by total degree, then lexicographically.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=left {
            prefix.push(a);
            rec(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    for deg in 0..=d {
        rec(n, deg, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// A nonzero `g` of total degree `<= d` with `g(s) = 0` for every `s` in
/// `points`, normalized so its least coefficient valuation is 0.
///
/// Gauss–Jordan elimination on the evaluation matrix, pivoting on an entry
/// of least valuation (ties: smallest column, then row) so that every row
/// operation stays integral; the solution sets the last free column to 1.
/// `one` fixes the coefficient ring when `points` is empty.
pub fn vanishing_polynomial<C: ValuedCoeff>(points: &[Vec<C>], n: usize, d: u32, one: &C) -> Result<MultiPoly<C>> {
    let dim = binomial(n as u64 + d as u64, n as u64);
    if points.len() as u128 >= dim {
        return Err(Error::Precondition(format!(
            "|S| = {} is not below C(n+d, n) = {dim} for n = {n}, d = {d}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::Domain(format!("point of dimension {} in an n = {n} problem", p.len())));
    }
    let basis = monomial_basis(n, d);
    let cols = basis.len();
    let one = one.one_like();
    let mut m: Vec<Vec<C>> = points
        .iter()
        .map(|s| {
            let powers: Vec<Vec<C>> = s
                .iter()
                .map(|x| {
                    let mut row = vec![one.clone()];
                    for _ in 0..d {
                        let next = row.last().unwrap().clone() * x.clone();
                        row.push(next);
                    }
                    row
                })
                .collect();
            basis
                .iter()
                .map(|e| e.iter().enumerate().fold(one.clone(), |acc, (i, &a)| acc * powers[i][a as usize].clone()))
                .collect()
        })
        .collect();

    let rows = m.len();
    let mut row_used = vec![false; rows];
    let mut col_pivot: Vec<Option<usize>> = vec![None; cols];
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for c in (0..cols).filter(|&c| col_pivot[c].is_none()) {
            for r in (0..rows).filter(|&r| !row_used[r]) {
                if let Some(v) = m[r][c].val() {
                    if best.is_none_or(|b| (v, c, r) < b) {
                        best = Some((v, c, r));
                    }
                }
            }
        }
        let Some((_, pc, pr)) = best else { break };
        let p = m[pr][pc].clone();
        for x in m[pr].iter_mut() {
            *x = x.exact_div(&p)?;
        }
        let pivot_row = m[pr].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - factor.clone() * y.clone();
            }
        }
        row_used[pr] = true;
        col_pivot[pc] = Some(pr);
    }

    let free = (0..cols)
        .rev()
        .find(|&c| col_pivot[c].is_none())
        .ok_or_else(|| Error::Consistency("no free column although |S| < C(n+d, n)".into()))?;
    let mut g = MultiPoly::zero(n, one.zero_like());
    let mut terms = vec![(basis[free].clone(), one.clone())];
    for (c, pr) in col_pivot.iter().enumerate() {
        if let Some(pr) = *pr {
            terms.push((basis[c].clone(), -m[pr][free].clone()));
        }
    }
    g = &g + &MultiPoly::from_terms(n, one.zero_like(), terms)?;

    let min_val = g
        .terms()
        .values()
        .filter_map(|c| c.val())
        .min()
        .ok_or_else(|| Error::Precision("every coefficient of the nullspace vector is below the horizon".into()))?;
    if min_val > 0 {
        g = g.try_map(one.zero_like(), |c| c.div_uniformizer_pow(min_val))?;
    }
    for (i, s) in points.iter().enumerate() {
        let v = g.eval(s);
        if !v.is_zero() {
            return Err(if v.horizon() == i64::MAX {
                Error::Consistency(format!("solver output does not vanish at point {i}"))
            } else {
                Error::Precision(format!("solver output does not vanish at point {i} to the working precision"))
            });
        }
        if v.horizon() < 1 {
            return Err(Error::Precision(format!("vanishing at point {i} cannot be certified: no digits left")));
        }
    }
    Ok(g)
}
