//! Exhaustive checks of the Lubin–Tate layer at one `(q, k)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{
    bracket_series, eisenstein_factor, lt_poly, newton_check, reduce_mod_t, s_map, truncate_t, ExtField, LubinTate,
};
use crate::error::Result;
use crate::laurent::{ResidueRing, TruncSeries};
use crate::poly::TElem;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub q: u32,
    pub k: u32,
    /// `[a]_f ∘ f = f ∘ [a]_f` modulo `t^{k+2}` for every `a ∈ A_k`.
    pub commutation: bool,
    /// `[a]_f ≡ s_a (mod t)` for every `a`.
    pub residue: bool,
    /// The recursive series form agrees with the closed form on `X^{q^m}`, `q^m <= q^{k-1}`.
    pub series_agreement: bool,
    pub orbit_size: u64,
    pub orbit_closed_under_addition: bool,
    /// `f^{∘k}` kills every `[a]_f(ζ_1)`.
    pub orbit_annihilated: bool,
    pub order_of_zeta1: u32,
    /// The root valuation from the Newton check on `g_k`.
    pub newton_value: String,
    pub newton_expected: String,
    pub pass: bool,
}

/// Runs every check; the working `t`-precision is `k + 2` throughout.
pub fn lt_selftest(q: u32, k: u32) -> Result<SelfTestReport> {
    let ring = ResidueRing::new(q, k)?;
    let field = ring.field();
    let lt = LubinTate::new(field, k);
    let f = lt_poly(field);
    let prec = k as usize + 2;

    let mut commutation = true;
    let mut residue = true;
    let mut series_agreement = true;
    for a in ring.elements() {
        let p = lt.bracket_poly(a);
        commutation &= truncate_t(&p.compose(&f), prec) == truncate_t(&f.compose(&p), prec);
        residue &= reduce_mod_t(&p) == s_map(a);
        let additive = lt.bracket_additive(a);
        let series = bracket_series(&a.to_series(prec as i64), k as usize)?;
        for (m, s) in series.iter().enumerate() {
            let exact = additive.get(m).cloned().unwrap_or_else(|| TElem::zero(field.zero()));
            series_agreement &= *s == TruncSeries::from_telem(&exact, s.precision());
        }
    }

    let ext = ExtField::new(q, k, prec)?;
    let table = ext.torsion_table(ring);
    let distinct: HashSet<Vec<String>> = table.iter().map(|x| x.to_json().digits).collect();
    let mut closed = true;
    for a in ring.elements() {
        for b in ring.elements() {
            closed &= &table[a.code() as usize] + &table[b.code() as usize] == table[(a + b).code() as usize];
        }
    }
    let annihilated = table.iter().all(|x| ext.f_orbit(x)[k as usize].is_zero());
    let order = ext.order_of(&ext.zeta1())?;

    let newton = newton_check(&eisenstein_factor(field, k)?)?;
    let expected = Rational::new(1, (q as i64).pow(k - 1) * (q as i64 - 1));
    let orbit_size = distinct.len() as u64;
    let pass = commutation
        && residue
        && series_agreement
        && orbit_size == ring.size() as u64
        && closed
        && annihilated
        && order == k
        && newton == expected;
    Ok(SelfTestReport {
        q,
        k,
        commutation,
        residue,
        series_agreement,
        orbit_size,
        orbit_closed_under_addition: closed,
        orbit_annihilated: annihilated,
        order_of_zeta1: order,
        newton_value: newton.to_string(),
        newton_expected: expected.to_string(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_passes() {
        for (q, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let r = lt_selftest(q, k).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.orbit_size, (q as u64).pow(k));
        }
    }
}
