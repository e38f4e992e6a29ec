//! The polynomial method: a vanishing polynomial on the torsion image of a
//! small set, its restriction to lines, residue reduction, and the counting
//! lemma that turns it all into a contradiction.

pub mod lagrange;
pub mod multipoly;
pub mod solver;
pub mod sz;
pub mod trace;

pub use lagrange::{lagrange_check, leading_coefficient_identity, RatFunc};
pub use multipoly::MultiPoly;
pub use solver::{monomial_basis, vanishing_polynomial, ValuedCoeff};
pub use sz::{
    random_sz_poly, sz_bound, sz_count, sz_random_batch, sz_sweep_univariate, sz_threshold, sz_verify, SzReport,
    SzSweep,
};
pub use trace::{
    adversarial_instance, proof_trace, replay, Claim, ProofTrace, ReplayReport, TraceOptions, TraceStep, Verdict,
};

use crate::error::{Error, Result};
use crate::galois::FqElem;
use crate::lubin_tate::ExtElem;
use crate::poly::{Poly, TPoly, XPoly};

/// `ḡ`: every coefficient through the residue map `O_L → F_q`.
pub fn residue_reduce(g: &MultiPoly<ExtElem>) -> Result<MultiPoly<FqElem>> {
    let field = g.zero_coeff().ext().fq();
    g.try_map(field.zero(), |c| {
        if c.horizon() < 1 {
            return Err(Error::Precision("coefficient has no known digits; residue undefined".into()));
        }
        Ok(c.residue())
    })
}

/// Residue of a univariate polynomial over `O_L`.
pub fn residue_poly(h: &Poly<ExtElem>) -> Result<XPoly> {
    let field = h.zero_coeff().ext().fq();
    let coeffs = h
        .coeffs()
        .iter()
        .map(|c| {
            if c.horizon() < 1 {
                Err(Error::Precision("coefficient has no known digits; residue undefined".into()))
            } else {
                Ok(c.residue())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(field.zero(), coeffs))
}

/// `h_w(X) = g(c_1 + P_1(X), ..., c_n + P_n(X))` over `L_N`.
///
/// The `c_j` must lie in the maximal ideal so that the residue of `h_w` is
/// `ḡ(P̄_1, ..., P̄_n)`.
pub fn compose_line(g: &MultiPoly<ExtElem>, c: &[ExtElem], p: &[TPoly]) -> Result<Poly<ExtElem>> {
    let n = g.n();
    if c.len() != n || p.len() != n {
        return Err(Error::Domain(format!("line data of dimension {}/{} for n = {n}", c.len(), p.len())));
    }
    if let Some(j) = c.iter().position(|x| x.val_opt() == Some(0)) {
        return Err(Error::Domain(format!("c_{} is a unit, not in the maximal ideal", j + 1)));
    }
    let ext = g.zero_coeff().ext().clone();
    let linear: Vec<Poly<ExtElem>> = c
        .iter()
        .zip(p)
        .map(|(cj, pj)| &pj.map(ext.zero(), |t| ext.from_telem(t)) + &Poly::constant(cj.clone()))
        .collect();
    Ok(g.eval_with(&linear, |a| Poly::constant(a.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::ResidueRing;
    use crate::lubin_tate::{bracket_poly, s_map, ExtField};
    use proptest::prelude::*;

    #[test]
    fn identity_line_n1() {
        let ext = ExtField::new(2, 2, 4).unwrap();
        let ring = ResidueRing::new(2, 2).unwrap();
        let g = MultiPoly::var(1, 0, &ext.one());
        let h = compose_line(&g, &[ext.zero()], &[bracket_poly(ring.one())]).unwrap();
        let hb = residue_poly(&h).unwrap();
        assert_eq!(hb, XPoly::from_ints(ext.fq(), &[0, 1]));
        assert_eq!(hb.valuation().finite(), Some(1));
    }

    #[test]
    fn direction_t_gives_x_squared() {
        let ext = ExtField::new(2, 2, 4).unwrap();
        let ring = ResidueRing::new(2, 2).unwrap();
        let g = MultiPoly::var(1, 0, &ext.one());
        let h = compose_line(&g, &[ext.zero()], &[bracket_poly(ring.t())]).unwrap();
        let hb = residue_poly(&h).unwrap();
        assert_eq!(hb, XPoly::from_ints(ext.fq(), &[0, 0, 1]));
        assert_eq!(hb.valuation().finite(), Some(2));
    }

    #[test]
    fn unit_offsets_rejected() {
        let ext = ExtField::new(2, 1, 3).unwrap();
        let ring = ResidueRing::new(2, 1).unwrap();
        let g = MultiPoly::var(1, 0, &ext.one());
        assert!(compose_line(&g, &[ext.one()], &[bracket_poly(ring.one())]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        /// `residue(compose_line(g, c_w, P_w)) = ḡ(s_{w_1}, ..., s_{w_n})`.
        #[test]
        fn residue_commutes_with_composition(
            q in 2u32..4,
            k in 1u32..3,
            terms in proptest::collection::vec((0u32..3, 0u32..3, any::<u32>()), 1..4),
            w in proptest::collection::vec(any::<u32>(), 2),
            b in proptest::collection::vec(any::<u32>(), 2),
        ) {
            let ext = ExtField::new(q, k, k as usize + 2).unwrap();
            let ring = ResidueRing::new(q, k).unwrap();
            let table = ext.torsion_table(ring);
            let fq = ext.fq();
            let g = MultiPoly::from_terms(
                2,
                ext.zero(),
                terms.iter().map(|&(a, bb, c)| (vec![a, bb], ext.from_fq(fq.elem(c % q)))),
            ).unwrap();
            let w: Vec<_> = w.iter().map(|&x| ring.elem(x % ring.size())).collect();
            let c: Vec<ExtElem> = b.iter().map(|&x| table[(x % ring.size()) as usize].clone()).collect();
            let p: Vec<TPoly> = w.iter().map(|&x| bracket_poly(x)).collect();
            let h = compose_line(&g, &c, &p).unwrap();
            let lhs = residue_poly(&h).unwrap();
            let gbar = residue_reduce(&g).unwrap();
            let s: Vec<XPoly> = w.iter().map(|&x| s_map(x)).collect();
            let rhs = gbar.eval_with(&s, |a| XPoly::constant(*a));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
