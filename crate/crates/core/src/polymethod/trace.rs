//! An executable run of the covering argument on a concrete `E ⊆ R^n`.
//!
//! Steps, in order:
//! 1. `β = ⌊νεq^{k-1}/(kn)⌋` and the size test `|Ẽ| < C(β+n, n)`;
//! 2. the torsion image `S = {([s_1]_f(ζ_1), ..., [s_n]_f(ζ_1))}`;
//! 3. a vanishing polynomial `g` on `S` of degree `<= β` and its residue `ḡ`;
//! 4. for every claimed direction `w`, the restriction `h_w` and `v_X(h̄_w)`;
//! 5. the counting lemma on `ḡ` with `θ = ε/n` and the final chain
//!    `νq^{kn} <= |Ω| < βkq^{k(n-1)+1}n/ε <= νq^{kn}`.
//!
//! A genuine `(ε, ν)`-Kakeya set stops at step 1. With `force` the run
//! continues past a failed size test using the least degree `d >= β` for
//! which a vanishing polynomial exists, and some later check must fail.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multipoly::MultiPoly;
use super::solver::{monomial_basis, vanishing_polynomial};
use super::sz::{sz_verify, SzReport};
use super::{compose_line, residue_poly, residue_reduce};
use crate::error::{Error, Result};
use crate::galois::FqElem;
use crate::kakeya::{binomial, covering_beta, profile, PointSet};
use crate::laurent::{RSpace, RVector};
use crate::lubin_tate::{bracket_poly, ExtElem, ExtElemJson, ExtField};
use crate::poly::XPoly;
use crate::Rational;

/// A declared direction together with the base point of its witness line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub direction: u64,
    pub base: u64,
}

#[derive(Clone, Debug, Default)]
pub struct TraceOptions {
    /// Working `t`-precision `N` of `L_N`; defaults to `k + 2`.
    pub precision: Option<usize>,
    /// Continue past a failed size test.
    pub force: bool,
    /// The direction set `Ω` with witnesses; by default every direction whose
    /// best line meets `E` in at least `εq^k` points.
    pub claims: Option<Vec<Claim>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtTerm {
    pub exp: Vec<u32>,
    pub coeff: ExtElemJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FqTerm {
    pub exp: Vec<u32>,
    pub coeff: u32,
}

/// Step 4 data for one `w ∈ Ω`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub direction: u64,
    pub base: u64,
    /// Codes of `J_w = {a : b_w + a w ∈ Ẽ}`.
    pub j_w: Vec<u32>,
    pub c_w: Vec<ExtElemJson>,
    pub h_w: Vec<ExtElemJson>,
    /// Coefficient codes of `h̄_w`, constant term first.
    pub h_bar: Vec<u32>,
    /// `v_X(h̄_w)`; `None` when `h̄_w = 0`.
    pub v_x: Option<u64>,
    /// `|J_w| >= εq^k`.
    pub line_ok: bool,
    /// `h_w(ζ_a) = 0` for every `a ∈ J_w`.
    pub vanishes_on_j: bool,
    /// `X^{|J_w|}` divides `h̄_w`.
    pub divisible: bool,
    /// `v_X(h̄_w) >= εq^k`.
    pub valuation_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    SizeTest {
        size: u64,
        beta: u64,
        /// `C(β+n, n)`, saturated to 64 bits.
        bound: u64,
        /// `|Ẽ| < C(β+n, n)`, the hypothesis the argument refutes.
        hypothesis_holds: bool,
        forced: bool,
        /// Degree bound used for `g` in later steps.
        degree: u32,
    },
    TorsionImage {
        precision: usize,
        zeta1: ExtElemJson,
        images: Vec<Vec<ExtElemJson>>,
    },
    VanishingPolynomial {
        degree_bound: u32,
        basis: Vec<Vec<u32>>,
        g: Vec<ExtTerm>,
        g_bar: Vec<FqTerm>,
        g_bar_text: String,
        leading_exponent: Vec<u32>,
        vanishes_on_s: bool,
    },
    LineRestriction {
        /// `εq^k`.
        threshold: String,
        directions: Vec<DirectionRecord>,
        all_pass: bool,
    },
    Counting {
        theta: String,
        sz: Option<SzReport>,
        sz_error: Option<String>,
        omega: u64,
        /// `|Ω|` is at most the lemma's count, since `w ↦ (s_{w_1}, ..., s_{w_n})`
        /// is injective and every `w ∈ Ω` passed step 4.
        omega_le_count: Option<bool>,
        nu_qkn: String,
        chain_bound: String,
        nu_le_omega: bool,
        omega_lt_chain_bound: bool,
        chain_bound_le_nu: bool,
    },
}

impl TraceStep {
    pub fn number(&self) -> u8 {
        match self {
            TraceStep::SizeTest { .. } => 1,
            TraceStep::TorsionImage { .. } => 2,
            TraceStep::VanishingPolynomial { .. } => 3,
            TraceStep::LineRestriction { .. } => 4,
            TraceStep::Counting { .. } => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `|Ẽ| >= C(β+n, n)`: the covering bound holds and nothing is refuted.
    TerminatedAtSizeTest,
    /// A later assertion failed; the hypothesis of the argument is refuted there.
    FailedAt { step: u8, reason: String },
    /// Every assertion held. The chain in step 5 is self-contradictory, so this
    /// can only be reached through an arithmetic defect.
    ContradictionDerived,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub q: u32,
    pub k: u32,
    pub n: usize,
    pub epsilon: String,
    pub nu: String,
    pub precision: usize,
    /// The run was repeated at a higher precision after a precision error.
    pub retried: bool,
    pub points: Vec<u64>,
    pub claims: Vec<Claim>,
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
}

impl ProofTrace {
    pub fn step(&self, number: u8) -> Option<&TraceStep> {
        self.steps.iter().find(|s| s.number() == number)
    }

    /// The step at which the run stopped, `None` if it went through.
    pub fn terminated_at(&self) -> Option<u8> {
        match &self.verdict {
            Verdict::TerminatedAtSizeTest => Some(1),
            Verdict::FailedAt { step, .. } => Some(*step),
            Verdict::ContradictionDerived => None,
        }
    }

    /// True when the counting lemma itself failed, which must never happen.
    pub fn lemma_violation(&self) -> bool {
        matches!(self.step(5), Some(TraceStep::Counting { sz: Some(r), .. }) if !r.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ok: bool,
    pub mismatches: Vec<String>,
}

fn check_unit_interval(name: &str, x: Rational) -> Result<()> {
    if x <= Rational::from_integer(0) || x > Rational::from_integer(1) {
        return Err(Error::Domain(format!("{name} = {x} is outside (0, 1]")));
    }
    Ok(())
}

fn at_step(step: u8, e: Error) -> Error {
    match e {
        Error::Precision(m) => Error::Precision(format!("step {step}: {m}")),
        Error::Consistency(m) => Error::Consistency(format!("step {step}: {m}")),
        Error::Budget(m) => Error::Budget(format!("step {step}: {m}")),
        other => other,
    }
}

/// `value >= r·m` for integers `value`, `m` and rational `r`.
fn ge_scaled(value: u64, r: Rational, m: u64) -> bool {
    value as i128 * *r.denom() as i128 >= *r.numer() as i128 * m as i128
}

struct Ctx {
    space: RSpace,
    eps: Rational,
    nu: Rational,
    ext: Arc<ExtField>,
    /// `[a]_f(ζ_1)` indexed by the code of `a`.
    table: Vec<ExtElem>,
}

impl Ctx {
    fn new(space: RSpace, eps: Rational, nu: Rational, precision: usize) -> Result<Ctx> {
        let ext = ExtField::new(space.q(), space.k(), precision)?;
        let table = ext.torsion_table(space.ring());
        Ok(Ctx { space, eps, nu, ext, table })
    }

    fn image(&self, idx: u64) -> Vec<ExtElem> {
        self.space.point(idx).coords().iter().map(|a| self.table[a.code() as usize].clone()).collect()
    }

    fn line_size(&self) -> u64 {
        self.space.ring().size() as u64
    }
}

fn size_step(e: &PointSet, eps: Rational, nu: Rational, force: bool) -> (TraceStep, bool) {
    let space = e.space();
    let n = space.n();
    let beta = covering_beta(eps, nu, space.k(), n, space.q());
    let bound = binomial(beta + n as u64, n as u64);
    let size = e.len() as u64;
    let holds = (size as u128) < bound;
    let mut degree = beta;
    while binomial(degree + n as u64, n as u64) <= size as u128 {
        degree += 1;
    }
    let bound = bound.min(u64::MAX as u128) as u64;
    let step = TraceStep::SizeTest {
        size,
        beta,
        bound,
        hypothesis_holds: holds,
        forced: force && !holds,
        degree: degree as u32,
    };
    (step, holds || force)
}

fn torsion_step(ctx: &Ctx, points: &[u64]) -> (TraceStep, Vec<Vec<ExtElem>>) {
    let s: Vec<Vec<ExtElem>> = points.iter().map(|&i| ctx.image(i)).collect();
    let step = TraceStep::TorsionImage {
        precision: ctx.ext.precision(),
        zeta1: ctx.ext.zeta1().to_json(),
        images: s.iter().map(|p| p.iter().map(|x| x.to_json()).collect()).collect(),
    };
    (step, s)
}

fn vanishing_step(
    ctx: &Ctx,
    s: &[Vec<ExtElem>],
    g: &MultiPoly<ExtElem>,
    d: u32,
) -> Result<(TraceStep, MultiPoly<FqElem>)> {
    let gbar = residue_reduce(g)?;
    let vanishes = s.iter().all(|p| {
        let v = g.eval(p);
        v.is_zero() && v.horizon() >= 1
    });
    let step = TraceStep::VanishingPolynomial {
        degree_bound: d,
        basis: monomial_basis(ctx.space.n(), d),
        g: g.terms().iter().map(|(e, c)| ExtTerm { exp: e.clone(), coeff: c.to_json() }).collect(),
        g_bar: gbar.terms().iter().map(|(e, c)| FqTerm { exp: e.clone(), coeff: c.code() }).collect(),
        g_bar_text: gbar.to_string(),
        leading_exponent: gbar.leading().map(|(e, _)| e.to_vec()).unwrap_or_default(),
        vanishes_on_s: vanishes,
    };
    Ok((step, gbar))
}

fn direction_record(ctx: &Ctx, e: &PointSet, g: &MultiPoly<ExtElem>, claim: Claim) -> Result<DirectionRecord> {
    let space = ctx.space;
    let ring = space.ring();
    let w = space.point(claim.direction);
    if !w.is_primitive() {
        return Err(Error::Domain(format!("claimed direction {} is not primitive", claim.direction)));
    }
    let b = space.point(claim.base);
    let j_w: Vec<u32> = ring
        .elements()
        .filter(|&a| {
            let v: RVector = &b + &w.scale(a);
            e.contains(space.index(&v).expect("same space"))
        })
        .map(|a| a.code())
        .collect();
    let c_w = ctx.image(claim.base);
    let p_w: Vec<_> = w.coords().iter().map(|&a| bracket_poly(a)).collect();
    let h = compose_line(g, &c_w, &p_w)?;
    let h_bar = residue_poly(&h)?;
    let v_x = h_bar.valuation().finite().map(|v| v as u64);
    let qk = ctx.line_size();
    let vanishes_on_j = j_w.iter().all(|&a| {
        let v = h.eval(&ctx.table[a as usize]);
        v.is_zero() && v.horizon() >= 1
    });
    let divisible = v_x.is_none_or(|v| v >= j_w.len() as u64);
    if !vanishes_on_j || !divisible {
        return Err(Error::Precision(format!(
            "h_w for direction {} does not vanish on J_w to the working precision",
            claim.direction
        )));
    }
    Ok(DirectionRecord {
        direction: claim.direction,
        base: claim.base,
        line_ok: ge_scaled(j_w.len() as u64, ctx.eps, qk),
        valuation_ok: v_x.is_none_or(|v| ge_scaled(v, ctx.eps, qk)),
        j_w,
        c_w: c_w.iter().map(|x| x.to_json()).collect(),
        h_w: h.coeffs().iter().map(|x| x.to_json()).collect(),
        h_bar: h_bar.coeffs().iter().map(|c| c.code()).collect(),
        v_x,
        vanishes_on_j,
        divisible,
    })
}

fn line_step(ctx: &Ctx, e: &PointSet, g: &MultiPoly<ExtElem>, claims: &[Claim]) -> Result<(TraceStep, Option<String>)> {
    let records: Vec<DirectionRecord> =
        claims.par_iter().map(|&c| direction_record(ctx, e, g, c)).collect::<Result<_>>()?;
    let failure = records.iter().find_map(|r| {
        if !r.line_ok {
            Some(format!("direction {}: |J_w| = {} < εq^k", r.direction, r.j_w.len()))
        } else if !r.valuation_ok {
            Some(format!("direction {}: v_X(h̄_w) = {:?} < εq^k", r.direction, r.v_x))
        } else {
            None
        }
    });
    let step = TraceStep::LineRestriction {
        threshold: (ctx.eps * Rational::from_integer(ctx.line_size() as i64)).to_string(),
        all_pass: failure.is_none(),
        directions: records,
    };
    Ok((step, failure))
}

fn counting_step(ctx: &Ctx, gbar: &MultiPoly<FqElem>, claims: &[Claim], d: u32) -> Result<(TraceStep, Verdict)> {
    let space = ctx.space;
    let (q, k, n) = (space.q() as i64, space.k(), space.n());
    let theta = ctx.eps / Rational::from_integer(n as i64);
    let field = space.ring().field();
    let lifted = gbar.map(XPoly::zero(field.zero()), |c| XPoly::constant(*c));
    let (sz, sz_error) = match sz_verify(&lifted, theta, k) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::Precondition(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let mut dirs: Vec<u64> = claims.iter().map(|c| c.direction).collect();
    dirs.sort_unstable();
    dirs.dedup();
    let omega = dirs.len() as u64;
    let nu_qkn = ctx.nu * Rational::from_integer(q.pow(k * n as u32));
    let chain_bound = Rational::from_integer(d as i64 * k as i64 * q.pow(k * (n as u32 - 1) + 1) * n as i64) / ctx.eps;
    let omega_r = Rational::from_integer(omega as i64);
    let nu_le_omega = nu_qkn <= omega_r;
    let omega_lt_chain_bound = omega_r < chain_bound;
    let chain_bound_le_nu = chain_bound <= nu_qkn;
    let verdict = if let Some(r) = sz.as_ref().filter(|r| !r.pass) {
        Verdict::FailedAt { step: 5, reason: format!("LEMMA VIOLATION: count {} >= bound {}", r.count, r.bound) }
    } else if sz.as_ref().is_some_and(|r| omega > r.count) {
        Verdict::FailedAt { step: 5, reason: "consistency: |Ω| exceeds the lemma's count".into() }
    } else if let Some(err) = &sz_error {
        Verdict::FailedAt { step: 5, reason: format!("counting lemma not applicable: {err}") }
    } else if !nu_le_omega {
        Verdict::FailedAt { step: 5, reason: format!("νq^(kn) = {nu_qkn} > |Ω| = {omega}") }
    } else if !omega_lt_chain_bound {
        Verdict::FailedAt { step: 5, reason: format!("|Ω| = {omega} >= dkq^(k(n-1)+1)n/ε = {chain_bound}") }
    } else if !chain_bound_le_nu {
        Verdict::FailedAt { step: 5, reason: format!("dkq^(k(n-1)+1)n/ε = {chain_bound} > νq^(kn) = {nu_qkn}") }
    } else {
        Verdict::ContradictionDerived
    };
    let step = TraceStep::Counting {
        theta: theta.to_string(),
        omega_le_count: sz.as_ref().map(|r| omega <= r.count),
        sz,
        sz_error,
        omega,
        nu_qkn: nu_qkn.to_string(),
        chain_bound: chain_bound.to_string(),
        nu_le_omega,
        omega_lt_chain_bound,
        chain_bound_le_nu,
    };
    Ok((step, verdict))
}

fn default_claims(e: &PointSet, eps: Rational) -> Vec<Claim> {
    let prof = profile(e);
    let line = prof.line_size();
    prof.directions
        .iter()
        .zip(&prof.max_hits)
        .zip(&prof.best_base)
        .filter(|((_, &h), _)| ge_scaled(h as u64, eps, line))
        .map(|((&direction, _), &base)| Claim { direction, base })
        .collect()
}

/// Steps 4 and 5 after `g` is known; shared by [`proof_trace`] and [`replay`].
fn finish(
    ctx: &Ctx,
    e: &PointSet,
    g: &MultiPoly<ExtElem>,
    gbar: &MultiPoly<FqElem>,
    claims: &[Claim],
    d: u32,
    steps: &mut Vec<TraceStep>,
) -> Result<Verdict> {
    let (step4, failure) = line_step(ctx, e, g, claims).map_err(|e| at_step(4, e))?;
    steps.push(step4);
    if let Some(reason) = failure {
        return Ok(Verdict::FailedAt { step: 4, reason });
    }
    let (step5, verdict) = counting_step(ctx, gbar, claims, d).map_err(|e| at_step(5, e))?;
    steps.push(step5);
    Ok(verdict)
}

fn run(
    e: &PointSet,
    eps: Rational,
    nu: Rational,
    claims: &[Claim],
    force: bool,
    precision: usize,
) -> Result<ProofTrace> {
    let space = e.space();
    let points: Vec<u64> = e.indices().collect();
    let mut trace = ProofTrace {
        q: space.q(),
        k: space.k(),
        n: space.n(),
        epsilon: eps.to_string(),
        nu: nu.to_string(),
        precision,
        retried: false,
        points: points.clone(),
        claims: claims.to_vec(),
        steps: Vec::new(),
        verdict: Verdict::TerminatedAtSizeTest,
    };
    let (step1, proceed) = size_step(e, eps, nu, force);
    let TraceStep::SizeTest { degree, .. } = step1 else { unreachable!() };
    trace.steps.push(step1);
    if !proceed {
        return Ok(trace);
    }
    let ctx = Ctx::new(space, eps, nu, precision).map_err(|e| at_step(2, e))?;
    let (step2, s) = torsion_step(&ctx, &points);
    trace.steps.push(step2);
    let g = vanishing_polynomial(&s, space.n(), degree, &ctx.ext.one()).map_err(|e| at_step(3, e))?;
    let (step3, gbar) = vanishing_step(&ctx, &s, &g, degree).map_err(|e| at_step(3, e))?;
    trace.steps.push(step3);
    trace.verdict = finish(&ctx, e, &g, &gbar, claims, degree, &mut trace.steps)?;
    Ok(trace)
}

/// Runs the covering argument on `E`; see the module documentation.
///
/// A precision error triggers one rerun at `N' = 2N + 2`; a second one is
/// returned with the step at which it occurred.
pub fn proof_trace(e: &PointSet, eps: Rational, nu: Rational, opts: &TraceOptions) -> Result<ProofTrace> {
    check_unit_interval("ε", eps)?;
    check_unit_interval("ν", nu)?;
    let space = e.space();
    let claims = match &opts.claims {
        Some(c) => c.clone(),
        None => default_claims(e, eps),
    };
    for c in &claims {
        if c.direction >= space.size() || c.base >= space.size() {
            return Err(Error::Domain(format!("claim {c:?} is outside R^n")));
        }
    }
    let n0 = opts.precision.unwrap_or(space.k() as usize + 2);
    match run(e, eps, nu, &claims, opts.force, n0) {
        Err(Error::Precision(_)) => {
            let mut t = run(e, eps, nu, &claims, opts.force, 2 * n0 + 2)?;
            t.retried = true;
            Ok(t)
        }
        other => other,
    }
}

/// Re-checks a stored trace from its recorded objects: every step is
/// recomputed from `Ẽ`, the claims and the recorded `g` (which is verified
/// to vanish on `S` rather than solved for again).
pub fn replay(trace: &ProofTrace) -> Result<ReplayReport> {
    let parse = |s: &str, what: &str| -> Result<Rational> {
        s.parse().map_err(|_| Error::Parse(format!("{what} = {s:?} is not a rational")))
    };
    let eps = parse(&trace.epsilon, "epsilon")?;
    let nu = parse(&trace.nu, "nu")?;
    check_unit_interval("ε", eps)?;
    check_unit_interval("ν", nu)?;
    let space = RSpace::new(trace.q, trace.k, trace.n)?;
    let e = PointSet::from_indices(space, trace.points.iter().copied())?;
    let mut mismatches = Vec::new();
    let mut steps = Vec::new();
    let mut verdict = Verdict::TerminatedAtSizeTest;

    let forced = matches!(trace.step(1), Some(TraceStep::SizeTest { forced: true, .. }));
    let (step1, proceed) = size_step(&e, eps, nu, forced);
    let TraceStep::SizeTest { degree, .. } = step1 else { unreachable!() };
    steps.push(step1);
    if proceed {
        let ctx = Ctx::new(space, eps, nu, trace.precision)?;
        let (step2, s) = torsion_step(&ctx, &trace.points);
        steps.push(step2);
        match trace.step(3) {
            Some(TraceStep::VanishingPolynomial { g, .. }) => {
                let terms =
                    g.iter().map(|t| Ok((t.exp.clone(), ctx.ext.from_json(&t.coeff)?))).collect::<Result<Vec<_>>>()?;
                let g = MultiPoly::from_terms(space.n(), ctx.ext.zero(), terms)?;
                if g.total_degree().is_some_and(|t| t > degree) {
                    mismatches.push(format!("g has degree {:?} above the bound {degree}", g.total_degree()));
                }
                let (step3, gbar) = vanishing_step(&ctx, &s, &g, degree)?;
                if let TraceStep::VanishingPolynomial { vanishes_on_s: false, .. } = step3 {
                    mismatches.push("recorded g does not vanish on S".into());
                }
                steps.push(step3);
                verdict = finish(&ctx, &e, &g, &gbar, &trace.claims, degree, &mut steps)?;
            }
            _ => mismatches.push("trace proceeds past step 1 but records no vanishing polynomial".into()),
        }
    }
    for s in &steps {
        match trace.step(s.number()) {
            Some(rec) if rec == s => {}
            Some(_) => mismatches.push(format!("step {} differs from its recomputation", s.number())),
            None => mismatches.push(format!("step {} is missing from the trace", s.number())),
        }
    }
    if trace.steps.len() != steps.len() {
        mismatches.push(format!("trace records {} steps, recomputation gives {}", trace.steps.len(), steps.len()));
    }
    if verdict != trace.verdict {
        mismatches.push(format!("verdict {:?} differs from recomputed {:?}", trace.verdict, verdict));
    }
    Ok(ReplayReport { ok: mismatches.is_empty(), mismatches })
}

/// A random `E` of the given size together with the strongest claim it can
/// make: every primitive direction, each with its best line.
pub fn adversarial_instance(space: RSpace, size: usize, seed: u64) -> Result<(PointSet, Vec<Claim>)> {
    if size as u64 > space.size() {
        return Err(Error::Domain(format!("{size} points requested in a space of {}", space.size())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<u64> = (0..space.size()).collect();
    all.shuffle(&mut rng);
    let e = PointSet::from_indices(space, all[..size].iter().copied())?;
    let prof = profile(&e);
    let claims =
        prof.directions.iter().zip(&prof.best_base).map(|(&direction, &base)| Claim { direction, base }).collect();
    Ok((e, claims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kakeya::greedy_small_kakeya;

    fn space(q: u32, k: u32, n: usize) -> RSpace {
        RSpace::new(q, k, n).unwrap()
    }

    #[test]
    fn full_space_stops_at_size_test() {
        let e = PointSet::full(space(2, 2, 2)).unwrap();
        let one = Rational::from_integer(1);
        let t = proof_trace(&e, one, one, &TraceOptions::default()).unwrap();
        assert_eq!(t.verdict, Verdict::TerminatedAtSizeTest);
        let Some(TraceStep::SizeTest { size, bound, hypothesis_holds, .. }) = t.step(1) else { panic!() };
        assert_eq!((*size, *bound, *hypothesis_holds), (16, 1, false));
        assert_eq!(t.steps.len(), 1);
    }

    #[test]
    fn single_line_passes_line_step() {
        let sp = space(2, 2, 2);
        let ring = sp.ring();
        let w = RVector::new(vec![ring.one(), ring.zero()]);
        let line: Vec<RVector> = ring.elements().map(|a| w.scale(a)).collect();
        let e = PointSet::from_points(sp, &line).unwrap();
        let claims = vec![Claim { direction: sp.index(&w).unwrap(), base: 0 }];
        let opts = TraceOptions { force: true, claims: Some(claims), ..Default::default() };
        let nu = Rational::new(1, 16);
        let t = proof_trace(&e, Rational::from_integer(1), nu, &opts).unwrap();
        let Some(TraceStep::LineRestriction { directions, all_pass, .. }) = t.step(4) else { panic!("{t:?}") };
        assert!(all_pass);
        assert_eq!(directions[0].j_w.len(), 4);
        assert!(directions[0].v_x.is_none_or(|v| v >= 4));
        assert_eq!(t.terminated_at(), Some(5));
        assert!(!t.lemma_violation());
        assert!(replay(&t).unwrap().ok);
    }

    #[test]
    fn greedy_instances_stop_at_step_one() {
        let sp = space(2, 2, 2);
        for seed in 0..5 {
            let e = greedy_small_kakeya(sp, seed).unwrap();
            let prof = profile(&e);
            let eps = Rational::from_integer(1);
            let nu = prof.nu_at(eps);
            let t = proof_trace(&e, eps, nu, &TraceOptions::default()).unwrap();
            assert_eq!(t.verdict, Verdict::TerminatedAtSizeTest);
        }
    }

    #[test]
    fn adversarial_runs_fail_at_an_identified_step() {
        let sp = space(2, 2, 2);
        for seed in 0..6 {
            let (e, claims) = adversarial_instance(sp, 2 + seed as usize % 4, seed).unwrap();
            let nu = Rational::new(claims.len() as i64, 16);
            for eps in [Rational::new(1, 4), Rational::new(1, 2), Rational::from_integer(1)] {
                let opts = TraceOptions { force: true, claims: Some(claims.clone()), ..Default::default() };
                let t = proof_trace(&e, eps, nu, &opts).unwrap();
                let step = t.terminated_at().expect("never completes");
                assert!(step == 4 || step == 5, "{:?}", t.verdict);
                assert!(!t.lemma_violation());
                assert!(replay(&t).unwrap().ok);
            }
        }
    }

    #[test]
    fn tampered_traces_are_caught() {
        let sp = space(2, 2, 2);
        let (e, claims) = adversarial_instance(sp, 3, 11).unwrap();
        let opts = TraceOptions { force: true, claims: Some(claims.clone()), ..Default::default() };
        let t = proof_trace(&e, Rational::new(1, 2), Rational::new(claims.len() as i64, 16), &opts).unwrap();
        let mut bad = t.clone();
        bad.verdict = Verdict::ContradictionDerived;
        assert!(!replay(&bad).unwrap().ok);
        let mut bad = t.clone();
        if let Some(TraceStep::LineRestriction { directions, .. }) = bad.steps.iter_mut().find(|s| s.number() == 4) {
            directions[0].v_x = Some(99);
        }
        assert!(!replay(&bad).unwrap().ok);
    }

    #[test]
    fn json_round_trip() {
        let sp = space(2, 1, 2);
        let (e, claims) = adversarial_instance(sp, 2, 3).unwrap();
        let opts = TraceOptions { force: true, claims: Some(claims), ..Default::default() };
        let t = proof_trace(&e, Rational::new(1, 2), Rational::new(1, 4), &opts).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: ProofTrace = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(replay(&back).unwrap().ok);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let e = PointSet::full(space(2, 1, 2)).unwrap();
        assert!(
            proof_trace(&e, Rational::from_integer(0), Rational::from_integer(1), &TraceOptions::default()).is_err()
        );
        assert!(proof_trace(&e, Rational::from_integer(1), Rational::new(3, 2), &TraceOptions::default()).is_err());
    }
}
