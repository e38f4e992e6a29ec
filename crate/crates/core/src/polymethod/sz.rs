//! The discrete-valuation Schwartz–Zippel count over `C = {s_a : a ∈ A_k}`.
//!
//! For `f ∈ B[z_1..z_n]`, `B = F_q[X]`, with lex-leading term `c_α z^α` and
//! every `α_j < q^k`, the number of `y ∈ C^n` with
//! `v_X(f(y)) >= v_X(c_α) + θ n q^k` is below `max{q^{nk}, |α| k q^{k(n-1)+1} / θ}`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multipoly::MultiPoly;
use crate::error::{Error, Result};
use crate::galois::Fq;
use crate::laurent::ResidueRing;
use crate::lubin_tate::s_map;
use crate::poly::XPoly;
use crate::Rational;

/// Outcome of checking the lemma on one polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SzReport {
    pub q: u32,
    pub k: u32,
    pub n: usize,
    pub theta: String,
    pub alpha: Vec<u32>,
    /// `v_X(c_α) + ⌈θ n q^k⌉`; a point is counted when `v_X(f(y))` reaches it.
    pub threshold: u64,
    pub count: u64,
    pub bound: String,
    pub pass: bool,
}

/// Aggregate over many polynomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SzSweep {
    pub cases: u64,
    pub failures: u64,
    /// Largest `count / bound` seen, as a decimal string.
    pub max_ratio: String,
    /// Reports for the failing cases (empty when the lemma held throughout).
    pub violations: Vec<SzReport>,
}

fn coeff_field(f: &MultiPoly<XPoly>) -> Fq {
    f.zero_coeff().zero_coeff().field()
}

fn check_theta(theta: Rational) -> Result<()> {
    if theta <= Rational::from_integer(0) || theta > Rational::from_integer(1) {
        return Err(Error::Precondition(format!("θ = {theta} is outside (0, 1]")));
    }
    Ok(())
}

fn leading_checked(f: &MultiPoly<XPoly>, k: u32) -> Result<(Vec<u32>, u64)> {
    let (alpha, c) = f.leading().ok_or_else(|| Error::Precondition("f must be nonzero".into()))?;
    let qk = (coeff_field(f).q() as u64).pow(k);
    if let Some(a) = alpha.iter().find(|&&a| a as u64 >= qk) {
        return Err(Error::Precondition(format!("leading exponent {a} in α = {alpha:?} is not below q^k = {qk}")));
    }
    let v = c.valuation().finite().expect("stored coefficients are nonzero") as u64;
    Ok((alpha.to_vec(), v))
}

/// `v_X(c_α) + ⌈θ n q^k⌉`.
pub fn sz_threshold(f: &MultiPoly<XPoly>, theta: Rational, k: u32) -> Result<u64> {
    check_theta(theta)?;
    let (_, v) = leading_checked(f, k)?;
    let qk = (coeff_field(f).q() as i128).pow(k);
    let num = *theta.numer() as i128 * f.n() as i128 * qk;
    let den = *theta.denom() as i128;
    Ok(v + ((num + den - 1) / den) as u64)
}

/// `max{q^{nk}, |α| k q^{k(n-1)+1} / θ}`.
pub fn sz_bound(alpha: &[u32], theta: Rational, k: u32, n: usize, q: u32) -> Result<Rational> {
    check_theta(theta)?;
    let overflow = || Error::Budget("sz_bound overflows 64-bit rationals".into());
    let q = q as i64;
    let full = q.checked_pow(k * n as u32).ok_or_else(overflow)?;
    let size: i64 = alpha.iter().map(|&a| a as i64).sum();
    let exp = k * (n as u32).saturating_sub(1) + 1;
    let second = q
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(size))
        .and_then(|p| p.checked_mul(k as i64))
        .ok_or_else(overflow)?;
    let second = Rational::from_integer(second) / theta;
    Ok(second.max(Rational::from_integer(full)))
}

fn dense(p: &XPoly, len: usize) -> Vec<u16> {
    let mut out = vec![0u16; len];
    for (i, c) in p.coeffs().iter().enumerate().take(len) {
        out[i] = c.code() as u16;
    }
    out
}

fn mul_trunc(f: Fq, a: &[u16], b: &[u16], out: &mut [u16]) {
    out.iter_mut().for_each(|x| *x = 0);
    let len = out.len();
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            if bj != 0 {
                out[i + j] = f.add_codes(out[i + j], f.mul_codes(ai, bj));
            }
        }
    }
}

/// Number of `y ∈ C^n` with `v_X(f(y)) >= v_X(c_α) + θ n q^k`, by exhaustive
/// evaluation.
///
/// Terms are grouped by the exponents of `z_1..z_{n-1}`. For each prefix
/// `(y_1..y_{n-1})` the prefix monomials are formed once, and for each `y_n`
/// the coefficients of `f(y)` are produced in increasing `X`-degree, stopping
/// at the first nonzero one. Arithmetic is modulo `X^threshold`.
pub fn sz_count(f: &MultiPoly<XPoly>, theta: Rational, k: u32) -> Result<u64> {
    let t = sz_threshold(f, theta, k)? as usize;
    let field = coeff_field(f);
    let ring = ResidueRing::new(field.q(), k)?;
    let n = f.n();
    let qk = ring.size() as usize;
    let total = (qk as u64)
        .checked_pow(n as u32)
        .filter(|&s| s <= 1 << 24)
        .ok_or_else(|| Error::Budget(format!("|C^n| = {qk}^{n} is too large to enumerate")))?;
    if n == 0 {
        let c = f.coeff(&[]);
        return Ok(u64::from(c.valuation().finite().is_none_or(|v| v as usize >= t)));
    }

    let max_deg = (0..n).map(|i| f.degree_in(i)).max().unwrap_or(0) as usize;
    // pow[a][e] = s_a^e mod X^t
    let pow: Vec<Vec<Vec<u16>>> = ring
        .elements()
        .map(|a| {
            let s = dense(&s_map(a), t);
            let mut row = vec![dense(&XPoly::constant(field.one()), t)];
            let mut buf = vec![0u16; t];
            for _ in 0..max_deg {
                mul_trunc(field, row.last().unwrap(), &s, &mut buf);
                row.push(buf.clone());
            }
            row
        })
        .collect();

    // group[β] = (β, G_β[a]) with G_β(z_n) = sum_e c_{β,e} z_n^e evaluated at s_a
    let mut groups: Vec<(Vec<u32>, Vec<Vec<u16>>)> = Vec::new();
    for (exp, c) in f.terms() {
        let beta = exp[..n - 1].to_vec();
        let e = exp[n - 1] as usize;
        if groups.last().is_none_or(|g| g.0 != beta) {
            groups.push((beta, vec![vec![0u16; t]; qk]));
        }
        let cd = dense(c, t);
        let g = &mut groups.last_mut().unwrap().1;
        let mut buf = vec![0u16; t];
        for (a, slot) in g.iter_mut().enumerate() {
            mul_trunc(field, &cd, &pow[a][e], &mut buf);
            for (x, &y) in slot.iter_mut().zip(&buf) {
                *x = field.add_codes(*x, y);
            }
        }
    }

    let prefixes = total / qk as u64;
    let count = (0..prefixes)
        .into_par_iter()
        .map(|p| {
            let mut digits = Vec::with_capacity(n - 1);
            let mut rest = p as usize;
            for _ in 0..n - 1 {
                digits.push(rest % qk);
                rest /= qk;
            }
            // sparse prefix monomials M_β = prod_i s_{y_i}^{β_i}
            let mut buf = vec![0u16; t];
            let monos: Vec<Vec<(usize, u16)>> = groups
                .iter()
                .map(|(beta, _)| {
                    let mut m = dense(&XPoly::constant(field.one()), t);
                    for (i, &b) in beta.iter().enumerate() {
                        if b > 0 {
                            mul_trunc(field, &m, &pow[digits[i]][b as usize], &mut buf);
                            std::mem::swap(&mut m, &mut buf);
                        }
                    }
                    m.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect()
                })
                .collect();
            let mut hits = 0u64;
            for a in 0..qk {
                let vanishes = (0..t).all(|deg| {
                    let mut acc = 0u16;
                    for ((_, g), m) in groups.iter().zip(&monos) {
                        let ga = &g[a];
                        for &(i, c) in m {
                            if i > deg {
                                break;
                            }
                            let y = ga[deg - i];
                            if y != 0 {
                                acc = field.add_codes(acc, field.mul_codes(c, y));
                            }
                        }
                    }
                    acc == 0
                });
                hits += u64::from(vanishes);
            }
            hits
        })
        .sum();
    Ok(count)
}

/// Counts and compares with [`sz_bound`]; `pass` is `count < bound`.
pub fn sz_verify(f: &MultiPoly<XPoly>, theta: Rational, k: u32) -> Result<SzReport> {
    let q = coeff_field(f).q();
    let (alpha, _) = leading_checked(f, k)?;
    let threshold = sz_threshold(f, theta, k)?;
    let count = sz_count(f, theta, k)?;
    let bound = sz_bound(&alpha, theta, k, f.n(), q)?;
    Ok(SzReport {
        q,
        k,
        n: f.n(),
        theta: theta.to_string(),
        alpha,
        threshold,
        count,
        bound: bound.to_string(),
        pass: Rational::from_integer(count as i64) < bound,
    })
}

fn ratio(r: &SzReport) -> f64 {
    let b: Rational = r.bound.parse().expect("bound is a rendered rational");
    r.count as f64 / (*b.numer() as f64 / *b.denom() as f64)
}

fn fold(reports: Vec<SzReport>) -> SzSweep {
    let max = reports.iter().map(ratio).fold(0.0f64, f64::max);
    let violations: Vec<SzReport> = reports.into_iter().filter(|r| !r.pass).collect();
    SzSweep { cases: 0, failures: violations.len() as u64, max_ratio: format!("{max:.6}"), violations }
}

/// Every nonzero `f ∈ B[z]` with `deg_z f <= max_deg` and coefficients of
/// `X`-degree `<= max_xdeg`, for each `θ` in `thetas`.
pub fn sz_sweep_univariate(q: u32, k: u32, max_deg: u32, max_xdeg: u32, thetas: &[Rational]) -> Result<SzSweep> {
    let field = Fq::new(q)?;
    let qk = (q as u64).pow(k);
    if max_deg as u64 >= qk {
        return Err(Error::Precondition(format!("deg_z f <= {max_deg} allows exponents >= q^k = {qk}")));
    }
    let per_coeff = (q as u64).pow(max_xdeg + 1);
    let total = per_coeff
        .checked_pow(max_deg + 1)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| Error::Budget("univariate sweep is too large".into()))?;
    let coeff_of = |mut code: u64| -> XPoly {
        let digits: Vec<u32> = (0..=max_xdeg)
            .map(|_| {
                let d = (code % q as u64) as u32;
                code /= q as u64;
                d
            })
            .collect();
        XPoly::from_codes(field, &digits)
    };
    let zero = XPoly::zero(field.zero());
    let reports: Vec<SzReport> = (1..total)
        .into_par_iter()
        .flat_map_iter(|mut code| {
            let terms: Vec<(Vec<u32>, XPoly)> = (0..=max_deg)
                .map(|e| {
                    let c = coeff_of(code % per_coeff);
                    code /= per_coeff;
                    (vec![e], c)
                })
                .collect();
            let f = MultiPoly::from_terms(1, zero.clone(), terms).expect("n = 1 exponents");
            thetas.iter().map(move |&th| sz_verify(&f, th, k)).collect::<Vec<_>>()
        })
        .collect::<Result<_>>()?;
    let cases = reports.len() as u64;
    Ok(SzSweep { cases, ..fold(reports) })
}

/// `θ` values used by the randomized checks.
pub const THETA_GRID: [(i64, i64); 6] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

fn random_xpoly(field: Fq, rng: &mut impl Rng, max_deg: usize) -> XPoly {
    loop {
        let shift = rng.gen_range(0..=2);
        let mut codes = vec![0u32; shift];
        codes.extend((0..=max_deg).map(|_| rng.gen_range(0..field.q())));
        let p = XPoly::from_codes(field, &codes);
        if !p.is_zero() {
            return p;
        }
    }
}

/// A random nonzero `f ∈ B[z_1..z_n]` respecting `α_j < q^k`.
///
/// Half the draws are sparse sums of random terms; the other half are a
/// random coefficient times a product of factors `z_i - s_a`, which vanish
/// on whole slices of `C^n` and so push the count towards the bound.
pub fn random_sz_poly(q: u32, k: u32, n: usize, rng: &mut impl Rng) -> Result<MultiPoly<XPoly>> {
    let field = Fq::new(q)?;
    let ring = ResidueRing::new(q, k)?;
    let qk = ring.size();
    let zero = XPoly::zero(field.zero());
    let max_exp = qk.min(4);
    if rng.gen_bool(0.5) {
        let terms = rng.gen_range(1..=4);
        let raw: Vec<(Vec<u32>, XPoly)> = (0..terms)
            .map(|_| ((0..n).map(|_| rng.gen_range(0..max_exp)).collect(), random_xpoly(field, rng, 3)))
            .collect();
        let f = MultiPoly::from_terms(n, zero, raw)?;
        if f.is_zero() {
            return random_sz_poly(q, k, n, rng);
        }
        Ok(f)
    } else {
        let mut f = MultiPoly::constant(n, random_xpoly(field, rng, 2));
        let mut used = vec![0u32; n];
        for _ in 0..rng.gen_range(1..=3) {
            let i = rng.gen_range(0..n);
            if used[i] + 1 >= qk {
                continue;
            }
            used[i] += 1;
            let s = s_map(ring.elem(rng.gen_range(0..qk)));
            let factor = &MultiPoly::var(n, i, &zero) - &MultiPoly::constant(n, s);
            f = &f * &factor;
        }
        Ok(f)
    }
}

/// `count` random polynomials at `(q, k, n)`; `θ` is drawn from [`THETA_GRID`]
/// unless fixed.
pub fn sz_random_batch(q: u32, k: u32, n: usize, count: u64, seed: u64, theta: Option<Rational>) -> Result<SzSweep> {
    let reports: Vec<SzReport> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let f = random_sz_poly(q, k, n, &mut rng)?;
            let (a, b) = THETA_GRID[rng.gen_range(0..THETA_GRID.len())];
            sz_verify(&f, theta.unwrap_or(Rational::new(a, b)), k)
        })
        .collect::<Result<_>>()?;
    Ok(SzSweep { cases: count, ..fold(reports) })
}
