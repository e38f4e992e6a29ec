//! The discrete Kakeya maximal function
//! `φ*(w) = max_{ℓ ∥ w} q^{-k} Σ_{v∈ℓ} |φ(v)|` on `R^n`, its distribution
//! function, the dyadic decomposition and the random rotation trick.
//!
//! `ℓ^n` norms are never rooted: every comparison against `‖φ‖` is made
//! between `n`-th powers, so exact scalar types give exact answers.

use std::collections::HashMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kakeya::{PointSet, RMatrix};
use crate::laurent::{RSpace, DEFAULT_POINT_BUDGET};
use crate::scalar::Scalar;
use crate::Rational;

/// A real-valued function on `R^n`, stored densely by point index.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<S> {
    space: RSpace,
    values: Vec<S>,
    norm_n: S,
}

fn pow_n<S: Scalar>(x: &S, n: usize) -> S {
    x.abs().pow_u32(n as u32)
}

fn qpow<S: Scalar>(q: u32, e: u32) -> S {
    S::from_u64(q as u64).expect("small base").pow_u32(e)
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(space: RSpace, values: Vec<S>) -> Result<Self> {
        space.check_budget(DEFAULT_POINT_BUDGET)?;
        if values.len() as u64 != space.size() {
            return Err(Error::Domain(format!("{} values for |R^n| = {}", values.len(), space.size())));
        }
        let norm_n = values.iter().fold(S::zero(), |acc, v| acc + pow_n(v, space.n()));
        Ok(GridFunction { space, values, norm_n })
    }

    pub fn zero(space: RSpace) -> Result<Self> {
        GridFunction::new(space, vec![S::zero(); space.size() as usize])
    }

    pub fn constant(space: RSpace, c: S) -> Result<Self> {
        GridFunction::new(space, vec![c; space.size() as usize])
    }

    pub fn indicator(set: &PointSet) -> Result<Self> {
        let space = set.space();
        GridFunction::new(
            space,
            (0..space.size()).map(|i| if set.contains(i) { S::one() } else { S::zero() }).collect(),
        )
    }

    pub fn from_fn(space: RSpace, f: impl Fn(u64) -> S) -> Result<Self> {
        GridFunction::new(space, (0..space.size()).map(f).collect())
    }

    pub fn space(&self) -> RSpace {
        self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, i: u64) -> &S {
        &self.values[i as usize]
    }

    /// `‖φ‖_{ℓ^n}^n = Σ_v |φ(v)|^n`.
    pub fn norm_n_pow(&self) -> &S {
        &self.norm_n
    }

    /// `Σ_v |φ(v)|`.
    pub fn l1(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, v| acc + v.abs())
    }

    /// `‖φ‖_{ℓ^n}` in floating point, for display only.
    pub fn norm_f64(&self) -> f64 {
        self.norm_n.to_f64().unwrap_or(f64::NAN).powf(1.0 / self.space.n() as f64)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn scale(&self, c: &S) -> Self {
        GridFunction::new(self.space, self.values.iter().map(|v| v.clone() * c.clone()).collect()).expect("same space")
    }

    pub fn add(&self, other: &Self) -> Self {
        GridFunction::new(
            self.space,
            self.values.iter().zip(&other.values).map(|(a, b)| a.clone() + b.clone()).collect(),
        )
        .expect("same space")
    }

    /// `v -> φ(Mv)`.
    pub fn compose(&self, m: &RMatrix) -> Self {
        GridFunction::from_fn(self.space, |i| self.values[m.apply_idx(self.space, i) as usize].clone())
            .expect("same space")
    }
}

/// `φ*` on `S^{n-1}(R)`, directions in increasing index order.
#[derive(Clone, Debug, PartialEq)]
pub struct StarFunction<S> {
    space: RSpace,
    directions: Vec<u64>,
    values: Vec<S>,
}

impl<S: Scalar> StarFunction<S> {
    pub fn directions(&self) -> &[u64] {
        &self.directions
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn at(&self, dir: u64) -> Option<&S> {
        self.directions.binary_search(&dir).ok().map(|i| &self.values[i])
    }

    pub fn min(&self) -> S {
        self.values.iter().cloned().fold(self.values[0].clone(), |a, b| if b < a { b } else { a })
    }

    pub fn max(&self) -> S {
        self.values.iter().cloned().fold(self.values[0].clone(), S::max_of)
    }

    /// `Σ_w φ*(w)^n`.
    pub fn norm_n_pow(&self) -> S {
        self.values.iter().fold(S::zero(), |acc, v| acc + pow_n(v, self.space.n()))
    }

    /// `|{w : φ*(w) >= λ}|`.
    pub fn distribution(&self, lambda: &S) -> u64 {
        self.values.iter().filter(|v| *v >= lambda).count() as u64
    }

    /// `|{w : φ*(w) >= c·‖φ‖}|` given `c^n` and `‖φ‖^n`, decided on `n`-th powers.
    pub fn distribution_rel(&self, c_pow_n: &S, norm_n: &S) -> u64 {
        let threshold = c_pow_n.clone() * norm_n.clone();
        let n = self.space.n();
        self.values.iter().filter(|v| pow_n(*v, n) >= threshold).count() as u64
    }
}

/// `φ*`, computed exactly over all `q^{k(n-1)}` parallel lines per direction.
pub fn phi_star<S: Scalar>(phi: &GridFunction<S>) -> StarFunction<S> {
    let space = phi.space;
    let ring = space.ring();
    let directions = space.primitive_indices();
    let support: Vec<(Vec<u32>, S)> = (0..space.size())
        .filter(|&i| !phi.values[i as usize].is_zero())
        .map(|i| (space.codes(i), phi.values[i as usize].abs()))
        .collect();
    let line_len: S = qpow(space.q(), space.k());
    let values = directions
        .par_iter()
        .map(|&w| {
            let wc = space.codes(w);
            let pivot = wc.iter().position(|&c| ring.is_unit_code(c)).expect("primitive");
            let pinv = ring.inv_code(wc[pivot]).expect("unit");
            let mut sums: HashMap<u64, S> = HashMap::new();
            let mut buf = vec![0u32; space.n()];
            for (v, x) in &support {
                let s = ring.mul_codes(v[pivot], pinv);
                for i in 0..v.len() {
                    buf[i] = ring.sub_codes(v[i], ring.mul_codes(s, wc[i]));
                }
                let e = sums.entry(space.encode(&buf)).or_insert_with(S::zero);
                *e = e.clone() + x.clone();
            }
            sums.into_values().fold(S::zero(), S::max_of) / line_len.clone()
        })
        .collect();
    StarFunction { space, directions, values }
}

/// `distribution(φ*, λ)`.
pub fn distribution<S: Scalar>(star: &StarFunction<S>, lambda: &S) -> Result<u64> {
    if !lambda.is_positive() {
        return Err(Error::Domain("λ must be positive".into()));
    }
    Ok(star.distribution(lambda))
}

/// Checks `min_w φ*(w) >= q^{-k(2-1/n)} ‖φ‖` via
/// `(min φ*)^n >= q^{-k(2n-1)} ‖φ‖^n`.
pub fn lower_bound_holds<S: Scalar>(phi: &GridFunction<S>, star: &StarFunction<S>) -> bool {
    let space = phi.space;
    let n = space.n() as u32;
    let lhs = pow_n(&star.min(), space.n()) * qpow(space.q(), space.k() * (2 * n - 1));
    lhs >= *phi.norm_n_pow()
}

/// The truncation `φ_D` and the level sets `E_j`, `0 <= j < 2k`.
#[derive(Clone, Debug)]
pub struct Dyadic<S> {
    phi: GridFunction<S>,
    phi_d: GridFunction<S>,
    /// Level of each point of `D`, `None` off `D`.
    levels: Vec<Option<u32>>,
}

/// Splits a nonnegative `φ` into `φ_D = φ·1_D` with
/// `D = {φ >= 2q^{-2k}‖φ‖}` and the levels
/// `E_j = {q^{-j-1}‖φ‖ < φ <= q^{-j}‖φ‖}` restricted to `D`.
pub fn dyadic_decompose<S: Scalar>(phi: &GridFunction<S>) -> Result<Dyadic<S>> {
    if !phi.is_nonnegative() {
        return Err(Error::Domain("dyadic decomposition needs φ >= 0".into()));
    }
    if phi.norm_n.is_zero() {
        return Err(Error::Domain("dyadic decomposition of the zero function".into()));
    }
    let space = phi.space;
    let (q, k, n) = (space.q(), space.k(), space.n() as u32);
    let norm = phi.norm_n.clone();
    let two_n: S = S::from_int(2).pow_u32(n);
    let d_threshold_scale: S = qpow(q, 2 * k * n);
    let mut levels = Vec::with_capacity(phi.values.len());
    let mut d_values = Vec::with_capacity(phi.values.len());
    for v in &phi.values {
        let vn = pow_n(v, n as usize);
        // φ(v)^n q^{2kn} >= 2^n ‖φ‖^n
        let in_d = !v.is_zero() && vn.clone() * d_threshold_scale.clone() >= two_n.clone() * norm.clone();
        if !in_d {
            levels.push(None);
            d_values.push(S::zero());
            continue;
        }
        let level = (0..2 * k).find(|&j| {
            let upper = vn.clone() * qpow(q, j * n) <= norm;
            let lower = vn.clone() * qpow(q, (j + 1) * n) > norm;
            upper && lower
        });
        levels.push(Some(level.ok_or_else(|| Error::Consistency("a point of D lies in no level set".into()))?));
        d_values.push(v.clone());
    }
    Ok(Dyadic { phi: phi.clone(), phi_d: GridFunction::new(space, d_values)?, levels })
}

impl<S: Scalar> Dyadic<S> {
    pub fn phi_d(&self) -> &GridFunction<S> {
        &self.phi_d
    }

    pub fn levels(&self) -> &[Option<u32>] {
        &self.levels
    }

    /// Point indices of each `E_j ∩ D`, `j = 0..2k`.
    pub fn level_sets(&self) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new(); 2 * self.phi.space.k() as usize];
        for (i, l) in self.levels.iter().enumerate() {
            if let Some(j) = l {
                out[*j as usize].push(i as u64);
            }
        }
        out
    }

    pub fn nonempty_levels(&self) -> Vec<u32> {
        let mut ls: Vec<u32> = self.levels.iter().flatten().copied().collect();
        ls.sort_unstable();
        ls.dedup();
        ls
    }

    /// `ψ / ‖φ‖`, which takes the values `q^{-j}` on `E_j` and `0` elsewhere.
    pub fn psi_units(&self) -> GridFunction<S> {
        let q = self.phi.space.q();
        GridFunction::new(
            self.phi.space,
            self.levels
                .iter()
                .map(|l| match l {
                    Some(j) => S::inv_pow(q as u64, *j),
                    None => S::zero(),
                })
                .collect(),
        )
        .expect("same space")
    }

    /// `‖φ_D‖^n > r^n ‖φ‖^n`.
    pub fn phi_d_norm_exceeds(&self, r: Rational) -> bool {
        let n = self.phi.space.n() as u32;
        let rn: S = S::from_int(*r.numer()).pow_u32(n) / S::from_int(*r.denom()).pow_u32(n);
        *self.phi_d.norm_n_pow() > rn * self.phi.norm_n.clone()
    }

    /// `ψ(v)/q < φ(v) <= ψ(v)` on `D`, decided on `n`-th powers.
    pub fn sandwich_pointwise(&self) -> bool {
        let (q, n) = (self.phi.space.q(), self.phi.space.n());
        let norm = &self.phi.norm_n;
        self.levels.iter().zip(&self.phi_d.values).all(|(l, v)| match l {
            None => v.is_zero(),
            Some(j) => {
                let vn = pow_n(v, n);
                let psi_n = norm.clone() / qpow(q, *j * n as u32);
                let lower_n = psi_n.clone() / qpow(q, n as u32);
                lower_n < vn && vn <= psi_n
            }
        })
    }

    /// `ψ*(w)/q < φ_D*(w) <= ψ*(w)` at every direction where `ψ* > 0`.
    pub fn sandwich_star(&self) -> bool {
        let (q, n) = (self.phi.space.q(), self.phi.space.n());
        let norm = &self.phi.norm_n;
        let phi_star_d = phi_star(&self.phi_d);
        let psi_star = phi_star(&self.psi_units());
        phi_star_d.values.iter().zip(&psi_star.values).all(|(f, p)| {
            if p.is_zero() {
                return f.is_zero();
            }
            let fn_ = pow_n(f, n);
            let psi_n = pow_n(p, n) * norm.clone();
            let lower_n = psi_n.clone() / qpow(q, n as u32);
            lower_n < fn_ && fn_ <= psi_n
        })
    }
}

/// Default ceiling on rejection-sampling attempts.
pub const ROTATION_ATTEMPTS: u32 = 10_000;

/// A uniformly random element of `GL_n(R)`, by rejection from uniform
/// entries; returns the matrix and the number of draws used.
pub fn random_rotation<G: Rng>(space: RSpace, rng: &mut G, max_attempts: u32) -> Result<(RMatrix, u32)> {
    let ring = space.ring();
    let n = space.n();
    for attempt in 1..=max_attempts {
        let entries = (0..n * n).map(|_| ring.elem(rng.gen_range(0..ring.size()))).collect();
        let m = RMatrix::new(ring, n, entries)?;
        if m.is_invertible() {
            return Ok((m, attempt));
        }
    }
    Err(Error::Budget(format!("no invertible matrix in {max_attempts} draws")))
}

/// `Ω' = ⋃_{i<m} R_i(Ω)` for `m` independent random rotations.
pub fn rotation_cover(space: RSpace, omega: &[u64], m: usize, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..m {
        let (rot, _) = random_rotation(space, &mut rng, ROTATION_ATTEMPTS)?;
        out.extend(omega.iter().map(|&w| rot.apply_idx(space, w)));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// A random nonnegative test function: an indicator of a random set or
/// integer weights in `0..=max_weight`.
pub fn random_phi<S: Scalar, G: Rng>(space: RSpace, rng: &mut G, max_weight: u32) -> Result<GridFunction<S>> {
    let indicator = rng.gen_bool(0.5);
    let density = rng.gen_range(0.05..0.95);
    let vals: Vec<S> = (0..space.size())
        .map(|_| {
            if indicator {
                if rng.gen_bool(density) {
                    S::one()
                } else {
                    S::zero()
                }
            } else {
                S::from_u32(rng.gen_range(0..=max_weight)).expect("small integer")
            }
        })
        .collect();
    let mut phi = GridFunction::new(space, vals)?;
    if phi.norm_n.is_zero() {
        let mut v = phi.values.clone();
        let at = rng.gen_range(0..v.len());
        v[at] = S::one();
        phi = GridFunction::new(space, v)?;
    }
    Ok(phi)
}

/// One row of the distributional experiment at `λ = q^{-j}‖φ‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub q: u32,
    pub k: u32,
    pub n: usize,
    pub trial: usize,
    pub j: u32,
    /// `q^{-j}‖φ‖` in floating point.
    pub lambda: f64,
    /// `|{w : φ*(w) >= λ}|`.
    pub lhs: u64,
    /// `k^{n+1} λ^{-n} ‖φ‖^n = k^{n+1} q^{jn}`.
    pub rhs: u128,
    pub ratio: f64,
    pub seed: u64,
}

/// Per-`k` maxima of the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub q: u32,
    pub k: u32,
    pub n: usize,
    pub trials: usize,
    pub max_distribution_ratio: f64,
    /// `max Σ_w φ*(w)^n / (k^{n+2} Σ_v φ(v)^n)`.
    pub max_norm_ratio: f64,
    pub lower_bound_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateTable {
    pub rows: Vec<EstimateRow>,
    pub summaries: Vec<EstimateSummary>,
}

fn ratio_f64<S: Scalar>(num: &S, den: &S) -> f64 {
    (num.clone() / den.clone()).to_f64().unwrap_or(f64::NAN)
}

/// Runs `trials` random nonnegative `φ` for each `k`, over the grid
/// `λ_j = q^{-j}‖φ‖`, `j = 0..=2k`.
pub fn estimate_constants<S: Scalar>(
    q: u32,
    k_values: &[u32],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<EstimateTable> {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &k in k_values {
        let space = RSpace::new(q, k, n)?;
        space.check_budget(DEFAULT_POINT_BUDGET)?;
        let k_seed = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let per_trial: Vec<(Vec<EstimateRow>, f64, bool)> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(k_seed.wrapping_add(trial as u64));
                let phi: GridFunction<S> = random_phi(space, &mut rng, 20)?;
                let star = phi_star(&phi);
                let norm = phi.norm_n_pow().clone();
                let norm_f = phi.norm_f64();
                let kk = (k as u128).pow(n as u32 + 1);
                let trial_rows = (0..=2 * k)
                    .map(|j| {
                        let c_n: S = S::inv_pow(q as u64, j * n as u32);
                        let lhs = star.distribution_rel(&c_n, &norm);
                        let rhs = kk * (q as u128).pow(j * n as u32);
                        EstimateRow {
                            q,
                            k,
                            n,
                            trial,
                            j,
                            lambda: norm_f / (q as f64).powi(j as i32),
                            lhs,
                            rhs,
                            ratio: lhs as f64 / rhs as f64,
                            seed,
                        }
                    })
                    .collect();
                let kn2: S = S::from_u64(k as u64).expect("small").pow_u32(n as u32 + 2);
                let norm_ratio = ratio_f64(&star.norm_n_pow(), &(kn2 * norm));
                Ok((trial_rows, norm_ratio, lower_bound_holds(&phi, &star)))
            })
            .collect::<Result<_>>()?;
        let mut max_ratio: f64 = 0.0;
        let mut max_norm: f64 = 0.0;
        let mut failures = 0;
        for (trial_rows, norm_ratio, ok) in per_trial {
            for r in &trial_rows {
                max_ratio = max_ratio.max(r.ratio);
            }
            max_norm = max_norm.max(norm_ratio);
            failures += usize::from(!ok);
            rows.extend(trial_rows);
        }
        summaries.push(EstimateSummary {
            q,
            k,
            n,
            trials,
            max_distribution_ratio: max_ratio,
            max_norm_ratio: max_norm,
            lower_bound_failures: failures,
        });
    }
    Ok(EstimateTable { rows, summaries })
}

/// Convenience for the exact instantiation.
pub fn estimate_constants_exact(q: u32, k_values: &[u32], n: usize, trials: usize, seed: u64) -> Result<EstimateTable> {
    estimate_constants::<BigRational>(q, k_values, n, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::RVector;
    use num_bigint::BigInt;
    use num_traits::{ToPrimitive, Zero};
    use proptest::prelude::*;

    type Q = BigRational;

    fn rat(a: i64, b: i64) -> Q {
        Q::new(BigInt::from(a), BigInt::from(b))
    }

    fn sp(q: u32, k: u32, n: usize) -> RSpace {
        RSpace::new(q, k, n).unwrap()
    }

    fn line_indicator() -> (RSpace, GridFunction<Q>) {
        let s = sp(2, 1, 2);
        let r = s.ring();
        let pts = vec![RVector::new(vec![r.zero(), r.zero()]), RVector::new(vec![r.one(), r.zero()])];
        let set = PointSet::from_points(s, &pts).unwrap();
        (s, GridFunction::indicator(&set).unwrap())
    }

    #[test]
    fn line_indicator_values() {
        let (s, phi) = line_indicator();
        let star = phi_star(&phi);
        let r = s.ring();
        let idx = |a: i64, b: i64| s.index(&RVector::new(vec![r.from_ints(&[a]), r.from_ints(&[b])])).unwrap();
        assert_eq!(star.at(idx(1, 0)), Some(&rat(1, 1)));
        assert_eq!(star.at(idx(0, 1)), Some(&rat(1, 2)));
        assert_eq!(star.at(idx(1, 1)), Some(&rat(1, 2)));
        assert_eq!(distribution(&star, &rat(1, 1)).unwrap(), 1);
        assert_eq!(distribution(&star, &rat(1, 2)).unwrap(), 3);
        assert_eq!(distribution(&star, &rat(2, 1)).unwrap(), 0);
        assert!(distribution(&star, &rat(0, 1)).is_err());
    }

    #[test]
    fn trivial_functions() {
        let s = sp(3, 2, 2);
        let one: GridFunction<Q> = GridFunction::constant(s, rat(1, 1)).unwrap();
        assert!(phi_star(&one).values().iter().all(|v| *v == rat(1, 1)));
        let zero: GridFunction<Q> = GridFunction::zero(s).unwrap();
        assert!(phi_star(&zero).values().iter().all(|v| v.is_zero()));
        assert!(dyadic_decompose(&zero).is_err());
        // E = R^n: every direction attains λ = 1 and the ratio is at most 1
        let star = phi_star(&one);
        let count = star.distribution(&rat(1, 1));
        assert_eq!(count, s.primitive_count());
        assert!(count <= s.size());
    }

    #[test]
    fn constant_function_sits_in_level_k() {
        // ‖c·1‖ = c q^{k} when n = 2, so c = q^{-k}‖φ‖
        for k in 1..=3 {
            let s = sp(2, k, 2);
            let phi: GridFunction<Q> = GridFunction::constant(s, rat(3, 1)).unwrap();
            let d = dyadic_decompose(&phi).unwrap();
            assert_eq!(d.nonempty_levels(), vec![k]);
            assert!(d.sandwich_pointwise());
        }
    }

    #[test]
    fn two_valued_function_fills_adjacent_levels() {
        let s = sp(2, 2, 2);
        let phi: GridFunction<Q> =
            GridFunction::from_fn(s, |i| if i % 2 == 0 { rat(2, 1) } else { rat(1, 1) }).unwrap();
        let d = dyadic_decompose(&phi).unwrap();
        let ls = d.nonempty_levels();
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[1], ls[0] + 1);
    }

    #[test]
    fn level_boundary_is_closed_above() {
        // φ = (1,1,1,1) on q=2, k=1, n=2: ‖φ‖^2 = 4, so φ = ‖φ‖/2 lands exactly on the
        // upper edge of E_1
        let s = sp(2, 1, 2);
        let phi: GridFunction<Q> = GridFunction::constant(s, rat(1, 1)).unwrap();
        let d = dyadic_decompose(&phi).unwrap();
        assert_eq!(d.nonempty_levels(), vec![1]);
    }

    #[test]
    fn rotation_acceptance_rate() {
        // |GL_2(F_2)| = 6 of 16 matrices
        let s = sp(2, 1, 2);
        let r = s.ring();
        let mut count = 0;
        for code in 0..16u32 {
            let entries = (0..4).map(|i| r.elem((code >> i) & 1)).collect();
            if RMatrix::new(r, 2, entries).unwrap().is_invertible() {
                count += 1;
            }
        }
        assert_eq!(count, 6);
        assert!(RMatrix::identity(r, 2).is_invertible());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, _) = random_rotation(sp(2, 2, 2), &mut rng, 100).unwrap();
        let s2 = sp(2, 2, 2);
        for w in s2.primitive_indices() {
            assert!(s2.is_primitive_index(m.apply_idx(s2, w)));
        }
    }

    #[test]
    fn rotation_cover_grows() {
        let s = sp(2, 2, 2);
        let omega = vec![s.primitive_indices()[0]];
        let cover = rotation_cover(s, &omega, 10, 1).unwrap();
        assert!(cover.len() > 1);
        assert!(cover.iter().all(|&w| s.is_primitive_index(w)));
    }

    #[test]
    fn estimates_are_reproducible_and_bounded() {
        let a = estimate_constants_exact(2, &[1, 2], 2, 10, 5).unwrap();
        let b = estimate_constants_exact(2, &[1, 2], 2, 10, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.summaries.iter().all(|s| s.lower_bound_failures == 0));
        // below the universal lower bound every direction counts
        let last = a.rows.iter().filter(|r| r.k == 2 && r.j == 4).collect::<Vec<_>>();
        assert!(last.iter().all(|r| r.lhs == 12));
    }

    #[test]
    fn f64_and_exact_agree_on_integer_data() {
        let s = sp(3, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pf: GridFunction<f64> = random_phi(s, &mut rng, 20).unwrap();
        let pq: GridFunction<Q> =
            GridFunction::new(s, pf.values().iter().map(|&v| Q::from_integer(BigInt::from(v as i64))).collect())
                .unwrap();
        let (sf, sq) = (phi_star(&pf), phi_star(&pq));
        for (a, b) in sf.values().iter().zip(sq.values()) {
            assert!((a - b.to_f64().unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn nine_tenths_once_q_to_the_k_reaches_twenty() {
        let s = sp(3, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let phi: GridFunction<Q> = random_phi(s, &mut rng, 20).unwrap();
            assert!(dyadic_decompose(&phi).unwrap().phi_d_norm_exceeds(Rational::new(9, 10)));
        }
    }

    fn arb_phi(space: RSpace) -> impl Strategy<Value = GridFunction<Q>> {
        proptest::collection::vec(0i64..21, space.size() as usize).prop_map(move |v| {
            GridFunction::new(space, v.into_iter().map(|x| Q::from_integer(BigInt::from(x))).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn homogeneous_and_subadditive(a in arb_phi(sp(2, 2, 2)), b in arb_phi(sp(2, 2, 2)), c in 0i64..5) {
            let c = Q::from_integer(BigInt::from(c));
            let sa = phi_star(&a);
            let scaled = phi_star(&a.scale(&c));
            for (x, y) in sa.values().iter().zip(scaled.values()) {
                prop_assert_eq!(x.clone() * c.clone(), y.clone());
            }
            let sb = phi_star(&b);
            let sab = phi_star(&a.add(&b));
            for ((x, y), z) in sa.values().iter().zip(sb.values()).zip(sab.values()) {
                prop_assert!(z <= &(x.clone() + y.clone()));
            }
        }

        #[test]
        fn lower_bound_and_sandwich(a in arb_phi(sp(3, 1, 2))) {
            prop_assume!(!a.norm_n_pow().is_zero());
            let star = phi_star(&a);
            prop_assert!(lower_bound_holds(&a, &star));
            let d = dyadic_decompose(&a).unwrap();
            prop_assert!(d.sandwich_pointwise());
            prop_assert!(d.sandwich_star());
            prop_assert!(d.phi_d_norm_exceeds(Rational::new(1, 3)));
        }

        #[test]
        fn truncation_keeps_most_of_the_norm(a in arb_phi(sp(2, 3, 2))) {
            prop_assume!(!a.norm_n_pow().is_zero());
            let d = dyadic_decompose(&a).unwrap();
            // ‖φ - φ_D‖ < 2q^{-k}‖φ‖, so ‖φ_D‖ > (1 - 2q^{-k})‖φ‖
            prop_assert!(d.phi_d_norm_exceeds(Rational::new(8 - 2, 8)));
        }

        #[test]
        fn rotation_preserves_norms(a in arb_phi(sp(2, 2, 2)), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, _) = random_rotation(a.space(), &mut rng, ROTATION_ATTEMPTS).unwrap();
            let rotated = a.compose(&m);
            prop_assert_eq!(rotated.norm_n_pow(), a.norm_n_pow());
        }
    }
}
