//! Lines, direction profiles, covering bounds and small Kakeya sets in `R^n`.
//!
//! Points are addressed by their [`RSpace`] index. A line `{b + aw : a in R}`
//! with primitive `w` is labelled by its canonical base: the unique point of
//! the line whose coordinate at the first unit position of `w` is zero.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{RElem, RSpace, RVector, ResidueRing, DEFAULT_POINT_BUDGET};
use crate::Rational;

/// A subset of `R^n`, stored as a bitset over point indices.
#[derive(Clone, PartialEq, Eq)]
pub struct PointSet {
    space: RSpace,
    bits: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.indices().map(|i| self.space.point(i))).finish()
    }
}

impl PointSet {
    pub fn empty(space: RSpace) -> Result<PointSet> {
        space.check_budget(DEFAULT_POINT_BUDGET)?;
        Ok(PointSet { space, bits: vec![0; space.size().div_ceil(64) as usize], len: 0 })
    }

    pub fn full(space: RSpace) -> Result<PointSet> {
        PointSet::from_indices(space, 0..space.size())
    }

    pub fn from_indices(space: RSpace, idx: impl IntoIterator<Item = u64>) -> Result<PointSet> {
        let mut s = PointSet::empty(space)?;
        for i in idx {
            if i >= space.size() {
                return Err(Error::Domain(format!("point index {i} outside R^n")));
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn from_points(space: RSpace, pts: &[RVector]) -> Result<PointSet> {
        let idx = pts.iter().map(|p| space.index(p)).collect::<Result<Vec<_>>>()?;
        PointSet::from_indices(space, idx)
    }

    pub fn space(&self) -> RSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: u64) -> bool {
        let (w, b) = ((i / 64) as usize, i % 64);
        let fresh = self.bits[w] >> b & 1 == 0;
        if fresh {
            self.bits[w] |= 1 << b;
            self.len += 1;
        }
        fresh
    }

    pub fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.space.size()).filter(|&i| self.contains(i))
    }

    pub fn points(&self) -> Vec<RVector> {
        self.indices().map(|i| self.space.point(i)).collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &PointSet) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        self.len = self.bits.iter().map(|w| w.count_ones() as usize).sum();
    }

    /// The image under a matrix over `R`.
    pub fn map(&self, m: &RMatrix) -> Result<PointSet> {
        PointSet::from_indices(self.space, self.indices().map(|i| m.apply_idx(self.space, i)))
    }

    /// Point-set text: one point per line, coordinates as comma-separated
    /// `k`-digit strings, `#` starts a comment.
    pub fn parse(space: RSpace, text: &str) -> Result<PointSet> {
        let mut s = PointSet::empty(space)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let coords = line
                .split(',')
                .map(|c| RElem::parse(space.ring(), c))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if coords.len() != space.n() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} coordinates, found {}",
                    lineno + 1,
                    space.n(),
                    coords.len()
                )));
            }
            s.insert(space.index(&RVector::new(coords))?);
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# q={} k={} n={} size={}\n", self.space.q(), self.space.k(), self.space.n(), self.len);
        for p in self.points() {
            out.push_str(&p.digit_strings().join(","));
            out.push('\n');
        }
        out
    }
}

/// Precomputed per-direction data for labelling lines.
#[derive(Clone, Copy)]
struct DirData {
    pivot: usize,
    pivot_inv: u32,
}

fn dir_data(space: RSpace, w: &[u32]) -> Option<DirData> {
    let ring = space.ring();
    let pivot = w.iter().position(|&c| ring.is_unit_code(c))?;
    Some(DirData { pivot, pivot_inv: ring.inv_code(w[pivot]).expect("unit") })
}

/// Canonical base of the line through `v` in direction `w`.
fn base_label(space: RSpace, v: &[u32], w: &[u32], d: DirData, buf: &mut [u32]) -> u64 {
    let ring = space.ring();
    let s = ring.mul_codes(v[d.pivot], d.pivot_inv);
    for i in 0..v.len() {
        buf[i] = ring.sub_codes(v[i], ring.mul_codes(s, w[i]));
    }
    space.encode(buf)
}

/// Indices of `{b + aw : a in R}` in the code order of `a`.
pub fn line_indices(space: RSpace, base: u64, dir: u64) -> Result<Vec<u64>> {
    if !space.is_primitive_index(dir) {
        return Err(Error::Domain(format!("direction {:?} is not primitive", space.point(dir))));
    }
    let ring = space.ring();
    let b = space.codes(base);
    let w = space.codes(dir);
    let mut buf = vec![0u32; space.n()];
    Ok((0..ring.size())
        .map(|a| {
            for i in 0..buf.len() {
                buf[i] = ring.add_codes(b[i], ring.mul_codes(a, w[i]));
            }
            space.encode(&buf)
        })
        .collect())
}

/// A line `{b + aw : a in R}` with primitive direction `w`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RLine {
    base: RVector,
    dir: RVector,
}

impl RLine {
    pub fn new(base: RVector, dir: RVector) -> Result<RLine> {
        if base.dim() != dir.dim() {
            return Err(Error::Domain("base and direction dimensions differ".into()));
        }
        if !dir.is_primitive() {
            return Err(Error::Domain(format!("direction {dir:?} is not primitive")));
        }
        Ok(RLine { base, dir })
    }

    pub fn base(&self) -> &RVector {
        &self.base
    }

    pub fn dir(&self) -> &RVector {
        &self.dir
    }

    fn space(&self) -> RSpace {
        let ring = self.dir.coords()[0].ring();
        RSpace::over(ring, self.dir.dim()).expect("dimension checked at construction")
    }

    /// The `q^k` points of the line.
    pub fn points(&self) -> Vec<RVector> {
        let ring = self.dir.coords()[0].ring();
        ring.elements().map(|a| &self.base + &self.dir.scale(a)).collect()
    }

    /// Deduplication key: least point of the line and least unit multiple of `w`.
    pub fn canonical(&self) -> RLine {
        let ring = self.dir.coords()[0].ring();
        let base = self.points().into_iter().min().expect("line is nonempty");
        let dir = ring.units().map(|u| self.dir.scale(u)).min().expect("1 is a unit");
        RLine { base, dir }
    }

    pub fn point_set(&self) -> Result<PointSet> {
        let space = self.space();
        PointSet::from_points(space, &self.points())
    }
}

/// `line_points(ℓ)`.
pub fn line_points(line: &RLine) -> Vec<RVector> {
    line.points()
}

/// For every primitive direction, the largest `|ℓ ∩ E|` over lines `ℓ ∥ w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KakeyaProfile {
    pub q: u32,
    pub k: u32,
    pub n: usize,
    /// Direction indices in increasing order (all of `S^{n-1}(R)`).
    pub directions: Vec<u64>,
    pub max_hits: Vec<u32>,
    /// Canonical base of a line attaining the maximum.
    pub best_base: Vec<u64>,
}

impl KakeyaProfile {
    pub fn line_size(&self) -> u64 {
        (self.q as u64).pow(self.k)
    }

    /// `|R^n| = q^{kn}`, the normalization of `ν`.
    pub fn space_size(&self) -> u64 {
        (self.q as u64).pow(self.k * self.n as u32)
    }

    /// `max_ℓ |ℓ ∩ E| / q^k` per direction.
    pub fn epsilon_per_direction(&self) -> Vec<Rational> {
        let line = self.line_size() as i64;
        self.max_hits.iter().map(|&h| Rational::new(h as i64, line)).collect()
    }

    /// Number of directions with a line meeting `E` in at least `ε q^k` points.
    pub fn directions_meeting(&self, eps: Rational) -> u64 {
        let line = self.line_size() as i128;
        let (num, den) = (*eps.numer() as i128, *eps.denom() as i128);
        self.max_hits.iter().filter(|&&h| h as i128 * den >= num * line).count() as u64
    }

    /// The fraction `ν` of `q^{kn}` attained at threshold `ε`.
    pub fn nu_at(&self, eps: Rational) -> Rational {
        Rational::new(self.directions_meeting(eps) as i64, self.space_size() as i64)
    }

    /// `E` is an `(ε, ν)`-Kakeya set modulo `t^k`.
    pub fn is_kakeya(&self, eps: Rational, nu: Rational) -> bool {
        let count = self.directions_meeting(eps) as i128;
        count * *nu.denom() as i128 >= *nu.numer() as i128 * self.space_size() as i128
    }

    pub fn max_hits_for(&self, dir: u64) -> Option<u32> {
        self.directions.binary_search(&dir).ok().map(|i| self.max_hits[i])
    }
}

/// The direction profile of `E`, computed exactly by labelling each point of
/// `E` with its line in every direction.
pub fn profile(e: &PointSet) -> KakeyaProfile {
    let space = e.space();
    let directions = space.primitive_indices();
    let pts: Vec<Vec<u32>> = e.indices().map(|i| space.codes(i)).collect();
    let per_dir: Vec<(u32, u64)> = directions
        .par_iter()
        .map(|&w| {
            let wc = space.codes(w);
            let d = dir_data(space, &wc).expect("primitive");
            let mut buf = vec![0u32; space.n()];
            let mut counts: HashMap<u64, u32> = HashMap::new();
            for v in &pts {
                *counts.entry(base_label(space, v, &wc, d, &mut buf)).or_insert(0) += 1;
            }
            counts.into_iter().map(|(b, c)| (c, std::cmp::Reverse(b))).max().map(|(c, b)| (c, b.0)).unwrap_or((0, 0))
        })
        .collect();
    KakeyaProfile {
        q: space.q(),
        k: space.k(),
        n: space.n(),
        directions,
        max_hits: per_dir.iter().map(|p| p.0).collect(),
        best_base: per_dir.iter().map(|p| p.1).collect(),
    }
}

/// `β = ⌊ν ε q^{k-1} / (kn)⌋`.
pub fn covering_beta(eps: Rational, nu: Rational, k: u32, n: usize, q: u32) -> u64 {
    let num = *eps.numer() as i128 * *nu.numer() as i128 * (q as i128).pow(k - 1);
    let den = *eps.denom() as i128 * *nu.denom() as i128 * k as i128 * n as i128;
    (num / den).max(0) as u64
}

/// `C(m, r)`, saturating at `u128::MAX`.
pub fn binomial(m: u64, r: u64) -> u128 {
    if r > m {
        return 0;
    }
    let r = r.min(m - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (m - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `C(β + n, n)`: the least number of points an `(ε, ν)`-Kakeya set modulo
/// `t^k` can have.
pub fn covering_bound(eps: Rational, nu: Rational, k: u32, n: usize, q: u32) -> u128 {
    binomial(covering_beta(eps, nu, k, n, q) + n as u64, n as u64)
}

fn check_unit_interval(name: &str, x: Rational) -> Result<()> {
    if x <= Rational::from_integer(0) || x > Rational::from_integer(1) {
        return Err(Error::Domain(format!("{name} = {x} must lie in (0, 1]")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub size: u64,
    pub beta: u64,
    pub bound: u128,
    pub directions_meeting: u64,
    pub nu_attained: String,
    pub hypothesis_met: bool,
    /// `None` when the hypothesis fails; otherwise `size >= bound`.
    pub pass: Option<bool>,
}

impl CoveringReport {
    pub fn is_violation(&self) -> bool {
        self.pass == Some(false)
    }
}

/// Checks `|E| >= covering_bound` whenever `E` is `(ε, ν)`-Kakeya.
pub fn check_covering_theorem(e: &PointSet, eps: Rational, nu: Rational) -> Result<CoveringReport> {
    check_unit_interval("ε", eps)?;
    check_unit_interval("ν", nu)?;
    let space = e.space();
    let prof = profile(e);
    let beta = covering_beta(eps, nu, space.k(), space.n(), space.q());
    let bound = binomial(beta + space.n() as u64, space.n() as u64);
    let hypothesis_met = prof.is_kakeya(eps, nu);
    let size = e.len() as u64;
    Ok(CoveringReport {
        size,
        beta,
        bound,
        directions_meeting: prof.directions_meeting(eps),
        nu_attained: prof.nu_at(eps).to_string(),
        hypothesis_met,
        pass: hypothesis_met.then_some(size as u128 >= bound),
    })
}

/// A set containing a full line in every primitive direction, built by
/// visiting directions in a seeded random order and choosing, for each
/// uncovered direction, a line that already shares the most points with the
/// set.
pub fn greedy_small_kakeya(space: RSpace, seed: u64) -> Result<PointSet> {
    space.check_budget(DEFAULT_POINT_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = space.primitive_indices();
    dirs.shuffle(&mut rng);
    let mut e = PointSet::empty(space)?;
    let line_len = space.ring().size();
    let mut buf = vec![0u32; space.n()];
    for &w in &dirs {
        let wc = space.codes(w);
        let d = dir_data(space, &wc).expect("primitive");
        let mut counts: HashMap<u64, u32> = HashMap::new();
        for v in e.indices() {
            let vc = space.codes(v);
            *counts.entry(base_label(space, &vc, &wc, d, &mut buf)).or_insert(0) += 1;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        if best == line_len {
            continue;
        }
        let base = if best == 0 {
            // any line: pick a random point of R^n as base
            rng.gen_range(0..space.size())
        } else {
            let mut ties: Vec<u64> = counts.iter().filter(|(_, &c)| c == best).map(|(&b, _)| b).collect();
            ties.sort_unstable();
            ties[rng.gen_range(0..ties.len())]
        };
        for p in line_indices(space, base, w)? {
            e.insert(p);
        }
    }
    Ok(e)
}

/// Largest `|R^n|` accepted by [`exhaustive_min_kakeya`] unless raised.
pub const EXHAUSTIVE_DEFAULT_BUDGET: u64 = 16;
/// Hard ceiling: points are tracked in a `u64` mask.
pub const EXHAUSTIVE_MAX_BUDGET: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinKakeya {
    pub size: usize,
    pub witness: PointSet,
    /// Search nodes visited.
    pub nodes: u64,
}

/// The least size of a set containing a line in every primitive direction,
/// with a witness, by branch and bound over direction classes.
pub fn exhaustive_min_kakeya(space: RSpace, budget: u64) -> Result<MinKakeya> {
    let budget = budget.min(EXHAUSTIVE_MAX_BUDGET);
    if space.size() > budget {
        return Err(Error::Budget(format!("|R^n| = {} exceeds the exhaustive search budget {budget}", space.size())));
    }
    let ring = space.ring();
    // one representative per class of directions up to units
    let mut seen = vec![false; space.size() as usize];
    let mut classes: Vec<Vec<u64>> = Vec::new();
    for w in space.primitive_indices() {
        if seen[w as usize] {
            continue;
        }
        for u in ring.units() {
            seen[space.scale_idx(u.code(), w) as usize] = true;
        }
        // every line in this direction, as a mask
        let mut masks: Vec<u64> = Vec::new();
        for b in 0..space.size() {
            let pts = line_indices(space, b, w)?;
            let m = pts.iter().fold(0u64, |acc, &p| acc | 1 << p);
            if !masks.contains(&m) {
                masks.push(m);
            }
        }
        masks.sort_unstable();
        classes.push(masks);
    }
    // translation invariance: the first class may use the line through 0
    if let Some(first) = classes.first_mut() {
        first.retain(|m| m & 1 == 1);
    }
    struct Search<'a> {
        classes: &'a [Vec<u64>],
        best: u32,
        best_mask: u64,
        nodes: u64,
    }
    fn go(s: &mut Search<'_>, idx: usize, mask: u64) {
        s.nodes += 1;
        let size = mask.count_ones();
        if idx == s.classes.len() {
            if size < s.best {
                s.best = size;
                s.best_mask = mask;
            }
            return;
        }
        let lines = &s.classes[idx];
        if lines.iter().any(|&m| m & !mask == 0) {
            go(s, idx + 1, mask);
            return;
        }
        if size + 1 >= s.best {
            return;
        }
        let mut order: Vec<(u32, u64)> = lines.iter().map(|&m| ((m & !mask).count_ones(), m)).collect();
        order.sort_unstable();
        for (extra, m) in order {
            if size + extra >= s.best {
                break;
            }
            go(s, idx + 1, mask | m);
        }
    }
    let full = if space.size() == 64 { u64::MAX } else { (1u64 << space.size()) - 1 };
    let mut s = Search { classes: &classes, best: full.count_ones() + 1, best_mask: full, nodes: 0 };
    go(&mut s, 0, 0);
    let witness = PointSet::from_indices(space, (0..space.size()).filter(|&i| s.best_mask >> i & 1 == 1))?;
    Ok(MinKakeya { size: s.best as usize, witness, nodes: s.nodes })
}

/// An `n × n` matrix over `R`, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RMatrix {
    ring: ResidueRing,
    n: usize,
    entries: Vec<u32>,
}

impl std::fmt::Debug for RMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rows: Vec<Vec<String>> =
            (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j).digit_string()).collect()).collect();
        write!(f, "{rows:?}")
    }
}

impl RMatrix {
    pub fn new(ring: ResidueRing, n: usize, entries: Vec<RElem>) -> Result<RMatrix> {
        if entries.len() != n * n {
            return Err(Error::Domain(format!("{} entries for a {n}×{n} matrix", entries.len())));
        }
        Ok(RMatrix { ring, n, entries: entries.into_iter().map(|e| e.code()).collect() })
    }

    pub fn identity(ring: ResidueRing, n: usize) -> RMatrix {
        let entries = (0..n * n).map(|i| u32::from(i % (n + 1) == 0)).collect();
        RMatrix { ring, n, entries }
    }

    #[cfg(test)]
    pub(crate) fn from_codes(ring: ResidueRing, n: usize, entries: Vec<u32>) -> RMatrix {
        RMatrix { ring, n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> RElem {
        self.ring.elem(self.entries[i * self.n + j])
    }

    /// Invertible over `R` iff the reduction mod `t` is invertible over `F_q`.
    pub fn is_invertible(&self) -> bool {
        let f = self.ring.field();
        let q = self.ring.q();
        let n = self.n;
        let mut m: Vec<u16> = self.entries.iter().map(|&c| (c % q) as u16).collect();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| m[r * n + col] != 0) else {
                return false;
            };
            if p != col {
                for j in 0..n {
                    m.swap(p * n + j, col * n + j);
                }
            }
            let inv = f.inv_code(m[col * n + col]);
            for r in col + 1..n {
                let factor = f.mul_codes(m[r * n + col], inv);
                if factor == 0 {
                    continue;
                }
                for j in col..n {
                    m[r * n + j] = f.sub_codes(m[r * n + j], f.mul_codes(factor, m[col * n + j]));
                }
            }
        }
        true
    }

    /// Determinant over `R` by cofactor expansion (`n` is small).
    pub fn det(&self) -> RElem {
        fn rec(ring: ResidueRing, m: &[u32], n: usize) -> u32 {
            if n == 1 {
                return m[0];
            }
            let mut acc = 0;
            for j in 0..n {
                let minor: Vec<u32> = (1..n)
                    .flat_map(|r| (0..n).filter(move |&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| m[r * n + c])
                    .collect();
                let term = ring.mul_codes(m[j], rec(ring, &minor, n - 1));
                acc = if j % 2 == 0 { ring.add_codes(acc, term) } else { ring.sub_codes(acc, term) };
            }
            acc
        }
        self.ring.elem(rec(self.ring, &self.entries, self.n))
    }

    pub fn apply(&self, v: &RVector) -> RVector {
        let c = v.coords();
        RVector::new(
            (0..self.n).map(|i| (0..self.n).fold(self.ring.zero(), |acc, j| acc + self.entry(i, j) * c[j])).collect(),
        )
    }

    pub fn apply_idx(&self, space: RSpace, v: u64) -> u64 {
        let c = space.codes(v);
        let out: Vec<u32> = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .fold(0, |acc, j| self.ring.add_codes(acc, self.ring.mul_codes(self.entries[i * self.n + j], c[j])))
            })
            .collect();
        space.encode(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(q: u32, k: u32, n: usize) -> RSpace {
        RSpace::new(q, k, n).unwrap()
    }

    fn vecs(space: RSpace, rows: &[&[i64]]) -> Vec<RVector> {
        rows.iter().map(|r| RVector::new(r.iter().map(|&c| space.ring().from_ints(&[c])).collect())).collect()
    }

    #[test]
    fn line_examples() {
        let s = sp(2, 1, 2);
        let v = vecs(s, &[&[0, 0], &[1, 1]]);
        let line = RLine::new(v[0].clone(), v[1].clone()).unwrap();
        let mut pts = line.points();
        pts.sort();
        assert_eq!(pts, vec![v[0].clone(), v[1].clone()]);
        let s2 = sp(2, 2, 2);
        let zero = RVector::new(vec![s2.ring().zero(); 2]);
        let e1 = RVector::new(vec![s2.ring().one(), s2.ring().zero()]);
        assert_eq!(RLine::new(zero.clone(), e1).unwrap().points().len(), 4);
        let bad = RVector::new(vec![s2.ring().t(), s2.ring().zero()]);
        assert!(matches!(RLine::new(zero, bad), Err(Error::Domain(_))));
    }

    #[test]
    fn distinct_lines_q2_k1_n2() {
        let s = sp(2, 1, 2);
        let mut keys = std::collections::HashSet::new();
        for w in s.enumerate(true, 64).unwrap() {
            for b in s.enumerate(false, 64).unwrap() {
                keys.insert(RLine::new(b, w.clone()).unwrap().canonical());
            }
        }
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn parallel_classes_partition() {
        for (q, k, n) in [(2, 2, 2), (3, 1, 2), (2, 1, 3), (3, 2, 2)] {
            let s = sp(q, k, n);
            for w in s.primitive_indices() {
                let mut seen = vec![0u32; s.size() as usize];
                let mut bases = std::collections::HashSet::new();
                for b in 0..s.size() {
                    let pts = line_indices(s, b, w).unwrap();
                    let key = *pts.iter().min().unwrap();
                    if bases.insert(key) {
                        for p in pts {
                            seen[p as usize] += 1;
                        }
                    }
                }
                assert_eq!(bases.len() as u64, (q as u64).pow(k * (n as u32 - 1)));
                assert!(seen.iter().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn profile_examples() {
        let s = sp(2, 1, 2);
        let full = PointSet::full(s).unwrap();
        assert!(profile(&full).max_hits.iter().all(|&h| h == 2));
        let empty = PointSet::empty(s).unwrap();
        assert!(profile(&empty).max_hits.iter().all(|&h| h == 0));
        let v = vecs(s, &[&[0, 0], &[1, 0]]);
        let line = PointSet::from_points(s, &v).unwrap();
        let p = profile(&line);
        let e1 = s.index(&vecs(s, &[&[1, 0]])[0]).unwrap();
        for (&w, &h) in p.directions.iter().zip(&p.max_hits) {
            assert_eq!(h, if w == e1 { 2 } else { 1 });
        }
    }

    #[test]
    fn covering_bound_examples() {
        let one = Rational::from_integer(1);
        assert_eq!(covering_beta(one, one, 4, 2, 2), 1);
        assert_eq!(covering_bound(one, one, 4, 2, 2), 3);
        assert_eq!(covering_bound(one, one, 1, 2, 2), 1);
        assert_eq!(covering_bound(one, one, 3, 2, 3), 3);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn covering_check_on_simple_sets() {
        let s = sp(2, 2, 2);
        let all_dirs = Rational::new(12, 16);
        let one = Rational::from_integer(1);
        let full = PointSet::full(s).unwrap();
        let r = check_covering_theorem(&full, one, all_dirs).unwrap();
        assert_eq!((r.size, r.bound, r.pass), (16, 1, Some(true)));
        // ν = 1 asks for q^{kn} directions, more than exist
        let r = check_covering_theorem(&full, one, one).unwrap();
        assert!(!r.hypothesis_met && r.pass.is_none());
        let r = check_covering_theorem(&PointSet::empty(s).unwrap(), one, Rational::new(1, 16)).unwrap();
        assert!(!r.hypothesis_met);
        assert!(check_covering_theorem(&full, Rational::from_integer(0), one).is_err());
    }

    #[test]
    fn greedy_sets_are_kakeya() {
        for (q, k) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let s = sp(q, k, 2);
            for seed in 0..5 {
                let e = greedy_small_kakeya(s, seed).unwrap();
                let p = profile(&e);
                assert!(p.max_hits.iter().all(|&h| h as u64 == p.line_size()));
                assert!(e.len() as u64 <= s.size());
            }
        }
    }

    #[test]
    fn exhaustive_minimum_matches_subset_oracle() {
        for (q, k, n) in [(2, 1, 2), (2, 1, 1), (3, 1, 2), (2, 2, 2), (4, 1, 2)] {
            let s = sp(q, k, n);
            let found = exhaustive_min_kakeya(s, 16).unwrap();
            let wp = profile(&found.witness);
            assert!(wp.max_hits.iter().all(|&h| h as u64 == wp.line_size()));
            assert_eq!(found.witness.len(), found.size);
            // brute force over all subsets
            let size = s.size();
            let mut best = size as usize;
            for mask in 0u64..(1 << size) {
                let c = mask.count_ones() as usize;
                if c >= best {
                    continue;
                }
                let set = PointSet::from_indices(s, (0..size).filter(|&i| mask >> i & 1 == 1)).unwrap();
                let p = profile(&set);
                if p.max_hits.iter().all(|&h| h as u64 == p.line_size()) {
                    best = c;
                }
            }
            assert_eq!(found.size, best, "q={q} k={k} n={n}");
        }
        assert_eq!(exhaustive_min_kakeya(sp(2, 1, 2), 16).unwrap().size, 3);
        assert_eq!(exhaustive_min_kakeya(sp(2, 1, 1), 16).unwrap().size, 2);
        assert_eq!(exhaustive_min_kakeya(sp(3, 1, 2), 16).unwrap().size, 7);
        assert!(matches!(exhaustive_min_kakeya(sp(3, 2, 2), 16), Err(Error::Budget(_))));
    }

    #[test]
    fn point_file_round_trip() {
        let s = sp(3, 2, 2);
        let e = greedy_small_kakeya(s, 7).unwrap();
        let text = e.to_text();
        assert_eq!(PointSet::parse(s, &text).unwrap(), e);
        assert!(matches!(PointSet::parse(s, "00,1\n"), Err(Error::Parse(_))));
        assert!(matches!(PointSet::parse(s, "00\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn matrices() {
        let r = ResidueRing::new(2, 2).unwrap();
        let id = RMatrix::identity(r, 2);
        assert!(id.is_invertible());
        assert_eq!(id.det(), r.one());
        let m = RMatrix::new(r, 2, vec![r.one(), r.t(), r.t(), r.one()]).unwrap();
        assert!(m.is_invertible());
        assert_eq!(m.det(), r.one());
        let sing = RMatrix::new(r, 2, vec![r.one(), r.one(), r.one(), r.from_ints(&[1, 1])]).unwrap();
        assert!(!sing.is_invertible());
        assert_eq!(sing.det(), r.t());
    }

    fn arb_set(space: RSpace) -> impl Strategy<Value = PointSet> {
        proptest::collection::vec(any::<bool>(), space.size() as usize).prop_map(move |bits| {
            PointSet::from_indices(space, (0..bits.len() as u64).filter(|&i| bits[i as usize])).unwrap()
        })
    }

    proptest! {
        #[test]
        fn profile_is_monotone(a in arb_set(sp(3, 1, 2)), b in arb_set(sp(3, 1, 2))) {
            let mut big = a.clone();
            big.union_with(&b);
            let (pa, pb) = (profile(&a), profile(&big));
            prop_assert!(pa.max_hits.iter().zip(&pb.max_hits).all(|(x, y)| x <= y));
            prop_assert!(pa.max_hits.iter().all(|&h| h as u64 <= pa.line_size()));
        }

        #[test]
        fn profile_is_rotation_equivariant(
            e in arb_set(sp(2, 2, 2)),
            entries in proptest::collection::vec(0u32..4, 4),
        ) {
            let s = sp(2, 2, 2);
            let m = RMatrix::from_codes(s.ring(), 2, entries);
            prop_assume!(m.is_invertible());
            let (p, pm) = (profile(&e), profile(&e.map(&m).unwrap()));
            for (&w, &h) in p.directions.iter().zip(&p.max_hits) {
                prop_assert_eq!(pm.max_hits_for(m.apply_idx(s, w)), Some(h));
            }
        }

        #[test]
        fn greedy_output_respects_covering_bound(seed in any::<u64>()) {
            let s = sp(3, 2, 2);
            let e = greedy_small_kakeya(s, seed).unwrap();
            let one = Rational::from_integer(1);
            let nu = Rational::new(s.primitive_count() as i64, s.size() as i64);
            let r = check_covering_theorem(&e, one, nu).unwrap();
            prop_assert_eq!(r.pass, Some(true));
        }
    }
}
