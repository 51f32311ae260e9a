//! Quadratic inequalities `(s - beta)(s - beta + 1) >= 0` over permutations,
//! their linear form over second-order coordinates, the facet families built
//! from them, and certification by tight-set rank.
//!
//! For coefficients `c_ij` and `s(sigma) = sum_i c_{i,sigma(i)}`, the quadratic
//! is nonnegative at every integer `s` and vanishes exactly at
//! `s in {beta - 1, beta}`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine_hull::{dimension_formula, MAX_AFFINE_N};
use crate::error::{check_range, Error, Result};
use crate::linalg::{self, format_rational, parse_rational, RankMode, Rational};
use crate::perm::{enumerate_permutations, CoordSpace, PairIndex, Permutation};

/// Coefficient form: integer weights `c_ij` on the cells of an `n x n` grid and a threshold `beta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenericInequality {
    n: usize,
    coeffs: BTreeMap<(usize, usize), i64>,
    beta: i64,
}

impl GenericInequality {
    /// Zero weights are dropped; at least one nonzero weight is required.
    pub fn new(n: usize, coeffs: impl IntoIterator<Item = ((usize, usize), i64)>, beta: i64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((i, j), c) in coeffs {
            if i >= n || j >= n {
                return Err(Error::Argument(format!("cell ({}, {}) outside {n} x {n}", i + 1, j + 1)));
            }
            *map.entry((i, j)).or_insert(0) += c;
        }
        map.retain(|_, c| *c != 0);
        if map.is_empty() {
            return Err(Error::Argument("inequality has no nonzero coefficient".into()));
        }
        Ok(Self { n, coeffs: map, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> i64 {
        self.beta
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), i64> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> i64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or(0)
    }

    /// `s(sigma) = sum_i c_{i, sigma(i)}`.
    pub fn weight(&self, sigma: &Permutation) -> i64 {
        (0..self.n).map(|i| self.coeff(i, sigma.apply(i))).sum()
    }
}

impl fmt::Display for GenericInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.coeffs.iter().map(|(&(i, j), c)| format!("{c}*u{}{}", i + 1, j + 1)).collect();
        write!(f, "({} - ({} - 1/2) w)^2 >= 1/4", terms.join(" + "), self.beta)
    }
}

/// `sum diag[ij] Y_{ij,ij} + sum off[p,q] Y_{p,q} + constant >= 0` over canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "LinearRecord", try_from = "LinearRecord")]
pub struct LinearInequality {
    pub n: usize,
    /// Keyed by cell `(i, j)`; no zero values.
    pub diag: BTreeMap<(usize, usize), Rational>,
    /// Keyed by flat pair indices `p < q`; no zero values.
    pub off: BTreeMap<(usize, usize), Rational>,
    pub constant: Rational,
}

/// Integer multiple of a linear inequality, dense over canonical coordinates,
/// divided by the gcd of its entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerForm {
    pub coeffs: Vec<i64>,
    pub constant: i64,
}

impl IntegerForm {
    /// Value at the vertex whose diagonal support is `support` (flat indices).
    pub fn value_at_support(&self, space: &CoordSpace, support: &[usize]) -> i64 {
        let mut acc = self.constant;
        for (a, &p) in support.iter().enumerate() {
            for &q in &support[a..] {
                acc += self.coeffs[space.index(p, q)];
            }
        }
        acc
    }

    pub fn value_at_permutation(&self, space: &CoordSpace, sigma: &Permutation) -> i64 {
        let n = sigma.n();
        let support: Vec<usize> = (0..n).map(|i| i * n + sigma.apply(i)).collect();
        self.value_at_support(space, &support)
    }

    pub fn value_at_point(&self, y: &[f64]) -> f64 {
        self.constant as f64
            + self.coeffs.iter().zip(y).filter(|(c, _)| **c != 0).map(|(&c, &v)| c as f64 * v).sum::<f64>()
    }
}

impl LinearInequality {
    pub fn new(
        n: usize,
        diag: BTreeMap<(usize, usize), Rational>,
        off: BTreeMap<(usize, usize), Rational>,
        constant: Rational,
    ) -> Result<Self> {
        let side = n * n;
        if let Some(&(i, j)) = diag.keys().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::Argument(format!("diagonal cell ({}, {}) outside {n} x {n}", i + 1, j + 1)));
        }
        if let Some(&(p, q)) = off.keys().find(|&&(p, q)| p >= q || q >= side) {
            return Err(Error::Argument(format!("off-diagonal key ({p}, {q}) is not a canonical pair p < q < {side}")));
        }
        let mut out = Self { n, diag, off, constant };
        out.diag.retain(|_, v| !v.is_zero());
        out.off.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// True when every coefficient and the constant vanish (`0 >= 0`).
    pub fn is_trivial(&self) -> bool {
        self.diag.is_empty() && self.off.is_empty() && self.constant.is_zero()
    }

    pub fn coefficient(&self, p: usize, q: usize) -> Rational {
        let (p, q) = (p.min(q), p.max(q));
        if p == q {
            let c = PairIndex::from_flat(self.n, p);
            self.diag.get(&(c.i, c.j)).cloned().unwrap_or_else(Rational::zero)
        } else {
            self.off.get(&(p, q)).cloned().unwrap_or_else(Rational::zero)
        }
    }

    pub fn value_at_permutation(&self, sigma: &Permutation) -> Rational {
        let n = self.n;
        let support: Vec<usize> = (0..n).map(|i| i * n + sigma.apply(i)).collect();
        let mut acc = self.constant.clone();
        for (a, &p) in support.iter().enumerate() {
            for &q in &support[a..] {
                acc += self.coefficient(p, q);
            }
        }
        acc
    }

    /// Positive integer multiple with coprime entries; scaling preserves the sense.
    pub fn integer_form(&self) -> Result<IntegerForm> {
        let all = self.diag.values().chain(self.off.values()).chain(std::iter::once(&self.constant));
        let lcm = all.clone().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let scale = |r: &Rational| (r * Rational::from_integer(lcm.clone())).to_integer();
        let gcd = all.fold(BigInt::zero(), |acc, r| acc.gcd(&scale(r)));
        let gcd = if gcd.is_zero() { BigInt::one() } else { gcd };
        let to_i64 = |r: &Rational| {
            (scale(r) / &gcd).to_i64().ok_or_else(|| {
                Error::Unsupported(format!("coefficient {} exceeds 64-bit range after scaling", format_rational(r)))
            })
        };
        let space = CoordSpace::new(self.n);
        let mut coeffs = vec![0i64; space.len()];
        for (&(i, j), v) in &self.diag {
            let p = i * self.n + j;
            coeffs[space.index(p, p)] = to_i64(v)?;
        }
        for (&(p, q), v) in &self.off {
            coeffs[space.index(p, q)] = to_i64(v)?;
        }
        Ok(IntegerForm { coeffs, constant: to_i64(&self.constant)? })
    }

    /// Drops the coefficients of coordinates that vanish on the affine hull.
    pub fn without_pinned(&self) -> Self {
        let space = CoordSpace::new(self.n);
        let mut out = self.clone();
        out.off.retain(|&(p, q), _| !space.is_pinned(p, q));
        out
    }

    /// Human-readable form with 1-based labels.
    pub fn render(&self) -> String {
        let space = CoordSpace::new(self.n);
        let mut terms: Vec<(usize, usize, &Rational)> = self
            .diag
            .iter()
            .map(|(&(i, j), v)| (i * self.n + j, i * self.n + j, v))
            .chain(self.off.iter().map(|(&(p, q), v)| (p, q, v)))
            .collect();
        terms.sort_by_key(|&(p, q, _)| (p, q));
        let mut out = String::new();
        for (p, q, v) in terms {
            let sign = if v.is_negative() {
                " - "
            } else if out.is_empty() {
                ""
            } else {
                " + "
            };
            let mag = v.abs();
            let coef = if mag.is_one() { String::new() } else { mag.to_string() };
            out.push_str(&format!("{sign}{coef}{}", space.label(p, q)));
        }
        if !self.constant.is_zero() || out.is_empty() {
            let sign = if self.constant.is_negative() {
                " - "
            } else if out.is_empty() {
                ""
            } else {
                " + "
            };
            out.push_str(&format!("{sign}{}", self.constant.abs()));
        }
        format!("{out} >= 0")
    }
}

fn q(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Linear form of the quadratic over the vertices: diagonal `c^2 - (2 beta - 1) c`,
/// each unordered pair of cells `2 c_p c_q`, constant `beta^2 - beta`.
pub fn expand_generic(g: &GenericInequality) -> LinearInequality {
    let n = g.n;
    let beta = g.beta;
    let mut diag = BTreeMap::new();
    for (&(i, j), &c) in &g.coeffs {
        diag.insert((i, j), q(c * c - (2 * beta - 1) * c));
    }
    let cells: Vec<(usize, i64)> = g.coeffs.iter().map(|(&(i, j), &c)| (i * n + j, c)).collect();
    let mut off = BTreeMap::new();
    for (a, &(p, cp)) in cells.iter().enumerate() {
        for &(r, cr) in &cells[a + 1..] {
            off.insert((p.min(r), p.max(r)), q(2 * cp * cr));
        }
    }
    LinearInequality::new(n, diag, off, q(beta * beta - beta)).expect("keys built in range")
}

/// `(s - beta)(s - beta + 1)` with `s = sum_i c_{i,sigma(i)}`.
pub fn evaluate_at_vertex(g: &GenericInequality, sigma: &Permutation) -> Result<i64> {
    if sigma.n() != g.n {
        return Err(Error::Argument(format!("permutation of size {} for an inequality of size {}", sigma.n(), g.n)));
    }
    let t = g.weight(sigma) - g.beta;
    Ok(t * (t + 1))
}

fn check_index(n: usize, what: &str, x: usize) -> Result<()> {
    if x >= n {
        return Err(Error::FamilyConstraint(format!("{what} = {} outside 1..={n}", x + 1)));
    }
    Ok(())
}

fn require_distinct(what: &str, items: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &x in items {
        if !seen.insert(x) {
            return Err(Error::FamilyConstraint(format!("{what} must be pairwise distinct, {} repeats", x + 1)));
        }
    }
    Ok(())
}

/// `Y_{ij,kl} >= 0` as `(u_ij + u_kl - w/2)^2 >= 1/4`; needs `i != k`, `j != l`.
pub fn make_nonneg(n: usize, i: usize, j: usize, k: usize, l: usize) -> Result<GenericInequality> {
    for (what, x) in [("i", i), ("j", j), ("k", k), ("l", l)] {
        check_index(n, what, x)?;
    }
    if i == k {
        return Err(Error::FamilyConstraint(format!("row indices i and k coincide ({})", i + 1)));
    }
    if j == l {
        return Err(Error::FamilyConstraint(format!("column indices j and l coincide ({})", j + 1)));
    }
    GenericInequality::new(n, [((i, j), 1), ((k, l), 1)], 1)
}

/// `Y_{p1q1,kl} + Y_{p2q2,kl} + Y_{p1q2,kl} <= Y_{kl,kl} + Y_{p1q1,p2q2}` on the
/// affine hull; rows `p1, p2, k` and columns `q1, q2, l` pairwise distinct.
pub fn make_triple(
    n: usize,
    p1: usize,
    q1: usize,
    p2: usize,
    q2: usize,
    k: usize,
    l: usize,
) -> Result<GenericInequality> {
    for (what, x) in [("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2), ("k", k), ("l", l)] {
        check_index(n, what, x)?;
    }
    require_distinct("rows p1, p2, k", &[p1, p2, k])?;
    require_distinct("columns q1, q2, l", &[q1, q2, l])?;
    GenericInequality::new(n, [((p1, q1), 1), ((p2, q2), 1), ((p1, q2), 1), ((k, l), -1)], 1)
}

/// Cells `(i_r, j_r)` with weight +1 and `(k, l)` with weight -1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MtermSpec {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub k: usize,
    pub l: usize,
}

impl MtermSpec {
    /// `3 <= m <= n - 3`; rows `{i_r} + {k}` and columns `{j_r} + {l}` pairwise distinct.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>, k: usize, l: usize) -> Result<Self> {
        let m = pairs.len();
        if m < 3 || m + 3 > n {
            return Err(Error::FamilyConstraint(format!("m = {m} outside 3..=n-3 for n = {n}")));
        }
        check_index(n, "k", k)?;
        check_index(n, "l", l)?;
        let mut rows = vec![k];
        let mut cols = vec![l];
        for &(i, j) in &pairs {
            check_index(n, "i_r", i)?;
            check_index(n, "j_r", j)?;
            rows.push(i);
            cols.push(j);
        }
        require_distinct("rows i_1..i_m, k", &rows)?;
        require_distinct("columns j_1..j_m, l", &cols)?;
        Ok(Self { n, pairs, k, l })
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn inequality(&self) -> GenericInequality {
        let terms = self.pairs.iter().map(|&p| (p, 1)).chain([((self.k, self.l), -1)]);
        GenericInequality::new(self.n, terms, 1).expect("validated spec")
    }

    /// Number of `r` with `sigma(i_r) = j_r`.
    pub fn matches(&self, sigma: &Permutation) -> usize {
        self.pairs.iter().filter(|&&(i, j)| sigma.maps(i, j)).count()
    }
}

pub fn make_mterm(n: usize, pairs: Vec<(usize, usize)>, k: usize, l: usize) -> Result<GenericInequality> {
    Ok(MtermSpec::new(n, pairs, k, l)?.inequality())
}

/// Weight -1 on `P1 x Q1 + P2 x Q2`, +1 on `P1 x Q2 + P2 x Q1`.
pub fn make_box(
    n: usize,
    p1: &[usize],
    p2: &[usize],
    q1: &[usize],
    q2: &[usize],
    beta: i64,
) -> Result<GenericInequality> {
    for (what, set) in [("P1", p1), ("P2", p2), ("Q1", q1), ("Q2", q2)] {
        for &x in set {
            check_index(n, what, x)?;
        }
        require_distinct(what, set)?;
    }
    if let Some(x) = p1.iter().find(|x| p2.contains(x)) {
        return Err(Error::FamilyConstraint(format!("P1 and P2 share row {}", x + 1)));
    }
    if let Some(x) = q1.iter().find(|x| q2.contains(x)) {
        return Err(Error::FamilyConstraint(format!("Q1 and Q2 share column {}", x + 1)));
    }
    let cells = |rows: &[usize], cols: &[usize], w: i64| {
        rows.iter().flat_map(move |&i| cols.iter().map(move |&j| ((i, j), w))).collect::<Vec<_>>()
    };
    let terms = [cells(p1, q1, -1), cells(p2, q2, -1), cells(p1, q2, 1), cells(p2, q1, 1)].concat();
    GenericInequality::new(n, terms, beta).map_err(|_| Error::FamilyConstraint("box has no cells".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    Nonneg,
    Triple,
    Mterm { m: usize },
    BoxSamples { count: usize, seed: u64 },
}

impl Family {
    pub fn min_n(&self) -> usize {
        match self {
            Family::Nonneg => 2,
            Family::Triple => 6,
            Family::Mterm { m } => (*m + 3).max(6),
            Family::BoxSamples { .. } => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Nonneg => f.write_str("nonneg"),
            Family::Triple => f.write_str("triple"),
            Family::Mterm { m } => write!(f, "mterm({m})"),
            Family::BoxSamples { count, seed } => write!(f, "box-samples({count}, seed {seed})"),
        }
    }
}

fn combinations(pool: &[usize], m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (a, &x) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[a + 1..], m - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn arrangements(m: usize) -> Vec<Vec<usize>> {
    crate::perm::Permutations::unguarded(m).map(|p| p.image().to_vec()).collect()
}

fn mterm_specs(n: usize, m: usize) -> Vec<MtermSpec> {
    let orders = arrangements(m);
    let mut out = Vec::new();
    for k in 0..n {
        for l in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let cols: Vec<usize> = (0..n).filter(|&j| j != l).collect();
            let row_sets = combinations(&rows, m);
            let col_sets = combinations(&cols, m);
            for rs in &row_sets {
                for cs in &col_sets {
                    for ord in &orders {
                        let pairs = rs.iter().zip(ord).map(|(&i, &o)| (i, cs[o])).collect();
                        out.push(MtermSpec { n, pairs, k, l });
                    }
                }
            }
        }
    }
    out
}

fn random_subset<R: Rng>(pool: &mut Vec<usize>, rng: &mut R, max: usize) -> Vec<usize> {
    pool.shuffle(rng);
    let take = rng.gen_range(0..=max.min(pool.len()));
    pool.drain(..take).collect()
}

/// All members of a family at size `n`, deduplicated by coefficient map and
/// threshold, in generation order.
pub fn enumerate_family(family: Family, n: usize) -> Result<Vec<GenericInequality>> {
    if n < family.min_n() {
        return Err(Error::Unsupported(format!("family {family} needs n >= {}, got {n}", family.min_n())));
    }
    let mut raw = Vec::new();
    match family {
        Family::Nonneg => {
            for p in 0..n * n {
                for r in p + 1..n * n {
                    let (a, b) = (PairIndex::from_flat(n, p), PairIndex::from_flat(n, r));
                    if a.i != b.i && a.j != b.j {
                        raw.push(make_nonneg(n, a.i, a.j, b.i, b.j)?);
                    }
                }
            }
        }
        Family::Triple => {
            for k in 0..n {
                for l in 0..n {
                    for p1 in (0..n).filter(|&x| x != k) {
                        for p2 in (0..n).filter(|&x| x != k && x != p1) {
                            for q1 in (0..n).filter(|&x| x != l) {
                                for q2 in (0..n).filter(|&x| x != l && x != q1) {
                                    raw.push(make_triple(n, p1, q1, p2, q2, k, l)?);
                                }
                            }
                        }
                    }
                }
            }
        }
        Family::Mterm { m } => {
            if m < 3 {
                return Err(Error::Unsupported(format!("mterm needs m >= 3, got {m}")));
            }
            raw = mterm_specs(n, m).iter().map(MtermSpec::inequality).collect();
        }
        Family::BoxSamples { count, seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            while raw.len() < count {
                let mut rows: Vec<usize> = (0..n).collect();
                let mut cols: Vec<usize> = (0..n).collect();
                let p1 = random_subset(&mut rows, &mut rng, n / 2 + 1);
                let p2 = random_subset(&mut rows, &mut rng, n / 2 + 1);
                let q1 = random_subset(&mut cols, &mut rng, n / 2 + 1);
                let q2 = random_subset(&mut cols, &mut rng, n / 2 + 1);
                let beta = rng.gen_range(-1..=2);
                if let Ok(g) = make_box(n, &p1, &p2, &q1, &q2, beta) {
                    raw.push(g);
                }
            }
        }
    }
    let mut seen = HashSet::with_capacity(raw.len());
    Ok(raw.into_iter().filter(|g| seen.insert(g.clone())).collect())
}

/// Family size predicted by the closed-form count: `n^2 (n-1)^2 / 2` for
/// nonneg and `prod_{t=0..=i} (n-t)^2 / i!` for the `i`-term families
/// (`i = 2` for the triple family).
pub fn formula_count(family: Family, n: usize) -> Option<u128> {
    let term = |i: usize| -> u128 {
        let prod: u128 = (0..=i).map(|t| (n as u128).saturating_sub(t as u128).pow(2)).product();
        prod / crate::perm::factorial(i)
    };
    match family {
        Family::Nonneg => Some(term(1) / 2),
        Family::Triple => Some(term(2)),
        Family::Mterm { m } => Some(term(m)),
        Family::BoxSamples { .. } => None,
    }
}

/// Total of the closed-form facet count: the nonneg term plus the terms `i = 2..=n-3`.
pub fn total_formula_count(n: usize) -> u128 {
    let nonneg = formula_count(Family::Nonneg, n).unwrap_or(0);
    nonneg + (2..=n.saturating_sub(3)).map(|i| formula_count(Family::Mterm { m: i }, n).unwrap_or(0)).sum::<u128>()
}

/// A seeded random inequality with every weight in `[-3, 3]` and `beta` in `[-5, 5]`.
pub fn random_inequality<R: Rng>(n: usize, rng: &mut R) -> GenericInequality {
    loop {
        let terms: Vec<((usize, usize), i64)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|c| (c, rng.gen_range(-3..=3))).collect();
        let beta = rng.gen_range(-5..=5);
        if let Ok(g) = GenericInequality::new(n, terms, beta) {
            return g;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Invalid,
    ValidNotSupporting,
    Face,
    Facet,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Invalid => "invalid",
            Verdict::ValidNotSupporting => "valid-not-supporting",
            Verdict::Face => "face",
            Verdict::Facet => "facet",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetCertificate {
    pub inequality: LinearInequality,
    pub n: usize,
    pub valid: bool,
    /// Smallest value over all vertices (of the gcd-normalised integer form).
    pub min_value: i64,
    pub tight_count: usize,
    /// Affine dimension of the tight vertices; absent when none is tight.
    pub tight_affine_dim: Option<usize>,
    pub polytope_dim: usize,
    pub verdict: Verdict,
    /// Tight at every vertex, so the inequality is implied by the affine hull.
    pub degenerate: bool,
    pub mode: RankMode,
}

impl FacetCertificate {
    pub fn is_facet(&self) -> bool {
        self.verdict == Verdict::Facet
    }
}

fn polytope_dimension(n: usize) -> Result<usize> {
    if n >= 4 {
        Ok(dimension_formula(n)? as usize)
    } else {
        crate::affine_hull::affine_dimension(n, RankMode::Exact)
    }
}

/// Evaluates on every vertex and computes the affine dimension of the tight set.
pub fn certify(ineq: &LinearInequality, mode: RankMode) -> Result<FacetCertificate> {
    let n = ineq.n;
    check_range("certification", n, 1, MAX_AFFINE_N)?;
    let form = ineq.integer_form()?;
    let space = CoordSpace::new(n);
    let perms: Vec<Permutation> = enumerate_permutations(n)?.collect();
    let values: Vec<i64> = perms.par_iter().map(|s| form.value_at_permutation(&space, s)).collect();
    let min_value = values.iter().copied().min().expect("n! >= 1 vertices");
    let valid = min_value >= 0;
    let tight: Vec<Vec<i64>> = perms
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v == 0)
        .map(|(s, _)| crate::perm::vertex(s).canonical_vector())
        .collect();
    let polytope_dim = polytope_dimension(n)?;
    let tight_affine_dim = if tight.is_empty() { None } else { Some(linalg::affine_rank_i64(&tight, mode)?) };
    let degenerate = tight.len() == perms.len();
    let verdict = if !valid {
        Verdict::Invalid
    } else if tight.is_empty() || degenerate {
        Verdict::ValidNotSupporting
    } else if tight_affine_dim == Some(polytope_dim - 1) {
        Verdict::Facet
    } else {
        Verdict::Face
    };
    Ok(FacetCertificate {
        inequality: ineq.clone(),
        n,
        valid,
        min_value,
        tight_count: tight.len(),
        tight_affine_dim,
        polytope_dim,
        verdict,
        degenerate,
        mode,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "matches")]
pub enum VertexClass {
    /// Tight.
    S,
    /// `sigma(k) = l` and no `i_r -> j_r`.
    T1,
    /// `sigma(k) = l` and `x >= 3` matches.
    T2x(usize),
    /// `sigma(k) != l` and `x >= 2` matches.
    T3x(usize),
}

/// Position of a vertex relative to an m-term inequality.
pub fn classify_vertex(spec: &MtermSpec, sigma: &Permutation) -> VertexClass {
    let x = spec.matches(sigma);
    let hits = sigma.maps(spec.k, spec.l);
    let s = x as i64 - i64::from(hits);
    match (hits, x) {
        _ if s == 0 || s == 1 => VertexClass::S,
        (true, 0) => VertexClass::T1,
        (true, x) if x >= 3 => VertexClass::T2x(x),
        (false, x) if x >= 2 => VertexClass::T3x(x),
        _ => unreachable!("s = {s} is either tight or in one of the T classes"),
    }
}

/// Interchange form of a linear inequality; indices 1-based, values `"num/den"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearRecord {
    pub n: usize,
    /// `(i, j, value)` for `Y_{ij,ij}`.
    pub diag: Vec<(usize, usize, String)>,
    /// `(i, j, k, l, value)` for `Y_{ij,kl}` with `(i, j)` before `(k, l)` row-major.
    pub off: Vec<(usize, usize, usize, usize, String)>,
    pub constant: String,
}

impl From<LinearInequality> for LinearRecord {
    fn from(x: LinearInequality) -> Self {
        let n = x.n;
        LinearRecord {
            n,
            diag: x.diag.iter().map(|(&(i, j), v)| (i + 1, j + 1, format_rational(v))).collect(),
            off: x
                .off
                .iter()
                .map(|(&(p, q), v)| {
                    let (a, b) = (PairIndex::from_flat(n, p), PairIndex::from_flat(n, q));
                    (a.i + 1, a.j + 1, b.i + 1, b.j + 1, format_rational(v))
                })
                .collect(),
            constant: format_rational(&x.constant),
        }
    }
}

fn one_based(n: usize, x: usize) -> Result<usize> {
    if x == 0 || x > n {
        return Err(Error::Argument(format!("index {x} outside 1..={n}")));
    }
    Ok(x - 1)
}

impl TryFrom<LinearRecord> for LinearInequality {
    type Error = Error;

    fn try_from(r: LinearRecord) -> Result<Self> {
        let n = r.n;
        let mut diag = BTreeMap::new();
        for (i, j, v) in &r.diag {
            *diag.entry((one_based(n, *i)?, one_based(n, *j)?)).or_insert_with(Rational::zero) += parse_rational(v)?;
        }
        let mut off = BTreeMap::new();
        for (i, j, k, l, v) in &r.off {
            let p = one_based(n, *i)? * n + one_based(n, *j)?;
            let q = one_based(n, *k)? * n + one_based(n, *l)?;
            let value = parse_rational(v)?;
            if p == q {
                *diag.entry((p / n, p % n)).or_insert_with(Rational::zero) += value;
            } else {
                *off.entry((p.min(q), p.max(q))).or_insert_with(Rational::zero) += value;
            }
        }
        LinearInequality::new(n, diag, off, parse_rational(&r.constant)?)
    }
}

/// Interchange form of an inequality: the coefficient form, the linear form, or both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<i64>,
    /// `(i, j, value)`, 1-based.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<(usize, usize, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearRecord>,
}

impl InequalityRecord {
    pub fn from_generic(g: &GenericInequality, with_linear: bool) -> Self {
        InequalityRecord {
            n: g.n,
            beta: Some(g.beta),
            coeffs: g.coeffs.iter().map(|(&(i, j), &c)| (i + 1, j + 1, c)).collect(),
            linear: with_linear.then(|| expand_generic(g).into()),
        }
    }

    pub fn generic(&self) -> Result<Option<GenericInequality>> {
        let Some(beta) = self.beta else {
            return Ok(None);
        };
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for &(i, j, c) in &self.coeffs {
            terms.push(((one_based(self.n, i)?, one_based(self.n, j)?), c));
        }
        GenericInequality::new(self.n, terms, beta).map(Some)
    }

    /// The linear form: taken from `linear` when present, else expanded from
    /// the coefficient form. When both are present they must agree.
    pub fn linear_form(&self) -> Result<LinearInequality> {
        let generic = self.generic()?;
        match (&self.linear, generic) {
            (Some(rec), g) => {
                if rec.n != self.n {
                    return Err(Error::Argument(format!("linear form has n = {}, record has n = {}", rec.n, self.n)));
                }
                let lin = LinearInequality::try_from(rec.clone())?;
                if let Some(g) = g {
                    if expand_generic(&g) != lin {
                        return Err(Error::Argument("linear form disagrees with the expanded coefficient form".into()));
                    }
                }
                Ok(lin)
            }
            (None, Some(g)) => Ok(expand_generic(&g)),
            (None, None) => Err(Error::Argument("record needs beta and coeffs, or a linear form".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::vertex;
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn flat(n: usize, i: usize, j: usize) -> usize {
        i * n + j
    }

    /// Test oracle: evaluates the linear form on the full vertex matrix by
    /// summing over ordered pairs, independent of the canonical packing.
    fn oracle_value(lin: &LinearInequality, sigma: &Permutation) -> Rational {
        let v = vertex(sigma);
        let mut acc = lin.constant.clone();
        for (a, b) in v.ordered_ones() {
            if a == b {
                acc += lin.coefficient(a, a);
            } else {
                // each canonical coefficient covers both mirror positions
                acc += lin.coefficient(a, b) / q(2);
            }
        }
        acc
    }

    #[test]
    fn nonneg_expansion() {
        let n = 6;
        let g = make_nonneg(n, 0, 1, 2, 3).unwrap();
        let lin = expand_generic(&g);
        assert!(lin.diag.is_empty());
        assert!(lin.constant.is_zero());
        assert_eq!(lin.off.len(), 1);
        assert_eq!(lin.off[&(flat(n, 0, 1), flat(n, 2, 3))], q(2));
        assert_eq!(lin.render(), "2Y_{12,34} >= 0");
    }

    #[test]
    fn single_cell_is_trivial() {
        let g = GenericInequality::new(4, [((1, 2), 1)], 1).unwrap();
        assert!(expand_generic(&g).is_trivial());
        let boxed = make_box(4, &[0], &[], &[], &[0], 1).unwrap();
        assert!(expand_generic(&boxed).is_trivial());
        assert!(GenericInequality::new(4, [((1, 2), 0)], 1).is_err());
    }

    #[test]
    fn mterm_expansion_reduces_to_pair_form() {
        let n = 6;
        let spec = MtermSpec::new(n, vec![(0, 0), (1, 1), (2, 2)], 3, 3).unwrap();
        let lin = expand_generic(&spec.inequality()).without_pinned();
        // 2 (Y_{kl,kl} + sum_{r<s} Y_{r,s} - sum_r Y_{r,kl}) >= 0
        let kl = flat(n, 3, 3);
        let mut diag = BTreeMap::new();
        diag.insert((3, 3), q(2));
        let mut off = BTreeMap::new();
        let cells: Vec<usize> = spec.pairs.iter().map(|&(i, j)| flat(n, i, j)).collect();
        for (a, &p) in cells.iter().enumerate() {
            for &r in &cells[a + 1..] {
                off.insert((p, r), q(2));
            }
            off.insert((p.min(kl), p.max(kl)), q(-2));
        }
        assert_eq!(lin, LinearInequality::new(n, diag, off, q(0)).unwrap());
    }

    #[test]
    fn triple_expansion_matches_statement_on_hull() {
        let n = 6;
        let (p1, q1, p2, q2, k, l) = (0, 0, 1, 1, 2, 2);
        let lin = expand_generic(&make_triple(n, p1, q1, p2, q2, k, l).unwrap()).without_pinned();
        let kl = flat(n, k, l);
        let mut diag = BTreeMap::new();
        diag.insert((k, l), q(2));
        let mut off = BTreeMap::new();
        off.insert((flat(n, p1, q1), flat(n, p2, q2)), q(2));
        for c in [flat(n, p1, q1), flat(n, p2, q2), flat(n, p1, q2)] {
            off.insert((c.min(kl), c.max(kl)), q(-2));
        }
        assert_eq!(lin, LinearInequality::new(n, diag, off, q(0)).unwrap());
    }

    #[test]
    fn evaluation_examples() {
        let g = GenericInequality::new(4, [((0, 0), 1), ((1, 1), 1)], 2).unwrap();
        assert_eq!(evaluate_at_vertex(&g, &Permutation::identity(4)).unwrap(), 0);
        let g = GenericInequality::new(4, [((0, 0), 1), ((1, 1), 1)], 1).unwrap();
        assert_eq!(evaluate_at_vertex(&g, &Permutation::identity(4)).unwrap(), 2);
        assert!(evaluate_at_vertex(&g, &Permutation::identity(3)).is_err());
    }

    #[test]
    fn family_constraints() {
        assert!(matches!(make_nonneg(4, 0, 1, 0, 2), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_nonneg(4, 0, 1, 2, 1), Err(Error::FamilyConstraint(_))));
        assert!(make_nonneg(4, 0, 1, 4, 2).is_err());
        assert!(matches!(make_triple(6, 0, 0, 0, 1, 2, 2), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_triple(6, 0, 0, 1, 1, 2, 0), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_mterm(6, vec![(0, 0), (1, 1)], 3, 3), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_mterm(6, vec![(0, 0), (1, 1), (2, 2), (4, 4)], 3, 3), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_mterm(6, vec![(0, 0), (1, 1), (3, 2)], 3, 3), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_box(4, &[0], &[0], &[1], &[2], 1), Err(Error::FamilyConstraint(_))));
        assert!(matches!(make_box(4, &[], &[], &[1], &[2], 1), Err(Error::FamilyConstraint(_))));
    }

    #[test]
    fn family_counts() {
        assert_eq!(enumerate_family(Family::Nonneg, 4).unwrap().len(), 72);
        assert_eq!(enumerate_family(Family::Nonneg, 6).unwrap().len(), 450);
        assert_eq!(enumerate_family(Family::Mterm { m: 3 }, 6).unwrap().len(), 21600);
        assert_eq!(enumerate_family(Family::Triple, 6).unwrap().len(), 14400);
        assert_eq!(formula_count(Family::Nonneg, 6), Some(450));
        assert_eq!(formula_count(Family::Mterm { m: 3 }, 6), Some(21600));
        assert_eq!(formula_count(Family::Triple, 6), Some(7200));
        assert_eq!(total_formula_count(6), 450 + 7200 + 21600);
        assert!(matches!(enumerate_family(Family::Triple, 5), Err(Error::Unsupported(_))));
        assert!(enumerate_family(Family::Mterm { m: 4 }, 6).is_err());
        let boxes = enumerate_family(Family::BoxSamples { count: 25, seed: 3 }, 5).unwrap();
        assert!(!boxes.is_empty() && boxes.len() <= 25);
        assert_eq!(boxes, enumerate_family(Family::BoxSamples { count: 25, seed: 3 }, 5).unwrap());
    }

    #[test]
    fn mterm_valid_on_all_vertices() {
        let g = make_mterm(6, vec![(0, 1), (1, 2), (2, 0)], 4, 5).unwrap();
        for s in enumerate_permutations(6).unwrap() {
            assert!(evaluate_at_vertex(&g, &s).unwrap() >= 0);
        }
    }

    #[test]
    fn certify_nonneg_n4_and_n5() {
        let c = certify(&expand_generic(&make_nonneg(5, 0, 0, 1, 1).unwrap()), RankMode::modp()).unwrap();
        assert_eq!(c.tight_count, 120 - 6);
        assert_eq!(c.tight_affine_dim, Some(76));
        assert_eq!(c.verdict, Verdict::Facet);
        let c = certify(&expand_generic(&make_nonneg(4, 0, 1, 2, 3).unwrap()), RankMode::Exact).unwrap();
        assert_eq!(c.polytope_dim, 22);
        assert_eq!(c.tight_affine_dim, Some(21));
        assert!(c.is_facet());
    }

    #[test]
    fn certify_trivial_and_invalid() {
        let zero = LinearInequality::new(4, BTreeMap::new(), BTreeMap::new(), q(0)).unwrap();
        let c = certify(&zero, RankMode::Exact).unwrap();
        assert!(c.valid && c.degenerate);
        assert_eq!(c.tight_count, 24);
        assert_eq!(c.verdict, Verdict::ValidNotSupporting);
        let mut off = BTreeMap::new();
        off.insert((flat(4, 0, 0), flat(4, 1, 1)), q(-1));
        let neg = LinearInequality::new(4, BTreeMap::new(), off, q(0)).unwrap();
        assert_eq!(certify(&neg, RankMode::Exact).unwrap().verdict, Verdict::Invalid);
        let slack = LinearInequality::new(4, BTreeMap::new(), BTreeMap::new(), q(3)).unwrap();
        let c = certify(&slack, RankMode::Exact).unwrap();
        assert_eq!((c.verdict, c.tight_count, c.tight_affine_dim), (Verdict::ValidNotSupporting, 0, None));
        assert!(certify(&expand_generic(&make_nonneg(8, 0, 0, 1, 1).unwrap()), RankMode::modp()).is_err());
    }

    #[test]
    fn classification_partitions_vertices() {
        let spec = MtermSpec::new(6, vec![(0, 1), (1, 2), (2, 0)], 4, 5).unwrap();
        let g = spec.inequality();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for s in enumerate_permutations(6).unwrap() {
            let class = classify_vertex(&spec, &s);
            let tight = evaluate_at_vertex(&g, &s).unwrap() == 0;
            assert_eq!(tight, class == VertexClass::S);
            let x = spec.matches(&s);
            let hit = s.maps(4, 5);
            match class {
                VertexClass::T1 => assert!(hit && x == 0),
                VertexClass::T2x(c) => assert!(hit && c == x && x >= 3),
                VertexClass::T3x(c) => assert!(!hit && c == x && x >= 2),
                VertexClass::S => {}
            }
            *counts.entry(format!("{class:?}")).or_default() += 1;
        }
        assert_eq!(counts.values().sum::<usize>(), 720);
        assert!(counts.contains_key("T1"));
        assert!(counts.keys().any(|k| k.starts_with("T3x")));
        let identity_like = Permutation::new(vec![1, 2, 0, 3, 5, 4]).unwrap();
        assert_eq!(classify_vertex(&spec, &identity_like), VertexClass::T2x(3));
    }

    #[test]
    fn record_round_trip() {
        let g = make_triple(6, 0, 1, 2, 3, 4, 5).unwrap();
        let rec = InequalityRecord::from_generic(&g, true);
        let text = serde_json::to_string(&rec).unwrap();
        let back: InequalityRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.generic().unwrap(), Some(g.clone()));
        assert_eq!(back.linear_form().unwrap(), expand_generic(&g));
        let lin_only = InequalityRecord { beta: None, coeffs: vec![], ..back.clone() };
        assert_eq!(lin_only.linear_form().unwrap(), expand_generic(&g));
        let mut tampered = back;
        tampered.beta = Some(2);
        assert!(tampered.linear_form().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn quadratic_matches_linear_form(seed in any::<u64>(), n in 3usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_inequality(n, &mut rng);
            let lin = expand_generic(&g);
            let form = lin.integer_form().unwrap();
            let space = CoordSpace::new(n);
            for s in enumerate_permutations(n).unwrap() {
                let fast = evaluate_at_vertex(&g, &s).unwrap();
                prop_assert!(fast >= 0);
                prop_assert_eq!(lin.value_at_permutation(&s), q(fast));
                prop_assert_eq!(oracle_value(&lin, &s), q(fast));
                let t = g.weight(&s) - g.beta();
                prop_assert_eq!(fast == 0, t == 0 || t == -1);
                let scaled = form.value_at_permutation(&space, &s);
                prop_assert!(scaled >= 0 && (scaled == 0) == (fast == 0));
            }
        }
    }
}
