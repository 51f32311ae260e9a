//! Structural identities over second-order vertices: the signed twelve-term
//! cancellation, and connectivity of transposition graphs on constrained
//! permutation sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::perm::{enumerate_permutations, vertex, Permutation};

/// Largest `n` for which transposition graphs are built.
pub const MAX_GRAPH_N: usize = 8;

/// Three indices whose images are permuted, and two further indices swapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaConfig {
    pub base: Permutation,
    pub k: [usize; 3],
    pub x: usize,
    pub y: usize,
}

impl SigmaConfig {
    pub fn new(base: Permutation, k: [usize; 3], x: usize, y: usize) -> Result<Self> {
        let n = base.n();
        if n < 5 {
            return Err(Error::Config(format!("needs n >= 5, got {n}")));
        }
        let all = [k[0], k[1], k[2], x, y];
        if let Some(bad) = all.iter().find(|&&v| v >= n) {
            return Err(Error::Config(format!("index {} outside 1..={n}", bad + 1)));
        }
        let distinct: BTreeSet<usize> = all.iter().copied().collect();
        if distinct.len() != 5 {
            return Err(Error::Config(format!(
                "k1, k2, k3, x, y must be five distinct indices, got {:?}",
                all.map(|v| v + 1)
            )));
        }
        Ok(Self { base, k, x, y })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Images `(a, b, c)` of `k1, k2, k3` under the base permutation.
    pub fn images(&self) -> [usize; 3] {
        self.k.map(|i| self.base.apply(i))
    }
}

/// The six arrangements of `(a, b, c)` in the order
/// `abc, acb, bac, bca, cab, cba`, as positions into `(a, b, c)`.
const ARRANGEMENTS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `sigma_1..sigma_6` followed by their `(x y)` transpositions, each with its parity.
pub fn build_sigma_set(cfg: &SigmaConfig) -> Vec<(i8, Permutation)> {
    let abc = cfg.images();
    let mut firsts = Vec::with_capacity(6);
    for arr in ARRANGEMENTS {
        let mut image = cfg.base.image().to_vec();
        for (slot, &pick) in arr.iter().enumerate() {
            image[cfg.k[slot]] = abc[pick];
        }
        firsts.push(Permutation::new(image).expect("rearranging images keeps a bijection"));
    }
    let seconds: Vec<Permutation> =
        firsts.iter().map(|s| s.apply_transposition(cfg.x, cfg.y).expect("x != y checked in config")).collect();
    firsts.into_iter().chain(seconds).map(|s| (s.parity(), s)).collect()
}

/// Nonzero entries (canonical pairs) of `sum sign * vertex(sigma)`.
pub fn signed_sum(terms: &[(i8, Permutation)]) -> BTreeMap<(usize, usize), i64> {
    let mut acc: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (sign, s) in terms {
        for &e in vertex(s).entries() {
            *acc.entry(e).or_insert(0) += i64::from(*sign);
        }
    }
    acc.retain(|_, v| *v != 0);
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub holds: bool,
    /// Nonzero residual entries as 1-based `(p, q, value)` over canonical pairs.
    pub residual: Vec<(usize, usize, i64)>,
}

pub fn verify_zero_identity(cfg: &SigmaConfig) -> ZeroCheck {
    let residual: Vec<(usize, usize, i64)> =
        signed_sum(&build_sigma_set(cfg)).into_iter().map(|((p, q), v)| (p + 1, q + 1, v)).collect();
    ZeroCheck { holds: residual.is_empty(), residual }
}

/// A uniformly random base permutation with random distinct `k1, k2, k3, x, y`.
pub fn random_config<R: Rng>(n: usize, rng: &mut R) -> Result<SigmaConfig> {
    check_range("sigma config", n, 5, usize::MAX)?;
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    SigmaConfig::new(Permutation::new(image)?, [idx[0], idx[1], idx[2]], idx[3], idx[4])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// Set-valued forbids whose union has at most `n - a - b` values.
    Lemma1,
    /// One forbidden value per constrained index, values distinct, `a + b < n`.
    Lemma2,
    /// No side conditions.
    Free,
}

impl fmt::Display for GraphMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphMode::Lemma1 => "lemma1",
            GraphMode::Lemma2 => "lemma2",
            GraphMode::Free => "free",
        })
    }
}

/// Permutations with `sigma(i) = v` for each fixed `(i, v)` and
/// `sigma(i) not in I` for each forbidden `(i, I)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranspositionGraphSpec {
    pub n: usize,
    pub fixed: Vec<(usize, usize)>,
    pub forbidden: Vec<(usize, BTreeSet<usize>)>,
    pub mode: GraphMode,
}

/// Position and value relabeling taking a spec to its canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    /// `positions[new] = old`.
    pub positions: Vec<usize>,
    /// `values[old] = new`.
    pub values: Vec<usize>,
}

impl Relabeling {
    /// `sigma` in canonical labels.
    pub fn apply(&self, sigma: &Permutation) -> Permutation {
        let image = self.positions.iter().map(|&old| self.values[sigma.apply(old)]).collect();
        Permutation::new(image).expect("relabeling is a bijection")
    }

    /// Inverse of [`Relabeling::apply`].
    pub fn undo(&self, sigma: &Permutation) -> Permutation {
        let n = self.positions.len();
        let mut value_back = vec![0; n];
        for (old, &new) in self.values.iter().enumerate() {
            value_back[new] = old;
        }
        let mut image = vec![0; n];
        for (new, &old) in self.positions.iter().enumerate() {
            image[old] = value_back[sigma.apply(new)];
        }
        Permutation::new(image).expect("relabeling is a bijection")
    }
}

impl TranspositionGraphSpec {
    /// Checks ranges, consistency, and the side conditions of `mode`.
    /// Forbidden values that coincide with a fixed image can never be taken
    /// by the constrained index and are dropped.
    pub fn new(
        n: usize,
        fixed: Vec<(usize, usize)>,
        forbidden: Vec<(usize, BTreeSet<usize>)>,
        mode: GraphMode,
    ) -> Result<Self> {
        check_range("transposition graph", n, 1, MAX_GRAPH_N)?;
        let out_of_range = |v: usize| v >= n;
        let mut positions = BTreeSet::new();
        let mut images = BTreeSet::new();
        for &(i, v) in &fixed {
            if out_of_range(i) || out_of_range(v) {
                return Err(Error::Config(format!("fixed ({}, {}) outside 1..={n}", i + 1, v + 1)));
            }
            if !positions.insert(i) {
                return Err(Error::Config(format!("index {} constrained twice", i + 1)));
            }
            if !images.insert(v) {
                return Err(Error::Config(format!("value {} fixed twice", v + 1)));
            }
        }
        let mut cleaned = Vec::with_capacity(forbidden.len());
        for (i, set) in forbidden {
            if out_of_range(i) || set.iter().any(|&v| out_of_range(v)) {
                return Err(Error::Config(format!("forbidden entry for index {} outside 1..={n}", i + 1)));
            }
            if !positions.insert(i) {
                return Err(Error::Config(format!("index {} constrained twice", i + 1)));
            }
            let set: BTreeSet<usize> = set.difference(&images).copied().collect();
            cleaned.push((i, set));
        }
        let spec = Self { n, fixed, forbidden: cleaned, mode };
        spec.check_side_conditions()?;
        Ok(spec)
    }

    pub fn a(&self) -> usize {
        self.fixed.len()
    }

    pub fn b(&self) -> usize {
        self.forbidden.len()
    }

    fn forbidden_union(&self) -> BTreeSet<usize> {
        self.forbidden.iter().flat_map(|(_, s)| s.iter().copied()).collect()
    }

    fn check_side_conditions(&self) -> Result<()> {
        let (n, a, b) = (self.n, self.a(), self.b());
        match self.mode {
            GraphMode::Free => Ok(()),
            GraphMode::Lemma1 => {
                let union = self.forbidden_union().len();
                if a + b + union > n {
                    return Err(Error::Config(format!(
                        "lemma1 needs |union of forbidden sets| <= n - a - b, got {union} > {n} - {a} - {b}"
                    )));
                }
                Ok(())
            }
            GraphMode::Lemma2 => {
                if a + b >= n {
                    return Err(Error::Config(format!("lemma2 needs a + b < n, got {a} + {b} >= {n}")));
                }
                let mut seen = BTreeSet::new();
                for (i, set) in &self.forbidden {
                    if set.len() != 1 {
                        return Err(Error::Config(format!(
                            "lemma2 needs exactly one forbidden value per index; index {} has {} (after dropping fixed images)",
                            i + 1,
                            set.len()
                        )));
                    }
                    let v = *set.iter().next().expect("one element");
                    if !seen.insert(v) {
                        return Err(Error::Config(format!(
                            "lemma2 forbidden values must be distinct, {} repeats",
                            v + 1
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn admits(&self, sigma: &Permutation) -> bool {
        self.fixed.iter().all(|&(i, v)| sigma.apply(i) == v)
            && self.forbidden.iter().all(|(i, set)| !set.contains(&sigma.apply(*i)))
    }

    /// Relabeling that puts fixed indices first (mapped to themselves), then
    /// the forbidden indices, then the rest. For lemma1 the forbidden values
    /// move to the top of the range; for lemma2 each forbidden value avoids
    /// its own index. In both modes the identity then satisfies the spec.
    pub fn relabeling(&self) -> Relabeling {
        let n = self.n;
        let (a, b) = (self.a(), self.b());
        let mut positions: Vec<usize> = self.fixed.iter().map(|&(i, _)| i).collect();
        positions.extend(self.forbidden.iter().map(|(i, _)| *i));
        let used: BTreeSet<usize> = positions.iter().copied().collect();
        positions.extend((0..n).filter(|i| !used.contains(i)));

        let mut values = vec![usize::MAX; n];
        for (slot, &(_, v)) in self.fixed.iter().enumerate() {
            values[v] = slot;
        }
        let mut taken = vec![false; n];
        match self.mode {
            GraphMode::Lemma2 if b > 0 => {
                // forbidden value of slot a+t goes to a + (t+1) mod b, or a+1 when b = 1
                for (t, (_, set)) in self.forbidden.iter().enumerate() {
                    let v = *set.iter().next().expect("lemma2 forbids one value");
                    let target = if b == 1 { a + 1 } else { a + (t + 1) % b };
                    values[v] = target;
                    taken[target] = true;
                }
            }
            GraphMode::Lemma1 | GraphMode::Free => {
                let union = self.forbidden_union();
                let top = n - union.len().min(n - a);
                for (t, &v) in union.iter().enumerate() {
                    if values[v] == usize::MAX && top + t < n {
                        values[v] = top + t;
                        taken[top + t] = true;
                    }
                }
            }
            GraphMode::Lemma2 => {}
        }
        let free_targets: Vec<usize> = (a..n).filter(|&t| !taken[t]).collect();
        let mut rest = free_targets.into_iter();
        for v in values.iter_mut() {
            if *v == usize::MAX {
                *v = rest.next().expect("as many targets as unassigned values");
            }
        }
        Relabeling { positions, values }
    }

    /// The spec in canonical labels (see [`TranspositionGraphSpec::relabeling`]).
    pub fn canonical(&self) -> (Self, Relabeling) {
        let r = self.relabeling();
        let mut new_pos = vec![0; self.n];
        for (new, &old) in r.positions.iter().enumerate() {
            new_pos[old] = new;
        }
        let fixed = self.fixed.iter().map(|&(i, v)| (new_pos[i], r.values[v])).collect();
        let forbidden =
            self.forbidden.iter().map(|(i, set)| (new_pos[*i], set.iter().map(|&v| r.values[v]).collect())).collect();
        (Self { n: self.n, fixed, forbidden, mode: self.mode }, r)
    }
}

/// Interchange form of a spec; indices and values 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub n: usize,
    pub mode: GraphMode,
    #[serde(default)]
    pub fixed: Vec<(usize, usize)>,
    #[serde(default)]
    pub forbidden: Vec<(usize, Vec<usize>)>,
}

impl From<&TranspositionGraphSpec> for SpecRecord {
    fn from(s: &TranspositionGraphSpec) -> Self {
        SpecRecord {
            n: s.n,
            mode: s.mode,
            fixed: s.fixed.iter().map(|&(i, v)| (i + 1, v + 1)).collect(),
            forbidden: s.forbidden.iter().map(|(i, set)| (i + 1, set.iter().map(|v| v + 1).collect())).collect(),
        }
    }
}

impl TryFrom<SpecRecord> for TranspositionGraphSpec {
    type Error = Error;

    fn try_from(r: SpecRecord) -> Result<Self> {
        let dec = |x: usize| {
            x.checked_sub(1).filter(|&v| v < r.n).ok_or_else(|| Error::Config(format!("index {x} outside 1..={}", r.n)))
        };
        let fixed = r.fixed.iter().map(|&(i, v)| Ok((dec(i)?, dec(v)?))).collect::<Result<Vec<_>>>()?;
        let forbidden = r
            .forbidden
            .iter()
            .map(|(i, set)| Ok((dec(*i)?, set.iter().map(|&v| dec(v)).collect::<Result<BTreeSet<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        TranspositionGraphSpec::new(r.n, fixed, forbidden, r.mode)
    }
}

/// Undirected graph on permutations; edges join permutations one
/// transposition apart.
#[derive(Clone, Debug, Default)]
pub struct TranspositionGraph {
    pub nodes: Vec<Permutation>,
    pub adjacency: Vec<Vec<usize>>,
}

impl TranspositionGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn index_of(&self, sigma: &Permutation) -> Option<usize> {
        self.nodes.iter().position(|s| s == sigma)
    }

    /// Component label of each node, numbered in order of first node.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// Graph on all permutations of size `n` accepted by `keep`.
pub fn build_graph_where(n: usize, keep: impl Fn(&Permutation) -> bool) -> Result<TranspositionGraph> {
    check_range("transposition graph", n, 1, MAX_GRAPH_N)?;
    let nodes: Vec<Permutation> = enumerate_permutations(n)?.filter(|s| keep(s)).collect();
    let index: HashMap<&[usize], usize> = nodes.iter().enumerate().map(|(k, s)| (s.image(), k)).collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (u, s) in nodes.iter().enumerate() {
        let mut image = s.image().to_vec();
        for x in 0..n {
            for y in x + 1..n {
                image.swap(x, y);
                if let Some(&w) = index.get(image.as_slice()) {
                    adjacency[u].push(w);
                }
                image.swap(x, y);
            }
        }
    }
    Ok(TranspositionGraph { nodes, adjacency })
}

/// Graph of the spec, built in canonical labels for lemma modes.
pub fn build_transposition_graph(spec: &TranspositionGraphSpec) -> Result<TranspositionGraph> {
    match spec.mode {
        GraphMode::Free => build_graph_where(spec.n, |s| spec.admits(s)),
        _ => {
            let (canonical, _) = spec.canonical();
            build_graph_where(spec.n, |s| canonical.admits(s))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connectivity {
    pub connected: bool,
    pub components: usize,
}

/// An empty graph counts as connected with zero components.
pub fn is_connected(graph: &TranspositionGraph) -> Connectivity {
    let components = graph.components().into_iter().max().map_or(0, |m| m + 1);
    Connectivity { connected: components <= 1, components }
}

/// Path from `start` to the identity inside a canonical lemma2 spec, one
/// transposition per step. Returns every permutation visited, `start` first.
pub fn lemma2_witness_path(canonical: &TranspositionGraphSpec, start: &Permutation) -> Result<Vec<Permutation>> {
    if canonical.mode != GraphMode::Lemma2 {
        return Err(Error::Config("witness paths are defined for lemma2 specs".into()));
    }
    let n = canonical.n;
    let (a, b) = (canonical.a(), canonical.b());
    if !canonical.admits(start) || !canonical.admits(&Permutation::identity(n)) {
        return Err(Error::Config("start and identity must both satisfy the canonical spec".into()));
    }
    let forbid: Vec<Option<usize>> = (0..n)
        .map(|i| canonical.forbidden.iter().find(|(p, _)| *p == i).and_then(|(_, s)| s.iter().next().copied()))
        .collect();
    let mut path = vec![start.clone()];
    let mut sigma = start.clone();
    for t in a..n {
        if sigma.apply(t) == t {
            continue;
        }
        let k = sigma.inverse().apply(t);
        if k >= a + b || forbid[k] != Some(sigma.apply(t)) {
            sigma = sigma.apply_transposition(t, k)?;
            path.push(sigma.clone());
        } else {
            let j = (a + b..n)
                .find(|&j| j != t && j != k)
                .ok_or_else(|| Error::Verification("no unconstrained index available for the two-step move".into()))?;
            sigma = sigma.apply_transposition(j, k)?;
            path.push(sigma.clone());
            sigma = sigma.apply_transposition(t, j)?;
            path.push(sigma.clone());
        }
    }
    if let Some(bad) = path.iter().find(|s| !canonical.admits(s)) {
        return Err(Error::Verification(format!("witness path leaves the constrained set at {bad}")));
    }
    Ok(path)
}

/// A random spec satisfying the side conditions of `mode` (lemma1 or lemma2).
pub fn random_spec<R: Rng>(n: usize, mode: GraphMode, rng: &mut R) -> Result<TranspositionGraphSpec> {
    check_range("random spec", n, 2, MAX_GRAPH_N)?;
    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    let mut values: Vec<usize> = (0..n).collect();
    values.shuffle(rng);
    match mode {
        GraphMode::Lemma2 => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n - a);
            let fixed: Vec<(usize, usize)> = positions[..a].iter().copied().zip(values[..a].iter().copied()).collect();
            let mut rest: Vec<usize> = values[a..].to_vec();
            rest.shuffle(rng);
            let forbidden = positions[a..a + b].iter().zip(&rest).map(|(&i, &v)| (i, BTreeSet::from([v]))).collect();
            TranspositionGraphSpec::new(n, fixed, forbidden, mode)
        }
        GraphMode::Lemma1 => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..=n - a);
            let room = n - a - b;
            let fixed: Vec<(usize, usize)> = positions[..a].iter().copied().zip(values[..a].iter().copied()).collect();
            let union_size = rng.gen_range(0..=room);
            let pool: Vec<usize> = values[a..a + union_size].to_vec();
            let forbidden = positions[a..a + b]
                .iter()
                .map(|&i| (i, pool.iter().copied().filter(|_| rng.gen_bool(0.6)).collect()))
                .collect();
            TranspositionGraphSpec::new(n, fixed, forbidden, mode)
        }
        GraphMode::Free => Err(Error::Config("random specs are drawn for lemma modes only".into())),
    }
}

/// Outcome of checking the twelve-term identity on seeded random configurations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroSweep {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub held: usize,
    /// Configurations whose signed sum is nonzero.
    pub failures: Vec<SigmaConfig>,
}

/// Trial `t` draws its configuration from a generator seeded with `seed + t`.
pub fn zero_identity_sweep(n: usize, trials: usize, seed: u64) -> Result<ZeroSweep> {
    use rand::SeedableRng;
    use rayon::prelude::*;
    let configs = (0..trials)
        .map(|t| random_config(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64))))
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<SigmaConfig> = configs.into_par_iter().filter(|c| !verify_zero_identity(c).holds).collect();
    Ok(ZeroSweep { n, trials, seed, held: trials - failures.len(), failures })
}

/// The two vertex classes strictly satisfying the triple inequality at
/// `(p1, q1, p2, q2, k, l)`, and their transposition graph.
#[derive(Clone, Debug)]
pub struct TripleSplit {
    pub graph: TranspositionGraph,
    /// `sigma(p1) = q1, sigma(p2) = q2, sigma(k) != l`.
    pub first: Vec<usize>,
    /// `sigma(p1) not in {q1, q2}, sigma(p2) != q2, sigma(k) = l`.
    pub second: Vec<usize>,
}

pub fn triple_split(n: usize, p1: usize, q1: usize, p2: usize, q2: usize, k: usize, l: usize) -> Result<TripleSplit> {
    crate::facets::make_triple(n, p1, q1, p2, q2, k, l)?;
    let in_first = |s: &Permutation| s.maps(p1, q1) && s.maps(p2, q2) && !s.maps(k, l);
    let in_second = |s: &Permutation| !s.maps(p1, q1) && !s.maps(p1, q2) && !s.maps(p2, q2) && s.maps(k, l);
    let graph = build_graph_where(n, |s| in_first(s) || in_second(s))?;
    let first = (0..graph.nodes.len()).filter(|&u| in_first(&graph.nodes[u])).collect();
    let second = (0..graph.nodes.len()).filter(|&u| in_second(&graph.nodes[u])).collect();
    Ok(TripleSplit { graph, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facets::{evaluate_at_vertex, make_triple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_config() -> SigmaConfig {
        SigmaConfig::new(Permutation::identity(5), [0, 1, 2], 3, 4).unwrap()
    }

    #[test]
    fn sigma_set_shape() {
        let set = build_sigma_set(&example_config());
        assert_eq!(set.len(), 12);
        assert_eq!(set.iter().filter(|(s, _)| *s == 1).count(), 6);
        let perms: BTreeSet<&Permutation> = set.iter().map(|(_, s)| s).collect();
        assert_eq!(perms.len(), 12);
        let signs: Vec<i8> = set[..6].iter().map(|(s, _)| *s).collect();
        assert_eq!(signs, vec![1, -1, -1, 1, 1, -1]);
        for (t, (_, s)) in set[6..].iter().enumerate() {
            assert_eq!(*s, set[t].1.apply_transposition(3, 4).unwrap());
        }
        let cfg = SigmaConfig::new(Permutation::new(vec![4, 2, 0, 5, 1, 3]).unwrap(), [5, 1, 3], 0, 2).unwrap();
        let set = build_sigma_set(&cfg);
        let base = set[0].0;
        let rel: Vec<i8> = set[..6].iter().map(|(s, _)| s * base).collect();
        assert_eq!(rel, vec![1, -1, -1, 1, 1, -1]);
        let outside: Vec<usize> = (0..6).filter(|i| ![5, 1, 3, 0, 2].contains(i)).collect();
        for (_, s) in &set {
            for &i in &outside {
                assert_eq!(s.apply(i), cfg.base.apply(i));
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(matches!(SigmaConfig::new(Permutation::identity(4), [0, 1, 2], 3, 3), Err(Error::Config(_))));
        assert!(matches!(SigmaConfig::new(Permutation::identity(5), [0, 1, 2], 2, 4), Err(Error::Config(_))));
        assert!(SigmaConfig::new(Permutation::identity(5), [0, 1, 2], 3, 5).is_err());
    }

    #[test]
    fn zero_identity_holds_and_sign_flip_breaks_it() {
        assert!(verify_zero_identity(&example_config()).holds);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 5..=7 {
            for _ in 0..20 {
                let cfg = random_config(n, &mut rng).unwrap();
                let check = verify_zero_identity(&cfg);
                assert!(check.holds, "{cfg:?}: {:?}", check.residual);
            }
        }
        let mut set = build_sigma_set(&example_config());
        set[3].0 = -set[3].0;
        assert!(!signed_sum(&set).is_empty());
    }

    #[test]
    fn sweep_is_seed_determined() {
        let a = zero_identity_sweep(6, 30, 42).unwrap();
        assert_eq!((a.held, a.failures.len()), (30, 0));
        assert_eq!(a, zero_identity_sweep(6, 30, 42).unwrap());
        assert!(matches!(zero_identity_sweep(4, 1, 0), Err(Error::Size { .. })));
    }

    #[test]
    fn unconstrained_graph_is_connected() {
        let spec = TranspositionGraphSpec::new(4, vec![], vec![], GraphMode::Free).unwrap();
        let g = build_transposition_graph(&spec).unwrap();
        assert_eq!(g.nodes.len(), 24);
        assert_eq!(g.edge_count(), 24 * 6 / 2);
        assert_eq!(is_connected(&g), Connectivity { connected: true, components: 1 });
    }

    #[test]
    fn connectivity_examples() {
        let spec =
            TranspositionGraphSpec::new(5, vec![(0, 0)], vec![(1, BTreeSet::from([1]))], GraphMode::Lemma2).unwrap();
        assert!(is_connected(&build_transposition_graph(&spec).unwrap()).connected);
        let spec = TranspositionGraphSpec::new(
            6,
            vec![(0, 0)],
            vec![(1, BTreeSet::from([4, 5])), (2, BTreeSet::from([4, 5]))],
            GraphMode::Lemma1,
        )
        .unwrap();
        let g = build_transposition_graph(&spec).unwrap();
        assert!(is_connected(&g).connected);
        let one = TranspositionGraph { nodes: vec![Permutation::identity(2)], adjacency: vec![vec![]] };
        assert_eq!(is_connected(&one), Connectivity { connected: true, components: 1 });
        let two = TranspositionGraph {
            nodes: vec![Permutation::identity(3), Permutation::new(vec![1, 2, 0]).unwrap()],
            adjacency: vec![vec![], vec![]],
        };
        assert_eq!(is_connected(&two), Connectivity { connected: false, components: 2 });
        assert_eq!(is_connected(&TranspositionGraph::default()), Connectivity { connected: true, components: 0 });
    }

    #[test]
    fn side_conditions_enforced() {
        let too_many = vec![(1, BTreeSet::from([2, 3])), (2, BTreeSet::from([3]))];
        assert!(matches!(
            TranspositionGraphSpec::new(4, vec![(0, 0)], too_many.clone(), GraphMode::Lemma1),
            Err(Error::Config(_))
        ));
        assert!(TranspositionGraphSpec::new(4, vec![(0, 0)], too_many, GraphMode::Free).is_ok());
        let repeated = vec![(1, BTreeSet::from([2])), (2, BTreeSet::from([2]))];
        assert!(TranspositionGraphSpec::new(5, vec![], repeated, GraphMode::Lemma2).is_err());
        assert!(TranspositionGraphSpec::new(9, vec![], vec![], GraphMode::Free).is_err());
        assert!(TranspositionGraphSpec::new(4, vec![(0, 1), (0, 2)], vec![], GraphMode::Free).is_err());
        assert!(TranspositionGraphSpec::new(4, vec![(0, 1), (1, 1)], vec![], GraphMode::Free).is_err());
    }

    #[test]
    fn over_constrained_spec_can_disconnect() {
        // sigma(1) = 1 and no other fixed point: a + b = n breaks the lemma2 condition
        let forbids: Vec<(usize, BTreeSet<usize>)> = (1..4).map(|i| (i, BTreeSet::from([i]))).collect();
        assert!(TranspositionGraphSpec::new(4, vec![(0, 0)], forbids.clone(), GraphMode::Lemma2).is_err());
        let spec = TranspositionGraphSpec::new(4, vec![(0, 0)], forbids, GraphMode::Free).unwrap();
        let g = build_transposition_graph(&spec).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(is_connected(&g), Connectivity { connected: false, components: 2 });
    }

    #[test]
    fn relabeling_round_trip_and_identity_admitted() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mode in [GraphMode::Lemma1, GraphMode::Lemma2] {
            for _ in 0..30 {
                let spec = random_spec(6, mode, &mut rng).unwrap();
                let (canonical, r) = spec.canonical();
                assert!(canonical.admits(&Permutation::identity(6)), "{spec:?}");
                for s in enumerate_permutations(6).unwrap().step_by(37) {
                    assert_eq!(r.undo(&r.apply(&s)), s);
                    assert_eq!(spec.admits(&s), canonical.admits(&r.apply(&s)));
                }
                let direct = build_graph_where(6, |s| spec.admits(s)).unwrap();
                let relabeled = build_transposition_graph(&spec).unwrap();
                assert_eq!(direct.nodes.len(), relabeled.nodes.len());
                assert_eq!(direct.edge_count(), relabeled.edge_count());
                assert_eq!(is_connected(&direct), is_connected(&relabeled));
            }
        }
    }

    #[test]
    fn witness_paths_reach_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [5, 6] {
            for _ in 0..15 {
                let spec = random_spec(n, GraphMode::Lemma2, &mut rng).unwrap();
                let (canonical, _) = spec.canonical();
                let (a, b) = (canonical.a(), canonical.b());
                let g = build_transposition_graph(&spec).unwrap();
                for s in &g.nodes {
                    let path = lemma2_witness_path(&canonical, s).unwrap();
                    assert_eq!(path.last().unwrap(), &Permutation::identity(n));
                    assert!(path.len() - 1 <= 2 * b + (n - a - b).saturating_sub(1));
                    for w in path.windows(2) {
                        let diff = (0..n).filter(|&i| w[0].apply(i) != w[1].apply(i)).count();
                        assert_eq!(diff, 2);
                    }
                }
            }
        }
    }

    #[test]
    fn triple_split_has_two_components() {
        let (p1, q1, p2, q2, k, l) = (0, 0, 1, 1, 2, 2);
        let split = triple_split(6, p1, q1, p2, q2, k, l).unwrap();
        let g = make_triple(6, p1, q1, p2, q2, k, l).unwrap();
        let strict = enumerate_permutations(6).unwrap().filter(|s| evaluate_at_vertex(&g, s).unwrap() > 0).count();
        assert_eq!(split.graph.nodes.len(), strict);
        assert_eq!(split.first.len() + split.second.len(), strict);
        assert_eq!(is_connected(&split.graph), Connectivity { connected: false, components: 2 });
        let labels = split.graph.components();
        assert!(split.first.iter().all(|&u| labels[u] == labels[split.first[0]]));
        assert!(split.second.iter().all(|&u| labels[u] == labels[split.second[0]]));
    }

    #[test]
    fn spec_record_round_trip() {
        let spec =
            TranspositionGraphSpec::new(5, vec![(0, 0)], vec![(1, BTreeSet::from([1]))], GraphMode::Lemma2).unwrap();
        let text = serde_json::to_string(&SpecRecord::from(&spec)).unwrap();
        let back: SpecRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(TranspositionGraphSpec::try_from(back).unwrap(), spec);
        let bad: SpecRecord = serde_json::from_str(r#"{"n":5,"mode":"lemma2","fixed":[[0,1]]}"#).unwrap();
        assert!(TranspositionGraphSpec::try_from(bad).is_err());
    }
}
