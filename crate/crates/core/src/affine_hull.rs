//! The equation system cutting out the affine hull of the second-order
//! vertices, its dimension, and decoding of 0/1 solutions back to permutations.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{self, DenseMatrix, RankMode};
use crate::perm::{enumerate_permutations, factorial, vertex, CoordSpace, PairIndex, Permutation, SecondOrderVertex};

/// Largest `n` accepted by [`affine_dimension`].
pub const MAX_AFFINE_N: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// `Y_{p,q} = Y_{q,p}`; only emitted in full-coordinate mode.
    Symmetry,
    /// Two distinct pairs sharing a row or a column have product zero.
    ZeroBlock,
    /// A row or column of a block sums to the block's diagonal entry.
    RowSum,
    /// The diagonal, read as an `n x n` matrix, has unit row and column sums.
    DiagSum,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Symmetry => "symmetry",
            Provenance::ZeroBlock => "zero-block",
            Provenance::RowSum => "row-sum",
            Provenance::DiagSum => "diag-sum",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordMode {
    /// Variables are the canonical pairs `p <= q`.
    Canonical,
    /// Variables are all ordered pairs `(p, q)`.
    Full,
}

/// `sum coeffs[(p, q)] * Y_{p,q} = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    /// Keys are canonical in canonical mode and ordered in full mode; no zero values.
    pub coeffs: BTreeMap<(usize, usize), i64>,
    pub rhs: i64,
    pub provenance: Provenance,
}

impl Equation {
    fn new(
        terms: impl IntoIterator<Item = ((usize, usize), i64)>,
        rhs: i64,
        provenance: Provenance,
        mode: CoordMode,
    ) -> Self {
        let mut coeffs = BTreeMap::new();
        for ((p, q), c) in terms {
            let key = match mode {
                CoordMode::Canonical if p > q => (q, p),
                _ => (p, q),
            };
            *coeffs.entry(key).or_insert(0) += c;
        }
        coeffs.retain(|_, c| *c != 0);
        Self { coeffs, rhs, provenance }
    }

    /// Left-hand side evaluated on a vertex.
    pub fn lhs_at(&self, v: &SecondOrderVertex) -> i64 {
        self.coeffs.iter().map(|(&(p, q), &c)| c * i64::from(v.get(p, q))).sum()
    }

    pub fn holds_at(&self, v: &SecondOrderVertex) -> bool {
        self.lhs_at(v) == self.rhs
    }

    fn lhs_on_matrix(&self, m: &[Vec<u8>], mode: CoordMode) -> i64 {
        self.coeffs
            .iter()
            .map(|(&(p, q), &c)| {
                let entry = match mode {
                    CoordMode::Canonical => m[p][q].max(m[q][p]),
                    CoordMode::Full => m[p][q],
                };
                c * i64::from(entry)
            })
            .sum()
    }

    /// Human-readable form with 1-based labels.
    pub fn render(&self, n: usize) -> String {
        let mut out = String::new();
        for (k, (&(p, q), &c)) in self.coeffs.iter().enumerate() {
            let sign = if c < 0 {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.unsigned_abs();
            let label =
                format!("Y_{{{},{}}}", PairIndex::from_flat(n, p).label(n), PairIndex::from_flat(n, q).label(n));
            if mag == 1 {
                out.push_str(&format!("{sign}{label}"));
            } else {
                out.push_str(&format!("{sign}{mag}{label}"));
            }
            if k + 1 < self.coeffs.len() {
                out.push(' ');
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} = {}", self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub n: usize,
    pub mode: CoordMode,
    pub equations: Vec<Equation>,
}

impl ConstraintSystem {
    pub fn num_variables(&self) -> usize {
        let side = self.n * self.n;
        match self.mode {
            CoordMode::Canonical => CoordSpace::new(self.n).len(),
            CoordMode::Full => side * side,
        }
    }

    fn column(&self, p: usize, q: usize) -> usize {
        match self.mode {
            CoordMode::Canonical => CoordSpace::new(self.n).index(p, q),
            CoordMode::Full => p * self.n * self.n + q,
        }
    }

    /// Dense coefficient matrix (one row per equation) and right-hand side.
    pub fn coefficient_matrix(&self) -> (DenseMatrix<i64>, Vec<i64>) {
        let cols = self.num_variables();
        let mut data = vec![0i64; self.equations.len() * cols];
        for (r, eq) in self.equations.iter().enumerate() {
            for (&(p, q), &c) in &eq.coeffs {
                data[r * cols + self.column(p, q)] += c;
            }
        }
        let rhs = self.equations.iter().map(|e| e.rhs).collect();
        (DenseMatrix::new(self.equations.len(), cols, data).expect("sized above"), rhs)
    }

    /// Index of the first equation violated by `v`.
    pub fn first_violation(&self, v: &SecondOrderVertex) -> Option<usize> {
        self.equations.iter().position(|e| !e.holds_at(v))
    }

    pub fn count_by_provenance(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.equations {
            *counts.entry(e.provenance.to_string()).or_insert(0) += 1;
        }
        counts
    }
}

/// Canonical-coordinate equation system; see [`build_equation_system_in`].
pub fn build_equation_system(n: usize) -> Result<ConstraintSystem> {
    build_equation_system_in(n, CoordMode::Canonical)
}

/// Emits, in order: symmetry (full mode only), zero pins, block row/column
/// sums, diagonal sums. Redundant members are kept.
pub fn build_equation_system_in(n: usize, mode: CoordMode) -> Result<ConstraintSystem> {
    check_range("equation system", n, 2, usize::MAX)?;
    let side = n * n;
    let flat = |i: usize, j: usize| i * n + j;
    let mut equations = Vec::new();

    if mode == CoordMode::Full {
        for p in 0..side {
            for q in p + 1..side {
                equations.push(Equation::new([((p, q), 1), ((q, p), -1)], 0, Provenance::Symmetry, mode));
            }
        }
    }

    let space = CoordSpace::new(n);
    for p in 0..side {
        let start = if mode == CoordMode::Canonical { p + 1 } else { 0 };
        for q in start..side {
            if space.is_pinned(p, q) {
                equations.push(Equation::new([((p, q), 1)], 0, Provenance::ZeroBlock, mode));
            }
        }
    }

    for i in 0..n {
        for j in 0..n {
            let d = flat(i, j);
            for l in 0..n {
                // column l of block (i, j): sum_k Y_{ij,kl} = Y_{ij,ij}
                let terms = (0..n).map(|k| ((d, flat(k, l)), 1)).chain([((d, d), -1)]);
                equations.push(Equation::new(terms, 0, Provenance::RowSum, mode));
            }
            for l in 0..n {
                // row l of block (i, j): sum_k Y_{ij,lk} = Y_{ij,ij}
                let terms = (0..n).map(|k| ((d, flat(l, k)), 1)).chain([((d, d), -1)]);
                equations.push(Equation::new(terms, 0, Provenance::RowSum, mode));
            }
        }
    }

    for i in 0..n {
        let terms = (0..n).map(|j| ((flat(i, j), flat(i, j)), 1));
        equations.push(Equation::new(terms, 1, Provenance::DiagSum, mode));
    }
    for i in 0..n {
        let terms = (0..n).map(|j| ((flat(j, i), flat(j, i)), 1));
        equations.push(Equation::new(terms, 1, Provenance::DiagSum, mode));
    }

    Ok(ConstraintSystem { n, mode, equations })
}

/// `n! / (2 (n-4)!) + (n-1)^2 + 1`.
pub fn dimension_formula(n: usize) -> Result<u64> {
    if n < 4 {
        return Err(Error::Argument(format!("dimension formula needs n >= 4, got {n}")));
    }
    let n64 = n as u64;
    let falling = n64 * (n64 - 1) * (n64 - 2) * (n64 - 3);
    Ok(falling / 2 + (n64 - 1) * (n64 - 1) + 1)
}

/// Canonical 0/1 vectors of all `n!` vertices, in lexicographic order of permutations.
pub fn vertex_vectors(n: usize) -> Result<Vec<Vec<i64>>> {
    let perms: Vec<Permutation> = enumerate_permutations(n)?.collect();
    Ok(perms.par_iter().map(|s| vertex(s).canonical_vector()).collect())
}

/// Affine dimension of the convex hull of all vertices of size `n`.
pub fn affine_dimension(n: usize, mode: RankMode) -> Result<usize> {
    check_range("affine dimension", n, 1, MAX_AFFINE_N)?;
    linalg::affine_rank_i64(&vertex_vectors(n)?, mode)
}

/// Dimension of the affine solution set of the equation system:
/// number of variables minus the rank of the coefficient matrix, or `None`
/// when the system is inconsistent.
pub fn solution_space_dimension(system: &ConstraintSystem, mode: RankMode) -> Option<usize> {
    let (a, rhs) = system.coefficient_matrix();
    let r = linalg::rank(&a, mode);
    let mut aug = Vec::with_capacity(a.rows() * (a.cols() + 1));
    for i in 0..a.rows() {
        aug.extend_from_slice(a.row(i));
        aug.push(rhs[i]);
    }
    let aug = DenseMatrix::new(a.rows(), a.cols() + 1, aug).expect("sized above");
    (linalg::rank(&aug, mode) == r).then(|| system.num_variables() - r)
}

/// Result of checking every vertex against the system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexCheck {
    pub n: usize,
    pub vertices: u128,
    pub equations: usize,
    /// First failing permutation (1-based) and equation index.
    pub first_failure: Option<(Vec<usize>, usize)>,
}

impl VertexCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Evaluates every equation on every vertex, exactly.
pub fn check_all_vertices(system: &ConstraintSystem) -> Result<VertexCheck> {
    let perms: Vec<Permutation> = enumerate_permutations(system.n)?.collect();
    let first_failure = perms
        .par_iter()
        .filter_map(|s| {
            let v = vertex(s);
            let bad = match system.mode {
                CoordMode::Canonical => system.first_violation(&v),
                CoordMode::Full => {
                    let m = v.full_matrix();
                    system.equations.iter().position(|e| e.lhs_on_matrix(&m, CoordMode::Full) != e.rhs)
                }
            };
            bad.map(|k| (s.one_based(), k))
        })
        .min();
    Ok(VertexCheck { n: system.n, vertices: factorial(system.n), equations: system.equations.len(), first_failure })
}

/// Recovers `sigma` from the full `n^2 x n^2` 0/1 matrix of `vertex(sigma)`.
///
/// The matrix is validated completely (0/1, equations, reconstruction)
/// before anything is returned.
pub fn decode_01(m: &[Vec<u8>]) -> Result<Permutation> {
    let side = m.len();
    let n = (1..=side).find(|k| k * k >= side).unwrap_or(0);
    if side == 0 || n * n != side {
        return Err(Error::Decode(format!("side {side} is not a positive perfect square")));
    }
    if n < 2 {
        return Err(Error::Decode("decoding needs n >= 2".into()));
    }
    for (p, row) in m.iter().enumerate() {
        if row.len() != side {
            return Err(Error::Decode(format!("row {} has length {}, expected {side}", p + 1, row.len())));
        }
        if let Some(q) = row.iter().position(|&x| x > 1) {
            return Err(Error::Decode(format!("entry ({}, {}) is {}, not 0/1", p + 1, q + 1, row[q])));
        }
    }
    let system = build_equation_system_in(n, CoordMode::Full)?;
    if let Some(k) = system.equations.iter().position(|e| e.lhs_on_matrix(m, CoordMode::Full) != e.rhs) {
        let e = &system.equations[k];
        return Err(Error::Decode(format!("equation {k} ({}) violated: {}", e.provenance, e.render(n))));
    }
    let mut image = Vec::with_capacity(n);
    for i in 0..n {
        let ones: Vec<usize> = (0..n).filter(|&j| m[i * n + j][i * n + j] == 1).collect();
        match ones.as_slice() {
            [j] => image.push(*j),
            _ => {
                return Err(Error::Decode(format!(
                    "diagonal row block {} has {} ones, expected exactly one",
                    i + 1,
                    ones.len()
                )))
            }
        }
    }
    let sigma =
        Permutation::new(image).map_err(|e| Error::Decode(format!("diagonal is not a permutation matrix: {e}")))?;
    let v = vertex(&sigma);
    for p in 0..side {
        for q in 0..side {
            if m[p][q] != v.get(p, q) {
                return Err(Error::Decode(format!(
                    "entry ({}, {}) is {} but the vertex of {sigma} has {}",
                    p + 1,
                    q + 1,
                    m[p][q],
                    v.get(p, q)
                )));
            }
        }
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(n: usize, i: usize, j: usize, k: usize, l: usize) -> (usize, usize) {
        // 1-based pairs, canonicalized
        let p = (i - 1) * n + (j - 1);
        let q = (k - 1) * n + (l - 1);
        (p.min(q), p.max(q))
    }

    #[test]
    fn pins_include_same_row_pair() {
        let sys = build_equation_system(2).unwrap();
        let pin = Equation::new([(y(2, 1, 1, 1, 2), 1)], 0, Provenance::ZeroBlock, CoordMode::Canonical);
        assert!(sys.equations.contains(&pin));
    }

    #[test]
    fn block_sum_instance_n3() {
        let sys = build_equation_system(3).unwrap();
        let expected = Equation::new(
            [(y(3, 1, 1, 1, 2), 1), (y(3, 1, 1, 2, 2), 1), (y(3, 1, 1, 3, 2), 1), (y(3, 1, 1, 1, 1), -1)],
            0,
            Provenance::RowSum,
            CoordMode::Canonical,
        );
        assert!(sys.equations.contains(&expected));
    }

    #[test]
    fn equation_counts() {
        for n in 2..=5 {
            let sys = build_equation_system(n).unwrap();
            let counts = sys.count_by_provenance();
            // pinned canonical pairs: n^2 * 2(n-1) ordered partners, halved
            assert_eq!(counts["zero-block"], n * n * (n - 1));
            assert_eq!(counts["row-sum"], 2 * n * n * n);
            assert_eq!(counts["diag-sum"], 2 * n);
            assert!(!counts.contains_key("symmetry"));
        }
        let full = build_equation_system_in(3, CoordMode::Full).unwrap();
        assert_eq!(full.count_by_provenance()["symmetry"], 9 * 8 / 2);
        assert!(build_equation_system(1).is_err());
    }

    #[test]
    fn all_vertices_satisfy_equations() {
        for n in 2..=5 {
            let sys = build_equation_system(n).unwrap();
            assert!(check_all_vertices(&sys).unwrap().passed(), "n={n}");
        }
        for n in 2..=3 {
            let sys = build_equation_system_in(n, CoordMode::Full).unwrap();
            assert!(check_all_vertices(&sys).unwrap().passed(), "full n={n}");
        }
    }

    #[test]
    fn formula_values() {
        assert_eq!(dimension_formula(4).unwrap(), 22);
        assert_eq!(dimension_formula(5).unwrap(), 77);
        assert_eq!(dimension_formula(6).unwrap(), 206);
        assert_eq!(dimension_formula(7).unwrap(), 457);
        assert!(dimension_formula(3).is_err());
    }

    #[test]
    fn affine_dimension_small() {
        assert_eq!(affine_dimension(4, RankMode::Exact).unwrap(), 22);
        assert_eq!(affine_dimension(4, RankMode::modp()).unwrap(), 22);
        assert_eq!(affine_dimension(3, RankMode::Exact).unwrap(), 5);
        assert_eq!(affine_dimension(1, RankMode::Exact).unwrap(), 0);
        assert!(affine_dimension(8, RankMode::modp()).is_err());
    }

    #[test]
    fn solution_space_matches_formula() {
        for n in 4..=5 {
            let sys = build_equation_system(n).unwrap();
            let dim = solution_space_dimension(&sys, RankMode::modp()).unwrap();
            assert_eq!(dim as u64, dimension_formula(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn decode_round_trip() {
        assert_eq!(decode_01(&vertex(&Permutation::identity(3)).full_matrix()).unwrap(), Permutation::identity(3));
        for n in 2..=4 {
            for s in enumerate_permutations(n).unwrap() {
                assert_eq!(decode_01(&vertex(&s).full_matrix()).unwrap(), s);
            }
        }
    }

    #[test]
    fn decode_rejects_bad_diagonal() {
        let mut m = vertex(&Permutation::identity(3)).full_matrix();
        // second one in diagonal row block 1
        m[1][1] = 1;
        let err = decode_01(&m).unwrap_err();
        assert!(matches!(err, Error::Decode(_)), "{err}");
        let mut m = vertex(&Permutation::identity(3)).full_matrix();
        m[0][0] = 2;
        assert!(decode_01(&m).is_err());
        assert!(decode_01(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).is_err());
    }
}
