//! Permutations, their second-order matrices, and the coordinate conventions
//! shared by the rest of the crate.
//!
//! A pair `(i, j)` of row and column indices is linearised row-major as
//! `p = i * n + j`. The second-order matrix of a permutation lives on
//! `n^2 x n^2` coordinates `(p, q)`; since it is symmetric only the canonical
//! half `p <= q` is stored.
//!
//! Indices are 0-based everywhere in code and 1-based in anything printed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Largest `n` for which `n!` enumeration is allowed without an explicit override.
pub const MAX_ENUMERATION_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::Argument("permutation of size 0".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::Argument(format!("{image:?} is not a bijection on 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    /// Builds a permutation from 1-based images, the form used in reports and input files.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::Argument(format!("{image:?}: 1-based images must be positive")));
        }
        Self::new(image.iter().map(|&v| v - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&v| v + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        Self { image: inv }
    }

    /// Swaps the images of `x` and `y`.
    pub fn apply_transposition(&self, x: usize, y: usize) -> Result<Self> {
        let n = self.n();
        if x == y {
            return Err(Error::Argument(format!("transposition needs distinct indices, got {x} twice")));
        }
        if x >= n || y >= n {
            return Err(Error::Argument(format!("transposition ({x}, {y}) out of range for n = {n}")));
        }
        let mut image = self.image.clone();
        image.swap(x, y);
        Ok(Self { image })
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn parity(&self) -> i8 {
        // cycle decomposition: parity = (-1)^(n - #cycles)
        let n = self.n();
        let mut seen = vec![false; n];
        let mut cycles = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.image[i];
            }
        }
        if (n - cycles).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Permutation matrix entry `(P_sigma)_{ij}`.
    #[inline]
    pub fn maps(&self, i: usize, j: usize) -> bool {
        self.image[i] == j
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(one_based: Vec<usize>) -> Result<Self> {
        Self::from_one_based(&one_based)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_based()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}

/// All permutations of `0..n` in lexicographic order of their image sequences.
#[derive(Clone, Debug)]
pub struct Permutations {
    next: Option<Vec<usize>>,
}

impl Permutations {
    /// Enumeration without the size guard. `n` must still be positive.
    pub fn unguarded(n: usize) -> Self {
        let next = if n == 0 { None } else { Some((0..n).collect()) };
        Self { next }
    }
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { image: current })
    }
}

fn next_lexicographic(a: &mut [usize]) -> bool {
    let len = a.len();
    if len < 2 {
        return false;
    }
    let mut i = len - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = len - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn enumerate_permutations(n: usize) -> Result<Permutations> {
    check_range("permutation enumeration", n, 1, MAX_ENUMERATION_N)?;
    Ok(Permutations::unguarded(n))
}

pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    Ok(enumerate_permutations(n)?.collect())
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// A row/column index pair together with its row-major flat index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub flat: usize,
}

impl PairIndex {
    pub fn new(n: usize, i: usize, j: usize) -> Self {
        debug_assert!(i < n && j < n);
        Self { i, j, flat: i * n + j }
    }

    pub fn from_flat(n: usize, flat: usize) -> Self {
        debug_assert!(flat < n * n);
        Self { i: flat / n, j: flat % n, flat }
    }

    /// 1-based label in the style `12` (or `1:12` once indices need two digits).
    pub fn label(&self, n: usize) -> String {
        if n <= 9 {
            format!("{}{}", self.i + 1, self.j + 1)
        } else {
            format!("{}:{}", self.i + 1, self.j + 1)
        }
    }
}

/// Layout of the canonical coordinates `(p, q)`, `p <= q`, of an `n^2 x n^2`
/// symmetric matrix, packed row by row of the upper triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordSpace {
    n: usize,
    side: usize,
}

impl CoordSpace {
    pub fn new(n: usize) -> Self {
        Self { n, side: n * n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pair indices, `n^2`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of canonical coordinates, `n^2 (n^2 + 1) / 2`.
    pub fn len(&self) -> usize {
        self.side * (self.side + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    /// Index of `(p, q)` in either order.
    #[inline]
    pub fn index(&self, p: usize, q: usize) -> usize {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        debug_assert!(q < self.side);
        // rows 0..p of the upper triangle hold side + (side - 1) + ... + (side - p + 1) entries
        p * self.side - p * p.saturating_sub(1) / 2 + (q - p)
    }

    /// Inverse of [`CoordSpace::index`].
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        debug_assert!(idx < self.len());
        let mut p = 0;
        let mut start = 0;
        loop {
            let width = self.side - p;
            if idx < start + width {
                return (p, p + (idx - start));
            }
            start += width;
            p += 1;
        }
    }

    /// True for coordinates forced to zero on the affine hull: two distinct
    /// pairs sharing a row index or sharing a column index.
    #[inline]
    pub fn is_pinned(&self, p: usize, q: usize) -> bool {
        if p == q {
            return false;
        }
        let (a, b) = (PairIndex::from_flat(self.n, p), PairIndex::from_flat(self.n, q));
        a.i == b.i || a.j == b.j
    }

    /// `Y_{ij,kl}` style label, 1-based.
    pub fn label(&self, p: usize, q: usize) -> String {
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        format!(
            "Y_{{{},{}}}",
            PairIndex::from_flat(self.n, p).label(self.n),
            PairIndex::from_flat(self.n, q).label(self.n)
        )
    }
}

/// The 0/1 point `P^[2]_sigma` with entries `(P_sigma)_{ij} (P_sigma)_{kl}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SecondOrderVertex {
    n: usize,
    /// Sorted canonical pairs `(p, q)`, `p <= q`, holding a one.
    entries: Vec<(usize, usize)>,
}

impl SecondOrderVertex {
    pub fn new(sigma: &Permutation) -> Self {
        let n = sigma.n();
        let support: Vec<usize> = (0..n).map(|i| i * n + sigma.apply(i)).collect();
        let mut entries = Vec::with_capacity(n * (n + 1) / 2);
        for (a, &p) in support.iter().enumerate() {
            for &q in &support[a..] {
                entries.push(if p <= q { (p, q) } else { (q, p) });
            }
        }
        entries.sort_unstable();
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// The flat pair indices `flat(i, sigma(i))`, i.e. the support of the diagonal.
    pub fn diagonal_support(&self) -> Vec<usize> {
        self.entries.iter().filter(|(p, q)| p == q).map(|&(p, _)| p).collect()
    }

    /// All `n^2` ordered positions of the full matrix holding a one.
    pub fn ordered_ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().flat_map(|&(p, q)| {
            let mirror = if p != q { Some((q, p)) } else { None };
            std::iter::once((p, q)).chain(mirror)
        })
    }

    pub fn get(&self, p: usize, q: usize) -> u8 {
        let key = if p <= q { (p, q) } else { (q, p) };
        u8::from(self.entries.binary_search(&key).is_ok())
    }

    /// Positions of the ones in canonical coordinate order.
    pub fn canonical_support(&self, space: &CoordSpace) -> Vec<usize> {
        let mut idx: Vec<usize> = self.entries.iter().map(|&(p, q)| space.index(p, q)).collect();
        idx.sort_unstable();
        idx
    }

    pub fn canonical_vector(&self) -> Vec<i64> {
        let space = CoordSpace::new(self.n);
        let mut v = vec![0i64; space.len()];
        for &(p, q) in &self.entries {
            v[space.index(p, q)] = 1;
        }
        v
    }

    /// Dense `n^2 x n^2` matrix.
    pub fn full_matrix(&self) -> Vec<Vec<u8>> {
        let side = self.n * self.n;
        let mut m = vec![vec![0u8; side]; side];
        for (p, q) in self.ordered_ones() {
            m[p][q] = 1;
        }
        m
    }

    /// The diagonal read back as an `n x n` matrix.
    pub fn diagonal_matrix(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0u8; self.n]; self.n];
        for p in self.diagonal_support() {
            let pi = PairIndex::from_flat(self.n, p);
            m[pi.i][pi.j] = 1;
        }
        m
    }
}

pub fn vertex(sigma: &Permutation) -> SecondOrderVertex {
    SecondOrderVertex::new(sigma)
}
