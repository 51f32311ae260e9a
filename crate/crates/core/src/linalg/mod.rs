//! Exact linear algebra: rank, kernels, solves and affine rank, over the
//! rationals or over random 62-bit prime fields.
//!
//! Kernels are always returned exact. Large kernels are located with a mod-p
//! echelon (which pivot rows and columns to use) and then solved and verified
//! in integer arithmetic; if the verification fails the prime was unlucky and
//! another one is tried before falling back to full rational elimination.

pub mod fraction_free;
pub mod modp;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default seed for prime selection, so `modp` results are reproducible.
pub const DEFAULT_PRIME_SEED: u64 = 0x005e_ed0f_9a1e;

/// Matrices with more rows than this default to `modp` rank.
pub const AUTO_EXACT_MAX_ROWS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RankMode {
    /// Fraction-free rational elimination.
    Exact,
    /// Elimination over `primes` random primes in `[2^61, 2^62)`; the reported
    /// rank is the maximum over primes. Never exceeds the true rank; a single
    /// prime underestimates with probability below `rows * 2^-61`.
    Modp { primes: usize, seed: u64 },
}

impl RankMode {
    pub fn modp() -> Self {
        RankMode::Modp { primes: 2, seed: DEFAULT_PRIME_SEED }
    }

    pub fn auto(rows: usize) -> Self {
        if rows > AUTO_EXACT_MAX_ROWS {
            Self::modp()
        } else {
            RankMode::Exact
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RankMode::Exact => "exact",
            RankMode::Modp { .. } => "modp",
        }
    }
}

impl fmt::Display for RankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Matrix entries usable by the elimination routines.
pub trait Scalar: Clone + Send + Sync {
    fn is_zero_entry(&self) -> bool;
    fn to_rational(&self) -> Rational;
    /// Residue modulo `p`, or `None` if a denominator vanishes mod `p`.
    fn residue(&self, p: u64) -> Option<u64>;
}

impl Scalar for i64 {
    fn is_zero_entry(&self) -> bool {
        *self == 0
    }

    fn to_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(*self))
    }

    fn residue(&self, p: u64) -> Option<u64> {
        Some((*self as i128).rem_euclid(p as i128) as u64)
    }
}

impl Scalar for Rational {
    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn residue(&self, p: u64) -> Option<u64> {
        let pb = BigInt::from(p);
        let num = self.numer().mod_floor(&pb).to_u64()?;
        let den = self.denom().mod_floor(&pb).to_u64()?;
        if den == 0 {
            return None;
        }
        Some(modp::mul_mod(num, modp::inv_mod(den, p), p))
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix<T = Rational> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!("matrix data has {} entries, expected {rows} x {cols}", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::Argument(format!("row {bad} has length {}, expected {cols}", rows[bad].len())));
        }
        let n = rows.len();
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.data[i * self.cols + j].clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    fn residues(&self, p: u64) -> Option<Vec<u64>> {
        self.data.iter().map(|x| x.residue(p)).collect()
    }

    /// Integer matrix with the same row space up to scaling: each row is
    /// multiplied by the lcm of its denominators.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| integer_scaled(self.row(i))).collect()
    }

    /// Each column scaled to integers; preserves the right kernel up to a
    /// diagonal change of variables, so callers must rescale solutions.
    fn integer_cols(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let mut scales = vec![BigInt::one(); self.cols];
        for j in 0..self.cols {
            for i in 0..self.rows {
                let d = self.get(i, j).to_rational().denom().clone();
                scales[j] = scales[j].lcm(&d);
            }
        }
        let rows = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let r = self.get(i, j).to_rational() * Rational::from_integer(scales[j].clone());
                        r.to_integer()
                    })
                    .collect()
            })
            .collect();
        (rows, scales)
    }
}

impl DenseMatrix<Rational> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Rational::one();
        }
        Self { rows: n, cols: n, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(Scalar::to_rational).collect()).collect())
    }
}

fn integer_scaled<T: Scalar>(row: &[T]) -> Vec<BigInt> {
    let rats: Vec<Rational> = row.iter().map(Scalar::to_rational).collect();
    let lcm = rats.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    rats.into_iter().map(|r| (r * Rational::from_integer(lcm.clone())).to_integer()).collect()
}

fn primes_for(count: usize, seed: u64) -> impl Iterator<Item = u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count.max(1)).map(move |_| modp::random_prime(&mut rng))
}

/// Mod-p echelon with a prime under which every entry has a residue.
fn echelon_with_prime<T: Scalar>(m: &DenseMatrix<T>, rng: &mut ChaCha8Rng) -> modp::Echelon {
    loop {
        let p = modp::random_prime(rng);
        if let Some(res) = m.residues(p) {
            return modp::echelon(res, m.rows, m.cols, p);
        }
    }
}

pub fn rank<T: Scalar>(m: &DenseMatrix<T>, mode: RankMode) -> usize {
    if m.is_empty() {
        return 0;
    }
    match mode {
        RankMode::Exact => fraction_free::rank(m.integer_rows()),
        RankMode::Modp { primes, seed } => {
            let mut best = 0;
            let mut skipped = 0usize;
            for p in primes_for(primes + skipped, seed) {
                match m.residues(p) {
                    Some(res) => best = best.max(modp::echelon(res, m.rows, m.cols, p).rank),
                    None => skipped += 1,
                }
            }
            if skipped > 0 {
                // a denominator shared a factor with a drawn prime; draw fresh ones
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                for _ in 0..skipped {
                    best = best.max(echelon_with_prime(m, &mut rng).rank);
                }
            }
            best
        }
    }
}

/// Indices (ascending) of a maximal linearly independent subset of the rows,
/// found over a random prime field; exact with overwhelming probability.
pub fn independent_rows<T: Scalar>(m: &DenseMatrix<T>) -> Vec<usize> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_PRIME_SEED);
    let mut rows = echelon_with_prime(m, &mut rng).pivot_rows;
    rows.sort_unstable();
    rows
}

/// Dimension of the affine hull of `points`: rank of the points augmented with
/// a trailing 1, minus one.
pub fn affine_rank<T: Scalar>(points: &[Vec<T>], mode: RankMode) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Argument("affine rank of an empty point set".into()));
    }
    let width = points[0].len();
    let mut data = Vec::with_capacity(points.len() * (width + 1));
    for (k, pt) in points.iter().enumerate() {
        if pt.len() != width {
            return Err(Error::Argument(format!("point {k} has dimension {}, expected {width}", pt.len())));
        }
        data.extend(pt.iter().map(Scalar::to_rational));
        data.push(Rational::one());
    }
    let m = DenseMatrix { rows: points.len(), cols: width + 1, data };
    Ok(rank(&m, mode) - 1)
}

/// Affine rank for 0/1 or small-integer points, avoiding rational storage.
pub fn affine_rank_i64(points: &[Vec<i64>], mode: RankMode) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Argument("affine rank of an empty point set".into()));
    }
    let width = points[0].len();
    let mut data = Vec::with_capacity(points.len() * (width + 1));
    for (k, pt) in points.iter().enumerate() {
        if pt.len() != width {
            return Err(Error::Argument(format!("point {k} has dimension {}, expected {width}", pt.len())));
        }
        data.extend_from_slice(pt);
        data.push(1);
    }
    let m = DenseMatrix { rows: points.len(), cols: width + 1, data };
    Ok(rank(&m, mode) - 1)
}

/// Some `x` with `A x = b`, or `None` when the system is inconsistent.
pub fn solve<T: Scalar>(a: &DenseMatrix<T>, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    if a.rows != b.len() {
        return Err(Error::Argument(format!("system has {} rows but right-hand side has {}", a.rows, b.len())));
    }
    let cols = a.cols;
    let aug: Vec<Vec<BigInt>> = (0..a.rows)
        .map(|i| {
            let mut row: Vec<Rational> = a.row(i).iter().map(Scalar::to_rational).collect();
            row.push(b[i].clone());
            integer_scaled(&row)
        })
        .collect();
    let red = fraction_free::reduce(aug, cols);
    let rank = red.pivot_cols.len();
    if red.matrix[rank..].iter().any(|row| !row[cols].is_zero()) {
        return Ok(None);
    }
    let mut x = vec![Rational::zero(); cols];
    for (k, &c) in red.pivot_cols.iter().enumerate() {
        x[c] = Rational::new(red.matrix[k][cols].clone(), red.denominator.clone());
    }
    Ok(Some(x))
}

/// Exact integer kernel basis of an integer matrix: each vector is returned as
/// numerators over the shared `denominator`.
struct IntegerKernel {
    vectors: Vec<Vec<BigInt>>,
}

fn kernel_is_valid(a: &[Vec<BigInt>], v: &[BigInt]) -> bool {
    let support: Vec<usize> = (0..v.len()).filter(|&j| !v[j].is_zero()).collect();
    a.iter().all(|row| {
        let mut acc = BigInt::zero();
        for &j in &support {
            if !row[j].is_zero() {
                acc += &row[j] * &v[j];
            }
        }
        acc.is_zero()
    })
}

/// Full kernel via Gauss-Jordan on the whole matrix.
fn kernel_exact(a: &[Vec<BigInt>], cols: usize) -> IntegerKernel {
    let red = fraction_free::reduce(a.to_vec(), cols);
    let pivots = &red.pivot_cols;
    let mut is_pivot = vec![false; cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    let vectors = (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![BigInt::zero(); cols];
            v[f] = red.denominator.clone();
            for (k, &c) in pivots.iter().enumerate() {
                v[c] = -red.matrix[k][f].clone();
            }
            v
        })
        .collect();
    IntegerKernel { vectors }
}

/// Kernel located by a mod-p echelon and solved only on the pivot block.
/// Returns `None` when the prime underestimated the rank.
fn kernel_via_pivots(
    a: &[Vec<BigInt>],
    cols: usize,
    echelon: &modp::Echelon,
    limit: Option<usize>,
) -> Option<IntegerKernel> {
    let mut is_pivot = vec![false; cols];
    for &c in &echelon.pivot_cols {
        is_pivot[c] = true;
    }
    let mut free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    if let Some(limit) = limit {
        free.truncate(limit);
    }
    let Some(&last_free) = free.last() else {
        return Some(IntegerKernel { vectors: Vec::new() });
    };
    // a free column depends only on pivot columns to its left
    let used = echelon.pivot_cols.iter().take_while(|&&c| c < last_free).count();
    // [B | -A[R, F]] with B = A[R, C] restricted to the first `used` pivots
    let block: Vec<Vec<BigInt>> = echelon.pivot_rows[..used]
        .iter()
        .map(|&r| {
            let mut row: Vec<BigInt> = echelon.pivot_cols[..used].iter().map(|&c| a[r][c].clone()).collect();
            row.extend(free.iter().map(|&f| -a[r][f].clone()));
            row
        })
        .collect();
    let red = fraction_free::reduce(block, used);
    if red.pivot_cols.len() != used {
        return None;
    }
    let mut vectors = Vec::with_capacity(free.len());
    for (t, &f) in free.iter().enumerate() {
        let mut v = vec![BigInt::zero(); cols];
        v[f] = red.denominator.clone();
        for k in 0..used {
            // pivot k of the reduced block sits in block column k
            v[echelon.pivot_cols[k]] = red.matrix[k][used + t].clone();
        }
        if !kernel_is_valid(a, &v) {
            return None;
        }
        vectors.push(v);
    }
    Some(IntegerKernel { vectors })
}

fn to_rational_vector(v: &[BigInt], scales: &[BigInt]) -> Vec<Rational> {
    // column j was multiplied by scales[j], so x_j = y_j * scales[j]
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let sign_fix = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    v.iter()
        .zip(scales)
        .map(|(x, s)| {
            let y = Rational::from_integer(x / &g) * Rational::from_integer(s.clone());
            if sign_fix {
                -y
            } else {
                y
            }
        })
        .collect()
}

const KERNEL_PRIME_ATTEMPTS: usize = 3;

fn integer_kernel<T: Scalar>(m: &DenseMatrix<T>, limit: Option<usize>) -> (IntegerKernel, Vec<BigInt>) {
    let (a, scales) = m.integer_cols();
    if m.rows == 0 {
        let vectors = (0..m.cols.min(limit.unwrap_or(usize::MAX)))
            .map(|f| {
                let mut v = vec![BigInt::zero(); m.cols];
                v[f] = BigInt::one();
                v
            })
            .collect();
        return (IntegerKernel { vectors }, scales);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_PRIME_SEED);
    for _ in 0..KERNEL_PRIME_ATTEMPTS {
        let echelon = echelon_with_prime(m, &mut rng);
        if let Some(kernel) = kernel_via_pivots(&a, m.cols, &echelon, limit) {
            return (kernel, scales);
        }
    }
    let mut kernel = kernel_exact(&a, m.cols);
    if let Some(limit) = limit {
        kernel.vectors.truncate(limit);
    }
    (kernel, scales)
}

/// A nonzero `v` with `M v = 0`, or `None` when `M` has full column rank.
/// The result is verified by exact multiplication.
pub fn nullspace_vector<T: Scalar>(m: &DenseMatrix<T>) -> Option<Vec<Rational>> {
    let (kernel, scales) = integer_kernel(m, Some(1));
    kernel.vectors.first().map(|v| to_rational_vector(v, &scales))
}

/// A basis of the right kernel `{v : M v = 0}`, each vector verified exactly.
/// Vectors are normalised to coprime integers up to the column scaling and
/// have a positive first nonzero entry.
pub fn nullspace_basis<T: Scalar>(m: &DenseMatrix<T>) -> Vec<Vec<Rational>> {
    let (kernel, scales) = integer_kernel(m, None);
    kernel.vectors.iter().map(|v| to_rational_vector(v, &scales)).collect()
}

/// A basis of the left kernel `{a : a^T M = 0}`.
pub fn left_kernel_basis<T: Scalar>(m: &DenseMatrix<T>) -> Vec<Vec<Rational>> {
    nullspace_basis(&m.transpose())
}

pub fn mat_vec<T: Scalar>(m: &DenseMatrix<T>, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows)
        .map(|i| {
            m.row(i)
                .iter()
                .zip(v)
                .filter(|(a, x)| !a.is_zero_entry() && !x.is_zero())
                .map(|(a, x)| a.to_rational() * x)
                .sum()
        })
        .collect()
}

/// `"num/den"` text form used in reports; integers keep the `/1`.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"num/den"` or a plain integer.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Argument(format!("{text:?} is not a rational of the form num/den"));
    let (num, den) = match text.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn q(x: i64) -> Rational {
        Rational::from_integer(BigInt::from(x))
    }

    fn int_matrix(rows: &[&[i64]]) -> DenseMatrix<i64> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Test oracle: textbook RREF over `BigRational`.
    fn naive_rank(rows: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let cols = a.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(p, r);
            let piv = a[r][c].clone();
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone() / piv.clone();
                    for j in 0..cols {
                        let t = f.clone() * a[r][j].clone();
                        a[i][j] -= t;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn rational_text_round_trip() {
        let x = Rational::new((-6).into(), 4.into());
        assert_eq!(format_rational(&x), "-3/2");
        assert_eq!(parse_rational("-3/2").unwrap(), x);
        assert_eq!(parse_rational(" 7 ").unwrap(), q(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&DenseMatrix::identity(3), RankMode::Exact), 3);
        assert_eq!(rank(&DenseMatrix::identity(3), RankMode::modp()), 3);
        assert_eq!(rank(&DenseMatrix::zeros(4, 5), RankMode::Exact), 0);
        assert_eq!(rank(&DenseMatrix::zeros(4, 5), RankMode::modp()), 0);
    }

    #[test]
    fn rank_of_vectorised_permutation_matrices_n4() {
        let rows: Vec<Vec<i64>> = crate::perm::enumerate_permutations(4)
            .unwrap()
            .map(|s| {
                let mut v = vec![0i64; 16];
                for i in 0..4 {
                    v[i * 4 + s.apply(i)] = 1;
                }
                v
            })
            .collect();
        assert_eq!(naive_rank(&rows), 10);
        let m = DenseMatrix::from_rows(rows).unwrap();
        assert_eq!(m.rows(), 24);
        assert_eq!(rank(&m, RankMode::Exact), 10);
        assert_eq!(rank(&m, RankMode::modp()), 10);
    }

    #[test]
    fn rational_entries() {
        let m = DenseMatrix::from_rows(vec![
            vec![Rational::new(1.into(), 2.into()), Rational::new(1.into(), 3.into())],
            vec![Rational::new(3.into(), 2.into()), q(1)],
        ])
        .unwrap();
        assert_eq!(rank(&m, RankMode::Exact), 1);
        assert_eq!(rank(&m, RankMode::modp()), 1);
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace_vector(&DenseMatrix::identity(4)).is_none());
        let v = nullspace_vector(&int_matrix(&[&[1, 1]])).unwrap();
        assert_eq!(v.len(), 2);
        assert!(!v[0].is_zero());
        assert_eq!(v[0], -v[1].clone());
        let wide = int_matrix(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 0, 1]]);
        let basis = nullspace_basis(&wide);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(mat_vec(&wide, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn left_kernel_of_dependent_rows() {
        let m = int_matrix(&[&[1, 0, 1], &[0, 1, 1], &[1, 1, 2], &[2, 0, 2]]);
        let basis = left_kernel_basis(&m);
        assert_eq!(basis.len(), 2);
        let mt = m.transpose();
        for a in &basis {
            assert!(mat_vec(&mt, a).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn independent_row_subsets() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1], &[1, 3, 4], &[0, 0, 1]]);
        let rows = independent_rows(&m);
        assert_eq!(rows.len(), 3);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        let sub = DenseMatrix::from_rows(rows.iter().map(|&i| m.row(i).to_vec()).collect()).unwrap();
        assert_eq!(rank(&sub, RankMode::Exact), rank(&m, RankMode::Exact));
    }

    #[test]
    fn affine_rank_examples() {
        assert_eq!(affine_rank(&[vec![q(1), q(2)]], RankMode::Exact).unwrap(), 0);
        assert_eq!(affine_rank(&[vec![q(1), q(2)], vec![q(3), q(2)]], RankMode::Exact).unwrap(), 1);
        // three collinear points not through the origin
        assert_eq!(affine_rank_i64(&[vec![1, 1], vec![2, 2], vec![3, 3]], RankMode::Exact).unwrap(), 1);
        assert!(affine_rank::<Rational>(&[], RankMode::Exact).is_err());
    }

    #[test]
    fn solve_examples() {
        let b = vec![q(3), q(-1), q(7)];
        assert_eq!(solve(&DenseMatrix::identity(3), &b).unwrap(), Some(b.clone()));
        assert_eq!(solve(&DenseMatrix::zeros(2, 2), &[q(1), q(0)]).unwrap(), None);
        let a = int_matrix(&[&[1, 1], &[2, 2]]);
        let x = solve(&a, &[q(1), q(2)]).unwrap().unwrap();
        assert_eq!(x[0].clone() + x[1].clone(), q(1));
        assert!(solve(&a, &[q(1)]).is_err());
        assert_eq!(solve(&a, &[q(1), q(3)]).unwrap(), None);
    }

    #[test]
    fn modp_agrees_with_exact_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials: u64 = 2000;
        let mut agree = 0;
        for t in 0..trials {
            let rows = rng.gen_range(1..8);
            let cols = rng.gen_range(1..8);
            let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-3..=3)).collect();
            let m = DenseMatrix::new(rows, cols, data).unwrap();
            let exact = rank(&m, RankMode::Exact);
            let mp = rank(&m, RankMode::Modp { primes: 2, seed: t });
            assert!(mp <= exact);
            agree += u64::from(exact == mp);
        }
        assert!(agree * 1000 >= trials * 999, "{agree}/{trials}");
    }

    proptest! {
        #[test]
        fn rank_invariances(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-4..=4)).collect();
            let m = DenseMatrix::new(rows, cols, data.clone()).unwrap();
            let r = rank(&m, RankMode::Exact);
            let as_rows: Vec<Vec<i64>> = data.chunks(cols).map(<[i64]>::to_vec).collect();
            prop_assert_eq!(r, naive_rank(&as_rows));
            prop_assert_eq!(rank(&m.transpose(), RankMode::Exact), r);
            let mut shuffled = as_rows.clone();
            shuffled.reverse();
            for (k, row) in shuffled.iter_mut().enumerate() {
                for x in row.iter_mut() {
                    *x *= k as i64 + 2;
                }
            }
            prop_assert_eq!(rank(&DenseMatrix::from_rows(shuffled).unwrap(), RankMode::Exact), r);
        }

        #[test]
        fn kernel_vectors_annihilate(
            rows in 1usize..7,
            cols in 1usize..7,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-2..=2)).collect();
            let m = DenseMatrix::new(rows, cols, data).unwrap();
            let r = rank(&m, RankMode::Exact);
            let basis = nullspace_basis(&m);
            prop_assert_eq!(basis.len(), cols - r);
            for v in &basis {
                prop_assert!(v.iter().any(|x| !x.is_zero()));
                prop_assert!(mat_vec(&m, v).iter().all(Zero::is_zero));
            }
            match nullspace_vector(&m) {
                Some(v) => prop_assert!(r < cols && mat_vec(&m, &v).iter().all(Zero::is_zero)),
                None => prop_assert_eq!(r, cols),
            }
        }
    }
}
