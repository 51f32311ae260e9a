//! Coefficient vectors of the polynomials `y_sigma^2 - y_sigma`, where
//! `y_sigma = sum_i x_{i,sigma(i)} + z`, over the monomials of degree one and
//! two, and exact linear dependences among them.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::linalg::{self, format_rational, DenseMatrix, RankMode, Rational};
use crate::perm::{enumerate_permutations, vertex, Permutation};

/// Variables `x_11, x_12, ..., x_nn, z`, indexed `0..=n^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Monomial {
    Linear(usize),
    /// `v_a * v_b` with `a <= b`.
    Quadratic(usize, usize),
}

/// All monomials of degree one and two over the `n^2 + 1` variables, degree
/// first and then lexicographic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    n: usize,
    vars: usize,
}

impl MonomialBasis {
    pub fn new(n: usize) -> Self {
        Self { n, vars: n * n + 1 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of `z`.
    pub fn z(&self) -> usize {
        self.vars - 1
    }

    pub fn x(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// `(n^2 + 1) + (n^2 + 1)(n^2 + 2) / 2`.
    pub fn len(&self) -> usize {
        self.vars + self.vars * (self.vars + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, m: Monomial) -> usize {
        match m {
            Monomial::Linear(v) => v,
            Monomial::Quadratic(a, b) => {
                let (a, b) = (a.min(b), a.max(b));
                self.vars + a * self.vars - a * a.saturating_sub(1) / 2 + (b - a)
            }
        }
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = (0..self.vars).map(Monomial::Linear).collect();
        for a in 0..self.vars {
            for b in a..self.vars {
                out.push(Monomial::Quadratic(a, b));
            }
        }
        out
    }

    pub fn variable_name(&self, v: usize) -> String {
        if v == self.z() {
            "z".into()
        } else if self.n <= 9 {
            format!("x{}{}", v / self.n + 1, v % self.n + 1)
        } else {
            format!("x{}:{}", v / self.n + 1, v % self.n + 1)
        }
    }

    pub fn name(&self, m: Monomial) -> String {
        match m {
            Monomial::Linear(v) => self.variable_name(v),
            Monomial::Quadratic(a, b) if a == b => format!("{}^2", self.variable_name(a)),
            Monomial::Quadratic(a, b) => format!("{}*{}", self.variable_name(a), self.variable_name(b)),
        }
    }

    /// Value of every monomial at the point `(x, z)`, `point` indexed like the variables.
    pub fn evaluate(&self, point: &[i64]) -> Vec<i64> {
        let mut out = point.to_vec();
        for a in 0..self.vars {
            for b in a..self.vars {
                out.push(point[a] * point[b]);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    /// `y^2 - y`.
    SquareMinusLinear,
    /// `y^2`.
    Square,
}

/// Coefficients of `y_sigma^2 - y_sigma` (or `y_sigma^2`) over a [`MonomialBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentVector {
    pub sigma: Permutation,
    pub coeffs: Vec<i64>,
}

pub fn moment_vector_of(sigma: &Permutation, basis: &MonomialBasis, kind: MomentKind) -> Result<MomentVector> {
    if sigma.n() != basis.n {
        return Err(Error::Argument(format!("permutation of size {} for a basis of size {}", sigma.n(), basis.n)));
    }
    let n = basis.n;
    let mut support: Vec<usize> = (0..n).map(|i| basis.x(i, sigma.apply(i))).collect();
    support.push(basis.z());
    let mut coeffs = vec![0i64; basis.len()];
    for (a, &u) in support.iter().enumerate() {
        if kind == MomentKind::SquareMinusLinear {
            coeffs[basis.index(Monomial::Linear(u))] = -1;
        }
        coeffs[basis.index(Monomial::Quadratic(u, u))] = 1;
        for &w in &support[a + 1..] {
            coeffs[basis.index(Monomial::Quadratic(u, w))] = 2;
        }
    }
    Ok(MomentVector { sigma: sigma.clone(), coeffs })
}

/// Coefficients of `y_sigma^2 - y_sigma`.
pub fn moment_vector(sigma: &Permutation, basis: &MonomialBasis) -> Result<MomentVector> {
    moment_vector_of(sigma, basis, MomentKind::SquareMinusLinear)
}

/// `1 + (n^2 + 1) + (n^4 + n^2) / 2`.
pub fn span_dimension_bound(n: usize) -> Result<u64> {
    check_range("span dimension bound", n, 2, usize::MAX)?;
    let n2 = (n * n) as u64;
    Ok(1 + (n2 + 1) + (n2 * n2 + n2) / 2)
}

/// Largest `n` for which the `n! x |basis|` moment matrix is built.
pub const MAX_MOMENT_N: usize = 7;

/// One row per permutation, in lexicographic order.
pub fn moment_matrix(n: usize, kind: MomentKind) -> Result<DenseMatrix<i64>> {
    check_range("moment matrix", n, 1, MAX_MOMENT_N)?;
    let basis = MonomialBasis::new(n);
    let perms: Vec<Permutation> = enumerate_permutations(n)?.collect();
    let rows: Vec<Vec<i64>> =
        perms.par_iter().map(|s| moment_vector_of(s, &basis, kind).map(|m| m.coeffs)).collect::<Result<_>>()?;
    DenseMatrix::from_rows(rows)
}

/// Rows `p p^T` (upper triangle) where `p` is the vectorised permutation
/// matrix with a trailing 1.
pub fn lifted_vertex_matrix(n: usize) -> Result<DenseMatrix<i64>> {
    let side = n * n + 1;
    let rows: Vec<Vec<i64>> = enumerate_permutations(n)?
        .map(|s| {
            let mut p = vec![0i64; side];
            for i in 0..n {
                p[i * n + s.apply(i)] = 1;
            }
            p[side - 1] = 1;
            let mut row = Vec::with_capacity(side * (side + 1) / 2);
            for a in 0..side {
                for b in a..side {
                    row.push(p[a] * p[b]);
                }
            }
            row
        })
        .collect();
    DenseMatrix::from_rows(rows)
}

/// Rank of the canonical vertex vectors (no affine augmentation).
pub fn vertex_linear_rank(n: usize, mode: RankMode) -> Result<usize> {
    let rows: Vec<Vec<i64>> = enumerate_permutations(n)?.map(|s| vertex(&s).canonical_vector()).collect();
    Ok(linalg::rank(&DenseMatrix::from_rows(rows)?, mode))
}

/// `sum alpha_sigma (y_sigma^2 - y_sigma) = 0` with every listed `alpha` nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceCertificate {
    pub n: usize,
    pub support: Vec<Permutation>,
    /// `"num/den"` strings, aligned with `support`.
    pub alpha: Vec<String>,
    /// The weighted coefficient vectors cancel exactly.
    pub residual_checked: bool,
    /// Random integer points at which the weighted polynomial evaluated to zero.
    pub points_checked: usize,
    pub mixed_signs: bool,
    pub moment_rank: usize,
    pub basis_size: usize,
    pub span_bound: u64,
}

impl DependenceCertificate {
    pub fn alpha_values(&self) -> Result<Vec<Rational>> {
        self.alpha.iter().map(|a| linalg::parse_rational(a)).collect()
    }
}

impl fmt::Display for DependenceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} support={} mixed_signs={} rank={} basis={} bound={}",
            self.n,
            self.support.len(),
            self.mixed_signs,
            self.moment_rank,
            self.basis_size,
            self.span_bound
        )
    }
}

/// Integer multiples of `alpha` with a common positive denominator removed.
fn integer_weights(alpha: &[Rational]) -> Vec<BigInt> {
    let lcm = alpha.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
    alpha.iter().map(|a| (a * Rational::from_integer(lcm.clone())).to_integer()).collect()
}

/// Exact check that the weighted coefficient vectors cancel.
pub fn weighted_sum_vanishes(support: &[Permutation], alpha: &[Rational], basis: &MonomialBasis) -> Result<bool> {
    let weights = integer_weights(alpha);
    let mut acc = vec![BigInt::zero(); basis.len()];
    for (s, w) in support.iter().zip(&weights) {
        for (slot, c) in acc.iter_mut().zip(moment_vector(s, basis)?.coeffs) {
            if c != 0 {
                *slot += w * c;
            }
        }
    }
    Ok(acc.iter().all(Zero::is_zero))
}

/// Evaluates `sum alpha (y^2 - y)` at `points` seeded random integer points
/// with coordinates in `[-10, 10]`; returns how many gave exactly zero.
pub fn check_at_random_points(support: &[Permutation], alpha: &[Rational], points: usize, seed: u64) -> usize {
    let Some(n) = support.first().map(Permutation::n) else {
        return points;
    };
    let weights = integer_weights(alpha);
    (0..points)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let x: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-10..=10)).collect();
            let z: i64 = rng.gen_range(-10..=10);
            let total: BigInt = support
                .iter()
                .zip(&weights)
                .map(|(s, w)| {
                    let y: i64 = (0..n).map(|i| x[i * n + s.apply(i)]).sum::<i64>() + z;
                    w * BigInt::from(y * y - y)
                })
                .sum();
            total.is_zero()
        })
        .count()
}

/// Finds an exact dependence among the moment vectors of all permutations of
/// size `n`, verifies it symbolically and at `points` random integer points.
pub fn dependence_certificate(n: usize, points: usize, seed: u64) -> Result<DependenceCertificate> {
    check_range("dependence certificate", n, 2, MAX_MOMENT_N)?;
    let basis = MonomialBasis::new(n);
    let m = moment_matrix(n, MomentKind::SquareMinusLinear)?;
    let moment_rank = linalg::rank(&m, RankMode::modp());
    let Some(alpha_full) = linalg::nullspace_vector(&m.transpose()) else {
        return Err(Error::Verification(format!(
            "no dependence among the {} moment vectors of size {n} (rank {moment_rank})",
            m.rows()
        )));
    };
    let perms: Vec<Permutation> = enumerate_permutations(n)?.collect();
    let (support, alpha): (Vec<Permutation>, Vec<Rational>) =
        perms.into_iter().zip(alpha_full).filter(|(_, a)| !a.is_zero()).unzip();
    let residual_checked = weighted_sum_vanishes(&support, &alpha, &basis)?;
    let points_checked = check_at_random_points(&support, &alpha, points, seed);
    let mixed_signs = alpha.iter().any(Signed::is_positive) && alpha.iter().any(Signed::is_negative);
    Ok(DependenceCertificate {
        n,
        alpha: alpha.iter().map(format_rational).collect(),
        support,
        residual_checked,
        points_checked,
        mixed_signs,
        moment_rank,
        basis_size: basis.len(),
        span_bound: span_dimension_bound(n)?,
    })
}

impl DependenceCertificate {
    /// Support of at least three, exact cancellation, and every point zero.
    pub fn verified(&self, points: usize) -> bool {
        self.support.len() >= 3 && self.residual_checked && self.points_checked == points
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SssCheck {
    pub n: usize,
    pub kernel_dim_square_minus_linear: usize,
    pub kernel_dim_square: usize,
    /// Every basis vector of each left kernel annihilates the other matrix.
    pub mutual_containment: bool,
    /// Random combinations of kernel vectors checked against the other matrix.
    pub spot_checks: usize,
    pub equal: bool,
}

fn annihilates(m: &DenseMatrix<i64>, alpha: &[Rational]) -> bool {
    let weights = integer_weights(alpha);
    (0..m.cols()).all(|c| {
        let mut acc = BigInt::zero();
        for (r, w) in weights.iter().enumerate() {
            let v = *m.get(r, c);
            if v != 0 && !w.is_zero() {
                acc += w * v;
            }
        }
        acc.is_zero()
    })
}

/// Compares the left kernels of the `y^2 - y` and `y^2` coefficient matrices:
/// equal dimension and mutual containment of exact bases, plus `trials`
/// random integer combinations of basis vectors checked against the other matrix.
pub fn check_sss_equivalence(n: usize, trials: usize, seed: u64) -> Result<SssCheck> {
    check_range("kernel equivalence", n, 2, 6)?;
    let m1 = moment_matrix(n, MomentKind::SquareMinusLinear)?;
    let m2 = moment_matrix(n, MomentKind::Square)?;
    let k1 = linalg::left_kernel_basis(&m1);
    let k2 = linalg::left_kernel_basis(&m2);
    let mutual_containment = k1.par_iter().all(|a| annihilates(&m2, a)) && k2.par_iter().all(|a| annihilates(&m1, a));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spot_checks = 0;
    for t in 0..trials {
        let (basis, other) = if t % 2 == 0 { (&k1, &m2) } else { (&k2, &m1) };
        if basis.is_empty() {
            continue;
        }
        let mut combo = vec![Rational::zero(); m1.rows()];
        for v in basis {
            let w = Rational::from_integer(BigInt::from(rng.gen_range(-3i64..=3)));
            if !w.is_zero() {
                for (c, x) in combo.iter_mut().zip(v) {
                    *c += x * &w;
                }
            }
        }
        if annihilates(other, &combo) {
            spot_checks += 1;
        } else {
            return Ok(SssCheck {
                n,
                kernel_dim_square_minus_linear: k1.len(),
                kernel_dim_square: k2.len(),
                mutual_containment,
                spot_checks,
                equal: false,
            });
        }
    }
    let equal = mutual_containment && k1.len() == k2.len();
    Ok(SssCheck {
        n,
        kernel_dim_square_minus_linear: k1.len(),
        kernel_dim_square: k2.len(),
        mutual_containment,
        spot_checks,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_layout() {
        let b = MonomialBasis::new(6);
        assert_eq!(b.len(), 740);
        assert_eq!(MonomialBasis::new(2).len(), 5 + 15);
        let ms = b.monomials();
        assert_eq!(ms.len(), b.len());
        for (k, &m) in ms.iter().enumerate() {
            assert_eq!(b.index(m), k);
        }
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.name(Monomial::Quadratic(0, b.z())), "x11*z");
    }

    #[test]
    fn moment_vector_n2_identity() {
        let b = MonomialBasis::new(2);
        let mv = moment_vector(&Permutation::identity(2), &b).unwrap();
        let (x11, x22, z) = (b.x(0, 0), b.x(1, 1), b.z());
        let mut expected = vec![0i64; b.len()];
        for v in [x11, x22, z] {
            expected[b.index(Monomial::Quadratic(v, v))] = 1;
            expected[b.index(Monomial::Linear(v))] = -1;
        }
        for (u, w) in [(x11, x22), (x11, z), (x22, z)] {
            expected[b.index(Monomial::Quadratic(u, w))] = 2;
        }
        assert_eq!(mv.coeffs, expected);
        assert!(moment_vector(&Permutation::identity(3), &b).is_err());
    }

    #[test]
    fn moment_vector_evaluates_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 4;
        let b = MonomialBasis::new(n);
        for s in enumerate_permutations(n).unwrap().step_by(5) {
            let mv = moment_vector(&s, &b).unwrap();
            for _ in 0..10 {
                let point: Vec<i64> = (0..n * n + 1).map(|_| rng.gen_range(-10..=10)).collect();
                let values = b.evaluate(&point);
                let inner: i64 = mv.coeffs.iter().zip(&values).map(|(c, v)| c * v).sum();
                let y: i64 = (0..n).map(|i| point[b.x(i, s.apply(i))]).sum::<i64>() + point[b.z()];
                assert_eq!(inner, y * y - y);
            }
        }
    }

    #[test]
    fn pairs_are_independent() {
        let m = moment_matrix(4, MomentKind::SquareMinusLinear).unwrap();
        for a in 0..m.rows() {
            for c in a + 1..m.rows() {
                let pair = DenseMatrix::from_rows(vec![m.row(a).to_vec(), m.row(c).to_vec()]).unwrap();
                assert_eq!(linalg::rank(&pair, RankMode::Exact), 2);
            }
        }
    }

    #[test]
    fn bound_values() {
        assert_eq!(span_dimension_bound(6).unwrap(), 704);
        assert!(span_dimension_bound(6).unwrap() < 720);
        assert_eq!(span_dimension_bound(5).unwrap(), 352);
        assert!(span_dimension_bound(1).is_err());
    }

    #[test]
    fn moment_rank_matches_vertex_rank() {
        // linear ranks: 6 at n = 3, 23 at n = 4, 78 at n = 5
        for (n, expected) in [(3, 6), (4, 23), (5, 78)] {
            let m = moment_matrix(n, MomentKind::SquareMinusLinear).unwrap();
            let mode = if n <= 4 { RankMode::Exact } else { RankMode::modp() };
            assert_eq!(linalg::rank(&m, mode), expected, "moment n={n}");
            assert_eq!(vertex_linear_rank(n, mode).unwrap(), expected, "vertex n={n}");
            assert_eq!(linalg::rank(&lifted_vertex_matrix(n).unwrap(), mode), expected, "lifted n={n}");
            assert!(expected as u64 <= span_dimension_bound(n).unwrap());
        }
    }

    #[test]
    fn small_certificates() {
        // 24 vertices at n = 4 span only 23 dimensions, so a dependence already exists
        let cert = dependence_certificate(4, 200, 3).unwrap();
        assert_eq!(cert.moment_rank, 23);
        assert!(cert.verified(200), "{cert}");
        assert!(cert.mixed_signs);
        let alpha = cert.alpha_values().unwrap();
        assert!(weighted_sum_vanishes(&cert.support, &alpha, &MonomialBasis::new(4)).unwrap());
        let mut broken = alpha.clone();
        broken[0] += Rational::one();
        assert!(!weighted_sum_vanishes(&cert.support, &broken, &MonomialBasis::new(4)).unwrap());
        assert!(check_at_random_points(&cert.support, &broken, 50, 1) < 50);
        assert!(dependence_certificate(3, 10, 0).is_err());
    }

    #[test]
    fn sss_small() {
        let check = check_sss_equivalence(4, 10, 7).unwrap();
        assert!(check.equal);
        assert_eq!(check.kernel_dim_square_minus_linear, 1);
        assert_eq!(check.kernel_dim_square, 1);
        let check = check_sss_equivalence(3, 4, 7).unwrap();
        assert!(check.equal);
        assert_eq!(check.kernel_dim_square, 0);
    }
}
