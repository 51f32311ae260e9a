//! Quadratic assignment instances in the QAPLIB text layout and their exact costs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_range, Error, Result};
use crate::linalg::{parse_rational, Rational};
use crate::perm::{enumerate_permutations, Permutation};

/// Largest size accepted by [`brute_force_optimum`].
pub const MAX_BRUTE_FORCE_N: usize = 10;

/// Minimise `sum_{i,k} A_ik B_{sigma(i) sigma(k)} + sum_i D_{i sigma(i)}`.
/// `a`, `b` and `d` are `n x n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QapInstance {
    pub id: String,
    pub n: usize,
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Vec<Rational>>,
    /// Linear term on assignment `i -> j`; all zero unless given.
    pub d: Vec<Vec<Rational>>,
}

fn zeros(n: usize) -> Vec<Vec<Rational>> {
    vec![vec![Rational::zero(); n]; n]
}

fn from_i64(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()).collect()
}

fn check_square(what: &str, n: usize, m: &[Vec<Rational>]) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::Argument(format!("matrix {what} is not {n} x {n}")));
    }
    Ok(())
}

impl QapInstance {
    pub fn new(
        id: impl Into<String>,
        a: Vec<Vec<Rational>>,
        b: Vec<Vec<Rational>>,
        d: Option<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        let n = a.len();
        check_range("instance", n, 1, usize::MAX)?;
        check_square("A", n, &a)?;
        check_square("B", n, &b)?;
        let d = d.unwrap_or_else(|| zeros(n));
        check_square("D", n, &d)?;
        Ok(Self { id: id.into(), n, a, b, d })
    }

    pub fn from_integers(id: impl Into<String>, a: &[Vec<i64>], b: &[Vec<i64>]) -> Result<Self> {
        Self::new(id, from_i64(a), from_i64(b), None)
    }

    /// All-zero flows and distances.
    pub fn zero(n: usize) -> Self {
        Self { id: format!("zero-{n}"), n, a: zeros(n), b: zeros(n), d: zeros(n) }
    }

    /// Seeded instance with `A` and `B` entries uniform in `0..=max_entry`.
    pub fn random(n: usize, max_entry: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw =
            || -> Vec<Vec<i64>> { (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..=max_entry)).collect()).collect() };
        let (a, b) = (draw(), draw());
        Self { id: format!("random-n{n}-s{seed}"), n, a: from_i64(&a), b: from_i64(&b), d: zeros(n) }
    }

    pub fn has_linear_term(&self) -> bool {
        self.d.iter().flatten().any(|x| !x.is_zero())
    }
}

fn render(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Plain integers, `num/den`, or finite decimals such as `-2.25`, all exact.
fn parse_number(token: &str) -> Option<Rational> {
    if let Some((whole, frac)) = token.split_once('.') {
        if token.contains('/') || frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{frac}", whole.trim_start_matches(['-', '+']));
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(num, den);
        return Some(if negative { -value } else { value });
    }
    parse_rational(token).ok()
}

/// Reads `n`, then `A` and `B` as `n^2` whitespace-separated numbers each; an
/// optional third block of `n^2` numbers is the linear term `D`.
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let tokens: Vec<(usize, usize, &str)> = text
        .lines()
        .enumerate()
        .flat_map(|(l, line)| line.split_whitespace().enumerate().map(move |(t, tok)| (l + 1, t + 1, tok)))
        .collect();
    let end_line = text.lines().count().max(1);
    let Some(&(line, token, first)) = tokens.first() else {
        return Err(Error::Parse { line: 1, token: 1, message: "empty input, expected the size n".into() });
    };
    let n: usize = first.parse().ok().filter(|&n| n >= 1).ok_or_else(|| Error::Parse {
        line,
        token,
        message: format!("expected a positive size, found {first:?}"),
    })?;
    let block = n * n;
    let rest = &tokens[1..];
    let mut values = Vec::with_capacity(rest.len());
    for &(line, token, tok) in rest {
        let v = parse_number(tok).ok_or_else(|| Error::Parse {
            line,
            token,
            message: format!("{tok:?} is not a number"),
        })?;
        values.push(v);
    }
    let blocks = match rest.len() {
        x if x == 2 * block => 2,
        x if x == 3 * block => 3,
        x if x < 2 * block => {
            let (line, token) = rest.last().map(|&(l, t, _)| (l, t + 1)).unwrap_or((end_line, 1));
            return Err(Error::Parse {
                line,
                token,
                message: format!("input ends after {x} of the {} matrix entries", 2 * block),
            });
        }
        _ => {
            let (line, token, _) = rest[2 * block];
            return Err(Error::Parse {
                line,
                token,
                message: format!("unexpected extra entry: expected {} or {} entries after n", 2 * block, 3 * block),
            });
        }
    };
    let matrix = |k: usize| -> Vec<Vec<Rational>> {
        values[k * block..(k + 1) * block].chunks(n).map(<[Rational]>::to_vec).collect()
    };
    let d = (blocks == 3).then(|| matrix(2));
    QapInstance::new("instance", matrix(0), matrix(1), d)
}

/// Inverse of [`parse_qaplib`]; `D` is written only when nonzero.
pub fn serialize_qaplib(inst: &QapInstance) -> String {
    let mut out = format!("{}\n", inst.n);
    let mut blocks = vec![&inst.a, &inst.b];
    if inst.has_linear_term() {
        blocks.push(&inst.d);
    }
    for m in blocks {
        out.push('\n');
        for row in m {
            let cells: Vec<String> = row.iter().map(render).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    out
}

/// `sum_{i,k} A_ik B_{sigma(i) sigma(k)} + sum_i D_{i sigma(i)}`.
pub fn permutation_cost(inst: &QapInstance, sigma: &Permutation) -> Result<Rational> {
    if sigma.n() != inst.n {
        return Err(Error::Argument(format!("permutation of size {} for an instance of size {}", sigma.n(), inst.n)));
    }
    let mut acc = Rational::zero();
    for i in 0..inst.n {
        for k in 0..inst.n {
            let a = &inst.a[i][k];
            if !a.is_zero() {
                acc += a * &inst.b[sigma.apply(i)][sigma.apply(k)];
            }
        }
        acc += &inst.d[i][sigma.apply(i)];
    }
    Ok(acc)
}

/// Exact minimum over all permutations; ties go to the lexicographically first.
pub fn brute_force_optimum(inst: &QapInstance) -> Result<(Rational, Permutation)> {
    check_range("brute-force optimum", inst.n, 1, MAX_BRUTE_FORCE_N)?;
    let mut best: Option<(Rational, Permutation)> = None;
    for sigma in enumerate_permutations(inst.n)? {
        let cost = permutation_cost(inst, &sigma)?;
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, sigma));
        }
    }
    Ok(best.expect("at least one permutation"))
}
