//! Fraction-free (Bareiss) elimination over the integers.
//!
//! After `k` pivot steps every entry is a `(k+1) x (k+1)` minor of the input,
//! so all divisions by the previous pivot are exact and coefficient growth
//! stays bounded by Hadamard's inequality.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Forward elimination only; returns the rank.
pub fn rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(found) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(found, r);
        let (head, tail) = a.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pivot = &pivot_row[c];
        for row in tail.iter_mut() {
            let factor = std::mem::take(&mut row[c]);
            for j in c + 1..cols {
                let updated =
                    if factor.is_zero() { pivot * &row[j] } else { pivot * &row[j] - &factor * &pivot_row[j] };
                row[j] = if prev.is_one() { updated } else { updated / &prev };
            }
        }
        prev = head[r][c].clone();
        r += 1;
    }
    r
}

/// Result of fraction-free Gauss-Jordan reduction: every pivot equals
/// `denominator`, and all other entries of pivot columns are zero.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub matrix: Vec<Vec<BigInt>>,
    pub pivot_cols: Vec<usize>,
    pub denominator: BigInt,
}

/// Fraction-free Gauss-Jordan reduction. Pivots are only searched in the
/// first `pivot_limit` columns; later columns (right-hand sides) are carried along.
pub fn reduce(mut a: Vec<Vec<BigInt>>, pivot_limit: usize) -> Reduced {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..pivot_limit.min(cols) {
        if r == rows {
            break;
        }
        let Some(found) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(found, r);
        let pivot_row = std::mem::take(&mut a[r]);
        let pivot = &pivot_row[c];
        for (i, row) in a.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = std::mem::take(&mut row[c]);
            for j in 0..cols {
                if j == c {
                    continue;
                }
                let updated = if factor.is_zero() {
                    if row[j].is_zero() {
                        continue;
                    }
                    pivot * &row[j]
                } else {
                    pivot * &row[j] - &factor * &pivot_row[j]
                };
                row[j] = if prev.is_one() { updated } else { updated / &prev };
            }
        }
        prev = pivot.clone();
        a[r] = pivot_row;
        pivot_cols.push(c);
        r += 1;
    }
    Reduced { matrix: a, pivot_cols, denominator: prev }
}
