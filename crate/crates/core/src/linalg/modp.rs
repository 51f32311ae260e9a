//! Elimination over prime fields `Z/pZ` with `p` just below `2^62`.

use rand::Rng;

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A uniformly drawn prime in `[2^61, 2^62)`.
pub fn random_prime<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let candidate = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime(candidate) {
            return candidate;
        }
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + (p - b)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

#[inline]
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Outcome of row echelon reduction: the rank and, for each pivot, the
/// original row it came from and its column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

/// Gaussian elimination on a row-major residue matrix (consumed).
/// Pivot: first nonzero row, scanning columns left to right.
pub fn echelon(mut a: Vec<u64>, rows: usize, cols: usize, p: u64) -> Echelon {
    debug_assert_eq!(a.len(), rows * cols);
    let mut origin: Vec<usize> = (0..rows).collect();
    let mut pivot_rows = Vec::new();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    let mut nz: Vec<(usize, u64)> = Vec::with_capacity(cols);
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(found) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if found != r {
            for j in c..cols {
                a.swap(found * cols + j, r * cols + j);
            }
            origin.swap(found, r);
        }
        let inv = inv_mod(a[r * cols + c], p);
        nz.clear();
        for j in c..cols {
            let v = a[r * cols + j];
            if v != 0 {
                let scaled = mul_mod(v, inv, p);
                a[r * cols + j] = scaled;
                nz.push((j, scaled));
            }
        }
        for i in r + 1..rows {
            let f = a[i * cols + c];
            if f == 0 {
                continue;
            }
            let row = &mut a[i * cols..(i + 1) * cols];
            for &(j, v) in &nz {
                row[j] = sub_mod(row[j], mul_mod(f, v, p), p);
            }
        }
        pivot_rows.push(origin[r]);
        pivot_cols.push(c);
        r += 1;
    }
    Echelon { rank: r, pivot_rows, pivot_cols }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 97, 7919, 2_305_843_009_213_693_951];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for c in [0u64, 1, 4, 561, 7917, 2_305_843_009_213_693_953] {
            assert!(!is_prime(c), "{c}");
        }
    }

    #[test]
    fn random_primes_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let p = random_prime(&mut rng);
            assert!((1 << 61..1 << 62).contains(&p) && is_prime(p));
        }
    }

    #[test]
    fn inverse() {
        let p = 2_305_843_009_213_693_951;
        for a in [1u64, 2, 12345, p - 1] {
            assert_eq!(mul_mod(a, inv_mod(a, p), p), 1);
        }
    }

    #[test]
    fn echelon_small() {
        let p = 1_000_000_007;
        // rows: (1 1), (2 2), (0 1)
        let e = echelon(vec![1, 1, 2, 2, 0, 1], 3, 2, p);
        assert_eq!(e.rank, 2);
        assert_eq!(e.pivot_cols, vec![0, 1]);
        assert_eq!(e.pivot_rows, vec![0, 2]);
    }
}
