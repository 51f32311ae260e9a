//! Dense simplex for `min c.x` subject to `A x = b`, `x >= 0`, over floating
//! point (with tolerances) or exact rationals. Inequality rows appended after
//! the first solve are handled by dual simplex.

use std::fmt::Debug;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, Rational};

/// Feasibility and optimality tolerance of the floating-point solver.
pub const FLOAT_TOLERANCE: f64 = 1e-9;
/// Entries smaller than this are flushed to zero after each pivot.
const FLOAT_FLUSH: f64 = 1e-12;

pub trait LpScalar: Clone + Debug + PartialOrd + Send + Sync {
    fn zero_value() -> Self;
    fn from_rational(x: &Rational) -> Self;
    fn as_f64(&self) -> f64;
    /// Strictly above the tolerance.
    fn is_pos(&self) -> bool;
    /// Strictly below minus the tolerance.
    fn is_neg(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn over(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Rounds negligible values to exact zero.
    fn flush(&mut self) {}
    fn is_nonzero(&self) -> bool {
        self.is_pos() || self.is_neg()
    }
    fn is_exact_zero(&self) -> bool;
    /// Pivots between rebuilds of the tableau from the original rows; `None`
    /// when arithmetic is exact and no drift can accumulate.
    const REFRESH_INTERVAL: Option<usize>;
}

impl LpScalar for f64 {
    const REFRESH_INTERVAL: Option<usize> = Some(100);
    fn zero_value() -> Self {
        0.0
    }
    fn from_rational(x: &Rational) -> Self {
        ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn over(&self, other: &Self) -> Self {
        self / other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
    fn flush(&mut self) {
        if self.abs() < FLOAT_FLUSH {
            *self = 0.0;
        }
    }
}

impl LpScalar for Rational {
    const REFRESH_INTERVAL: Option<usize> = None;
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn from_rational(x: &Rational) -> Self {
        x.clone()
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_exact_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn over(&self, other: &Self) -> Self {
        self / other
    }
    fn negated(&self) -> Self {
        -self
    }
}

/// `min c.x` subject to `rows[i].x = rhs[i]`, `x >= 0`; rows are sparse `(column, value)` lists.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardForm {
    pub columns: usize,
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub rhs: Vec<Rational>,
    pub cost: Vec<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Basic solution over the original columns followed by added slacks;
    /// meaningful only when optimal.
    pub values: Vec<T>,
    pub objective: T,
    pub pivots: usize,
}

/// Dense tableau kept between solves so rows can be appended and the
/// optimum restored by dual simplex.
///
/// Column layout: the original columns, one artificial column per
/// independent equality row (together the current basis inverse), then one
/// slack per added row. In floating point the tableau is periodically
/// rebuilt from the untouched constraint rows to shed rounding drift.
#[derive(Clone, Debug)]
pub struct Simplex<T> {
    /// Constraint rows as given (sign-normalised), over every column.
    matrix: Vec<Vec<T>>,
    matrix_rhs: Vec<T>,
    since_refresh: usize,
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    /// Reduced costs of every column.
    reduced: Vec<T>,
    /// Minus the objective value.
    value: T,
    basis: Vec<usize>,
    /// Cost of every column; zero on artificials and slacks.
    cost: Vec<T>,
    original: usize,
    artificial: usize,
    status: LpStatus,
    pivots: usize,
    max_pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    Infeasible,
}

impl<T: LpScalar> Simplex<T> {
    fn width(&self) -> usize {
        self.reduced.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        (self.original..self.original + self.artificial).contains(&j)
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<()> {
        if self.pivots >= self.max_pivots {
            return Err(Error::Lp(format!("pivot limit {} reached", self.max_pivots)));
        }
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = x.over(&p);
            x.flush();
        }
        self.rhs[r] = self.rhs[r].over(&p);
        self.rhs[r].flush();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_exact_zero() || j == c).collect();
        let eliminate = |row: &mut Vec<T>, rhs: &mut T| {
            let f = row[c].clone();
            if f.is_exact_zero() {
                return;
            }
            for &j in &nonzero {
                row[j] = row[j].minus(&f.times(&pivot_row[j]));
                row[j].flush();
            }
            row[c] = T::zero_value();
            *rhs = rhs.minus(&f.times(&pivot_rhs));
            rhs.flush();
        };
        for (i, (row, rhs)) in self.rows.iter_mut().zip(self.rhs.iter_mut()).enumerate() {
            if i != r {
                eliminate(row, rhs);
            }
        }
        eliminate(&mut self.reduced, &mut self.value);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
        self.pivots += 1;
        self.since_refresh += 1;
        if T::REFRESH_INTERVAL.is_some_and(|k| self.since_refresh >= k) {
            self.refresh()?;
        }
        Ok(())
    }

    /// True when a rebuild happened, so a termination test should be repeated.
    fn refresh_if_stale(&mut self) -> Result<bool> {
        if T::REFRESH_INTERVAL.is_none() || self.since_refresh == 0 {
            return Ok(false);
        }
        self.refresh()?;
        Ok(true)
    }

    /// Recomputes the tableau as `B^-1 [matrix | rhs]` for the current basis
    /// by Gauss-Jordan elimination with partial pivoting.
    fn refresh(&mut self) -> Result<()> {
        let m = self.rows.len();
        let w = self.width();
        let mut aug: Vec<Vec<T>> = (0..m)
            .map(|i| {
                let mut row: Vec<T> = self.basis.iter().map(|&b| self.matrix[i][b].clone()).collect();
                row.extend(self.matrix[i].iter().cloned());
                row.push(self.matrix_rhs[i].clone());
                row
            })
            .collect();
        for k in 0..m {
            let piv = (k..m)
                .max_by(|&a, &b| aug[a][k].as_f64().abs().total_cmp(&aug[b][k].as_f64().abs()))
                .expect("nonempty range");
            if !aug[piv][k].is_nonzero() {
                return Err(Error::Lp("basis became singular during refactorisation".into()));
            }
            aug.swap(k, piv);
            let p = aug[k][k].clone();
            for x in aug[k].iter_mut() {
                *x = x.over(&p);
            }
            let prow = std::mem::take(&mut aug[k]);
            let nonzero: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_exact_zero()).collect();
            for row in aug.iter_mut() {
                if row.is_empty() {
                    continue;
                }
                let f = row[k].clone();
                if f.is_exact_zero() {
                    continue;
                }
                for &j in &nonzero {
                    row[j] = row[j].minus(&f.times(&prow[j]));
                }
            }
            aug[k] = prow;
        }
        for (k, row) in aug.into_iter().enumerate() {
            let mut tab: Vec<T> = row[m..m + w].to_vec();
            for x in tab.iter_mut() {
                x.flush();
            }
            for (j, &b) in self.basis.iter().enumerate() {
                tab[b] = if j == k { T::from_rational(&Rational::one()) } else { T::zero_value() };
            }
            let mut rhs = row[m + w].clone();
            rhs.flush();
            self.rows[k] = tab;
            self.rhs[k] = rhs;
        }
        self.set_costs();
        self.since_refresh = 0;
        Ok(())
    }

    /// Most negative reduced cost among non-artificial columns.
    fn entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in (0..self.width()).filter(|&j| !self.is_artificial(j) && self.reduced[j].is_neg()) {
            if best.is_none_or(|b| self.reduced[j] < self.reduced[b]) {
                best = Some(j);
            }
        }
        best
    }

    /// Lexicographic minimum ratio test on `(rhs, basis inverse row) / pivot`,
    /// which rules out cycling and degenerate stalling.
    fn leaving(&self, c: usize) -> Option<usize> {
        let mut tied: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i][c].is_pos()).collect();
        let ratio = |i: usize, k: Option<usize>| match k {
            None => self.rhs[i].over(&self.rows[i][c]),
            Some(k) => self.rows[i][k].over(&self.rows[i][c]),
        };
        let keys = std::iter::once(None).chain((self.original..self.original + self.artificial).map(Some));
        for k in keys {
            if tied.len() <= 1 {
                break;
            }
            let min = tied.iter().map(|&i| ratio(i, k)).reduce(|a, b| if b < a { b } else { a }).expect("nonempty");
            tied.retain(|&i| !ratio(i, k).minus(&min).is_pos());
        }
        tied.first().copied()
    }

    fn primal(&mut self) -> Result<Outcome> {
        loop {
            let Some(c) = self.entering() else {
                if self.refresh_if_stale()? {
                    continue;
                }
                return Ok(Outcome::Optimal);
            };
            let Some(r) = self.leaving(c) else {
                if self.refresh_if_stale()? {
                    continue;
                }
                return Ok(Outcome::Unbounded);
            };
            self.pivot(r, c)?;
        }
    }

    /// Restores primal feasibility from a dual feasible basis: the most
    /// negative row leaves, the entering column keeps reduced costs
    /// nonnegative (ties to the smallest index).
    fn dual(&mut self) -> Result<Outcome> {
        loop {
            let mut leave: Option<usize> = None;
            for i in (0..self.rows.len()).filter(|&i| self.rhs[i].is_neg()) {
                if leave.is_none_or(|l| self.rhs[i] < self.rhs[l]) {
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                if self.refresh_if_stale()? {
                    continue;
                }
                return Ok(Outcome::Optimal);
            };
            let mut enter: Option<(usize, T)> = None;
            for j in (0..self.width()).filter(|&j| !self.is_artificial(j) && self.rows[r][j].is_neg()) {
                let ratio = self.reduced[j].over(&self.rows[r][j].negated());
                if enter.as_ref().is_none_or(|(_, best)| ratio.minus(best).is_neg()) {
                    enter = Some((j, ratio));
                }
            }
            let Some((c, _)) = enter else {
                if self.refresh_if_stale()? {
                    continue;
                }
                return Ok(Outcome::Infeasible);
            };
            self.pivot(r, c)?;
        }
    }

    fn set_costs(&mut self) {
        let mut reduced = self.cost.clone();
        let mut value = T::zero_value();
        for ((row, rhs), &b) in self.rows.iter().zip(&self.rhs).zip(&self.basis) {
            let cb = &self.cost[b];
            if !cb.is_nonzero() {
                continue;
            }
            for (r, x) in reduced.iter_mut().zip(row) {
                *r = r.minus(&cb.times(x));
            }
            value = value.minus(&cb.times(rhs));
        }
        self.reduced = reduced;
        self.value = value;
    }

    fn record(&mut self, outcome: Outcome) {
        self.status = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::Infeasible => LpStatus::Infeasible,
        };
    }

    /// Two-phase primal simplex with Dantzig pricing and a lexicographic
    /// ratio test. Linearly dependent equality rows are removed first (an
    /// inconsistent dependent row makes the program infeasible); artificials
    /// never re-enter.
    pub fn solve(lp: &StandardForm) -> Result<Self> {
        let n = lp.columns;
        if lp.rhs.len() != lp.rows.len() || lp.cost.len() != n {
            return Err(Error::Lp("row, right-hand side and cost sizes disagree".into()));
        }
        let mut dense_rows: Vec<Vec<Rational>> = Vec::with_capacity(lp.rows.len());
        for (row, b) in lp.rows.iter().zip(&lp.rhs) {
            let mut dense = vec![Rational::zero(); n + 1];
            for (j, v) in row {
                if *j >= n {
                    return Err(Error::Lp(format!("column {j} outside {n} variables")));
                }
                dense[*j] += v;
            }
            dense[n] = b.clone();
            rows_sign_normalise(&mut dense);
            dense_rows.push(dense);
        }
        let kept = if dense_rows.is_empty() {
            Vec::new()
        } else {
            let lhs: Vec<Vec<Rational>> = dense_rows.iter().map(|r| r[..n].to_vec()).collect();
            let kept = linalg::independent_rows(&DenseMatrix::from_rows(lhs)?);
            let augmented = linalg::independent_rows(&DenseMatrix::from_rows(dense_rows.clone())?);
            if augmented.len() > kept.len() {
                return Ok(Self::infeasible(n));
            }
            kept
        };
        let m = kept.len();
        let width = n + m;
        let mut matrix = Vec::with_capacity(m);
        let mut matrix_rhs = Vec::with_capacity(m);
        for (i, &src) in kept.iter().enumerate() {
            let mut row: Vec<T> = dense_rows[src][..n].iter().map(T::from_rational).collect();
            row.resize(width, T::zero_value());
            row[n + i] = T::from_rational(&Rational::one());
            matrix.push(row);
            matrix_rhs.push(T::from_rational(&dense_rows[src][n]));
        }
        let mut phase_one = vec![T::zero_value(); width];
        for x in &mut phase_one[n..] {
            *x = T::from_rational(&Rational::one());
        }
        let mut s = Simplex {
            rows: matrix.clone(),
            rhs: matrix_rhs.clone(),
            matrix,
            matrix_rhs,
            since_refresh: 0,
            reduced: Vec::new(),
            value: T::zero_value(),
            basis: (n..n + m).collect(),
            cost: phase_one,
            original: n,
            artificial: m,
            status: LpStatus::Optimal,
            pivots: 0,
            max_pivots: 50 * (n + m) + 1000,
        };
        s.set_costs();
        s.primal()?;
        if s.value.negated().is_pos() {
            s.status = LpStatus::Infeasible;
            return Ok(s);
        }
        for r in 0..s.rows.len() {
            if s.basis[r] < n {
                continue;
            }
            // rows are independent, so some structural column can replace the artificial
            let col = (0..n).filter(|&j| s.rows[r][j].is_nonzero()).max_by(|&a, &b| {
                let (x, y) = (s.rows[r][a].as_f64().abs(), s.rows[r][b].as_f64().abs());
                x.total_cmp(&y).then(b.cmp(&a))
            });
            let Some(c) = col else {
                return Err(Error::Lp("artificial column cannot leave an independent row".into()));
            };
            s.pivot(r, c)?;
        }
        s.cost = lp.cost.iter().map(T::from_rational).collect();
        s.cost.resize(width, T::zero_value());
        s.set_costs();
        let outcome = s.primal()?;
        s.record(outcome);
        Ok(s)
    }

    fn infeasible(n: usize) -> Self {
        Simplex {
            matrix: Vec::new(),
            matrix_rhs: Vec::new(),
            since_refresh: 0,
            rows: Vec::new(),
            rhs: Vec::new(),
            reduced: vec![T::zero_value(); n],
            value: T::zero_value(),
            basis: Vec::new(),
            cost: vec![T::zero_value(); n],
            original: n,
            artificial: 0,
            status: LpStatus::Infeasible,
            pivots: 0,
            max_pivots: 0,
        }
    }

    /// Appends `sum a_j x_j + constant >= 0` over the current columns with a
    /// new basic slack and re-optimises by dual simplex; the objective cannot
    /// decrease. Requires an optimal tableau.
    pub fn add_row(&mut self, coeffs: &[(usize, Rational)], constant: &Rational) -> Result<()> {
        if self.status != LpStatus::Optimal {
            return Err(Error::Lp(format!("cannot add a row to a {:?} tableau", self.status)));
        }
        let width = self.width();
        // slack - a.x = constant, then eliminate the basic columns
        let mut row = vec![T::zero_value(); width + 1];
        for (j, a) in coeffs {
            if *j >= width || self.is_artificial(*j) {
                return Err(Error::Lp(format!("row references column {j}, which is not a structural column")));
            }
            row[*j] = row[*j].minus(&T::from_rational(a));
        }
        row[width] = T::from_rational(&Rational::one());
        let mut rhs = T::from_rational(constant);
        for ((brow, brhs), &b) in self.rows.iter().zip(&self.rhs).zip(&self.basis) {
            let f = row[b].clone();
            if f.is_exact_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(brow) {
                *x = x.minus(&f.times(y));
                x.flush();
            }
            row[b] = T::zero_value();
            rhs = rhs.minus(&f.times(brhs));
        }
        for r in self.rows.iter_mut().chain(self.matrix.iter_mut()) {
            r.push(T::zero_value());
        }
        let mut original = vec![T::zero_value(); width + 1];
        for (j, a) in coeffs {
            original[*j] = original[*j].minus(&T::from_rational(a));
        }
        original[width] = T::from_rational(&Rational::one());
        self.matrix.push(original);
        self.matrix_rhs.push(T::from_rational(constant));
        self.reduced.push(T::zero_value());
        self.cost.push(T::zero_value());
        self.rows.push(row);
        self.rhs.push(rhs);
        self.basis.push(width);
        let outcome = self.dual()?;
        self.record(outcome);
        Ok(())
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    pub fn objective(&self) -> T {
        self.value.negated()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Values of the original columns followed by the added slacks.
    pub fn values(&self) -> Vec<T> {
        let mut values = vec![T::zero_value(); self.width()];
        for (rhs, &b) in self.rhs.iter().zip(&self.basis) {
            values[b] = rhs.clone();
        }
        values.drain(self.original..self.original + self.artificial);
        values
    }

    pub fn solution(&self) -> LpSolution<T> {
        let values = self.values();
        let objective =
            self.cost[..self.original].iter().zip(&values).fold(T::zero_value(), |acc, (c, x)| acc.plus(&c.times(x)));
        LpSolution { status: self.status, values, objective, pivots: self.pivots }
    }
}

/// Makes the right-hand side (last entry) nonnegative.
fn rows_sign_normalise(row: &mut [Rational]) {
    if row.last().is_some_and(Signed::is_negative) {
        for x in row.iter_mut() {
            *x = -x.clone();
        }
    }
}

/// One-shot solve of a standard form program.
pub fn solve_standard<T: LpScalar>(lp: &StandardForm) -> Result<LpSolution<T>> {
    Ok(Simplex::solve(lp)?.solution())
}
