//! Finding family inequalities violated by a point in canonical coordinates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facets::{expand_generic, make_nonneg, make_triple, GenericInequality, LinearInequality, MtermSpec};
use crate::perm::{CoordSpace, PairIndex};

/// Smallest violation reported as a cut.
pub const VIOLATION_THRESHOLD: f64 = 1e-7;
pub const DEFAULT_BUDGET: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutFamily {
    Nonneg,
    Triple,
    /// Every `m` in `3..=n-3`.
    Mterm,
}

impl CutFamily {
    pub const ALL: [CutFamily; 3] = [CutFamily::Nonneg, CutFamily::Triple, CutFamily::Mterm];
}

impl fmt::Display for CutFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutFamily::Nonneg => "nonneg",
            CutFamily::Triple => "triple",
            CutFamily::Mterm => "mterm",
        })
    }
}

impl FromStr for CutFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nonneg" => Ok(CutFamily::Nonneg),
            "triple" => Ok(CutFamily::Triple),
            "mterm" => Ok(CutFamily::Mterm),
            other => Err(Error::Argument(format!("unknown cut family {other:?}; expected nonneg, triple or mterm"))),
        }
    }
}

/// Comma-separated family list such as `"nonneg,triple"`.
pub fn parse_families(text: &str) -> Result<Vec<CutFamily>> {
    let mut out: Vec<CutFamily> =
        text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// A violated member: `inequality` is the expansion with hull-pinned
/// coordinates dropped, `violation` is minus its gcd-normalised value at the point.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub family: CutFamily,
    pub generic: GenericInequality,
    pub inequality: LinearInequality,
    pub violation: f64,
}

impl Cut {
    fn new(family: CutFamily, generic: GenericInequality, point: &[f64]) -> Result<Self> {
        let inequality = expand_generic(&generic).without_pinned();
        let violation = -inequality.integer_form()?.value_at_point(point);
        Ok(Self { family, generic, inequality, violation })
    }
}

struct View<'a> {
    space: CoordSpace,
    n: usize,
    point: &'a [f64],
}

impl View<'_> {
    fn y(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        self.point[self.space.index(a.0 * self.n + a.1, b.0 * self.n + b.1)]
    }

    /// `sum_r Y_{c_r,kl} - sum_{r<s} Y_{c_r,c_s} - Y_{kl,kl}`; positive means violated
    /// for both the triple and the `m`-term families.
    fn violation(&self, cells: &[(usize, usize)], kl: (usize, usize)) -> f64 {
        let mut v = -self.y(kl, kl);
        for (r, &c) in cells.iter().enumerate() {
            v += self.y(c, kl);
            for &d in &cells[r + 1..] {
                if c.0 != d.0 && c.1 != d.1 {
                    v -= self.y(c, d);
                }
            }
        }
        v
    }
}

fn nonneg_candidates(view: &View) -> Vec<(f64, GenericInequality)> {
    let (n, side) = (view.n, view.n * view.n);
    let mut out = Vec::new();
    for p in 0..side {
        for q in p + 1..side {
            if view.space.is_pinned(p, q) {
                continue;
            }
            let v = -view.point[view.space.index(p, q)];
            if v > VIOLATION_THRESHOLD {
                let (a, b) = (PairIndex::from_flat(n, p), PairIndex::from_flat(n, q));
                out.push((v, make_nonneg(n, a.i, a.j, b.i, b.j).expect("unpinned off-diagonal pair")));
            }
        }
    }
    out
}

fn triple_candidates(view: &View, k: usize, l: usize) -> Vec<(f64, GenericInequality)> {
    let n = view.n;
    let mut out = Vec::new();
    for p1 in (0..n).filter(|&x| x != k) {
        for p2 in (0..n).filter(|&x| x != k && x != p1) {
            for q1 in (0..n).filter(|&x| x != l) {
                for q2 in (0..n).filter(|&x| x != l && x != q1) {
                    let v = view.violation(&[(p1, q1), (p2, q2), (p1, q2)], (k, l));
                    if v > VIOLATION_THRESHOLD {
                        out.push((v, make_triple(n, p1, q1, p2, q2, k, l).expect("distinct indices")));
                    }
                }
            }
        }
    }
    out
}

/// Greedy growth from every seed cell: add the free cell with the largest
/// marginal violation until it stops increasing (always reaching size 3), and
/// keep the best set of admissible size.
fn mterm_candidates(view: &View, k: usize, l: usize) -> Vec<(f64, GenericInequality)> {
    let n = view.n;
    let max_m = n.saturating_sub(3);
    if max_m < 3 {
        return Vec::new();
    }
    let mut found: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    for si in (0..n).filter(|&i| i != k) {
        for sj in (0..n).filter(|&j| j != l) {
            let mut cells = vec![(si, sj)];
            let mut current = view.violation(&cells, (k, l));
            let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
            while cells.len() < max_m {
                let gain = |c: (usize, usize)| view.y(c, (k, l)) - cells.iter().map(|&d| view.y(c, d)).sum::<f64>();
                let next = (0..n)
                    .filter(|&i| i != k && cells.iter().all(|c| c.0 != i))
                    .flat_map(|i| (0..n).filter(|&j| j != l && cells.iter().all(|c| c.1 != j)).map(move |j| (i, j)))
                    .map(|c| (gain(c), c))
                    .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
                let Some((g, c)) = next else { break };
                if g <= 0.0 && cells.len() >= 3 {
                    break;
                }
                cells.push(c);
                current += g;
                if cells.len() >= 3 && best.as_ref().is_none_or(|(v, _)| current > *v) {
                    best = Some((current, cells.clone()));
                }
            }
            if let Some((v, mut cells)) = best.filter(|(v, _)| *v > VIOLATION_THRESHOLD) {
                cells.sort();
                if !found.iter().any(|(_, c)| *c == cells) {
                    found.push((v, cells));
                }
            }
        }
    }
    found
        .into_iter()
        .map(|(v, cells)| (v, MtermSpec::new(n, cells, k, l).expect("distinct rows and columns").inequality()))
        .collect()
}

/// Violated members of `families` at `point` (dense canonical coordinates),
/// strongest first, at most `budget`. Nonneg separation is exact, triple
/// separation enumerates every member, `m`-term separation is a heuristic.
pub fn separate(point: &[f64], families: &[CutFamily], n: usize, budget: usize) -> Result<Vec<Cut>> {
    let space = CoordSpace::new(n);
    if point.len() != space.len() {
        return Err(Error::Argument(format!("point has {} coordinates, expected {}", point.len(), space.len())));
    }
    let view = View { space, n, point };
    let mut raw: Vec<(f64, CutFamily, GenericInequality)> = Vec::new();
    for &family in families {
        let found: Vec<(f64, GenericInequality)> = match family {
            CutFamily::Nonneg => nonneg_candidates(&view),
            CutFamily::Triple if n >= 3 => per_cell(n, |k, l| triple_candidates(&view, k, l)),
            CutFamily::Mterm => per_cell(n, |k, l| mterm_candidates(&view, k, l)),
            CutFamily::Triple => Vec::new(),
        };
        raw.extend(found.into_iter().map(|(v, g)| (v, family, g)));
    }
    raw.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
    raw.dedup_by(|a, b| a.2 == b.2);
    raw.truncate(budget);
    raw.into_iter().map(|(_, family, g)| Cut::new(family, g, point)).collect()
}

fn per_cell<F>(n: usize, f: F) -> Vec<(f64, GenericInequality)>
where
    F: Fn(usize, usize) -> Vec<(f64, GenericInequality)> + Sync,
{
    (0..n * n).into_par_iter().flat_map_iter(|c| f(c / n, c % n)).collect()
}
