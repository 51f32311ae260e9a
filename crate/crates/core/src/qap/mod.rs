//! Lower bounds for quadratic assignment from the linear relaxation over the
//! affine hull of the second-order Birkhoff polytope, tightened by family cuts.

mod instance;
mod separation;
mod simplex;

use std::collections::HashSet;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

pub use instance::{
    brute_force_optimum, parse_qaplib, permutation_cost, serialize_qaplib, QapInstance, MAX_BRUTE_FORCE_N,
};
pub use separation::{parse_families, separate, Cut, CutFamily, DEFAULT_BUDGET, VIOLATION_THRESHOLD};
pub use simplex::{solve_standard, LpScalar, LpSolution, LpStatus, Simplex, StandardForm, FLOAT_TOLERANCE};

use crate::affine_hull::{build_equation_system, Provenance};
use crate::error::{check_range, Error, Result};
use crate::facets::{GenericInequality, LinearInequality};
use crate::linalg::{format_rational, Rational};
use crate::perm::{CoordSpace, PairIndex, Permutation, SecondOrderVertex};

/// Largest size of the relaxation under the default guards.
pub const MAX_LP_N: usize = 6;
/// Largest size solved in exact rational arithmetic.
pub const MAX_EXACT_LP_N: usize = 4;
pub const DEFAULT_MAX_ROUNDS: usize = 20;
/// Allowed excess of a bound over the brute-force optimum.
pub const SOUNDNESS_SLACK: f64 = 1e-6;

/// Relaxation in canonical coordinates with hull-pinned coordinates removed:
/// hull equalities, `y >= 0`, and one `a.y + c >= 0` row per cut.
#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub n: usize,
    /// Canonical index of each LP variable.
    pub variables: Vec<usize>,
    /// LP variable of each canonical index, `None` when pinned.
    pub column_of: Vec<Option<usize>>,
    /// Sparse equality rows over LP variables.
    pub equalities: Vec<(Vec<(usize, i64)>, i64)>,
    pub cuts: Vec<LinearInequality>,
}

pub fn build_lp(n: usize, cuts: Vec<LinearInequality>) -> Result<LpModel> {
    check_range("relaxation", n, 2, MAX_LP_N)?;
    let space = CoordSpace::new(n);
    let mut variables = Vec::new();
    let mut column_of = vec![None; space.len()];
    for (idx, slot) in column_of.iter_mut().enumerate() {
        let (p, q) = space.pair(idx);
        if !space.is_pinned(p, q) {
            *slot = Some(variables.len());
            variables.push(idx);
        }
    }
    let mut equalities = Vec::new();
    for eq in build_equation_system(n)?.equations {
        if eq.provenance == Provenance::ZeroBlock {
            continue;
        }
        let mut terms: std::collections::BTreeMap<usize, i64> = std::collections::BTreeMap::new();
        for (&(p, q), &c) in &eq.coeffs {
            if let Some(col) = column_of[space.index(p, q)] {
                *terms.entry(col).or_insert(0) += c;
            }
        }
        terms.retain(|_, c| *c != 0);
        if terms.is_empty() {
            if eq.rhs != 0 {
                return Err(Error::Lp(format!("equation {} reduces to 0 = {}", eq.render(n), eq.rhs)));
            }
            continue;
        }
        equalities.push((terms.into_iter().collect(), eq.rhs));
    }
    let mut model = LpModel { n, variables, column_of, equalities, cuts: Vec::new() };
    for cut in cuts {
        model.add_cut(cut)?;
    }
    Ok(model)
}

impl LpModel {
    /// Adds `cut` with hull-pinned coefficients dropped.
    pub fn add_cut(&mut self, cut: LinearInequality) -> Result<()> {
        if cut.n != self.n {
            return Err(Error::Argument(format!("cut of size {} for a model of size {}", cut.n, self.n)));
        }
        self.cuts.push(cut.without_pinned());
        Ok(())
    }

    /// Dense canonical vector of an LP solution, zero on pinned coordinates.
    pub fn canonical_point(&self, values: &[f64]) -> Vec<f64> {
        let mut point = vec![0.0; self.column_of.len()];
        for (&idx, &v) in self.variables.iter().zip(values) {
            point[idx] = v;
        }
        point
    }

    /// Equalities and `y >= 0` only.
    fn base_form(&self, objective: &[Rational]) -> Result<StandardForm> {
        if objective.len() != self.variables.len() {
            return Err(Error::Argument(format!(
                "objective has {} entries, model has {} variables",
                objective.len(),
                self.variables.len()
            )));
        }
        let rows = self
            .equalities
            .iter()
            .map(|(terms, _)| terms.iter().map(|&(j, c)| (j, Rational::from_integer(c.into()))).collect())
            .collect();
        let rhs = self.equalities.iter().map(|(_, b)| Rational::from_integer((*b).into())).collect();
        Ok(StandardForm { columns: self.variables.len(), rows, rhs, cost: objective.to_vec() })
    }

    /// A cut as sparse coefficients over LP variables and its constant.
    fn cut_row(&self, cut: &LinearInequality) -> Result<(Vec<(usize, Rational)>, Rational)> {
        let space = CoordSpace::new(self.n);
        let mut row = Vec::with_capacity(cut.diag.len() + cut.off.len());
        for (&(i, j), v) in &cut.diag {
            let p = i * self.n + j;
            row.push((self.live(&space, p, p)?, v.clone()));
        }
        for (&(p, q), v) in &cut.off {
            row.push((self.live(&space, p, q)?, v.clone()));
        }
        Ok((row, cut.constant.clone()))
    }

    fn live(&self, space: &CoordSpace, p: usize, q: usize) -> Result<usize> {
        self.column_of[space.index(p, q)]
            .ok_or_else(|| Error::Lp(format!("cut references pinned coordinate {}", space.label(p, q))))
    }
}

/// Cost vector over LP variables: `A_ii B_jj + D_ij` on `Y_{ij,ij}` and
/// `A_ik B_jl + A_ki B_lj` on `Y_{ij,kl}` for `ij < kl`.
pub fn objective_vector(inst: &QapInstance, model: &LpModel) -> Result<Vec<Rational>> {
    if inst.n != model.n {
        return Err(Error::Argument(format!("instance of size {} for a model of size {}", inst.n, model.n)));
    }
    let n = inst.n;
    let space = CoordSpace::new(n);
    Ok(model
        .variables
        .iter()
        .map(|&idx| {
            let (p, q) = space.pair(idx);
            let (a, b) = (PairIndex::from_flat(n, p), PairIndex::from_flat(n, q));
            if p == q {
                &inst.a[a.i][a.i] * &inst.b[a.j][a.j] + &inst.d[a.i][a.j]
            } else {
                &inst.a[a.i][b.i] * &inst.b[a.j][b.j] + &inst.a[b.i][a.i] * &inst.b[b.j][a.j]
            }
        })
        .collect())
}

/// `objective . vertex(sigma)`, exact.
pub fn objective_at_vertex(model: &LpModel, objective: &[Rational], sigma: &Permutation) -> Rational {
    let space = CoordSpace::new(model.n);
    SecondOrderVertex::new(sigma)
        .canonical_support(&space)
        .into_iter()
        .filter_map(|idx| model.column_of[idx])
        .map(|col| objective[col].clone())
        .sum()
}

/// Solves the equalities, then appends each cut by dual simplex. Solution
/// values are over LP variables followed by cut slacks.
pub fn solve_lp<T: LpScalar>(model: &LpModel, objective: &[Rational]) -> Result<LpSolution<T>> {
    let mut simplex = Simplex::<T>::solve(&model.base_form(objective)?)?;
    for cut in &model.cuts {
        if simplex.status() != LpStatus::Optimal {
            break;
        }
        let (row, constant) = model.cut_row(cut)?;
        simplex.add_row(&row, &constant)?;
    }
    Ok(simplex.solution())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub families: Vec<CutFamily>,
    pub max_rounds: usize,
    pub budget: usize,
    pub brute_force: bool,
    pub arithmetic: Arithmetic,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            families: CutFamily::ALL.to_vec(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            budget: DEFAULT_BUDGET,
            brute_force: false,
            arithmetic: Arithmetic::Float,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRound {
    /// Optimal value of this round's relaxation.
    pub bound: f64,
    /// Cuts added before this round's solve.
    pub cuts_added: usize,
    /// Largest violation among those cuts at the previous round's solution.
    pub max_violation: f64,
    /// Pivots spent in this round.
    pub pivots: usize,
    pub seconds: f64,
    /// Exact value, present in exact arithmetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_bound: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    NoViolatedCut,
    RoundLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub instance: String,
    pub n: usize,
    pub arithmetic: Arithmetic,
    pub families: Vec<CutFamily>,
    pub rounds: Vec<BoundRound>,
    pub final_bound: f64,
    pub termination: Termination,
    /// Every cut added, as 1-based generic records `(i, j, weight)` and threshold.
    pub cut_pool: Vec<CutRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_permutation: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRecord {
    pub family: CutFamily,
    pub weights: Vec<(usize, usize, i64)>,
    pub beta: i64,
}

impl CutRecord {
    fn from_generic(family: CutFamily, g: &GenericInequality) -> Self {
        let weights = g.coeffs().iter().map(|(&(i, j), &c)| (i + 1, j + 1, c)).collect();
        Self { family, weights, beta: g.beta() }
    }
}

impl BoundReport {
    /// Each round's bound is at least the previous one minus `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.rounds.windows(2).all(|w| w[1].bound >= w[0].bound - slack)
    }
}

/// A live relaxation in either arithmetic.
enum Relaxation {
    Float(Simplex<f64>),
    Exact(Simplex<Rational>),
}

struct Snapshot {
    value: f64,
    exact: Option<Rational>,
    point: Vec<f64>,
    pivots: usize,
}

impl Relaxation {
    fn new(model: &LpModel, objective: &[Rational], arithmetic: Arithmetic) -> Result<Self> {
        let form = model.base_form(objective)?;
        Ok(match arithmetic {
            Arithmetic::Float => Relaxation::Float(Simplex::solve(&form)?),
            Arithmetic::Exact => Relaxation::Exact(Simplex::solve(&form)?),
        })
    }

    fn add_row(&mut self, row: &[(usize, Rational)], constant: &Rational) -> Result<()> {
        match self {
            Relaxation::Float(s) => s.add_row(row, constant),
            Relaxation::Exact(s) => s.add_row(row, constant),
        }
    }

    fn snapshot(&self, model: &LpModel) -> Result<Snapshot> {
        fn take<T: LpScalar>(model: &LpModel, s: &Simplex<T>) -> Result<(f64, Vec<f64>, usize, T)> {
            match s.status() {
                LpStatus::Optimal => {
                    let values: Vec<f64> = s.values()[..model.variables.len()].iter().map(LpScalar::as_f64).collect();
                    Ok((s.objective().as_f64(), model.canonical_point(&values), s.pivots(), s.objective()))
                }
                // every vertex is feasible and the objective is bounded below on the hull polytope
                status => Err(Error::Lp(format!("relaxation reported {status:?}; the model is mis-assembled"))),
            }
        }
        Ok(match self {
            Relaxation::Float(s) => {
                let (value, point, pivots, _) = take(model, s)?;
                Snapshot { value, exact: None, point, pivots }
            }
            Relaxation::Exact(s) => {
                let (value, point, pivots, exact) = take(model, s)?;
                Snapshot { value, exact: Some(exact), point, pivots }
            }
        })
    }
}

/// Solve, separate, add cuts, repeat until no violated cut is found or
/// `max_rounds` rounds of cuts have been added. With brute force enabled the
/// optimum and gap are reported, and a bound above the optimum is an error.
pub fn cutting_plane_bound(inst: &QapInstance, config: &BoundConfig) -> Result<BoundReport> {
    if config.arithmetic == Arithmetic::Exact {
        check_range("exact relaxation", inst.n, 2, MAX_EXACT_LP_N)?;
    }
    let mut model = build_lp(inst.n, Vec::new())?;
    let objective = objective_vector(inst, &model)?;
    let mut seen: HashSet<GenericInequality> = HashSet::new();
    let mut cut_pool = Vec::new();
    let mut rounds = Vec::new();
    let mut added = (0, 0.0);
    let mut start = Instant::now();
    let mut relaxation = Relaxation::new(&model, &objective, config.arithmetic)?;
    let mut pivots_before = 0;
    let termination = loop {
        let solved = relaxation.snapshot(&model)?;
        rounds.push(BoundRound {
            bound: solved.value,
            cuts_added: added.0,
            max_violation: added.1,
            pivots: solved.pivots - pivots_before,
            seconds: start.elapsed().as_secs_f64(),
            exact_bound: solved.exact.as_ref().map(format_rational),
        });
        if rounds.len() > config.max_rounds {
            break Termination::RoundLimit;
        }
        let cuts: Vec<Cut> = separate(&solved.point, &config.families, inst.n, config.budget)?
            .into_iter()
            .filter(|c| seen.insert(c.generic.clone()))
            .collect();
        if cuts.is_empty() {
            break Termination::NoViolatedCut;
        }
        added = (cuts.len(), cuts.iter().map(|c| c.violation).fold(0.0, f64::max));
        pivots_before = solved.pivots;
        start = Instant::now();
        for cut in cuts {
            cut_pool.push(CutRecord::from_generic(cut.family, &cut.generic));
            model.add_cut(cut.inequality)?;
            let (row, constant) = model.cut_row(model.cuts.last().expect("just added"))?;
            relaxation.add_row(&row, &constant)?;
        }
    };
    let final_bound = rounds.last().map_or(f64::NEG_INFINITY, |r| r.bound);
    let mut report = BoundReport {
        instance: inst.id.clone(),
        n: inst.n,
        arithmetic: config.arithmetic,
        families: config.families.clone(),
        rounds,
        final_bound,
        termination,
        cut_pool,
        optimum: None,
        optimal_permutation: None,
        gap: None,
    };
    if config.brute_force {
        let (cost, sigma) = brute_force_optimum(inst)?;
        let opt = cost.to_f64().unwrap_or(f64::NAN);
        report.optimum = Some(format_rational(&cost));
        report.optimal_permutation = Some(sigma.one_based());
        report.gap = Some(opt - final_bound);
        if let Some(r) = report.rounds.iter().find(|r| r.bound > opt + SOUNDNESS_SLACK) {
            return Err(Error::Verification(format!("bound {} exceeds the optimum {opt} of {}", r.bound, inst.id)));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{enumerate_permutations, vertex};
    use num_bigint::BigInt;

    fn q(x: i64) -> Rational {
        Rational::from_integer(BigInt::from(x))
    }

    #[test]
    fn model_sizes() {
        let model = build_lp(6, Vec::new()).unwrap();
        assert_eq!(model.variables.len(), 486);
        assert_eq!(model.column_of.iter().filter(|c| c.is_none()).count(), 180);
        let model = build_lp(4, Vec::new()).unwrap();
        assert_eq!(model.variables.len(), 136 - 48);
        assert!(build_lp(7, Vec::new()).is_err());
    }

    #[test]
    fn vertices_satisfy_the_equalities() {
        for n in 2..=6 {
            let model = build_lp(n, Vec::new()).unwrap();
            let space = CoordSpace::new(n);
            for sigma in enumerate_permutations(n).unwrap().step_by(if n == 6 { 7 } else { 1 }) {
                let y = vertex(&sigma).canonical_vector();
                for (terms, b) in &model.equalities {
                    let lhs: i64 = terms.iter().map(|&(j, c)| c * y[model.variables[j]]).sum();
                    assert_eq!(lhs, *b, "n={n} sigma={sigma}");
                }
                assert!(y.iter().enumerate().all(|(idx, &v)| v == 0 || model.column_of[idx].is_some()));
                assert_eq!(y.len(), space.len());
            }
        }
    }

    #[test]
    fn objective_matches_permutation_cost_exactly() {
        for (n, seed) in [(2, 0), (3, 1), (4, 2), (5, 3)] {
            let mut inst = QapInstance::random(n, 9, seed);
            inst.d[0][n - 1] = Rational::new(BigInt::from(7), BigInt::from(3));
            let model = build_lp(n, Vec::new()).unwrap();
            let c = objective_vector(&inst, &model).unwrap();
            for sigma in enumerate_permutations(n).unwrap() {
                assert_eq!(objective_at_vertex(&model, &c, &sigma), permutation_cost(&inst, &sigma).unwrap());
            }
        }
    }

    #[test]
    fn base_model_zero_objective() {
        for n in [3, 5] {
            let model = build_lp(n, Vec::new()).unwrap();
            let zero = vec![q(0); model.variables.len()];
            let s = solve_lp::<f64>(&model, &zero).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert_eq!(s.objective, 0.0);
        }
    }

    #[test]
    fn small_instance_bounds() {
        let inst = parse_qaplib("2\n0 1\n1 0\n0 2\n2 0").unwrap();
        let config = BoundConfig { brute_force: true, ..BoundConfig::default() };
        let report = cutting_plane_bound(&inst, &config).unwrap();
        assert!(report.final_bound <= 4.0 + SOUNDNESS_SLACK);
        assert!(report.final_bound >= report.rounds[0].bound - 1e-9);
        assert_eq!(report.optimum.as_deref(), Some("4/1"));
        let zero = cutting_plane_bound(&QapInstance::zero(4), &BoundConfig::default()).unwrap();
        assert_eq!(zero.rounds[0].bound, 0.0);
        assert!(zero.rounds.iter().all(|r| r.bound.abs() < 1e-9));
    }

    #[test]
    fn exact_and_float_agree_at_n4() {
        let inst = QapInstance::random(4, 9, 5);
        let model = build_lp(4, Vec::new()).unwrap();
        let c = objective_vector(&inst, &model).unwrap();
        let e = solve_lp::<Rational>(&model, &c).unwrap();
        let f = solve_lp::<f64>(&model, &c).unwrap();
        assert_eq!(e.status, LpStatus::Optimal);
        assert!((e.objective.to_f64().unwrap() - f.objective).abs() < 1e-6);
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        assert!(e.objective <= opt);
    }

    #[test]
    fn random_instances_are_bounded_soundly() {
        for seed in 0..5 {
            let inst = QapInstance::random(5, 9, seed);
            let config = BoundConfig { brute_force: true, ..BoundConfig::default() };
            let report = cutting_plane_bound(&inst, &config).unwrap();
            assert!(report.is_monotone(1e-9), "{:?}", report.rounds);
            assert!(report.gap.unwrap() >= -SOUNDNESS_SLACK);
        }
    }

    #[test]
    fn added_cuts_are_valid_on_every_vertex() {
        let inst = QapInstance::random(5, 9, 2);
        let report = cutting_plane_bound(&inst, &BoundConfig::default()).unwrap();
        for record in &report.cut_pool {
            let g = GenericInequality::new(5, record.weights.iter().map(|&(i, j, c)| ((i - 1, j - 1), c)), record.beta)
                .unwrap();
            for sigma in enumerate_permutations(5).unwrap() {
                assert!(crate::facets::evaluate_at_vertex(&g, &sigma).unwrap() >= 0);
            }
        }
    }
}
