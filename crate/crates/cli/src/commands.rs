//! One function per subcommand. Each returns the parameters it ran with and
//! its results; neither carries timing, so reruns with the same seed match.

use std::collections::BTreeMap;
use std::path::Path;

use qap_polytope::affine_hull::{
    affine_dimension, build_equation_system, check_all_vertices, decode_01, dimension_formula, solution_space_dimension,
};
use qap_polytope::facets::{certify, enumerate_family, formula_count, Family, InequalityRecord};
use qap_polytope::insufficiency::{check_sss_equivalence, dependence_certificate};
use qap_polytope::lemmas::{
    build_transposition_graph, is_connected, zero_identity_sweep, GraphMode, SpecRecord, TranspositionGraphSpec,
};
use qap_polytope::linalg::RankMode;
use qap_polytope::perm::{enumerate_permutations, factorial, vertex, Permutation};
use qap_polytope::qap::{
    brute_force_optimum, cutting_plane_bound, parse_families, parse_qaplib, Arithmetic, BoundConfig, QapInstance,
};
use qap_polytope::{Error, Result};
use serde_json::{json, Value};

/// Largest `n` whose vertices are listed one by one.
pub const MAX_LISTED_N: usize = 7;

/// Largest `n` at which every vertex is decoded back from its 0/1 matrix.
pub const MAX_DECODE_N: usize = 5;

pub struct Outcome {
    pub parameters: Value,
    pub results: Value,
    pub mode: String,
    pub verified: bool,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize to JSON")
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), token: e.column(), message: e.to_string() })
}

fn read_instance(path: &Path) -> Result<QapInstance> {
    let mut inst = parse_qaplib(&read_text(path)?)?;
    if let Some(stem) = path.file_stem() {
        inst.id = stem.to_string_lossy().into_owned();
    }
    Ok(inst)
}

/// `None` picks exact elimination for small matrices and modular otherwise.
pub fn rank_mode(name: Option<&str>, rows: usize, seed: u64) -> Result<RankMode> {
    match name {
        None => Ok(RankMode::auto(rows)),
        Some("exact") => Ok(RankMode::Exact),
        Some("modp") => Ok(RankMode::Modp { primes: 2, seed }),
        Some(other) => Err(Error::Argument(format!("unknown mode {other:?}, expected exact or modp"))),
    }
}

fn vertex_rows(n: usize) -> usize {
    usize::try_from(factorial(n)).unwrap_or(usize::MAX)
}

pub fn vertices(n: usize, count_only: bool) -> Result<Outcome> {
    let listed = !count_only && n <= MAX_LISTED_N;
    let mut list = Vec::new();
    let mut count = 0u128;
    for sigma in enumerate_permutations(n)? {
        count += 1;
        if listed {
            let v = vertex(&sigma);
            list.push(json!({
                "sigma": sigma.one_based(),
                "parity": sigma.parity(),
                "canonical_ones": v.canonical_vector().iter().filter(|&&x| x == 1).count(),
            }));
        }
    }
    let mut results = json!({ "n": n, "count": count, "coordinates": qap_polytope::perm::CoordSpace::new(n).len() });
    if listed {
        results["vertices"] = Value::Array(list);
    }
    Ok(Outcome {
        parameters: json!({ "n": n, "count_only": count_only }),
        results,
        mode: "exact".into(),
        verified: true,
    })
}

pub fn affine_dim(n: usize, mode: Option<&str>, seed: u64) -> Result<Outcome> {
    let mode = rank_mode(mode, vertex_rows(n), seed)?;
    let dim = affine_dimension(n, mode)?;
    let formula = dimension_formula(n).ok();
    let matches = formula.map(|f| f == dim as u64);
    Ok(Outcome {
        parameters: json!({ "n": n }),
        results: json!({ "n": n, "affine_dimension": dim, "formula": formula, "matches_formula": matches }),
        mode: mode.name().into(),
        verified: matches.unwrap_or(true),
    })
}

pub fn check_equations(n: usize, seed: u64) -> Result<Outcome> {
    let system = build_equation_system(n)?;
    let check = check_all_vertices(&system)?;
    let mut by_provenance: BTreeMap<String, usize> = BTreeMap::new();
    for e in &system.equations {
        *by_provenance.entry(e.provenance.to_string()).or_default() += 1;
    }
    let mode = RankMode::Modp { primes: 2, seed };
    let solution_dim = solution_space_dimension(&system, mode);
    let decoded = if n <= MAX_DECODE_N {
        let mut all = true;
        for sigma in enumerate_permutations(n)? {
            all &= decode_01(&vertex(&sigma).full_matrix()).as_ref() == Ok(&sigma);
        }
        Some(all)
    } else {
        None
    };
    let failure = check.first_failure.as_ref().map(|(sigma, eq)| json!({ "sigma": sigma, "equation": eq + 1 }));
    Ok(Outcome {
        parameters: json!({ "n": n }),
        results: json!({
            "n": n,
            "vertices": check.vertices,
            "variables": system.num_variables(),
            "equations": system.equations.len(),
            "by_provenance": by_provenance,
            "all_vertices_satisfy": check.passed(),
            "first_failure": failure,
            "solution_space_dimension": solution_dim,
            "decode_round_trip": decoded,
        }),
        mode: mode.name().into(),
        verified: check.passed() && decoded != Some(false),
    })
}

pub fn parse_family(name: &str, m: Option<usize>, count: usize, seed: u64) -> Result<Family> {
    match (name, m) {
        ("nonneg", None) => Ok(Family::Nonneg),
        ("triple", None) => Ok(Family::Triple),
        ("mterm", Some(m)) if m >= 2 => Ok(Family::Mterm { m }),
        ("mterm", _) => Err(Error::Argument("mterm needs --m with m >= 2".into())),
        ("box", None) => Ok(Family::BoxSamples { count, seed }),
        ("nonneg" | "triple" | "box", Some(_)) => {
            Err(Error::Argument(format!("--m applies to mterm only, not {name}")))
        }
        _ => Err(Error::Argument(format!("unknown family {name:?}, expected nonneg, triple, mterm or box"))),
    }
}

pub fn gen_family(family: Family, n: usize, count_only: bool) -> Result<Outcome> {
    let members = enumerate_family(family, n)?;
    let formula = formula_count(family, n);
    let mut results = json!({
        "family": family.to_string(),
        "n": n,
        "count": members.len(),
        "formula_count": formula,
        "matches_formula": formula.map(|f| f == members.len() as u128),
    });
    if !count_only {
        let records: Vec<InequalityRecord> = members.iter().map(|g| InequalityRecord::from_generic(g, false)).collect();
        results["members"] = to_value(&records);
    }
    Ok(Outcome {
        parameters: json!({ "family": family.to_string(), "n": n, "count_only": count_only }),
        results,
        mode: "exact".into(),
        verified: true,
    })
}

pub enum Target<'a> {
    File(&'a Path),
    Member { family: Family, index: usize },
}

pub fn certify_inequality(n: usize, target: Target<'_>, mode: Option<&str>, seed: u64) -> Result<Outcome> {
    let (record, source) = match target {
        Target::File(path) => (read_json::<InequalityRecord>(path)?, json!({ "file": path.display().to_string() })),
        Target::Member { family, index } => {
            let members = enumerate_family(family, n)?;
            let g = members.get(index).ok_or_else(|| {
                Error::Argument(format!("index {index} outside 0..{} for family {family}", members.len()))
            })?;
            (InequalityRecord::from_generic(g, false), json!({ "family": family.to_string(), "index": index }))
        }
    };
    if record.n != n {
        return Err(Error::Argument(format!("inequality has n = {}, --n is {n}", record.n)));
    }
    let linear = record.linear_form()?;
    let mode = rank_mode(mode, vertex_rows(n), seed)?;
    let cert = certify(&linear, mode)?;
    let mut results = to_value(&cert);
    results["is_facet"] = json!(cert.is_facet());
    results["record"] = to_value(&record);
    Ok(Outcome {
        parameters: json!({ "n": n, "source": source }),
        results,
        mode: mode.name().into(),
        verified: cert.valid,
    })
}

pub fn lemma_zero(n: usize, trials: usize, seed: u64) -> Result<Outcome> {
    let sweep = zero_identity_sweep(n, trials, seed)?;
    let failures: Vec<Value> = sweep
        .failures
        .iter()
        .map(|c| json!({ "base": c.base.one_based(), "k": c.k.map(|v| v + 1), "x": c.x + 1, "y": c.y + 1 }))
        .collect();
    Ok(Outcome {
        parameters: json!({ "n": n, "trials": trials }),
        results: json!({ "n": n, "trials": trials, "held": sweep.held, "failures": failures }),
        mode: "exact".into(),
        verified: sweep.failures.is_empty(),
    })
}

pub fn connectivity(path: &Path) -> Result<Outcome> {
    let record: SpecRecord = read_json(path)?;
    let spec = TranspositionGraphSpec::try_from(record.clone())?;
    let graph = build_transposition_graph(&spec)?;
    let c = is_connected(&graph);
    Ok(Outcome {
        parameters: json!({ "spec": to_value(&record) }),
        results: json!({
            "n": spec.n,
            "mode": spec.mode,
            "nodes": graph.nodes.len(),
            "edges": graph.edge_count(),
            "connected": c.connected,
            "components": c.components,
        }),
        mode: "exact".into(),
        // Free specs carry no connectivity claim.
        verified: c.connected || spec.mode == GraphMode::Free,
    })
}

pub fn insufficiency(n: usize, points: usize, kernels: bool, seed: u64) -> Result<Outcome> {
    let cert = dependence_certificate(n, points, seed)?;
    let support: Vec<Vec<usize>> = cert.support.iter().map(Permutation::one_based).collect();
    let mut results = json!({
        "n": n,
        "support": support,
        "alpha": cert.alpha,
        "support_size": cert.support.len(),
        "residual_checked": cert.residual_checked,
        "points_checked": cert.points_checked,
        "mixed_signs": cert.mixed_signs,
        "moment_rank": cert.moment_rank,
        "vertices": factorial(n),
        "basis_size": cert.basis_size,
        "span_bound": cert.span_bound,
    });
    let mut verified = cert.verified(points) && cert.mixed_signs;
    if kernels {
        let check = check_sss_equivalence(n, 8, seed)?;
        verified &= check.equal;
        results["kernel_equivalence"] = to_value(&check);
    }
    Ok(Outcome {
        parameters: json!({ "n": n, "points": points, "kernels": kernels }),
        results,
        mode: "exact".into(),
        verified,
    })
}

pub struct BoundArgs<'a> {
    pub instance: &'a Path,
    pub cuts: &'a str,
    pub rounds: usize,
    pub budget: usize,
    pub brute_force: bool,
    pub exact: bool,
}

pub fn bound(args: &BoundArgs<'_>) -> Result<Outcome> {
    let inst = read_instance(args.instance)?;
    let config = BoundConfig {
        families: parse_families(args.cuts)?,
        max_rounds: args.rounds,
        budget: args.budget,
        brute_force: args.brute_force,
        arithmetic: if args.exact { Arithmetic::Exact } else { Arithmetic::Float },
    };
    let report = cutting_plane_bound(&inst, &config)?;
    let verified = report.is_monotone(qap_polytope::qap::SOUNDNESS_SLACK);
    let results = to_value(&report);
    Ok(Outcome {
        parameters: json!({
            "instance": args.instance.display().to_string(),
            "cuts": config.families.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "rounds": args.rounds,
            "budget": args.budget,
            "brute_force": args.brute_force,
        }),
        results,
        mode: if args.exact { "exact" } else { "float" }.into(),
        verified,
    })
}

pub fn solve_exact(path: &Path) -> Result<Outcome> {
    let inst = read_instance(path)?;
    let (cost, sigma) = brute_force_optimum(&inst)?;
    Ok(Outcome {
        parameters: json!({ "instance": path.display().to_string() }),
        results: json!({
            "instance": inst.id,
            "n": inst.n,
            "optimum": qap_polytope::linalg::format_rational(&cost),
            "permutation": sigma.one_based(),
            "permutations_scanned": factorial(inst.n),
        }),
        mode: "exact".into(),
        verified: true,
    })
}
