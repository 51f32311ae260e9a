//! `qapoly`: command-line driver. Every subcommand prints one JSON run report.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};
use qap_polytope::qap::{DEFAULT_BUDGET, DEFAULT_MAX_ROUNDS};
use qap_polytope::Error;

use commands::{BoundArgs, Outcome, Target};
use report::{RunReport, Timings, SCHEMA_VERSION};

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "qapoly", version, about = "Second-order Birkhoff polytope toolkit")]
struct Cli {
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the vertices for size n.
    Vertices {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Affine dimension of the vertex set, compared with the closed form.
    AffineDim {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = ["exact", "modp"])]
        mode: Option<String>,
    },
    /// Check the hull equations on every vertex.
    CheckEquations {
        #[arg(long)]
        n: usize,
    },
    /// Generate the members of an inequality family.
    GenFamily {
        #[arg(long, value_parser = ["nonneg", "triple", "mterm", "box"])]
        family: String,
        #[arg(long)]
        n: usize,
        /// Number of terms, for mterm.
        #[arg(long)]
        m: Option<usize>,
        /// Number of samples, for box.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Certify validity and facet-defining status of one inequality.
    #[command(group(ArgGroup::new("target").required(true).args(["ineq", "family"])))]
    Certify {
        #[arg(long)]
        n: usize,
        /// JSON inequality record.
        #[arg(long)]
        ineq: Option<PathBuf>,
        #[arg(long, value_parser = ["nonneg", "triple", "mterm", "box"], requires = "index")]
        family: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        /// 0-based position in generation order.
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, value_parser = ["exact", "modp"])]
        mode: Option<String>,
    },
    /// Check the signed twelve-term identity on random configurations.
    LemmaZero {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Connectivity of the transposition graph of a JSON spec.
    Connectivity {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Linear dependence among the quadratic moment vectors.
    Insufficiency {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        /// Also compare the left kernels of both moment matrices.
        #[arg(long)]
        kernels: bool,
    },
    /// Cutting-plane lower bound for a QAPLIB instance.
    Bound {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "nonneg,triple,mterm")]
        cuts: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
        rounds: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Compare every round with the enumerated optimum.
        #[arg(long)]
        brute_force: bool,
        /// Solve in rational arithmetic (small n only).
        #[arg(long)]
        exact: bool,
    },
    /// Optimum of a QAPLIB instance by enumeration.
    SolveExact {
        #[arg(long)]
        instance: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Vertices { .. } => "vertices",
            Command::AffineDim { .. } => "affine-dim",
            Command::CheckEquations { .. } => "check-equations",
            Command::GenFamily { .. } => "gen-family",
            Command::Certify { .. } => "certify",
            Command::LemmaZero { .. } => "lemma-zero",
            Command::Connectivity { .. } => "connectivity",
            Command::Insufficiency { .. } => "insufficiency",
            Command::Bound { .. } => "bound",
            Command::SolveExact { .. } => "solve-exact",
        }
    }
}

fn run(command: &Command, seed: u64) -> qap_polytope::Result<Outcome> {
    match command {
        Command::Vertices { n, count_only } => commands::vertices(*n, *count_only),
        Command::AffineDim { n, mode } => commands::affine_dim(*n, mode.as_deref(), seed),
        Command::CheckEquations { n } => commands::check_equations(*n, seed),
        Command::GenFamily { family, n, m, count, count_only } => {
            commands::gen_family(commands::parse_family(family, *m, *count, seed)?, *n, *count_only)
        }
        Command::Certify { n, ineq, family, m, index, mode } => {
            let target = match (ineq, family) {
                (Some(path), _) => Target::File(path),
                (None, Some(name)) => Target::Member {
                    family: commands::parse_family(name, *m, 100, seed)?,
                    index: index.expect("clap requires --index with --family"),
                },
                (None, None) => unreachable!("clap requires --ineq or --family"),
            };
            commands::certify_inequality(*n, target, mode.as_deref(), seed)
        }
        Command::LemmaZero { n, trials } => commands::lemma_zero(*n, *trials, seed),
        Command::Connectivity { spec } => commands::connectivity(spec),
        Command::Insufficiency { n, points, kernels } => commands::insufficiency(*n, *points, *kernels, seed),
        Command::Bound { instance, cuts, rounds, budget, brute_force, exact } => commands::bound(&BoundArgs {
            instance,
            cuts,
            rounds: *rounds,
            budget: *budget,
            brute_force: *brute_force,
            exact: *exact,
        }),
        Command::SolveExact { instance } => commands::solve_exact(instance),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Verification(_) | Error::Lp(_) => EXIT_VERIFICATION,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("qapoly: cannot configure {jobs} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let start = Instant::now();
    let outcome = match run(&cli.command, cli.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("qapoly {}: {e}", cli.command.name());
            return ExitCode::from(exit_code(&e));
        }
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool: "qapoly",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().into(),
        parameters: outcome.parameters,
        mode: outcome.mode,
        seed: cli.seed,
        verified: outcome.verified,
        results: outcome.results,
        timings: Timings { total_seconds: start.elapsed().as_secs_f64(), threads: rayon::current_num_threads() },
    };
    if let Err(e) = report.emit(cli.out.as_deref()) {
        eprintln!("qapoly: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if report.verified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFICATION)
    }
}
