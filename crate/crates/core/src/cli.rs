//! Command-line front end. Every subcommand writes one versioned JSON
//! artifact; exit codes are 0 ok, 1 verification failure, 2 usage, 3 cap.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::arith::parse_rational;
use crate::coloring::{greedy_upper_experiment, gq_lower_pipeline, ColoringReport, GreedyStats};
use crate::containers::{independent_set_count_log_bound, step_ledger, BoundLedger, CountBound, Mode};
use crate::error::{Error, Result};
use crate::grid::{collinear_stats, hyperedge_count_bound, CollinearStats, GridSpec, Limits};
use crate::plan::{
    choose_parameters, coloring_exponents, coloring_plan, sweep_coloring_k, sweep_k, ColoringExponents, KSweep,
    ParameterPlan,
};
use crate::planar::{emit_certificate, PiercingCertificate, PqVerdict};
use crate::randcon::{run_construction, ConstructionReport, IndependentSearch};
use crate::report::{write_atomic, Artifact};
use crate::supersat::{build_line_family, incidence_count, summarize, supersat_lower_bound, FamilySummary, SupersatBound, SupersatConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser, Serialize)]
#[command(name = "hdlab", version, about = "Collinear grid sets, container bounds and piercing certificates")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Search node budget.
    #[arg(long, global = true, env = "HDLAB_BUDGET", default_value_t = 1_000_000)]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Strict)]
    pub mode: Mode,
    #[arg(long, global = true, default_value_t = Limits::default().max_points)]
    pub max_points: u64,
    #[arg(long, global = true, default_value_t = Limits::default().max_work)]
    pub max_work: f64,
    /// Cap on supersaturation family size (anchors times directions).
    #[arg(long, global = true, default_value_t = 4_000_000)]
    pub max_lines: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Count collinear r-tuples of [n]^k with co-degree statistics.
    Enumerate {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
    },
    /// Build the supersaturation line family and check its claims.
    Supersat {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
        /// Density exponent; `t = c0 n^s`.
        #[arg(long, conflicts_with = "t")]
        s: Option<f64>,
        /// Explicit threshold, e.g. `4` or `7/2`.
        #[arg(long)]
        t: Option<String>,
        /// Seeded subsets for the incidence check.
        #[arg(long, default_value_t = 20)]
        samples: u32,
        #[arg(long, default_value_t = 10)]
        sample_size: usize,
    },
    /// Evaluate the independent-set count bound and the container ledger.
    Bounds {
        #[arg(long, conflicts_with = "n")]
        ln_n: Option<f64>,
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        f: f64,
        #[arg(long, default_value_t = 0)]
        m: u64,
    },
    /// Choose construction parameters for (q, eta).
    Plan {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eta: String,
        /// The u = q + 1 variant.
        #[arg(long)]
        coloring: bool,
    },
    /// Sample, delete, and search the survivors for an independent p-set.
    Construct {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        n: u32,
    },
    /// Certify the dual line family of a construct artifact.
    Pierce {
        #[arg(long = "in")]
        input: PathBuf,
        /// Concurrency histogram as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Chromatic lower-bound pipeline for the q-section hypergraph.
    Color {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eta: String,
        /// Also run this many greedy-coloring trials.
        #[arg(long, default_value_t = 0)]
        greedy_trials: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateResult {
    pub grid: GridSpec,
    pub stats: CollinearStats,
    /// The closed-form upper bound, when `n >= max(k, r)`.
    pub count_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSample {
    pub size: usize,
    pub incidences: u64,
    pub required: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersatResult {
    pub summary: FamilySummary,
    pub samples: Vec<IncidenceSample>,
    pub bound: Option<SupersatBound>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub count: CountBound,
    pub ledger: BoundLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub plan: ParameterPlan,
    pub sweep: KSweep,
    pub coloring_exponents: Option<ColoringExponents>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorResult {
    pub report: ColoringReport,
    pub greedy: Option<GreedyStats>,
}

/// Parse arguments, dispatch, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hdlab: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Precondition(_) => EXIT_USAGE,
        Error::ResourceLimit { .. } => EXIT_CAP,
        _ => EXIT_VERIFY,
    }
}

fn emit<T: Serialize>(cli: &Cli, kind: &str, result: T) -> Result<()> {
    let text = Artifact::new(kind, cli, result, !cli.global.no_timestamp)?.to_json()?;
    match &cli.global.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(ok: bool, strict_only: bool, mode: Mode) -> i32 {
    if ok || (strict_only && mode == Mode::FormulaOnly) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let limits = Limits { max_points: g.max_points, max_work: g.max_work };
    match &cli.command {
        Command::Enumerate { n, k, r } => {
            let grid = GridSpec::new(*n, *k)?;
            let stats = collinear_stats(grid, *r, &limits)?;
            let count_bound = (*n >= (*k).max(*r)).then(|| hyperedge_count_bound(*n, *k, *r)).transpose()?;
            emit(cli, "enumerate", EnumerateResult { grid, stats, count_bound })?;
            Ok(EXIT_OK)
        }
        Command::Supersat { n, k, r, s, t, samples, sample_size } => {
            let grid = GridSpec::new(*n, *k)?;
            let config = match (s, t) {
                (_, Some(t)) => SupersatConfig::with_t(grid, *r, parse_rational(t)?)?,
                (Some(s), None) => SupersatConfig::new(grid, *r, *s)?,
                (None, None) => return Err(Error::Domain("supersat needs --s or --t".into())),
            };
            let family = build_line_family(&config, g.max_lines)?;
            let summary = summarize(&family);
            let all: Vec<_> = grid.points().collect();
            let size = (*sample_size).min(all.len());
            let mut rng = ChaCha20Rng::seed_from_u64(g.seed);
            let mut out = Vec::new();
            for _ in 0..*samples {
                let mut idx = sample(&mut rng, all.len(), size).into_vec();
                idx.sort_unstable();
                let pts: Vec<_> = idx.into_iter().map(|i| all[i].clone()).collect();
                let incidences = incidence_count(&pts, &family)?;
                let required = (size * family.size_v) as u64;
                out.push(IncidenceSample { size, incidences, required, holds: incidences >= required });
            }
            let bound = s.and_then(|s| supersat_lower_bound((*n as f64).ln(), *k, *r, s).ok());
            let all_hold = summary.collisions == 0 && summary.coverage_holds && out.iter().all(|x| x.holds);
            emit(cli, "supersat", SupersatResult { summary, samples: out, bound, all_hold })?;
            Ok(verdict(all_hold, false, g.mode))
        }
        Command::Bounds { ln_n, n, k, r, s0, f, m } => {
            let ln_n = match (ln_n, n) {
                (Some(l), _) => *l,
                (None, Some(n)) => n.ln(),
                (None, None) => return Err(Error::Domain("bounds needs --ln-n or --n".into())),
            };
            let count = independent_set_count_log_bound(ln_n, *k, *r, *s0, *f, *m, Mode::FormulaOnly)?;
            let ledger = step_ledger(ln_n, *k, *r, *s0, *f)?;
            let ok = count.hypotheses.holds && ledger.steps_within_cap;
            emit(cli, "bounds", BoundsResult { count, ledger })?;
            Ok(verdict(ok, true, g.mode))
        }
        Command::Plan { q, eta, coloring } => {
            let eta = parse_rational(eta)?;
            let result = if *coloring {
                PlanResult {
                    plan: coloring_plan(*q, &eta)?,
                    sweep: sweep_coloring_k(*q, *q..=4 * q)?,
                    coloring_exponents: Some(coloring_exponents(*q, &eta)?),
                }
            } else {
                PlanResult { plan: choose_parameters(*q, &eta)?, sweep: sweep_k(*q, *q..=4 * q)?, coloring_exponents: None }
            };
            emit(cli, "plan", result)?;
            Ok(EXIT_OK)
        }
        Command::Construct { q, eta, n } => {
            let plan = choose_parameters(*q, &parse_rational(eta)?)?;
            let rep = run_construction(&plan, *n, g.seed, g.budget, &limits)?;
            let refuted = matches!(rep.independent, IndependentSearch::Witness { .. });
            let sound = rep.no_u_collinear && rep.deletions_within_tuples;
            emit(cli, "construct", &rep)?;
            Ok(if !sound { EXIT_VERIFY } else { verdict(!refuted, true, g.mode) })
        }
        Command::Pierce { input, csv } => {
            let art: Artifact<ConstructionReport> = Artifact::read(input, "construct")?;
            let cert = emit_certificate(&art.result.run, &art.result.plan, g.budget)?;
            let valid = cert.validate();
            if let Some(p) = csv {
                write_atomic(p, cert.histogram_csv().as_bytes())?;
            }
            let refuted = matches!(cert.pq_at_plan, PqVerdict::Refuted { .. });
            emit(cli, "certificate", &cert)?;
            if let Err(e) = valid {
                eprintln!("hdlab: {e}");
                return Ok(EXIT_VERIFY);
            }
            Ok(verdict(!refuted, true, g.mode))
        }
        Command::Color { q, m, eta, greedy_trials } => {
            let eta = parse_rational(eta)?;
            let report = gq_lower_pipeline(*q, &eta, *m, g.seed, g.budget, &limits)?;
            let greedy = (*greedy_trials > 0).then(|| greedy_upper_experiment(*q, *m, *greedy_trials, g.seed)).transpose()?;
            let ok = report.pigeonhole_holds;
            emit(cli, "color", ColorResult { report, greedy })?;
            Ok(verdict(ok, false, g.mode))
        }
    }
}

/// Read a certificate artifact written by `pierce`.
pub fn read_certificate(path: &std::path::Path) -> Result<PiercingCertificate> {
    Ok(Artifact::<PiercingCertificate>::read(path, "certificate")?.result)
}
