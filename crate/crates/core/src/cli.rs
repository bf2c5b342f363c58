//! Command-line front end: `gen`, `census`, `refute`, `solve`, `spectral`
//! and `sweep`.
//!
//! Outputs carry a versioned header and contain no timings, so identical
//! arguments give identical bytes. Timings go to stderr.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::census::{census, census_csv_rows, walk_census, CensusRow, CENSUS_CSV_HEADER};
use crate::graph::{build_inverse_graph, from_dimacs, to_dimacs, Graph, GraphError};
use crate::numtheory::{NumTheoryError, Prime};
use crate::refutation::{
    a_of, choose_kprime, ncc_lower_bound, p_threshold, parse_ratio, search_certificate,
    verify_certificate, Certificate, FormulaError, RefutationError, SearchConfig,
};
use crate::solver::{solve_exact, solve_naive, verify_independent, LoopPolicy, SolveError, SolveResult};
use crate::spectral::{spectral_report, SpectralError, SpectralReport};

#[derive(Debug, Parser)]
#[command(name = "invgraph", version, about = "Inverse-graph MIS instances: census, refutation, exact solve, spectra")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the inverse graph for a prime.
    Gen {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Dimacs)]
        format: Format,
    },
    /// Odd-cycle census by cycle sequence.
    Census {
        #[command(flatten)]
        target: Target,
        /// Positional form of --max-len.
        #[arg(value_name = "MAX_LEN")]
        max_len_pos: Option<usize>,
        #[arg(long, conflicts_with = "max_len_pos")]
        max_len: Option<usize>,
        /// Also enumerate cycles by walking the graph and require agreement (p <= 101).
        #[arg(long)]
        cross_check: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Check a certificate, search for one, or evaluate the bound formulas.
    Refute(RefuteArgs),
    /// Exact maximum independent set.
    Solve(SolveArgs),
    /// Normalized-adjacency extremes and Hoffman's bound.
    Spectral {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// One row per prime combining solve, spectral, census and formula results.
    Sweep {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 9)]
        max_len: usize,
        /// k' for the N_cc lower bound.
        #[arg(long, default_value_t = 5)]
        kp: u32,
        #[arg(long, default_value_t = LoopPolicy::ExcludeLoopVertex)]
        loop_policy: LoopPolicy,
        #[arg(long)]
        budget_secs: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Target {
    /// Prime modulus.
    #[arg(value_name = "P")]
    pub p_pos: Option<u64>,
    #[arg(long = "p", conflicts_with = "p_pos")]
    pub p: Option<u64>,
    /// Inclusive range `A..B`; composites are skipped.
    #[arg(long, conflicts_with_all = ["p_pos", "p"])]
    pub range: Option<String>,
}

#[derive(Debug, Args)]
pub struct RefuteArgs {
    /// DIMACS graph file.
    pub graph: Option<PathBuf>,
    /// Certificate JSON file.
    pub cert: Option<PathBuf>,
    /// Use the inverse graph for this prime instead of a file.
    #[arg(long)]
    pub p: Option<u64>,
    /// Search for a certificate instead of reading one.
    #[arg(long, conflicts_with = "cert")]
    pub search: bool,
    /// Print the N_cc lower bound for --p and --kp, or k' and p' for --eps.
    #[arg(long)]
    pub bound_formula: bool,
    #[arg(long, default_value_t = 5)]
    pub kp: u32,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub m_max: usize,
    #[arg(long, default_value_t = 9)]
    pub len_max: usize,
    /// Node budget (exhaustive) or restart count (heuristic).
    #[arg(long, default_value_t = 2_000_000)]
    pub budget_nodes: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// DIMACS graph file; otherwise use --p, a positional prime or --range.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value_t = LoopPolicy::ExcludeLoopVertex)]
    pub loop_policy: LoopPolicy,
    /// Cross-check against the naive solver (N <= 32).
    #[arg(long)]
    pub naive: bool,
    #[arg(long)]
    pub budget_secs: Option<f64>,
    /// Include the witness set.
    #[arg(long)]
    pub witness: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Dimacs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid certificate: {0}")]
    Refutation(#[from] RefutationError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cross-check failed: {0}")]
    Mismatch(String),
}

/// Outcome of a successful run; maps to exit codes 0 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Proven,
    NotProven,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Proven => 0,
            Outcome::NotProven => 2,
        }
    }
}

/// Parses `A..B` or `A..=B`, both ends inclusive.
pub fn parse_range(s: &str) -> Result<(u64, u64), CliError> {
    let bad = || CliError::Usage(format!("bad range {s:?}, expected A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

impl Target {
    fn primes(&self, err: &mut dyn Write) -> Result<Vec<Prime>, CliError> {
        if let Some(v) = self.p.or(self.p_pos) {
            return Ok(vec![Prime::new(v)?]);
        }
        let Some(range) = &self.range else {
            return Err(CliError::Usage("give a prime (P or --p) or --range A..B".into()));
        };
        let (a, b) = parse_range(range)?;
        let primes = if a <= b { Prime::range(a, b) } else { Vec::new() };
        let skipped = if a <= b { (b - a + 1) as usize - primes.len() } else { 0 };
        if skipped > 0 {
            let _ = writeln!(err, "warning: skipping {skipped} non-prime values in {a}..{b}");
        }
        Ok(primes)
    }
}

/// 12 significant digits, fixed notation.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn ratio_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn budget(secs: Option<f64>) -> Result<Option<Duration>, CliError> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("bad --budget-secs {s}")))
    })
    .transpose()
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs a parsed command, writing the result to `--out` or `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let started = Instant::now();
    let mut notes = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &mut notes));
    let _ = err.write_all(&notes);
    let (text, outcome) = result?;
    let _ = writeln!(err, "elapsed: {:.3}s", started.elapsed().as_secs_f64());
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    Ok(outcome)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, out, err) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: &Command, err: &mut dyn Write) -> Result<(String, Outcome), CliError> {
    match cmd {
        Command::Gen { target, format } => cmd_gen(target, *format, err),
        Command::Census { target, max_len_pos, max_len, cross_check, format } => {
            let max_len = max_len.or(*max_len_pos).unwrap_or(9);
            cmd_census(target, max_len, *cross_check, *format, err)
        }
        Command::Refute(args) => cmd_refute(args),
        Command::Solve(args) => cmd_solve(args, err),
        Command::Spectral { target, format } => cmd_spectral(target, *format, err),
        Command::Sweep { target, max_len, kp, loop_policy, budget_secs } => {
            cmd_sweep(target, *max_len, *kp, *loop_policy, budget(*budget_secs)?, err)
        }
    }
}

fn single_prime(target: &Target, err: &mut dyn Write) -> Result<Prime, CliError> {
    let primes = target.primes(err)?;
    match primes.as_slice() {
        [p] => Ok(*p),
        _ => Err(CliError::Usage("this command takes a single prime".into())),
    }
}

fn cmd_gen(target: &Target, format: Format, err: &mut dyn Write) -> Result<(String, Outcome), CliError> {
    let p = single_prime(target, err)?;
    let g = build_inverse_graph(p);
    let text = match format {
        Format::Dimacs => format!("c inverse graph p={p}\n{}", to_dimacs(&g)),
        Format::Json => {
            let mut s = g.to_json();
            s.push('\n');
            s
        }
        Format::Csv => return Err(CliError::Usage("gen writes dimacs or json".into())),
    };
    Ok((text, Outcome::Proven))
}

pub const CROSS_CHECK_MAX_P: u64 = 101;

fn cmd_census(
    target: &Target,
    max_len: usize,
    cross_check: bool,
    format: Format,
    err: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    if max_len < 3 || max_len.is_multiple_of(2) {
        return Err(CliError::Usage(format!("--max-len must be odd and at least 3, got {max_len}")));
    }
    let primes = target.primes(err)?;
    let mut tables: Vec<(Prime, Vec<CensusRow>)> = Vec::new();
    for p in primes {
        let g = build_inverse_graph(p);
        let rows = census(&g, max_len);
        if cross_check {
            if p.get() > CROSS_CHECK_MAX_P {
                let _ = writeln!(err, "warning: walk cross-check skipped for p={p} > {CROSS_CHECK_MAX_P}");
            } else {
                let walked = walk_census(&g, max_len);
                let algebraic: std::collections::BTreeMap<_, _> = rows
                    .iter()
                    .filter(|r| r.count > 0)
                    .map(|r| (r.sequence.clone(), r.starts.clone()))
                    .collect();
                if algebraic != walked {
                    return Err(CliError::Mismatch(format!("census and graph walk differ at p={p}")));
                }
            }
        }
        tables.push((p, rows));
    }
    let text = match format {
        Format::Csv => {
            let mut s = String::from(CENSUS_CSV_HEADER);
            for (p, rows) in &tables {
                s.push_str(&census_csv_rows(*p, rows));
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                p: u64,
                rows: &'a [CensusRow],
            }
            let v: Vec<Table> = tables.iter().map(|(p, rows)| Table { p: p.get(), rows }).collect();
            json(&v)
        }
        Format::Dimacs => return Err(CliError::Usage("census writes csv or json".into())),
    };
    Ok((text, Outcome::Proven))
}

fn load_graph(path: Option<&Path>, p: Option<u64>) -> Result<Graph, CliError> {
    match (path, p) {
        (Some(path), None) => Ok(from_dimacs(&read(path)?)?),
        (None, Some(p)) => Ok(build_inverse_graph(Prime::new(p)?).into_graph()),
        _ => Err(CliError::Usage("give either a DIMACS graph file or --p".into())),
    }
}

fn cmd_refute(args: &RefuteArgs) -> Result<(String, Outcome), CliError> {
    if args.bound_formula {
        let mut s = String::new();
        if let Some(eps) = &args.eps {
            let eps = parse_ratio(eps)?;
            let kp = choose_kprime(eps)?;
            let (_, pp) = p_threshold(eps)?;
            writeln!(s, "eps={eps} k'={kp} p'={pp}").unwrap();
        }
        if let Some(p) = args.p {
            let p = Prime::new(p)?;
            let lb = ncc_lower_bound(p, args.kp)?;
            let ratio = lb / p.get() as i128;
            writeln!(
                s,
                "p={p} k'={} a={} ncc_lower_bound={lb} ({}) ratio={}",
                args.kp,
                a_of(args.kp)?,
                fmt_float(ratio_f64(lb)),
                fmt_float(ratio_f64(ratio))
            )
            .unwrap();
        }
        if s.is_empty() {
            return Err(CliError::Usage("--bound-formula needs --p and/or --eps".into()));
        }
        return Ok((s, Outcome::Proven));
    }
    let g = load_graph(args.graph.as_deref(), args.p)?;
    let cert = if args.search {
        let cfg = SearchConfig {
            m_max: args.m_max,
            len_max: args.len_max,
            budget: args.budget_nodes,
            seed: args.seed,
        };
        search_certificate(&g, &cfg)
    } else {
        let path = args
            .cert
            .as_deref()
            .or(if args.p.is_some() { args.graph.as_deref() } else { None })
            .ok_or_else(|| CliError::Usage("give a certificate file or --search".into()))?;
        Certificate::from_json(&read(path)?)?
    };
    let bound = verify_certificate(&g, &cert)?;
    #[derive(Serialize)]
    struct Report<'a> {
        valid: bool,
        bound: &'a crate::refutation::RefutationBound,
        certificate: &'a Certificate,
    }
    Ok((json(&Report { valid: true, bound: &bound, certificate: &cert }), Outcome::Proven))
}

#[derive(Serialize)]
struct SolveRow {
    p: Option<u64>,
    n: usize,
    #[serde(flatten)]
    result: SolveResult,
    ratio: f64,
}

fn solve_one(g: &Graph, args: &SolveArgs, budget: Option<Duration>, label: &str) -> Result<SolveResult, CliError> {
    let r = solve_exact(g, args.loop_policy, budget);
    if args.naive {
        let naive = solve_naive(g, args.loop_policy)?;
        if naive.n_star != r.n_star && r.proven {
            return Err(CliError::Mismatch(format!(
                "{label}: exact {} but naive {}",
                r.n_star, naive.n_star
            )));
        }
    }
    debug_assert!(verify_independent(g, &r.witness, args.loop_policy));
    Ok(r)
}

pub const SOLVE_CSV_HEADER: &str = "# solve/v1\np,n,policy,n_star,ratio,proven,nodes_explored,witness\n";

fn cmd_solve(args: &SolveArgs, err: &mut dyn Write) -> Result<(String, Outcome), CliError> {
    let budget = budget(args.budget_secs)?;
    let inputs: Vec<(Option<u64>, Graph)> = match &args.graph {
        Some(path) => {
            if args.target.p.is_some() || args.target.p_pos.is_some() || args.target.range.is_some() {
                return Err(CliError::Usage("give either --graph or a prime target".into()));
            }
            vec![(None, from_dimacs(&read(path)?)?)]
        }
        None => args
            .target
            .primes(err)?
            .into_iter()
            .map(|p| (Some(p.get()), build_inverse_graph(p).into_graph()))
            .collect(),
    };
    let results: Vec<Result<SolveResult, CliError>> = inputs
        .par_iter()
        .map(|(p, g)| {
            let label = p.map_or_else(|| "graph".to_string(), |p| format!("p={p}"));
            solve_one(g, args, budget, &label)
        })
        .collect();
    let mut rows = Vec::new();
    for ((p, g), r) in inputs.iter().zip(results) {
        let r = r?;
        let _ = writeln!(
            err,
            "{}: n_star={} nodes={} time={:.3}s{}",
            p.map_or_else(|| "graph".to_string(), |p| format!("p={p}")),
            r.n_star,
            r.nodes_explored,
            r.wall_time.as_secs_f64(),
            if r.proven { "" } else { " (budget exhausted, not proven)" }
        );
        rows.push(SolveRow { p: *p, n: g.n(), ratio: r.ratio(g.n()), result: r });
    }
    let outcome = if rows.iter().all(|r| r.result.proven) { Outcome::Proven } else { Outcome::NotProven };
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from(SOLVE_CSV_HEADER);
            for r in &rows {
                let witness = if args.witness {
                    r.result.witness.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
                } else {
                    String::new()
                };
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.p.map_or_else(String::new, |p| p.to_string()),
                    r.n,
                    r.result.policy,
                    r.result.n_star,
                    fmt_float(r.ratio),
                    r.result.proven,
                    r.result.nodes_explored,
                    witness
                )
                .unwrap();
            }
            s
        }
        Format::Json => {
            if !args.witness {
                for r in &mut rows {
                    r.result.witness.clear();
                }
            }
            json(&rows)
        }
        Format::Dimacs => return Err(CliError::Usage("solve writes csv or json".into())),
    };
    Ok((text, outcome))
}

pub const SPECTRAL_CSV_HEADER: &str =
    "# spectral/v1\np,n,d,lambda_1,lambda_2,lambda_n,lambda,hoffman,regular,residual\n";

fn spectral_line(p: Prime, r: &SpectralReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{:.3e}\n",
        p,
        r.n,
        r.d,
        fmt_float(r.lambda_1),
        fmt_float(r.lambda_2),
        fmt_float(r.lambda_n),
        fmt_float(r.lambda),
        fmt_float(r.hoffman),
        r.regular,
        r.residual
    )
}

fn cmd_spectral(target: &Target, format: Format, err: &mut dyn Write) -> Result<(String, Outcome), CliError> {
    let primes = target.primes(err)?;
    let reports: Vec<(Prime, SpectralReport)> = primes
        .par_iter()
        .map(|&p| spectral_report(p).map(|r| (p, r)))
        .collect::<Result<_, _>>()?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from(SPECTRAL_CSV_HEADER);
            for (p, r) in &reports {
                s.push_str(&spectral_line(*p, r));
            }
            s
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                p: u64,
                #[serde(flatten)]
                report: &'a SpectralReport,
            }
            json(&reports.iter().map(|(p, report)| Row { p: p.get(), report }).collect::<Vec<_>>())
        }
        Format::Dimacs => return Err(CliError::Usage("spectral writes csv or json".into())),
    };
    Ok((text, Outcome::Proven))
}

/// One sweep row; `ncc_ratio` and `gap` are empty while `p <= a(k')`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub n: usize,
    pub policy: LoopPolicy,
    pub n_star: usize,
    pub ratio: f64,
    pub proven: bool,
    pub hoffman: f64,
    pub lambda_n: f64,
    pub lambda: f64,
    /// Odd cycles present, by length 3, 5, ..., max_len.
    pub cycles: Vec<usize>,
    pub ncc_ratio: Option<f64>,
    pub gap: Option<f64>,
}

pub fn sweep_header(max_len: usize) -> String {
    let cycles: Vec<String> = (3..=max_len).step_by(2).map(|l| format!("cycles_{l}")).collect();
    format!(
        "# sweep/v1\np,n,policy,n_star,ratio,proven,hoffman,lambda_n,lambda,{},ncc_ratio,gap\n",
        cycles.join(",")
    )
}

pub fn sweep_row(
    p: Prime,
    max_len: usize,
    kp: u32,
    policy: LoopPolicy,
    budget: Option<Duration>,
) -> Result<SweepRow, CliError> {
    let g = build_inverse_graph(p);
    let solved = solve_exact(&g, policy, budget);
    let spectral = spectral_report(p)?;
    let rows = census(&g, max_len);
    let cycles = (3..=max_len)
        .step_by(2)
        .map(|l| rows.iter().filter(|r| r.sequence.len() == l).map(|r| r.count).sum())
        .collect();
    let ratio = solved.ratio(g.n());
    let ncc = match ncc_lower_bound(p, kp) {
        Ok(lb) => Some(lb / p.get() as i128),
        Err(FormulaError::PrimeTooSmall { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let exact_ratio = Ratio::new(solved.n_star as i128, g.n() as i128);
    Ok(SweepRow {
        p: p.get(),
        n: g.n(),
        policy,
        n_star: solved.n_star,
        ratio,
        proven: solved.proven,
        hoffman: spectral.hoffman,
        lambda_n: spectral.lambda_n,
        lambda: spectral.lambda,
        cycles,
        ncc_ratio: ncc.map(ratio_f64),
        gap: ncc.map(|r| ratio_f64(r - exact_ratio)),
    })
}

pub fn sweep_csv_line(r: &SweepRow) -> String {
    let opt = |x: Option<f64>| x.map_or_else(String::new, fmt_float);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
        r.p,
        r.n,
        r.policy,
        r.n_star,
        fmt_float(r.ratio),
        r.proven,
        fmt_float(r.hoffman),
        fmt_float(r.lambda_n),
        fmt_float(r.lambda),
        r.cycles.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        opt(r.ncc_ratio),
        opt(r.gap)
    )
}

fn cmd_sweep(
    target: &Target,
    max_len: usize,
    kp: u32,
    policy: LoopPolicy,
    budget: Option<Duration>,
    err: &mut dyn Write,
) -> Result<(String, Outcome), CliError> {
    if max_len < 3 || max_len.is_multiple_of(2) {
        return Err(CliError::Usage(format!("--max-len must be odd and at least 3, got {max_len}")));
    }
    a_of(kp)?;
    let primes = target.primes(err)?;
    let rows: Vec<SweepRow> = primes
        .par_iter()
        .map(|&p| sweep_row(p, max_len, kp, policy, budget))
        .collect::<Result<_, _>>()?;
    let mut s = sweep_header(max_len);
    for r in &rows {
        s.push_str(&sweep_csv_line(r));
    }
    let outcome = if rows.iter().all(|r| r.proven) { Outcome::Proven } else { Outcome::NotProven };
    Ok((s, outcome))
}
