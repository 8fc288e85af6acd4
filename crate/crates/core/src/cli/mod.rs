//! Command-line front end.
//!
//! Every subcommand is a plain function from parsed arguments to an
//! [`Output`], so the binary only parses `argv`, prints and exits.
//!
//! Exit codes: `0` success, `1` I/O or parse error, `2` infeasible input,
//! `3` solver did not converge, `4` verification failed.

pub mod bench;
pub mod input;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::AllocError;
use crate::fpia::{
    bisection_solve, default_lambda0, fpia_solve, FpiaStatus, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::popgen::{build_population, PopulationSpec, StrataPopulation};
use crate::problem::{Allocation, BoxProblem, Partition, Role, SolveTrace};
use crate::recursive::{lrna, naive_rna_box, rna, rnabox_twin, rnabox_with, RnaboxOptions};
use crate::rounding::{bound_warnings, round_preserve_sum, rounding_penalty};
use crate::verify::{check_box_optimality, OptimalityReport};
use bench::{run_bench, BenchConfig, BenchReport};
use input::{
    parse_allocation, parse_role, parse_strata, read_text, to_problem, AllocationEntry, TotalArg,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Environment variable holding the default `--format`.
pub const FORMAT_ENV: &str = "RNABOX_FORMAT";

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn csv(e: csv::Error) -> Self {
        Self::io(format!("csv: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<AllocError> for CliError {
    fn from(e: AllocError) -> Self {
        let code = match e {
            AllocError::InfeasibleProblem(_) | AllocError::SumMismatch { .. } => EXIT_INFEASIBLE,
            AllocError::PartitionCoversAll | AllocError::BracketFailure { .. } => {
                EXIT_NO_CONVERGENCE
            }
            AllocError::MalformedAllocation(_) => EXIT_VERIFY,
            _ => EXIT_IO,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Algorithm {
    Rnabox,
    RnaboxTwin,
    Rna,
    Lrna,
    Naive,
    Fpia,
    Bisection,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rnabox => "rnabox",
            Algorithm::RnaboxTwin => "rnabox-twin",
            Algorithm::Rna => "rna",
            Algorithm::Lrna => "lrna",
            Algorithm::Naive => "naive",
            Algorithm::Fpia => "fpia",
            Algorithm::Bisection => "bisection",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "rnabox",
    version,
    about = "Optimum sample allocation under lower and upper bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an allocation problem read from a strata table.
    Solve(SolveArgs),
    /// Check an allocation against the optimality conditions.
    Verify(VerifyArgs),
    /// Time solvers on a synthetic population over a grid of fractions.
    Bench(BenchArgs),
    /// Write a synthetic population as `label,N,S` CSV.
    Generate(GenerateArgs),
    /// Round an allocation to integers with the same total.
    Round(RoundArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, env = FORMAT_ENV, default_value = "json")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[group(id = "size", required = true, multiple = false)]
pub struct SizeArgs {
    /// Total sample size.
    #[arg(long, group = "size")]
    pub n: Option<f64>,
    /// Sampling fraction `f`, giving `n = round(f N)`; needs an `N,S` table.
    #[arg(long, group = "size")]
    pub fraction: Option<f64>,
}

impl SizeArgs {
    fn total(&self) -> TotalArg {
        match (self.n, self.fraction) {
            (Some(n), _) => TotalArg::Total(n),
            (None, Some(f)) => TotalArg::Fraction(f),
            (None, None) => unreachable!("clap requires one of --n and --fraction"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Strata table (`stratum,A,m,M` or `stratum,N,S[,m,M]`).
    pub input: PathBuf,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long, short, value_enum, default_value = "rnabox")]
    pub algorithm: Algorithm,
    /// Include the outer iterations of the box recursion.
    #[arg(long)]
    pub trace: bool,
    /// Require an `N,S` table and convert it with `A_h = N_h S_h`.
    #[arg(long)]
    pub stsi: bool,
    /// Starting value for the fixed-point iteration.
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Restrict later take-max scans to the previous take-max set.
    #[arg(long)]
    pub shrink_domain: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Strata table.
    pub input: PathBuf,
    /// Allocation as `stratum,x[,role]` CSV or a `solve` document.
    pub allocation: PathBuf,
    #[command(flatten)]
    pub size: SizeArgs,
    #[arg(long)]
    pub stsi: bool,
    #[arg(long, default_value_t = crate::verify::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PopulationArgs {
    /// Number of log-normal sets.
    #[arg(long, default_value_t = 10)]
    pub sets: usize,
    #[arg(long, default_value_t = 10_000)]
    pub set_size: usize,
    /// Strata per set before merging.
    #[arg(long, default_value_t = 10)]
    pub strata: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl PopulationArgs {
    fn spec(&self) -> PopulationSpec {
        PopulationSpec {
            sets: self.sets,
            set_size: self.set_size,
            strata_per_set: self.strata,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )]
    pub fractions: Vec<f64>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "rnabox,rnabox-twin,bisection,fpia"
    )]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Time (algorithm, fraction) cells concurrently.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RoundArgs {
    /// Allocation as `stratum,x` CSV or a `solve` document.
    pub allocation: PathBuf,
    /// Target total; must equal the sum of the allocation.
    #[arg(long)]
    pub n: u64,
    /// Strata table used for bound warnings and the rounding penalty.
    #[arg(long)]
    pub strata: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Rendered command output and the exit code that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub body: String,
    pub path: Option<PathBuf>,
    /// Diagnostics for the error stream.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumRow {
    pub label: String,
    pub x: f64,
    pub role: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub r: usize,
    #[serde(rename = "L")]
    pub take_min: Vec<String>,
    #[serde(rename = "U")]
    pub take_max: Vec<String>,
    pub s: Option<f64>,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDocument {
    pub algorithm: &'static str,
    pub status: &'static str,
    /// Whether every entry lies within its bounds.
    pub feasible: bool,
    pub n: f64,
    pub strata: Vec<StratumRow>,
    pub objective: Option<f64>,
    pub kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_history: Option<Vec<f64>>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRow {
    pub label: Option<String>,
    pub condition: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierRow {
    pub label: String,
    pub mu_lower: f64,
    pub mu_upper: f64,
    pub stationarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyDocument {
    pub is_optimal: bool,
    pub case: &'static str,
    pub objective: f64,
    pub violations: Vec<ViolationRow>,
    pub lambda: Option<f64>,
    pub multipliers: Option<Vec<MultiplierRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundedRow {
    pub label: String,
    pub x: f64,
    pub rounded: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningRow {
    pub label: String,
    pub value: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundDocument {
    pub n: u64,
    pub strata: Vec<RoundedRow>,
    /// `objective(rounded) / objective(x)`, when a strata table is given.
    pub penalty: Option<f64>,
    pub warnings: Vec<WarningRow>,
}

fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Rows as CSV; `header` is written on its own when there are no rows.
fn csv_rows<I, R>(header: &[&str], rows: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = R>,
    R: Serialize,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut empty = true;
    for row in rows {
        w.serialize(row).map_err(CliError::csv)?;
        empty = false;
    }
    if empty {
        w.write_record(header).map_err(CliError::csv)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn load_problem(path: &Path, size: &SizeArgs, stsi: bool) -> Result<BoxProblem, CliError> {
    let table = parse_strata(&read_text(path)?)?;
    if stsi && table.schema != input::Schema::Population {
        return Err(CliError::io("--stsi needs a table with `N,S` columns"));
    }
    to_problem(&table, size.total())
}

/// Partition read off an allocation by exact equality with the bounds.
pub fn partition_by_equality(p: &BoxProblem, x: &[f64]) -> Partition {
    let mut part = Partition::empty();
    for (h, &xh) in x.iter().enumerate().take(p.len()) {
        if xh == p.lower()[h] {
            part.take_min.insert(h);
        } else if xh == p.upper()[h] {
            part.take_max.insert(h);
        }
    }
    part
}

fn trace_rows(p: &BoxProblem, trace: &SolveTrace) -> Vec<TraceRow> {
    let labels = |set| p.labels_of(set).into_iter().map(str::to_string).collect();
    trace
        .iterations
        .iter()
        .map(|rec| TraceRow {
            r: rec.r,
            take_min: labels(&rec.take_min),
            take_max: labels(&rec.take_max),
            s: rec.s,
            inner_iterations: rec.inner_iterations,
        })
        .collect()
}

fn within_bounds(p: &BoxProblem, x: &[f64]) -> bool {
    (0..p.len()).all(|h| p.lower()[h] <= x[h] && x[h] <= p.upper()[h])
}

/// Runs the selected solver and builds the result document.
pub fn solve_document(p: &BoxProblem, args: &SolveArgs) -> Result<SolveDocument, CliError> {
    let start = Instant::now();
    let mut status = "converged";
    let mut trace = None;
    let mut lambda_history = None;
    let solved: Option<Allocation> = match args.algorithm {
        Algorithm::Rnabox => {
            let opts = RnaboxOptions {
                trace: args.trace,
                shrink_domain: args.shrink_domain,
            };
            let (alloc, t) = rnabox_with(p, opts);
            trace = t;
            Some(alloc)
        }
        Algorithm::RnaboxTwin => Some(rnabox_twin(p)),
        Algorithm::Rna => {
            let out = rna(&p.upper_problem());
            let part = Partition::new(Default::default(), out.take_max)?;
            Some(Allocation::new(p.coefficients(), out.x, part)?)
        }
        Algorithm::Lrna => {
            let out = lrna(&p.lower_problem());
            let part = Partition::new(out.take_min, Default::default())?;
            Some(Allocation::new(p.coefficients(), out.x, part)?)
        }
        Algorithm::Naive => {
            let out = naive_rna_box(p)?;
            Some(Allocation::new(p.coefficients(), out.x, out.partition)?)
        }
        Algorithm::Bisection => {
            let x = bisection_solve(p, 0.0)?;
            let part = partition_by_equality(p, &x);
            Some(Allocation::new(p.coefficients(), x, part)?)
        }
        Algorithm::Fpia => {
            let lambda0 = args.lambda0.unwrap_or_else(|| default_lambda0(p));
            let out = fpia_solve(p, lambda0, args.max_iter, args.tol)?;
            status = out.status.as_str();
            lambda_history = Some(out.lambda_history);
            match (out.status, out.allocation) {
                (FpiaStatus::Converged, Some(x)) => {
                    let part = partition_by_equality(p, &x);
                    Some(Allocation::new(p.coefficients(), x, part)?)
                }
                _ => None,
            }
        }
    };
    let solve_seconds = start.elapsed().as_secs_f64();

    let strata = match &solved {
        Some(alloc) => p
            .labels()
            .iter()
            .zip(&alloc.x)
            .enumerate()
            .map(|(h, (label, &x))| StratumRow {
                label: label.clone(),
                x,
                role: alloc.role(h).as_str(),
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(SolveDocument {
        algorithm: args.algorithm.as_str(),
        status,
        feasible: solved.as_ref().is_some_and(|a| within_bounds(p, &a.x)),
        n: p.total(),
        strata,
        objective: solved.as_ref().map(|a| a.objective),
        kind: solved.as_ref().map(|a| a.kind.as_str()),
        trace: trace.map(|t| trace_rows(p, &t)),
        lambda_history,
        timings: Timings { solve_seconds },
    })
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Output, CliError> {
    let p = load_problem(&args.input, &args.size, args.stsi)?;
    let doc = solve_document(&p, args)?;
    let code = if doc.objective.is_some() {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    };
    let mut notes = Vec::new();
    if code != EXIT_OK {
        notes.push(format!("fixed-point iteration stopped: {}", doc.status));
    }
    let body = match args.out.format {
        Format::Json => json(&doc),
        Format::Csv => csv_rows(&["label", "x", "role"], &doc.strata)?,
    };
    Ok(Output {
        code,
        body,
        path: args.out.output.clone(),
        notes,
    })
}

/// Matches allocation entries to the strata of `p` by label.
///
/// Entries without a role are classified by exact equality with the bounds.
pub fn allocation_for(p: &BoxProblem, entries: &[AllocationEntry]) -> Result<Allocation, CliError> {
    if entries.len() != p.len() {
        return Err(CliError::io(format!(
            "allocation has {} strata, problem has {}",
            entries.len(),
            p.len()
        )));
    }
    let mut x = vec![f64::NAN; p.len()];
    let mut roles: Vec<Option<Role>> = vec![None; p.len()];
    for e in entries {
        let h = p
            .index_of(&e.label)
            .ok_or_else(|| CliError::io(format!("unknown stratum `{}` in allocation", e.label)))?;
        if !x[h].is_nan() {
            return Err(CliError::io(format!(
                "stratum `{}` appears twice in allocation",
                e.label
            )));
        }
        x[h] = e.x;
        roles[h] = e.role.as_deref().map(parse_role).transpose()?;
    }
    let mut part = partition_by_equality(p, &x);
    if roles.iter().any(Option::is_some) {
        part = Partition::empty();
        for (h, role) in roles.iter().enumerate() {
            match role {
                Some(Role::Min) => {
                    part.take_min.insert(h);
                }
                Some(Role::Max) => {
                    part.take_max.insert(h);
                }
                Some(Role::Neyman) => {}
                None => {
                    return Err(CliError::io(format!(
                        "stratum `{}` has no role while others do",
                        p.labels()[h]
                    )))
                }
            }
        }
    }
    Ok(Allocation::new(p.coefficients(), x, part)?)
}

pub fn verify_document(
    p: &BoxProblem,
    alloc: &Allocation,
    report: &OptimalityReport,
) -> VerifyDocument {
    let label = |h: usize| p.labels()[h].clone();
    VerifyDocument {
        is_optimal: report.is_optimal,
        case: report.case.as_str(),
        objective: alloc.objective,
        violations: report
            .violations
            .iter()
            .map(|v| ViolationRow {
                label: v.stratum.map(label),
                condition: v.condition.as_str(),
                lhs: v.lhs,
                rhs: v.rhs,
            })
            .collect(),
        lambda: report.multipliers.as_ref().map(|m| m.lambda),
        multipliers: report.multipliers.as_ref().map(|m| {
            (0..p.len())
                .map(|h| MultiplierRow {
                    label: label(h),
                    mu_lower: m.mu_lower[h],
                    mu_upper: m.mu_upper[h],
                    stationarity: m.stationarity[h],
                })
                .collect()
        }),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let p = load_problem(&args.input, &args.size, args.stsi)?;
    let entries = parse_allocation(&read_text(&args.allocation)?)?;
    let alloc = allocation_for(&p, &entries)?;
    let report = check_box_optimality(&p, &alloc, args.tol)?;
    let doc = verify_document(&p, &alloc, &report);
    let notes = doc
        .violations
        .iter()
        .map(|v| {
            format!(
                "stratum {}: {} ({} vs {})",
                v.label.as_deref().unwrap_or("-"),
                v.condition,
                v.lhs,
                v.rhs
            )
        })
        .collect();
    let body = match args.out.format {
        Format::Json => json(&doc),
        Format::Csv => csv_rows(&["label", "condition", "lhs", "rhs"], &doc.violations)?,
    };
    Ok(Output {
        code: if report.is_optimal {
            EXIT_OK
        } else {
            EXIT_VERIFY
        },
        body,
        path: args.out.output.clone(),
        notes,
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Output, CliError> {
    let config = BenchConfig {
        population: args.population.spec(),
        fractions: args.fractions.clone(),
        algorithms: args.algorithms.clone(),
        repeats: args.repeats,
        parallel: args.parallel,
    };
    let report: BenchReport = run_bench(&config)?;
    let failures = report.cross_check_failures();
    let notes = failures
        .iter()
        .map(|r| {
            format!(
                "{} at f = {}: objective differs from bisection by {:e}",
                r.algorithm,
                r.fraction,
                r.bisection_gap.unwrap_or(f64::NAN)
            )
        })
        .collect();
    let code = if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    };
    let body = match args.out.format {
        Format::Json => json(&report),
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat<'a> {
                algorithm: &'a str,
                fraction: f64,
                n: f64,
                status: &'a str,
                median_seconds: f64,
                iterations: String,
                objective: Option<f64>,
                take_min: usize,
                take_neyman: usize,
                take_max: usize,
                bisection_gap: Option<f64>,
            }
            const HEADER: [&str; 11] = [
                "algorithm",
                "fraction",
                "n",
                "status",
                "median_seconds",
                "iterations",
                "objective",
                "take_min",
                "take_neyman",
                "take_max",
                "bisection_gap",
            ];
            csv_rows(
                &HEADER,
                report.rows.iter().map(|r| Flat {
                    algorithm: &r.algorithm,
                    fraction: r.fraction,
                    n: r.n,
                    status: &r.status,
                    median_seconds: r.median_seconds,
                    iterations: r
                        .iterations
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                    objective: r.objective,
                    take_min: r.take_min,
                    take_neyman: r.take_neyman,
                    take_max: r.take_max,
                    bisection_gap: r.bisection_gap,
                }),
            )?
        }
    };
    Ok(Output {
        code,
        body,
        path: args.out.output.clone(),
        notes,
    })
}

/// `label,N,S` rows of a population.
pub fn population_csv(pop: &StrataPopulation) -> String {
    let mut out = String::from("label,N,S\n");
    for s in pop.strata() {
        out.push_str(&format!("{},{},{}\n", s.label, s.size, s.std_dev));
    }
    out
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<Output, CliError> {
    let pop = build_population(&args.population.spec())?;
    Ok(Output {
        code: EXIT_OK,
        body: population_csv(&pop),
        path: args.output.clone(),
        notes: Vec::new(),
    })
}

pub fn cmd_round(args: &RoundArgs) -> Result<Output, CliError> {
    let entries = parse_allocation(&read_text(&args.allocation)?)?;
    let x: Vec<f64> = entries.iter().map(|e| e.x).collect();
    let rounded = round_preserve_sum(&x, args.n)?;

    let (penalty, warnings) = match &args.strata {
        Some(path) => {
            let p = to_problem(
                &parse_strata(&read_text(path)?)?,
                TotalArg::Total(args.n as f64),
            )?;
            let alloc = allocation_for(&p, &entries)?;
            // rows follow the allocation file, bounds follow the problem
            let order: Vec<usize> = entries
                .iter()
                .map(|e| p.index_of(&e.label).expect("matched by allocation_for"))
                .collect();
            let mut by_problem = vec![0u64; p.len()];
            for (k, &h) in order.iter().enumerate() {
                by_problem[h] = rounded[k];
            }
            let penalty = rounding_penalty(p.coefficients(), &alloc.x, &by_problem)?;
            let warnings = bound_warnings(p.lower(), p.upper(), &by_problem)
                .into_iter()
                .map(|w| WarningRow {
                    label: p.labels()[w.stratum].clone(),
                    value: w.value,
                    lower: w.lower,
                    upper: w.upper,
                })
                .collect();
            (Some(penalty), warnings)
        }
        None => (None, Vec::new()),
    };

    let doc = RoundDocument {
        n: args.n,
        strata: entries
            .iter()
            .zip(&rounded)
            .map(|(e, &r)| RoundedRow {
                label: e.label.clone(),
                x: e.x,
                rounded: r,
            })
            .collect(),
        penalty,
        warnings,
    };
    let notes = doc
        .warnings
        .iter()
        .map(|w| {
            format!(
                "stratum {}: rounded value {} outside [{}, {}]",
                w.label, w.value, w.lower, w.upper
            )
        })
        .collect();
    let body = match args.out.format {
        Format::Json => json(&doc),
        Format::Csv => csv_rows(&["label", "x", "rounded"], &doc.strata)?,
    };
    Ok(Output {
        code: EXIT_OK,
        body,
        path: args.out.output.clone(),
        notes,
    })
}

pub fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Round(a) => cmd_round(a),
    }
}

/// Parses `argv`, runs the command, prints the result and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("rnabox: {note}");
            }
            let written = match &out.path {
                Some(path) => std::fs::write(path, &out.body),
                None => std::io::stdout().write_all(out.body.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("rnabox: cannot write output: {e}");
                return EXIT_IO;
            }
            out.code
        }
        Err(e) => {
            eprintln!("rnabox: {e}");
            e.code
        }
    }
}
