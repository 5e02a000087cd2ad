//! Command-line front end: condition checks, family generation, Monte Carlo
//! studies, cost reports and exact one-step expectations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use srk_core::conditions::{evaluate_all, DEFAULT_TOLERANCE};
use srk_core::error::Error;
use srk_core::estimator::{errors_csv, orders_csv, run_study, DivergencePolicy, EstimateOptions, Scheme};
use srk_core::families::{make_family, named_scheme_by_name, Branch, FamilyId, FamilyParams, Param};
use srk_core::integrator::{evaluation_cost, exact_one_step_expectation};
use srk_core::problems::problem_by_name;
use srk_core::tableau::{CoefficientTableau, OrderClaim};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CONSTRAINT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "srk", version, about = "Stochastic Runge-Kutta schemes for weak SDE approximation")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate all order conditions of a tableau.
    Check(CheckArgs),
    /// Emit the tableau of a family member as JSON.
    Family(FamilyArgs),
    /// Estimate weak errors and convergence orders by Monte Carlo.
    Study(StudyArgs),
    /// Function evaluations and random variables per step.
    Cost(CostArgs),
    /// Exact one-step expectation by enumerating the increment distribution.
    Enumerate(EnumerateArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TableauSource {
    /// A named scheme (EM, PL1WM, RDI1WM, RDI2WM, RDI3WM, RDI4WM).
    #[arg(long)]
    pub scheme: Option<String>,
    /// A tableau JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl TableauSource {
    fn load(&self) -> Result<CoefficientTableau, CliError> {
        match (&self.scheme, &self.file) {
            (Some(name), _) => Ok(named_scheme_by_name(name)?),
            (None, Some(path)) => load_tableau(path),
            (None, None) => Err(CliError::usage("need --scheme or --file")),
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: TableauSource,
    /// Residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Print the report as CSV.
    #[arg(long)]
    pub csv: bool,
    /// Claimed order `p_D,p_S`; the exit code is nonzero unless it is met.
    #[arg(long, value_parser = parse_claim)]
    pub claim: Option<OrderClaim>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Family id, e.g. ord21, case-221, ord32-221c.
    pub family: String,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c4: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c5: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c6: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c7: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c8: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c9: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c10: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c11: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Take the lower sign in the family's `±` formulas.
    #[arg(long)]
    pub lower: bool,
    /// Also check the family's order conditions (report on stderr).
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// nonlinear16, system18 or linear:a=..,b=..,p=..
    pub problem: String,
    /// Comma-separated scheme names, EXEM, or tableau JSON files.
    #[arg(long, required = true)]
    pub schemes: String,
    /// Comma-separated step sizes, e.g. 0.5,0.25 or 2^-1,2^-2.
    #[arg(long, required = true)]
    pub h: String,
    /// Trajectories per step size.
    #[arg(long = "M", default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    /// Count diverged trajectories instead of failing.
    #[arg(long)]
    pub allow_divergence: bool,
    /// Directory for errors.csv and orders.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Named scheme, or use --file.
    pub scheme: Option<String>,
    #[arg(long, conflicts_with = "scheme")]
    pub file: Option<PathBuf>,
    /// Noise dimension.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub source: TableauSource,
    /// Problem whose functional and initial value are used.
    #[arg(long)]
    pub problem: String,
    /// Step sizes.
    #[arg(long)]
    pub h: String,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConstraintViolation { .. } => EXIT_CONSTRAINT,
            Error::Diverged { .. } | Error::DivergedTrajectories { .. } | Error::Regression(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn parse_claim(s: &str) -> Result<OrderClaim, String> {
    s.parse::<OrderClaim>().map_err(|e| e.to_string())
}

/// Parses a comma-separated list of positive step sizes. Entries may be
/// decimals or powers of two written `2^-k`.
pub fn parse_step_list(s: &str) -> Result<Vec<f64>, Error> {
    let bad = |item: &str, why: &str| Error::InvalidArgument(format!("step size '{item}': {why}"));
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let h = match item.strip_prefix("2^") {
            Some(exp) => {
                let k: i32 = exp.parse().map_err(|_| bad(item, "expected 2^k with integer k"))?;
                if !(-1000..=1000).contains(&k) {
                    return Err(bad(item, "exponent out of range"));
                }
                2f64.powi(k)
            }
            None => item.parse::<f64>().map_err(|_| bad(item, "not a number"))?,
        };
        if !(h > 0.0) || !h.is_finite() {
            return Err(bad(item, "must be positive and finite"));
        }
        out.push(h);
    }
    Ok(out)
}

/// Parses a comma-separated scheme list: named schemes, `EXEM`, or paths to
/// tableau JSON files (ending in `.json`).
pub fn parse_scheme_list(s: &str) -> Result<Vec<Scheme>, CliError> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            if item.ends_with(".json") {
                let t = load_tableau(item.as_ref())?;
                let name = t.name().map(str::to_string).unwrap_or_else(|| item.to_string());
                Ok(Scheme::srk(name, t))
            } else {
                Ok(item.parse::<Scheme>()?)
            }
        })
        .collect()
}

fn load_tableau(path: &std::path::Path) -> Result<CoefficientTableau, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(CoefficientTableau::from_json(&text)?)
}

/// Runs a parsed command, writing its normal output to `out` and
/// diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let threads = cli.threads;
    let command = cli.command;
    match threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::usage(e.to_string()))?;
            let (mut o, mut e) = (Vec::new(), Vec::new());
            let result = pool.install(|| dispatch(command, &mut o, &mut e));
            out.write_all(&o)?;
            err.write_all(&e)?;
            result
        }
        None => dispatch(command, out, err),
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Check(a) => cmd_check(&a, out),
        Command::Family(a) => cmd_family(&a, out, err),
        Command::Study(a) => cmd_study(&a, out),
        Command::Cost(a) => cmd_cost(&a, out),
        Command::Enumerate(a) => cmd_enumerate(&a, out),
    }
}

pub fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = a.source.load()?;
    let report = evaluate_all(&t, a.tol)?;
    if a.csv {
        write!(out, "{}", report.to_csv())?;
    } else {
        write!(out, "{}", report.to_text_table())?;
    }
    if let Some(claim) = a.claim {
        let met = report.inferred.meets(&claim);
        writeln!(out, "claim {claim}: {}", if met { "met" } else { "not met" })?;
        if !met {
            return Err(CliError {
                code: EXIT_CONSTRAINT,
                message: format!("claimed order {claim} not met, inferred {}", report.inferred),
            });
        }
    }
    Ok(())
}

fn family_params(a: &FamilyArgs) -> Result<FamilyParams, CliError> {
    let family: FamilyId = a.family.parse()?;
    let given = [
        None, None, a.c2, a.c3, a.c4, a.c5, a.c6, a.c7, a.c8, a.c9, a.c10, a.c11,
    ];
    let mut p = FamilyParams::new(family).c1(a.c1.unwrap_or(1.0));
    for param in family.parameters() {
        match *param {
            Param::C(i) => {
                let default = match (i, family.stages()) {
                    (3, 3) => Some((2.0f64 / 3.0).sqrt()),
                    (4, 3) => Some(2f64.sqrt()),
                    (4..=11, 2) => Some(0.0),
                    _ => None,
                };
                if let Some(v) = given[i].or(default) {
                    p = p.c(i, v);
                }
            }
            Param::Lambda => {
                if let Some(v) = a.lambda {
                    p = p.lambda(v);
                }
            }
            Param::Branch => {}
        }
    }
    for (i, v) in given.iter().enumerate() {
        if v.is_some() && !family.parameters().contains(&Param::C(i)) {
            return Err(CliError::usage(format!("{family} has no parameter c{i}")));
        }
    }
    if a.lambda.is_some() && !family.parameters().contains(&Param::Lambda) {
        return Err(CliError::usage(format!("{family} has no parameter lambda")));
    }
    if a.lower {
        if !family.parameters().contains(&Param::Branch) {
            return Err(CliError::usage(format!("{family} has no sign choice")));
        }
        p = p.branch(Branch::Lower);
    }
    Ok(p)
}

pub fn cmd_family(a: &FamilyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let p = family_params(a)?;
    let t = make_family(&p)?.with_name(p.family.as_str());
    writeln!(out, "{}", t.to_json()?)?;
    if a.verify {
        let report = evaluate_all(&t, a.tol)?;
        write!(err, "{}", report.to_text_table())?;
        let classified = p.family.classified_conditions();
        let failing: Vec<String> = report.failing(&classified).map(|id| id.to_string()).collect();
        if !failing.is_empty() {
            return Err(CliError {
                code: EXIT_CONSTRAINT,
                message: format!("{}: conditions not satisfied: {}", p.family, failing.join(", ")),
            });
        }
    }
    Ok(())
}

pub fn cmd_study(a: &StudyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = problem_by_name(&a.problem)?;
    let schemes = parse_scheme_list(&a.schemes)?;
    let hs = parse_step_list(&a.h)?;
    let opts = EstimateOptions::default()
        .samples(a.samples)
        .seed(a.seed)
        .batches(a.batches)
        .divergence(if a.allow_divergence {
            DivergencePolicy::Report
        } else {
            DivergencePolicy::Fail
        });
    let studies = run_study(&problem, &schemes, &hs, &opts)?;
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("errors.csv"), errors_csv(&studies))?;
    fs::write(a.out.join("orders.csv"), orders_csv(&studies))?;
    for s in &studies {
        writeln!(out, "{s}")?;
        let diverged: usize = s.points.iter().map(|r| r.diverged).sum();
        if diverged > 0 {
            writeln!(out, "  {diverged} diverged trajectories excluded")?;
        }
    }
    Ok(())
}

pub fn cmd_cost(a: &CostArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = match (&a.scheme, &a.file) {
        (Some(name), _) => named_scheme_by_name(name)?,
        (None, Some(path)) => load_tableau(path)?,
        (None, None) => return Err(CliError::usage("need a scheme name or --file")),
    };
    if a.m == 0 {
        return Err(CliError::usage("--m must be at least 1"));
    }
    writeln!(out, "{}", evaluation_cost(&t, a.m))?;
    Ok(())
}

pub fn cmd_enumerate(a: &EnumerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = a.source.load()?;
    let problem = problem_by_name(&a.problem)?;
    let p = &problem.problem;
    let f = problem.f.clone();
    writeln!(out, "h,one_step,exact,error")?;
    for h in parse_step_list(&a.h)? {
        let v = exact_one_step_expectation(&t, p, &|x| f(x), p.t0, &p.x0, h)?;
        let exact = problem.exact(p.t0 + h);
        writeln!(out, "{h:e},{v:e},{exact:e},{:e}", v - exact)?;
    }
    Ok(())
}
