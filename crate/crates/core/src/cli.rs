//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 configuration or input error, 2 root-count mismatch,
//! 3 solver failure, 4 failed demonstration claim.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::demo::run_demo;
use crate::error::{Error, Result};
use crate::io::{complex_json, matrix_json, read_q0_file, roots_svg, write_roots_csv};
use crate::lambert_dde::{
    classify_pair, m_to_q, roots_to_companion, s_to_w, solve_branch, verify_solution, w_to_m, LambertSolution,
    SolverOptions, DEFAULT_MAX_ITERATIONS, DEFAULT_SOLVER_TOL,
};
use crate::matrix_fn::BranchAssignment;
use crate::model::{Region, TdsSystem};
use crate::qpmr::{count_roots, find_roots, GridSpec, DEFAULT_SAMPLES_PER_EDGE, DEFAULT_STEP, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_COUNT_MISMATCH: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CLAIM: i32 = 4;

const SEED_LIFT_NOTE: &str = "tau·B·Q0 had zero eigenvalues on nonzero branches; \
they were moved to an interior point of their branch range before iterating, \
so the converged pair depends on that starting point";

#[derive(Debug, Parser)]
#[command(name = "tds-spectrum", version, about = "Characteristic roots of linear time-delay systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate all roots in a region and cross-check their number.
    Roots(RootsArgs),
    /// Build S, W, M and Q from a root pair of a second-order system.
    Reverse(ReverseArgs),
    /// Solve the branch equation for Q and report the resulting roots.
    Solve(SolveArgs),
    /// Run the built-in second-order counterexample end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// re_min re_max im_min im_max
    #[arg(long, num_args = 4, allow_negative_numbers = true, default_values_t = [-4.0, 2.0, -1.0, 8.0])]
    pub region: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP, allow_negative_numbers = true)]
    pub step: f64,
    #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
    pub tol: f64,
    /// Boundary samples per edge for the argument-principle count.
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_EDGE)]
    pub samples: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReverseArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Two roots, e.g. `0.8070 -2.1854` or `-1.4928+6.6027i -1.4928-6.6027i`.
    #[arg(long, num_args = 2, allow_hyphen_values = true, required = true)]
    pub pair: Vec<String>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Starting value as `{"Q": [[..], ..]}`.
    #[arg(long)]
    pub q0: Option<PathBuf>,
    /// Derive the starting value from this root pair instead of `--q0`.
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    pub pair: Option<Vec<String>>,
    /// One branch per eigenvalue; defaults to `0,-1,..,-1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub branches: Option<Vec<i64>>,
    #[arg(long, default_value_t = DEFAULT_SOLVER_TOL, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Also write the claim list as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            code
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Roots(a) => cmd_roots(&a, out, err),
        Command::Reverse(a) => cmd_reverse(&a, out),
        Command::Solve(a) => cmd_solve(&a, out, err),
        Command::Demo(a) => cmd_demo(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn load_system(path: &Path) -> Result<TdsSystem> {
    TdsSystem::from_json_file(path)
}

fn write_json(path: Option<&Path>, value: &Value, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_pair(raw: &[String], field: &str) -> Result<(Complex64, Complex64)> {
    let parse = |s: &String| -> Result<Complex64> {
        s.trim()
            .parse::<Complex64>()
            .map_err(|_| Error::Parse { key: field.into(), message: format!("`{s}` is not a complex number") })
    };
    match raw {
        [a, b] => Ok((parse(a)?, parse(b)?)),
        _ => Err(Error::Parse { key: field.into(), message: "expected exactly two roots".into() }),
    }
}

fn region_from(values: &[f64]) -> Result<Region> {
    match values {
        &[a, b, c, d] => {
            Region::new(a, b, c, d).map_err(|e| Error::Parse { key: "region".into(), message: e.to_string() })
        }
        _ => Err(Error::Parse { key: "region".into(), message: "expected four bounds".into() }),
    }
}

fn positive(value: f64, field: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Parse { key: field.into(), message: format!("must be > 0, got {value}") })
    }
}

pub fn cmd_roots(args: &RootsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let sys = load_system(&args.system)?;
    let region = region_from(&args.region)?;
    let tol = positive(args.tol, "tol")?;
    let grid = GridSpec::new(region, positive(args.step, "step")?)
        .map_err(|e| Error::Parse { key: "step".into(), message: e.to_string() })?;
    let report = find_roots(&sys, &grid, tol)?;
    let count = count_roots(&sys, &region, args.samples);

    match &args.csv {
        Some(p) => write_roots_csv(&report, fs::File::create(p)?)?,
        None => write_roots_csv(&report, &mut *out)?,
    }
    if let Some(p) = &args.svg {
        fs::write(p, roots_svg(&report))?;
    }
    if let Some(p) = &args.json {
        let value = json!({
            "region": report.region,
            "method": report.method,
            "roots": report.iter().map(|(s, r)| json!({ "re": s.re, "im": s.im, "residual": r })).collect::<Vec<_>>(),
            "count": count.as_ref().ok(),
        });
        write_json(Some(p), &value, out)?;
    }
    match count {
        Ok(n) if n == report.len() => Ok(EXIT_OK),
        Ok(n) => {
            writeln!(err, "count mismatch: argument principle gives {n}, grid search found {}", report.len())?;
            Ok(EXIT_COUNT_MISMATCH)
        }
        Err(e) => {
            writeln!(err, "count cross-check failed: {e}")?;
            Ok(EXIT_COUNT_MISMATCH)
        }
    }
}

/// Reverse pipeline from a root pair to `S`, `W`, `M` and the minimum-norm `Q`.
pub fn reverse_report(sys: &TdsSystem, l1: Complex64, l2: Complex64) -> Result<Value> {
    if sys.order() != 2 {
        return Err(Error::InvalidInput(format!("reverse needs a second-order system, got order {}", sys.order())));
    }
    let s = roots_to_companion(l1, l2)?;
    let w = s_to_w(sys, &s)?;
    let m = w_to_m(&w)?;
    let q = match m_to_q(sys, &m) {
        Ok(q) => json!({ "Q": matrix_json(&q) }),
        Err(e) => json!({ "Q": null, "reason": e.to_string() }),
    };
    let class = classify_pair(sys, l1, l2, None)?;
    let eigen = class
        .eigen_branches
        .iter()
        .map(|(v, b)| json!({ "value": complex_json(*v), "branch": b.branch, "on_boundary": b.on_boundary }))
        .collect::<Vec<_>>();
    Ok(json!({
        "pair": [complex_json(l1), complex_json(l2)],
        "S": matrix_json(&s),
        "W": matrix_json(&w),
        "M": matrix_json(&m),
        "Q": q["Q"],
        "Q_note": q.get("reason"),
        "W_eigenvalues": eigen,
        "branch": class.branch,
        "w22": class.w22,
        "w22_formula": class.w22_formula,
    }))
}

pub fn cmd_reverse(args: &ReverseArgs, out: &mut dyn Write) -> Result<i32> {
    let sys = load_system(&args.system)?;
    let (l1, l2) = parse_pair(&args.pair, "pair")?;
    let value = reverse_report(&sys, l1, l2)?;
    write_json(args.json.as_deref(), &value, out)?;
    Ok(EXIT_OK)
}

fn default_branches(n: usize) -> BranchAssignment {
    let ks: Vec<i64> = (0..n).map(|i| if i == 0 { 0 } else { -1 }).collect();
    BranchAssignment::from_ints(&ks)
}

fn solution_json(sol: &LambertSolution, matrix_residual: f64, char_residuals: &[f64]) -> Value {
    json!({
        "branches": sol.branch_assign,
        "Q": matrix_json(&sol.q),
        "M": matrix_json(&sol.m),
        "W": matrix_json(&sol.w),
        "S": matrix_json(&sol.s),
        "eigenvalues": sol.eigenvalues.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "solver_residual": sol.solver_residual,
        "iterations": sol.iterations,
        "seed_lifted": sol.seed_lifted,
        "note": sol.seed_lifted.then_some(SEED_LIFT_NOTE),
        "verification": {
            "matrix_residual": matrix_residual,
            "char_residuals": char_residuals,
        },
    })
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let sys = load_system(&args.system)?;
    let tol = positive(args.tol, "tol")?;
    let q0 = match (&args.q0, &args.pair) {
        (Some(p), _) => read_q0_file(p)?,
        (None, Some(raw)) => {
            let (l1, l2) = parse_pair(raw, "pair")?;
            let s = roots_to_companion(l1, l2)?;
            m_to_q(&sys, &w_to_m(&s_to_w(&sys, &s)?)?)?
        }
        (None, None) => {
            return Err(Error::Parse { key: "q0".into(), message: "supply --q0 or --pair".into() });
        }
    };
    let assign = match &args.branches {
        Some(ks) => BranchAssignment::from_ints(ks),
        None => default_branches(sys.order()),
    };
    let opts = SolverOptions { tol, max_iterations: args.max_iterations };
    let sol = solve_branch(&sys, &assign, &q0, opts)?;
    let check = verify_solution(&sys, &sol.s)?;
    write_json(args.json.as_deref(), &solution_json(&sol, check.matrix_residual, &check.char_residuals), out)?;

    let worst = check.char_residuals.iter().copied().fold(0.0, f64::max);
    if check.matrix_residual <= 10.0 * tol && worst <= 10.0 * tol {
        Ok(EXIT_OK)
    } else {
        writeln!(
            err,
            "verification failed: matrix residual {:.3e}, worst root residual {worst:.3e}",
            check.matrix_residual
        )?;
        Ok(EXIT_SOLVER)
    }
}

pub fn cmd_demo(args: &DemoArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let report = run_demo();
    out.write_all(report.transcript().as_bytes())?;
    if let Some(p) = &args.json {
        write_json(Some(p), &serde_json::to_value(&report)?, out)?;
    }
    match report.first_failure() {
        None => Ok(EXIT_OK),
        Some(c) => {
            writeln!(err, "claim failed: {}", c.name)?;
            Ok(EXIT_CLAIM)
        }
    }
}
