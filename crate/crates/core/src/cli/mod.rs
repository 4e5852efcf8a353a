//! Command-line front end: flows, portraits, scattering sweeps, wavefunction
//! samples and the oracle verification suite, emitted as CSV or JSON.

mod output;

pub use output::{format_float, Format, Table};

use crate::model::{sigma_from_alpha, ModelError, SigmaOrder};
use crate::oracle::verify::{self, VerifyConfig};
use crate::oracle::{solve_scattering, wavefunction_sample, OracleError, RegulatedProblem};
use crate::rgflow::{flow_numeric, flow_rhs, log_grid, portrait_sample, trajectory_through, FlowError, PortraitWindow};
use crate::scattering::{ScatteringError, ScatteringSolution};
use clap::{ArgAction, Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Relative `--out` paths resolve against this directory when it is set.
pub const OUT_DIR_ENV: &str = "INVSQ_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    ToleranceBreach(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input or I/O, 2 for a failed numerical check.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ToleranceBreach(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Validation(e.to_string())
            }
        }
    )*};
}
validation_from!(ModelError, FlowError, ScatteringError, OracleError);

#[derive(Debug, Parser)]
#[command(name = "invsq", version, about = "RG flow and scattering for the inverse-square potential")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one RG trajectory Λ(ε).
    Flow(FlowArgs),
    /// Sample a family of RG trajectories with flow directions.
    Portrait(PortraitArgs),
    /// Reflection and transmission amplitudes over a sweep.
    Scatter(ScatterArgs),
    /// Compare the ODE oracle against the closed-form amplitudes.
    Verify(VerifyArgs),
    /// Wavefunction samples from the monomial branch or a solved problem.
    Wavefunction(WavefunctionArgs),
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Initial reduced coupling Λ₀, e.g. `0.1` or `1-2i`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda0: Option<Complex64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Select the trajectory by its scale ε_* instead of (Λ₀, ε₀).
    #[arg(long)]
    pub eps_star: Option<f64>,
    #[arg(long = "eps-range", num_args = 2, value_names = ["MIN", "MAX"], required = true)]
    pub eps_range: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Initial coupling Λ₀ at ε₀; repeat for one trajectory each.
    #[arg(long = "seed", action = ArgAction::Append, value_parser = parse_complex, allow_hyphen_values = true)]
    pub seeds: Vec<Complex64>,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
    #[arg(long = "eps-range", num_args = 2, value_names = ["MIN", "MAX"], required = true)]
    pub eps_range: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Fixed wavenumber; omit when sweeping k.
    #[arg(long)]
    pub k: Option<f64>,
    /// Fixed trajectory scale; omit when sweeping ε_*.
    #[arg(long)]
    pub eps_star: Option<f64>,
    #[arg(long = "k-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub k_range: Option<Vec<f64>>,
    #[arg(long = "eps-star-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub eps_star_range: Option<Vec<f64>>,
    /// Explicit RG invariant X_*; repeat for one row each (needs --k).
    #[arg(long = "x-star", action = ArgAction::Append, value_parser = parse_complex, allow_hyphen_values = true)]
    pub x_star: Vec<Complex64>,
    /// Reduced coupling Λ at regulator --eps; repeat for one row each (needs --k).
    #[arg(long = "coupling", action = ArgAction::Append, value_parser = parse_complex, allow_hyphen_values = true)]
    pub coupling: Vec<Complex64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Small subset of the grid.
    #[arg(long)]
    pub quick: bool,
    /// Corrupt the closed-form T to exercise the failure path.
    #[arg(long)]
    pub mutate: bool,
}

#[derive(Debug, Args)]
pub struct WavefunctionArgs {
    /// Sample the bare power law Q^{1/2+iζ} instead of solving.
    #[arg(long)]
    pub monomial: bool,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Reduced coupling Λ at --eps.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub coupling: Option<Complex64>,
    /// Trajectory scale; sets Λ at --eps.
    #[arg(long)]
    pub eps_star: Option<f64>,
    /// |Q| range; solved mode samples both half-lines.
    #[arg(long = "q-range", num_args = 2, value_names = ["MIN", "MAX"])]
    pub q_range: Option<Vec<f64>>,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
}

/// Accepts `a`, `a+bi`, `a-bi`, `bi` and `a,b`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|e| format!("bad real part in {s:?}: {e}"))?;
        let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part in {s:?}: {e}"))?;
        return Ok(Complex64::new(re, im));
    }
    s.parse::<Complex64>().map_err(|e| format!("cannot parse {s:?} as a complex number: {e}"))
}

fn range(name: &str, v: &[f64]) -> Result<(f64, f64), CliError> {
    match v {
        [lo, hi] if lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi => Ok((*lo, *hi)),
        _ => Err(CliError::Validation(format!("--{name} needs 0 < MIN < MAX, got {v:?}"))),
    }
}

fn sample_count(n: usize) -> Result<usize, CliError> {
    if n < 2 {
        return Err(CliError::Validation("--samples must be at least 2".into()));
    }
    Ok(n)
}

/// Produces the output table for a parsed command.
pub fn execute(command: &Command, format: Format) -> Result<(String, Option<CliError>), CliError> {
    match command {
        Command::Flow(a) => Ok((cmd_flow(a)?.render(format), None)),
        Command::Portrait(a) => Ok((cmd_portrait(a)?.render(format), None)),
        Command::Scatter(a) => Ok((cmd_scatter(a)?.render(format), None)),
        Command::Wavefunction(a) => Ok((cmd_wavefunction(a)?.render(format), None)),
        Command::Verify(a) => {
            let report = verify::run(VerifyConfig {
                quick: a.quick,
                mutate: a.mutate,
            });
            let breach = (!report.all_pass).then(|| {
                CliError::ToleranceBreach(format!("{} of {} verification cases failed", report.failed, report.cases.len()))
            });
            Ok((verify_table(&report).render(format), breach))
        }
    }
}

/// Parses, runs and writes; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command, cli.format).and_then(|(text, breach)| {
        write_output(cli.out.as_deref(), &text)?;
        breach.map_or(Ok(()), Err)
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
        Some(p) => {
            let path = match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) if p.is_relative() => Path::new(&dir).join(p),
                _ => p.to_path_buf(),
            };
            if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
    }
    Ok(())
}

pub fn cmd_flow(a: &FlowArgs) -> Result<Table, CliError> {
    let sigma = sigma_from_alpha(a.alpha)?;
    let (lo, hi) = range("eps-range", &a.eps_range)?;
    let grid = log_grid(lo, hi, sample_count(a.samples)?)?;
    let (lambda0, eps0) = match (a.lambda0, a.eps0, a.eps_star) {
        (Some(l), Some(e), None) => (l, e),
        (None, None, Some(star)) => {
            let eps0 = (lo * hi).sqrt();
            let eps0 = if (eps0 / star - 1.0).abs() < 1e-6 { lo } else { eps0 };
            (trajectory_through(star, &sigma, eps0)?, eps0)
        }
        (_, _, Some(_)) => {
            return Err(CliError::Validation("give either --lambda0/--eps0 or --eps-star, not both".into()));
        }
        _ => return Err(CliError::Validation("--lambda0 and --eps0 are both required".into())),
    };
    let traj = flow_numeric(lambda0, eps0, &sigma, &grid)?;
    let mut t = Table::new(&["epsilon", "re_Lambda", "im_Lambda"]);
    for s in &traj.samples {
        t.push(vec![s.epsilon, s.big_lambda.re, s.big_lambda.im]);
    }
    t.json = Some(serde_json::to_value(&traj.samples).expect("serializable"));
    Ok(t)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct PortraitPoint {
    epsilon: f64,
    #[serde(rename = "re_Lambda")]
    re: f64,
    #[serde(rename = "im_Lambda")]
    im: f64,
    /// dΛ/d ln ε at the point.
    re_dLambda: f64,
    im_dLambda: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct Polyline {
    seed: usize,
    re_Lambda0: f64,
    im_Lambda0: f64,
    points: Vec<PortraitPoint>,
}

pub fn cmd_portrait(a: &PortraitArgs) -> Result<Table, CliError> {
    let sigma = sigma_from_alpha(a.alpha)?;
    let (lo, hi) = range("eps-range", &a.eps_range)?;
    let window = PortraitWindow {
        eps0: a.eps0,
        eps_min: lo,
        eps_max: hi,
        samples: sample_count(a.samples)?,
    };
    let trajs = if a.seeds.is_empty() {
        Vec::new()
    } else {
        portrait_sample(&sigma, &a.seeds, &window)?
    };
    let s = sigma.sigma();
    let mut t = Table::new(&["seed", "epsilon", "re_Lambda", "im_Lambda", "re_dLambda", "im_dLambda"]);
    let mut lines = Vec::with_capacity(trajs.len());
    for (i, traj) in trajs.iter().enumerate() {
        let mut points = Vec::with_capacity(traj.samples.len());
        for p in &traj.samples {
            let d = flow_rhs(p.big_lambda, s);
            t.push(vec![i as f64, p.epsilon, p.big_lambda.re, p.big_lambda.im, d.re, d.im]);
            points.push(PortraitPoint {
                epsilon: p.epsilon,
                re: p.big_lambda.re,
                im: p.big_lambda.im,
                re_dLambda: d.re,
                im_dLambda: d.im,
            });
        }
        lines.push(Polyline {
            seed: i,
            re_Lambda0: traj.lambda0.re,
            im_Lambda0: traj.lambda0.im,
            points,
        });
    }
    t.int_columns = vec![0];
    t.json = Some(serde_json::to_value(&lines).expect("serializable"));
    Ok(t)
}

pub fn cmd_scatter(a: &ScatterArgs) -> Result<Table, CliError> {
    let sigma = sigma_from_alpha(a.alpha)?;
    sigma.require_closed_form()?;
    let n = sample_count(a.samples)?;
    let rows: Vec<Result<ScatteringSolution, ScatteringError>> = if !a.x_star.is_empty() || !a.coupling.is_empty() {
        let k = a.k.ok_or_else(|| CliError::Validation("--x-star and --coupling need --k".into()))?;
        if a.k_range.is_some() || a.eps_star_range.is_some() || a.eps_star.is_some() {
            return Err(CliError::Validation("--x-star/--coupling cannot be combined with a sweep or --eps-star".into()));
        }
        let mut rows: Vec<_> = a.x_star.iter().map(|&x| ScatteringSolution::from_x_star(a.alpha, k, x, None)).collect();
        if !a.coupling.is_empty() {
            let eps = a.eps.ok_or_else(|| CliError::Validation("--coupling needs --eps".into()))?;
            rows.extend(a.coupling.iter().map(|&l| ScatteringSolution::from_coupling(a.alpha, k, l, eps)));
        }
        rows
    } else {
        match (a.k, a.eps_star, &a.k_range, &a.eps_star_range) {
            (Some(k), None, None, Some(r)) => {
                let (lo, hi) = range("eps-star-range", r)?;
                log_grid(lo, hi, n)?.into_iter().map(|e| ScatteringSolution::from_eps_star(a.alpha, k, e)).collect()
            }
            (None, Some(e), Some(r), None) => {
                let (lo, hi) = range("k-range", r)?;
                log_grid(lo, hi, n)?.into_iter().map(|k| ScatteringSolution::from_eps_star(a.alpha, k, e)).collect()
            }
            (Some(k), Some(e), None, None) => vec![ScatteringSolution::from_eps_star(a.alpha, k, e)],
            _ => {
                return Err(CliError::Validation(
                    "give --k with --eps-star-range, --eps-star with --k-range, or --k with --eps-star".into(),
                ))
            }
        }
    };
    let mut t = Table::new(&["alpha", "k", "eps_star", "re_R", "im_R", "re_T", "im_T", "flux_deficit"]);
    let mut ok = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok(s) => {
                t.push(vec![s.alpha, s.k, s.eps_star.unwrap_or(f64::NAN), s.r.re, s.r.im, s.t.re, s.t.im, s.flux_deficit]);
                ok.push(s);
            }
            Err(e) => eprintln!("row {i}: {e}"),
        }
    }
    t.json = Some(serde_json::to_value(&ok).expect("serializable"));
    Ok(t)
}

pub fn cmd_wavefunction(a: &WavefunctionArgs) -> Result<Table, CliError> {
    let n = sample_count(a.samples)?;
    let mut t = Table::new(&["Q", "re_chi", "im_chi"]);
    let mut records = Vec::new();
    let mut push = |t: &mut Table, q: f64, chi: Complex64| {
        t.push(vec![q, chi.re, chi.im]);
        records.push(serde_json::json!({"Q": q, "re_chi": chi.re, "im_chi": chi.im}));
    };
    if a.monomial {
        let zeta = a.zeta.ok_or_else(|| CliError::Validation("--monomial needs --zeta".into()))?;
        if !(zeta.is_finite() && zeta > 0.0) {
            return Err(CliError::Validation("--zeta must be positive".into()));
        }
        if a.alpha.is_some() || a.coupling.is_some() || a.eps_star.is_some() {
            return Err(CliError::Validation("--monomial takes only --zeta and --q-range".into()));
        }
        let (lo, hi) = match &a.q_range {
            Some(r) => range("q-range", r)?,
            None => (1e-3, 1.0),
        };
        let exponent = Complex64::new(0.5, zeta);
        for q in log_grid(lo, hi, n)? {
            push(&mut t, q, (exponent * q.ln()).exp());
        }
    } else {
        let alpha = a.alpha.ok_or_else(|| CliError::Validation("solved mode needs --alpha".into()))?;
        if a.zeta.is_some() {
            return Err(CliError::Validation("--zeta applies only with --monomial".into()));
        }
        let sigma: SigmaOrder = sigma_from_alpha(alpha)?;
        let eps = a.eps.ok_or_else(|| CliError::Validation("solved mode needs --eps".into()))?;
        let big_lambda = match (a.coupling, a.eps_star) {
            (Some(l), None) => l,
            (None, Some(star)) => trajectory_through(star, &sigma, eps)?,
            _ => return Err(CliError::Validation("give exactly one of --coupling and --eps-star".into())),
        };
        let problem = RegulatedProblem::from_reduced(alpha, a.k, eps, big_lambda)?;
        let (lo, hi) = match &a.q_range {
            Some(r) => range("q-range", r)?,
            None => (eps, problem.q_max),
        };
        if lo < eps || hi > problem.q_max {
            return Err(CliError::Validation(format!(
                "--q-range must lie within [{eps}, {}] to stay outside the excised region",
                problem.q_max
            )));
        }
        let pos = log_grid(lo, hi, n)?;
        let grid: Vec<f64> = pos.iter().rev().map(|q| -q).chain(pos.iter().copied()).collect();
        let sol = solve_scattering(&problem)?;
        for (q, chi) in grid.iter().zip(wavefunction_sample(&sol, &grid)?) {
            push(&mut t, *q, chi);
        }
    }
    t.json = Some(serde_json::Value::Array(records));
    Ok(t)
}

fn verify_table(r: &verify::VerifyReport) -> Table {
    let mut t = Table::new(&[
        "alpha",
        "k_eps",
        "k_eps_star",
        "rel_err_R",
        "rel_err_T",
        "flux_residual",
        "regulator_shift",
        "pass",
    ]);
    for c in &r.cases {
        let nan = f64::NAN;
        t.push(vec![
            c.case.alpha,
            c.case.k_eps,
            c.case.k_eps_star,
            c.rel_err_r.unwrap_or(nan),
            c.rel_err_t.unwrap_or(nan),
            c.flux_residual.unwrap_or(nan),
            c.regulator_shift.unwrap_or(nan),
            if c.passed() { 1.0 } else { 0.0 },
        ]);
    }
    t.int_columns = vec![7];
    t.json = Some(serde_json::to_value(r).expect("serializable"));
    t
}
