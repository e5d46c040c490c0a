//! `advlim`: command-line front end.
//!
//! Exit codes: 0 on success (and agreement for the verify commands), 1 when a
//! verification disagrees, 2 on malformed input, invalid problems or solver
//! failures. Reports are written before a disagreement exit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use advlim::classify::{critical_structure, local_maxima};
use advlim::eig2d::{verify_2d, DEFAULT_SCHEDULE_2D};
use advlim::io::{is_2d_problem, parse_problem, read_spec2d};
use advlim::predict::predict_limit;
use advlim::sweep::{points_to_csv, run_sweep_solved, verify_with, VerifyOptions, DEFAULT_DELTA, DEFAULT_SCHEDULE};
use advlim::{validate, ProblemSpec1D};

#[derive(Parser)]
#[command(name = "advlim", version, about = "Principal eigenvalues of advection-dominated Robin problems and their large-advection limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a 1D problem against the model hypotheses.
    Validate(Common),
    /// Report the monotone runs of m and its local-maximum taxonomy.
    Classify(Common),
    /// Predict lim λ₁(α) as α → ∞.
    Predict(Common),
    /// Solve at a single α (`--format csv` prints the eigenfunction).
    Solve(Common),
    /// Solve along an α schedule.
    Sweep(Common),
    /// Compare a sweep against the predicted limit.
    Verify(Common),
    /// Verify a torus or rectangle problem.
    Verify2d(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated, strictly increasing.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv when `--out` ends in `.csv`, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Node count override (per direction in 2D).
    #[arg(long)]
    mesh: Option<usize>,
    /// Half-width of the concentration window.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn format(&self) -> Format {
        self.format.unwrap_or(match &self.out {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
            _ => Format::Json,
        })
    }
}

enum Outcome {
    Ok,
    Disagree,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Disagree) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_schedule(text: &str) -> anyhow::Result<Vec<f64>> {
    let alphas = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("--alphas: `{}` is not a number", s.trim())))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    if alphas.is_empty() || alphas.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        bail!("--alphas: values must be finite and nonnegative");
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        bail!("--alphas: schedule must be strictly increasing");
    }
    Ok(alphas)
}

fn schedule(c: &Common, default: &[f64]) -> anyhow::Result<Vec<f64>> {
    match &c.alphas {
        Some(text) => parse_schedule(text),
        None => Ok(default.to_vec()),
    }
}

fn load_1d(path: &Path) -> anyhow::Result<ProblemSpec1D> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if is_2d_problem(&text) {
        bail!("{} is a 2D problem; use verify2d", path.display());
    }
    parse_problem(&text).with_context(|| format!("{}", path.display()))
}

fn load_valid_1d(path: &Path) -> anyhow::Result<ProblemSpec1D> {
    let spec = load_1d(path)?;
    let report = validate(&spec);
    if !report.is_valid() {
        bail!("{} is not a valid problem:\n{report}", path.display());
    }
    Ok(spec)
}

fn emit(c: &Common, body: &str) -> anyhow::Result<()> {
    match &c.out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_json(c: &Common, value: &impl serde::Serialize) -> anyhow::Result<()> {
    if c.format == Some(Format::Csv) {
        bail!("--format csv is only available for solve, sweep and verify");
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(c, &s)
}

fn run(cmd: Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Validate(c) => {
            let spec = load_1d(&c.problem)?;
            let report = validate(&spec);
            emit_json(&c, &json!({ "valid": report.is_valid(), "violations": report.messages() }))?;
            if !report.is_valid() {
                bail!("validation failed");
            }
        }
        Command::Classify(c) => {
            let spec = load_valid_1d(&c.problem)?;
            let runs = critical_structure(&spec.m)?;
            let maxima = local_maxima(&spec.m)?;
            emit_json(&c, &json!({ "runs": runs, "maxima": maxima }))?;
        }
        Command::Predict(c) => {
            let spec = load_valid_1d(&c.problem)?;
            emit_json(&c, &predict_limit(&spec)?)?;
        }
        Command::Solve(c) => {
            let spec = load_valid_1d(&c.problem)?;
            let alpha = c.alpha.ok_or_else(|| anyhow!("solve needs --alpha"))?;
            let mut solved = run_sweep_solved(&spec, &[alpha], c.mesh)?;
            let s = solved.remove(0);
            let Some(result) = s.result else {
                bail!("solve failed: {}", s.point.error.unwrap_or_default());
            };
            match c.format() {
                Format::Json => emit_json(&c, &s.point)?,
                Format::Csv => {
                    let mut out = String::from("x,w\n");
                    for (i, w) in result.w.iter().enumerate() {
                        out.push_str(&format!("{:.16e},{:.16e}\n", result.grid.x(i), w));
                    }
                    emit(&c, &out)?;
                }
            }
        }
        Command::Sweep(c) => {
            let spec = load_valid_1d(&c.problem)?;
            let alphas = schedule(&c, &DEFAULT_SCHEDULE)?;
            let points: Vec<_> = run_sweep_solved(&spec, &alphas, c.mesh)?.into_iter().map(|s| s.point).collect();
            match c.format() {
                Format::Json => emit_json(&c, &points)?,
                Format::Csv => emit(&c, &points_to_csv(&points))?,
            }
        }
        Command::Verify(c) => {
            let spec = load_valid_1d(&c.problem)?;
            let alphas = schedule(&c, &DEFAULT_SCHEDULE)?;
            if alphas.len() < 4 {
                bail!("--alphas: verify needs at least four α values");
            }
            let report = verify_with(&spec, &alphas, VerifyOptions { mesh: c.mesh, delta: c.delta })?;
            match c.format() {
                Format::Json => emit_json(&c, &report)?,
                Format::Csv => emit(&c, &points_to_csv(&report.points))?,
            }
            if !report.agree {
                return Ok(Outcome::Disagree);
            }
        }
        Command::Verify2d(c) => {
            let spec = read_spec2d(&c.problem).with_context(|| format!("{}", c.problem.display()))?;
            let alphas = schedule(&c, &DEFAULT_SCHEDULE_2D)?;
            if alphas.len() < 4 {
                bail!("--alphas: verify2d needs at least four α values");
            }
            let n = c.mesh.unwrap_or(if spec.domain.is_torus() { 256 } else { 257 });
            let report = verify_2d(&spec, &alphas, n, n)?;
            emit_json(&c, &report)?;
            if !report.agree {
                return Ok(Outcome::Disagree);
            }
        }
    }
    Ok(Outcome::Ok)
}
