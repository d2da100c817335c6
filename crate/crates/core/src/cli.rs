//! Command-line front end: `solve`, `denominator`, `eigs`, `verify`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{read_samples, RunConfig};
use crate::denominator::{classify_phase, denominator_report, Verdict};
use crate::eigen::eigenpairs_for;
use crate::error::{Error, Result};
use crate::problem::{AOverPi, BoundaryFn, ProblemSpec};
use crate::series::{solve_problem, SolutionField};
use crate::verify::{oracle_compare, pde_residual, ResidualReport};

#[derive(Debug, Parser)]
#[command(name = "mtbvp", version, about = "Spectral solver for a mixed-type even-order boundary value problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve from a TOML config and write solution.csv, metadata.json,
    /// denominator.json and residual.json.
    Solve(SolveArgs),
    /// Phase classification, separation verdict or Diophantine scan.
    Denominator(DenominatorArgs),
    /// Eigenvalues of (-1)^s D^(2s) + p0 with Dirichlet-type ends.
    Eigs(EigsArgs),
    /// Solve and check residuals; exit 0 only when every threshold is met.
    Verify(SolveArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    config: PathBuf,
    /// Overrides `run.output`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Overrides `run.k`.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct DenominatorArgs {
    #[arg(long = "2n")]
    two_n: usize,
    #[arg(long, default_value_t = 1)]
    gamma: u32,
    #[arg(long, default_value_t = 0)]
    q: usize,
    /// Rational a/pi, e.g. `1/3`.
    #[arg(long, conflicts_with = "tau", required_unless_present = "tau")]
    a_ratio: Option<String>,
    /// Irrational a/pi, e.g. `sqrt2`, `golden`, `e`.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Defaults to b/2.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    kmax: usize,
    /// Write the JSON report here instead of stdout only.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EigsArgs {
    #[arg(long)]
    s: usize,
    /// Expression in x or `csv:<path>`.
    #[arg(long, default_value = "0")]
    p0: String,
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Exponent of the comparison lambda^(1/(2n)) ~ k^b; must divide s.
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Directory for eigs.csv and asymptote.json.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Denominator(a) => cmd_denominator(&a, out),
        Command::Eigs(a) => cmd_eigs(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            e.exit_code()
        }
    }
}

/// Machine-readable error record.
pub fn error_json(e: &Error) -> String {
    let mut v = json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    if let Error::Validation(report) = e {
        v["violations"] = serde_json::to_value(&report.violations).unwrap_or_default();
    }
    v.to_string()
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn load(args: &SolveArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    if let Some(k) = args.k {
        cfg.solve.k_max = k;
    }
    cfg.spec.ensure_valid()?;
    Ok(cfg)
}

fn residual_report(cfg: &RunConfig, field: &SolutionField) -> ResidualReport {
    pde_residual(field, cfg.residual_grid.0, cfg.residual_grid.1, cfg.thresholds)
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let field = solve_problem(&cfg.spec, &cfg.solve)?;
    let report = residual_report(&cfg, &field);
    std::fs::create_dir_all(&cfg.output)?;
    write_file(&cfg.output, "solution.csv", &field.grid_csv(cfg.grid.0, cfg.grid.1))?;
    let meta = serde_json::to_string_pretty(&field.metadata()).expect("metadata serializes");
    write_file(&cfg.output, "metadata.json", &meta)?;
    write_file(&cfg.output, "denominator.json", &field.denominator.to_json())?;
    write_file(&cfg.output, "residual.json", &report.to_json())?;
    summarize(&field, &report, out)?;
    writeln!(out, "wrote {}", cfg.output.display())?;
    Ok(0)
}

fn summarize(field: &SolutionField, report: &ResidualReport, out: &mut dyn Write) -> Result<()> {
    let d = &field.denominator;
    if d.verdict != Verdict::Separated {
        writeln!(out, "WARNING: denominators {}", d.verdict)?;
    }
    writeln!(out, "phase {} ({}), verdict {}", d.phase, d.table_row, d.verdict)?;
    if let Some(d1) = d.delta1 {
        writeln!(out, "delta1 {d1:.6}")?;
    }
    writeln!(out, "modes used {} of {}, tail bound {:.3e}", field.modes.len(), field.options.k_max, field.tail_bound)?;
    if !field.nonunique_modes.is_empty() {
        writeln!(out, "nonunique: singular modes {:?} skipped (data orthogonal)", field.nonunique_modes)?;
    }
    if let Some(r) = &field.smoothness.remark {
        writeln!(out, "{r}")?;
    }
    writeln!(
        out,
        "residuals: pde {:.3e}, fd {:.3e}, boundary {:.3e}, matching {:.3e} ({})",
        report.pde_residual(),
        report.fd_residual(),
        report.boundary_error(),
        report.matching_error(),
        if report.pass { "pass" } else { "fail" }
    )?;
    Ok(())
}

fn cmd_verify(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load(args)?;
    let field = solve_problem(&cfg.spec, &cfg.solve)?;
    let report = residual_report(&cfg, &field);
    let mut value = serde_json::to_value(&report).expect("report serializes");
    if let Ok(o) = oracle_compare(&field, cfg.residual_grid.0, cfg.residual_grid.1) {
        value["oracle"] = serde_json::to_value(&o).expect("oracle serializes");
    }
    let text = serde_json::to_string_pretty(&value).expect("json");
    if args.output.is_some() {
        std::fs::create_dir_all(&cfg.output)?;
        write_file(&cfg.output, "residual.json", &text)?;
    }
    writeln!(out, "{text}")?;
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_denominator(args: &DenominatorArgs, out: &mut dyn Write) -> Result<i32> {
    let phase = classify_phase(args.two_n, args.gamma, args.q)?;
    let a_over_pi = match (&args.a_ratio, &args.tau) {
        (Some(r), _) => AOverPi::parse(r)?,
        (None, Some(t)) => AOverPi::parse(&format!("irrational:{t}"))?,
        (None, None) => return Err(Error::Config("one of --a-ratio or --tau is required".into())),
    };
    if args.b == 0 {
        return Err(Error::Config("b must be positive".into()));
    }
    let n = args.two_n / 2;
    let spec = ProblemSpec::new(n * args.b, n, a_over_pi).with_orders(args.gamma, args.q, args.gamma, 0);
    let epsilon = args.epsilon.unwrap_or(args.b as f64 / 2.0);
    let report = denominator_report(&spec, None, epsilon, args.kmax)?;
    writeln!(out, "phase {} ({})", phase.phase, phase.table_row)?;
    writeln!(out, "verdict {}", report.verdict)?;
    if let Some(d1) = report.delta1 {
        writeln!(out, "delta1 {d1:.12}")?;
    }
    if let (Some(w), Some(raw)) = (report.scan_min_w, report.scan_min_raw) {
        writeln!(out, "scan floor w {w:.6e}, raw {raw:.6e} (k <= {})", args.kmax)?;
    }
    if !report.note.is_empty() {
        writeln!(out, "note: {}", report.note)?;
    }
    let text = report.to_json();
    match &args.output {
        Some(path) => std::fs::write(path, &text)?,
        None => writeln!(out, "{text}")?,
    }
    Ok(0)
}

fn cmd_eigs(args: &EigsArgs, out: &mut dyn Write) -> Result<i32> {
    if args.s == 0 || args.k == 0 {
        return Err(Error::Config("s and k must be positive".into()));
    }
    if args.b == 0 || !args.s.is_multiple_of(args.b) {
        return Err(Error::Config(format!("b = {} must divide s = {}", args.b, args.s)));
    }
    let p0 = match args.p0.trim().strip_prefix("csv:") {
        Some(p) => BoundaryFn::samples(read_samples(Path::new(p.trim()))?),
        None => BoundaryFn::parse(&args.p0)?,
    };
    let spec = ProblemSpec::new(args.s, 1, AOverPi::parse("1")?).with_p0(p0.clone());
    let report = spec.validate();
    if report.has("p0_nonnegative") {
        return Err(Error::Validation(report));
    }
    let basis = eigenpairs_for(args.s, &p0, args.k)?;
    let csv = basis.to_csv(0);
    let asym = serde_json::to_string_pretty(&basis.asymptote_check(args.b)).expect("json");
    match &args.output {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_file(dir, "eigs.csv", &csv)?;
            write_file(dir, "asymptote.json", &asym)?;
            writeln!(out, "wrote {}", dir.display())?;
        }
        None => {
            write!(out, "{csv}")?;
            writeln!(out, "{asym}")?;
        }
    }
    Ok(0)
}
