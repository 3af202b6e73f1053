//! `divest` command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage errors (including invalid flag
//! values), 1 on runtime failures.

pub mod histogram;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use divest_core::approx::{cheb_inverse_poly, log_coeffs, sqrt_coeffs, xlogx_coeffs, Interval};
use divest_core::divergence::{
    chi2_plugin, estimate_chi2, estimate_hellinger, estimate_kl_adaptive, estimate_kl_plugin,
    hellinger_plugin, EstimatorConfig, Histogram,
};
use divest_core::harness::{run_risk_experiment, run_selftest, ExperimentSpec};
use divest_core::sampling::{keyed_rng, split3, split3_with};

use histogram::{align, read_histogram};

#[derive(Debug, Parser)]
#[command(
    name = "divest",
    version,
    about = "Divergence estimation on large alphabets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a divergence between two histogram files.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo risk experiment and write its CSV report.
    Simulate(SimulateArgs),
    /// Polynomial approximation utilities.
    #[command(subcommand)]
    Approx(ApproxCommand),
    /// Run the built-in numerical self checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DivergenceArg {
    Kl,
    Hellinger,
    Chi2,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    divergence: DivergenceArg,
    /// Histogram of samples from P (`symbol count` lines).
    #[arg(long, value_name = "FILE")]
    p: PathBuf,
    /// Histogram of samples from Q.
    #[arg(long, value_name = "FILE")]
    q: PathBuf,
    /// Use the plug-in estimator on the raw histograms.
    #[arg(long)]
    plugin: bool,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    /// Seed for the three-way thinning of each histogram.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Overrides `threads` from the spec file.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum ApproxCommand {
    /// Print monomial coefficients and the certified uniform error as CSV.
    Dump(DumpArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Xlogx,
    Sqrt,
    Log,
    Invx,
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long)]
    degree: usize,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<divest_core::Error> for CliError {
    fn from(e: divest_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `args` (without the program name) against the process
/// stdout and stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("divest")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let line = rendered.lines().next().unwrap_or("usage error");
                let _ = writeln!(err, "{line}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Estimate(args) => estimate(args, out),
        Command::Simulate(args) => simulate(args),
        Command::Approx(ApproxCommand::Dump(args)) => dump(args, out),
        Command::Selftest => selftest(out),
    }
}

fn estimator_config(c1: Option<f64>, c2: Option<f64>) -> CliResult<EstimatorConfig> {
    let mut cfg = EstimatorConfig::default();
    if let Some(c1) = c1 {
        cfg.c1 = c1;
    }
    if let Some(c2) = c2 {
        cfg.c2 = c2;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(anyhow!(e).context("writing output"))
}

fn estimate(args: EstimateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = estimator_config(args.c1, args.c2)?;
    let p = read_histogram(&args.p)?;
    let q = read_histogram(&args.q)?;
    let (symbols, pc, qc) = align(&p, &q);
    if symbols.is_empty() {
        return Err(anyhow!("both histograms are empty").into());
    }
    let rate = |c: &[u64]| (c.iter().sum::<u64>() as f64).max(1.0);
    let hp = Histogram::new(pc.clone(), rate(&pc))?;
    let hq = Histogram::new(qc.clone(), rate(&qc))?;

    let value = if args.plugin {
        match args.divergence {
            DivergenceArg::Kl => estimate_kl_plugin(&hp, &hq)?,
            DivergenceArg::Hellinger => hellinger_plugin(&hp, &hq)?,
            DivergenceArg::Chi2 => chi2_plugin(&hp, &hq)?,
        }
    } else {
        let sp = split3(&hp, args.seed)?;
        let sq = split3_with(&hq, &mut keyed_rng(args.seed, [u64::MAX, 1, 0]))?;
        let est = match args.divergence {
            DivergenceArg::Kl => estimate_kl_adaptive(&sp, &sq, &cfg)?,
            DivergenceArg::Hellinger => estimate_hellinger(&sp, &sq, &cfg)?,
            DivergenceArg::Chi2 => estimate_chi2(&sp, &sq, &cfg)?,
        };
        log::info!(
            "{} symbols: {} smooth, {} non-smooth",
            symbols.len(),
            est.regime_counts.smooth,
            est.regime_counts.nonsmooth
        );
        est.value
    };
    writeln!(out, "{value}").map_err(io_err)?;
    Ok(0)
}

fn simulate(args: SimulateArgs) -> CliResult<i32> {
    let mut spec = ExperimentSpec::from_file(&args.spec)?;
    if let Some(threads) = args.threads {
        spec.threads = Some(threads);
    }
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_risk_experiment(&spec)?;
    report.write_csv(&args.out)?;
    log::info!("wrote {} rows to {}", report.rows.len(), args.out.display());
    Ok(0)
}

fn dump(args: DumpArgs, out: &mut dyn Write) -> CliResult<i32> {
    let fixed_unit = |name: &str| -> CliResult<()> {
        if args.lo.unwrap_or(0.0) != 0.0 || args.hi.unwrap_or(1.0) != 1.0 {
            return Err(CliError::Usage(format!(
                "{name} is approximated on [0, 1] only"
            )));
        }
        Ok(())
    };
    let (coeffs, error) = match args.target {
        TargetArg::Xlogx => {
            fixed_unit("xlogx")?;
            let r = xlogx_coeffs(args.degree)?;
            (r.poly.monomial_coeffs(), r.levelled_error)
        }
        TargetArg::Sqrt => {
            fixed_unit("sqrt")?;
            let r = sqrt_coeffs(args.degree)?;
            (r.poly.monomial_coeffs(), r.levelled_error)
        }
        TargetArg::Log => {
            let lo = args
                .lo
                .ok_or_else(|| CliError::Usage("log needs --lo > 0".into()))?;
            let domain = Interval::new(lo, args.hi.unwrap_or(1.0))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let r = log_coeffs(args.degree, domain).map_err(|e| match e {
                divest_core::Error::InvalidDomain { .. } => CliError::Usage(e.to_string()),
                other => other.into(),
            })?;
            (r.poly.monomial_coeffs(), r.levelled_error)
        }
        TargetArg::Invx => {
            if args.lo.unwrap_or(0.0) != 0.0 {
                return Err(CliError::Usage(
                    "invx is built on [0, hi]; --lo must be 0".into(),
                ));
            }
            let delta = args.hi.unwrap_or(1.0);
            let poly = cheb_inverse_poly(args.degree, delta)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let n = (args.degree + 2) as f64;
            (poly.monomial_coeffs(), delta / (n * n))
        }
    };
    let mut text = String::new();
    for (k, c) in coeffs.iter().enumerate() {
        text.push_str(&format!("{k},{c}\n"));
    }
    text.push_str(&format!("error,{error}\n"));
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(0)
}

fn selftest(out: &mut dyn Write) -> CliResult<i32> {
    let outcomes = run_selftest();
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", o.name, o.detail)
            .context("writing output")
            .map_err(CliError::Runtime)?;
        failed += usize::from(!o.passed);
    }
    if failed > 0 {
        return Err(anyhow!("{failed} of {} self checks failed", outcomes.len()).into());
    }
    Ok(0)
}
