//! `adelic`: command-line access to the p-adic and adelic toolkit.
//!
//! Exit status is 0 on success, 1 when the library reports a domain error and
//! 2 for usage errors (bad flags, unreadable or malformed input).

mod commands;
mod render;
mod wire;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use render::Format;

#[derive(Debug, Parser)]
#[command(name = "adelic", version, about = "Exact p-adic and adelic analysis")]
pub struct Cli {
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// key=value file supplying precision, tolerance, seed, jobs or output
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the parallel sums [default: 1]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for randomized suites [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// p-adic digits kept by series and expansions [default: 16]
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// p-adic numbers, series and integrals
    #[command(subcommand)]
    Padic(commands::PadicCmd),
    /// Additive and multiplicative characters
    #[command(subcommand)]
    Char(commands::CharCmd),
    /// Haar integrals, Gauss integrals and Fourier transforms
    #[command(subcommand)]
    Integrate(commands::IntegrateCmd),
    /// Adeles, ideles and elementary functions
    #[command(subcommand)]
    Adele(commands::AdeleCmd),
    /// Propagators, kernels and Weyl operators
    #[command(subcommand)]
    Propagate(commands::PropagateCmd),
    /// Veneziano amplitudes at every place
    #[command(subcommand)]
    Amplitude(commands::AmplitudeCmd),
    /// The p-adic Moyal product
    #[command(subcommand)]
    Moyal(commands::MoyalCmd),
    /// Run the invariant suites
    Verify(commands::VerifyArgs),
}

/// Settings after merging flags, the config file and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub output: Format,
    pub jobs: usize,
    pub seed: u64,
    pub precision: u32,
    pub tolerance: Option<f64>,
}

pub enum CliError {
    Usage(String),
    Domain(adelic::Error),
}

impl From<adelic::Error> for CliError {
    fn from(e: adelic::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Debug, Default)]
struct ConfigFile {
    output: Option<Format>,
    jobs: Option<usize>,
    seed: Option<u64>,
    precision: Option<u32>,
    tolerance: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("{}:{line}: bad value {value:?} for {key}", path.display())))
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "precision" => cfg.precision = Some(parse_value(path, i + 1, key, value)?),
            "tolerance" => cfg.tolerance = Some(parse_value(path, i + 1, key, value)?),
            "seed" => cfg.seed = Some(parse_value(path, i + 1, key, value)?),
            "jobs" => cfg.jobs = Some(parse_value(path, i + 1, key, value)?),
            "output" => {
                cfg.output = Some(
                    <Format as clap::ValueEnum>::from_str(value, true)
                        .map_err(|_| CliError::Usage(format!("{}:{}: output must be json, csv or pretty", path.display(), i + 1)))?,
                )
            }
            other => {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key {other:?}; expected precision, tolerance, seed, jobs or output",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(cfg)
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => ConfigFile::default(),
    };
    let settings = Settings {
        output: cli.output.or(file.output).unwrap_or(Format::Json),
        jobs: cli.jobs.or(file.jobs).unwrap_or(1),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        precision: cli.precision.or(file.precision).unwrap_or(adelic::padic::DEFAULT_PRECISION),
        tolerance: file.tolerance,
    };
    if settings.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if let Some(t) = settings.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage("tolerance must be a positive number".into()));
        }
    }
    Ok(settings)
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let settings = settings(&cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", settings.jobs)))?;
    let (output, ok) = commands::dispatch(cli.verb, &settings)?;
    Ok((render::render(&output, settings.output), ok))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
