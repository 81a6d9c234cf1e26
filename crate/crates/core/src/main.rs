use clap::{ArgGroup, Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use indentomo::inverse::{FitOptions, FitResult, Known};
use indentomo::io_cli::commands::{self, exit_code, parse_cli_quantity};
use indentomo::io_cli::mapfile::{read_json, write_json};
use indentomo::io_cli::units::Dimension;
use indentomo::io_cli::{load_map, save_map, RunConfig};
use indentomo::{Error, Result};

/// Stiffness tomography of a buried spherical inclusion from AFM grid
/// indentation: synthetic maps, anomaly fits and inclusion extraction.
#[derive(Parser)]
#[command(name = "indentomo", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthetic stiffness map from a run configuration.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the five-parameter anomaly model to a map.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Extra starts at local extrema of the map.
        #[arg(long, default_value_t = 0)]
        multistart: usize,
        #[arg(long = "max-iter", default_value_t = FitOptions::default().max_iter)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Modulus ratio or volume of the inclusion from a fit (JSON on stdout).
    Extract(ExtractArgs),
    /// Exact and first-order loading curve at one point.
    Curve {
        #[arg(long)]
        config: PathBuf,
        /// Largest depth [m], or tagged, e.g. "500 nm".
        #[arg(long = "w-max")]
        w_max: String,
        #[arg(long)]
        steps: usize,
        /// Surface point x1 [m]; defaults to the epicenter.
        #[arg(long, requires = "x2", allow_hyphen_values = true)]
        x1: Option<String>,
        #[arg(long, requires = "x1", allow_hyphen_values = true)]
        x2: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form building blocks (JSON on stdout).
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("known").required(true).args(["known_volume", "known_alpha"])))]
struct ExtractArgs {
    #[arg(long)]
    fit: PathBuf,
    #[arg(long)]
    config: PathBuf,
    /// Inclusion volume [m³], or tagged, e.g. "4.2 um3".
    #[arg(long = "known-volume")]
    known_volume: Option<String>,
    /// Modulus ratio E₀/E.
    #[arg(long = "known-alpha")]
    known_alpha: Option<f64>,
    /// Use the alternative C₀/(E S₀² d⁴) normalization instead of the configured one.
    #[arg(long = "paper-normalization")]
    paper_normalization: bool,
}

#[derive(Subcommand)]
enum Oracle {
    /// Dimensionless strain at the inclusion site.
    Strain {
        #[arg(long, allow_negative_numbers = true)]
        xi: f64,
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
    },
    /// Bulk and shear polarization coefficients of a sphere.
    Ksgs {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(long, allow_negative_numbers = true)]
        nu0: f64,
    },
}

/// JSON to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("serializable output");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Error::Io { path: "<stdout>".into(), message: e.to_string() })
        }
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let map = commands::generate(&cfg)?;
            for w in map.meta.iter().flat_map(|m| &m.warnings) {
                eprintln!("warning: {w}");
            }
            save_map(&map, &out)
        }
        Cmd::Fit { input, multistart, max_iter, out } => {
            let map = load_map(&input)?;
            if map.meta.is_none() {
                eprintln!("warning: metadata absent for {}; extraction will be refused", input.display());
            }
            let fit = commands::fit(&map, &FitOptions { max_iter, restarts: multistart })?;
            if fit.no_anomaly {
                eprintln!("warning: no anomaly detected above the noise floor");
            }
            write_json(&out, &fit)?;
            if fit.converged {
                Ok(())
            } else {
                eprintln!("fit did not converge after {} iterations", fit.iterations);
                Err(Error::NotConverged)
            }
        }
        Cmd::Extract(a) => {
            let fit: FitResult = read_json(&a.fit)?;
            let cfg = RunConfig::from_path(&a.config)?;
            let known = match (a.known_volume, a.known_alpha) {
                (Some(v), None) => Known::Volume(parse_cli_quantity(&v, Dimension::Volume)?),
                (None, Some(x)) => Known::Alpha(x),
                _ => unreachable!("clap enforces exactly one known value"),
            };
            print_json(&commands::extract(&fit, &cfg, known, a.paper_normalization)?)
        }
        Cmd::Curve { config, w_max, steps, x1, x2, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let w_max = parse_cli_quantity(&w_max, Dimension::Length)?;
            let at = match (x1, x2) {
                (Some(a), Some(b)) => Some([parse_cli_quantity(&a, Dimension::Length)?, parse_cli_quantity(&b, Dimension::Length)?]),
                _ => None,
            };
            write_text(&out, &commands::curve(&cfg, w_max, steps, at)?)
        }
        Cmd::Oracle { which } => {
            let v = match which {
                Oracle::Strain { xi, nu } => commands::oracle_strain(xi, nu)?,
                Oracle::Ksgs { alpha, nu, nu0 } => commands::oracle_ksgs(alpha, nu, nu0)?,
            };
            print_json(&v)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
