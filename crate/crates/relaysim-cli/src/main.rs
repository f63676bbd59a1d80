//! Command-line front end: BER sweeps, analytic curves, error-floor grids,
//! power-allocation tables and channel validation.
//!
//! Exit codes: 0 on success, 1 on runtime failures (including a channel
//! validation report with a FAIL line), 2 on usage errors and 3 when a
//! configuration document is malformed or inconsistent.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use relaysim::harness::{
    analytic_curve, emit_results, floor_grid, power_opt_table, render_csv, render_json, run_ber_sweep,
    validate_channel, BerCurve, ChannelValidationConfig, FloorGridConfig, OutputFormat, PowerOptConfig, SimConfig,
};
use relaysim::Error;

#[derive(Parser)]
#[command(name = "relaysim", version, about = "Differential amplify-and-forward relay network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo BER sweep and write the curve.
    Simulate {
        config: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format (defaults to the extension of --out, else CSV).
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Evaluate the closed-form curve of a configuration without simulating.
    Analyze {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Tabulate error floors against the normalized Doppler frequency.
    Floors {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate optimum power splits.
    PowerOpt {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test the fading generator's autocorrelation and envelope distribution.
    ValidateChannel {
        config: PathBuf,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relaysim: {e}");
            match e {
                Error::Schema(_) | Error::Config(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read_text(path: &Path) -> relaysim::Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_doc<T: serde::de::DeserializeOwned>(path: &Path) -> relaysim::Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn write_text(out: Option<&Path>, text: &str) -> relaysim::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_curve(curve: &BerCurve, out: Option<&Path>, format: Option<Format>) -> relaysim::Result<()> {
    let format = match (format, out) {
        (Some(Format::Csv), _) => OutputFormat::Csv,
        (Some(Format::Json), _) => OutputFormat::Json,
        (None, Some(path)) => OutputFormat::from_path(path),
        (None, None) => OutputFormat::Csv,
    };
    match out {
        Some(path) => emit_results(curve, path, format),
        None => {
            let text = match format {
                OutputFormat::Csv => render_csv(curve)?,
                OutputFormat::Json => render_json(curve)? + "\n",
            };
            write_text(None, &text)
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(command: Command) -> relaysim::Result<()> {
    match command {
        Command::Simulate { config, out, format } => {
            let config = SimConfig::from_json(&read_text(&config)?)?;
            let curve = run_ber_sweep(&config)?;
            write_curve(&curve, out.as_deref(), format)
        }
        Command::Analyze { config, out, format } => {
            let config = SimConfig::from_json(&read_text(&config)?)?;
            let curve = analytic_curve(&config)?;
            write_curve(&curve, out.as_deref(), format)
        }
        Command::Floors { config, out } => {
            let config: FloorGridConfig = parse_doc(&config)?;
            let rows = floor_grid(&config)?;
            let mut text = String::from("doppler,alpha,floor\n");
            for r in rows {
                writeln!(text, "{},{},{}", r.doppler, r.alpha, r.floor).expect("string write");
            }
            write_text(out.as_deref(), &text)
        }
        Command::PowerOpt { config, out } => {
            let config: PowerOptConfig = parse_doc(&config)?;
            let rows = power_opt_table(&config)?;
            let mut text = String::from("total_power_db,variances,alloc_factor,ber,initializer\n");
            for r in rows {
                let variances: Vec<String> = r.variances.iter().map(|v| v.to_string()).collect();
                writeln!(
                    text,
                    "{},{},{},{},{}",
                    r.total_power_db,
                    variances.join(";"),
                    r.alloc_factor,
                    r.ber,
                    opt(r.initializer)
                )
                .expect("string write");
            }
            write_text(out.as_deref(), &text)
        }
        Command::ValidateChannel { config, out } => {
            let config: ChannelValidationConfig = parse_doc(&config)?;
            let report = validate_channel(&config)?;
            print!("{}", report.render());
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Numerical(format!("JSON serialization failed: {e}")))?;
                write_text(Some(&path), &(json + "\n"))?;
            }
            if report.pass() {
                Ok(())
            } else {
                Err(Error::Model("the generated channel failed at least one statistical test".into()))
            }
        }
    }
}
