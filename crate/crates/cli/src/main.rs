//! `metrology`: QFI reports, grid sweeps, figure data and the verification suite.

mod config;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metrology_core::sweep::{figure_tables, sweep_table, Figure, RunConfig, Table};
use metrology_core::verify::{run_verification_with, VerifyHooks};
use metrology_core::MetrologyError;

use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(#[from] MetrologyError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    fn config(e: MetrologyError) -> Self {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            // an unwritable --out is a configuration problem
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Domain(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "metrology",
    version,
    about = "Modular-value metrology with spin-j pointers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// All angles are in radians.
#[derive(Debug, Args)]
struct Flags {
    /// `key = value` file; flags given on the command line take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Pointer spin j (positive half-integer)
    #[arg(long, global = true, value_name = "R")]
    j: Option<f64>,
    /// Pointer polar angle
    #[arg(long, global = true, value_name = "R")]
    theta: Option<f64>,
    /// Postselection phase
    #[arg(long, global = true, value_name = "R")]
    phi: Option<f64>,
    /// Pointer azimuth
    #[arg(long, global = true, value_name = "R")]
    azimuth: Option<f64>,
    #[arg(long, global = true, value_name = "R", allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Exposure time
    #[arg(long, global = true, value_name = "R")]
    t: Option<f64>,
    /// Coupling strength
    #[arg(long, global = true, value_name = "R", allow_negative_numbers = true)]
    g: Option<f64>,
    /// Phase-flip probability (j = 1/2 only)
    #[arg(long, global = true, value_name = "R")]
    nu: Option<f64>,
    /// Sweep grid as theta_points x phi_points
    #[arg(long, global = true, value_name = "NxM", value_parser = grid_arg)]
    grid: Option<(usize, usize)>,
    /// Half-width of the box cut out around singular (theta, phi) points
    #[arg(long, global = true, value_name = "R")]
    margin: Option<f64>,
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
}

fn grid_arg(s: &str) -> Result<(usize, usize), String> {
    config::parse_grid(s)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report Q_m, p(omega) and the modular value at one parameter point
    Qfi,
    /// Dump the full (theta, phi) grid to CSV
    Sweep,
    /// Write figure data to CSV
    Fig {
        #[arg(value_enum)]
        which: FigArg,
    },
    /// Run the invariant suite; exits 4 if any check fails
    Verify {
        #[arg(long, hide = true, value_name = "SCALE")]
        tamper_analytic: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FigArg {
    Fig1,
    Fig2,
    Fig3,
}

impl From<FigArg> for Figure {
    fn from(f: FigArg) -> Self {
        match f {
            FigArg::Fig1 => Figure::Fig1,
            FigArg::Fig2 => Figure::Fig2,
            FigArg::Fig3 => Figure::Fig3,
        }
    }
}

impl Flags {
    fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => config::load_file(path)?,
            None => Settings::default(),
        };
        Ok(file.merged(Settings {
            j: self.j,
            theta: self.theta,
            phi: self.phi,
            azimuth: self.azimuth,
            omega: self.omega,
            t: self.t,
            g: self.g,
            nu: self.nu,
            grid: self.grid,
            margin: self.margin,
            out: self.out.clone(),
        }))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.flags.settings()?.into_run_config()?;
    match cli.command {
        Command::Qfi => {
            let text = report::qfi_report(&config)?;
            emit_text(&text, config.output_path.as_deref())
        }
        Command::Sweep => {
            let table = sweep_table(&config)?;
            let path = output_path(&config, "sweep.csv");
            write_table(&table, &path)
        }
        Command::Fig { which } => cmd_fig(which.into(), &config),
        Command::Verify { tamper_analytic } => {
            let hooks = VerifyHooks {
                analytic_scale: tamper_analytic.unwrap_or(1.0),
            };
            let report = run_verification_with(hooks);
            let mut text = String::new();
            for check in &report.checks {
                text.push_str(&format!("{check}\n"));
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            text.push_str(&format!("{passed}/{} checks passed\n", report.checks.len()));
            emit_text(&text, config.output_path.as_deref())?;
            if report.all_passed() {
                Ok(())
            } else {
                let names: Vec<_> = report.failures().map(|c| c.name).collect();
                Err(CliError::Verify(names.join(", ")))
            }
        }
    }
}

fn cmd_fig(which: Figure, config: &RunConfig) -> Result<(), CliError> {
    let tables = figure_tables(which, config)?;
    let default = format!("{}.csv", tables[0].name);
    let main = output_path(config, &default);
    write_table(&tables[0], &main)?;
    if let Some(inset) = tables.get(1) {
        write_table(inset, &with_suffix(&main, "_inset"))?;
    }
    Ok(())
}

fn output_path(config: &RunConfig, default: &str) -> PathBuf {
    PathBuf::from(config.output_path.as_deref().unwrap_or(default))
}

/// `dir/fig2.csv` → `dir/fig2_inset.csv`.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    let io_err = |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    table.write_csv(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    println!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(())
}

fn emit_text(text: &str, path: Option<&str>) -> Result<(), CliError> {
    print!("{text}");
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|source| CliError::Output {
            path: PathBuf::from(p),
            source,
        })?;
    }
    Ok(())
}
