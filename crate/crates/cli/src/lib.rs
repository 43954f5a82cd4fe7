//! Command-line front end: plan export, plan verification, complexity tables
//! and rate sweeps.
//!
//! Exit statuses: 0 success, 1 verification failure, 2 validation or parse
//! error, 3 I/O error, 4 solver failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod planfile;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cyclic_caching::{BeamformerKind, Fading, PhantomSlotPolicy, Scheme};

pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cyclic-caching",
    version,
    about = "Cyclic multi-antenna coded caching toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the delivery plan of the LIN or RED scheme.
    Plan(ConfigArgs),
    /// Check a plan file for coverage and decodability.
    Verify {
        /// Plan file written by `plan`.
        path: PathBuf,
    },
    /// Subpacketization and transmission counts of every scheme.
    Complexity {
        #[command(flatten)]
        config: ConfigArgs,
        /// Emit CSV instead of an aligned table.
        #[arg(long)]
        csv: bool,
        /// Append growth orders.
        #[arg(long)]
        orders: bool,
        /// Growth orders for a caching gain proportional to K.
        #[arg(long, requires = "orders")]
        t_scales: bool,
    },
    /// Monte-Carlo symmetric rate versus SNR, as CSV.
    Simulate(ConfigArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Key-value configuration file (K, t, L, alpha, K_f, scheme, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'K')]
    pub users: Option<usize>,
    #[arg(long, short = 't')]
    pub caching_gain: Option<usize>,
    #[arg(long, short = 'L')]
    pub antennas: Option<usize>,
    #[arg(long, short = 'a')]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub phantoms: Option<usize>,
    /// lin, red or no-cc (complexity ignores it).
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// maxmin or zf.
    #[arg(long)]
    pub beamformer: Option<BeamformerKind>,
    /// Comma-separated list or start:stop:step.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_snr)]
    pub snr_db: Option<SnrList>,
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// skip or keep.
    #[arg(long)]
    pub phantom_slot_policy: Option<PhantomSlotPolicy>,
    /// slow or fast.
    #[arg(long)]
    pub fading: Option<Fading>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrList(pub Vec<f64>);

fn parse_snr(text: &str) -> Result<SnrList, String> {
    config::parse_snr_list(text).map(SnrList)
}

impl ConfigArgs {
    fn flags(&self) -> RunConfig {
        RunConfig {
            users: self.users,
            caching_gain: self.caching_gain,
            antennas: self.antennas,
            alpha: self.alpha,
            phantoms: self.phantoms,
            scheme: self.scheme,
            beamformer: self.beamformer,
            snr_db: self.snr_db.clone().map(|s| s.0),
            draws: self.draws,
            seed: self.seed,
            output: self.output.clone(),
            phantom_policy: self.phantom_slot_policy,
            fading: self.fading,
        }
    }

    /// Configuration file, then the seed environment variable, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig::from_env()?).overlay(self.flags()))
    }
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Runs one parsed command, writing results to `stdout` and diagnostics to `stderr`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Plan(args) => {
            let config = args.resolve()?;
            emit(&commands::plan(&config)?, config.output.as_deref(), stdout)
        }
        Command::Verify { path } => {
            let report = commands::verify(path)?;
            if report.passed {
                writeln!(stdout, "ok: {}", report.summary).map_err(|e| CliError::io("<stdout>", e))
            } else {
                for message in &report.messages {
                    writeln!(stderr, "{message}").map_err(|e| CliError::io("<stderr>", e))?;
                }
                Err(CliError::Verification(report.messages.len()))
            }
        }
        Command::Complexity {
            config,
            csv,
            orders,
            t_scales,
        } => {
            let config = config.resolve()?;
            let text = commands::complexity(&config, *csv, *orders, *t_scales)?;
            emit(&text, config.output.as_deref(), stdout)
        }
        Command::Simulate(args) => {
            let config = args.resolve()?;
            emit(
                &commands::simulate_csv(&config)?,
                config.output.as_deref(),
                stdout,
            )
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
