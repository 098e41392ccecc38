//! Command-line front end: configuration, dispatch and CSV output.
//!
//! Exit status is 0 on success, 1 when a physical or numerical invariant is
//! breached, and 2 for configuration or range errors.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, Command, Report};
pub use config::{parse_config, parse_with_overrides, RunConfig};
pub use units::{physical_units, PhysicalScale};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qutrit-sta", version, about = "Shortcut-to-adiabaticity pulse design for a Lambda qutrit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand, Clone, Copy)]
pub enum CliCommand {
    /// Write the designed pulses to waveforms.csv
    Design,
    /// Integrate the transfer from |g> into trajectory.csv
    Simulate,
    /// Path tracking and decoupling checks over seeded random schedules (fig2.csv)
    Verify,
    /// Peak envelope and pulse area over a gamma0 grid (fig5.csv)
    Metrics,
    /// Final P_e against a systematic Rabi-frequency error (fig6.csv)
    SweepSystematic,
    /// Final P_e against amplitude-noise strength (fig7.csv)
    SweepAmplitude,
    /// Closed-form constant-gamma reference (adiabatic_ref.csv)
    AdiabaticRef,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Design => Command::Design,
            CliCommand::Simulate => Command::Simulate,
            CliCommand::Verify => Command::Verify,
            CliCommand::Metrics => Command::Metrics,
            CliCommand::SweepSystematic => Command::SweepSystematic,
            CliCommand::SweepAmplitude => Command::SweepAmplitude,
            CliCommand::AdiabaticRef => Command::AdiabaticRef,
        }
    }
}

/// Flags mirroring configuration keys; they win over the config file.
#[derive(Debug, Args, Default)]
pub struct Options {
    /// Flat `key = value` configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Any key, as `key=value`; may be repeated
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma0_pi: Option<String>,
    #[arg(long = "tau1-T", global = true, allow_hyphen_values = true)]
    pub tau1_t: Option<String>,
    #[arg(long = "tau2-T", global = true, allow_hyphen_values = true)]
    pub tau2_t: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi_pi: Option<String>,
    /// Total time T
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    pub total_time: Option<String>,
    #[arg(long, global = true)]
    pub steps: Option<String>,
    #[arg(long, global = true)]
    pub grid_size: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_min: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_max: Option<String>,
    #[arg(long, global = true)]
    pub lambda_count: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta_min: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta_max: Option<String>,
    #[arg(long, global = true)]
    pub eta_count: Option<String>,
    /// Worker threads for sweeps and verify; 0 uses all cores
    #[arg(long, global = true)]
    pub threads: Option<String>,
    #[arg(long, global = true)]
    pub draws: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Peak envelope frequency in GHz used for the physical duration
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega0_max_ghz: Option<String>,
}

impl Options {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Range(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let named = [
            ("schedule.gamma0_pi", &self.gamma0_pi),
            ("schedule.tau1_T", &self.tau1_t),
            ("schedule.tau2_T", &self.tau2_t),
            ("schedule.phi_pi", &self.phi_pi),
            ("schedule.T", &self.total_time),
            ("integrator.steps", &self.steps),
            ("integrator.grid_size", &self.grid_size),
            ("sweep.lambda_min", &self.lambda_min),
            ("sweep.lambda_max", &self.lambda_max),
            ("sweep.lambda_count", &self.lambda_count),
            ("sweep.eta_min", &self.eta_min),
            ("sweep.eta_max", &self.eta_max),
            ("sweep.eta_count", &self.eta_count),
            ("sweep.threads", &self.threads),
            ("verify.draws", &self.draws),
            ("seed", &self.seed),
            ("units.omega0_max_ghz", &self.omega0_max_ghz),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        if let Some(dir) = &self.out {
            out.push(("output_dir".to_string(), dir.to_string_lossy().into_owned()));
        }
        Ok(out)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?,
            None => String::new(),
        };
        parse_with_overrides(&text, &self.overrides()?)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Summary lines go to `stdout`, diagnostics to `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.options.resolve().and_then(|cfg| run(cli.command.into(), &cfg));
    match result {
        Ok((path, summary)) => {
            for line in summary {
                let _ = writeln!(stdout, "{line}");
            }
            let _ = writeln!(stdout, "wrote {}", path.display());
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
