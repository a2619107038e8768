//! squidmodes — multi-frequency modes of a flux-modulated inline-SQUID
//! resonator, sideband-mediated transmon couplings, and a bichromatic
//! two-qubit gate simulator.
//!
//! Exit codes: 0 success, 1 bad input, 2 solver failure, 3 calibration
//! failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::GateOverrides;
use config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(name = "squidmodes", version, about)]
struct Cli {
    /// Configuration file (JSON); a previously written manifest also works.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Format of the scalar result records (data tables are always CSV).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one driven mode: quantized record plus spatial profile.
    Modes {
        /// Odd mode index (1, 3, 5, ...).
        #[arg(long, default_value_t = 1)]
        branch: u32,
        /// Sideband truncation order for the generalized solver; above 1 the
        /// record gains a comparison block.
        #[arg(long, default_value_t = 1)]
        m_order: usize,
    },
    /// Carrier frequency versus modulation amplitude, one CSV per branch.
    Sweep {
        /// Modulation frequency in GHz (defaults to the first config tone).
        #[arg(long)]
        omega_d_ghz: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        amp_min: f64,
        #[arg(long, default_value_t = 0.4)]
        amp_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Comma-separated odd branches.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 3, 5])]
        branches: Vec<u32>,
    },
    /// Sideband coupling versus amplitude for one or more modulation
    /// frequencies, with the quasi-static comparison column.
    Coupling {
        /// Comma-separated modulation frequencies in GHz.
        #[arg(long, value_delimiter = ',', default_values_t = [6.0f64, 0.5])]
        omega_d_ghz: Vec<f64>,
        #[arg(long, default_value_t = 0.4)]
        amp_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
    /// Calibrate the four-tone drive and simulate the entangling gate.
    Gate {
        /// Disable all dissipation channels.
        #[arg(long)]
        lossless: bool,
        /// Drop the cross-Kerr term.
        #[arg(long)]
        no_kerr: bool,
        #[arg(long)]
        t1_us: Option<f64>,
        #[arg(long)]
        t2_us: Option<f64>,
        #[arg(long)]
        kappa_mhz: Option<f64>,
        #[arg(long)]
        target_g_mhz: Option<f64>,
        #[arg(long)]
        delta_mhz: Option<f64>,
        /// Fock cutoff.
        #[arg(long)]
        fock: Option<usize>,
        #[arg(long)]
        dt_ns: Option<f64>,
        #[arg(long)]
        t_final_ns: Option<f64>,
    },
}

/// Load a config file; a run manifest is accepted and its embedded config
/// extracted, so a run can be reproduced from its own metadata.
fn load_config(path: &PathBuf) -> anyhow::Result<(Config, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("config {} is not valid JSON: {e}", path.display()))?;
    if let Some(inner) = value.get("config_verbatim").and_then(|v| v.as_str()) {
        let cfg = serde_json::from_str(inner)
            .map_err(|e| anyhow::anyhow!("embedded config in manifest is invalid: {e}"))?;
        return Ok((cfg, inner.to_string()));
    }
    let cfg = serde_json::from_value(value)
        .map_err(|e| anyhow::anyhow!("config {} has an invalid schema: {e}", path.display()))?;
    Ok((cfg, text))
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<squidmodes::Error>() {
        Some(squidmodes::Error::InvalidParameter { .. }) => 1,
        Some(squidmodes::Error::NonConvergence { .. })
        | Some(squidmodes::Error::AmplitudeOutOfRange { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (cfg, verbatim) = load_config(&cli.config)?;
    match &cli.command {
        Command::Modes { branch, m_order } => commands::cmd_modes(
            &cfg,
            verbatim,
            &cli.out,
            *branch,
            (*m_order).max(1),
            cli.format,
        ),
        Command::Sweep {
            omega_d_ghz,
            amp_min,
            amp_max,
            steps,
            branches,
        } => commands::cmd_sweep(
            &cfg,
            verbatim,
            &cli.out,
            *omega_d_ghz,
            *amp_min,
            *amp_max,
            *steps,
            branches,
        ),
        Command::Coupling {
            omega_d_ghz,
            amp_max,
            steps,
        } => commands::cmd_coupling(&cfg, verbatim, &cli.out, omega_d_ghz, *amp_max, *steps),
        Command::Gate {
            lossless,
            no_kerr,
            t1_us,
            t2_us,
            kappa_mhz,
            target_g_mhz,
            delta_mhz,
            fock,
            dt_ns,
            t_final_ns,
        } => {
            let overrides = GateOverrides {
                lossless: *lossless,
                no_kerr: *no_kerr,
                t1_us: *t1_us,
                t2_us: *t2_us,
                kappa_mhz: *kappa_mhz,
                target_g_mhz: *target_g_mhz,
                delta_mhz: *delta_mhz,
                fock: *fock,
                dt_ns: *dt_ns,
                t_final_ns: *t_final_ns,
            };
            commands::cmd_gate(&cfg, verbatim, &cli.out, &overrides, cli.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
