use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "qnmres", version, about = "Emitter decay rates and emission spectra for a lossy cavity")]
struct Cli {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override a configuration key, e.g. `--set cavity.q_factor=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Shorthand for `--set coupling.gauge=...`.
    #[arg(long, global = true)]
    gauge: Option<String>,

    /// Shorthand for `--set bath.exponent_n=...`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    exponent: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continuum decay rate over the [sweep] emitter-frequency grid.
    Rates {
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Dressed energies and lowering elements of the truncated JC system.
    Dressed,
    /// Master-equation decay rates against the second-order rate over the sweep.
    Eig,
    /// Second-order and master-equation rates for matched and mismatched gauges.
    GaugeCompare {
        /// Skip the master-equation columns.
        #[arg(long)]
        no_numeric: bool,
    },
    /// Time evolution from the [sim] initial state.
    Evolve,
    /// Normalized emission spectrum under incoherent emitter pumping.
    Spectrum {
        /// Emit the four-curve overlay (n = 0, -1/2, with and without chi).
        #[arg(long)]
        figure3: bool,
    },
    /// Spectral-density curves J(omega)/kappa for several QNM phases.
    SdCurves {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.01,0.03,0.05,-0.03")]
        phis: Vec<f64>,
    },
    /// Run every acceptance criterion.
    Accept,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut overrides = cli.overrides.clone();
    if let Some(g) = &cli.gauge {
        overrides.push(format!("coupling.gauge=\"{g}\""));
    }
    if let Some(n) = cli.exponent {
        overrides.push(format!("bath.exponent_n={n:?}"));
    }
    let mut cfg = config::load(cli.config.as_deref(), &overrides)?;
    if let Command::Rates { min, max, points } = &cli.command {
        cfg.sweep.omega0_min = min.unwrap_or(cfg.sweep.omega0_min);
        cfg.sweep.omega0_max = max.unwrap_or(cfg.sweep.omega0_max);
        cfg.sweep.points = points.unwrap_or(cfg.sweep.points);
    }
    let resolved = cfg.resolve()?;
    for w in &resolved.warnings {
        log::warn!("{w}");
    }
    std::fs::create_dir_all(&cli.out)?;
    let mut run = manifest::Run::new(&cli.out, command_name(&cli.command), &cfg, &resolved);
    let passed = match cli.command {
        Command::Rates { .. } => commands::rates(&mut run, &resolved)?,
        Command::Dressed => commands::dressed(&mut run, &resolved)?,
        Command::Eig => commands::eig(&mut run, &resolved)?,
        Command::GaugeCompare { no_numeric } => commands::gauge_compare(&mut run, &resolved, !no_numeric)?,
        Command::Evolve => commands::evolve(&mut run, &resolved, &cfg)?,
        Command::Spectrum { figure3 } => commands::spectrum(&mut run, &resolved, &cfg, figure3)?,
        Command::SdCurves { phis } => commands::sd_curves(&mut run, &resolved, &phis)?,
        Command::Accept => commands::accept(&mut run)?,
    };
    run.finish()?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Rates { .. } => "rates",
        Command::Dressed => "dressed",
        Command::Eig => "eig",
        Command::GaugeCompare { .. } => "gauge-compare",
        Command::Evolve => "evolve",
        Command::Spectrum { .. } => "spectrum",
        Command::SdCurves { .. } => "sd-curves",
        Command::Accept => "accept",
    }
}
