use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rabi_sense::metrology::{Engine, SweepAxis};
use rabi_sense_cli::commands::{self, Destination, Range, Report, SpinForceArgs};
use rabi_sense_cli::config::ConfigFile;
use rabi_sense_cli::CliError;

/// Adiabatic force sensing with a quantum Rabi model.
#[derive(Parser)]
#[command(name = "rabi-sense", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// INI file with [physics], [numerics] and [heating] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination, `-` for stdout.
    #[arg(long, default_value = "-")]
    out: String,
    /// Manifest path [default: <out>.manifest when --out is a file].
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 11)]
    points: usize,
}

impl From<&RangeArgs> for Range {
    fn from(r: &RangeArgs) -> Self {
        Range { from: r.from, to: r.to, points: r.points }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Pure,
    Lindblad,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Pure => Engine::Pure,
            EngineArg::Lindblad => Engine::Lindblad,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Lowest levels, gaps and adiabatic parameter along the ramp.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Time-resolved observables from the ground state.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Defaults to lindblad when heating is enabled, else pure.
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Full runs over the ramp rate γ [kHz].
    SweepGamma {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Full runs over the force amplitude [yN].
    SweepForce {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_enum)]
        engine: Option<EngineArg>,
    },
    /// Master-equation runs over the heating rate [1/ms].
    SweepHeating {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Two-level closed forms and the integrated effective model.
    Demkov {
        #[command(flatten)]
        common: Common,
    },
    /// Minimum force and sensitivity, optionally over a γ range [kHz].
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "to")]
        from: Option<f64>,
        #[arg(long, requires = "from")]
        to: Option<f64>,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Force from a magnetic gradient acting on a spin in the chain.
    SpinForce {
        #[command(flatten)]
        common: Common,
        /// [T/m]
        #[arg(long, default_value_t = 1.0)]
        gradient: f64,
        #[arg(long, default_value_t = 2.0)]
        lande_g: f64,
        /// Centre-of-mass mode frequency [MHz]; defaults to the trap frequency.
        #[arg(long)]
        com_freq_mhz: Option<f64>,
        #[arg(long)]
        mass_amu: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum { common }
            | Command::Evolve { common, .. }
            | Command::SweepGamma { common, .. }
            | Command::SweepForce { common, .. }
            | Command::SweepHeating { common, .. }
            | Command::Demkov { common }
            | Command::Sensitivity { common, .. }
            | Command::SpinForce { common, .. } => common,
        }
    }
}

fn dispatch(cmd: &Command, cfg: &ConfigFile) -> Result<Report, CliError> {
    match cmd {
        Command::Spectrum { .. } => commands::spectrum(cfg),
        Command::Evolve { engine, .. } => commands::evolve(cfg, engine.map(Into::into)),
        Command::SweepGamma { range, engine, .. } => {
            commands::sweep(cfg, SweepAxis::Gamma, range.into(), engine.map(Into::into))
        }
        Command::SweepForce { range, engine, .. } => {
            commands::sweep(cfg, SweepAxis::Force, range.into(), engine.map(Into::into))
        }
        Command::SweepHeating { range, .. } => commands::sweep(cfg, SweepAxis::HeatingRate, range.into(), None),
        Command::Demkov { .. } => commands::demkov(cfg),
        Command::Sensitivity { from, to, points, .. } => {
            let range = from.zip(*to).map(|(from, to)| Range { from, to, points: *points });
            commands::sensitivity(cfg, range)
        }
        Command::SpinForce { gradient, lande_g, com_freq_mhz, mass_amu, .. } => commands::spin_force(
            cfg,
            SpinForceArgs {
                gradient_t_per_m: *gradient,
                lande_g: *lande_g,
                com_freq_mhz: *com_freq_mhz,
                mass_amu: *mass_amu,
            },
        ),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Ok(protocol) = cfg.protocol() {
        for w in protocol.warnings() {
            eprintln!("warning: {w}");
        }
    }
    let report = dispatch(&cli.command, &cfg)?;
    commands::emit(report, &cfg, &Destination::parse(&common.out), common.manifest.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
