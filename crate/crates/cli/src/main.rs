mod commands;
mod output;

use clap::{Parser, Subcommand};
use commands::{CliError, CliResult, Finished};
use output::RunManifest;
use serde_json::Value;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "frackpp", version, about = "Time-fractional Fisher-KPP fronts and wave profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Front run from a SimConfig document.
    Simulate,
    /// Front speed against c*_α over a list of α.
    SpeedSweep,
    /// Traveling-wave profile by monotone iteration.
    Profile,
    /// Roots of the characteristic polynomial.
    Dispersion {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        fprime0: Option<f64>,
    },
    /// Identities of the profile kernels.
    KernelCheck {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Convergence of the L1 scheme on the fractional Malthus problem.
    MalthusCheck {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        zeta: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::SpeedSweep => "speed-sweep",
            Command::Profile => "profile",
            Command::Dispersion { .. } => "dispersion",
            Command::KernelCheck { .. } => "kernel-check",
            Command::MalthusCheck { .. } => "malthus-check",
        }
    }
}

fn read_config(path: &Option<PathBuf>) -> CliResult<Value> {
    match path {
        None => Ok(Value::Null),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn require(value: Value, what: &str) -> CliResult<Value> {
    if value.is_null() {
        Err(CliError::Config(format!("{what} needs --config")))
    } else {
        Ok(value)
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    let threads = cli.threads.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let value = read_config(&cli.config)?;
    let Finished { outputs, config, steps } = match &cli.command {
        Command::Simulate => commands::simulate(require(value, "simulate")?)?,
        Command::SpeedSweep => commands::speed_sweep_cmd(commands::with_overrides(value, &[])?)?,
        Command::Profile => commands::profile(require(value, "profile")?)?,
        Command::Dispersion { alpha, c, fprime0 } => commands::dispersion(commands::with_overrides(
            value,
            &[("alpha", *alpha), ("c", *c), ("fprime0", *fprime0)],
        )?)?,
        Command::KernelCheck { alpha, c, kappa } => commands::kernel_check(commands::with_overrides(
            value,
            &[("alpha", *alpha), ("c", *c), ("kappa", *kappa)],
        )?)?,
        Command::MalthusCheck { alpha, zeta } => {
            commands::malthus_check(commands::with_overrides(value, &[("alpha", *alpha), ("zeta", *zeta)])?)?
        }
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", cli.out.display()));
    outputs.write(&cli.out).map_err(io)?;
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        threads: rayon::current_num_threads(),
        seed: cli.seed,
        outputs: outputs.names(),
        wall_clock_s: start.elapsed().as_secs_f64(),
        steps,
    };
    let mut m = output::Outputs::default();
    m.json("manifest.json", &manifest);
    m.write(&cli.out).map_err(io)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("frackpp {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
