mod commands;
mod config;
mod error;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Context;
use error::{CliError, Result};

/// Noisy quantum gates in the Choi-Jamiolkowski picture.
#[derive(Parser)]
#[command(name = "qnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a channel file to another representation.
    Convert(Common),
    /// Fidelity and negativity of elementary noise channels over a parameter grid.
    NoiseSweep(Common),
    /// Simulate a noisy gate and write its chi trajectory.
    GateSim(Simulating),
    /// Fidelity of the three-qubit phase-flip code.
    Ecc(Common),
    /// Entanglement dynamics of one or more simulated gates.
    Negativity(Simulating),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Simulating {
    #[command(flatten)]
    common: Common,
    /// Time step, overriding the configuration.
    #[arg(long)]
    dt: Option<f64>,
}

fn context(common: &Common, dt: Option<f64>) -> Result<Context> {
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    if dt.is_some_and(|dt| !(dt.is_finite() && dt > 0.0)) {
        return Err(CliError::Config("--dt must be positive".into()));
    }
    Ok(Context {
        config_dir: common
            .config
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
        out: common.out.clone(),
        plot: common.plot,
        dt,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(c) => {
            let cfg = config::load(&c.config, "convert")?;
            commands::convert(cfg, &context(&c, None)?)
        }
        Command::NoiseSweep(c) => {
            let cfg = config::load(&c.config, "noise-sweep")?;
            commands::noise_sweep(cfg, &context(&c, None)?)
        }
        Command::GateSim(s) => {
            let cfg = config::load(&s.common.config, "gate-sim")?;
            commands::gate_sim(cfg, &context(&s.common, s.dt)?)
        }
        Command::Ecc(c) => {
            let cfg = config::load(&c.config, "ecc")?;
            commands::ecc(cfg, &context(&c, None)?)
        }
        Command::Negativity(s) => {
            let cfg = config::load(&s.common.config, "negativity")?;
            commands::negativity(cfg, &context(&s.common, s.dt)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QNOISE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let report = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}
