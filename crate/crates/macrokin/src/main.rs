use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use macrokin::config::{parse_params, Convention, Format, Layer, RunConfig};
use macrokin::{commands, parallel, CliError};

#[derive(Parser)]
#[command(name = "macrokin", version, about = "Stochastic reaction kinetics for macrosystem models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network or gallery model, one or many replicas.
    Simulate(Common),
    /// Integrate the mass-action limit.
    Meanfield(Common),
    /// Unitarity, detailed balance, entropy projection and the exact chain.
    Equilibrium(Common),
    /// Run a verification suite.
    Verify {
        /// ehrenfest, schlogl, wealth, lv, kac, power_laws, pagerank or majority.
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with the same keys as the long flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Model parameters as key=value.
    #[arg(long, num_args = 1.., value_name = "K=V")]
    params: Vec<String>,
    /// System size.
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    sample_dt: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    max_events: Option<u64>,
    #[arg(long)]
    max_states: Option<usize>,
    #[arg(long, value_enum)]
    intensity_convention: Option<Convention>,
    /// Initial counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n0: Option<Vec<u64>>,
    /// Initial concentrations for meanfield, comma separated.
    #[arg(long, value_delimiter = ',')]
    c0: Option<Vec<f64>>,
    /// Integrator step for meanfield.
    #[arg(long)]
    step: Option<f64>,
}

impl Common {
    fn layer(&self) -> Result<Layer, CliError> {
        Ok(Layer {
            network: self.network.clone(),
            model: self.model.clone(),
            params: parse_params(&self.params)?,
            n: self.n,
            horizon: self.horizon,
            sample_dt: self.sample_dt,
            replicas: self.replicas,
            seed: self.seed,
            output: self.output.clone(),
            format: self.format,
            max_events: self.max_events,
            max_states: self.max_states,
            intensity_convention: self.intensity_convention,
            n0: self.n0.clone(),
            c0: self.c0.clone(),
            step: self.step,
        })
    }

    fn resolve(&self, command: &str, suite: Option<String>) -> Result<RunConfig, CliError> {
        RunConfig::resolve(command, suite, self.layer()?, self.config.as_deref())
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    parallel::thread_count()?;
    match cli.command {
        Command::Simulate(c) => commands::simulate_cmd(&c.resolve("simulate", None)?),
        Command::Meanfield(c) => commands::meanfield_cmd(&c.resolve("meanfield", None)?),
        Command::Equilibrium(c) => commands::equilibrium_cmd(&c.resolve("equilibrium", None)?),
        Command::Verify { suite, common } => {
            macrokin::verify::suite_criteria(&suite)?;
            commands::verify_cmd(&common.resolve("verify", Some(suite.clone()))?, &suite)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
