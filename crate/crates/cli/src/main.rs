use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use delayfts_cli::commands::{self, Example1, Example2, OutputOptions};
use delayfts_cli::{CliError, ExperimentConfig};
use delayfts_core::Norm;

#[derive(Parser)]
#[command(
    name = "delayfts",
    version,
    about = "Finite-time stabilization and synchronization under time-varying delays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Out {
    /// Output directory (default: the config's `output.dir`, else `out`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write every n-th grid point.
    #[arg(long)]
    stride: Option<usize>,
}

impl From<Out> for OutputOptions {
    fn from(o: Out) -> Self {
        OutputOptions { dir: o.out, stride: o.stride }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured experiment; writes trajectory.csv and report.json.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Evaluate the sufficient conditions for a config.
    Check {
        config: PathBuf,
        /// Exit with status 2 if the primary condition fails.
        #[arg(long)]
        require_feasible: bool,
    },
    /// Trace a Lyapunov functional and check its contact points.
    Monitor {
        config: PathBuf,
        /// Trajectory CSV from `simulate`; integrates the config when absent.
        trajectory: Option<PathBuf>,
        /// V1..V8 or Vbar1..Vbar8.
        #[arg(long, short)]
        functional: Option<String>,
        #[command(flatten)]
        out: Out,
    },
    /// The scalar worked example.
    Example1 {
        #[arg(long, value_enum, default_value_t = Example1Arg::Static)]
        variant: Example1Arg,
        /// Norm of the adaptive rule.
        #[arg(long, value_enum, default_value_t = NormArg::Two)]
        norm: NormArg,
        #[command(flatten)]
        out: Out,
    },
    /// The three-node Lorenz network example.
    Example2 {
        #[arg(long, value_enum, default_value_t = Example2Arg::AdaptiveFull)]
        variant: Example2Arg,
        #[command(flatten)]
        out: Out,
    },
    /// Run a config once per value of a dotted parameter path.
    Sweep {
        config: PathBuf,
        /// Dotted path into the config, e.g. `scalar.gains.c4`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        out: Out,
    },
    /// Print a config for an example, to edit and pass back in.
    Template {
        #[arg(value_enum)]
        which: TemplateArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example1Arg {
    Static,
    Adaptive,
    SweepC3,
    SweepC4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example2Arg {
    NoControl,
    AdaptiveFull,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Two,
    One,
    Inf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    ScalarStatic,
    ScalarAdaptive,
    Lorenz,
    LorenzAdaptive,
}

fn dispatch(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::Simulate { config, out } => commands::simulate(&ExperimentConfig::load(&config)?, &out.into()),
        Command::Check { config, require_feasible } => {
            commands::check(&ExperimentConfig::load(&config)?, require_feasible)
        }
        Command::Monitor { config, trajectory, functional, out } => commands::monitor(
            &ExperimentConfig::load(&config)?,
            trajectory.as_deref(),
            functional.as_deref(),
            &out.into(),
        ),
        Command::Example1 { variant, norm, out } => {
            let variant = match variant {
                Example1Arg::Static => Example1::Static,
                Example1Arg::Adaptive => Example1::Adaptive,
                Example1Arg::SweepC3 => Example1::SweepC3,
                Example1Arg::SweepC4 => Example1::SweepC4,
            };
            commands::example1(variant, norm.into(), &out.into())
        }
        Command::Example2 { variant, out } => {
            let variant = match variant {
                Example2Arg::NoControl => Example2::NoControl,
                Example2Arg::AdaptiveFull => Example2::AdaptiveFull,
            };
            commands::example2(variant, &out.into())
        }
        Command::Sweep { config, param, values, out } => {
            commands::sweep(&ExperimentConfig::load(&config)?, &param, &values, &out.into())
        }
        Command::Template { which } => {
            let cfg = match which {
                TemplateArg::ScalarStatic => commands::example1_config(Example1::Static, Norm::Two),
                TemplateArg::ScalarAdaptive => commands::example1_config(Example1::Adaptive, Norm::Two),
                TemplateArg::Lorenz => commands::example2_config(Example2::NoControl),
                TemplateArg::LorenzAdaptive => commands::example2_config(Example2::AdaptiveFull),
            };
            Ok(cfg.to_json() + "\n")
        }
    }
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Two => Norm::Two,
            NormArg::One => Norm::One,
            NormArg::Inf => Norm::Inf,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
