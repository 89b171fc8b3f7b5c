use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memchain::{formats, run, Error, Result, RunConfig};
use memchain_core::{Method, DEFAULT_SUPPORT_CAP};

#[derive(Parser)]
#[command(
    name = "memchain",
    version,
    about = "Memory-ℓ Markov abstractions of dynamical systems from sampled traces"
)]
struct Cli {
    /// Worker threads for simulation (0 = one per core); overrides output.threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Override a config key, e.g. --set sampling.seed=7 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; overrides output.dir.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    MonteCarlo,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trajectories and write samples.txt.
    Simulate(ConfigArgs),
    /// Estimate a memory-ℓ model and write model_ℓ.txt.
    Build {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        memory: usize,
        /// Estimate from this samples file instead of simulating.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Print the distance between two model files as CSV.
    Distance {
        model1: PathBuf,
        model2: PathBuf,
        /// Horizon in letters.
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
        support_cap: usize,
        /// Print JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Refine the memory until successive models agree; write the run directory.
    Refine(ConfigArgs),
    /// Write the state-space partition induced by the trailing ℓ letters.
    ExportPartition {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        memory: usize,
    },
}

fn load(args: &ConfigArgs, threads: Option<usize>) -> Result<RunConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(out) = &args.out {
        let out = out
            .to_str()
            .ok_or_else(|| Error::Config(format!("output path {} is not UTF-8", out.display())))?;
        overrides.push(format!(
            "output.dir={}",
            toml::Value::String(out.to_string())
        ));
    }
    if let Some(t) = threads {
        overrides.push(format!("output.threads={t}"));
    }
    RunConfig::load(&args.config, &overrides)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let (dir, samples) = run::simulate(&load(&args, cli.threads)?)?;
            println!(
                "{} words of {} letters written to {}",
                samples.len(),
                samples.word_len(),
                dir.display()
            );
        }
        Command::Build {
            config,
            memory,
            samples,
        } => {
            let (dir, model) =
                run::build(&load(&config, cli.threads)?, memory, samples.as_deref())?;
            println!(
                "memory-{memory} model with {} states and {} transitions written to {}",
                model.state_count(),
                model.transition_count(),
                dir.join(format!("model_{memory}.txt")).display()
            );
        }
        Command::Distance {
            model1,
            model2,
            horizon,
            method,
            mc_samples,
            seed,
            support_cap,
            json,
        } => {
            let method = match method {
                MethodArg::Exact => Method::Exact { cap: support_cap },
                MethodArg::MonteCarlo => Method::MonteCarlo {
                    samples: mc_samples,
                    seed,
                },
            };
            let report = run::distance_between(&model1, &model2, horizon, &method)?;
            if json {
                println!("{}", formats::distance_json(&report));
            } else {
                print!("{}", formats::distance_csv(&[report]));
            }
        }
        Command::Refine(args) => {
            let (dir, run) = run::refine(&load(&args, cli.threads)?)?;
            let report = &run.report;
            match report.final_memory {
                Some(m) => println!(
                    "final memory {m} ({}), results in {}",
                    report.termination.tag(),
                    dir.display()
                ),
                None => println!(
                    "no model completed ({}), results in {}",
                    report.termination.tag(),
                    dir.display()
                ),
            }
        }
        Command::ExportPartition { config, memory } => {
            let dir = run::partition(&load(&config, cli.threads)?, memory)?;
            println!(
                "partition written to {}",
                dir.join(format!("partition_{memory}.csv")).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
