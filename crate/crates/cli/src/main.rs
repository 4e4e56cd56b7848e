use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ncauto_cli::{
    builtin_paper_suite, parse_config, run_suite, summary, write_reports, OutputFormat,
    SuiteConfig, EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR,
};
use ncauto_core::domains::DomainSpec;
use ncauto_core::maps::NcMapExpr;
use ncauto_core::NcPoint;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(
    name = "ncauto",
    version,
    about = "Numerical checks for nc maps on matrix tuples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a JSON suite config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Run the built-in reference suite.
    PaperSuite {
        #[command(flatten)]
        overrides: RunOverrides,
        /// Print the suite config as JSON instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Decide membership of a point in a domain.
    Membership {
        /// JSON domain descriptor.
        #[arg(long)]
        domain: PathBuf,
        /// JSON point: `{"vars": [...]}`.
        #[arg(long)]
        point: PathBuf,
    },
    /// Evaluate a map at a point.
    Apply {
        /// JSON map expression.
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
}

#[derive(Args)]
struct RunOverrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; defaults to `report.<format>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

impl RunOverrides {
    fn apply(self, config: &mut SuiteConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = self.out {
            config.output.path = Some(out);
        }
        if let Some(format) = self.format {
            config.output.format = format;
        }
        if self.jobs.is_some() {
            config.parallelism = self.jobs;
        }
    }
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Failure::Config(anyhow::anyhow!(
            "{}: invalid JSON at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

fn execute(config: SuiteConfig) -> Result<ExitCode, Failure> {
    if config.parallelism == Some(0) {
        return Err(Failure::Config(anyhow::anyhow!(
            "--jobs must be at least 1"
        )));
    }
    let outcome = run_suite(&config).map_err(Failure::Runtime)?;
    let path =
        config.output.path.clone().unwrap_or_else(|| {
            PathBuf::from(format!("report.{}", config.output.format.extension()))
        });
    write_reports(&path, config.output.format, &outcome.reports).map_err(Failure::Runtime)?;
    print!("{}", summary(&outcome.reports));
    println!("report written to {}", path.display());
    Ok(ExitCode::from(outcome.exit_code() as u8))
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Run { config, overrides } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))
                .map_err(Failure::Config)?;
            let mut suite = parse_config(&text).map_err(|e| Failure::Config(e.into()))?;
            overrides.apply(&mut suite);
            execute(suite)
        }
        Command::PaperSuite {
            overrides,
            print_config,
        } => {
            let mut suite = builtin_paper_suite();
            overrides.apply(&mut suite);
            if print_config {
                let text =
                    serde_json::to_string_pretty(&suite).map_err(|e| Failure::Runtime(e.into()))?;
                println!("{text}");
                return Ok(ExitCode::SUCCESS);
            }
            execute(suite)
        }
        Command::Membership { domain, point } => {
            let domain: DomainSpec = read_json(&domain)?;
            domain.validate().map_err(|e| Failure::Config(e.into()))?;
            let point: NcPoint = read_json(&point)?;
            let verdict = domain
                .membership(&point)
                .map_err(|e| Failure::Runtime(e.into()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&verdict).map_err(|e| Failure::Runtime(e.into()))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Apply { map, point } => {
            let map: NcMapExpr = read_json(&map)?;
            map.validate().map_err(|e| Failure::Config(e.into()))?;
            let point: NcPoint = read_json(&point)?;
            let image = map.apply(&point).map_err(|e| Failure::Runtime(e.into()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&image).map_err(|e| Failure::Runtime(e.into()))?
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG_ERROR as u8)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CHECK_FAILED as u8)
        }
    }
}
