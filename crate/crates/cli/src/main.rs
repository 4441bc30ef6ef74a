use std::path::PathBuf;
use std::process::ExitCode;

use bohm_lab::{run_scenario, CliError, Config, ScenarioName};
use clap::{Parser, Subcommand};

/// Madelung-Bohm quantum hydrodynamics experiments.
///
/// Log verbosity comes from BOHM_LAB_LOG (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "bohm-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run {
        scenario: ScenarioName,
        /// TOML config; defaults apply to anything it leaves out.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory [default: out/<scenario>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized scenarios, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the scenarios.
    List,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BOHM_LAB_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bohm-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::List => {
            for s in ScenarioName::ALL {
                println!("{:18} {}", s.as_str(), s.description());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = Config::load(&config)?;
            let name = cfg
                .scenario
                .ok_or_else(|| CliError::Usage(format!("{}: no `scenario` key", config.display())))?;
            println!("{}: ok, scenario {name}", config.display());
            if matches!(name, ScenarioName::AiryAnalytic) {
                println!("expected acceleration {}", cfg.expected_airy_acceleration());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            config,
            out,
            seed,
        } => {
            let mut cfg = match &config {
                Some(path) => Config::load(path)?,
                None => Config::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(scenario.as_str()));
            let run = run_scenario(scenario, &cfg, &out)?;
            print!("{}", run.summary);
            println!("wrote {}", out.display());
            if run.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("bohm-lab: failing checks: {}", run.failed_checks.join(", "));
                Ok(ExitCode::from(1))
            }
        }
    }
}
