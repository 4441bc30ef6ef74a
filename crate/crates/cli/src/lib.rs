//! `bohm-lab`: named experiments on top of `bohm-core`, driven by TOML
//! configs and writing `report.json`, `summary.txt` and CSV data.

pub mod config;
mod error;
pub mod report;
pub mod scenarios;

use std::path::Path;

pub use config::{Config, ScenarioName};
pub use error::{CliError, Result};
use report::{Outputs, Report};

/// Result of [`run_scenario`]: the summary text and whether every check passed.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub summary: String,
}

/// Runs `name` with `cfg`, writing everything under `out_dir`.
pub fn run_scenario(name: ScenarioName, cfg: &Config, out_dir: &Path) -> Result<RunSummary> {
    if let Some(declared) = cfg.scenario {
        if declared != name {
            return Err(CliError::Usage(format!(
                "config is for scenario {declared}, not {name}"
            )));
        }
    }
    let mut out = Outputs::create(out_dir)?;
    let outcome = scenarios::run(name, cfg, &mut out)?;
    let passed = outcome.checks.iter().all(|c| c.passed);
    let mut files = out.written().to_vec();
    files.extend(["report.json".to_string(), "summary.txt".to_string()]);
    let report = Report {
        generated_at: report::timestamp(),
        scenario: name,
        passed,
        seed: cfg.seed,
        checks: &outcome.checks,
        results: &outcome.results,
        files: &files,
        config: cfg,
    };
    report::write_report(&mut out, &report)?;
    Ok(RunSummary {
        passed,
        failed_checks: report.failed().map(|c| c.name.clone()).collect(),
        summary: report::summary(&report),
    })
}
