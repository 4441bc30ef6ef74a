//! Checks, output files, `report.json` and `summary.txt`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;
use serde_json::Value;

use crate::config::{Config, ScenarioName};
use crate::error::{CliError, Result};

/// One pass/fail verdict with the number behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: String,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value < limit,
            value,
            bound: format!("< {limit:e}"),
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value > limit,
            value,
            bound: format!("> {limit:e}"),
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            value,
            bound: format!("in [{lo}, {hi}]"),
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            passed: ok,
            value: if ok { 1.0 } else { 0.0 },
            bound: "true".into(),
        }
    }

    pub fn equals(name: impl Into<String>, value: usize, want: usize) -> Self {
        Check {
            name: name.into(),
            passed: value == want,
            value: value as f64,
            bound: format!("= {want}"),
        }
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: (value - target).abs() <= tol,
            value,
            bound: format!("{target} +/- {tol:e}"),
        }
    }
}

/// What a scenario hands back: its verdicts and free-form numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
}

/// The output directory and the files written to it so far.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Opens `name` for writing and records it in the report.
    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|source| CliError::Output { path, source })?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(BufWriter::new(f))
    }

    /// Runs `body` on a fresh writer for `name` and flushes it.
    pub fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> bohm_core::Result<()>,
    ) -> Result<()> {
        let mut w = self.file(name)?;
        body(&mut w)?;
        w.flush().map_err(|source| CliError::Output {
            path: self.dir.join(name),
            source,
        })
    }

    /// Column table with 17 significant digits; NaN cells (masked points)
    /// are left empty.
    pub fn table(&mut self, name: &str, columns: &[(&str, &[f64])]) -> Result<()> {
        let rows = columns.first().map_or(0, |c| c.1.len());
        assert!(columns.iter().all(|c| c.1.len() == rows), "ragged table {name}");
        self.write(name, |w| {
            let header: Vec<&str> = columns.iter().map(|c| c.0).collect();
            writeln!(w, "{}", header.join(","))?;
            for i in 0..rows {
                let cells: Vec<String> = columns.iter().map(|c| cell(c.1[i])).collect();
                writeln!(w, "{}", cells.join(","))?;
            }
            Ok(())
        })
    }
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    /// The only field that differs between identical runs; pretty printing
    /// puts it on a line of its own.
    pub generated_at: String,
    pub scenario: ScenarioName,
    pub passed: bool,
    pub seed: u64,
    pub checks: &'a [Check],
    pub results: &'a Value,
    pub files: &'a [String],
    pub config: &'a Config,
}

impl Report<'_> {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

/// Writes `report.json` and `summary.txt`.
pub fn write_report(out: &mut Outputs, report: &Report<'_>) -> Result<()> {
    let json = serde_json::to_string_pretty(report).map_err(bohm_core::Error::from)?;
    out.write("report.json", |w| {
        writeln!(w, "{json}")?;
        Ok(())
    })?;
    let summary = summary(report);
    out.write("summary.txt", |w| {
        w.write_all(summary.as_bytes())?;
        Ok(())
    })
}

pub fn summary(report: &Report<'_>) -> String {
    let mut s = String::new();
    let total = report.checks.len();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    s.push_str(&format!(
        "{}: {} ({passed}/{total} checks)\n",
        report.scenario,
        if report.passed { "PASS" } else { "FAIL" }
    ));
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in report.checks {
        s.push_str(&format!(
            "  {} {:width$}  {:.6e}  ({})\n",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        ));
    }
    s
}
