use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const VERSION: &str = concat!("dampwave ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    /// Human-readable acceptance condition, e.g. "<= 1e-8".
    pub limit: String,
}

impl CheckOutcome {
    pub fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: measured <= limit, measured, limit: format!("<= {limit:e}") }
    }

    pub fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), passed: (lo..=hi).contains(&measured), measured, limit: format!("in [{lo:e}, {hi:e}]") }
    }

    pub fn holds(name: &str, passed: bool, measured: f64, limit: &str) -> Self {
        Self { name: name.into(), passed, measured, limit: limit.into() }
    }
}

/// One JSON document per run. Wall-clock timings go to a sidecar so that
/// identical runs give identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<CheckOutcome>,
}

impl RunReport {
    pub fn new(command: &str, config: &impl Serialize, results: &impl Serialize) -> CliResult<Self> {
        Ok(Self {
            command: command.into(),
            version: VERSION.into(),
            config: serde_json::to_value(config)?,
            results: serde_json::to_value(results)?,
            checks: Vec::new(),
        })
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    /// Err(Check) listing every failed check.
    pub fn verdict(&self) -> CliResult<()> {
        let failed = self.failures();
        if failed.is_empty() {
            return Ok(());
        }
        Err(crate::error::CliError::Check { failed: failed.len(), names: failed.join(", ") })
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub phases: Vec<(String, f64)>,
}

impl Timings {
    pub fn record(&mut self, phase: &str, d: Duration) {
        self.phases.push((phase.into(), d.as_secs_f64()));
    }
}

pub fn write_outputs(dir: &Path, report: &RunReport, timings: &Timings) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    let mut t = serde_json::to_string_pretty(timings)?;
    t.push('\n');
    fs::write(dir.join("timings.json"), t)?;
    Ok(())
}
