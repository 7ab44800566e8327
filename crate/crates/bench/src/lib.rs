//! Configuration-driven experiment runner for the finite-sum lower-bound
//! toolkit: builds instances, runs solvers against static or resisting
//! oracles and writes CSV traces, certificates and a JSON report.

mod config;
mod experiment;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    parse_config, ConfigIssue, ExperimentConfig, ExperimentKind, InstanceConfig, SolverSpec, DEFAULT_BUDGET,
    DEFAULT_OUTPUT_DIR,
};
pub use experiment::{certify_experiment, run_experiment, ExperimentReport, Rollup, RunSummary};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "FINSUM_OUT_DIR";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{source}\n  advice: {advice}")]
    Capacity {
        source: finsum_bounds::Error,
        advice: String,
    },

    #[error(transparent)]
    Core(#[from] finsum_bounds::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: malformed report: {reason}")]
    Report { path: PathBuf, reason: String },
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Whether the error stems from the user's input rather than the run.
    pub fn is_usage(&self) -> bool {
        matches!(self, Self::Config(_))
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

/// Reads and validates a config file, applying an output directory override.
pub fn load_config(path: &Path, out_dir: Option<PathBuf>) -> Result<ExperimentConfig, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let mut config = parse_config(&text).map_err(BenchError::Config)?;
    if let Some(dir) = out_dir {
        config.output_dir = dir;
    }
    Ok(config)
}

/// Human-readable summary of a `report.json` written by a previous run,
/// together with the rollup verdict.
pub fn summarize_report(dir: &Path) -> Result<(String, bool), BenchError> {
    let path = dir.join("report.json");
    let text = fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
    let malformed = |reason: &str| BenchError::Report {
        path: path.clone(),
        reason: reason.to_string(),
    };
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| malformed(&e.to_string()))?;
    let passed = doc["rollup"]["passed"].as_bool().ok_or_else(|| malformed("missing rollup.passed"))?;
    let runs = doc["runs"].as_array().ok_or_else(|| malformed("missing runs"))?;

    let mut out = String::new();
    let kind = doc["config"]["kind"].as_str().unwrap_or("?");
    let rate = &doc["rate"];
    let _ = writeln!(
        out,
        "kind={kind} n={} kappa={} q={} calls_for_eps={}",
        rate["n"], rate["kappa"], rate["q"], rate["k_min_exact"]
    );
    let _ = writeln!(
        out,
        "{:<14}{:>10}{:>16}{:>16}{:>14}",
        "run", "calls", "rel_error", "log_bound", "certificate"
    );
    for r in runs {
        let num = |v: &serde_json::Value| v.as_f64().map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
        let status = r["certificate"]["status"].as_str().unwrap_or("-");
        let _ = writeln!(
            out,
            "{:<14}{:>10}{:>16}{:>16}{:>14}",
            r["label"].as_str().unwrap_or("?"),
            r["calls"],
            num(&r["final_rel_error"]),
            num(&r["final_log_lower_bound"]),
            status
        );
    }
    let table = dir.join("complexity.txt");
    if let Ok(t) = fs::read_to_string(&table) {
        out.push('\n');
        out.push_str(&t);
    }
    let _ = writeln!(out, "rollup: {}", if passed { "pass" } else { "FAIL" });
    Ok((out, passed))
}
