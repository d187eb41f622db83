//! Experiment runner for the `twosided` library.
//!
//! An experiment is one JSON config (see [`config`]); `run` executes it and
//! `sweep` repeats it over values of one parameter. Reports are tables
//! written as JSON or CSV (see [`report`]).

pub mod config;
pub mod experiment;
pub mod report;

use anyhow::{bail, Result};

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use report::Report;

/// Process exit status for a finished report: 0, or 2 on a violated claim.
pub fn exit_code(report: &Report) -> u8 {
    if report.violation.is_some() {
        2
    } else {
        0
    }
}

/// Runs a config as is.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    experiment::run(config)
}

/// Runs `config` once per value of `param`; rows are stacked in the order of
/// `values`.
pub fn sweep(config: &ExperimentConfig, param: &str, values: &[u64]) -> Result<Report> {
    let Some(&param) = config::SWEEPABLE.iter().find(|p| **p == param) else {
        bail!(
            "parameter {param:?} is not sweepable; expected one of {}",
            config::SWEEPABLE.join(", ")
        );
    };
    if values.is_empty() {
        bail!("--values: at least one value is needed");
    }
    let mut parts = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = config.clone();
        c.set_param(param, v)?;
        parts.push((v, run(&c)?));
    }
    let mut report = Report::combine(param, parts).expect("values is nonempty");
    report.config["sweep"] = serde_json::json!({ "param": param, "values": values });
    Ok(report)
}
