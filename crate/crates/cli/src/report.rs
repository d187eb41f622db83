//! Report tables and their JSON and CSV encodings.
//!
//! CSV columns per experiment kind:
//!
//! | kind | columns |
//! |---|---|
//! | ratio | `mechanism,exact,trials,seed,mean_alg_sw,mean_opt_sw,ratio,ci95_alg,ci95_opt,ci95_ratio` |
//! | ratio (trace) | `trial,alg_sw,opt_sw,budget_surplus,trades` |
//! | dsic | `mechanism,agent,misreport,trials,seed,mean_gain,std_error,ci_lower,ci_upper,critical_z,verdict` |
//! | ledger | `mechanism,trials,seed,budget_claim,ir_violations,wbb_violations,sbb_violations,min_surplus,max_surplus,trades` |
//! | lemma-suite | `inequality,lhs,rhs,holds` |
//! | lowerbound-sweep | `k,mechanism,expected_alg_sw,expected_opt_sw,ratio,closed_form,abs_diff` |
//! | deficit-demo | `mechanism,seller_value,buyer_values,winner,buyer_payment,seller_payment,budget_surplus` |
//!
//! A sweep prepends one column named after the swept parameter unless the
//! kind already reports it. JSON reports
//! carry the same rows plus `details`, the echoed config and `generated_at`,
//! the only field that differs between identical runs.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use twosided::verify::ratio::RatioReport;

use crate::config::{ExperimentConfig, ExperimentKind, Format};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub details: Value,
    /// Set when a claimed property failed; the CLI exits with status 2.
    pub violation: Option<String>,
}

impl Report {
    pub const RATIO_COLUMNS: [&'static str; 10] = [
        "mechanism",
        "exact",
        "trials",
        "seed",
        "mean_alg_sw",
        "mean_opt_sw",
        "ratio",
        "ci95_alg",
        "ci95_opt",
        "ci95_ratio",
    ];
    pub const TRACE_COLUMNS: [&'static str; 5] =
        ["trial", "alg_sw", "opt_sw", "budget_surplus", "trades"];
    pub const DSIC_COLUMNS: [&'static str; 11] = [
        "mechanism",
        "agent",
        "misreport",
        "trials",
        "seed",
        "mean_gain",
        "std_error",
        "ci_lower",
        "ci_upper",
        "critical_z",
        "verdict",
    ];
    pub const LEDGER_COLUMNS: [&'static str; 10] = [
        "mechanism",
        "trials",
        "seed",
        "budget_claim",
        "ir_violations",
        "wbb_violations",
        "sbb_violations",
        "min_surplus",
        "max_surplus",
        "trades",
    ];
    pub const LEMMA_COLUMNS: [&'static str; 4] = ["inequality", "lhs", "rhs", "holds"];
    pub const LOWERBOUND_COLUMNS: [&'static str; 7] = [
        "k",
        "mechanism",
        "expected_alg_sw",
        "expected_opt_sw",
        "ratio",
        "closed_form",
        "abs_diff",
    ];
    pub const DEFICIT_COLUMNS: [&'static str; 7] = [
        "mechanism",
        "seller_value",
        "buyer_values",
        "winner",
        "buyer_payment",
        "seller_payment",
        "budget_surplus",
    ];

    pub fn new(config: &ExperimentConfig, columns: &[&'static str]) -> Self {
        Report {
            kind: config.kind,
            seed: config.seed,
            config: config.raw.clone(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            details: Value::Null,
            violation: None,
        }
    }

    pub fn push_ratio(&mut self, r: &RatioReport) {
        self.rows.push(vec![
            json!(r.mechanism),
            json!(r.exact),
            json!(r.trials),
            json!(r.seed),
            json!(r.mean_alg_sw),
            json!(r.mean_opt_sw),
            json!(r.ratio),
            json!(r.ci95_alg),
            json!(r.ci95_opt),
            json!(r.ci95_ratio),
        ]);
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&Value>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Stacks per-value reports of a sweep under a leading `param` column,
    /// unless the reports already carry that column.
    pub fn combine(param: &'static str, parts: Vec<(u64, Report)>) -> Option<Report> {
        let first = parts.first()?.1.clone();
        let prepend = !first.columns.contains(&param);
        let mut out = Report {
            columns: if prepend {
                std::iter::once(param)
                    .chain(first.columns.iter().copied())
                    .collect()
            } else {
                first.columns.clone()
            },
            rows: Vec::new(),
            details: Value::Array(Vec::new()),
            violation: None,
            ..first
        };
        for (v, part) in parts {
            for row in part.rows {
                out.rows.push(if prepend {
                    std::iter::once(json!(v)).chain(row).collect()
                } else {
                    row
                });
            }
            if let Value::Array(d) = &mut out.details {
                d.push(json!({ param: v, "details": part.details }));
            }
            if out.violation.is_none() {
                out.violation = part.violation.map(|m| format!("{param}={v}: {m}"));
            }
        }
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .map(|c| c.to_string())
                        .zip(r.iter().cloned())
                        .collect::<Map<_, _>>(),
                )
            })
            .collect();
        let generated_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        json!({
            "kind": self.kind.as_str(),
            "generated_at": generated_at,
            "seed": self.seed,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
            "details": self.details,
            "violation": self.violation,
        })
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, out: &mut impl Write, format: Format) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
            }
            Format::Csv => self.write_csv(out)?,
        }
        Ok(())
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn save(&self, path: Option<&Path>, format: Format) -> Result<()> {
        match path {
            Some(p) => {
                let mut file = std::io::BufWriter::new(
                    std::fs::File::create(p)
                        .with_context(|| format!("creating {}", p.display()))?,
                );
                self.write(&mut file, format)?;
                file.flush()?;
            }
            None => self.write(&mut std::io::stdout().lock(), format)?,
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
